//! Acceptance suite: one line per criterion, `PASS`/`FAIL` with the measured
//! worst case and wall time. Runs without the libtest harness so the lines
//! are always printed; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sperner_lab::antichain::{enumerate_antichains, lym_sum_with, max_weight_antichain};
use sperner_lab::anticoncentration::{bound_closed, level_bound_check, sharpness_ratio, sigma};
use sperner_lab::chain::{exact_level_law, level_sets};
use sperner_lab::montecarlo::estimate_lym;
use sperner_lab::symfunc::{elem_sym_all, h_value};
use sperner_lab::{
    AntichainFamily, ClosedMode, Conditionals, Harness, Kernel, Measure, SubsetMask,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> Measure {
    Measure::new((0..n).map(|_| rng.random_range(0.02..0.98)).collect()).unwrap()
}

fn all_sets(n: usize) -> impl Iterator<Item = SubsetMask> {
    (0u64..1 << n).map(move |b| SubsetMask::from_bits(n, b).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// `h_{s,j}` straight from its definition: a sum over `t ⊆ [n] \ {j}` with
/// `|t| = |s|` of `Π_{a∈t} q_a / |(s ∪ {j}) \ t|`.
fn h_by_definition(q: &[f64], s: &SubsetMask, j: usize) -> f64 {
    let n = q.len();
    let l = s.size();
    if l == 0 {
        return 1.0;
    }
    let sj = s.with(j);
    level_sets(n, l)
        .filter(|t| !t.contains(j))
        .map(|t| {
            let outside = sj.iter().filter(|&a| !t.contains(a)).count() as f64;
            t.iter().map(|a| q[a]).product::<f64>() / outside
        })
        .sum()
}

/// `g_ℓ(q)` by summing over all `ℓ`-sets.
fn g_by_definition(q: &[f64], l: usize) -> f64 {
    level_sets(q.len(), l)
        .map(|t| t.iter().map(|a| q[a]).product::<f64>())
        .sum()
}

fn kernel_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_a, mut worst_b, mut worst_h) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let p = random_measure(&mut rng, n);
        let odds = p.odds().unwrap();
        let q = odds.q().to_vec();
        let table = elem_sym_all(&odds);
        let g: Vec<f64> = (0..=n).map(|l| g_by_definition(&q, l)).collect();
        for (l, &gl) in g.iter().enumerate() {
            worst_a = worst_a.max(rel(table.g(l), gl));
        }
        for s in all_sets(n) {
            let l = s.size();
            if l == n {
                continue;
            }
            let mut row = 0.0;
            for j in (0..n).filter(|&j| !s.contains(j)) {
                let h = h_value(&odds, &s, j).unwrap();
                worst_h = worst_h.max(rel(h, h_by_definition(&q, &s, j)));
                row += q[j] * h;
            }
            worst_a = worst_a.max(rel(row, g[l + 1]));
            if l >= 1 {
                let col: f64 = s
                    .iter()
                    .map(|j| h_value(&odds, &s.without(j), j).unwrap())
                    .sum();
                worst_b = worst_b.max(rel(col, g[l - 1]));
            }
        }
    }
    let worst = worst_a.max(worst_b).max(worst_h);
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("identity A {worst_a:.2e}, identity B {worst_b:.2e}, h vs definition {worst_h:.2e} (tol 1e-9 rel)"),
    }
}

fn marginal_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let p = random_measure(&mut rng, n);
        let kernel = Kernel::new(&p).unwrap();
        let mut dist = BTreeMap::from([(SubsetMask::empty(n), 1.0)]);
        for l in 0..=n {
            if l > 0 {
                dist = kernel.pushforward(&dist).unwrap();
            }
            // Exact P_ℓ from point masses, independent of the kernel.
            let level_mass = p.level_pmf().get(l);
            for s in level_sets(n, l) {
                let exact = p.point_mass(&s).unwrap() / level_mass;
                let got = dist.get(&s).copied().unwrap_or(0.0);
                worst = worst.max((got - exact).abs());
            }
            let law = exact_level_law(kernel.conditionals(), l).unwrap();
            for (s, v) in &law {
                worst = worst.max((dist[s] - v).abs());
            }
        }
    }
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("max atom error {worst:.2e} (tol 1e-9)"),
    }
}

fn lym() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let families: Vec<AntichainFamily> = enumerate_antichains(5).unwrap().collect();
    let measures: Vec<Conditionals> = (0..20)
        .map(|_| Conditionals::new(&random_measure(&mut rng, 5)).unwrap())
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut errors = 0usize;
    for f in &families {
        for c in &measures {
            match lym_sum_with(c, f) {
                Ok(v) => worst = worst.max(v),
                Err(_) => errors += 1,
            }
        }
    }
    let mut level_dev = 0.0f64;
    for l in 0..=5 {
        let f = AntichainFamily::level(5, l).unwrap();
        for c in &measures {
            level_dev = level_dev.max((lym_sum_with(c, &f).unwrap() - 1.0).abs());
        }
    }
    Outcome {
        pass: families.len() == 7581 && errors == 0 && worst <= 1.0 + 1e-9 && level_dev <= 1e-12,
        detail: format!(
            "{} antichains x 20 measures, max LYM sum {worst:.15}, full-level deviation {level_dev:.2e}",
            families.len()
        ),
    }
}

fn sperner_tightness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let small: Vec<Vec<Vec<u64>>> = (3..=5)
        .map(|n| {
            enumerate_antichains(n)
                .unwrap()
                .map(|f| f.members().iter().map(|m| m.as_u64().unwrap()).collect())
                .collect()
        })
        .collect();
    let (mut gap, mut brute_gap) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(3..=10);
        let p = random_measure(&mut rng, n);
        let best = max_weight_antichain(&p).unwrap();
        gap = gap.max((best.weight - p.level_pmf().max().1).abs());
        if n <= 5 {
            let w: Vec<f64> = all_sets(n).map(|s| p.point_mass(&s).unwrap()).collect();
            let brute = small[n - 3]
                .iter()
                .map(|f| f.iter().map(|&m| w[m as usize]).sum::<f64>())
                .fold(0.0, f64::max);
            brute_gap = brute_gap.max((best.weight - brute).abs());
        }
    }
    Outcome {
        pass: gap <= 1e-9 && brute_gap <= 1e-12,
        detail: format!("optimum vs best level {gap:.2e} (tol 1e-9), vs enumeration {brute_gap:.2e}"),
    }
}

fn anticoncentration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    let mut worst = f64::NEG_INFINITY;
    while checked < 1000 {
        let n = rng.random_range(1..=60);
        let p = random_measure(&mut rng, n);
        if sigma(&p).sigma <= 0.1 {
            continue;
        }
        checked += 1;
        let r = level_bound_check(&p, ClosedMode::Tight).unwrap();
        let paper = bound_closed(r.sigma, ClosedMode::Paper).unwrap();
        for gap in [
            r.exact_max - r.quadrature_bound,
            r.quadrature_bound - r.closed_bound,
            r.closed_bound - paper,
        ] {
            worst = worst.max(gap);
        }
    }
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("{checked} measures, largest chain violation {worst:.3e} (slack 1e-9)"),
    }
}

fn sharp_constant() -> Outcome {
    let r = sharpness_ratio::<f64>(10_000).unwrap();
    let target = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let err = rel(r, target);
    Outcome {
        pass: r.is_finite() && err <= 0.01,
        detail: format!("ratio {r:.6} vs {target:.6}, relative error {err:.2e} (tol 1%)"),
    }
}

fn sampler_statistics() -> Outcome {
    const N: usize = 20;
    const TRIALS: usize = 100_000;
    let levels = [5, 10, 15];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = random_measure(&mut rng, N);
    let cond = Conditionals::new(&p).unwrap();
    let harness = Harness::new(0, 16);
    let counts = harness.inclusion_counts(&p, &levels, TRIALS).unwrap();
    let mut worst_z = 0.0f64;
    for (row, &l) in counts.iter().zip(&levels) {
        let exact = cond.inclusion_probabilities(l).unwrap();
        for (&c, &pi) in row.iter().zip(&exact) {
            let se = (pi * (1.0 - pi) / TRIALS as f64).sqrt();
            worst_z = worst_z.max((c as f64 / TRIALS as f64 - pi).abs() / se);
        }
    }
    // Antichain spanning two levels: 5-sets containing 0 and 15-sets avoiding 0.
    let members = level_sets(N, 5)
        .filter(|s| s.contains(0))
        .chain(level_sets(N, 15).filter(|s| !s.contains(0)))
        .collect();
    let family = AntichainFamily::checked(N, members).unwrap();
    let exact = lym_sum_with(&cond, &family).unwrap();
    let mut lym_rng = ChaCha8Rng::seed_from_u64(0);
    let est = estimate_lym(&p, &family, TRIALS, &mut lym_rng).unwrap();
    let lym_z = (est.mean_hits - exact).abs() / est.stderr;
    Outcome {
        pass: worst_z <= 4.0 && lym_z <= 4.0,
        detail: format!(
            "max inclusion |z| {worst_z:.2}, LYM {:.5} vs exact {exact:.5} (|z| {lym_z:.2}); limit 4",
            est.mean_hits
        ),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let small = write(dir.path(), "small.json", r#"{"p": [0.2, 0.5, 0.7, 0.35], "name": "small"}"#);
    let large = write(
        dir.path(),
        "large.json",
        &format!(
            r#"{{"p": [{}]}}"#,
            (0..18).map(|i| format!("{}", 0.1 + 0.04 * i as f64)).collect::<Vec<_>>().join(", ")
        ),
    );
    let family = write(dir.path(), "family.json", r#"{"n": 4, "members": ["0x3", "0x5", "0x6", "0x9", "0xa", "0xc"]}"#);
    let runs: Vec<Vec<&str>> = vec![
        vec!["levels", "--measure", &small],
        vec!["levels", "--measure", &small, "--output", "csv", "--precision", "5"],
        vec!["chain-sample", "--measure", &large, "--trials", "50", "--seed", "9"],
        vec!["verify", "--measure", &small],
        vec!["verify", "--measure", &large, "--trials", "50"],
        vec!["lym", "--measure", &small, "--family", &family],
        vec!["sperner", "--measure", &small, "--family", &family],
        vec!["maxantichain", "--measure", &small],
        vec!["bound", "--measure", &large],
        vec!["bound", "--measure", &small, "--mode", "paper", "--output", "csv"],
        vec!["mc-check", "--measure", &small, "--level", "2", "--trials", "20000", "--seed", "3"],
        vec!["mc-check", "--measure", &large, "--level", "9", "--trials", "5000"],
        vec!["enumerate", "--n", "4"],
    ];
    let bin = env!("CARGO_BIN_EXE_sperner-lab");
    let mut mismatched = Vec::new();
    for args in &runs {
        let once = || {
            let out = Command::new(bin).args(args).output().unwrap();
            (out.status.code(), out.stdout, out.stderr)
        };
        let (a, b) = (once(), once());
        if a != b || a.0 != Some(0) || a.1.is_empty() {
            mismatched.push(args[0]);
        }
    }
    Outcome {
        pass: mismatched.is_empty(),
        detail: if mismatched.is_empty() {
            format!("{} invocations byte-identical across two runs", runs.len())
        } else {
            format!("differing or failing: {mismatched:?}")
        },
    }
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 kernel identities", kernel_identities, Duration::from_secs(30)),
        ("2 marginal exactness", marginal_exactness, Duration::from_secs(60)),
        ("3 LYM inequality", lym, Duration::from_secs(120)),
        ("4 Sperner tightness", sperner_tightness, Duration::from_secs(300)),
        ("5 anti-concentration ordering", anticoncentration, Duration::from_secs(60)),
        ("6 sharp constant", sharp_constant, Duration::from_secs(1)),
        ("7 sampler statistics", sampler_statistics, Duration::from_secs(120)),
        ("8 CLI determinism", determinism, Duration::from_secs(300)),
    ];
    let mut failures = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= budget;
        failures += usize::from(!pass);
        println!(
            "{} [{name}] {} | {:.2}s of {}s",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
