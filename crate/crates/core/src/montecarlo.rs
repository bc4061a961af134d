//! Statistical checks of the chain sampler against exact conditional laws.
//!
//! Small `n` compares the full level-`ℓ` histogram with `P_ℓ` (chi-square and
//! total variation). Larger `n` compares per-coordinate inclusion
//! frequencies with their exact values using Bonferroni-combined z-tests.
//! Work can be split across workers; worker `w` draws from a ChaCha stream
//! seeded with `seed ^ (w · 0x9E3779B97F4A7C15)` and counts are merged by
//! summation.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::antichain::{chain_hits, AntichainFamily};
use crate::chain::{level_sets, ChainSampler, DEFAULT_MEMO_ROWS};
use crate::error::{Error, Result};
use crate::mask::SubsetMask;
use crate::measure::ProductMeasure;
use crate::scalar::Real;

/// Largest `n` for which the whole level histogram is tested.
pub const HISTOGRAM_MAX_N: usize = 12;

/// Significance level used by default.
pub const DEFAULT_ALPHA: f64 = 0.001;

/// Minimum trials per comparison cell.
pub const TRIALS_PER_CELL: usize = 10;

/// Minimum trials for [`estimate_lym`].
pub const MIN_LYM_TRIALS: usize = 1000;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of worker `w`.
pub fn worker_seed(seed: u64, worker: usize) -> u64 {
    seed ^ (worker as u64).wrapping_mul(GOLDEN)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GofMethod {
    /// Chi-square over every level-ℓ set.
    Histogram,
    /// Max |z| over per-coordinate inclusion frequencies.
    Inclusion,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GofReport {
    pub method: GofMethod,
    pub level: usize,
    pub trials: usize,
    /// Chi-square statistic, or max |z| for [`GofMethod::Inclusion`].
    pub statistic: f64,
    pub dof: usize,
    pub threshold: f64,
    pub pass: bool,
    /// Exact total variation distance of the histogram, when enumerated.
    pub tv_distance: Option<f64>,
}

/// `Φ⁻¹(1 − α)`.
fn upper_normal_quantile(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha)
}

/// Upper-`alpha` quantile of the chi-square distribution.
///
/// One and two degrees of freedom use their closed forms; higher counts use
/// the Wilson–Hilferty cube-root normal approximation: within 1% of the
/// exact quantile for `dof >= 3` at `alpha >= 0.01`, and for `dof >= 6` at
/// `alpha = 0.001` (about 1.7% high at `dof = 3` there).
pub fn chi_square_threshold(dof: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    match dof {
        0 => Err(Error::InvalidDof),
        1 => Ok(upper_normal_quantile(alpha / 2.0).powi(2)),
        2 => Ok(-2.0 * alpha.ln()),
        k => {
            let k = k as f64;
            let z = upper_normal_quantile(alpha);
            let c = 2.0 / (9.0 * k);
            Ok(k * (1.0 - c + z * c.sqrt()).powi(3))
        }
    }
}

/// Per-worker tallies, merged by summation.
#[derive(Default)]
struct Tally {
    sets: HashMap<SubsetMask, usize>,
    inclusion: Vec<usize>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for (s, c) in other.sets {
            *self.sets.entry(s).or_default() += c;
        }
        if self.inclusion.len() < other.inclusion.len() {
            self.inclusion.resize(other.inclusion.len(), 0);
        }
        for (a, b) in self.inclusion.iter_mut().zip(other.inclusion) {
            *a += b;
        }
        self
    }
}

fn tally_level<T: Real, R: Rng + ?Sized>(
    sampler: &mut ChainSampler<T>,
    level: usize,
    trials: usize,
    histogram: bool,
    rng: &mut R,
) -> Result<Tally> {
    let n = sampler.kernel().n();
    let mut t = Tally {
        sets: HashMap::new(),
        inclusion: vec![0; n],
    };
    for _ in 0..trials {
        let s = sampler.sample_level(level, rng)?;
        for j in s.iter() {
            t.inclusion[j] += 1;
        }
        if histogram {
            *t.sets.entry(s).or_default() += 1;
        }
    }
    Ok(t)
}

fn required_trials(n: usize, level: usize) -> usize {
    let cells = if n <= HISTOGRAM_MAX_N {
        level_sets(n, level).count()
    } else {
        n
    };
    TRIALS_PER_CELL * cells
}

fn evaluate<T: Real>(
    measure: &ProductMeasure<T>,
    level: usize,
    trials: usize,
    alpha: f64,
    tally: Tally,
) -> Result<GofReport> {
    let n = measure.n();
    let sampler = ChainSampler::new(measure)?;
    let cond = sampler.kernel().conditionals();
    if n <= HISTOGRAM_MAX_N {
        let total = trials as f64;
        let mut chi2 = 0.0;
        let mut tv = 0.0;
        let mut cells = 0;
        for s in level_sets(n, level) {
            cells += 1;
            let expected = cond.conditional_point(&s)?.to_f64().unwrap_or(f64::NAN);
            let observed = tally.sets.get(&s).copied().unwrap_or(0) as f64;
            let e = expected * total;
            chi2 += (observed - e).powi(2) / e;
            tv += (observed / total - expected).abs();
        }
        let dof = cells - 1;
        let threshold = if dof == 0 {
            0.0
        } else {
            chi_square_threshold(dof, alpha)?
        };
        let statistic = if dof == 0 { 0.0 } else { chi2 };
        Ok(GofReport {
            method: GofMethod::Histogram,
            level,
            trials,
            statistic,
            dof,
            threshold,
            pass: statistic <= threshold,
            tv_distance: Some((tv / 2.0).min(1.0)),
        })
    } else {
        let exact = cond.inclusion_probabilities(level)?;
        let total = trials as f64;
        let mut max_z: f64 = 0.0;
        for (j, pi) in exact.iter().enumerate() {
            let pi = pi.to_f64().unwrap_or(f64::NAN);
            let freq = tally.inclusion[j] as f64 / total;
            let var = pi * (1.0 - pi) / total;
            let z = if var > 0.0 {
                (freq - pi).abs() / var.sqrt()
            } else if (freq - pi).abs() > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            max_z = max_z.max(z);
        }
        let threshold = upper_normal_quantile(alpha / (2.0 * n as f64));
        Ok(GofReport {
            method: GofMethod::Inclusion,
            level,
            trials,
            statistic: max_z,
            dof: n,
            threshold,
            pass: max_z <= threshold,
            tv_distance: None,
        })
    }
}

fn check_level_request<T: Real>(measure: &ProductMeasure<T>, level: usize, trials: usize) -> Result<()> {
    measure.ensure_nontrivial()?;
    let n = measure.n();
    if level > n {
        return Err(Error::LevelOutOfRange { level, n });
    }
    let required = required_trials(n, level);
    if trials < required {
        return Err(Error::InsufficientTrials { trials, required });
    }
    Ok(())
}

/// Goodness of fit of the chain sampler's level-`ℓ` law against `P_ℓ`,
/// single worker, at significance [`DEFAULT_ALPHA`].
pub fn estimate_level_marginal<T: Real, R: Rng + ?Sized>(
    measure: &ProductMeasure<T>,
    level: usize,
    trials: usize,
    rng: &mut R,
) -> Result<GofReport> {
    check_level_request(measure, level, trials)?;
    let mut sampler = ChainSampler::new(measure)?.with_memo(DEFAULT_MEMO_ROWS);
    let histogram = measure.n() <= HISTOGRAM_MAX_N;
    let tally = tally_level(&mut sampler, level, trials, histogram, rng)?;
    evaluate(measure, level, trials, DEFAULT_ALPHA, tally)
}

/// Mean and standard error of the chain-hit count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LymEstimate {
    pub mean_hits: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Default, Clone, Copy)]
struct HitMoments {
    sum: f64,
    sum_sq: f64,
}

fn hit_moments<T: Real, R: Rng + ?Sized>(
    sampler: &mut ChainSampler<T>,
    family: &AntichainFamily,
    trials: usize,
    rng: &mut R,
) -> Result<HitMoments> {
    let mut m = HitMoments::default();
    for _ in 0..trials {
        let h = chain_hits(&sampler.sample_chain(rng), family)?.0 as f64;
        m.sum += h;
        m.sum_sq += h * h;
    }
    Ok(m)
}

fn lym_estimate(m: HitMoments, trials: usize) -> LymEstimate {
    let t = trials as f64;
    let mean = m.sum / t;
    let var = if trials > 1 {
        ((m.sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    LymEstimate {
        mean_hits: mean,
        stderr: (var / t).sqrt(),
        trials,
    }
}

fn check_lym_request<T: Real>(
    measure: &ProductMeasure<T>,
    family: &AntichainFamily,
    trials: usize,
) -> Result<AntichainFamily> {
    measure.ensure_nontrivial()?;
    if trials < MIN_LYM_TRIALS {
        return Err(Error::InsufficientTrials {
            trials,
            required: MIN_LYM_TRIALS,
        });
    }
    if family.n() != measure.n() {
        return Err(Error::DimensionMismatch {
            expected: measure.n(),
            found: family.n(),
        });
    }
    family.clone().check()
}

/// Monte Carlo estimate of `E[L]`, the mean number of levels at which a
/// sampled chain meets `family`.
pub fn estimate_lym<T: Real, R: Rng + ?Sized>(
    measure: &ProductMeasure<T>,
    family: &AntichainFamily,
    trials: usize,
    rng: &mut R,
) -> Result<LymEstimate> {
    let family = check_lym_request(measure, family, trials)?;
    let mut sampler = ChainSampler::new(measure)?.with_memo(DEFAULT_MEMO_ROWS);
    let m = hit_moments(&mut sampler, &family, trials, rng)?;
    Ok(lym_estimate(m, trials))
}

/// Seeded multi-worker driver. Results depend only on `seed` and `workers`,
/// never on how many threads execute them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Harness {
    pub seed: u64,
    pub workers: usize,
    pub threads: usize,
    pub alpha: f64,
}

impl Harness {
    pub fn new(seed: u64, workers: usize) -> Self {
        Harness {
            seed,
            workers: workers.max(1),
            threads: 1,
            alpha: DEFAULT_ALPHA,
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Trials assigned to worker `w`: an even split, remainder to the first.
    fn share(&self, trials: usize, w: usize) -> usize {
        trials / self.workers + usize::from(w < trials % self.workers)
    }

    /// Runs `job(worker, rng, trials)` for every worker, in order of worker
    /// index, on up to `threads` OS threads.
    fn run<U, F>(&self, trials: usize, job: F) -> Vec<Result<U>>
    where
        U: Send,
        F: Fn(usize, &mut ChaCha8Rng, usize) -> Result<U> + Sync,
    {
        let work = |w: usize| {
            let mut rng = ChaCha8Rng::seed_from_u64(worker_seed(self.seed, w));
            job(w, &mut rng, self.share(trials, w))
        };
        let threads = self.threads.min(self.workers);
        if threads <= 1 {
            return (0..self.workers).map(work).collect();
        }
        let mut out: Vec<Option<Result<U>>> = (0..self.workers).map(|_| None).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let work = &work;
                    let workers = self.workers;
                    scope.spawn(move || {
                        (t..workers)
                            .step_by(threads)
                            .map(|w| (w, work(w)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (w, r) in h.join().expect("worker thread panicked") {
                    out[w] = Some(r);
                }
            }
        });
        out.into_iter().map(|r| r.expect("every worker ran")).collect()
    }

    pub fn level_marginal<T: Real>(
        &self,
        measure: &ProductMeasure<T>,
        level: usize,
        trials: usize,
    ) -> Result<GofReport> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        check_level_request(measure, level, trials)?;
        let histogram = measure.n() <= HISTOGRAM_MAX_N;
        let parts = self.run(trials, |_, rng, share| {
            let mut sampler = ChainSampler::new(measure)?.with_memo(DEFAULT_MEMO_ROWS);
            tally_level(&mut sampler, level, share, histogram, rng)
        });
        let tally = parts
            .into_iter()
            .try_fold(Tally::default(), |acc, p| p.map(|p| acc.merge(p)))?;
        evaluate(measure, level, trials, self.alpha, tally)
    }

    pub fn lym<T: Real>(
        &self,
        measure: &ProductMeasure<T>,
        family: &AntichainFamily,
        trials: usize,
    ) -> Result<LymEstimate> {
        let family = check_lym_request(measure, family, trials)?;
        let parts = self.run(trials, |_, rng, share| {
            let mut sampler = ChainSampler::new(measure)?.with_memo(DEFAULT_MEMO_ROWS);
            hit_moments(&mut sampler, &family, share, rng)
        });
        let m = parts.into_iter().try_fold(HitMoments::default(), |acc, p| {
            p.map(|p| HitMoments {
                sum: acc.sum + p.sum,
                sum_sq: acc.sum_sq + p.sum_sq,
            })
        })?;
        Ok(lym_estimate(m, trials))
    }

    /// Empirical per-coordinate inclusion counts at each requested level from
    /// `trials` full chains (one chain serves every level).
    pub fn inclusion_counts<T: Real>(
        &self,
        measure: &ProductMeasure<T>,
        levels: &[usize],
        trials: usize,
    ) -> Result<Vec<Vec<usize>>> {
        let n = measure.n();
        if let Some(&level) = levels.iter().find(|&&l| l > n) {
            return Err(Error::LevelOutOfRange { level, n });
        }
        let parts = self.run(trials, |_, rng, share| {
            let mut sampler = ChainSampler::new(measure)?.with_memo(DEFAULT_MEMO_ROWS);
            let mut counts = vec![vec![0usize; n]; levels.len()];
            for _ in 0..share {
                let chain = sampler.sample_chain(rng);
                for (row, &l) in counts.iter_mut().zip(levels) {
                    for j in chain.level(l).iter() {
                        row[j] += 1;
                    }
                }
            }
            Ok(counts)
        });
        parts
            .into_iter()
            .try_fold(vec![vec![0usize; n]; levels.len()], |mut acc, p| {
                let p = p?;
                for (a, b) in acc.iter_mut().zip(p) {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                }
                Ok(acc)
            })
    }
}

/// Chi-square two-sample statistic between two histograms over the same
/// cells, with its degrees of freedom (cells seen in either sample, minus 1).
pub fn two_sample_chi_square(a: &HashMap<SubsetMask, usize>, b: &HashMap<SubsetMask, usize>) -> (f64, usize) {
    let na: usize = a.values().sum();
    let nb: usize = b.values().sum();
    let (na, nb) = (na as f64, nb as f64);
    let ka = (nb / na).sqrt();
    let kb = (na / nb).sqrt();
    let mut keys: Vec<&SubsetMask> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let stat = keys
        .iter()
        .map(|k| {
            let x = a.get(*k).copied().unwrap_or(0) as f64;
            let y = b.get(*k).copied().unwrap_or(0) as f64;
            (ka * x - kb * y).powi(2) / (x + y)
        })
        .sum();
    (stat, keys.len().saturating_sub(1))
}
