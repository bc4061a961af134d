//! The one-step coupling between consecutive levels and the maximal-chain
//! sampler built from it.
//!
//! From a set `s` at level `ℓ` the kernel moves to `s ∪ {j}` with probability
//! `q_j h_{s,j} / g_{ℓ+1}(q)`. Started from `∅`, the level-`ℓ` set of the
//! resulting chain is distributed as `P_ℓ` for every `ℓ`.

use std::collections::BTreeMap;
use std::fmt;
use std::num::NonZeroUsize;

use lru::LruCache;
use rand::Rng;

use crate::error::{Error, Result};
use crate::mask::SubsetMask;
use crate::measure::{is_normalized, LevelConditionals, ProductMeasure};
use crate::scalar::{lit, log_sum_exp, Real};
use crate::symfunc::{log_elem_sym, log_h_from_parts};

/// Largest `n` for which whole levels are enumerated.
pub const MAX_ENUMERATION_N: usize = 16;

/// Default capacity of the sampler's row memo.
pub const DEFAULT_MEMO_ROWS: usize = 1 << 16;

/// Successor law of one set.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionRow<T> {
    from: SubsetMask,
    succ: Vec<(usize, T)>,
    log_row_sum: T,
}

impl<T: Real> TransitionRow<T> {
    pub fn from(&self) -> &SubsetMask {
        &self.from
    }

    /// `(j, Pr[from → from ∪ {j}])` in ascending `j`.
    pub fn successors(&self) -> &[(usize, T)] {
        &self.succ
    }

    pub fn prob(&self, j: usize) -> Option<T> {
        self.succ
            .binary_search_by_key(&j, |&(k, _)| k)
            .ok()
            .map(|i| self.succ[i].1)
    }

    /// `ln Σ_{j∉s} q_j h_{s,j}` before normalization; equals `ln g_{ℓ+1}(q)`.
    pub fn log_row_sum(&self) -> T {
        self.log_row_sum
    }

    /// Inverse-CDF draw over successors in ascending coordinate order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SubsetMask {
        let u: T = lit(rng.random::<f64>());
        let mut cum = T::zero();
        let last = self.succ.len() - 1;
        let j = self
            .succ
            .iter()
            .find(|&&(_, p)| {
                cum = cum + p;
                u < cum
            })
            .map_or(self.succ[last].0, |&(j, _)| j);
        self.from.with(j)
    }
}

/// A maximal chain `∅ = c_0 ⊂ c_1 ⊂ … ⊂ c_n = [n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainSample {
    sets: Vec<SubsetMask>,
}

impl ChainSample {
    pub fn new(sets: Vec<SubsetMask>) -> Option<Self> {
        let c = ChainSample { sets };
        c.is_maximal().then_some(c)
    }

    /// The chain that adds coordinates in the given order.
    pub fn from_order(n: usize, order: &[usize]) -> Option<Self> {
        let mut sets = vec![SubsetMask::empty(n)];
        for &j in order {
            if j >= n {
                return None;
            }
            let next = sets.last().expect("nonempty").with(j);
            sets.push(next);
        }
        Self::new(sets)
    }

    pub fn n(&self) -> usize {
        self.sets.len() - 1
    }

    pub fn sets(&self) -> &[SubsetMask] {
        &self.sets
    }

    pub fn level(&self, level: usize) -> &SubsetMask {
        &self.sets[level]
    }

    pub fn is_maximal(&self) -> bool {
        let Some(n) = self.sets.len().checked_sub(1) else {
            return false;
        };
        self.sets.iter().enumerate().all(|(l, c)| c.n() == n && c.size() == l)
            && self.sets.windows(2).all(|w| w[0].is_strict_subset(&w[1]))
    }
}

/// `c_1,…,c_n` as comma-separated hex masks.
impl fmt::Display for ChainSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.sets.iter().skip(1).enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Coupling kernel of a fixed non-trivial measure.
#[derive(Clone, Debug)]
pub struct CouplingKernel<T> {
    cond: LevelConditionals<T>,
}

impl<T: Real> CouplingKernel<T> {
    pub fn new(measure: &ProductMeasure<T>) -> Result<Self> {
        Ok(CouplingKernel {
            cond: LevelConditionals::new(measure)?,
        })
    }

    pub fn n(&self) -> usize {
        self.cond.n()
    }

    pub fn conditionals(&self) -> &LevelConditionals<T> {
        &self.cond
    }

    /// Log weights `ln q_j + ln h_{s,j}` for each `j ∉ s`.
    fn log_weights(&self, s: &SubsetMask) -> Vec<(usize, T)> {
        let n = self.n();
        let level = s.size();
        let log_q = self.cond.odds().log_q();
        if level == 0 {
            return (0..n).map(|j| (j, log_q[j])).collect();
        }
        let e_s = log_elem_sym(log_q, s.iter(), level);
        (0..n)
            .filter(|&j| !s.contains(j))
            .map(|j| {
                let rest = (0..n).filter(|&i| i != j && !s.contains(i));
                let e_rest = log_elem_sym(log_q, rest, level);
                (j, log_q[j] + log_h_from_parts(&e_s, &e_rest, level))
            })
            .collect()
    }

    pub fn row(&self, s: &SubsetMask) -> Result<TransitionRow<T>> {
        s.check_n(self.n())?;
        if s.size() == self.n() {
            return Err(Error::FullSet);
        }
        let weights = self.log_weights(s);
        let logs: Vec<T> = weights.iter().map(|&(_, w)| w).collect();
        let log_row_sum = log_sum_exp(&logs);
        let succ = weights
            .into_iter()
            .map(|(j, w)| (j, (w - log_row_sum).exp()))
            .collect();
        Ok(TransitionRow {
            from: s.clone(),
            succ,
            log_row_sum,
        })
    }

    /// One exact step of the level distribution: `Σ_s dist(s) · row(s)`.
    pub fn pushforward(
        &self,
        dist: &BTreeMap<SubsetMask, T>,
    ) -> Result<BTreeMap<SubsetMask, T>> {
        let n = self.n();
        if n > MAX_ENUMERATION_N {
            return Err(Error::TooLarge {
                n,
                max: MAX_ENUMERATION_N,
            });
        }
        let mut level = None;
        let mut total = T::zero();
        for (s, &w) in dist {
            s.check_n(n)?;
            match level {
                None => level = Some(s.size()),
                Some(l) if l != s.size() => return Err(Error::MixedLevels(l, s.size())),
                Some(_) => {}
            }
            total = total + w;
        }
        if !is_normalized(total, 1e-9) {
            return Err(Error::Unnormalized {
                total: total.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mut out = BTreeMap::new();
        for (s, &w) in dist {
            let row = self.row(s)?;
            for &(j, pr) in row.successors() {
                let slot = out.entry(s.with(j)).or_insert(T::zero());
                *slot = *slot + w * pr;
            }
        }
        Ok(out)
    }

    /// Maximum relative residuals of the row identity
    /// `Σ_{j∉s} q_j h_{s,j} = g_{ℓ+1}` over all `s` at `level`, and of the
    /// column identity `Σ_{j∈s'} h_{s'\{j},j} = g_ℓ` over all `s'` at
    /// `level + 1`.
    pub fn identity_residuals(&self, level: usize) -> Result<IdentityReport> {
        let n = self.n();
        if n > MAX_ENUMERATION_N {
            return Err(Error::TooLarge {
                n,
                max: MAX_ENUMERATION_N,
            });
        }
        if level >= n {
            return Err(Error::LevelOutOfRange { level, n });
        }
        let rows: Vec<_> = level_sets(n, level).collect();
        let cols: Vec<_> = level_sets(n, level + 1).collect();
        Ok(self.residuals_over(level, &rows, &cols))
    }

    /// As [`identity_residuals`](Self::identity_residuals), over `samples`
    /// uniformly drawn sets per identity instead of whole levels.
    pub fn identity_residuals_sampled<R: Rng + ?Sized>(
        &self,
        level: usize,
        samples: usize,
        rng: &mut R,
    ) -> Result<IdentityReport> {
        let n = self.n();
        if level >= n {
            return Err(Error::LevelOutOfRange { level, n });
        }
        let draw = |k: usize, rng: &mut R| {
            let idx = rand::seq::index::sample(rng, n, k);
            SubsetMask::from_elements(n, idx.iter()).expect("indices below n")
        };
        let rows: Vec<_> = (0..samples).map(|_| draw(level, rng)).collect();
        let cols: Vec<_> = (0..samples).map(|_| draw(level + 1, rng)).collect();
        Ok(self.residuals_over(level, &rows, &cols))
    }

    fn residuals_over(
        &self,
        level: usize,
        rows: &[SubsetMask],
        cols: &[SubsetMask],
    ) -> IdentityReport {
        let table = self.cond.table();
        let rel = |log_lhs: T, log_rhs: T| {
            ((log_lhs - log_rhs).exp() - T::one())
                .abs()
                .to_f64()
                .unwrap_or(f64::NAN)
        };
        let log_next = table.log_g(level + 1);
        let row_residual = rows
            .iter()
            .map(|s| {
                let logs: Vec<T> = self.log_weights(s).into_iter().map(|(_, w)| w).collect();
                rel(log_sum_exp(&logs), log_next)
            })
            .fold(0.0, f64::max);
        let log_here = table.log_g(level);
        let log_q = self.cond.odds().log_q();
        let column_residual = cols
            .iter()
            .map(|sp| {
                let logs: Vec<T> = sp
                    .iter()
                    .map(|j| {
                        let s = sp.without(j);
                        let e_s = log_elem_sym(log_q, s.iter(), level);
                        let rest = (0..self.n()).filter(|&i| !sp.contains(i));
                        let e_rest = log_elem_sym(log_q, rest, level);
                        if level == 0 {
                            T::zero()
                        } else {
                            log_h_from_parts(&e_s, &e_rest, level)
                        }
                    })
                    .collect();
                rel(log_sum_exp(&logs), log_here)
            })
            .fold(0.0, f64::max);
        IdentityReport {
            level,
            row_residual,
            column_residual,
            rows_checked: rows.len(),
            columns_checked: cols.len(),
        }
    }
}

/// Outcome of [`verify_kernel_identities`].
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub level: usize,
    /// Max relative residual of `Σ_{j∉s} q_j h_{s,j} = g_{ℓ+1}`.
    pub row_residual: f64,
    /// Max relative residual of `Σ_{j∈s'} h_{s'\{j},j} = g_ℓ`.
    pub column_residual: f64,
    pub rows_checked: usize,
    pub columns_checked: usize,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.row_residual.max(self.column_residual)
    }
}

/// Every subset of `[n]` of size `k`, in increasing mask order (`n <= 64`).
pub fn level_sets(n: usize, k: usize) -> impl Iterator<Item = SubsetMask> {
    assert!(n <= 64, "level enumeration needs n <= 64");
    let limit: u128 = 1u128 << n;
    let mut cur: Option<u128> = (k <= n).then(|| (1u128 << k) - 1);
    std::iter::from_fn(move || {
        let v = cur?;
        if v >= limit {
            cur = None;
            return None;
        }
        cur = if v == 0 {
            None
        } else {
            // Gosper's hack: next integer with the same popcount.
            let c = v & v.wrapping_neg();
            let r = v + c;
            Some((((r ^ v) >> 2) / c) | r)
        };
        Some(SubsetMask::from_bits(n, v as u64).expect("below 2^n"))
    })
}

/// Draws maximal chains, optionally caching rows in a bounded LRU memo.
pub struct ChainSampler<T> {
    kernel: CouplingKernel<T>,
    memo: Option<LruCache<SubsetMask, TransitionRow<T>>>,
}

impl<T: Real> ChainSampler<T> {
    pub fn new(measure: &ProductMeasure<T>) -> Result<Self> {
        Ok(ChainSampler {
            kernel: CouplingKernel::new(measure)?,
            memo: None,
        })
    }

    /// Enables the row memo with room for `capacity` rows (0 disables it).
    pub fn with_memo(mut self, capacity: usize) -> Self {
        self.memo = NonZeroUsize::new(capacity).map(LruCache::new);
        self
    }

    pub fn kernel(&self) -> &CouplingKernel<T> {
        &self.kernel
    }

    fn step<R: Rng + ?Sized>(&mut self, s: &SubsetMask, rng: &mut R) -> SubsetMask {
        match &mut self.memo {
            Some(memo) => {
                if let Some(row) = memo.get(s) {
                    return row.sample(rng);
                }
                let row = self.kernel.row(s).expect("set below the full level");
                let next = row.sample(rng);
                memo.put(s.clone(), row);
                next
            }
            None => self
                .kernel
                .row(s)
                .expect("set below the full level")
                .sample(rng),
        }
    }

    pub fn sample_chain<R: Rng + ?Sized>(&mut self, rng: &mut R) -> ChainSample {
        let n = self.kernel.n();
        let mut sets = Vec::with_capacity(n + 1);
        sets.push(SubsetMask::empty(n));
        for _ in 0..n {
            let next = self.step(sets.last().expect("nonempty"), rng);
            sets.push(next);
        }
        let chain = ChainSample { sets };
        debug_assert!(chain.is_maximal());
        chain
    }

    /// Walks `level` steps from `∅`.
    pub fn sample_level<R: Rng + ?Sized>(&mut self, level: usize, rng: &mut R) -> Result<SubsetMask> {
        let n = self.kernel.n();
        if level > n {
            return Err(Error::LevelOutOfRange { level, n });
        }
        let mut s = SubsetMask::empty(n);
        for _ in 0..level {
            s = self.step(&s, rng);
        }
        Ok(s)
    }
}

pub fn transition_row<T: Real>(
    measure: &ProductMeasure<T>,
    s: &SubsetMask,
) -> Result<TransitionRow<T>> {
    CouplingKernel::new(measure)?.row(s)
}

pub fn sample_chain<T: Real, R: Rng + ?Sized>(
    measure: &ProductMeasure<T>,
    rng: &mut R,
) -> Result<ChainSample> {
    Ok(ChainSampler::new(measure)?.sample_chain(rng))
}

pub fn sample_level<T: Real, R: Rng + ?Sized>(
    measure: &ProductMeasure<T>,
    level: usize,
    rng: &mut R,
) -> Result<SubsetMask> {
    ChainSampler::new(measure)?.sample_level(level, rng)
}

pub fn pushforward_level<T: Real>(
    measure: &ProductMeasure<T>,
    dist: &BTreeMap<SubsetMask, T>,
) -> Result<BTreeMap<SubsetMask, T>> {
    CouplingKernel::new(measure)?.pushforward(dist)
}

/// Exhaustive residuals for `n <= 16`.
pub fn verify_kernel_identities<T: Real>(
    measure: &ProductMeasure<T>,
    level: usize,
) -> Result<IdentityReport> {
    CouplingKernel::new(measure)?.identity_residuals(level)
}

/// Exact `P_ℓ` as a map, for `n <= 16`.
pub fn exact_level_law<T: Real>(
    cond: &LevelConditionals<T>,
    level: usize,
) -> Result<BTreeMap<SubsetMask, T>> {
    let n = cond.n();
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    if level > n {
        return Err(Error::LevelOutOfRange { level, n });
    }
    level_sets(n, level)
        .map(|s| cond.conditional_point(&s).map(|p| (s, p)))
        .collect()
}
