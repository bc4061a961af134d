//! Product measures on `{0,1}^n`, their level (Poisson-binomial) law, and the
//! conditional laws `P_ℓ` on each level.

use rand::Rng;

use crate::error::{Error, Result};
use crate::mask::SubsetMask;
use crate::scalar::{lit, log_add_exp, tol, Real};
use crate::symfunc::{self, SymPolyTable};

/// Inputs this far outside `[0, 1]` are rejected; anything closer is clamped.
const CLAMP_SLACK: f64 = 1e-12;

/// Above this many coordinates the level law is always computed in log space.
const DIRECT_MAX_N: usize = 64;

/// `n` independent Bernoulli coordinates, coordinate `j` present with
/// probability `p[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductMeasure<T> {
    p: Vec<T>,
    name: Option<String>,
}

impl<T: Real> ProductMeasure<T> {
    pub fn new(p: Vec<T>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        Self::validated(p)
    }

    fn validated(mut p: Vec<T>) -> Result<Self> {
        let slack = lit::<T>(CLAMP_SLACK);
        for (index, x) in p.iter_mut().enumerate() {
            if !(*x >= -slack && *x <= T::one() + slack) {
                return Err(Error::InvalidProbability {
                    index,
                    value: x.to_f64().unwrap_or(f64::NAN),
                });
            }
            *x = x.max(T::zero()).min(T::one());
        }
        Ok(ProductMeasure { p, name: None })
    }

    /// Every coordinate equal to 1/2.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![lit(0.5); n])
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.p.len()
    }

    #[inline]
    pub fn p(&self) -> &[T] {
        &self.p
    }

    pub fn is_nontrivial(&self) -> bool {
        self.p.iter().all(|&x| x > T::zero() && x < T::one())
    }

    /// Fails on the first coordinate with `p ∈ {0, 1}`.
    pub fn ensure_nontrivial(&self) -> Result<()> {
        match self
            .p
            .iter()
            .position(|&x| x <= T::zero() || x >= T::one())
        {
            None => Ok(()),
            Some(index) => Err(Error::TrivialCoordinate {
                index,
                value: self.p[index].to_f64().unwrap_or(f64::NAN),
            }),
        }
    }

    /// `Pr[z = s] = Π_{a∈s} p_a · Π_{j∉s} (1 − p_j)`.
    pub fn point_mass(&self, s: &SubsetMask) -> Result<T> {
        s.check_n(self.n())?;
        Ok(self
            .p
            .iter()
            .enumerate()
            .fold(T::one(), |acc, (j, &pj)| {
                acc * if s.contains(j) { pj } else { T::one() - pj }
            }))
    }

    /// `ln Pr[z = s]`, `-inf` when the point is impossible.
    pub fn log_point_mass(&self, s: &SubsetMask) -> Result<T> {
        s.check_n(self.n())?;
        Ok(self
            .p
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (j, &pj)| {
                acc + if s.contains(j) {
                    pj.ln()
                } else {
                    (-pj).ln_1p()
                }
            }))
    }

    /// Distribution of `|z|`.
    pub fn level_pmf(&self) -> LevelPmf<T> {
        self.level_pmf_with(PmfMode::Auto)
    }

    pub fn level_pmf_with(&self, mode: PmfMode) -> LevelPmf<T> {
        match mode {
            PmfMode::Direct => LevelPmf::from_probs(self.level_probs_direct()),
            PmfMode::Log => LevelPmf::from_log_probs(self.level_log_probs()),
            PmfMode::Auto => {
                if self.n() > DIRECT_MAX_N {
                    return LevelPmf::from_log_probs(self.level_log_probs());
                }
                let probs = self.level_probs_direct();
                if self.has_underflow(&probs) {
                    LevelPmf::from_log_probs(self.level_log_probs())
                } else {
                    LevelPmf::from_probs(probs)
                }
            }
        }
    }

    fn level_probs_direct(&self) -> Vec<T> {
        let mut probs = vec![T::zero(); self.n() + 1];
        probs[0] = T::one();
        for (i, &pj) in self.p.iter().enumerate() {
            let qj = T::one() - pj;
            for l in (1..=i + 1).rev() {
                probs[l] = probs[l] * qj + probs[l - 1] * pj;
            }
            probs[0] = probs[0] * qj;
        }
        probs
    }

    fn level_log_probs(&self) -> Vec<T> {
        let mut logs = vec![T::neg_infinity(); self.n() + 1];
        logs[0] = T::zero();
        for (i, &pj) in self.p.iter().enumerate() {
            let (lp, lq) = (pj.ln(), (-pj).ln_1p());
            for l in (1..=i + 1).rev() {
                logs[l] = log_add_exp(logs[l] + lq, logs[l - 1] + lp);
            }
            logs[0] = logs[0] + lq;
        }
        logs
    }

    /// A zero at a level that is structurally reachable.
    fn has_underflow(&self, probs: &[T]) -> bool {
        let forced_in = self.p.iter().filter(|&&x| x >= T::one()).count();
        let forced_out = self.p.iter().filter(|&&x| x <= T::zero()).count();
        (forced_in..=self.n() - forced_out).any(|l| probs[l] == T::zero())
    }

    pub fn odds(&self) -> Result<OddsVector<T>> {
        self.ensure_nontrivial()?;
        let q = self.p.iter().map(|&x| x / (T::one() - x)).collect();
        let log_q = self.p.iter().map(|&x| x.ln() - (-x).ln_1p()).collect();
        Ok(OddsVector { q, log_q })
    }

    /// `P_ℓ(s) = Pr[z = s | |z| = |s|]`.
    ///
    /// Builds the elementary symmetric table on every call; use
    /// [`LevelConditionals`] when evaluating many sets.
    pub fn conditional_point(&self, s: &SubsetMask) -> Result<T> {
        LevelConditionals::new(self)?.conditional_point(s)
    }

    /// One independent draw `z ~ P`.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> SubsetMask {
        let mut s = SubsetMask::empty(self.n());
        for (j, &pj) in self.p.iter().enumerate() {
            let u: f64 = rng.random();
            if u < pj.to_f64().unwrap_or(0.0) {
                s = s.with(j);
            }
        }
        s
    }

    /// Splits off coordinates with `p ∈ {0, 1}`.
    pub fn reduce_trivial(&self) -> Reduction<T> {
        let n = self.n();
        let mut kept = Vec::new();
        let mut forced_in = SubsetMask::empty(n);
        let mut forced_out = SubsetMask::empty(n);
        for (j, &pj) in self.p.iter().enumerate() {
            if pj >= T::one() {
                forced_in = forced_in.with(j);
            } else if pj <= T::zero() {
                forced_out = forced_out.with(j);
            } else {
                kept.push(j);
            }
        }
        let measure = ProductMeasure {
            p: kept.iter().map(|&j| self.p[j]).collect(),
            name: self.name.clone(),
        };
        Reduction {
            measure,
            forced_in,
            forced_out,
            kept,
        }
    }
}

/// Result of [`ProductMeasure::reduce_trivial`]. The reduced measure may have
/// `n = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction<T> {
    pub measure: ProductMeasure<T>,
    pub forced_in: SubsetMask,
    pub forced_out: SubsetMask,
    /// Original index of each coordinate of `measure`.
    pub kept: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PmfMode {
    /// Linear DP, falling back to log space for large `n` or underflow.
    #[default]
    Auto,
    Direct,
    Log,
}

/// `Pr[|z| = ℓ]` for `ℓ = 0..=n`, in linear and log form.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelPmf<T> {
    probs: Vec<T>,
    log_probs: Vec<T>,
}

impl<T: Real> LevelPmf<T> {
    fn from_probs(probs: Vec<T>) -> Self {
        let log_probs = probs
            .iter()
            .map(|&x| if x > T::zero() { x.ln() } else { T::neg_infinity() })
            .collect();
        LevelPmf { probs, log_probs }
    }

    fn from_log_probs(log_probs: Vec<T>) -> Self {
        let probs = log_probs.iter().map(|x| x.exp()).collect();
        LevelPmf { probs, log_probs }
    }

    pub fn n(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn log_probs(&self) -> &[T] {
        &self.log_probs
    }

    pub fn get(&self, level: usize) -> T {
        self.probs[level]
    }

    /// Largest level probability and the first level attaining it.
    pub fn max(&self) -> (usize, T) {
        self.probs
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (l, x)| {
                if x > best.1 {
                    (l, x)
                } else {
                    best
                }
            })
    }
}

/// `q_j = p_j / (1 − p_j)` and `ln q_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct OddsVector<T> {
    q: Vec<T>,
    log_q: Vec<T>,
}

impl<T: Real> OddsVector<T> {
    /// Odds given directly; each must be positive and finite.
    pub fn from_odds(q: Vec<T>) -> Result<Self> {
        if let Some(index) = q.iter().position(|&x| !(x > T::zero() && x.is_finite())) {
            return Err(Error::NonPositiveOdds {
                index,
                value: q[index].to_f64().unwrap_or(f64::NAN),
            });
        }
        let log_q = q.iter().map(|x| x.ln()).collect();
        Ok(OddsVector { q, log_q })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[T] {
        &self.q
    }

    pub fn log_q(&self) -> &[T] {
        &self.log_q
    }
}

/// The conditional laws `P_ℓ` of a non-trivial measure, with the symmetric
/// polynomial normalizers precomputed.
#[derive(Clone, Debug)]
pub struct LevelConditionals<T> {
    odds: OddsVector<T>,
    table: SymPolyTable<T>,
}

impl<T: Real> LevelConditionals<T> {
    pub fn new(measure: &ProductMeasure<T>) -> Result<Self> {
        let odds = measure.odds()?;
        let table = symfunc::elem_sym_all(&odds);
        Ok(LevelConditionals { odds, table })
    }

    pub fn n(&self) -> usize {
        self.odds.n()
    }

    pub fn odds(&self) -> &OddsVector<T> {
        &self.odds
    }

    pub fn table(&self) -> &SymPolyTable<T> {
        &self.table
    }

    /// `ln P_ℓ(s) = Σ_{a∈s} ln q_a − ln g_ℓ(q)` with `ℓ = |s|`.
    pub fn log_conditional_point(&self, s: &SubsetMask) -> Result<T> {
        s.check_n(self.n())?;
        let lq = self.odds.log_q();
        let num = s.iter().fold(T::zero(), |acc, a| acc + lq[a]);
        Ok(num - self.table.log_g(s.size()))
    }

    pub fn conditional_point(&self, s: &SubsetMask) -> Result<T> {
        Ok(self.log_conditional_point(s)?.exp())
    }

    /// `Pr[j ∈ z | |z| = ℓ] = q_j g_{ℓ−1}(q without j) / g_ℓ(q)` for every `j`.
    pub fn inclusion_probabilities(&self, level: usize) -> Result<Vec<T>> {
        let n = self.n();
        if level > n {
            return Err(Error::LevelOutOfRange { level, n });
        }
        if level == 0 {
            return Ok(vec![T::zero(); n]);
        }
        let log_gl = self.table.log_g(level);
        (0..n)
            .map(|j| {
                let rest = SubsetMask::full(n).without(j);
                let e = symfunc::elem_sym_restricted(&self.odds, &rest, level - 1)?;
                Ok((self.odds.log_q()[j] + e[level - 1] - log_gl).exp())
            })
            .collect()
    }
}

/// Sum of `x` within the crate's normalization tolerance of 1.
pub(crate) fn is_normalized<T: Real>(total: T, slack: f64) -> bool {
    (total - T::one()).abs() <= tol(slack)
}
