//! Elementary symmetric polynomials of the odds vector and the coupling
//! weights `h_{s,j}` built from them.
//!
//! Every term in these sums is positive, so all accumulation happens in log
//! space with [`log_add_exp`] and nothing cancels.

use crate::error::{Error, Result};
use crate::mask::SubsetMask;
use crate::measure::OddsVector;
use crate::scalar::{count, log_add_exp, tol, Real};

#[cfg(feature = "exact")]
pub mod exact;

/// `ln g_ℓ(q)` for `ℓ = 0..=n`, where `g_ℓ` is the degree-ℓ elementary
/// symmetric polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct SymPolyTable<T> {
    log_g: Vec<T>,
}

impl<T: Real> SymPolyTable<T> {
    pub fn n(&self) -> usize {
        self.log_g.len() - 1
    }

    #[inline]
    pub fn log_g(&self, level: usize) -> T {
        self.log_g[level]
    }

    pub fn g(&self, level: usize) -> T {
        self.log_g[level].exp()
    }

    pub fn log_values(&self) -> &[T] {
        &self.log_g
    }

    /// Checks `g_{ℓ−1} g_{ℓ+1} ≤ g_ℓ²` at every interior level, in log space
    /// with additive `slack`.
    pub fn is_log_concave(&self, slack: f64) -> bool {
        let slack = tol::<T>(slack);
        self.log_g
            .windows(3)
            .all(|w| w[0] + w[2] <= w[1] + w[1] + slack)
    }
}

/// Log elementary symmetric sums over the coordinates yielded by `idx`,
/// truncated at `max_degree`. Degrees beyond the number of coordinates stay
/// at `-inf`.
pub(crate) fn log_elem_sym<T: Real>(
    log_q: &[T],
    idx: impl Iterator<Item = usize>,
    max_degree: usize,
) -> Vec<T> {
    let mut e = vec![T::neg_infinity(); max_degree + 1];
    e[0] = T::zero();
    let mut seen = 0usize;
    for j in idx {
        seen += 1;
        let lq = log_q[j];
        for k in (1..=seen.min(max_degree)).rev() {
            e[k] = log_add_exp(e[k], e[k - 1] + lq);
        }
    }
    e
}

/// `g_ℓ(q)` for every `ℓ` by the product-expansion DP.
pub fn elem_sym_all<T: Real>(q: &OddsVector<T>) -> SymPolyTable<T> {
    let n = q.n();
    SymPolyTable {
        log_g: log_elem_sym(q.log_q(), 0..n, n),
    }
}

/// Log `e_k` over the coordinates in `idx`, for `k = 0..=max_degree`.
pub fn elem_sym_restricted<T: Real>(
    q: &OddsVector<T>,
    idx: &SubsetMask,
    max_degree: usize,
) -> Result<Vec<T>> {
    idx.check_n(q.n())?;
    let available = idx.size();
    if max_degree > available {
        return Err(Error::DegreeOutOfRange {
            degree: max_degree,
            available,
        });
    }
    Ok(log_elem_sym(q.log_q(), idx.iter(), max_degree))
}

/// Combines the two halves of the split sum:
/// `h = Σ_k e_k(q|_s) · e_{ℓ−k}(q|_rest) / (ℓ + 1 − k)`.
pub(crate) fn log_h_from_parts<T: Real>(log_e_s: &[T], log_e_rest: &[T], level: usize) -> T {
    (0..=level).fold(T::neg_infinity(), |acc, k| {
        let term = log_e_s[k] + log_e_rest[level - k] - count::<T>(level + 1 - k).ln();
        log_add_exp(acc, term)
    })
}

fn check_extension<T: Real>(q: &OddsVector<T>, s: &SubsetMask, j: usize) -> Result<()> {
    s.check_n(q.n())?;
    if j >= q.n() {
        return Err(Error::CoordinateOutOfRange { index: j, n: q.n() });
    }
    if s.contains(j) {
        return Err(Error::CoordinateInSet { index: j });
    }
    Ok(())
}

/// `ln h_{s,j}`, where
/// `h_{s,j} = Σ_{|t|=ℓ, j∉t} q^t / |(s ∪ {j}) \ t|` and `ℓ = |s|`.
///
/// Since `j ∉ t`, the denominator is `ℓ + 1 − |t ∩ s|`, so the sum splits
/// into elementary symmetric sums over `s` and over `[n] \ (s ∪ {j})`.
/// At `ℓ = 0` the value is exactly 1.
pub fn log_h_value<T: Real>(q: &OddsVector<T>, s: &SubsetMask, j: usize) -> Result<T> {
    check_extension(q, s, j)?;
    let level = s.size();
    if level == 0 {
        return Ok(T::zero());
    }
    let e_s = log_elem_sym(q.log_q(), s.iter(), level);
    let rest = (0..q.n()).filter(|&i| i != j && !s.contains(i));
    let e_rest = log_elem_sym(q.log_q(), rest, level);
    Ok(log_h_from_parts(&e_s, &e_rest, level))
}

pub fn h_value<T: Real>(q: &OddsVector<T>, s: &SubsetMask, j: usize) -> Result<T> {
    log_h_value(q, s, j).map(T::exp)
}
