//! Anti-concentration of the level distribution: `max_ℓ Pr[|z| = ℓ]` is at
//! most a constant over `σ_P`, where `σ_P² = Σ_j p_j (1 − p_j)`.
//!
//! Three explicit bounds are exposed, each a relaxation of the previous one:
//! the characteristic-function integral
//! `B(σ) = 2∫_0^{1/2} exp(−2σ² sin²(πθ)) dθ`, the Gaussian bound
//! `√(2/π)/σ` obtained from `sin ξ ≥ ξ/2`, and the looser `√π/σ` that also
//! drops the `π²/2` factor.

use crate::error::{Error, Result};
use crate::measure::ProductMeasure;
use crate::quad::adaptive_simpson;
use crate::scalar::{count, lit, tol, Real};

/// Absolute tolerance of the quadrature for `B(σ)`.
pub const QUAD_TOL: f64 = 1e-10;

/// Maximum bisection depth of the quadrature.
pub const QUAD_MAX_DEPTH: u32 = 40;

/// Standard deviation of `|z|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaValue<T> {
    pub sigma2: T,
    pub sigma: T,
}

impl<T: Real> SigmaValue<T> {
    pub fn from_sigma(sigma: T) -> Self {
        SigmaValue {
            sigma2: sigma * sigma,
            sigma,
        }
    }

    fn positive(&self) -> Result<()> {
        if self.sigma > T::zero() {
            Ok(())
        } else {
            Err(Error::ZeroSigma)
        }
    }
}

pub fn sigma<T: Real>(measure: &ProductMeasure<T>) -> SigmaValue<T> {
    let sigma2 = measure
        .p()
        .iter()
        .fold(T::zero(), |acc, &p| acc + p * (T::one() - p));
    SigmaValue {
        sigma2,
        sigma: sigma2.sqrt(),
    }
}

/// `B(σ) = 2∫_0^{1/2} exp(−2σ² sin²(πθ)) dθ`, an upper bound on
/// `max_t Pr[Σ_j z_j = t]` for `±1`-valued coordinates.
pub fn bound_quadrature<T: Real>(s: SigmaValue<T>) -> Result<T> {
    s.positive()?;
    let two_s2 = lit::<T>(2.0) * s.sigma2;
    let pi = T::PI();
    let integrand = |theta: T| {
        let sn = (pi * theta).sin();
        (-two_s2 * sn * sn).exp()
    };
    let half = lit::<T>(0.5);
    let integral = adaptive_simpson(integrand, T::zero(), half, tol(QUAD_TOL), QUAD_MAX_DEPTH);
    Ok(lit::<T>(2.0) * integral)
}

/// Which closed-form relaxation of `B(σ)` to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ClosedMode {
    /// `√π / σ`: `sin²(πθ) ≥ θ²` after the `π²/2 ≥ 1` step.
    Paper,
    /// `√(2/π) / σ`: `sin²(πθ) ≥ π²θ²/4`, integrated as a Gaussian.
    #[default]
    Tight,
}

impl ClosedMode {
    /// `C` in the bound `C / σ`.
    pub fn constant<T: Real>(self) -> T {
        match self {
            ClosedMode::Paper => T::PI().sqrt(),
            ClosedMode::Tight => (lit::<T>(2.0) / T::PI()).sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClosedMode::Paper => "paper",
            ClosedMode::Tight => "tight",
        }
    }
}

pub fn bound_closed<T: Real>(s: SigmaValue<T>, mode: ClosedMode) -> Result<T> {
    s.positive()?;
    Ok(mode.constant::<T>() / s.sigma)
}

/// Exact level maximum alongside the bounds it must respect.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport<T> {
    pub sigma: SigmaValue<T>,
    /// `max_ℓ Pr[|z| = ℓ]`.
    pub exact_max: T,
    pub quadrature_bound: T,
    pub closed_bound: T,
    pub constant_used: T,
    pub mode: ClosedMode,
}

impl<T: Real> BoundReport<T> {
    /// `exact_max ≤ B(σ) ≤ C/σ`, each step within `slack`.
    pub fn is_ordered(&self, slack: f64) -> bool {
        let slack = tol::<T>(slack);
        self.exact_max <= self.quadrature_bound + slack
            && self.quadrature_bound <= self.closed_bound + slack
    }
}

/// Compares the exact level maximum with the bounds.
///
/// The integral bound is stated for `Σ_j z_j` with `z_j ∈ {±1}`; the map
/// `t = 2ℓ − n` is a bijection between the two supports, so the same bound
/// applies to `Pr[|z| = ℓ]`.
pub fn level_bound_check<T: Real>(
    measure: &ProductMeasure<T>,
    mode: ClosedMode,
) -> Result<BoundReport<T>> {
    let s = sigma(measure);
    let quadrature_bound = bound_quadrature(s)?;
    let closed_bound = bound_closed(s, mode)?;
    let (_, exact_max) = measure.level_pmf().max();
    Ok(BoundReport {
        sigma: s,
        exact_max,
        quadrature_bound,
        closed_bound,
        constant_used: mode.constant(),
        mode,
    })
}

/// `σ · max_ℓ Pr[|z| = ℓ]` for the uniform measure on `n` coordinates
/// (`n` even), i.e. `(√n / 2) · C(n, n/2) / 2^n`, evaluated in log space.
pub fn sharpness_ratio<T: Real>(n: usize) -> Result<T> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddSize(n));
    }
    let half = n / 2;
    // ln C(n, n/2) = Σ_{k=1}^{n/2} ln((n/2 + k) / k)
    let log_central = (1..=half).fold(T::zero(), |acc, k| {
        acc + (count::<T>(half + k) / count::<T>(k)).ln()
    });
    let log_ratio = lit::<T>(0.5) * count::<T>(n).ln() - lit::<T>(2.0).ln() + log_central
        - count::<T>(n) * lit::<T>(2.0).ln();
    Ok(log_ratio.exp())
}
