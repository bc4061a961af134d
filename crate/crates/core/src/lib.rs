//! Antichains under product measures on the Boolean cube.
//!
//! For a product measure `P` on `{0,1}^n` with coordinate probabilities
//! `p_j`, this crate provides:
//!
//! - exact point, level (Poisson-binomial) and conditional probabilities
//!   ([`measure`]);
//! - elementary symmetric polynomials of the odds `q_j = p_j / (1 − p_j)` and
//!   the coupling weights `h_{s,j}` ([`symfunc`]);
//! - a Markov kernel between consecutive levels whose level-`ℓ` marginal is
//!   `P` conditioned on `|z| = ℓ`, and a maximal-chain sampler built from it
//!   ([`chain`]);
//! - the LYM sum `Σ_ℓ Pr[z ∈ A | |z| = ℓ] ≤ 1`, the Sperner bound
//!   `Pr[z ∈ A] ≤ max_ℓ Pr[|z| = ℓ]`, and an exact maximum-weight antichain
//!   solver ([`antichain`]);
//! - anti-concentration bounds for the level distribution in terms of
//!   `σ_P² = Σ_j p_j (1 − p_j)` ([`anticoncentration`]);
//! - a seeded Monte Carlo harness comparing sampled chains with the exact
//!   laws ([`montecarlo`]).
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix `f64`, which is what the tolerances throughout are calibrated for.
//! With the `exact` feature, [`symfunc::exact`] evaluates the same kernel
//! over [`Rational`].
//!
//! ```
//! use sperner_lab::{AntichainFamily, Measure, SubsetMask};
//!
//! let p = Measure::new(vec![0.2, 0.5, 0.7]).unwrap();
//! let pmf = p.level_pmf();
//! assert!((pmf.get(1) - 0.43).abs() < 1e-12);
//!
//! let a = SubsetMask::from_elements(3, [0]).unwrap();
//! let b = SubsetMask::from_elements(3, [1, 2]).unwrap();
//! let family = AntichainFamily::checked(3, vec![a, b]).unwrap();
//! let lym = sperner_lab::antichain::lym_sum(&p, &family).unwrap();
//! assert!(lym <= 1.0);
//! ```

pub mod antichain;
pub mod anticoncentration;
pub mod chain;
pub mod error;
mod flow;
pub mod mask;
pub mod measure;
pub mod montecarlo;
pub mod quad;
pub mod scalar;
pub mod symfunc;

pub use antichain::{AntichainFamily, ChainHitCount, MaxAntichain, SpernerCheck};
pub use anticoncentration::{BoundReport, ClosedMode, SigmaValue};
pub use chain::{ChainSample, ChainSampler, CouplingKernel, IdentityReport, TransitionRow};
pub use error::{Error, Result};
pub use mask::SubsetMask;
pub use measure::{LevelConditionals, LevelPmf, OddsVector, PmfMode, ProductMeasure, Reduction};
pub use montecarlo::{GofMethod, GofReport, Harness, LymEstimate};
pub use scalar::Real;
pub use symfunc::SymPolyTable;

pub type Measure = ProductMeasure<f64>;
pub type Measure32 = ProductMeasure<f32>;
pub type Pmf = LevelPmf<f64>;
pub type Odds = OddsVector<f64>;
pub type Conditionals = LevelConditionals<f64>;
pub type Kernel = CouplingKernel<f64>;
pub type Sampler = ChainSampler<f64>;
pub type Row = TransitionRow<f64>;
pub type Bounds = BoundReport<f64>;

#[cfg(feature = "exact")]
pub type Rational = num_rational::BigRational;
