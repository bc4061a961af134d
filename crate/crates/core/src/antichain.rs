//! Antichains of `{0,1}^n`: the LYM and Sperner functionals, chain hits, an
//! exact maximum-weight antichain solver and an exhaustive enumerator.

use std::collections::HashSet;

use crate::chain::{level_sets, ChainSample};
use crate::error::{Error, Result};
use crate::flow;
use crate::mask::SubsetMask;
use crate::measure::{LevelConditionals, ProductMeasure};
use crate::scalar::{tol, Real};

/// Slack allowed above the LYM bound of 1 and the Sperner bound.
pub const THEOREM_SLACK: f64 = 1e-9;

/// Largest `n` accepted by [`max_weight_antichain`].
pub const MAX_SOLVER_N: usize = 14;

/// Largest `n` accepted by [`enumerate_antichains`].
pub const MAX_ENUMERATE_N: usize = 5;

/// Distinct subsets of a common `[n]`, kept in ascending mask order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AntichainFamily {
    n: usize,
    members: Vec<SubsetMask>,
    checked: bool,
}

impl AntichainFamily {
    /// Validates the universe size and distinctness, not incomparability.
    pub fn new(n: usize, mut members: Vec<SubsetMask>) -> Result<Self> {
        for m in &members {
            m.check_n(n)?;
        }
        members.sort();
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateMember(w[0].to_string()));
        }
        Ok(AntichainFamily {
            n,
            members,
            checked: false,
        })
    }

    /// As [`new`](Self::new), additionally requiring an antichain.
    pub fn checked(n: usize, members: Vec<SubsetMask>) -> Result<Self> {
        Self::new(n, members)?.check()
    }

    pub fn check(mut self) -> Result<Self> {
        if !self.checked {
            if let Some((a, b)) = comparable_pair(&self.members) {
                return Err(Error::NotAntichain(b.to_string(), a.to_string()));
            }
            self.checked = true;
        }
        Ok(self)
    }

    /// All sets of size `level`.
    pub fn level(n: usize, level: usize) -> Result<Self> {
        if level > n {
            return Err(Error::LevelOutOfRange { level, n });
        }
        if n > 64 {
            return Err(Error::TooLarge { n, max: 64 });
        }
        Ok(AntichainFamily {
            n,
            members: level_sets(n, level).collect(),
            checked: true,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[SubsetMask] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_checked(&self) -> bool {
        self.checked
    }
}

/// First pair `(a, b)` with `a ⊂ b` strictly.
fn comparable_pair(members: &[SubsetMask]) -> Option<(&SubsetMask, &SubsetMask)> {
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            if a.is_strict_subset(b) {
                return Some((a, b));
            }
            if b.is_strict_subset(a) {
                return Some((b, a));
            }
        }
    }
    None
}

/// True iff no member strictly contains another.
pub fn is_antichain(members: &[SubsetMask]) -> Result<bool> {
    if let Some(first) = members.first() {
        for m in members {
            m.check_n(first.n())?;
        }
    }
    Ok(comparable_pair(members).is_none())
}

/// `Σ_ℓ Pr[z ∈ F | |z| = ℓ]`, at most 1 for every antichain.
pub fn lym_sum<T: Real>(measure: &ProductMeasure<T>, family: &AntichainFamily) -> Result<T> {
    lym_sum_with(&LevelConditionals::new(measure)?, family)
}

/// [`lym_sum`] against precomputed conditionals.
pub fn lym_sum_with<T: Real>(cond: &LevelConditionals<T>, family: &AntichainFamily) -> Result<T> {
    if family.n() != cond.n() {
        return Err(Error::DimensionMismatch {
            expected: cond.n(),
            found: family.n(),
        });
    }
    let family = if family.is_checked() {
        std::borrow::Cow::Borrowed(family)
    } else {
        std::borrow::Cow::Owned(family.clone().check()?)
    };
    let total = family
        .members()
        .iter()
        .try_fold(T::zero(), |acc, a| Ok::<_, Error>(acc + cond.conditional_point(a)?))?;
    if total > T::one() + tol(THEOREM_SLACK) {
        return Err(Error::Violation(format!("LYM sum {total} exceeds 1")));
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpernerCheck<T> {
    /// `Pr[z ∈ F]`.
    pub measure: T,
    /// `max_ℓ Pr[|z| = ℓ]`.
    pub max_level: T,
    pub satisfied: bool,
}

pub fn sperner_check<T: Real>(
    measure: &ProductMeasure<T>,
    family: &AntichainFamily,
) -> Result<SpernerCheck<T>> {
    let family = family.clone().check()?;
    family
        .members()
        .first()
        .map_or(Ok(()), |m| m.check_n(measure.n()))?;
    let mass = family
        .members()
        .iter()
        .try_fold(T::zero(), |acc, a| Ok::<_, Error>(acc + measure.point_mass(a)?))?;
    let (_, max_level) = measure.level_pmf().max();
    Ok(SpernerCheck {
        measure: mass,
        max_level,
        satisfied: mass <= max_level + tol(THEOREM_SLACK),
    })
}

/// Number of levels at which a chain meets a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ChainHitCount(pub usize);

pub fn chain_hits(chain: &ChainSample, family: &AntichainFamily) -> Result<ChainHitCount> {
    if chain.n() != family.n() {
        return Err(Error::DimensionMismatch {
            expected: family.n(),
            found: chain.n(),
        });
    }
    let members: HashSet<&SubsetMask> = family.members().iter().collect();
    Ok(ChainHitCount(
        chain.sets().iter().filter(|c| members.contains(c)).count(),
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxAntichain<T> {
    pub family: AntichainFamily,
    /// `Σ_{a∈F} Pr[z = a]`.
    pub weight: T,
    /// Value of the minimum flow; equals `weight` up to round-off.
    pub min_flow: T,
}

/// Exact maximum of `Pr[z ∈ F]` over antichains `F`, by minimum flow with
/// node lower bounds on the cover graph (`n <= 14`).
///
/// Ties are broken towards the lexicographically smallest ascending member
/// list.
pub fn max_weight_antichain<T: Real>(measure: &ProductMeasure<T>) -> Result<MaxAntichain<T>> {
    let n = measure.n();
    if n > MAX_SOLVER_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_SOLVER_N,
        });
    }
    let weights: Vec<T> = (0..1u64 << n)
        .map(|v| measure.point_mass(&SubsetMask::from_bits(n, v).expect("below 2^n")))
        .collect::<Result<_>>()?;
    let opt = flow::max_weight_antichain(n, &weights);
    let weight = opt
        .members
        .iter()
        .fold(T::zero(), |acc, &v| acc + weights[v as usize]);
    let members = opt
        .members
        .iter()
        .map(|&v| SubsetMask::from_bits(n, v).expect("below 2^n"))
        .collect();
    let family = AntichainFamily::checked(n, members)
        .map_err(|e| Error::Violation(format!("solver returned a non-antichain: {e}")))?;
    Ok(MaxAntichain {
        family,
        weight,
        min_flow: opt.min_flow,
    })
}

/// Every antichain of `{0,1}^n` (`n <= 5`), the empty family first.
pub fn enumerate_antichains(n: usize) -> Result<Antichains> {
    if n > MAX_ENUMERATE_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_ENUMERATE_N,
        });
    }
    Ok(Antichains {
        n,
        universe: 1 << n,
        members: Vec::new(),
        cursor: Vec::new(),
        started: false,
    })
}

/// Depth-first enumeration: each antichain is extended only by masks larger
/// than its current maximum that are incomparable to every member.
pub struct Antichains {
    n: usize,
    universe: u32,
    members: Vec<u32>,
    cursor: Vec<u32>,
    started: bool,
}

impl Antichains {
    fn family(&self) -> AntichainFamily {
        AntichainFamily {
            n: self.n,
            members: self
                .members
                .iter()
                .map(|&v| SubsetMask::from_bits(self.n, v as u64).expect("below 2^n"))
                .collect(),
            checked: true,
        }
    }

    fn fits(&self, c: u32) -> bool {
        self.members.iter().all(|&m| m & c != m && m & c != c)
    }
}

impl Iterator for Antichains {
    type Item = AntichainFamily;

    fn next(&mut self) -> Option<AntichainFamily> {
        if !self.started {
            self.started = true;
            self.cursor.push(0);
            return Some(self.family());
        }
        loop {
            let top = self.cursor.last_mut()?;
            let start = *top;
            let found = (start..self.universe).find(|&c| {
                self.members.iter().all(|&m| m & c != m && m & c != c)
            });
            match found {
                Some(c) => {
                    *self.cursor.last_mut().expect("nonempty") = c + 1;
                    debug_assert!(self.fits(c));
                    self.members.push(c);
                    self.cursor.push(c + 1);
                    return Some(self.family());
                }
                None => {
                    self.cursor.pop();
                    self.members.pop()?;
                }
            }
        }
    }
}
