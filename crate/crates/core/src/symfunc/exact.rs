//! Linear-domain versions of the kernel quantities over any exact field,
//! e.g. big rationals. Used as test oracles; the floating-point path lives in
//! the parent module.

use num_traits::{FromPrimitive, Num};

use crate::mask::SubsetMask;

pub fn odds<T: Clone + Num>(p: &[T]) -> Vec<T> {
    p.iter()
        .map(|x| x.clone() / (T::one() - x.clone()))
        .collect()
}

fn elem_sym_over<T: Clone + Num>(q: &[T], idx: impl Iterator<Item = usize>, max_degree: usize) -> Vec<T> {
    let mut e = vec![T::zero(); max_degree + 1];
    e[0] = T::one();
    let mut seen = 0;
    for j in idx {
        seen += 1;
        for k in (1..=seen.min(max_degree)).rev() {
            e[k] = e[k].clone() + e[k - 1].clone() * q[j].clone();
        }
    }
    e
}

/// `g_0..g_n`.
pub fn elem_sym<T: Clone + Num>(q: &[T]) -> Vec<T> {
    elem_sym_over(q, 0..q.len(), q.len())
}

/// `h_{s,j}` by the split sum; `j ∉ s` is the caller's responsibility.
pub fn h_value<T: Clone + Num + FromPrimitive>(q: &[T], s: &SubsetMask, j: usize) -> T {
    let level = s.size();
    if level == 0 {
        return T::one();
    }
    let e_s = elem_sym_over(q, s.iter(), level);
    let rest = (0..q.len()).filter(|&i| i != j && !s.contains(i));
    let e_rest = elem_sym_over(q, rest, level);
    (0..=level).fold(T::zero(), |acc, k| {
        let denom = T::from_usize(level + 1 - k).expect("small integer");
        acc + e_s[k].clone() * e_rest[level - k].clone() / denom
    })
}

/// `P_ℓ(s)` from the odds.
pub fn conditional_point<T: Clone + Num>(q: &[T], s: &SubsetMask) -> T {
    let g = elem_sym(q);
    let num = s.iter().fold(T::one(), |acc, a| acc * q[a].clone());
    num / g[s.size()].clone()
}

/// `(j, Pr[s → s ∪ {j}])` for every `j ∉ s`.
pub fn transition_row<T: Clone + Num + FromPrimitive>(q: &[T], s: &SubsetMask) -> Vec<(usize, T)> {
    let g = elem_sym(q);
    let next = g[s.size() + 1].clone();
    (0..q.len())
        .filter(|&j| !s.contains(j))
        .map(|j| (j, q[j].clone() * h_value(q, s, j) / next.clone()))
        .collect()
}
