#![allow(dead_code)]

use rand::Rng;
use sperner_lab::{Measure, SubsetMask};

/// Non-trivial measure with coordinates uniform on `[lo, hi]`.
pub fn random_measure<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Measure {
    Measure::new((0..n).map(|_| rng.random_range(lo..=hi)).collect()).unwrap()
}

pub fn all_sets(n: usize) -> impl Iterator<Item = SubsetMask> {
    (0u64..1 << n).map(move |b| SubsetMask::from_bits(n, b).unwrap())
}

pub fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}
