//! Fixtures shared by the kernel benchmarks.

use std::sync::Arc;

use parafield_core::sampling::{random_subset, rng};
use parafield_core::{make_field, Paraboloid, Subset};

/// Paraboloid over `F_p` in dimension `n`.
pub fn paraboloid(p: u64, n: usize) -> Paraboloid {
    Paraboloid::new(Arc::new(make_field(p, 1).expect("prime")), n).expect("small enough")
}

/// Two seeded subsets of `par`.
pub fn subset_pair(par: &Paraboloid, seed: u64) -> (Subset, Subset) {
    let mut r = rng(seed, 0);
    (random_subset(par, &mut r), random_subset(par, &mut r))
}
