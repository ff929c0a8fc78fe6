//! Seeded randomness. Every random instance is drawn from its own ChaCha
//! stream `(seed, stream)`, so batches can be evaluated in parallel and any
//! single instance can be regenerated from its index.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Paraboloid, Subset};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64, stream: u64) -> SeededRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Members of a random subset of `0..universe`: a density is drawn uniformly
/// from `[0, 1)` and each element is kept independently with that probability.
pub fn random_members(rng: &mut SeededRng, universe: usize) -> Vec<u32> {
    let density: f64 = rng.gen();
    (0..universe as u32).filter(|_| rng.gen::<f64>() < density).collect()
}

pub fn random_subset(par: &Paraboloid, rng: &mut SeededRng) -> Subset {
    let members = random_members(rng, par.len());
    Subset::from_indices(par, members.into_iter().map(|i| i as usize)).expect("indices in range")
}

/// As [`random_subset`], falling back to a single uniform point when empty.
pub fn random_nonempty_subset(par: &Paraboloid, rng: &mut SeededRng) -> Subset {
    let s = random_subset(par, rng);
    if !s.is_empty() {
        return s;
    }
    let i = rng.gen_range(0..par.len());
    Subset::from_indices(par, [i]).expect("index in range")
}

/// Random subset with exactly `size` members.
pub fn random_subset_of_size(par: &Paraboloid, rng: &mut SeededRng, size: usize) -> Subset {
    let picked = rand::seq::index::sample(rng, par.len(), size.min(par.len()));
    Subset::from_indices(par, picked.into_iter()).expect("indices in range")
}

/// Real and imaginary parts uniform on `[-1, 1)`.
pub fn random_complex(rng: &mut SeededRng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_complex_vec(rng: &mut SeededRng, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| random_complex(rng)).collect()
}
