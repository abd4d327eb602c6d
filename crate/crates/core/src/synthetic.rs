//! Random sparse polynomial targets.

use rand::seq::index;
use rand::Rng;

use crate::cube::{subsets_up_to, SparseSpectrum};
use crate::error::{Error, Result};
use crate::oracle::rng_from;

/// `s` distinct terms drawn uniformly from the subsets of size at most
/// `degree`, each with a uniform magnitude in `[min_abs, max_abs]` and a
/// uniform sign.
pub fn random_sparse(n: usize, degree: usize, s: usize, min_abs: f64, max_abs: f64, seed: u64) -> Result<SparseSpectrum> {
    if !(0.0 <= min_abs && min_abs <= max_abs && max_abs.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "coefficient range [{min_abs}, {max_abs}] is invalid"
        )));
    }
    let pool = subsets_up_to(n, degree);
    if s > pool.len() {
        return Err(Error::InvalidArgument(format!(
            "{s} terms requested but only {} subsets have size <= {degree}",
            pool.len()
        )));
    }
    let mut rng = rng_from(seed);
    let picks = index::sample(&mut rng, pool.len(), s).into_vec();
    let mut terms = Vec::with_capacity(s);
    for i in picks {
        let magnitude = rng.random_range(min_abs..=max_abs);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        terms.push((pool[i], sign * magnitude));
    }
    SparseSpectrum::from_terms(n, terms)
}
