//! Randomly shifted Kronecker (Richtmyer) lattice on the unit cube.
//!
//! Point `n` of a randomization is `frac(n·α + Δ)` with `α_j = √p_j` for the
//! j-th prime and `Δ` a uniform shift, followed by the baker's (tent)
//! transform `1 − |2z − 1|` which periodizes the integrand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QmcConfig {
    /// Lattice points per randomization (per mixture component).
    pub samples: usize,
    /// Independent random shifts; the spread of their means gives the error estimate.
    pub randomizations: usize,
    pub seed: u64,
    /// Target for three standard errors; the sample count doubles (up to 16x) until met.
    pub abs_tolerance: f64,
}

impl Default for QmcConfig {
    fn default() -> Self {
        QmcConfig { samples: 1 << 14, randomizations: 12, seed: 0x5eed, abs_tolerance: 5e-4 }
    }
}

impl QmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1024 {
            return Err(Error::Config(format!("qmc samples must be >= 1024, got {}", self.samples)));
        }
        if self.randomizations < 2 {
            return Err(Error::Config(format!("qmc randomizations must be >= 2, got {}", self.randomizations)));
        }
        if !(self.abs_tolerance > 0.0) {
            return Err(Error::Config("qmc abs_tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// First `count` primes by trial division.
pub fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= candidate).all(|&p| !candidate.is_multiple_of(p)) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

#[derive(Clone, Debug)]
pub struct KroneckerLattice {
    generator: Vec<f64>,
}

impl KroneckerLattice {
    pub fn new(dim: usize) -> Self {
        let generator = primes(dim).into_iter().map(|p| (p as f64).sqrt().fract()).collect();
        KroneckerLattice { generator }
    }

    pub fn dim(&self) -> usize {
        self.generator.len()
    }

    /// Draws a uniform shift vector.
    pub fn shift(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.dim()).map(|_| rng.gen::<f64>()).collect()
    }

    /// Writes the `n`-th shifted, tent-transformed point into `out`.
    #[inline]
    pub fn point(&self, n: usize, shift: &[f64], out: &mut [f64]) {
        let nf = n as f64;
        for ((o, a), s) in out.iter_mut().zip(&self.generator).zip(shift) {
            let z = (nf * a + s).fract();
            *o = 1.0 - (2.0 * z - 1.0).abs();
        }
    }
}

/// SplitMix64 finalizer; derives decorrelated stream seeds from a base seed and an index.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Randomized-QMC estimate of ∫ f over the `dim`-cube: mean across shifts and
/// the standard error of that mean.
pub fn integrate<F>(dim: usize, samples: usize, randomizations: usize, seed: u64, mut f: F) -> (f64, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let lattice = KroneckerLattice::new(dim);
    let mut rng = rng_from(seed);
    let mut point = vec![0.0; dim];
    let mut means = Vec::with_capacity(randomizations);
    for _ in 0..randomizations {
        let shift = lattice.shift(&mut rng);
        let mut acc = 0.0;
        for n in 0..samples {
            lattice.point(n, &shift, &mut point);
            acc += f(&point);
        }
        means.push(acc / samples as f64);
    }
    let m = randomizations as f64;
    let mean = means.iter().sum::<f64>() / m;
    let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    (mean, (var / m).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_list() {
        assert_eq!(primes(6), vec![2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn points_stay_in_cube() {
        let lat = KroneckerLattice::new(5);
        let mut rng = rng_from(3);
        let shift = lat.shift(&mut rng);
        let mut p = vec![0.0; 5];
        for n in 0..1000 {
            lat.point(n, &shift, &mut p);
            assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn smooth_integral_is_accurate() {
        // ∫ Π (1 + (x_j - 1/2)) over [0,1]^4 = 1
        let (est, err) = integrate(4, 4096, 8, 11, |x| x.iter().map(|v| 0.5 + v).product());
        assert!((est - 1.0).abs() < 4.0 * err.max(1e-6), "{est} ± {err}");
        assert!(err < 5e-4);
        // ∫ x_1 x_2 = 1/4
        let (est, _) = integrate(2, 4096, 8, 12, |x| x[0] * x[1]);
        assert!((est - 0.25).abs() < 1e-5);
    }

    #[test]
    fn seeds_are_deterministic() {
        let a = integrate(3, 1024, 4, 99, |x| x[0] * x[1] * x[2]);
        let b = integrate(3, 1024, 4, 99, |x| x[0] * x[1] * x[2]);
        assert_eq!(a, b);
        assert_ne!(derive_seed(1, 2), derive_seed(1, 3));
    }
}
