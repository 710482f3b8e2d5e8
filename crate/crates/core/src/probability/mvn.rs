//! Box probabilities `Pr{X ≤ b}` for multivariate normal `X` by Genz's
//! sequential conditioning transform and a randomized lattice rule.
//!
//! The covariance is split into independent blocks (connected components of
//! its nonzero pattern). Zero-variance components become indicators, 1-D
//! blocks are evaluated in closed form and only correlated blocks are
//! integrated numerically.

use crate::error::{Error, Result};
use crate::linalg::{check_covariance, cholesky_psd, Matrix};
use crate::probability::normal::{ppnd16, std_normal_cdf};
use crate::probability::qmc::{derive_seed, rng_from, KroneckerLattice, QmcConfig};

/// Probability estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }
}

#[derive(Clone, Debug)]
struct Block {
    index: Vec<usize>,
    /// Cholesky factor of the block's correlation matrix.
    chol: Matrix,
}

/// Covariance preprocessed for repeated box evaluations under scaled copies
/// `N(mean, s²·cov)`.
#[derive(Clone, Debug)]
pub struct MvnIntegrator {
    sd: Vec<f64>,
    deterministic: Vec<usize>,
    singles: Vec<usize>,
    blocks: Vec<Block>,
}

impl MvnIntegrator {
    pub fn new(cov: &Matrix) -> Result<Self> {
        check_covariance(cov)?;
        let n = cov.dim();
        let sd: Vec<f64> = cov.diag().iter().map(|v| v.sqrt()).collect();
        let deterministic: Vec<usize> = (0..n).filter(|&i| sd[i] == 0.0).collect();

        // Connected components over the correlated pattern of random components.
        let mut comp = vec![usize::MAX; n];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for start in (0..n).filter(|&i| sd[i] > 0.0) {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = groups.len();
            let mut stack = vec![start];
            let mut members = Vec::new();
            comp[start] = id;
            while let Some(i) = stack.pop() {
                members.push(i);
                for j in 0..n {
                    if sd[j] > 0.0 && comp[j] == usize::MAX && cov[(i, j)] != 0.0 {
                        comp[j] = id;
                        stack.push(j);
                    }
                }
            }
            members.sort_unstable();
            groups.push(members);
        }

        let mut singles = Vec::new();
        let mut blocks = Vec::new();
        for members in groups {
            if members.len() == 1 {
                singles.push(members[0]);
                continue;
            }
            let m = members.len();
            let mut corr = Matrix::zeros(m);
            for (a, &i) in members.iter().enumerate() {
                for (b, &j) in members.iter().enumerate() {
                    corr[(a, b)] = if a == b { 1.0 } else { cov[(i, j)] / (sd[i] * sd[j]) };
                }
            }
            let chol = cholesky_psd(&corr, 1e-10)?;
            blocks.push(Block { index: members, chol });
        }
        Ok(MvnIntegrator { sd, deterministic, singles, blocks })
    }

    pub fn dim(&self) -> usize {
        self.sd.len()
    }

    /// True when no component needs numerical integration.
    pub fn is_closed_form(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `Pr{X ≤ upper}` for `X ~ N(mean, scale²·cov)`; `stream` selects the random shifts.
    pub fn probability(&self, mean: &[f64], scale: f64, upper: &[f64], cfg: &QmcConfig, stream: u64) -> Result<Estimate> {
        let n = self.dim();
        if mean.len() != n {
            return Err(Error::Dimension { expected: n, got: mean.len() });
        }
        if upper.len() != n {
            return Err(Error::Dimension { expected: n, got: upper.len() });
        }
        if upper.iter().chain(mean).any(|x| x.is_nan()) {
            return Err(Error::Domain("NaN in mean or box".into()));
        }
        if self.deterministic.iter().any(|&i| upper[i] < mean[i]) {
            return Ok(Estimate::exact(0.0));
        }
        let std_bound = |i: usize| {
            let s = scale * self.sd[i];
            if s > 0.0 {
                (upper[i] - mean[i]) / s
            } else if upper[i] >= mean[i] {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        };

        let mut value: f64 = self.singles.iter().map(|&i| std_normal_cdf(std_bound(i))).product();
        if value == 0.0 || self.blocks.is_empty() {
            return Ok(Estimate::exact(value));
        }
        // Product of independent estimates; first-order error propagation.
        let mut parts = Vec::with_capacity(self.blocks.len());
        for (b, block) in self.blocks.iter().enumerate() {
            let bounds: Vec<f64> = block.index.iter().map(|&i| std_bound(i)).collect();
            let est = block_probability(&block.chol, &bounds, cfg, derive_seed(stream, b as u64));
            if est.value == 0.0 && est.error == 0.0 {
                return Ok(Estimate::exact(0.0));
            }
            parts.push(est);
        }
        let block_product: f64 = parts.iter().map(|e| e.value).product();
        let mut rel2 = 0.0;
        let mut abs2 = 0.0;
        for (i, e) in parts.iter().enumerate() {
            if e.value > 0.0 {
                rel2 += (e.error / e.value).powi(2);
            } else {
                let others: f64 = parts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, o)| o.value).product();
                abs2 += (e.error * others).powi(2);
            }
        }
        let error = value * ((block_product.powi(2) * rel2) + abs2).sqrt();
        value *= block_product;
        Ok(Estimate { value, error })
    }
}

/// Estimates `Pr{Y ≤ bounds}` for `Y ~ N(0, L Lᵀ)` with `L` a (possibly
/// reduced-rank) correlation factor.
fn block_probability(chol: &Matrix, bounds: &[f64], cfg: &QmcConfig, seed: u64) -> Estimate {
    let m = bounds.len();
    let marginals: Vec<f64> = bounds.iter().map(|&b| std_normal_cdf(b)).collect();
    let upper = marginals.iter().copied().fold(1.0, f64::min);
    let lower = (1.0 - marginals.iter().map(|p| 1.0 - p).sum::<f64>()).max(0.0);
    if upper - lower <= 1e-10 {
        return Estimate { value: 0.5 * (upper + lower), error: 0.5 * (upper - lower) };
    }

    let cube_dim = m - 1;
    let lattice = KroneckerLattice::new(cube_dim.max(1));
    let mut rng = rng_from(seed);
    let shifts: Vec<Vec<f64>> = (0..cfg.randomizations).map(|_| lattice.shift(&mut rng)).collect();
    let mut sums = vec![0.0; cfg.randomizations];
    let mut point = vec![0.0; cube_dim.max(1)];
    let mut y = vec![0.0; m];

    let integrand = |w: &[f64], y: &mut [f64]| -> f64 {
        let mut f = 1.0;
        for i in 0..m {
            let shift: f64 = (0..i).map(|j| chol[(i, j)] * y[j]).sum();
            let lii = chol[(i, i)];
            if lii == 0.0 {
                if bounds[i] < shift {
                    return 0.0;
                }
                y[i] = 0.0;
                continue;
            }
            let e = std_normal_cdf((bounds[i] - shift) / lii);
            f *= e;
            if f == 0.0 {
                return 0.0;
            }
            if i + 1 < m {
                let u = (w[i] * e).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
                y[i] = ppnd16(u);
            }
        }
        f
    };

    let max_samples = cfg.samples.saturating_mul(16);
    let mut done = 0usize;
    let mut target = cfg.samples;
    loop {
        for (r, shift) in shifts.iter().enumerate() {
            for n in done..target {
                lattice.point(n, shift, &mut point);
                sums[r] += integrand(&point, &mut y);
            }
        }
        done = target;
        let means: Vec<f64> = sums.iter().map(|s| s / done as f64).collect();
        let k = means.len() as f64;
        let mean = means.iter().sum::<f64>() / k;
        let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
        let error = (var / k).sqrt();
        if 3.0 * error <= cfg.abs_tolerance || target >= max_samples {
            return Estimate { value: mean.clamp(lower, upper), error };
        }
        target = (target * 2).min(max_samples);
    }
}

/// One-shot `Pr{X ≤ upper}` for `X ~ N(mean, cov)`.
pub fn mvn_box_probability(mean: &[f64], cov: &Matrix, upper: &[f64], cfg: &QmcConfig) -> Result<Estimate> {
    cfg.validate()?;
    if cov.dim() != mean.len() {
        return Err(Error::Dimension { expected: mean.len(), got: cov.dim() });
    }
    MvnIntegrator::new(cov)?.probability(mean, 1.0, upper, cfg, cfg.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QmcConfig {
        QmcConfig { samples: 4096, ..QmcConfig::default() }
    }

    #[test]
    fn one_dimensional() {
        let cov = Matrix::diagonal(&[1.0]);
        let est = mvn_box_probability(&[0.0], &cov, &[1.281552], &cfg()).unwrap();
        assert!((est.value - 0.9).abs() < 1e-6);
        assert_eq!(est.error, 0.0);
    }

    #[test]
    fn independent_quadrant() {
        let cov = Matrix::diagonal(&[1.0, 1.0]);
        let est = mvn_box_probability(&[0.0, 0.0], &cov, &[0.0, 0.0], &cfg()).unwrap();
        assert!((est.value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn correlated_quadrant_closed_form() {
        // Pr{X1 ≤ 0, X2 ≤ 0} = 1/4 + asin(ρ)/(2π)
        for rho in [0.85, -0.5, 0.3] {
            let cov = Matrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]]).unwrap();
            let est = mvn_box_probability(&[0.0, 0.0], &cov, &[0.0, 0.0], &cfg()).unwrap();
            let exact = 0.25 + f64::asin(rho) / (2.0 * std::f64::consts::PI);
            assert!((est.value - exact).abs() < 3e-4 + 3.0 * est.error, "rho={rho}: {} vs {exact}", est.value);
        }
    }

    #[test]
    fn trivariate_orthant_closed_form() {
        // Pr{all ≤ 0} = 1/8 + (asin ρ12 + asin ρ13 + asin ρ23)/(4π)
        let (a, b, c) = (0.5, 0.3, 0.2);
        let cov = Matrix::from_rows(&[vec![1.0, a, b], vec![a, 1.0, c], vec![b, c, 1.0]]).unwrap();
        let est = mvn_box_probability(&[0.0; 3], &cov, &[0.0; 3], &cfg()).unwrap();
        let exact = 0.125 + (f64::asin(a) + f64::asin(b) + f64::asin(c)) / (4.0 * std::f64::consts::PI);
        assert!((est.value - exact).abs() < 5e-4, "{} vs {exact}", est.value);
    }

    #[test]
    fn singular_correlation() {
        // X2 = X1 exactly: Pr{X1 ≤ 0.5, X2 ≤ 1} = Φ(0.5)
        let cov = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let est = mvn_box_probability(&[0.0, 0.0], &cov, &[0.5, 1.0], &cfg()).unwrap();
        assert!((est.value - std_normal_cdf(0.5)).abs() < 5e-4, "{}", est.value);
    }

    #[test]
    fn deterministic_components_are_indicators() {
        let cov = Matrix::diagonal(&[1.0, 0.0]);
        let inside = mvn_box_probability(&[0.0, 2.0], &cov, &[0.0, 2.0], &cfg()).unwrap();
        assert_eq!(inside.value, 0.5);
        let outside = mvn_box_probability(&[0.0, 2.0], &cov, &[0.0, 1.9], &cfg()).unwrap();
        assert_eq!(outside.value, 0.0);
    }

    #[test]
    fn errors() {
        let bad = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(mvn_box_probability(&[0.0, 0.0], &bad, &[0.0, 0.0], &cfg()), Err(Error::NotPsd { .. })));
        let cov = Matrix::diagonal(&[1.0, 1.0]);
        assert!(matches!(mvn_box_probability(&[0.0], &cov, &[0.0, 0.0], &cfg()), Err(Error::Dimension { .. })));
        assert!(matches!(mvn_box_probability(&[0.0, 0.0], &cov, &[0.0], &cfg()), Err(Error::Dimension { .. })));
    }

    #[test]
    fn deterministic_given_seed() {
        let cov = Matrix::from_rows(&[vec![1.0, 0.6], vec![0.6, 1.0]]).unwrap();
        let a = mvn_box_probability(&[0.1, 0.2], &cov, &[0.5, 0.3], &cfg()).unwrap();
        let b = mvn_box_probability(&[0.1, 0.2], &cov, &[0.5, 0.3], &cfg()).unwrap();
        assert_eq!(a, b);
    }
}
