//! Estimates box probabilities of correlated Gaussians with the lattice
//! integrator and checks them against closed forms and plain sampling.

use netslice::linalg::Matrix;
use netslice::probability::{mvn_box_probability, std_normal_cdf, QmcConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Box-Muller draw.
fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

fn main() -> netslice::error::Result<()> {
    let cfg = QmcConfig::default();

    let cov = Matrix::diagonal(&[1.0, 4.0, 0.25]);
    let upper = [1.0, 1.0, 0.5];
    let est = mvn_box_probability(&[0.0; 3], &cov, &upper, &cfg)?;
    let exact = std_normal_cdf(1.0) * std_normal_cdf(0.5) * std_normal_cdf(1.0);
    println!("independent: {:.6} +/- {:.1e}, exact {exact:.6}", est.value, est.error);

    let rho = 0.8;
    let cov = Matrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]])?;
    let est = mvn_box_probability(&[0.0; 2], &cov, &[0.0, 0.0], &cfg)?;
    let exact = 0.25 + rho.asin() / std::f64::consts::TAU;
    println!("bivariate orthant rho={rho}: {:.6} +/- {:.1e}, exact {exact:.6}", est.value, est.error);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 200_000;
    let hits = (0..n)
        .filter(|_| {
            let z1 = standard_normal(&mut rng);
            let z2 = rho * z1 + (1.0 - rho * rho).sqrt() * standard_normal(&mut rng);
            z1 <= 0.0 && z2 <= 0.0
        })
        .count();
    println!("sampled ({n} draws): {:.6}", hits as f64 / n as f64);
    Ok(())
}
