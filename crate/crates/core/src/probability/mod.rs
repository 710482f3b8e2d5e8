//! Normal distribution machinery, box probabilities of the compound demand,
//! robustness-margin calibration and background-impact evaluation.

pub mod mvn;
pub mod normal;
pub mod qmc;

use serde::{Deserialize, Serialize};

use crate::demand::{aggregate_moments, AggregateSampler, BackgroundModel, LoadMap, SliceSpec};
use crate::error::{Error, Result};
use crate::topology::{InfrastructureGraph, ResourceType};

pub use mvn::{mvn_box_probability, Estimate, MvnIntegrator};
pub use normal::{std_normal_cdf, std_normal_inv_cdf, std_normal_sf};
pub use qmc::QmcConfig;

/// Upper corner of the demand region, one entry per demand component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemandBox {
    pub upper: Vec<f64>,
}

impl DemandBox {
    pub fn new(upper: Vec<f64>) -> Result<Self> {
        if upper.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("demand box has a non-finite entry".into()));
        }
        Ok(DemandBox { upper })
    }

    pub fn dim(&self) -> usize {
        self.upper.len()
    }
}

/// Which moments the margin `γ` multiplies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatMode {
    /// Per-user mean and standard deviation.
    #[default]
    PerUser,
    /// Mean and standard deviation of the aggregate (compound) demand.
    Aggregate,
}

impl std::str::FromStr for StatMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_user" | "per-user" => Ok(StatMode::PerUser),
            "aggregate" => Ok(StatMode::Aggregate),
            other => Err(Error::Config(format!("unknown stat mode {other}"))),
        }
    }
}

/// Target box `μ + γσ` for a slice.
pub fn targets_for_gamma(spec: &SliceSpec, gamma: f64, mode: StatMode) -> Result<DemandBox> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!("gamma must be non-negative, got {gamma}")));
    }
    let upper = match mode {
        StatMode::PerUser => spec.user_model.mean.iter().zip(spec.user_model.std_devs()).map(|(m, s)| m + gamma * s).collect(),
        StatMode::Aggregate => {
            let agg = aggregate_moments(spec);
            agg.mean.iter().zip(&agg.variance).map(|(m, v)| m + gamma * v.sqrt()).collect()
        }
    };
    DemandBox::new(upper)
}

/// Probabilities below this are dropped from the user-count mixture.
const NEGLIGIBLE_MASS: f64 = 1e-15;

/// Evaluates the probability that the aggregate demand of a slice lies in a box.
#[derive(Clone, Debug)]
pub struct PspEvaluator<'a> {
    spec: &'a SliceSpec,
    integrator: MvnIntegrator,
}

impl<'a> PspEvaluator<'a> {
    pub fn new(spec: &'a SliceSpec) -> Result<Self> {
        Ok(PspEvaluator { spec, integrator: MvnIntegrator::new(&spec.user_model.covariance)? })
    }

    /// `p_0 + Σ_{k≥1} p_k Pr{X_k ≤ box}` with its combined standard error.
    pub fn estimate(&self, b: &DemandBox, cfg: &QmcConfig) -> Result<Estimate> {
        let n = self.spec.dim();
        if b.dim() != n {
            return Err(Error::Dimension { expected: n, got: b.dim() });
        }
        let probs = self.spec.user_count.probs();
        let mut value = probs[0];
        let mut err2 = 0.0;
        let mut mean = vec![0.0; n];
        for (k, &pk) in probs.iter().enumerate().skip(1) {
            if pk < NEGLIGIBLE_MASS {
                continue;
            }
            let kf = k as f64;
            for (m, u) in mean.iter_mut().zip(&self.spec.user_model.mean) {
                *m = kf * u;
            }
            let est = self.integrator.probability(&mean, self.spec.sd_scale(k), &b.upper, cfg, qmc::derive_seed(cfg.seed, k as u64))?;
            value += pk * est.value;
            err2 += (pk * est.error).powi(2);
        }
        Ok(Estimate { value: value.clamp(0.0, 1.0), error: err2.sqrt() })
    }

    pub fn is_closed_form(&self) -> bool {
        self.integrator.is_closed_form()
    }
}

/// PSP estimate for a box, with error.
pub fn psp_estimate(spec: &SliceSpec, b: &DemandBox, cfg: &QmcConfig) -> Result<Estimate> {
    cfg.validate()?;
    PspEvaluator::new(spec)?.estimate(b, cfg)
}

/// PSP of a box.
pub fn psp_of_box(spec: &SliceSpec, b: &DemandBox, cfg: &QmcConfig) -> Result<f64> {
    psp_estimate(spec, b, cfg).map(|e| e.value)
}

/// Result of the margin search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub gamma: f64,
    pub psp: f64,
    pub psp_error: f64,
    pub evaluations: usize,
}

const GAMMA_CAP: f64 = (1u64 << 20) as f64;

/// Smallest `γ` (within `tolerance`) whose target box reaches the slice's required PSP.
///
/// The same random shifts are reused at every `γ`, so the estimated curve is
/// monotone in `γ`. Evaluations whose estimate is within three standard errors
/// of the requirement are repeated with more lattice points.
pub fn find_gamma_s(spec: &SliceSpec, cfg: &QmcConfig, mode: StatMode, tolerance: f64) -> Result<Calibration> {
    cfg.validate()?;
    if !(tolerance > 0.0) {
        return Err(Error::Domain("gamma tolerance must be positive".into()));
    }
    let required = spec.required_psp;
    let eval = PspEvaluator::new(spec)?;
    let evaluations = std::cell::Cell::new(0usize);
    let psp_at = |gamma: f64| -> Result<Estimate> {
        let b = targets_for_gamma(spec, gamma, mode)?;
        let mut local = cfg.clone();
        let mut est = eval.estimate(&b, &local)?;
        evaluations.set(evaluations.get() + 1);
        for _ in 0..2 {
            if est.error == 0.0 || (est.value - required).abs() >= 3.0 * est.error {
                break;
            }
            local.samples *= 4;
            est = eval.estimate(&b, &local)?;
            evaluations.set(evaluations.get() + 1);
        }
        Ok(est)
    };

    let at_zero = psp_at(0.0)?;
    if at_zero.value >= required {
        return Ok(Calibration { gamma: 0.0, psp: at_zero.value, psp_error: at_zero.error, evaluations: evaluations.get() });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = psp_at(hi)?;
    while best.value < required {
        lo = hi;
        hi *= 2.0;
        if hi > GAMMA_CAP {
            return Err(Error::Unreachable { required, gamma_cap: GAMMA_CAP });
        }
        best = psp_at(hi)?;
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let est = psp_at(mid)?;
        if est.value >= required {
            hi = mid;
            best = est;
        } else {
            lo = mid;
        }
    }
    Ok(Calibration { gamma: hi, psp: best.value, psp_error: best.error, evaluations: evaluations.get() })
}

/// Background margin `Φ⁻¹(1 − p̄)` that caps the impact probability at `p̄`.
pub fn gamma_b(max_impact: f64) -> Result<f64> {
    if !(max_impact > 0.0 && max_impact < 1.0) {
        return Err(Error::Domain(format!("max impact must lie in (0,1), got {max_impact}")));
    }
    std_normal_inv_cdf(1.0 - max_impact)
}

/// Reserve levels `μ_B + γ_B σ_B` per node resource and link.
pub fn background_targets(model: &BackgroundModel, gamma_b: f64) -> Result<LoadMap> {
    if !(gamma_b >= 0.0) {
        return Err(Error::Domain(format!("gamma_B must be non-negative, got {gamma_b}")));
    }
    let node = model.mean.node.iter().zip(&model.sd.node).map(|(m, s)| *m + s.scale(gamma_b)).collect();
    let link = model.mean.link.iter().zip(&model.sd.link).map(|(m, s)| m + gamma_b * s).collect();
    Ok(LoadMap { node, link })
}

/// `Pr{B > a − provisioned}` for one element; the zero-variance case is the
/// indicator of `provisioned > a − μ_B`.
pub fn impact_probability(capacity: f64, provisioned: f64, mean: f64, sd: f64) -> f64 {
    let slack = capacity - provisioned - mean;
    if sd > 0.0 {
        std_normal_sf(slack / sd)
    } else if slack < 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Impact probability of every node resource and link given provisioned totals.
pub fn plan_impact_probabilities(provisioned: &LoadMap, graph: &InfrastructureGraph, model: &BackgroundModel) -> Result<LoadMap> {
    if provisioned.node.len() != graph.node_count() || provisioned.link.len() != graph.link_count() {
        return Err(Error::Dimension {
            expected: graph.node_count() + graph.link_count(),
            got: provisioned.node.len() + provisioned.link.len(),
        });
    }
    let mut out = LoadMap::zeros(graph);
    for (i, node) in graph.nodes.iter().enumerate() {
        for kind in ResourceType::ALL {
            *out.node[i].get_mut(kind) = impact_probability(
                node.capacity.get(kind),
                provisioned.node[i].get(kind),
                model.mean.node[i].get(kind),
                model.sd.node[i].get(kind),
            );
        }
    }
    for (e, link) in graph.links.iter().enumerate() {
        out.link[e] = impact_probability(link.bandwidth, provisioned.link[e], model.mean.link[e], model.sd.link[e]);
    }
    Ok(out)
}

/// PSP of a provisioned box by QMC and by plain Monte Carlo.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PspCheck {
    pub qmc: f64,
    pub qmc_error: f64,
    pub mc: f64,
    pub mc_error: f64,
    pub trials: usize,
}

/// Evaluates the PSP of provisioned totals `b` both ways.
pub fn plan_psp(spec: &SliceSpec, b: &DemandBox, cfg: &QmcConfig, trials: usize, seed: u64) -> Result<PspCheck> {
    let q = psp_estimate(spec, b, cfg)?;
    let hits = count_satisfied(spec, b, trials, seed)?;
    let mc = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
    let mc_error = if trials == 0 { 0.0 } else { (mc * (1.0 - mc) / trials as f64).sqrt() };
    Ok(PspCheck { qmc: q.value, qmc_error: q.error, mc, mc_error, trials })
}

/// Number of sampled aggregate demands that fit in `b`.
pub fn count_satisfied(spec: &SliceSpec, b: &DemandBox, trials: usize, seed: u64) -> Result<usize> {
    if b.dim() != spec.dim() {
        return Err(Error::Dimension { expected: spec.dim(), got: b.dim() });
    }
    let mut sampler = AggregateSampler::new(spec)?;
    let mut rng = qmc::rng_from(seed);
    let mut draw = vec![0.0; spec.dim()];
    let mut hits = 0;
    for _ in 0..trials {
        sampler.sample_into(&mut rng, &mut draw);
        if draw.iter().zip(&b.upper).all(|(d, u)| d <= u) {
            hits += 1;
        }
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::{SfcGraph, SliceType, UserCountPmf, UserDemandModel, Vnf};
    use crate::linalg::Matrix;
    use crate::topology::{build_fat_tree, FatTreeConfig, ResourceVector};

    fn single(pmf: UserCountPmf, mean: f64, sd: f64, required: f64) -> SliceSpec {
        let sfc = SfcGraph::chain(vec![Vnf { name: "a".into(), requirement: ResourceVector::new(1.0, 0.0, 0.0) }], &[]).unwrap();
        let model = UserDemandModel::new(vec![mean, 0.0, 0.0], Matrix::diagonal(&[sd * sd, 0.0, 0.0])).unwrap();
        SliceSpec::new("t", sfc, model, pmf, 1.0, required).unwrap()
    }

    #[test]
    fn targets() {
        let t1 = SliceType::Type1.spec();
        let b0 = targets_for_gamma(&t1, 0.0, StatMode::PerUser).unwrap();
        assert_eq!(b0.upper, t1.user_model.mean);
        let b2 = targets_for_gamma(&t1, 2.0, StatMode::PerUser).unwrap();
        assert!((b2.upper[0] - 6.48e-3).abs() < 1e-15);
        let s = single(UserCountPmf::fixed(1).unwrap(), 3.0, 0.5, 0.9);
        assert_eq!(targets_for_gamma(&s, 1.7, StatMode::PerUser).unwrap(), targets_for_gamma(&s, 1.7, StatMode::Aggregate).unwrap());
        assert!(targets_for_gamma(&s, -1.0, StatMode::PerUser).is_err());
    }

    #[test]
    fn psp_closed_forms() {
        let cfg = QmcConfig::default();
        let s = single(UserCountPmf::fixed(1).unwrap(), 3.0, 0.5, 0.9);
        let b = DemandBox::new(vec![3.0, 0.0, 0.0]).unwrap();
        assert_eq!(psp_of_box(&s, &b, &cfg).unwrap(), 0.5);

        let two = single(UserCountPmf::new(vec![0.0, 0.5, 0.5]).unwrap(), 3.0, 0.5, 0.9);
        let r = 4.2;
        let b = DemandBox::new(vec![r, 0.0, 0.0]).unwrap();
        let exact = 0.5 * std_normal_cdf((r - 3.0) / 0.5) + 0.5 * std_normal_cdf((r - 6.0) / 1.0);
        assert!((psp_of_box(&two, &b, &cfg).unwrap() - exact).abs() < 1e-15);

        // Diagonal model at μ + γσ: product of Φ(γ) over random components.
        let t1 = SliceType::Type1.spec();
        let one_user = SliceSpec { user_count: UserCountPmf::fixed(1).unwrap(), ..t1 };
        let b = targets_for_gamma(&one_user, 1.0, StatMode::PerUser).unwrap();
        let random = one_user.user_model.std_devs().iter().filter(|s| **s > 0.0).count();
        let exact = std_normal_cdf(1.0).powi(random as i32);
        assert!((psp_of_box(&one_user, &b, &cfg).unwrap() - exact).abs() < 1e-14);
    }

    #[test]
    fn zero_users_always_satisfied() {
        let s = single(UserCountPmf::new(vec![0.3, 0.7]).unwrap(), 3.0, 0.5, 0.9);
        let b = DemandBox::new(vec![0.0, 0.0, 0.0]).unwrap();
        let p = psp_of_box(&s, &b, &QmcConfig::default()).unwrap();
        assert!((p - 0.3 - 0.7 * std_normal_cdf(-6.0)).abs() < 1e-15);
    }

    #[test]
    fn calibration_oracle() {
        let cfg = QmcConfig::default();
        for p in [0.9, 0.95, 0.99] {
            let s = single(UserCountPmf::fixed(1).unwrap(), 3.0, 0.5, p);
            let cal = find_gamma_s(&s, &cfg, StatMode::PerUser, 1e-3).unwrap();
            let exact = std_normal_inv_cdf(p).unwrap();
            assert!((cal.gamma - exact).abs() < 2e-3, "p={p}: {}", cal.gamma);
            assert!(cal.psp >= p);
        }
        let half = single(UserCountPmf::fixed(1).unwrap(), 3.0, 0.5, 0.5);
        assert!(find_gamma_s(&half, &cfg, StatMode::PerUser, 1e-3).unwrap().gamma < 1e-3);
    }

    #[test]
    fn calibration_bracketing_on_type1() {
        let cfg = QmcConfig::default();
        let t1 = SliceType::Type1.spec();
        let cal = find_gamma_s(&t1, &cfg, StatMode::PerUser, 1e-3).unwrap();
        let at = |g: f64| psp_of_box(&t1, &targets_for_gamma(&t1, g, StatMode::PerUser).unwrap(), &cfg).unwrap();
        assert!(at(cal.gamma) >= 0.99);
        assert!(at(cal.gamma - 1e-2) < 0.99);
        let agg = find_gamma_s(&t1, &cfg, StatMode::Aggregate, 1e-3).unwrap();
        assert!(agg.gamma < 10.0, "{}", agg.gamma);
    }

    #[test]
    fn gamma_b_values() {
        assert_eq!(gamma_b(0.5).unwrap(), 0.0);
        assert!((gamma_b(0.1).unwrap() - 1.281552).abs() < 1e-5);
        assert!((gamma_b(0.025).unwrap() - 1.959964).abs() < 1e-5);
        assert!(gamma_b(0.0).is_err() && gamma_b(1.0).is_err());
    }

    #[test]
    fn reserves_and_impact() {
        let graph = build_fat_tree(&FatTreeConfig::default()).unwrap();
        let mut model = BackgroundModel::zero(&graph);
        model.mean.link[0] = 20.0;
        model.sd.link[0] = 5.0;
        let b = background_targets(&model, 1.281552).unwrap();
        assert!((b.link[0] - 26.40776).abs() < 1e-9);
        assert_eq!(background_targets(&model, 0.0).unwrap(), model.mean);

        assert_eq!(impact_probability(100.0, 80.0, 20.0, 5.0), 0.5);
        assert!((impact_probability(100.0, 60.0, 20.0, 5.0) - 3.167_124_183_311_992e-5).abs() < 1e-15);
        assert!(impact_probability(100.0, 0.0, 20.0, 5.0) <= 1e-15);
        assert_eq!(impact_probability(0.0, 0.0, 0.0, 0.0), 0.0);
        assert_eq!(impact_probability(1.0, 1.5, 0.0, 0.0), 1.0);
    }

    #[test]
    fn plan_psp_agrees_with_simulation() {
        let cfg = QmcConfig::default();
        let t1 = SliceType::Type1.spec();
        let cal = find_gamma_s(&t1, &cfg, StatMode::PerUser, 1e-3).unwrap();
        let b = targets_for_gamma(&t1, cal.gamma, StatMode::PerUser).unwrap();
        let check = plan_psp(&t1, &b, &cfg, 20_000, 3).unwrap();
        assert!(check.qmc >= 0.99);
        let combined = (check.qmc_error.powi(2) + check.mc_error.powi(2)).sqrt();
        assert!((check.qmc - check.mc).abs() <= 3.0 * combined + 1e-12, "{check:?}");
    }
}
