//! Slice service chains, per-user stochastic demand, user-count distributions,
//! the compound aggregate demand and the background best-effort load.
//!
//! Demand vectors use a fixed component layout: `(c, m, w)` for every VNF in
//! declaration order, followed by one bandwidth component per virtual link.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_covariance, cholesky_psd, Matrix};
use crate::probability::normal::ppnd16;
use crate::probability::qmc::rng_from;
use crate::topology::{InfrastructureGraph, ResourceType, ResourceVector};

/// A virtual network function with its per-instance requirement `r(v)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vnf {
    pub name: String,
    pub requirement: ResourceVector,
}

/// Directed virtual link between two VNFs (indices into `SfcGraph::vnfs`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirtualLink {
    pub src: usize,
    pub dst: usize,
    /// Per-instance bandwidth `r_b(vw)`.
    pub bandwidth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SfcGraph {
    pub vnfs: Vec<Vnf>,
    pub vlinks: Vec<VirtualLink>,
}

impl SfcGraph {
    /// Linear chain `v0 → v1 → …` with per-link bandwidths.
    pub fn chain(vnfs: Vec<Vnf>, bandwidths: &[f64]) -> Result<Self> {
        if vnfs.len() != bandwidths.len() + 1 {
            return Err(Error::Dimension { expected: vnfs.len().saturating_sub(1), got: bandwidths.len() });
        }
        let vlinks = bandwidths.iter().enumerate().map(|(i, &b)| VirtualLink { src: i, dst: i + 1, bandwidth: b }).collect();
        let g = SfcGraph { vnfs, vlinks };
        g.validate()?;
        Ok(g)
    }

    /// Checks endpoints, non-negativity, acyclicity and weak connectivity.
    pub fn validate(&self) -> Result<()> {
        let n = self.vnfs.len();
        if n == 0 {
            return Err(Error::Spec("service chain has no VNF".into()));
        }
        for v in &self.vnfs {
            if !v.requirement.is_nonnegative() {
                return Err(Error::Spec(format!("VNF {} has a negative requirement", v.name)));
            }
        }
        for (e, l) in self.vlinks.iter().enumerate() {
            if l.src >= n || l.dst >= n {
                return Err(Error::Spec(format!("virtual link {e} references an unknown VNF")));
            }
            if l.src == l.dst {
                return Err(Error::Spec(format!("virtual link {e} is a self loop")));
            }
            if !(l.bandwidth >= 0.0) {
                return Err(Error::Spec(format!("virtual link {e} has a negative bandwidth")));
            }
        }
        // Kahn's algorithm for acyclicity.
        let mut indeg = vec![0usize; n];
        for l in &self.vlinks {
            indeg[l.dst] += 1;
        }
        let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop() {
            seen += 1;
            for l in self.vlinks.iter().filter(|l| l.src == v) {
                indeg[l.dst] -= 1;
                if indeg[l.dst] == 0 {
                    queue.push(l.dst);
                }
            }
        }
        if seen != n {
            return Err(Error::Spec("service chain contains a cycle".into()));
        }
        // Union-find for weak connectivity.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for l in &self.vlinks {
            let (a, b) = (find(&mut parent, l.src), find(&mut parent, l.dst));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        if (0..n).any(|v| find(&mut parent, v) != root) {
            return Err(Error::Spec("service chain is not connected".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        3 * self.vnfs.len() + self.vlinks.len()
    }

    /// Total per-instance bandwidth leaving `v`.
    pub fn out_bandwidth(&self, v: usize) -> f64 {
        self.vlinks.iter().filter(|l| l.src == v).map(|l| l.bandwidth).sum()
    }

    /// Total per-instance bandwidth entering `w`.
    pub fn in_bandwidth(&self, w: usize) -> f64 {
        self.vlinks.iter().filter(|l| l.dst == w).map(|l| l.bandwidth).sum()
    }

    /// True when every VNF has at most one incoming and one outgoing link.
    pub fn is_chain(&self) -> bool {
        (0..self.vnfs.len())
            .all(|v| self.vlinks.iter().filter(|l| l.src == v).count() <= 1 && self.vlinks.iter().filter(|l| l.dst == v).count() <= 1)
    }
}

/// Demand vector index of resource `kind` of VNF `v`.
pub fn vnf_component(v: usize, kind: ResourceType) -> usize {
    3 * v + kind.index()
}

/// Demand vector index of virtual link `e` in a chain with `vnf_count` VNFs.
pub fn vlink_component(vnf_count: usize, e: usize) -> usize {
    3 * vnf_count + e
}

/// Per-user demand law: multivariate normal with mean `mean` and covariance `covariance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserDemandModel {
    pub mean: Vec<f64>,
    pub covariance: Matrix,
}

impl UserDemandModel {
    pub fn new(mean: Vec<f64>, covariance: Matrix) -> Result<Self> {
        if covariance.dim() != mean.len() {
            return Err(Error::Dimension { expected: mean.len(), got: covariance.dim() });
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Spec("per-user mean has a non-finite entry".into()));
        }
        check_covariance(&covariance)?;
        Ok(UserDemandModel { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn std_devs(&self) -> Vec<f64> {
        self.covariance.diag().iter().map(|v| v.max(0.0).sqrt()).collect()
    }
}

/// Probability mass function of the number of users, `probs[k] = Pr(N = k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserCountPmf {
    probs: Vec<f64>,
}

impl UserCountPmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::Spec("user-count pmf needs support beyond k = 0".into()));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::Spec("user-count pmf has a negative or non-finite entry".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Spec(format!("user-count pmf sums to {total}, not 1")));
        }
        Ok(UserCountPmf { probs })
    }

    /// Binomial(n, p), evaluated in log space and renormalized.
    pub fn binomial(n: u32, p: f64) -> Result<Self> {
        if n == 0 || !(0.0..=1.0).contains(&p) {
            return Err(Error::Spec(format!("invalid binomial parameters ({n}, {p})")));
        }
        let nf = n as f64;
        let mut probs: Vec<f64> = (0..=n)
            .map(|k| {
                let kf = k as f64;
                if p == 0.0 {
                    return if k == 0 { 1.0 } else { 0.0 };
                }
                if p == 1.0 {
                    return if k == n { 1.0 } else { 0.0 };
                }
                let ln = libm::lgamma(nf + 1.0) - libm::lgamma(kf + 1.0) - libm::lgamma(nf - kf + 1.0)
                    + kf * p.ln()
                    + (nf - kf) * (1.0 - p).ln();
                ln.exp()
            })
            .collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|x| *x /= total);
        UserCountPmf::new(probs)
    }

    /// Point mass at `n ≥ 1` users.
    pub fn fixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Spec("fixed user count must be positive".into()));
        }
        let mut probs = vec![0.0; n + 1];
        probs[n] = 1.0;
        UserCountPmf::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn max_users(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (self.second_moment() - m * m).max(0.0)
    }

    /// Inverse-CDF draw from a uniform `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (k, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        // Rounding leaves `acc` marginally below 1; fall back on the last supported k.
        self.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }
}

/// Compact, serializable description of a user-count pmf.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UserCountConfig {
    Binomial { n: u32, p: f64 },
    Fixed { n: usize },
    Explicit { probs: Vec<f64> },
}

impl UserCountConfig {
    pub fn build(&self) -> Result<UserCountPmf> {
        match self {
            UserCountConfig::Binomial { n, p } => UserCountPmf::binomial(*n, *p),
            UserCountConfig::Fixed { n } => UserCountPmf::fixed(*n),
            UserCountConfig::Explicit { probs } => UserCountPmf::new(probs.clone()),
        }
    }
}

/// A slice request: service chain, demand law, user-count pmf, income and required PSP.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceSpec {
    pub id: String,
    pub sfc: SfcGraph,
    pub user_model: UserDemandModel,
    pub user_count: UserCountPmf,
    pub income: f64,
    pub required_psp: f64,
    /// Scale the covariance of `k` users by `k` instead of `k²`.
    pub iid_covariance: bool,
}

impl SliceSpec {
    pub fn new(
        id: impl Into<String>,
        sfc: SfcGraph,
        user_model: UserDemandModel,
        user_count: UserCountPmf,
        income: f64,
        required_psp: f64,
    ) -> Result<Self> {
        let spec = SliceSpec { id: id.into(), sfc, user_model, user_count, income, required_psp, iid_covariance: false };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.sfc.validate()?;
        if self.user_model.dim() != self.sfc.dim() {
            return Err(Error::Dimension { expected: self.sfc.dim(), got: self.user_model.dim() });
        }
        if !(self.required_psp > 0.0 && self.required_psp < 1.0) {
            return Err(Error::Spec(format!("required PSP {} outside (0,1)", self.required_psp)));
        }
        if !(self.income >= 0.0) {
            return Err(Error::Spec("income must be non-negative".into()));
        }
        Ok(())
    }

    pub fn with_required_psp(mut self, p: f64) -> Result<Self> {
        self.required_psp = p;
        self.validate()?;
        Ok(self)
    }

    pub fn with_iid_covariance(mut self, on: bool) -> Self {
        self.iid_covariance = on;
        self
    }

    pub fn dim(&self) -> usize {
        self.sfc.dim()
    }

    /// Multiplier applied to per-user standard deviations for `k` users.
    pub fn sd_scale(&self, k: usize) -> f64 {
        if self.iid_covariance {
            (k as f64).sqrt()
        } else {
            k as f64
        }
    }

    /// Per-instance requirement of every demand component, in demand-vector order.
    pub fn component_requirements(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.sfc.vnfs.iter().flat_map(|v| v.requirement.to_array()).collect();
        r.extend(self.sfc.vlinks.iter().map(|l| l.bandwidth));
        r
    }
}

/// Per-component mean and variance of the aggregate demand of a slice.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateMoments {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

pub fn aggregate_moments(spec: &SliceSpec) -> AggregateMoments {
    let pmf = &spec.user_count;
    let (en, vn) = (pmf.mean(), pmf.variance());
    let scale_moment = if spec.iid_covariance { en } else { pmf.second_moment() };
    let var_user = spec.user_model.covariance.diag();
    let mean = spec.user_model.mean.iter().map(|m| en * m).collect();
    let variance = spec.user_model.mean.iter().zip(&var_user).map(|(m, s2)| scale_moment * s2 + m * m * vn).collect();
    AggregateMoments { mean, variance }
}

/// Uniform in (0, 1) from the top 53 bits of a 64-bit draw.
#[inline]
pub(crate) fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

#[inline]
pub(crate) fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    ppnd16(open_uniform(rng))
}

/// Reusable sampler for the compound aggregate demand of one slice.
///
/// Normals come from the inverse CDF applied to 53-bit uniforms of a ChaCha8 stream.
#[derive(Clone, Debug)]
pub struct AggregateSampler<'a> {
    spec: &'a SliceSpec,
    factor: Matrix,
    z: Vec<f64>,
}

impl<'a> AggregateSampler<'a> {
    pub fn new(spec: &'a SliceSpec) -> Result<Self> {
        let factor = cholesky_psd(&spec.user_model.covariance, 1e-10 * max_diag(&spec.user_model.covariance))?;
        Ok(AggregateSampler { spec, factor, z: vec![0.0; spec.dim()] })
    }

    /// Draws one aggregate demand vector into `out`, clamping negatives to zero.
    pub fn sample_into(&mut self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let k = self.spec.user_count.quantile(open_uniform(rng));
        let n = self.spec.dim();
        if k == 0 {
            out.iter_mut().for_each(|x| *x = 0.0);
            return;
        }
        for z in self.z.iter_mut() {
            *z = standard_normal(rng);
        }
        let scale = self.spec.sd_scale(k);
        let kf = k as f64;
        for i in 0..n {
            let noise: f64 = (0..=i).map(|j| self.factor[(i, j)] * self.z[j]).sum();
            out[i] = (kf * self.spec.user_model.mean[i] + scale * noise).max(0.0);
        }
    }
}

fn max_diag(m: &Matrix) -> f64 {
    m.diag().into_iter().fold(0.0, f64::max).max(f64::MIN_POSITIVE)
}

/// One aggregate demand draw, reproducible for a given seed.
pub fn sample_aggregate(spec: &SliceSpec, seed: u64) -> Result<Vec<f64>> {
    let mut sampler = AggregateSampler::new(spec)?;
    let mut rng = rng_from(seed);
    let mut out = vec![0.0; spec.dim()];
    sampler.sample_into(&mut rng, &mut out);
    Ok(out)
}

/// Per-element quantity over an infrastructure graph: a resource vector per node
/// and a scalar per link. Used for background statistics, reserves, provisioned
/// totals and impact probabilities alike.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadMap {
    pub node: Vec<ResourceVector>,
    pub link: Vec<f64>,
}

impl LoadMap {
    pub fn zeros(graph: &InfrastructureGraph) -> Self {
        LoadMap { node: vec![ResourceVector::ZERO; graph.node_count()], link: vec![0.0; graph.link_count()] }
    }

    /// Largest entry over all nodes, resource types and links (0 when empty).
    pub fn max_value(&self) -> f64 {
        self.node.iter().flat_map(|v| v.to_array()).chain(self.link.iter().copied()).fold(0.0, f64::max)
    }

    pub fn add_assign(&mut self, other: &LoadMap) {
        for (a, b) in self.node.iter_mut().zip(&other.node) {
            *a += *b;
        }
        for (a, b) in self.link.iter_mut().zip(&other.link) {
            *a += b;
        }
    }
}

/// Independent Gaussian best-effort load on every node resource and link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackgroundModel {
    pub mean: LoadMap,
    pub sd: LoadMap,
}

/// Background load as fractions of capacity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackgroundConfig {
    pub mean_fraction: f64,
    pub sd_fraction: f64,
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        BackgroundConfig { mean_fraction: 0.2, sd_fraction: 0.05 }
    }
}

impl BackgroundModel {
    pub fn new(mean: LoadMap, sd: LoadMap) -> Result<Self> {
        if mean.node.len() != sd.node.len() || mean.link.len() != sd.link.len() {
            return Err(Error::Dimension { expected: mean.node.len() + mean.link.len(), got: sd.node.len() + sd.link.len() });
        }
        let all_ok = mean.node.iter().chain(&sd.node).all(|v| v.is_nonnegative()) && mean.link.iter().chain(&sd.link).all(|x| *x >= 0.0);
        if !all_ok {
            return Err(Error::Spec("background statistics must be non-negative".into()));
        }
        Ok(BackgroundModel { mean, sd })
    }

    /// Mean and standard deviation proportional to each element's capacity.
    pub fn from_graph(graph: &InfrastructureGraph, cfg: BackgroundConfig) -> Result<Self> {
        let frac = |f: f64| LoadMap {
            node: graph.nodes.iter().map(|n| n.capacity.scale(f)).collect(),
            link: graph.links.iter().map(|l| l.bandwidth * f).collect(),
        };
        BackgroundModel::new(frac(cfg.mean_fraction), frac(cfg.sd_fraction))
    }

    pub fn zero(graph: &InfrastructureGraph) -> Self {
        BackgroundModel { mean: LoadMap::zeros(graph), sd: LoadMap::zeros(graph) }
    }
}

/// One background load draw, independent normals clamped at zero.
pub fn sample_background(model: &BackgroundModel, rng: &mut ChaCha8Rng) -> LoadMap {
    let node = model
        .mean
        .node
        .iter()
        .zip(&model.sd.node)
        .map(|(m, s)| {
            let mut v = ResourceVector::ZERO;
            for kind in ResourceType::ALL {
                *v.get_mut(kind) = (m.get(kind) + s.get(kind) * standard_normal(rng)).max(0.0);
            }
            v
        })
        .collect();
    let link = model.mean.link.iter().zip(&model.sd.link).map(|(m, s)| (m + s * standard_normal(rng)).max(0.0)).collect();
    LoadMap { node, link }
}

/// Mean/standard-deviation pair of one per-user demand component.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub mean: f64,
    pub sd: f64,
}

impl Moment {
    pub const fn new(mean: f64, sd: f64) -> Self {
        Moment { mean, sd }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnfConfig {
    pub name: String,
    pub requirement: ResourceVector,
    #[serde(default)]
    pub compute: Moment,
    #[serde(default)]
    pub memory: Moment,
    #[serde(default)]
    pub wireless: Moment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VlinkConfig {
    pub src: String,
    pub dst: String,
    pub bandwidth: f64,
    pub demand: Moment,
}

/// Serializable slice description: per-component moments and an optional
/// compute/memory correlation within each VNF.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceConfig {
    pub id: String,
    pub income: f64,
    pub required_psp: f64,
    pub users: UserCountConfig,
    pub vnfs: Vec<VnfConfig>,
    pub vlinks: Vec<VlinkConfig>,
    #[serde(default)]
    pub correlation: f64,
    #[serde(default)]
    pub iid_covariance: bool,
}

impl SliceConfig {
    pub fn build(&self) -> Result<SliceSpec> {
        if !(-1.0..=1.0).contains(&self.correlation) {
            return Err(Error::Spec(format!("correlation {} outside [-1, 1]", self.correlation)));
        }
        let vnfs: Vec<Vnf> = self.vnfs.iter().map(|v| Vnf { name: v.name.clone(), requirement: v.requirement }).collect();
        let index = |name: &str| {
            vnfs.iter().position(|v| v.name == name).ok_or_else(|| Error::Spec(format!("virtual link endpoint {name} is not a VNF")))
        };
        let vlinks = self
            .vlinks
            .iter()
            .map(|l| Ok(VirtualLink { src: index(&l.src)?, dst: index(&l.dst)?, bandwidth: l.bandwidth }))
            .collect::<Result<Vec<_>>>()?;
        let sfc = SfcGraph { vnfs, vlinks };
        sfc.validate()?;

        let moments: Vec<Moment> =
            self.vnfs.iter().flat_map(|v| [v.compute, v.memory, v.wireless]).chain(self.vlinks.iter().map(|l| l.demand)).collect();
        if moments.iter().any(|m| !(m.mean >= 0.0 && m.sd >= 0.0)) {
            return Err(Error::Spec(format!("slice {} has a negative demand moment", self.id)));
        }
        let mean = moments.iter().map(|m| m.mean).collect();
        let mut cov = Matrix::diagonal(&moments.iter().map(|m| m.sd * m.sd).collect::<Vec<_>>());
        if self.correlation != 0.0 {
            for v in 0..self.vnfs.len() {
                let (c, m) = (vnf_component(v, ResourceType::Compute), vnf_component(v, ResourceType::Memory));
                let value = self.correlation * moments[c].sd * moments[m].sd;
                cov[(c, m)] = value;
                cov[(m, c)] = value;
            }
        }
        let user_model = UserDemandModel::new(mean, cov)?;
        let spec = SliceSpec::new(self.id.clone(), sfc, user_model, self.users.build()?, self.income, self.required_psp)?;
        Ok(spec.with_iid_covariance(self.iid_covariance))
    }
}

/// Built-in slice types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceType {
    Type1,
    Type2,
    Type3,
}

impl SliceType {
    pub const ALL: [SliceType; 3] = [SliceType::Type1, SliceType::Type2, SliceType::Type3];

    pub fn config(self) -> SliceConfig {
        let vnf = |name: &str, c: (f64, f64), m: (f64, f64), w: (f64, f64), r: [f64; 3]| VnfConfig {
            name: name.into(),
            requirement: ResourceVector::from_array(r),
            compute: Moment::new(c.0, c.1),
            memory: Moment::new(m.0, m.1),
            wireless: Moment::new(w.0, w.1),
        };
        let link = |src: &str, dst: &str, d: (f64, f64), b: f64| VlinkConfig {
            src: src.into(),
            dst: dst.into(),
            bandwidth: b,
            demand: Moment::new(d.0, d.1),
        };
        let none = (0.0, 0.0);
        match self {
            SliceType::Type1 => SliceConfig {
                id: "type1".into(),
                income: 900.0,
                required_psp: 0.99,
                users: UserCountConfig::Binomial { n: 300, p: 0.9 },
                vnfs: vec![
                    vnf("vVOC", (5.4e-3, 0.54e-3), (1.5e-2, 0.15e-2), none, [0.29, 0.81, 0.0]),
                    vnf("vGW", (9.0e-4, 0.90e-4), (5.0e-4, 0.50e-4), none, [0.05, 0.03, 0.0]),
                    vnf("vBBU", (8.0e-4, 0.80e-4), (5.0e-4, 0.50e-4), (4e-3, 0.4e-3), [0.04, 0.03, 0.2]),
                ],
                vlinks: vec![link("vVOC", "vGW", (4e-3, 0.4e-3), 0.22), link("vGW", "vBBU", (4e-3, 0.4e-3), 0.22)],
                correlation: 0.0,
                iid_covariance: false,
            },
            SliceType::Type2 => SliceConfig {
                id: "type2".into(),
                income: 1000.0,
                required_psp: 0.95,
                users: UserCountConfig::Binomial { n: 1000, p: 0.8 },
                vnfs: vec![
                    vnf("vVOC", (1.1e-3, 0.11e-3), (7.5e-3, 0.75e-3), none, [0.17, 1.20, 0.0]),
                    vnf("vGW", (1.8e-4, 0.18e-4), (2.5e-4, 0.25e-4), none, [0.03, 0.04, 0.0]),
                    vnf("vBBU", (0.8e-4, 0.08e-4), (2.5e-4, 0.25e-4), (2e-3, 0.2e-3), [0.01, 0.04, 0.3]),
                ],
                vlinks: vec![link("vVOC", "vGW", (2e-3, 0.2e-3), 0.32), link("vGW", "vBBU", (2e-3, 0.2e-3), 0.32)],
                correlation: 0.0,
                iid_covariance: false,
            },
            SliceType::Type3 => SliceConfig {
                id: "type3".into(),
                income: 800.0,
                required_psp: 0.9,
                users: UserCountConfig::Fixed { n: 50 },
                vnfs: vec![
                    vnf("vBBU", (2.0e-4, 0.20e-4), (1.3e-4, 0.13e-4), (1e-3, 0.1e-3), [0.4e-2, 0.25e-2, 2e-2]),
                    vnf("vGW", (9.0e-4, 0.90e-4), (1.3e-4, 0.13e-4), none, [0.018, 0.003, 0.0]),
                    vnf("vTM", (1.1e-3, 0.11e-3), (1.3e-4, 0.13e-4), none, [0.266, 0.003, 0.0]),
                    vnf("vVOC", (5.4e-3, 0.54e-3), (3.8e-3, 0.38e-3), none, [0.108, 0.080, 0.0]),
                    vnf("vIDPS", (1.1e-2, 0.11e-2), (1.3e-4, 0.13e-4), none, [0.214, 0.003, 0.0]),
                ],
                vlinks: vec![
                    link("vBBU", "vGW", (1e-3, 0.1e-3), 0.02),
                    link("vGW", "vTM", (1e-3, 0.1e-3), 0.02),
                    link("vTM", "vVOC", (1e-3, 0.1e-3), 0.02),
                    link("vVOC", "vIDPS", (1e-3, 0.1e-3), 0.02),
                ],
                correlation: 0.0,
                iid_covariance: false,
            },
        }
    }

    pub fn spec(self) -> SliceSpec {
        self.config().build().expect("built-in slice types are valid")
    }

    pub fn name(self) -> &'static str {
        match self {
            SliceType::Type1 => "type1",
            SliceType::Type2 => "type2",
            SliceType::Type3 => "type3",
        }
    }
}

impl std::str::FromStr for SliceType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "type1" | "1" => Ok(SliceType::Type1),
            "type2" | "2" => Ok(SliceType::Type2),
            "type3" | "3" => Ok(SliceType::Type3),
            other => Err(Error::Config(format!("unknown slice type {other}"))),
        }
    }
}

/// The three built-in slice types in order.
pub fn slice_catalog() -> Vec<SliceSpec> {
    SliceType::ALL.iter().map(|t| t.spec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_fat_tree, FatTreeConfig};

    fn one_component(pmf: UserCountPmf, mean: f64, var: f64) -> SliceSpec {
        let sfc = SfcGraph::chain(vec![Vnf { name: "a".into(), requirement: ResourceVector::new(1.0, 0.0, 0.0) }], &[]).unwrap();
        let model = UserDemandModel::new(vec![mean, 0.0, 0.0], Matrix::diagonal(&[var, 0.0, 0.0])).unwrap();
        SliceSpec::new("t", sfc, model, pmf, 1.0, 0.9).unwrap()
    }

    #[test]
    fn binomial_moments() {
        let spec = one_component(UserCountPmf::binomial(10, 0.5).unwrap(), 2.0, 1.0);
        let m = aggregate_moments(&spec);
        assert!((m.mean[0] - 10.0).abs() < 1e-12);
        assert!((m.variance[0] - 37.5).abs() < 1e-10);
        let iid = aggregate_moments(&spec.clone().with_iid_covariance(true));
        assert!((iid.variance[0] - 15.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_pmfs() {
        let spec = one_component(UserCountPmf::fixed(1).unwrap(), 2.0, 1.0);
        let m = aggregate_moments(&spec);
        assert_eq!((m.mean[0], m.variance[0]), (2.0, 1.0));
        let zero = one_component(UserCountPmf::new(vec![1.0, 0.0]).unwrap(), 2.0, 1.0);
        let m = aggregate_moments(&zero);
        assert_eq!((m.mean[0], m.variance[0]), (0.0, 0.0));
        for seed in 0..20 {
            assert!(sample_aggregate(&zero, seed).unwrap().iter().all(|x| *x == 0.0));
        }
        let det = one_component(UserCountPmf::fixed(1).unwrap(), 2.0, 0.0);
        assert_eq!(sample_aggregate(&det, 5).unwrap()[0], 2.0);
    }

    #[test]
    fn pmf_validation() {
        assert!(UserCountPmf::new(vec![0.5, 0.6]).is_err());
        assert!(UserCountPmf::new(vec![1.0]).is_err());
        assert!(UserCountPmf::fixed(0).is_err());
        let b = UserCountPmf::binomial(1000, 0.8).unwrap();
        assert!((b.mean() - 800.0).abs() < 1e-8);
        assert!((b.variance() - 160.0).abs() < 1e-6);
    }

    #[test]
    fn sampled_mean_matches_moments() {
        let spec = one_component(UserCountPmf::binomial(10, 0.5).unwrap(), 2.0, 1.0);
        let mut sampler = AggregateSampler::new(&spec).unwrap();
        let mut rng = rng_from(17);
        let trials = 200_000;
        let mut out = vec![0.0; 3];
        let mut sum = 0.0;
        for _ in 0..trials {
            sampler.sample_into(&mut rng, &mut out);
            sum += out[0];
        }
        let se = (37.5f64 / trials as f64).sqrt();
        assert!((sum / trials as f64 - 10.0).abs() < 3.0 * se);
    }

    #[test]
    fn sampling_is_reproducible() {
        let spec = SliceType::Type1.spec();
        assert_eq!(sample_aggregate(&spec, 9).unwrap(), sample_aggregate(&spec, 9).unwrap());
    }

    #[test]
    fn catalog_values() {
        let cat = slice_catalog();
        assert_eq!(cat.len(), 3);
        let t1 = &cat[0];
        assert_eq!(t1.dim(), 11);
        assert_eq!(t1.user_model.mean[0], 5.4e-3);
        assert!((t1.user_model.std_devs()[0] - 0.54e-3).abs() < 1e-15);
        assert_eq!(t1.sfc.vnfs[0].requirement, ResourceVector::new(0.29, 0.81, 0.0));
        let t2 = &cat[1];
        let e = vlink_component(3, 1);
        assert_eq!(t2.user_model.mean[e], 2e-3);
        assert_eq!(t2.sfc.vlinks[1].bandwidth, 0.32);
        let t3 = &cat[2];
        assert_eq!(t3.user_count.max_users(), 50);
        assert_eq!(t3.sfc.vnfs.len(), 5);
        assert!(cat.iter().all(|s| s.sfc.is_chain()));
        for s in &cat {
            let m = aggregate_moments(s);
            let en = s.user_count.mean();
            for (a, u) in m.mean.iter().zip(&s.user_model.mean) {
                assert_eq!(*a, en * u);
            }
        }
    }

    #[test]
    fn correlation_option() {
        let mut cfg = SliceType::Type1.config();
        cfg.correlation = 0.85;
        let spec = cfg.build().unwrap();
        let cov = &spec.user_model.covariance;
        assert!((cov[(0, 1)] - 0.85 * 0.54e-3 * 0.15e-2).abs() < 1e-18);
        cfg.correlation = 1.5;
        assert!(cfg.build().is_err());
    }

    #[test]
    fn sfc_validation() {
        let v = |n: &str| Vnf { name: n.into(), requirement: ResourceVector::ZERO };
        let cyc = SfcGraph {
            vnfs: vec![v("a"), v("b")],
            vlinks: vec![VirtualLink { src: 0, dst: 1, bandwidth: 1.0 }, VirtualLink { src: 1, dst: 0, bandwidth: 1.0 }],
        };
        assert!(cyc.validate().is_err());
        let disc = SfcGraph { vnfs: vec![v("a"), v("b")], vlinks: vec![] };
        assert!(disc.validate().is_err());
    }

    #[test]
    fn config_round_trip() {
        let cfg = SliceType::Type3.config();
        let text = toml::to_string(&cfg).unwrap();
        let back: SliceConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn background_sampling() {
        let graph = build_fat_tree(&FatTreeConfig::default()).unwrap();
        let model = BackgroundModel::from_graph(&graph, BackgroundConfig::default()).unwrap();
        let zero_sd = BackgroundModel::new(model.mean.clone(), LoadMap::zeros(&graph)).unwrap();
        let mut rng = rng_from(1);
        assert_eq!(sample_background(&zero_sd, &mut rng), model.mean);

        let trials = 100_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            acc += sample_background(&model, &mut rng).link[0];
        }
        let se = model.sd.link[0] / (trials as f64).sqrt();
        assert!((acc / trials as f64 - model.mean.link[0]).abs() < 3.0 * se);

        let empty = InfrastructureGraph { nodes: vec![], links: vec![] };
        let s = sample_background(&BackgroundModel::zero(&empty), &mut rng);
        assert!(s.node.is_empty() && s.link.is_empty());
    }
}
