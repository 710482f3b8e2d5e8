//! Property suites for model invariants across modules.

use netslice::demand::{
    aggregate_moments, sample_aggregate, slice_catalog, BackgroundModel, LoadMap, Moment, SliceConfig, SliceType, UserCountConfig,
    VnfConfig,
};
use netslice::eval::builtin_scenario;
use netslice::linalg::{check_covariance, Matrix};
use netslice::optimizer::{build_joint, SliceRequest};
use netslice::planner::{calibrate, provision, reserves_for, Variant, VariantConfig};
use netslice::probability::{
    background_targets, find_gamma_s, gamma_b, impact_probability, mvn_box_probability, plan_impact_probabilities, psp_of_box,
    std_normal_cdf, targets_for_gamma, DemandBox, QmcConfig, StatMode,
};
use netslice::topology::{build_fat_tree, FatTreeConfig, Layer, ResourceVector};
use proptest::prelude::*;

fn small() -> ProptestConfig {
    ProptestConfig { cases: 8, ..ProptestConfig::default() }
}

proptest! {
    #[test]
    fn fat_tree_counts(k in 2usize..=4, cap in 0.5f64..100.0, bw in 1.0f64..50.0) {
        let mut cfg = FatTreeConfig { k, ..FatTreeConfig::default() };
        for v in cfg.capacity.values_mut() {
            v.compute = cap;
        }
        cfg.bandwidth.edge_rrh = bw;
        let g = build_fat_tree(&cfg).unwrap();
        let loops = g.links.iter().filter(|l| l.is_loopback()).count();
        prop_assert_eq!(g.node_count(), 1 + k + k * k + k * k * k);
        prop_assert_eq!(g.link_count() - loops, 2 * (k + k * k + k * k * k));
        prop_assert_eq!(loops, g.node_count());
        let again = build_fat_tree(&cfg).unwrap();
        prop_assert_eq!(toml::to_string(&g).unwrap(), toml::to_string(&again).unwrap());
    }

    #[test]
    fn covariance_check_matches_determinant_sign(a in 0.0f64..4.0, c in 0.0f64..4.0, b in -4.0f64..4.0) {
        let m = Matrix::from_rows(&[vec![a, b], vec![b, c]]).unwrap();
        let det = a * c - b * b;
        if det > 1e-6 {
            prop_assert!(check_covariance(&m).is_ok());
        } else if det < -1e-6 {
            prop_assert!(check_covariance(&m).is_err());
        }
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), t in 0usize..3) {
        let spec = SliceType::ALL[t].spec();
        prop_assert_eq!(sample_aggregate(&spec, seed).unwrap(), sample_aggregate(&spec, seed).unwrap());
    }

    #[test]
    fn diagonal_box_probability_is_a_product(
        dim in 1usize..=6,
        raw in prop::collection::vec((-2.0f64..2.0, 0.1f64..3.0, -3.0f64..4.0), 6),
    ) {
        let (mean, sd, upper): (Vec<f64>, Vec<f64>, Vec<f64>) =
            raw[..dim].iter().fold((vec![], vec![], vec![]), |(mut m, mut s, mut u), &(a, b, c)| {
                m.push(a);
                s.push(b);
                u.push(c);
                (m, s, u)
            });
        let cov = Matrix::diagonal(&sd.iter().map(|s| s * s).collect::<Vec<_>>());
        let est = mvn_box_probability(&mean, &cov, &upper, &QmcConfig::default()).unwrap();
        let exact: f64 = (0..dim).map(|k| std_normal_cdf((upper[k] - mean[k]) / sd[k])).product();
        prop_assert!((est.value - exact).abs() < 5e-4);
    }

    #[test]
    fn gamma_b_is_antisymmetric(p in 1e-6f64..0.999_999) {
        prop_assert!((gamma_b(p).unwrap() + gamma_b(1.0 - p).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn reserves_cap_impact(
        capacity in 0.1f64..100.0,
        mean_frac in 0.0f64..0.5,
        sd_frac in 0.0f64..0.2,
        p in 0.01f64..0.5,
        use_frac in 0.0f64..=1.0,
    ) {
        let (mean, sd) = (capacity * mean_frac, capacity * sd_frac);
        let reserve = mean + gamma_b(p).unwrap() * sd;
        let provisioned = (capacity - reserve).max(0.0) * use_frac;
        prop_assert!(impact_probability(capacity, provisioned, mean, sd) <= p + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn psp_is_monotone_in_the_box(
        t in 0usize..3,
        gammas in (0.0f64..4000.0, 0.0f64..4000.0),
        bump in prop::collection::vec(0.0f64..0.5, 32),
    ) {
        let spec = SliceType::ALL[t].spec();
        let cfg = QmcConfig::default();
        let lo = targets_for_gamma(&spec, gammas.0.min(gammas.1), StatMode::PerUser).unwrap();
        let hi_gamma = targets_for_gamma(&spec, gammas.0.max(gammas.1), StatMode::PerUser).unwrap();
        let hi = DemandBox::new(hi_gamma.upper.iter().zip(&bump).map(|(u, b)| u + b).collect()).unwrap();
        prop_assert!(psp_of_box(&spec, &lo, &cfg).unwrap() <= psp_of_box(&spec, &hi, &cfg).unwrap() + 1e-12);
    }

    #[test]
    fn correlated_psp_is_monotone_within_error(c in 0.0f64..20.0, m in 0.0f64..25.0, dc in 0.0f64..5.0, dm in 0.0f64..5.0) {
        let spec = correlated_pair();
        let cfg = QmcConfig::default();
        let a = netslice::probability::psp_estimate(&spec, &DemandBox::new(vec![c, m, 0.0]).unwrap(), &cfg).unwrap();
        let b = netslice::probability::psp_estimate(&spec, &DemandBox::new(vec![c + dc, m + dm, 0.0]).unwrap(), &cfg).unwrap();
        prop_assert!(a.value <= b.value + 3.0 * (a.error + b.error) + 1e-12);
    }
}

fn correlated_pair() -> netslice::demand::SliceSpec {
    SliceConfig {
        id: "pair".into(),
        income: 1.0,
        required_psp: 0.9,
        users: UserCountConfig::Binomial { n: 10, p: 0.5 },
        vnfs: vec![VnfConfig {
            name: "v".into(),
            requirement: ResourceVector::new(1.0, 1.0, 0.0),
            compute: Moment::new(2.0, 1.0),
            memory: Moment::new(3.0, 1.0),
            wireless: Moment::default(),
        }],
        vlinks: vec![],
        correlation: 0.85,
        iid_covariance: false,
    }
    .build()
    .unwrap()
}

#[test]
fn aggregate_mean_is_expected_users_times_mean() {
    for spec in slice_catalog() {
        let m = aggregate_moments(&spec);
        let en = spec.user_count.mean();
        for (a, mu) in m.mean.iter().zip(&spec.user_model.mean) {
            assert_eq!(*a, en * mu, "{}", spec.id);
        }
    }
}

#[test]
fn margins_shrink_with_the_required_psp() {
    let cfg = QmcConfig::default();
    for t in SliceType::ALL {
        let gammas: Vec<f64> = [0.99, 0.95, 0.9]
            .into_iter()
            .map(|p| find_gamma_s(&t.spec().with_required_psp(p).unwrap(), &cfg, StatMode::PerUser, 1e-3).unwrap().gamma)
            .collect();
        assert!(gammas.windows(2).all(|w| w[1] <= w[0]), "{t:?}: {gammas:?}");
    }
}

proptest! {
    #![proptest_config(small())]

    #[test]
    fn zero_plan_is_always_feasible(mask in 1u8..8, reserve_frac in 0.0f64..1.5) {
        let graph = build_fat_tree(&FatTreeConfig::default()).unwrap();
        let specs: Vec<_> = SliceType::ALL.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, t)| t.spec()).collect();
        let targets = calibrate(&specs, &VariantConfig::new(Variant::Jp)).unwrap();
        let requests: Vec<_> = specs.iter().zip(&targets).map(|(spec, (_, target))| SliceRequest { spec, target: target.clone() }).collect();
        let reserves = LoadMap {
            node: graph.nodes.iter().map(|n| n.capacity.scale(reserve_frac)).collect(),
            link: graph.links.iter().map(|l| l.bandwidth * reserve_frac).collect(),
        };
        let model = build_joint(&requests, &graph, &reserves).unwrap();
        prop_assert!(model.check_assignment(&vec![0; model.var_count()], 0.0).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, ..ProptestConfig::default() })]

    /// A looser impact threshold means smaller reserves, which never lowers the optimum.
    #[test]
    fn relaxing_reserves_never_hurts(t in 0usize..3, p in 0.02f64..0.3, q in 0.02f64..0.3) {
        let graph = build_fat_tree(&FatTreeConfig::default()).unwrap();
        let bg = BackgroundModel::from_graph(&graph, Default::default()).unwrap();
        let specs = vec![SliceType::ALL[t].spec()];
        let (tight, loose) = (p.min(q), p.max(q));
        let earn = |max_impact: f64| {
            let cfg = VariantConfig::new(Variant::SpB).with_max_impact(max_impact);
            netslice::planner::earnings(&provision(&specs, &graph, &bg, &cfg).unwrap())
        };
        prop_assert!(earn(loose) >= earn(tight) - 1e-6);
    }

    /// Impact-aware plans keep every element under the threshold, and
    /// accepted slices reach their PSP up to the QMC and calibration budget.
    #[test]
    fn impact_aware_plans_respect_both_guarantees(a in 0usize..3, b in 0usize..3, p in 0.05f64..0.4) {
        let mut s = builtin_scenario("mix2").unwrap();
        s.slices = vec![
            netslice::eval::SliceMix::builtin(SliceType::ALL[a], 1),
            netslice::eval::SliceMix::builtin(SliceType::ALL[b], 1),
        ];
        let graph = s.graph().unwrap();
        let bg = s.background_model(&graph).unwrap();
        let specs = s.slice_specs().unwrap();
        for v in [Variant::SpB, Variant::JpB] {
            let cfg = VariantConfig::new(v).with_max_impact(p);
            let plan = provision(&specs, &graph, &bg, &cfg).unwrap();
            let impact = plan_impact_probabilities(&plan.provisioned, &graph, &bg).unwrap();
            prop_assert!(impact.max_value() <= p + 1e-9);
            let reserves = reserves_for(&graph, &bg, &cfg).unwrap();
            let targets = background_targets(&bg, gamma_b(p).unwrap()).unwrap();
            prop_assert_eq!(&reserves, &targets);
            for (sp, spec) in plan.slices.iter().zip(&specs).filter(|(sp, _)| sp.accepted) {
                let psp = psp_of_box(spec, &sp.provided_box(spec).unwrap(), &QmcConfig::default()).unwrap();
                prop_assert!(psp >= spec.required_psp - 5e-3, "{} psp {psp}", spec.id);
            }
        }
    }

    /// With both solved to optimality, the joint plan earns at least as much as the sequential one.
    #[test]
    fn joint_dominates_sequential(a in 0usize..3, b in 0usize..3, impact_aware in any::<bool>()) {
        let graph = build_fat_tree(&FatTreeConfig::default()).unwrap();
        let bg = BackgroundModel::from_graph(&graph, Default::default()).unwrap();
        let specs = vec![SliceType::ALL[a].spec(), SliceType::ALL[b].spec()];
        let (jv, sv) = if impact_aware { (Variant::JpB, Variant::SpB) } else { (Variant::Jp, Variant::Sp) };
        let joint = provision(&specs, &graph, &bg, &VariantConfig::new(jv)).unwrap();
        let seq = provision(&specs, &graph, &bg, &VariantConfig::new(sv)).unwrap();
        prop_assume!(joint.status == netslice::solver::SolveStatus::Optimal);
        prop_assert!(netslice::planner::earnings(&joint) >= netslice::planner::earnings(&seq) - 1e-6);
    }
}

#[test]
fn rrh_layer_alone_carries_wireless() {
    let g = build_fat_tree(&FatTreeConfig::default()).unwrap();
    for n in &g.nodes {
        assert_eq!(n.capacity.wireless > 0.0, n.layer == Layer::Rrh, "{}", n.id);
    }
}
