//! End-to-end runs of the command-line entry point and the report writers.

use std::fs;
use std::path::Path;

use netslice::cli::{main_with_args, Exit};
use netslice::demand::{Moment, SliceConfig, UserCountConfig, VnfConfig};
use netslice::eval::{builtin_scenario, emit_plans, emit_report, run_scenario, RunOptions};
use netslice::probability::std_normal_inv_cdf;
use netslice::solver::{import_solution, parse_lp};
use netslice::topology::ResourceVector;
use tempfile::tempdir;

fn run(args: &[&str]) -> Exit {
    main_with_args(std::iter::once("netslice").chain(args.iter().copied()))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn one_user_slice(dir: &Path) -> std::path::PathBuf {
    let cfg = SliceConfig {
        id: "one".into(),
        income: 10.0,
        required_psp: 0.99,
        users: UserCountConfig::Fixed { n: 1 },
        vnfs: vec![VnfConfig {
            name: "f".into(),
            requirement: ResourceVector::new(1.0, 1.0, 0.0),
            compute: Moment::new(3.0, 2.0),
            memory: Moment::default(),
            wireless: Moment::default(),
        }],
        vlinks: vec![],
        correlation: 0.0,
        iid_covariance: false,
    };
    let path = dir.join("one.toml");
    fs::write(&path, toml::to_string(&cfg).unwrap()).unwrap();
    path
}

fn curve(path: &Path) -> Vec<(f64, f64)> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect()
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(run(&["provision", "--variant", "XP", "--out", path_str(&out)]), Exit::Config);
    assert_eq!(run(&["provision", "--scenario", "no-such-scenario"]), Exit::Config);
    assert_eq!(run(&["provision", "--max-impact", "1.5", "--out", path_str(&out)]), Exit::Config);
    assert_eq!(run(&["calibrate", "--psp", "0"]), Exit::Config);
    assert_eq!(run(&["verify", "--trials", "10"]), Exit::Config);
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "name = \"x\"\nunknown_key = 1\n").unwrap();
    assert_eq!(run(&["provision", "--scenario", path_str(&bad)]), Exit::Config);
}

#[test]
fn solver_limit_exits_with_three() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("o");
    let code = run(&["provision", "--scenario", "mix4", "--variant", "JP-B", "--time-limit", "0.05", "--out", path_str(&out)]);
    assert_eq!(code, Exit::Timeout);
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.contains("timeout"), "{report}");
}

#[test]
fn calibrate_recovers_the_normal_quantile() {
    let dir = tempdir().unwrap();
    let slice = one_user_slice(dir.path());
    let out = dir.path().join("cal");
    assert_eq!(run(&["calibrate", "--slice-file", path_str(&slice), "--out", path_str(&out)]), Exit::Ok);
    let points = curve(&out.join("calibration.csv"));
    assert_eq!(points.len(), 21);
    let gamma = points.last().unwrap().0 / 2.0;
    assert!((gamma - std_normal_inv_cdf(0.99).unwrap()).abs() < 2e-3, "gamma {gamma}");
    assert!(points.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12));
    assert!((points[0].1 - 0.5).abs() < 1e-9);

    let half = dir.path().join("half");
    assert_eq!(run(&["calibrate", "--slice-file", path_str(&slice), "--psp", "0.5", "--points", "3", "--out", path_str(&half)]), Exit::Ok);
    let points = curve(&half.join("calibration.csv"));
    assert_eq!(points.len(), 3);
    assert!(points.iter().all(|(_, p)| *p >= 0.5 - 1e-9));
}

#[test]
fn exported_models_round_trip() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("lp");
    assert_eq!(run(&["export-lp", "--scenario", "mix2", "--variant", "JP,SP-B", "--out", path_str(&out)]), Exit::Ok);
    let mut stems: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "lp"))
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    stems.sort();
    assert_eq!(stems, ["mix2-JP-joint", "mix2-SP-B-step0-type2-0", "mix2-SP-B-step1-type1-0"]);
    for stem in &stems {
        let lp = out.join(format!("{stem}.lp"));
        let sol = out.join(format!("{stem}.sol"));
        let model = parse_lp(&fs::read_to_string(&lp).unwrap()).unwrap().to_model().unwrap();
        let result = import_solution(&model, &fs::read_to_string(&sol).unwrap()).unwrap();
        assert!(result.objective.is_finite(), "{stem}");
        assert_eq!(run(&["verify", "--lp", path_str(&lp), "--solution", path_str(&sol)]), Exit::Ok);
    }
}

#[test]
fn verify_reports_flows_and_intervals() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("v");
    assert_eq!(run(&["verify", "--variant", "SP-B", "--trials", "20000", "--out", path_str(&out)]), Exit::Ok);
    let text = fs::read_to_string(out.join("verify.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "variant,item,kind,expected,estimate,low,high");
    let kinds: Vec<&str> = lines.map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(kinds, ["psp", "impact"]);
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    ["report.csv", "slices.csv", "plans.csv"].iter().map(|f| (f.to_string(), fs::read(dir.join(f)).unwrap())).collect()
}

#[test]
fn reports_are_byte_identical_across_runs_and_job_counts() {
    let dir = tempdir().unwrap();
    let dirs: Vec<_> = ["a", "b", "c"].iter().map(|d| dir.path().join(d)).collect();
    for (d, jobs) in dirs.iter().zip(["1", "1", "4"]) {
        let code = run(&["--jobs", jobs, "provision", "--scenario", "mix2", "--trials", "10000", "--out", path_str(d)]);
        assert_eq!(code, Exit::Ok);
    }
    let first = read_outputs(&dirs[0]);
    for d in &dirs[1..] {
        assert_eq!(read_outputs(d), first, "{}", d.display());
    }
}

#[test]
fn report_files_have_one_row_per_run() {
    let mut scenario = builtin_scenario("mix2").unwrap();
    scenario.repetitions = 2;
    scenario.trials = 10_000;
    let outcome = run_scenario(&scenario, RunOptions { jobs: 2 }).unwrap();
    let dir = tempdir().unwrap();
    let files = emit_report(std::slice::from_ref(&outcome), dir.path()).unwrap();
    let names: Vec<_> = files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["report.csv", "slices.csv", "timing.csv"]);

    let rows = |name: &str| {
        let mut r = csv::Reader::from_path(dir.path().join(name)).unwrap();
        let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
        (header, r.records().count())
    };
    let (header, n) = rows("report.csv");
    assert_eq!(n, 4 * 2);
    for col in ["scenario", "variant", "repetition", "status", "total_earnings", "provisioning_cost", "acceptance_rate", "max_impact_prob"]
    {
        assert!(header.iter().any(|h| h == col), "report.csv lacks {col}: {header:?}");
    }
    assert!(!header.iter().any(|h| h.contains("wall")));
    assert_eq!(rows("slices.csv").1, 4 * 2 * 2);
    let (timing, n) = rows("timing.csv");
    assert_eq!(n, 4 * 2);
    assert!(timing.iter().any(|h| h.contains("wall")), "{timing:?}");

    let plans = emit_plans(&[(&scenario, &outcome)], dir.path()).unwrap();
    assert!(rows(plans.file_name().unwrap().to_str().unwrap()).1 > 0);
}

#[test]
fn shipped_scenarios_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let s = netslice::eval::Scenario::load(&path).unwrap();
        s.validate().unwrap();
        assert!(!s.slice_specs().unwrap().is_empty(), "{}", path.display());
    }
}
