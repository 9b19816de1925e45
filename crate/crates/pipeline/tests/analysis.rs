mod common;

use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use trustgrid_core::synthetic::{gen_trust_arimax, SyntheticTrustParams};
use trustgrid_core::{build_plan, Group, TrustSeries, WorldConfig};
use trustgrid_pipeline::render::{DAGGER, ERROR_FILE};
use trustgrid_pipeline::{render_tables, run_analysis, AnalysisConfig, AnalysisReport};

fn synthetic_pair(seed: u64, params: &SyntheticTrustParams) -> (TrustSeries, TrustSeries) {
    let world = WorldConfig::default();
    let s0 = gen_trust_arimax(params, &build_plan(seed, Group::G0, &world), 2 * seed).unwrap();
    let s1 = gen_trust_arimax(params, &build_plan(seed, Group::G1, &world), 2 * seed + 1).unwrap();
    (s0, s1)
}

fn full_report() -> &'static AnalysisReport {
    static REPORT: OnceLock<AnalysisReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let (s0, s1) = synthetic_pair(3, &SyntheticTrustParams::default());
        run_analysis(&s0, &s1, &AnalysisConfig::default()).unwrap()
    })
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn cross_validated_rmse_exceeds_self_rmse_on_average() {
    let cfg = AnalysisConfig {
        p_values: vec![0, 1],
        q_values: vec![0, 1],
        ..AnalysisConfig::default()
    };
    let params = SyntheticTrustParams {
        d: 1,
        phi: vec![0.5],
        noise_sd: 0.03,
        ..SyntheticTrustParams::default()
    };
    let (mut diag, mut off) = (0.0, 0.0);
    for seed in 0..20 {
        let (s0, s1) = synthetic_pair(seed, &params);
        let r = run_analysis(&s0, &s1, &cfg).unwrap();
        assert!(r.is_complete(), "seed {seed}: {:?}", r.missing());
        diag +=
            r.rmse.get(Group::G0, Group::G0).unwrap() + r.rmse.get(Group::G1, Group::G1).unwrap();
        off +=
            r.rmse.get(Group::G0, Group::G1).unwrap() + r.rmse.get(Group::G1, Group::G0).unwrap();
    }
    assert!(
        diag <= off,
        "mean self {} vs cross {}",
        diag / 40.0,
        off / 40.0
    );
}

#[test]
fn report_holds_every_component() {
    let r = full_report();
    assert!(r.is_complete(), "{:?}", r.missing());
    for g in &r.groups {
        assert_eq!(g.series.len(), 63);
        let ols = g.ols.as_ref().unwrap();
        assert_eq!(ols.coefficients.len(), 3);
        let diag = g.diagnostics.as_ref().unwrap();
        assert_eq!(diag.acf.values.len(), 21);
        assert_eq!(diag.pacf.values.len(), 21);
        assert_eq!(diag.acf.values[0], 1.0);
        let grid = g.aic.as_ref().unwrap();
        assert_eq!((grid.cells.len(), grid.cells[0].len(), grid.d), (5, 5, 1));
        let fit = g.arimax.as_ref().unwrap();
        assert_eq!(Some(fit.order), grid.best);
        assert_eq!(g.forecast.as_ref().unwrap().predicted.len(), 62);
    }
}

#[test]
fn rendered_tables_have_the_published_shapes() {
    let dir = tempfile::tempdir().unwrap();
    render_tables(full_report(), dir.path()).unwrap();
    for g in ["G0", "G1"] {
        let aic = read(dir.path(), &format!("aic_{g}.csv"));
        let lines: Vec<&str> = aic.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], r"p\q,0,1,2,3,4");
        for (p, line) in lines[1..].iter().enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 6);
            assert_eq!(cells[0], p.to_string());
        }
        let ols = read(dir.path(), &format!("ols_{g}.csv"));
        assert!(ols.lines().any(|l| l.starts_with("c100,")));
        let arimax = read(dir.path(), &format!("arimax_{g}.txt"));
        assert!(arimax.contains("ARIMAX("));
        assert!(arimax.contains("sigma2"));
        assert!(dir.path().join(format!("correlogram_{g}.csv")).exists());
        assert!(dir.path().join(format!("predictions_{g}.csv")).exists());
    }
    let rmse = read(dir.path(), "rmse.csv");
    let rows: Vec<Vec<&str>> = rmse.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.len() == 3));
    assert!(!rows[1][1].contains(DAGGER) && rows[1][2].ends_with(DAGGER));
    assert!(rows[2][1].ends_with(DAGGER) && !rows[2][2].contains(DAGGER));
    assert_eq!(read(dir.path(), "trust_series.csv").lines().count(), 64);
    let acf = read(dir.path(), "correlogram_G0.csv");
    assert_eq!(
        acf.lines()
            .nth(1)
            .unwrap()
            .split(',')
            .take(2)
            .collect::<Vec<_>>(),
        ["0", "1"]
    );
    assert!(!dir.path().join(ERROR_FILE).exists());
    let leftovers = fs::read_dir(dir.path()).unwrap().filter(|e| {
        e.as_ref()
            .unwrap()
            .file_name()
            .to_string_lossy()
            .ends_with(".tmp")
    });
    assert_eq!(leftovers.count(), 0);
}

#[test]
fn same_input_gives_identical_bytes() {
    let (s0, s1) = synthetic_pair(3, &SyntheticTrustParams::default());
    let again = run_analysis(&s0, &s1, &AnalysisConfig::default()).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = render_tables(full_report(), a.path()).unwrap();
    render_tables(&again, b.path()).unwrap();
    for f in fa {
        let name = f.file_name().unwrap();
        assert_eq!(
            fs::read(&f).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn incomplete_report_writes_only_an_error_file() {
    let mut r = full_report().clone();
    r.groups[1].arimax = None;
    let dir = tempfile::tempdir().unwrap();
    assert!(render_tables(&r, dir.path()).is_err());
    let names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, [ERROR_FILE]);
    assert!(read(dir.path(), ERROR_FILE).contains("G1: ARIMAX fit"));
}
