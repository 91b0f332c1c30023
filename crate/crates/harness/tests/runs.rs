use std::fs;

use proptest::prelude::*;

use hypspec_harness::config::{parse_config, parse_grid, Experiment};
use hypspec_harness::summary::{Flag, Num};
use hypspec_harness::{parse_summary, read_summary, run_experiment, write_outputs, HarnessError};

const CUSP: &str = "experiment = cusp-run\nu = 30,40,50,60\n";

#[test]
fn cusp_run_writes_and_round_trips() {
    let cfg = parse_config(CUSP).unwrap();
    let s = run_experiment(&cfg, 1).unwrap();
    assert!(s.all_pass(), "{:?}", s.fits);
    assert_eq!(s.fits.len(), 1);
    assert!((s.fits[0].slope.0 - 0.25).abs() <= 0.02);
    assert!(s.flags_consistent());

    let dir = tempfile::tempdir().unwrap();
    let files = write_outputs(&s, dir.path(), false).unwrap();
    assert!(files.iter().any(|f| f.ends_with("divergence.csv")));
    let back = read_summary(&dir.path().join("summary.json")).unwrap();
    assert_eq!(back.fits, s.fits);
    assert_eq!(back.flags, s.flags);
    assert_eq!(back.cells, s.cells);
    assert_eq!(back.config_echo, cfg);
    assert!(back.flags_consistent());

    let csv = fs::read_to_string(dir.path().join("divergence.csv")).unwrap();
    assert!(csv.starts_with("p,alpha,eta,U,lp_truncated,slope_estimate\n"));
    assert!(matches!(write_outputs(&s, dir.path(), false), Err(HarnessError::Exists(_))));
    write_outputs(&s, dir.path(), true).unwrap();
}

#[test]
fn reruns_are_identical_across_pool_sizes() {
    let cfg = parse_config("experiment = cylinder-check\nell = 0.5,2\nsamples = 2\nseed = 5\n").unwrap();
    let a = run_experiment(&cfg, 1).unwrap();
    let b = run_experiment(&cfg, 3).unwrap();
    assert_eq!(a.cells, b.cells);
    assert_eq!(a.flags, b.flags);
    let (ra, rb): (Vec<String>, Vec<String>) = (a.tables.iter().map(|t| t.render()).collect(), b.tables.iter().map(|t| t.render()).collect());
    assert_eq!(ra, rb);
    assert!(a.all_pass(), "{:?}", a.flags);
    let c = run_experiment(&parse_config("experiment = cylinder-check\nell = 0.5,2\nsamples = 2\nseed = 6\n").unwrap(), 1).unwrap();
    assert_ne!(a.cells, c.cells);
}

#[test]
fn failing_cells_are_recorded() {
    // A cusp profile needs alpha > 1/2; every cell fails but the run completes.
    let cfg = parse_config("experiment = cusp-run\nalpha = 0.4\n").unwrap();
    let s = run_experiment(&cfg, 1).unwrap();
    assert_eq!(s.cell_errors(), 1);
    assert!(!s.all_pass());
}

#[test]
fn config_errors_come_before_execution() {
    assert!(matches!(parse_config("experiment = spherical-scan\nlambda =\n"), Err(HarnessError::Parse { .. })));
    let cfg = parse_config("experiment = kernel-scan\neta = 0.1/log(lambda)\n").unwrap();
    assert!(matches!(run_experiment(&cfg, 1), Err(HarnessError::Config { .. })));
    assert_eq!(parse_config("experiment = z-scan\n").unwrap().experiment, Experiment::ZScan);
}

#[test]
fn strip_check_flags() {
    let cfg = parse_config("experiment = strip-check\nepsilon = 0.1,0.5\nr = 1:30:lin30\n").unwrap();
    let s = run_experiment(&cfg, 1).unwrap();
    assert!(s.all_pass(), "{:?}", s.flags);
}

#[test]
fn summary_json_accepts_non_finite_values() {
    let cfg = parse_config(CUSP).unwrap();
    let mut s = run_experiment(&cfg, 1).unwrap();
    s.flags.push(Flag::new("unbounded", f64::INFINITY, 1.0));
    let text = serde_json::to_string(&s).unwrap();
    let back = parse_summary(&text).unwrap();
    assert_eq!(back.flags.last().unwrap().value, Num(f64::INFINITY));
    assert!(!back.flags.last().unwrap().pass);
}

proptest! {
    #[test]
    fn log_grids_are_geometric(a in 0.01f64..100.0, k in 1.5f64..20.0, n in 2usize..12) {
        let g = parse_grid(&format!("{a}:{}:log{n}", a * k)).unwrap();
        prop_assert_eq!(g.len(), n);
        let r = (g[1] / g[0]).ln();
        for w in g.windows(2) {
            prop_assert!(((w[1] / w[0]).ln() - r).abs() < 1e-9 * r.abs().max(1.0));
        }
    }

    #[test]
    fn num_round_trips(x in prop::num::f64::ANY) {
        let text = serde_json::to_string(&Num(x)).unwrap();
        let back: Num = serde_json::from_str(&text).unwrap();
        prop_assert!(back.0 == x || (back.0.is_nan() && x.is_nan()));
    }

    #[test]
    fn flags_match_their_numbers(v in -1e3f64..1e3, b in -1e3f64..1e3) {
        let f = Flag::new("x", v, b);
        prop_assert_eq!(f.pass, f.recheck());
    }

    #[test]
    fn config_parser_does_not_panic(text in "\\PC{0,200}") {
        let _ = parse_config(&text);
    }
}
