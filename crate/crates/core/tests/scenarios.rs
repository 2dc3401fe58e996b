use std::path::PathBuf;

use cstar_frames::builtin::{example2, example2_tight_bound};
use cstar_frames::frames::{derive_tight_star_bound, reconstruct};
use cstar_frames::random::{module_element, rng_for};
use cstar_frames::report::run_analysis;
use cstar_frames::scenario::{load_scenario, Builtin};
use cstar_frames::DEFAULT_TOL;

fn scenarios() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    paths
}

#[test]
fn shipped_scenarios_pass_every_verdict() {
    let paths = scenarios();
    assert!(paths.len() >= 4);
    for path in paths {
        let sc = load_scenario(&path, 0).unwrap();
        let report = run_analysis(&sc).unwrap();
        let failed: Vec<_> = report.verdicts.iter().filter(|(_, ok)| !**ok).collect();
        assert!(failed.is_empty(), "{}: {failed:?}", path.display());
    }
}

#[test]
fn example1_file_matches_closed_form() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let sc = load_scenario(dir.join("example1.toml"), 0).unwrap();
    assert_eq!(sc.builtin, Some(Builtin::Example1 { alpha: 3.0 }));
    assert_eq!(sc.seed, 1);
    assert_eq!(sc.frame.len(), 8);
    let inst = run_analysis(&sc).unwrap().instance.unwrap();
    assert!((inst.lower_bound.unwrap() - 0.25).abs() < 1e-12);
    assert!((inst.upper_bound.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn example2_at_full_truncation_reconstructs() {
    let (frame, c) = example2(1.0, 100).unwrap();
    let x = module_element(&mut rng_for(5, 0), frame.module());
    let rec = reconstruct(&frame, &c, &x, 1e-6).unwrap();
    assert!(rec.estimate.distance(&x).unwrap() <= 1e-6 * x.module_norm());
    // A = 1/N², so the contraction is 1 - 1e-4 and many steps are expected.
    assert!(rec.iterations > 1000);
    let bounds = derive_tight_star_bound(&frame, &c, DEFAULT_TOL).unwrap();
    assert!(bounds.lower().distance(&example2_tight_bound(1.0, 100)).unwrap() < 1e-12);
}
