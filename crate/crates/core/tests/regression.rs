//! Measured constants pinned as regression baselines.

use umskel::chaining::majorizing_chain_check;
use umskel::generators::{equilateral, path_metric};
use umskel::json::to_canonical;
use umskel::skeleton::{build_skeleton, dvoretzky_check, SkeletonResult};
use umskel::WeightedSpace;

#[test]
fn path_skeletons() {
    let expected: [(usize, &[usize], f64); 8] = [
        (2, &[0, 1], 1.0),
        (3, &[0, 2], 1.0),
        (4, &[0, 3], 1.0),
        (5, &[0, 1, 4], 4.0 / 3.0),
        (6, &[0, 1, 4, 5], 5.0 / 3.0),
        (8, &[0, 1, 6, 7], 1.4),
        (10, &[0, 1, 3, 8, 9], 1.8),
        (12, &[0, 2, 9, 11], 11.0 / 7.0),
    ];
    for (m, subset, distortion) in expected {
        let ws = WeightedSpace::uniform(path_metric(m));
        let sk = build_skeleton(&ws, 0.5).unwrap();
        assert_eq!(sk.subset, subset, "path {m}");
        assert!((sk.distortion - distortion).abs() < 1e-12, "path {m}: {}", sk.distortion);
        assert_eq!(sk.c_measured, 1.0, "path {m}");
    }
}

#[test]
fn dvoretzky_sweep_on_path_nine() {
    let sizes: Vec<usize> =
        [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|&e| dvoretzky_check(&path_metric(9), e).unwrap().size).collect();
    assert_eq!(sizes, vec![9, 6, 4, 2, 2]);
    for eps in [0.1, 0.3, 0.5, 0.7, 0.9] {
        assert!(dvoretzky_check(&path_metric(9), eps).unwrap().pass);
    }
}

#[test]
fn majorizing_examples() {
    let ws = WeightedSpace::uniform(equilateral(5));
    let sk = build_skeleton(&ws, 0.5).unwrap();
    let rep = majorizing_chain_check(&ws, &sk).unwrap();
    for p in &rep.points {
        assert!((p.i_nu / p.rhs - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    let ws = WeightedSpace::uniform(path_metric(8));
    let sk = build_skeleton(&ws, 0.5).unwrap();
    let rep = majorizing_chain_check(&ws, &sk).unwrap();
    assert!(rep.all_pass);
    assert!((rep.ratio - 0.864607652976255).abs() < 1e-9, "ratio {}", rep.ratio);

    let sk = build_skeleton(&ws, 0.25).unwrap();
    assert!(majorizing_chain_check(&ws, &sk).is_err());
}

#[test]
fn skeleton_json_is_canonical_and_round_trips() {
    let ws = WeightedSpace::uniform(path_metric(6));
    let sk = build_skeleton(&ws, 0.5).unwrap();
    let a = to_canonical(&sk).unwrap();
    let b = to_canonical(&build_skeleton(&ws, 0.5).unwrap()).unwrap();
    assert_eq!(a, b);
    let back: SkeletonResult = serde_json::from_str(&a).unwrap();
    assert_eq!(back.subset, sk.subset);
    assert_eq!(back.tree, sk.tree);
    assert_eq!(back.nu, sk.nu);
    assert_eq!(back.growth, sk.growth);
    assert_eq!(to_canonical(&back).unwrap(), a);
}
