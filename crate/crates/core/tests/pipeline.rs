use anyon_core::oracles::{entropy_n2, N2OracleSpec};
use anyon_core::pipeline::{run_point, sweep, GridSpec, Method, RunOptions, SweepAxis};
use anyon_core::ModelParams;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn opts(method: Method) -> RunOptions {
    RunOptions {
        grid: GridSpec {
            method,
            ..GridSpec::default()
        },
        c_eff_cap: None,
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let base = ModelParams::new(3, 1.0, 2.0, 0.0).unwrap();
    let values = [0.0, 0.3, 0.7, 1.0];
    let a = sweep(SweepAxis::Kappa, &values, &base, &RunOptions::default(), 1).unwrap();
    let b = sweep(SweepAxis::Kappa, &values, &base, &RunOptions::default(), 4).unwrap();
    for (x, y) in a.iter().zip(&b) {
        let (x, y) = (x.result.as_ref().unwrap(), y.result.as_ref().unwrap());
        assert_eq!(x.entropy.to_bits(), y.entropy.to_bits());
        assert_eq!(x.occupations, y.occupations);
    }
    let kappas: Vec<f64> = a.iter().map(|r| r.params.kappa).collect();
    assert_eq!(kappas, values);
}

#[test]
fn circulant_falls_in_line_with_dense_for_bosons() {
    let p = ModelParams::new(3, 1.0, 5.0, 0.0).unwrap();
    let fast = run_point(&p, &opts(Method::Circulant)).unwrap();
    let dense = run_point(&p, &opts(Method::Nystrom)).unwrap();
    assert_eq!(fast.record.method, Method::Circulant);
    assert_eq!(dense.record.method, Method::Nystrom);
    assert_abs_diff_eq!(fast.record.entropy, dense.record.entropy, epsilon = 1e-4);
    for (a, b) in fast.record.occupations.iter().zip(&dense.record.occupations).take(4) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-6);
    }
}

#[test]
fn records_revalidate() {
    for p in [
        ModelParams::new(4, 1.0, 0.0, 0.0).unwrap(),
        ModelParams::new(4, 1.0, 3.0, 0.7).unwrap(),
        ModelParams::hardcore(3, 2.0, 0.4).unwrap(),
    ] {
        let r = run_point(&p, &RunOptions::default()).unwrap().record;
        r.validate().unwrap();
        assert!(r.toeplitz_deviation < 1e-6);
    }
}

#[test]
fn capped_coupling_approaches_hardcore() {
    let p = ModelParams::hardcore(3, 1.0, 0.0).unwrap();
    let exact = run_point(&p, &RunOptions::default()).unwrap().record.entropy;
    let capped = RunOptions {
        c_eff_cap: Some(1e6),
        ..RunOptions::default()
    };
    let r = run_point(&p, &capped).unwrap().record;
    assert_eq!(r.solver.c_eff, 1e6);
    assert_abs_diff_eq!(r.entropy, exact, epsilon = 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn two_particles_match_the_oracle(c in 0.05f64..200.0, kappa in 0.0f64..=1.0, length in 0.5f64..2.0) {
        let p = ModelParams::new(2, length, c, kappa).unwrap();
        let s = run_point(&p, &RunOptions::default()).unwrap().record.entropy;
        let r = entropy_n2(c, kappa, length, &N2OracleSpec::default()).unwrap();
        prop_assert!((s - r.entropy).abs() < 1e-4, "c={} kappa={} L={}: {} vs {}", c, kappa, length, s, r.entropy);
    }
}
