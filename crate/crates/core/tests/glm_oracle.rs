mod common;

use common::{grid_optimum, X20, Y20};
use ucl_core::glm::{fit_logistic, fit_multinomial, log_likelihood, DesignMatrix, FitError, INTERCEPT};

#[test]
fn loglik_matches_grid_oracle() {
    let d = DesignMatrix::binary(&[("x", &X20)], &Y20).unwrap();
    let m = fit_logistic(&d).unwrap();
    let (best, b0, b1) = grid_optimum();
    assert!((m.log_lik_fit - best).abs() < 1e-6, "{} vs {best}", m.log_lik_fit);
    assert!(m.log_lik_fit >= best - 1e-12);
    assert!((m.coefficient(INTERCEPT).unwrap().estimate - b0).abs() < 1e-4);
    assert!((m.coefficient("x").unwrap().estimate - b1).abs() < 1e-4);
}

#[test]
fn gradient_vanishes_at_the_optimum() {
    let d = DesignMatrix::binary(&[("x", &X20)], &Y20).unwrap();
    let m = fit_logistic(&d).unwrap();
    let p = m.parameters();
    let h = 1e-6;
    let g: Vec<f64> = (0..p.len())
        .map(|k| {
            let (mut up, mut down) = (p.clone(), p.clone());
            up[k] += h;
            down[k] -= h;
            (log_likelihood(&d, &up, None) - log_likelihood(&d, &down, None)) / (2.0 * h)
        })
        .collect();
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(norm < 1e-5, "{norm}");
}

#[test]
fn binary_matches_reference_fit() {
    // reference values from an independent Newton solver
    let d = DesignMatrix::binary(&[("x", &X20)], &Y20).unwrap();
    let m = fit_logistic(&d).unwrap();
    let b0 = m.coefficient(INTERCEPT).unwrap();
    let b1 = m.coefficient("x").unwrap();
    assert!((b0.estimate + 0.12907281).abs() < 1e-7);
    assert!((b1.estimate - 1.06479846).abs() < 1e-7);
    assert!((b0.std_error - 0.51986826).abs() < 1e-6);
    assert!((b1.std_error - 0.53939116).abs() < 1e-6);
    assert!((b1.p_value - 0.04837325).abs() < 1e-6);
    assert!((m.log_lik_fit + 11.11238219305896).abs() < 1e-9);
    assert!((m.log_lik_null + 13.862943611198906).abs() < 1e-12);
}

#[test]
fn multinomial_matches_reference_fit() {
    let x = [
        -2.0, -1.6, -1.5, -1.2, -0.9, -0.7, -0.5, -0.4, -0.2, 0.0, 0.1, 0.3, 0.4, 0.6, 0.8, 1.0, 1.3, 1.5, 1.8, 2.2, -1.0,
        0.5, 1.1, -0.3,
    ];
    let y = [0, 0, 1, 0, 0, 2, 1, 0, 1, 1, 0, 2, 1, 2, 1, 2, 2, 0, 2, 2, 1, 1, 2, 0];
    let d = DesignMatrix::categorical(&[("x", &x)], &y, &["a", "b", "c"]).unwrap();
    let m = fit_multinomial(&d, 0).unwrap();
    let expect = [
        ("b", [0.19878728, 0.50070602], [0.56224242, 0.57151677]),
        ("c", [-0.37538298, 1.92074072], [0.71038458, 0.79818652]),
    ];
    for (cat, est, se) in expect {
        for (k, name) in [INTERCEPT, "x"].iter().enumerate() {
            let c = m.coefficient_in(cat, name).unwrap();
            assert!((c.estimate - est[k]).abs() < 1e-6, "{cat} {name}");
            assert!((c.std_error - se[k]).abs() < 1e-5, "{cat} {name}");
        }
    }
    assert!((m.log_lik_fit + 21.214895761918985).abs() < 1e-8);
    assert!((m.log_lik_null + 26.366694928034637).abs() < 1e-10);
}

#[test]
fn multinomial_reference_choice_only_reparametrises() {
    let x = [-1.0, -0.5, 0.0, 0.4, 0.9, 1.3, -0.2, 0.7, -1.4, 1.8];
    let y = [0, 1, 2, 1, 2, 2, 0, 1, 0, 2];
    let d = DesignMatrix::categorical(&[("x", &x)], &y, &["a", "b", "c"]).unwrap();
    let a = fit_multinomial(&d, 0).unwrap();
    let c = fit_multinomial(&d, 2).unwrap();
    assert!((a.log_lik_fit - c.log_lik_fit).abs() < 1e-9);
    for i in 0..x.len() {
        let pa = a.category_probabilities(&[1.0, x[i]]);
        let pc = c.category_probabilities(&[1.0, x[i]]);
        for k in 0..3 {
            assert!((pa[k] - pc[k]).abs() < 1e-8);
        }
    }
}

#[test]
fn two_class_multinomial_equals_logistic() {
    let d2 = DesignMatrix::binary(&[("x", &X20)], &Y20).unwrap();
    let dk = DesignMatrix::categorical(&[("x", &X20)], &Y20, &["no", "yes"]).unwrap();
    let b = fit_logistic(&d2).unwrap();
    let m = fit_multinomial(&dk, 0).unwrap();
    assert!((b.log_lik_fit - m.log_lik_fit).abs() < 1e-9);
    let slope = m.coefficient_in("yes", "x").unwrap().estimate;
    assert!((b.coefficient("x").unwrap().estimate - slope).abs() < 1e-7);
}

#[test]
fn separated_data_is_reported() {
    let x = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0];
    let y = [0, 0, 0, 1, 1, 1];
    let d = DesignMatrix::binary(&[("gap", &x)], &y).unwrap();
    match fit_logistic(&d) {
        Err(FitError::Separation { feature }) => assert_eq!(feature, "gap"),
        other => panic!("expected separation, got {other:?}"),
    }
}

#[test]
fn one_class_is_an_error() {
    let x = [0.1, 0.2, 0.3];
    assert!(DesignMatrix::binary(&[("x", &x)], &[1, 1, 1]).and_then(|d| fit_logistic(&d)).is_err());
}

#[test]
fn non_finite_feature_is_an_error() {
    let x = [0.1, f64::NAN, 0.3];
    assert!(matches!(
        DesignMatrix::binary(&[("x", &x)], &[1, 0, 1]),
        Err(FitError::NonFinite { row: 1, .. })
    ));
}
