mod common;

use common::{brute_auc, noisy_sample};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucl_core::glm::{
    classification_rate, cox_snell_r2, cox_snell_upper_bound, fit_logistic, mcfadden_r2, nagelkerke_r2, roc_auc,
    roc_curve, DesignMatrix, ModelReport,
};

#[test]
fn null_model_scores_zero() {
    let y = [1, 0, 1, 1, 0, 1, 0, 1, 1, 1];
    let d = DesignMatrix::binary(&[], &y).unwrap();
    let m = fit_logistic(&d).unwrap();
    assert!(cox_snell_r2(&m).abs() < 1e-12);
    assert!(nagelkerke_r2(&m).abs() < 1e-12);
    assert!(mcfadden_r2(&m).unwrap().abs() < 1e-12);
}

#[test]
fn cox_snell_bound_closed_form() {
    for (pos, n) in [(7usize, 10usize), (1, 20), (13, 26), (61, 100)] {
        let y: Vec<u8> = (0..n).map(|i| u8::from(i < pos)).collect();
        let m = fit_logistic(&DesignMatrix::binary(&[], &y).unwrap()).unwrap();
        let p = pos as f64 / n as f64;
        let closed = 1.0 - (p.powf(p) * (1.0 - p).powf(1.0 - p)).powi(2);
        assert!((cox_snell_upper_bound(&m) - closed).abs() < 1e-12, "p = {p}");
    }
}

#[test]
fn r2_ordering_on_a_real_fit() {
    let (x, y) = noisy_sample(400, 3);
    let m = fit_logistic(&DesignMatrix::binary(&[("x", &x)], &y).unwrap()).unwrap();
    let cs = cox_snell_r2(&m);
    let nk = nagelkerke_r2(&m);
    assert!(0.0 < cs && cs < nk && nk < 1.0);
    assert!((nk - cs / cox_snell_upper_bound(&m)).abs() < 1e-15);
}

#[test]
fn auc_on_separated_scores_is_one() {
    let scores = [0.1, 0.2, 0.3, 0.7, 0.8, 0.9];
    let labels = [false, false, false, true, true, true];
    assert_eq!(roc_auc(&scores, &labels).unwrap(), 1.0);
    let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
    assert_eq!(roc_auc(&scores, &flipped).unwrap(), 0.0);
}

#[test]
fn auc_equals_pair_count_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2usize, 3, 17, 64, 200] {
        for _ in 0..20 {
            // coarse scores so ties are common
            let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..12) as f64 / 4.0).collect();
            let mut labels: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            labels[0] = true;
            labels[n - 1] = false;
            assert_eq!(roc_auc(&scores, &labels).unwrap(), brute_auc(&scores, &labels));
        }
    }
}

#[test]
fn auc_of_shuffled_labels_is_near_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let scores: Vec<f64> = (0..10_000).map(|_| rng.gen()).collect();
    let mut labels: Vec<bool> = (0..10_000).map(|i| i % 2 == 0).collect();
    labels.shuffle(&mut rng);
    let auc = roc_auc(&scores, &labels).unwrap();
    assert!((auc - 0.5).abs() < 0.02, "{auc}");
}

#[test]
fn auc_needs_both_classes() {
    assert!(roc_auc(&[0.1, 0.2], &[true, true]).is_err());
    assert!(roc_auc(&[0.1], &[true, false]).is_err());
}

#[test]
fn trapezoid_under_roc_curve_is_auc() {
    let (x, y) = noisy_sample(150, 8);
    let labels: Vec<bool> = y.iter().map(|&v| v == 1).collect();
    let scores: Vec<f64> = x.iter().map(|v| (v / 50.0).round()).collect();
    let pts = roc_curve(&scores, &labels).unwrap();
    assert_eq!(pts.first(), Some(&(0.0, 0.0)));
    assert_eq!(pts.last(), Some(&(1.0, 1.0)));
    let area: f64 = pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum();
    assert!((area - roc_auc(&scores, &labels).unwrap()).abs() < 1e-12);
}

#[test]
fn classification_counts_ties_as_positive() {
    // balanced intercept-only fit: every fitted probability is exactly one half
    let y = [1, 0, 0, 1, 0, 1, 1, 0];
    let d = DesignMatrix::binary(&[], &y).unwrap();
    let m = fit_logistic(&d).unwrap();
    assert!(m.fitted_probabilities(&d).iter().all(|&p| p == 0.5));
    assert_eq!(classification_rate(&m, &d, 0.5), 50.0);
    let skewed = [1, 1, 1, 0];
    let d = DesignMatrix::binary(&[], &skewed).unwrap();
    let m = fit_logistic(&d).unwrap();
    assert_eq!(classification_rate(&m, &d, 0.5), 75.0);
    assert_eq!(classification_rate(&m, &d, 0.9), 25.0);
}

#[test]
fn rescaling_the_regressor_leaves_fit_quality_alone() {
    let (x, y) = noisy_sample(500, 21);
    let scaled: Vec<f64> = x.iter().map(|v| v / 100.0).collect();
    let d1 = DesignMatrix::binary(&[("Elo", &x)], &y).unwrap();
    let d2 = DesignMatrix::binary(&[("Elo", &scaled)], &y).unwrap();
    let (m1, m2) = (fit_logistic(&d1).unwrap(), fit_logistic(&d2).unwrap());
    let (r1, r2) = (ModelReport::new(&m1, &d1).unwrap(), ModelReport::new(&m2, &d2).unwrap());
    assert!((r1.log_lik_fit - r2.log_lik_fit).abs() < 1e-9);
    assert!((r1.cox_snell_r2 - r2.cox_snell_r2).abs() < 1e-9);
    assert!((r1.nagelkerke_r2 - r2.nagelkerke_r2).abs() < 1e-9);
    assert!((r1.mcfadden_r2.unwrap() - r2.mcfadden_r2.unwrap()).abs() < 1e-9);
    assert!((r1.classification_rate - r2.classification_rate).abs() < 1e-9);
    assert!((r1.auc[0].1 - r2.auc[0].1).abs() < 1e-9);
    let b1 = m1.coefficient("Elo").unwrap().estimate;
    let b2 = m2.coefficient("Elo").unwrap().estimate;
    assert!((b2 - 100.0 * b1).abs() < 1e-6);
}
