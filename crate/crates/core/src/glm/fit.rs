use nalgebra::{DMatrix, DVector};
use statrs::function::erf::erfc;

use super::{Categories, Coefficient, DesignMatrix, Equation, FitError, RegressionModel, INTERCEPT};

pub const MAX_ITERATIONS: usize = 100;
pub const GRADIENT_TOLERANCE: f64 = 1e-8;
/// Coefficient magnitude past which a still-improving fit is declared separated.
pub const SEPARATION_BOUND: f64 = 50.0;
/// A fitted linear predictor this large means a probability within ~1e-13 of 0 or 1.
const SATURATED_ETA: f64 = 30.0;
const MAX_HALVINGS: usize = 40;

pub(crate) fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Softmax over `eta` (one entry per non-reference category, in category
/// order) with the reference category's predictor fixed at zero.
pub(crate) fn softmax_with_reference(eta: &[f64], k: usize, reference: usize) -> Vec<f64> {
    let mut full = Vec::with_capacity(k);
    let mut it = eta.iter();
    for c in 0..k {
        full.push(if c == reference { 0.0 } else { *it.next().expect("one predictor per category") });
    }
    let max = full.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = full.iter().map(|e| (e - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

fn null_log_likelihood(design: &DesignMatrix) -> f64 {
    let n = design.n() as f64;
    design
        .category_shares()
        .iter()
        .filter(|&&s| s > 0.0)
        .map(|&s| n * s * s.ln())
        .sum()
}

/// Log-likelihood of `design` at a flattened parameter vector (binary when
/// `categories` is `None`).
pub fn log_likelihood(design: &DesignMatrix, params: &[f64], categories: Option<&Categories>) -> f64 {
    let d = design.x.ncols();
    match categories {
        None => {
            let beta = DVector::from_column_slice(params);
            let eta = &design.x * beta;
            binary_ll(&eta, &design.y)
        }
        Some(cats) => {
            let k = cats.names.len();
            let theta = DVector::from_column_slice(params);
            let (ll, _) = multinomial_eval(design, &theta, k, cats.reference, d);
            ll
        }
    }
}

fn binary_ll(eta: &DVector<f64>, y: &[usize]) -> f64 {
    eta.iter()
        .zip(y)
        .map(|(&e, &yi)| if yi == 1 { -softplus(-e) } else { -softplus(e) })
        .sum()
}

fn culprit(columns: &[String], x: &DMatrix<f64>, estimates: &[f64]) -> String {
    let d = columns.len();
    let mut best = (INTERCEPT.to_owned(), 0.0);
    for (idx, &b) in estimates.iter().enumerate() {
        let j = idx % d;
        let scale = if j == 0 {
            1.0
        } else {
            x.column(j).iter().fold(0.0f64, |m, v| m.max(v.abs()))
        };
        let size = b.abs() * scale;
        if size > best.1 {
            best = (columns[j].clone(), size);
        }
    }
    best.0
}

fn require_variation(design: &DesignMatrix) -> Result<(), FitError> {
    // an absent category sends its intercept to -infinity
    if design.category_shares().contains(&0.0) {
        return Err(FitError::Separation {
            feature: INTERCEPT.to_owned(),
        });
    }
    Ok(())
}

fn solve_spd(info: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>, FitError> {
    let chol = info.clone().cholesky().ok_or(FitError::Rank)?;
    let step = chol.solve(rhs);
    if step.iter().all(|v| v.is_finite()) {
        Ok(step)
    } else {
        Err(FitError::Rank)
    }
}

fn covariance(info: &DMatrix<f64>) -> Result<DMatrix<f64>, FitError> {
    let chol = info.clone().cholesky().ok_or(FitError::Rank)?;
    let inv = chol.inverse();
    if inv.iter().all(|v| v.is_finite()) && (0..inv.nrows()).all(|i| inv[(i, i)] > 0.0) {
        Ok(inv)
    } else {
        Err(FitError::Rank)
    }
}

fn coefficients(columns: &[String], estimates: &[f64], cov: &DMatrix<f64>, offset: usize) -> Vec<Coefficient> {
    columns
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let estimate = estimates[offset + j];
            let std_error = cov[(offset + j, offset + j)].sqrt();
            let z = estimate / std_error;
            Coefficient {
                name: name.clone(),
                estimate,
                std_error,
                z,
                p_value: two_sided_p(z),
            }
        })
        .collect()
}

/// Binary logit by iteratively reweighted least squares.
///
/// Stops when the score vector's norm drops below 1e-8 (at most 100
/// iterations); a step that would lower the likelihood is halved.
pub fn fit_logistic(design: &DesignMatrix) -> Result<RegressionModel, FitError> {
    if design.categories.len() != 2 {
        return Err(FitError::Design("binary fit needs a two-category response".into()));
    }
    require_variation(design)?;
    let x = &design.x;
    let d = x.ncols();
    let y = DVector::from_iterator(design.n(), design.y.iter().map(|&v| v as f64));

    let mut beta = DVector::zeros(d);
    let mut eta = x * &beta;
    let mut ll = binary_ll(&eta, &design.y);
    let mut iterations = 0;
    let mut grad_norm;
    loop {
        let p = eta.map(logistic);
        let grad = x.transpose() * (&y - &p);
        grad_norm = grad.norm();
        if grad_norm < GRADIENT_TOLERANCE {
            break;
        }
        if iterations == MAX_ITERATIONS {
            return Err(FitError::Separation {
                feature: culprit(&design.columns, x, beta.as_slice()),
            });
        }
        iterations += 1;
        let w = p.map(|pi| pi * (1.0 - pi));
        let info = weighted_gram(x, &w);
        let step = solve_spd(&info, &grad)?;

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand = &beta + &step * t;
            let cand_eta = x * &cand;
            let cand_ll = binary_ll(&cand_eta, &design.y);
            if cand_ll >= ll - 1e-12 * ll.abs().max(1.0) {
                let improved = cand_ll > ll;
                beta = cand;
                eta = cand_eta;
                ll = cand_ll;
                accepted = true;
                if improved && beta.amax() > SEPARATION_BOUND {
                    return Err(FitError::Separation {
                        feature: culprit(&design.columns, x, beta.as_slice()),
                    });
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no ascent direction left at working precision
            break;
        }
    }
    if eta.amax() > SATURATED_ETA {
        return Err(FitError::Separation {
            feature: culprit(&design.columns, x, beta.as_slice()),
        });
    }

    let p = eta.map(logistic);
    let info = weighted_gram(x, &p.map(|pi| pi * (1.0 - pi)));
    let cov = covariance(&info)?;
    Ok(RegressionModel {
        columns: design.columns.clone(),
        equations: vec![Equation {
            category: None,
            coefficients: coefficients(&design.columns, beta.as_slice(), &cov, 0),
        }],
        categories: None,
        log_lik_null: null_log_likelihood(design),
        log_lik_fit: ll,
        n: design.n(),
        iterations,
        gradient_norm: grad_norm,
    })
}

fn weighted_gram(x: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let mut xw = x.clone();
    for (i, mut row) in xw.row_iter_mut().enumerate() {
        row *= w[i];
    }
    x.transpose() * xw
}

/// Log-likelihood and per-row category probabilities.
fn multinomial_eval(
    design: &DesignMatrix,
    theta: &DVector<f64>,
    k: usize,
    reference: usize,
    d: usize,
) -> (f64, Vec<Vec<f64>>) {
    let mut ll = 0.0;
    let mut probs = Vec::with_capacity(design.n());
    for i in 0..design.n() {
        let row = design.x.row(i);
        let eta: Vec<f64> = (0..k - 1)
            .map(|j| (0..d).map(|c| row[c] * theta[j * d + c]).sum())
            .collect();
        // log-sum-exp over the full predictor vector
        let mut full = Vec::with_capacity(k);
        let mut it = eta.iter();
        for c in 0..k {
            full.push(if c == reference { 0.0 } else { *it.next().unwrap() });
        }
        let max = full.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + full.iter().map(|e| (e - max).exp()).sum::<f64>().ln();
        ll += full[design.y[i]] - lse;
        probs.push(full.iter().map(|e| (e - lse).exp()).collect());
    }
    (ll, probs)
}

/// Multinomial logit with `reference` as the baseline category, by Newton's
/// method on the full (K-1)·p parameter vector.
pub fn fit_multinomial(design: &DesignMatrix, reference: usize) -> Result<RegressionModel, FitError> {
    let k = design.categories.len();
    if reference >= k {
        return Err(FitError::Design(format!("reference {reference} is not a category index")));
    }
    require_variation(design)?;
    let d = design.x.ncols();
    let m = (k - 1) * d;
    // non-reference categories in order
    let others: Vec<usize> = (0..k).filter(|&c| c != reference).collect();

    let mut theta = DVector::zeros(m);
    let (mut ll, mut probs) = multinomial_eval(design, &theta, k, reference, d);
    let mut iterations = 0;
    let mut grad_norm;
    loop {
        let mut grad = DVector::zeros(m);
        let mut info = DMatrix::zeros(m, m);
        for i in 0..design.n() {
            let row = design.x.row(i);
            let p = &probs[i];
            for (a, &ca) in others.iter().enumerate() {
                let resid = f64::from(u8::from(design.y[i] == ca)) - p[ca];
                for c in 0..d {
                    grad[a * d + c] += row[c] * resid;
                }
                for (b, &cb) in others.iter().enumerate() {
                    let w = if a == b { p[ca] * (1.0 - p[ca]) } else { -p[ca] * p[cb] };
                    for r in 0..d {
                        for c in 0..d {
                            info[(a * d + r, b * d + c)] += w * row[r] * row[c];
                        }
                    }
                }
            }
        }
        grad_norm = grad.norm();
        if grad_norm < GRADIENT_TOLERANCE {
            break;
        }
        if iterations == MAX_ITERATIONS {
            return Err(FitError::Separation {
                feature: culprit(&design.columns, &design.x, theta.as_slice()),
            });
        }
        iterations += 1;
        let step = solve_spd(&info, &grad)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand = &theta + &step * t;
            let (cand_ll, cand_probs) = multinomial_eval(design, &cand, k, reference, d);
            if cand_ll >= ll - 1e-12 * ll.abs().max(1.0) {
                let improved = cand_ll > ll;
                theta = cand;
                ll = cand_ll;
                probs = cand_probs;
                accepted = true;
                if improved && theta.amax() > SEPARATION_BOUND {
                    return Err(FitError::Separation {
                        feature: culprit(&design.columns, &design.x, theta.as_slice()),
                    });
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let saturated = probs.iter().flatten().any(|&p| p < (-SATURATED_ETA).exp());
    if saturated {
        return Err(FitError::Separation {
            feature: culprit(&design.columns, &design.x, theta.as_slice()),
        });
    }

    let mut info = DMatrix::zeros(m, m);
    for i in 0..design.n() {
        let row = design.x.row(i);
        let p = &probs[i];
        for (a, &ca) in others.iter().enumerate() {
            for (b, &cb) in others.iter().enumerate() {
                let w = if a == b { p[ca] * (1.0 - p[ca]) } else { -p[ca] * p[cb] };
                for r in 0..d {
                    for c in 0..d {
                        info[(a * d + r, b * d + c)] += w * row[r] * row[c];
                    }
                }
            }
        }
    }
    let cov = covariance(&info)?;
    let equations = others
        .iter()
        .enumerate()
        .map(|(a, &c)| Equation {
            category: Some(design.categories[c].clone()),
            coefficients: coefficients(&design.columns, theta.as_slice(), &cov, a * d),
        })
        .collect();
    Ok(RegressionModel {
        columns: design.columns.clone(),
        equations,
        categories: Some(Categories {
            names: design.categories.clone(),
            reference,
        }),
        log_lik_null: null_log_likelihood(design),
        log_lik_fit: ll,
        n: design.n(),
        iterations,
        gradient_norm: grad_norm,
    })
}
