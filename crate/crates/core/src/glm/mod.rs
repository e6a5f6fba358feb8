//! Binary and multinomial logistic regression fitted by Newton's method,
//! with the usual pseudo-R² measures, classification rate and ROC area.

mod fit;
mod metrics;
mod report;

pub use fit::{fit_logistic, fit_multinomial, log_likelihood, MAX_ITERATIONS, SEPARATION_BOUND};
pub use metrics::{
    classification_rate, cox_snell_r2, cox_snell_upper_bound, mcfadden_r2, nagelkerke_r2, roc_auc,
    roc_curve,
};
pub use report::{significance_stars, ModelReport, ReportCoefficient, ReportEquation};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const INTERCEPT: &str = "Constant";

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("design: {0}")]
    Design(String),
    #[error("non-finite value in column `{column}` at row {row}")]
    NonFinite { column: String, row: usize },
    #[error("separation detected: coefficient of `{feature}` diverges")]
    Separation { feature: String },
    #[error("information matrix is singular (collinear columns)")]
    Rank,
    #[error("{0} is undefined for this sample")]
    Undefined(&'static str),
}

/// Regressors (with an intercept column first) and the response.
///
/// Binary designs take `y ∈ {0, 1}`; categorical designs take category
/// indices into `categories`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub(crate) x: DMatrix<f64>,
    pub(crate) columns: Vec<String>,
    pub(crate) y: Vec<usize>,
    pub(crate) categories: Vec<String>,
}

impl DesignMatrix {
    /// Builds a binary design; `features` are named columns of equal length.
    pub fn binary(features: &[(&str, &[f64])], y: &[u8]) -> Result<Self, FitError> {
        if let Some(bad) = y.iter().position(|&v| v > 1) {
            return Err(FitError::Design(format!("response at row {bad} is not 0/1")));
        }
        Self::build(features, y.iter().map(|&v| v as usize).collect(), vec!["0".into(), "1".into()])
    }

    /// Builds a categorical design with the given category labels.
    pub fn categorical(features: &[(&str, &[f64])], y: &[u8], categories: &[&str]) -> Result<Self, FitError> {
        if categories.len() < 2 {
            return Err(FitError::Design("need at least two categories".into()));
        }
        if let Some(bad) = y.iter().position(|&v| v as usize >= categories.len()) {
            return Err(FitError::Design(format!("response at row {bad} is not a known category")));
        }
        Self::build(
            features,
            y.iter().map(|&v| v as usize).collect(),
            categories.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn build(features: &[(&str, &[f64])], y: Vec<usize>, categories: Vec<String>) -> Result<Self, FitError> {
        let n = y.len();
        let p = features.len() + 1;
        if n < p {
            return Err(FitError::Design(format!("{n} observations for {p} columns")));
        }
        let mut x = DMatrix::from_element(n, p, 1.0);
        let mut columns = vec![INTERCEPT.to_owned()];
        for (j, (name, col)) in features.iter().enumerate() {
            if col.len() != n {
                return Err(FitError::Design(format!(
                    "column `{name}` has {} rows, response has {n}",
                    col.len()
                )));
            }
            for (i, &v) in col.iter().enumerate() {
                if !v.is_finite() {
                    return Err(FitError::NonFinite {
                        column: (*name).to_owned(),
                        row: i,
                    });
                }
                x[(i, j + 1)] = v;
            }
            columns.push((*name).to_owned());
        }
        Ok(DesignMatrix {
            x,
            columns,
            y,
            categories,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn response(&self) -> &[usize] {
        &self.y
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }

    /// Observed share of each category.
    pub fn category_shares(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.categories.len()];
        for &c in &self.y {
            counts[c] += 1;
        }
        counts.iter().map(|&c| c as f64 / self.n() as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
}

/// Coefficients of one linear predictor. Binary models have a single
/// equation; multinomial models have one per non-reference category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equation {
    pub category: Option<String>,
    pub coefficients: Vec<Coefficient>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Categories {
    pub names: Vec<String>,
    pub reference: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub columns: Vec<String>,
    pub equations: Vec<Equation>,
    /// Present for multinomial fits.
    pub categories: Option<Categories>,
    pub log_lik_null: f64,
    pub log_lik_fit: f64,
    pub n: usize,
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl RegressionModel {
    pub fn is_multinomial(&self) -> bool {
        self.categories.is_some()
    }

    /// Estimate of `name` in the first (or only) equation.
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.equations[0].coefficients.iter().find(|c| c.name == name)
    }

    /// Estimate of `name` in the equation for `category`.
    pub fn coefficient_in(&self, category: &str, name: &str) -> Option<&Coefficient> {
        self.equations
            .iter()
            .find(|e| e.category.as_deref() == Some(category))?
            .coefficients
            .iter()
            .find(|c| c.name == name)
    }

    /// Flattened parameter vector, equation by equation.
    pub fn parameters(&self) -> Vec<f64> {
        self.equations
            .iter()
            .flat_map(|e| e.coefficients.iter().map(|c| c.estimate))
            .collect()
    }

    /// Probabilities of every category for row `x` (intercept included).
    pub fn category_probabilities(&self, x: &[f64]) -> Vec<f64> {
        let eta: Vec<f64> = self
            .equations
            .iter()
            .map(|e| e.coefficients.iter().zip(x).map(|(c, v)| c.estimate * v).sum())
            .collect();
        match &self.categories {
            None => {
                let p = fit::logistic(eta[0]);
                vec![1.0 - p, p]
            }
            Some(cats) => fit::softmax_with_reference(&eta, cats.names.len(), cats.reference),
        }
    }

    /// Fitted category probabilities for every row of `design`.
    pub fn predict(&self, design: &DesignMatrix) -> Vec<Vec<f64>> {
        (0..design.n())
            .map(|i| self.category_probabilities(&design.row(i)))
            .collect()
    }

    /// Fitted probability of the positive class (binary models).
    pub fn fitted_probabilities(&self, design: &DesignMatrix) -> Vec<f64> {
        self.predict(design).into_iter().map(|p| p[1]).collect()
    }
}
