use serde::{Deserialize, Serialize};

use super::{
    classification_rate, cox_snell_r2, mcfadden_r2, nagelkerke_r2, roc_auc, DesignMatrix, FitError,
    RegressionModel,
};

/// `***` below 0.1%, `**` below 1%, `*` below 5%.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCoefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub p_value: f64,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEquation {
    pub category: Option<String>,
    pub coefficients: Vec<ReportCoefficient>,
}

/// Everything a results table needs about one fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub n: usize,
    pub equations: Vec<ReportEquation>,
    pub log_lik_null: f64,
    pub log_lik_fit: f64,
    pub cox_snell_r2: f64,
    pub nagelkerke_r2: f64,
    pub mcfadden_r2: Option<f64>,
    /// Percentage correctly classified (cut 0.5, or the most probable category).
    pub classification_rate: f64,
    /// ROC area per outcome; binary models carry one entry labelled `positive`.
    pub auc: Vec<(String, f64)>,
}

impl ModelReport {
    pub fn new(model: &RegressionModel, design: &DesignMatrix) -> Result<Self, FitError> {
        let probs = model.predict(design);
        let y = design.response();
        let auc = match &model.categories {
            None => {
                let scores: Vec<f64> = probs.iter().map(|p| p[1]).collect();
                let labels: Vec<bool> = y.iter().map(|&v| v == 1).collect();
                vec![("positive".to_owned(), roc_auc(&scores, &labels)?)]
            }
            Some(cats) => cats
                .names
                .iter()
                .enumerate()
                .rev()
                .map(|(c, name)| {
                    let scores: Vec<f64> = probs.iter().map(|p| p[c]).collect();
                    let labels: Vec<bool> = y.iter().map(|&v| v == c).collect();
                    Ok((name.clone(), roc_auc(&scores, &labels)?))
                })
                .collect::<Result<_, FitError>>()?,
        };
        let equations = model
            .equations
            .iter()
            .map(|e| ReportEquation {
                category: e.category.clone(),
                coefficients: e
                    .coefficients
                    .iter()
                    .map(|c| ReportCoefficient {
                        name: c.name.clone(),
                        estimate: c.estimate,
                        std_error: c.std_error,
                        p_value: c.p_value,
                        stars: significance_stars(c.p_value).to_owned(),
                    })
                    .collect(),
            })
            .collect();
        Ok(ModelReport {
            n: model.n,
            equations,
            log_lik_null: model.log_lik_null,
            log_lik_fit: model.log_lik_fit,
            cox_snell_r2: cox_snell_r2(model),
            nagelkerke_r2: nagelkerke_r2(model),
            mcfadden_r2: mcfadden_r2(model).ok(),
            classification_rate: classification_rate(model, design, 0.5),
            auc,
        })
    }

    pub fn coefficient(&self, category: Option<&str>, name: &str) -> Option<&ReportCoefficient> {
        self.equations
            .iter()
            .find(|e| e.category.as_deref() == category || category.is_none())?
            .coefficients
            .iter()
            .find(|c| c.name == name)
    }
}
