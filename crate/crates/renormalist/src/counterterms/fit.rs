//! Divergence-rate fitting (`a·ε^{-p}+b` versus `a·log(1/ε)+b`) and the
//! parabolic power-counting oracle predicting the rate per diagram.

use serde::Serialize;

use crate::error::{Error, Result};

/// Admissible exponent range for the power model. The lower end keeps the
/// power family from imitating a logarithm (`ε^{-p} ≈ 1 + p·log(1/ε)`).
pub const P_MIN: f64 = 0.5;
pub const P_MAX: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DivergenceModel {
    Log,
    Power,
}

impl std::fmt::Display for DivergenceModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DivergenceModel::Log => "log",
            DivergenceModel::Power => "power",
        })
    }
}

/// One fitted model: `value ≈ a·x(ε) + b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelFit {
    pub a: f64,
    pub b: f64,
    /// Exponent for the power model.
    pub p: Option<f64>,
    /// Root-mean-square relative deviation `(fit − value)/value` over the
    /// samples (the quantity minimised by the weighted least squares).
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub model: DivergenceModel,
    pub best: ModelFit,
    pub log: ModelFit,
    pub power: ModelFit,
}

fn validate(samples: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if samples.len() < 4 {
        return Err(Error::Precondition(format!("need at least 4 samples, got {}", samples.len())));
    }
    let mut s: Vec<(f64, f64)> = samples.to_vec();
    if s.iter().any(|&(e, v)| !(e > 0.0 && e < 1.0) || !v.is_finite() || v == 0.0) {
        return Err(Error::Invalid("samples need ε ∈ (0,1) and finite nonzero values".into()));
    }
    s.sort_by(|a, b| b.0.total_cmp(&a.0));
    let ratio = s[1].0 / s[0].0;
    if ratio >= 1.0 - 1e-12 {
        return Err(Error::Invalid("degenerate sample set: repeated ε".into()));
    }
    for w in s.windows(2) {
        if ((w[1].0 / w[0].0) / ratio - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid("samples must lie on a geometric ε-grid".into()));
        }
    }
    Ok(s)
}

/// Weighted least squares for `y ≈ a·x + b` with weights `1/y²`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> ModelFit {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let w = 1.0 / (y * y);
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    let (a, b) = if det.abs() < 1e-300 { (0.0, sy / sw) } else { ((sw * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det) };
    let residual = (xs.iter().zip(ys).map(|(&x, &y)| ((a * x + b - y) / y).powi(2)).sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    ModelFit { a, b, p: None, residual }
}

fn weighted_sse(xs: &[f64], ys: &[f64], m: &ModelFit) -> f64 {
    xs.iter().zip(ys).map(|(&x, &y)| ((m.a * x + m.b - y) / y).powi(2)).sum()
}

fn power_fit(eps: &[f64], ys: &[f64], p: f64) -> (ModelFit, f64) {
    let xs: Vec<f64> = eps.iter().map(|e| e.powf(-p)).collect();
    let mut m = linear_fit(&xs, ys);
    m.p = Some(p);
    let sse = weighted_sse(&xs, ys, &m);
    (m, sse)
}

/// Fit both divergence models to `(ε, value)` samples and select the one
/// with the smaller relative residual.
pub fn fit_divergence(samples: &[(f64, f64)]) -> Result<Fit> {
    let s = validate(samples)?;
    let eps: Vec<f64> = s.iter().map(|x| x.0).collect();
    let ys: Vec<f64> = s.iter().map(|x| x.1).collect();
    let log = linear_fit(&eps.iter().map(|e| (1.0 / e).ln()).collect::<Vec<_>>(), &ys);
    // coarse scan, then golden-section refinement around the best grid point
    let steps = 550;
    let h = (P_MAX - P_MIN) / steps as f64;
    let mut best_i = 0;
    let mut best_sse = f64::INFINITY;
    for i in 0..=steps {
        let (_, sse) = power_fit(&eps, &ys, P_MIN + h * i as f64);
        if sse < best_sse {
            best_sse = sse;
            best_i = i;
        }
    }
    let (mut lo, mut hi) = ((P_MIN + h * (best_i as f64 - 1.0)).max(P_MIN), (P_MIN + h * (best_i as f64 + 1.0)).min(P_MAX));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if power_fit(&eps, &ys, x1).1 <= power_fit(&eps, &ys, x2).1 {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let power = power_fit(&eps, &ys, 0.5 * (lo + hi)).0;
    let (model, best) = if power.residual < log.residual { (DivergenceModel::Power, power) } else { (DivergenceModel::Log, log) };
    Ok(Fit { model, best, log, power })
}

/// Power-counting description of a diagram: orders of the kernels
/// (including noise covariances and polynomial weights) and the number of
/// integrated space-time vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagram {
    pub name: String,
    pub scaling: i64,
    pub kernel_orders: Vec<i64>,
    pub integrated_vertices: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Divergence {
    Convergent,
    Log,
    Power(i64),
}

impl Diagram {
    /// `Σ orders + |𝔰|·#integrated vertices`.
    pub fn degree(&self) -> i64 {
        self.kernel_orders.iter().sum::<i64>() + self.scaling * self.integrated_vertices
    }

    pub fn divergence(&self) -> Divergence {
        match self.degree() {
            d if d < 0 => Divergence::Power(-d),
            0 => Divergence::Log,
            _ => Divergence::Convergent,
        }
    }

    /// The fit model the oracle predicts (`None` for convergent diagrams).
    pub fn expected_model(&self) -> Option<DivergenceModel> {
        match self.divergence() {
            Divergence::Power(_) => Some(DivergenceModel::Power),
            Divergence::Log => Some(DivergenceModel::Log),
            Divergence::Convergent => None,
        }
    }
}

fn diagram(name: &str, scaling: i64, groups: &[&[i64]], vertices: i64) -> Diagram {
    Diagram {
        name: name.to_string(),
        scaling,
        kernel_orders: groups.iter().flat_map(|g| g.iter().copied()).collect(),
        integrated_vertices: vertices,
    }
}

/// Power-counting diagrams of a model's constants, in output order.
pub fn model_diagrams(model: &str) -> Result<Vec<Diagram>> {
    Ok(match model {
        "pam" => {
            // d = 2, spatial white noise: covariance δ(x) of order −2
            let s = 4;
            vec![
                diagram("C", s, &[&[-2], &[-2]], 1),
                diagram("C'", s, &[&[-3, -3], &[-2]], 2),
            ]
        }
        "phi4" => {
            // d = 3, space-time white noise: covariance of order −5
            let s = 5;
            let q: &[i64] = &[-3, -3, -5];
            vec![diagram("C", s, &[q], 2), diagram("C'", s, &[&[-3], q, q], 5)]
        }
        "phi34" => {
            let s = 6;
            let q: &[i64] = &[-4, -4, -6];
            vec![
                diagram("C1", s, &[q], 2),
                diagram("C2", s, &[q, &[2]], 2),
                diagram("C211", s, &[&[-4, -4], q, q], 6),
                diagram("C22j", s, &[&[-4, -4], q, q], 6),
                diagram("C11", s, &[&[-4], q], 3),
            ]
        }
        _ => return Err(Error::Unknown(format!("counterterm model '{model}'"))),
    })
}
