//! Counterterm constants of the example equations as functions of the
//! mollification scale ε, their divergence rates, and the dyadic kernel
//! decomposition check.

pub mod constants;
pub mod dyadic;
pub mod fit;
pub mod kernels;
pub mod quadrature;

use serde::Serialize;

pub use constants::{model_constants, pam_c_at, pam_constants, phi34_constants, phi4_constants, Estimate, Resolution};
pub use dyadic::{dyadic_decompose, DyadicReport};
pub use fit::{fit_divergence, model_diagrams, Diagram, Divergence, DivergenceModel, Fit};
pub use kernels::{kappa, mollifier, zbar, KernelSpec};

use crate::error::{Error, Result};

/// One constant over an ε-grid, with its fit and the power-counting
/// prediction.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantSweep {
    pub name: String,
    pub samples: Vec<(f64, Estimate)>,
    pub diagram: Diagram,
    pub fit: Option<Fit>,
}

impl ConstantSweep {
    pub fn positive(&self) -> bool {
        self.samples.iter().all(|(_, e)| e.value > 0.0)
    }

    /// Nondecreasing as ε decreases.
    pub fn monotone(&self) -> bool {
        let mut s = self.samples.clone();
        s.sort_by(|a, b| b.0.total_cmp(&a.0));
        s.windows(2).all(|w| w[1].1.value >= w[0].1.value)
    }

    /// Whether the selected fit model matches the power-counting prediction.
    pub fn matches_oracle(&self) -> bool {
        match (&self.fit, self.diagram.expected_model()) {
            (Some(f), Some(m)) => f.model == m,
            _ => false,
        }
    }
}

/// ε = 2^{-k} for each exponent.
pub fn eps_grid(exponents: &[u32]) -> Vec<f64> {
    exponents.iter().map(|&k| 2f64.powi(-(k as i32))).collect()
}

/// Parse an ε-grid given as `3..8` or `3,4,5` (exponents k in ε = 2^{-k}).
pub fn parse_eps_grid(s: &str) -> Result<Vec<u32>> {
    let bad = || Error::Parse(format!("invalid ε-grid '{s}' (expected e.g. 3..8 or 3,5,7)"));
    let v: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if b < a {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if v.is_empty() || v.iter().any(|&k| k == 0 || k > 20) {
        return Err(bad());
    }
    Ok(v)
}

/// Evaluate every constant of `model` on the ε-grid and fit divergence rates.
pub fn sweep(model: &str, exponents: &[u32], res: Resolution) -> Result<Vec<ConstantSweep>> {
    let diagrams = model_diagrams(model)?;
    let mut per_eps = Vec::new();
    for eps in eps_grid(exponents) {
        per_eps.push((eps, model_constants(model, eps, res)?));
    }
    let mut out = Vec::new();
    for (i, d) in diagrams.into_iter().enumerate() {
        let samples: Vec<(f64, Estimate)> = per_eps.iter().map(|(e, v)| (*e, v[i].1)).collect();
        let pts: Vec<(f64, f64)> = samples.iter().map(|(e, v)| (*e, v.value)).collect();
        let fit = if pts.len() >= 4 { Some(fit_divergence(&pts)?) } else { None };
        out.push(ConstantSweep { name: d.name.clone(), samples, diagram: d, fit });
    }
    Ok(out)
}

/// CSV rows `model,constant,eps,value,error`.
pub fn sweep_csv(model: &str, sweeps: &[ConstantSweep]) -> String {
    let mut s = String::from("model,constant,eps,value,error\n");
    for c in sweeps {
        for (e, v) in &c.samples {
            s.push_str(&format!("{model},{},{e:.10e},{:.12e},{:.3e}\n", c.name, v.value, v.error));
        }
    }
    s
}
