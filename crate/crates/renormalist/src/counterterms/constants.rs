//! The counterterm integrals of the three example equations, evaluated in
//! flat space with the spatial integrals done in closed form (products of
//! heat kernels) or by radial quadrature.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::kernels::{gaussian, kappa, Mixture};
use super::quadrature::{graded, radial, Gl};
use crate::error::{Error, Result};

/// A quadrature result with its error estimate (largest difference to the
/// two next lower-order rules on the same panels).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Quadrature resolution: Gauss–Legendre order per panel is `4 + 2·level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub level: usize,
}

impl Resolution {
    pub fn new(level: usize) -> Self {
        Resolution { level: level.max(1) }
    }

    pub fn order(&self) -> usize {
        4 + 2 * self.level
    }
}

/// Relative error beyond which a quadrature is reported as not converged.
pub const MAX_RELATIVE_ERROR: f64 = 0.05;

fn estimate(res: Resolution, f: impl Fn(&Gl) -> f64 + Sync) -> Result<Estimate> {
    let n = res.order();
    let (hi, (lo1, lo2)) = rayon::join(|| f(&Gl::new(n)), || rayon::join(|| f(&Gl::new(n - 1)), || f(&Gl::new(n - 2))));
    let est = Estimate { value: hi, error: (hi - lo1).abs().max((hi - lo2).abs()) };
    if !hi.is_finite() || !lo1.is_finite() || !lo2.is_finite() {
        return Err(Error::Numerics("quadrature produced a non-finite value".into()));
    }
    if est.error > MAX_RELATIVE_ERROR * hi.abs() {
        return Err(Error::Numerics(format!(
            "quadrature did not converge: value {hi:.6e}, error estimate {:.3e}",
            est.error
        )));
    }
    Ok(est)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Precondition(format!("ε must lie in (0, 1], got {eps}")));
    }
    Ok(())
}

/// Graded rule on `(0, T]` for time integrals with regularisation scale ε².
fn time_rule(gl: &Gl, eps: f64, hi: f64) -> Vec<(f64, f64)> {
    graded(gl, 0.0, eps * eps / 8.0, hi, &[1.0, 2.0])
}

/// g-PAM `C_ε = ∫∫ Z̄_{t−s+ε²}(x) Z̄_{ε²}(x) dx ds` (d = 2) at the time `t`.
pub fn pam_c_at(t: f64, eps: f64, res: Resolution) -> Result<Estimate> {
    check_eps(eps)?;
    let e2 = eps * eps;
    estimate(res, |gl| {
        let breaks = super::quadrature::graded_breaks(0.0, e2 / 8.0, 2.0, &[1.0]);
        let sb: Vec<f64> = breaks.iter().map(|u| t - u).collect();
        super::quadrature::composite(gl, &sb)
            .into_iter()
            .map(|(s, w)| {
                let u = t - s;
                // ∫ G_{u+ε²} G_{ε²} dx = G_{u+2ε²}(0)
                w * kappa(u) / (4.0 * PI * (u + 2.0 * e2))
            })
            .sum()
    })
}

/// g-PAM `C′_ε = ∫∫∫ ∂ᵢZ̄_{t−s+ε²}(x) ∂ᵢZ̄_{t−s′+ε²}(x) dx ds ds′` (d = 2).
pub fn pam_c_prime(eps: f64, res: Resolution) -> Result<Estimate> {
    check_eps(eps)?;
    let e2 = eps * eps;
    estimate(res, |gl| {
        let rule = time_rule(gl, eps, 2.0);
        rule.par_iter()
            .map(|&(u, wu)| {
                let ku = kappa(u);
                rule.iter()
                    .map(|&(v, wv)| {
                        let c = u + v + 2.0 * e2;
                        // ∫ ∂ᵢG_a ∂ᵢG_b dx = G_{a+b}(0) / (2(a+b))
                        wv * kappa(v) / (8.0 * PI * c * c)
                    })
                    .sum::<f64>()
                    * wu
                    * ku
            })
            .sum()
    })
}

/// `(C_ε, C′_ε)` for g-PAM.
pub fn pam_constants(eps: f64, res: Resolution) -> Result<[Estimate; 2]> {
    Ok([pam_c_at(0.0, eps, res)?, pam_c_prime(eps, res)?])
}

/// `Q_ε(0,0)` in dimension `d`, optionally weighted by the variance `c`.
fn covariance_at_origin(eps: f64, d: usize, gl: &Gl, weight: impl Fn(f64) -> f64) -> f64 {
    Mixture::covariance(0.0, eps, gl).moment(|c| weight(c) * gaussian(c, 0.0, d))
}

/// Φ⁴₃ constants `(C_ε, C′_ε)`: `C_ε = Q_ε(0)`, `C′_ε = ∫ Q_ε(z)² Z̄(z) dz`.
pub fn phi4_constants(eps: f64, res: Resolution) -> Result<[Estimate; 2]> {
    check_eps(eps)?;
    let c = estimate(res, |gl| covariance_at_origin(eps, 3, gl, |_| 1.0))?;
    let cp = estimate(res, |gl| {
        time_rule(gl, eps, 2.0)
            .par_iter()
            .map(|&(t, wt)| {
                let q = Mixture::covariance(t, eps, gl);
                let sigma = t.sqrt();
                let inner: f64 = radial(gl, 3, sigma, 10.0 * sigma)
                    .iter()
                    .map(|&(r, wr)| {
                        let r2 = r * r;
                        let qv = q.eval(r2, 3);
                        wr * gaussian(t, r2, 3) * qv * qv
                    })
                    .sum();
                wt * kappa(t) * inner
            })
            .sum()
    })?;
    Ok([c, cp])
}

/// Names of the φ³₄ constants in output order.
pub const PHI34_NAMES: [&str; 5] = ["C1", "C2", "C211", "C22j", "C11"];

/// φ³₄ constants `(C^{⟨2⟩,1}, C^{⟨2⟩,2}, C^{⟨211⟩}, C^{⟨22j⟩}, C^{⟨11⟩})`.
pub fn phi34_constants(eps: f64, res: Resolution) -> Result<[Estimate; 5]> {
    check_eps(eps)?;
    let d = 4;
    let c1 = estimate(res, |gl| covariance_at_origin(eps, d, gl, |_| 1.0))?;
    let c2 = estimate(res, |gl| covariance_at_origin(eps, d, gl, |c| c / 3.0))?;
    let c211 = estimate(res, |gl| phi34_c211(eps, gl))?;
    let c22j = estimate(res, |gl| phi34_c22j(eps, gl))?;
    let c11 = estimate(res, |gl| {
        time_rule(gl, eps, 2.0)
            .par_iter()
            .map(|&(t, wt)| {
                let q = Mixture::covariance(t, eps, gl);
                // ∫ G_t Q(t,·) dx = Σ w_k G_{t+c_k}(0)
                wt * kappa(t) * q.moment(|c| gaussian(t + c, 0.0, d))
            })
            .sum()
    })?;
    Ok([c1, c2, c211, c22j, c11])
}

/// `2∫∫ Z̄(p) Z̄(q) Q_ε(p+q) Q_ε(p) dp dq`.
fn phi34_c211(eps: f64, gl: &Gl) -> f64 {
    let d = 4;
    let rule = time_rule(gl, eps, 2.0);
    2.0 * rule
        .par_iter()
        .map(|&(tp, wp)| {
            let sigma = tp.sqrt();
            let rad = radial(gl, d, sigma, 10.0 * sigma);
            let qp = Mixture::covariance(tp, eps, gl);
            let base: Vec<(f64, f64)> = rad
                .iter()
                .map(|&(r, wr)| (r * r, wr * gaussian(tp, r * r, d) * qp.eval(r * r, d)))
                .collect();
            let outer: f64 = rule
                .iter()
                .map(|&(tq, wq)| {
                    let qpq = Mixture::covariance(tp + tq, eps, gl);
                    let inner: f64 = base.iter().map(|&(r2, b)| b * qpq.eval_smoothed(tq, r2, d)).sum();
                    wq * kappa(tq) * inner
                })
                .sum();
            wp * kappa(tp) * outer
        })
        .sum::<f64>()
}

/// `2∫∫ Z̄(p) Z̄(q) Q_ε(p−q)² dp dq`, written with `τ = t_p − t_q`,
/// `s = t_p + t_q` and the spatial difference variable.
fn phi34_c22j(eps: f64, gl: &Gl) -> f64 {
    let d = 4;
    2.0 * time_rule(gl, eps, 2.0)
        .par_iter()
        .map(|&(tau, wt)| {
            let q = Mixture::covariance(tau, eps, gl);
            let srule = graded(gl, tau, tau, 4.0 - tau, &[2.0 - tau, 2.0 + tau]);
            let sigma = tau.sqrt();
            let inner: f64 = radial(gl, d, sigma, 20.0)
                .iter()
                .map(|&(r, wr)| {
                    let r2 = r * r;
                    let h: f64 = srule
                        .iter()
                        .map(|&(s, ws)| ws * kappa(0.5 * (s + tau)) * kappa(0.5 * (s - tau)) * gaussian(s, r2, d))
                        .sum();
                    let qv = q.eval(r2, d);
                    wr * h * qv * qv
                })
                .sum();
            wt * inner
        })
        .sum::<f64>()
}

/// Named constants of a model.
pub fn constant_names(model: &str) -> Result<Vec<&'static str>> {
    match model {
        "pam" | "phi4" => Ok(vec!["C", "C'"]),
        "phi34" => Ok(PHI34_NAMES.to_vec()),
        _ => Err(Error::Unknown(format!("counterterm model '{model}'"))),
    }
}

/// All constants of a model at one ε.
pub fn model_constants(model: &str, eps: f64, res: Resolution) -> Result<Vec<(&'static str, Estimate)>> {
    let names = constant_names(model)?;
    let values: Vec<Estimate> = match model {
        "pam" => pam_constants(eps, res)?.to_vec(),
        "phi4" => phi4_constants(eps, res)?.to_vec(),
        _ => phi34_constants(eps, res)?.to_vec(),
    };
    Ok(names.into_iter().zip(values).collect())
}
