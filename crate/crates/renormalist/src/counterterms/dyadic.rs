//! Numerical check of the dyadic kernel decomposition
//! `K = Σₙ Kₙ`, `Kₙ = K·(χ(2ⁿd_𝔰) − χ(2ⁿ⁺¹d_𝔰))`, with the scaled bounds
//! `|Kₙ| ≲ 2^{n(|𝔰|−β)}` and one order better per scaled derivative.

use serde::Serialize;

/// Ratio between late and early levels above which growth is flagged.
pub const GROWTH_TOLERANCE: f64 = 2.0;

fn step(x: f64) -> f64 {
    let b = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    let (a, c) = (b(1.0 - x), b(x - 0.5));
    if a + c == 0.0 {
        0.0
    } else {
        a / (a + c)
    }
}

/// Radial bump: 1 on `[0, 1/2]`, 0 on `[1, ∞)`, smooth in between.
pub fn chi(r: f64) -> f64 {
    if r <= 0.5 {
        1.0
    } else if r >= 1.0 {
        0.0
    } else {
        step(r)
    }
}

/// Parabolic distance to the origin `|t|^{1/2} + |x|`.
pub fn parabolic_norm(t: f64, x: &[f64]) -> f64 {
    t.abs().sqrt() + x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DyadicLevel {
    pub n: u32,
    /// `sup |Kₙ| · 2^{-n(|𝔰|−β)}`.
    pub sup_scaled: f64,
    /// Maximum of the scaled spatial and time derivative suprema.
    pub derivative_scaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicReport {
    pub levels: Vec<DyadicLevel>,
    /// Maximal scaled ratio over all levels.
    pub bound: f64,
    /// Ratio of late-level to early-level maxima.
    pub growth: f64,
    pub flagged: bool,
}

/// Sample the pieces `Kₙ` for `n = 0..levels` on a fixed grid in scaled
/// coordinates `(2^{-2n}τ, 2^{-n}y)` covering the annulus `d_𝔰 ∈ [1/4, 1]`.
pub fn dyadic_decompose(kernel: &dyn Fn(f64, &[f64]) -> f64, dim: usize, scaling: f64, beta: f64, levels: u32) -> DyadicReport {
    let piece = |n: u32, t: f64, x: &[f64]| -> f64 {
        let d = parabolic_norm(t, x);
        let s = 2f64.powi(n as i32);
        let w = chi(s * d) - chi(2.0 * s * d);
        if w == 0.0 {
            0.0
        } else {
            kernel(t, x) * w
        }
    };
    // scaled sample points: τ ∈ [−1, 1], y along two directions
    let mut grid: Vec<(f64, Vec<f64>)> = Vec::new();
    let m = 24;
    for i in 0..=m {
        let tau = -1.0 + 2.0 * i as f64 / m as f64;
        for j in 0..=m {
            let rho = j as f64 / m as f64;
            for dir in 0..2 {
                let mut y = vec![0.0; dim];
                if dim > 0 {
                    if dir == 0 || dim == 1 {
                        y[0] = rho;
                    } else {
                        let c = rho / 2f64.sqrt();
                        y[0] = c;
                        y[1] = c;
                    }
                }
                let d = parabolic_norm(tau, &y);
                if (0.25..=1.0).contains(&d) {
                    grid.push((tau, y));
                }
            }
        }
    }
    let mut out = Vec::new();
    for n in 0..levels {
        let sx = 2f64.powi(-(n as i32));
        let st = sx * sx;
        let (hx, ht) = (1e-4 * sx, 1e-4 * st);
        let mut sup: f64 = 0.0;
        let mut der: f64 = 0.0;
        for (tau, y) in &grid {
            let t = tau * st;
            let x: Vec<f64> = y.iter().map(|v| v * sx).collect();
            sup = sup.max(piece(n, t, &x).abs());
            if dim > 0 {
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[0] += hx;
                xm[0] -= hx;
                let dx = (piece(n, t, &xp) - piece(n, t, &xm)) / (2.0 * hx);
                der = der.max(dx.abs() * 2f64.powf(-(n as f64) * (scaling - beta + 1.0)));
            }
            let dt = (piece(n, t + ht, &x) - piece(n, t - ht, &x)) / (2.0 * ht);
            der = der.max(dt.abs() * 2f64.powf(-(n as f64) * (scaling - beta + 2.0)));
        }
        out.push(DyadicLevel { n, sup_scaled: sup * 2f64.powf(-(n as f64) * (scaling - beta)), derivative_scaled: der });
    }
    let ratio = |l: &DyadicLevel| l.sup_scaled.max(l.derivative_scaled);
    let bound = out.iter().map(ratio).fold(0.0, f64::max);
    let third = (out.len() / 3).max(1);
    let early = out.iter().take(third).map(ratio).fold(0.0, f64::max);
    let late = out.iter().rev().take(third).map(ratio).fold(0.0, f64::max);
    let growth = if late == 0.0 {
        0.0
    } else if early == 0.0 {
        f64::INFINITY
    } else {
        late / early
    };
    DyadicReport { levels: out, bound, growth, flagged: growth > GROWTH_TOLERANCE }
}
