//! Cut-off profile κ, mollifier φ, the truncated heat kernel `Z̄`, and the
//! Gaussian-mixture representation of the mollified free-field covariance.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::quadrature::{composite, Gl};

fn bump(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Time cut-off: 1 on `[0,1)`, 0 outside `[0,2]`, smooth exp-bump step on `[1,2]`.
pub fn kappa(t: f64) -> f64 {
    if t < 0.0 || t >= 2.0 {
        0.0
    } else if t < 1.0 {
        1.0
    } else {
        let (a, b) = (bump(2.0 - t), bump(t - 1.0));
        a / (a + b)
    }
}

fn raw_mollifier(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

fn mollifier_norm() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| {
        let gl = Gl::new(64);
        let b: Vec<f64> = (0..=16).map(|i| -1.0 + i as f64 / 8.0).collect();
        composite(&gl, &b).iter().map(|&(x, w)| w * raw_mollifier(x)).sum()
    })
}

/// Normalised even bump `φ` supported on `(-1, 1)` with `∫φ = 1`.
pub fn mollifier(t: f64) -> f64 {
    raw_mollifier(t) / mollifier_norm()
}

/// Parabolically rescaled mollifier `φ^ε(t) = ε^{-2} φ(t/ε²)`.
pub fn mollifier_eps(t: f64, eps: f64) -> f64 {
    let e2 = eps * eps;
    mollifier(t / e2) / e2
}

const CONV_CELLS: usize = 4096;

fn conv_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let gl = Gl::new(48);
        (0..=CONV_CELLS)
            .map(|i| {
                let y = -2.0 + 4.0 * i as f64 / CONV_CELLS as f64;
                let (lo, hi) = ((y - 1.0).max(-1.0), (y + 1.0).min(1.0));
                if hi <= lo {
                    return 0.0;
                }
                let b: Vec<f64> = (0..=8).map(|k| lo + (hi - lo) * k as f64 / 8.0).collect();
                composite(&gl, &b).iter().map(|&(s, w)| w * mollifier(s) * mollifier(y - s)).sum()
            })
            .collect()
    })
}

/// `(φ⋆φ)(y)`, tabulated once on a uniform grid of `[-2, 2]` and
/// interpolated with cubic Catmull–Rom splines.
pub fn mollifier_autoconv(y: f64) -> f64 {
    if y.abs() >= 2.0 {
        return 0.0;
    }
    let tab = conv_table();
    let h = 4.0 / CONV_CELLS as f64;
    let x = (y + 2.0) / h;
    let i = (x.floor() as usize).min(CONV_CELLS - 1);
    let s = x - i as f64;
    let p = |k: isize| -> f64 {
        let j = i as isize + k;
        if j < 0 || j > CONV_CELLS as isize {
            0.0
        } else {
            tab[j as usize]
        }
    };
    let (p0, p1, p2, p3) = (p(-1), p(0), p(1), p(2));
    let v = p1
        + 0.5 * s * (p2 - p0 + s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + s * (3.0 * (p1 - p2) + p3 - p0)));
    v.max(0.0)
}

/// `Φ_ε = φ^ε ⋆ φ^ε`, supported on `[-2ε², 2ε²]`.
pub fn mollifier_autoconv_eps(v: f64, eps: f64) -> f64 {
    let e2 = eps * eps;
    mollifier_autoconv(v / e2) / e2
}

/// Heat kernel `(4πc)^{-d/2} e^{-r²/4c}` as a function of `r²`.
pub fn gaussian(c: f64, r2: f64, d: usize) -> f64 {
    (4.0 * PI * c).powf(-(d as f64) / 2.0) * (-r2 / (4.0 * c)).exp()
}

/// Kernel geometry: spatial dimension and cut-off radius `r̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub dim: usize,
    pub radius: f64,
}

impl KernelSpec {
    pub fn new(dim: usize) -> Self {
        KernelSpec { dim, radius: 1.0 }
    }

    /// Parabolic scaling dimension `|𝔰| = d + 2`.
    pub fn scaling(&self) -> usize {
        self.dim + 2
    }
}

/// `Z̄_t(x) = (4πt)^{-d/2} e^{-|x|²/4t} κ(t)`.
pub fn zbar(t: f64, x: &[f64], spec: &KernelSpec) -> f64 {
    let k = kappa(t);
    if k == 0.0 || t <= 0.0 {
        return 0.0;
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    gaussian(t, r2, spec.dim) * k
}

/// The covariance `Q_ε(t,·)` of the mollified free field
/// `Ψ_ε = Z̄ ∗ ρ_ε ∗ ξ` (with `ρ_ε(t,x) = φ^ε(t)·G_{ε²}(x)`) written as a
/// mixture of heat kernels: `Q_ε(t,x) = Σ w_k G_{c_k}(x)`.
#[derive(Clone, Debug, Default)]
pub struct Mixture {
    pub terms: Vec<(f64, f64)>,
}

impl Mixture {
    /// Mixture density `ω_t(c) = ½∫Φ_ε(v) κ(a) κ(a−|t|+v) dv` with
    /// `a = (c+|t|−v−2ε²)/2`, integrated over `c` with graded panels.
    pub fn covariance(t: f64, eps: f64, gl: &Gl) -> Mixture {
        let t = t.abs();
        let e2 = eps * eps;
        let lo = t.max(2.0 * e2);
        let ramp = (t + 4.0 * e2).max(4.0 * e2 - t);
        let hi = 4.0 - t + 4.0 * e2;
        if hi <= lo {
            return Mixture::default();
        }
        let mut breaks = vec![lo, ramp.min(hi)];
        let mut c = ramp;
        while c < hi {
            breaks.push(c);
            c *= 2.0;
        }
        breaks.push(hi);
        breaks.extend([2.0 - t + 2.0 * e2, 2.0 + t + 2.0 * e2].into_iter().filter(|&x| x > lo && x < hi));
        let terms = composite(gl, &breaks)
            .into_iter()
            .filter_map(|(c, w)| {
                let d = density(t, c, eps, gl);
                (d > 0.0).then_some((c, w * d))
            })
            .collect();
        Mixture { terms }
    }

    /// `Q_ε(t, x)` at `|x|² = r2` in dimension `d`.
    pub fn eval(&self, r2: f64, d: usize) -> f64 {
        self.terms.iter().map(|&(c, w)| w * gaussian(c, r2, d)).sum()
    }

    /// `(G_s ∗ Q_ε(t,·))(x) = Σ w_k G_{s+c_k}(x)`.
    pub fn eval_smoothed(&self, s: f64, r2: f64, d: usize) -> f64 {
        self.terms.iter().map(|&(c, w)| w * gaussian(s + c, r2, d)).sum()
    }

    /// `Σ w_k f(c_k)`.
    pub fn moment(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.terms.iter().map(|&(c, w)| w * f(c)).sum()
    }
}

fn density(t: f64, c: f64, eps: f64, gl: &Gl) -> f64 {
    let e2 = eps * eps;
    let lo = (-2.0 * e2).max(t + 2.0 * e2 - c);
    let hi = (2.0 * e2).min(c + t - 2.0 * e2);
    if hi <= lo {
        return 0.0;
    }
    let f = |v: f64| {
        let a = 0.5 * (c + t - v - 2.0 * e2);
        mollifier_autoconv_eps(v, eps) * kappa(a) * kappa(a - t + v)
    };
    let mid = 0.5 * (lo + hi);
    0.5 * (gl.integrate(lo, mid, f) + gl.integrate(mid, hi, f))
}
