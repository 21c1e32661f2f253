//! Composite Gauss–Legendre rules on panel lists.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct Gl {
    pairs: Vec<(f64, f64)>,
}

impl Gl {
    pub fn new(order: usize) -> Gl {
        let n = NonZeroUsize::new(order.max(1)).expect("positive");
        let rule = GaussLegendre::new(n);
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Gl { pairs }
    }

    pub fn order(&self) -> usize {
        self.pairs.len()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (h, m) = (0.5 * (b - a), 0.5 * (b + a));
        self.pairs.iter().map(move |&(x, w)| (m + h * x, h * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Composite rule over consecutive breakpoints (sorted, deduplicated).
pub fn composite(gl: &Gl, breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut b: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    b.sort_by(f64::total_cmp);
    b.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * x.abs().max(1.0));
    let mut out = Vec::with_capacity(b.len().saturating_sub(1) * gl.order());
    for w in b.windows(2) {
        if w[1] > w[0] {
            out.extend(gl.on(w[0], w[1]));
        }
    }
    out
}

/// Breakpoints `lo, lo+h, lo+2h, lo+4h, …` up to `hi`, plus the listed
/// extra points inside `(lo, hi)`: resolves integrands that vary on the
/// scale of the distance to `lo`.
pub fn graded_breaks(lo: f64, first: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut b = vec![lo];
    if hi <= lo {
        return b;
    }
    let mut h = first.max((hi - lo) * 1e-14);
    while lo + h < hi {
        b.push(lo + h);
        h *= 2.0;
    }
    b.push(hi);
    b.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    b
}

/// Graded composite rule on `[lo, hi]` with finest panel `first`.
pub fn graded(gl: &Gl, lo: f64, first: f64, hi: f64, extra: &[f64]) -> Vec<(f64, f64)> {
    composite(gl, &graded_breaks(lo, first, hi, extra))
}

/// Surface area of the unit sphere in `ℝ^d`.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / libm::tgamma(h)
}

/// Radial rule for `∫_{ℝ^d} f(|x|) dx`: nodes `r` with weights including
/// the sphere measure `|S^{d-1}| r^{d-1}`; panels are graded from `scale`
/// up to `hi`.
pub fn radial(gl: &Gl, d: usize, scale: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut b = vec![0.0, 0.5 * scale];
    let mut r = scale;
    while r < hi {
        b.push(r);
        r *= 2.0;
    }
    b.push(hi);
    let area = sphere_area(d);
    composite(gl, &b)
        .into_iter()
        .map(|(r, w)| (r, w * area * r.powi(d as i32 - 1)))
        .collect()
}
