//! Quadrature primitives: Gauss-Legendre panels, adaptive Gauss-Kronrod,
//! and node sets for the Abel-type integrals with inverse square-root
//! endpoint singularities.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Values that can be accumulated by a quadrature rule.
pub trait Scalar: Copy + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integral of `f` over [a, b].
    pub fn integrate<T: Scalar, F: FnMut(f64) -> T>(&self, mut f: F, a: f64, b: f64) -> T {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + h * x) * (w * h);
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 16-point rule used by all panel integrators.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Panel sizing for oscillatory integrands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    /// Wavelengths of the fastest oscillation covered by one 16-node panel.
    pub wavelengths_per_panel: f64,
    /// Largest panel length regardless of oscillation.
    pub max_panel: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { wavelengths_per_panel: 2.0, max_panel: 1.0 }
    }
}

impl QuadConfig {
    /// Halved panels, used for resolution self-checks.
    pub fn refined(self) -> Self {
        QuadConfig {
            wavelengths_per_panel: self.wavelengths_per_panel / 2.0,
            max_panel: self.max_panel / 2.0,
        }
    }

    pub fn panel_count(&self, len: f64, freq: f64) -> usize {
        if len <= 0.0 {
            return 0;
        }
        let by_freq = len * freq.abs() / (2.0 * PI * self.wavelengths_per_panel);
        let by_len = len / self.max_panel;
        by_freq.max(by_len).ceil().max(1.0) as usize
    }
}

/// A list of quadrature nodes with weights that may already contain a kernel factor.
#[derive(Debug, Clone, Default)]
pub struct NodeSet {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn sum<T: Scalar, F: FnMut(f64) -> T>(&self, mut f: F) -> T {
        let mut acc = T::zero();
        for (x, w) in self.x.iter().zip(&self.w) {
            acc = acc + f(*x) * *w;
        }
        acc
    }

    /// Appends `n` equal GL16 panels on [a, b] with weights multiplied by `kernel(x)`.
    pub fn push_panels<K: FnMut(f64) -> f64>(&mut self, a: f64, b: f64, n: usize, mut kernel: K) {
        if n == 0 || b <= a {
            return;
        }
        let rule = gl16();
        let h = (b - a) / n as f64;
        for k in 0..n {
            let lo = a + h * k as f64;
            let c = lo + 0.5 * h;
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let x = c + 0.5 * h * t;
                self.x.push(x);
                self.w.push(w * 0.5 * h * kernel(x));
            }
        }
    }

    /// Appends panels in a substituted variable `v` on [a, b]: the node is `map(v)`
    /// and the weight is multiplied by `jac(v)`.
    pub fn push_mapped<M: Fn(f64) -> f64, J: Fn(f64) -> f64>(
        &mut self,
        a: f64,
        b: f64,
        n: usize,
        map: M,
        jac: J,
    ) {
        if n == 0 || b <= a {
            return;
        }
        let rule = gl16();
        let h = (b - a) / n as f64;
        for k in 0..n {
            let c = a + h * (k as f64 + 0.5);
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let v = c + 0.5 * h * t;
                self.x.push(map(v));
                self.w.push(w * 0.5 * h * jac(v));
            }
        }
    }
}

/// Plain GL16 panels on [a, b] sized for oscillation frequency `freq`.
pub fn panels(a: f64, b: f64, freq: f64, cfg: &QuadConfig) -> NodeSet {
    let mut ns = NodeSet::default();
    let n = cfg.panel_count(b - a, freq);
    ns.push_panels(a, b, n, |_| 1.0);
    ns
}

/// 1 / sqrt(2 sinh(a) sinh(b)) for a, b > 0 without overflow.
pub fn inv_sqrt_2sinh_prod(a: f64, b: f64) -> f64 {
    let den = (-(-2.0 * a).exp_m1()) * (-(-2.0 * b).exp_m1());
    (-(a + b) / 2.0).exp() * (2.0 / den).sqrt()
}

/// (cosh s - cosh r)^{-1/2} for s > r >= 0.
pub fn abel_weight(s: f64, r: f64) -> f64 {
    inv_sqrt_2sinh_prod((s + r) / 2.0, (s - r) / 2.0)
}

/// Nodes for ∫_0^r g(s) (cosh r - cosh s)^{-1/2} ds, sized for `g` oscillating at `freq`.
///
/// The endpoint singularity at s = r is removed with s = r - v^2.
pub fn abel_lower_nodes(r: f64, freq: f64, cfg: &QuadConfig) -> NodeSet {
    let mut ns = NodeSet::default();
    if r <= 0.0 {
        return ns;
    }
    let delta = r.min(1.0);
    let vmax = delta.sqrt();
    let n = cfg.panel_count(vmax, 2.0 * freq * vmax).max(2);
    ns.push_mapped(
        0.0,
        vmax,
        n,
        |v| r - v * v,
        |v| 2.0 * v * inv_sqrt_2sinh_prod(r - v * v / 2.0, v * v / 2.0),
    );
    if r > delta {
        let a = 0.0;
        let b = r - delta;
        let n = cfg.panel_count(b - a, freq);
        ns.push_panels(a, b, n, |s| abel_weight(r, s));
    }
    ns
}

/// Nodes for ∫_r^end g(s) (cosh s - cosh r)^{-1/2} ds, sized for `g` oscillating at `freq`.
///
/// The endpoint singularity at s = r is removed with s = r + v^2; panels are graded
/// geometrically toward v = 0 when r is small, where the weight varies on the scale sqrt(r).
pub fn abel_upper_nodes(r: f64, end: f64, freq: f64, cfg: &QuadConfig) -> NodeSet {
    let mut ns = NodeSet::default();
    if end <= r {
        return ns;
    }
    let delta = (end - r).min(1.0);
    let vmax = delta.sqrt();
    let mut breaks = vec![vmax];
    if r > 0.0 && r < delta {
        let stop = r.sqrt() / 4.0;
        let mut v = vmax;
        while v > stop && breaks.len() < 40 {
            v /= 2.0;
            breaks.push(v);
        }
    }
    breaks.push(0.0);
    breaks.reverse();
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let n = cfg.panel_count(b - a, 2.0 * freq * b).max(1);
        ns.push_mapped(
            a,
            b,
            n,
            |v| r + v * v,
            |v| 2.0 * v * inv_sqrt_2sinh_prod(r + v * v / 2.0, v * v / 2.0),
        );
    }
    let a = r + delta;
    if end > a {
        let n = cfg.panel_count(end - a, freq).max(((end - a) / 2.0).ceil() as usize);
        ns.push_panels(a, end, n, |s| abel_weight(s, r));
    }
    ns
}

/// Bound on ∫_{a}^∞ (cosh s - cosh r)^{-1/2} ds for a > r.
pub fn abel_upper_tail_mass(r: f64, a: f64) -> f64 {
    // cosh s - cosh r >= (e^s / 2)(1 - e^{-(a - r)}) for s >= a.
    let gap = -(-(a - r)).exp_m1();
    2.0 * std::f64::consts::SQRT_2 * (-a / 2.0).exp() / gap.sqrt()
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<T: Scalar, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).magnitude())
}

/// Adaptive Gauss-Kronrod (7/15) integration on [a, b].
///
/// Returns the value and the error estimate, or an accuracy error carrying the
/// achieved estimate when `max_intervals` is exhausted.
pub fn integrate_adaptive<T: Scalar, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<(T, f64)> {
    if a == b {
        return Ok((T::zero(), 0.0));
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let mut total = T::zero();
        let mut err = 0.0;
        let mut worst = 0;
        for (i, p) in parts.iter().enumerate() {
            total = total + p.2;
            err += p.3;
            if p.3 > parts[worst].3 {
                worst = i;
            }
        }
        let tol = abs_tol.max(rel_tol * total.magnitude());
        if err <= tol {
            return Ok((total, err));
        }
        if parts.len() >= max_intervals {
            return Err(Error::Accuracy { achieved: err, requested: tol });
        }
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Adaptive integration over a list of breakpoints.
pub fn integrate_adaptive_breaks<T: Scalar, F: FnMut(f64) -> T>(
    mut f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<(T, f64)> {
    let mut total = T::zero();
    let mut err = 0.0;
    let share = abs_tol / (breaks.len().max(2) - 1) as f64;
    for w in breaks.windows(2) {
        let (v, e) = integrate_adaptive(&mut f, w[0], w[1], share, rel_tol, max_intervals)?;
        total = total + v;
        err += e;
    }
    Ok((total, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 33] {
            let rule = GaussLegendre::new(n);
            let sum: f64 = rule.weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-14, "n={n} sum={sum}");
            let deg = 2 * n - 1;
            let v: f64 = rule.integrate(|x| x.powi(deg as i32 - 1), -1.0, 1.0);
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((v - exact).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn gk_matches_closed_form() {
        let (v, e) = integrate_adaptive(|x: f64| x.sin(), 0.0, PI, 1e-14, 1e-14, 200).unwrap();
        assert!((v - 2.0).abs() < 1e-13 && e < 1e-12);
        let (v, _) = integrate_adaptive(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 1e-10, 500).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn gk_reports_nonconvergence() {
        let r = integrate_adaptive(|x: f64| (1.0 / x).sin() / x, 1e-9, 1.0, 1e-15, 1e-15, 8);
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }

    #[test]
    fn abel_lower_of_constant() {
        // ∫_0^r (cosh r - cosh s)^{-1/2} ds = sqrt(2) * K-type integral; compare with adaptive.
        for r in [1e-3, 0.3, 1.0, 2.5, 9.0] {
            let cfg = QuadConfig::default();
            let ns = abel_lower_nodes(r, 0.0, &cfg);
            let v: f64 = ns.sum(|_| 1.0);
            let (reference, _) = integrate_adaptive(
                |v: f64| 2.0 * v * inv_sqrt_2sinh_prod(r - v * v / 2.0, v * v / 2.0),
                0.0,
                r.sqrt(),
                1e-15,
                1e-14,
                2000,
            )
            .unwrap();
            assert!((v - reference).abs() < 1e-12 * reference.abs().max(1.0), "r={r}");
        }
    }

    #[test]
    fn abel_upper_of_exponential() {
        // ∫_r^∞ tanh(s) e^{-s/2}(cosh s - cosh r)^{-1/2} ds against the adaptive substitution.
        for r in [0.0, 1e-4, 0.5, 3.0] {
            let cfg = QuadConfig::default();
            let ns = abel_upper_nodes(r, r + 80.0, 0.0, &cfg);
            let v: f64 = ns.sum(|s| s.tanh() * (-s / 2.0).exp());
            let (reference, _) = integrate_adaptive_breaks(
                |v: f64| {
                    let s = r + v * v;
                    2.0 * v * inv_sqrt_2sinh_prod(r + v * v / 2.0, v * v / 2.0) * s.tanh() * (-s / 2.0).exp()
                },
                &[0.0, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 4.0, 9.0],
                1e-16,
                1e-14,
                4000,
            )
            .unwrap();
            assert!((v - reference).abs() < 1e-11 * reference, "r={r}: {v} vs {reference}");
        }
    }

    #[test]
    fn sinh_product_is_stable() {
        let a = 400.0;
        let b = 500.0;
        let v = inv_sqrt_2sinh_prod(a, b);
        assert!(v.is_finite() && v > 0.0);
        let x = 0.7;
        let y = 0.2;
        let direct = 1.0 / (2.0 * f64::sinh(x) * f64::sinh(y)).sqrt();
        assert!((inv_sqrt_2sinh_prod(x, y) - direct).abs() < 1e-15);
    }
}
