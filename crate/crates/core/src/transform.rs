//! Spherical transform, its inverse, Plancherel norms, radial L^p norms and the
//! kernels of radial Fourier multipliers m(sqrt(Delta - 1/4)).
//!
//! Normalizations:
//!   f~(lambda) = 2 pi ∫_0^∞ f(r) phi_lambda(r) sinh r dr,
//!   f(r)       = (1 / 2 pi^2) ∫_0^∞ f~(lambda) phi_lambda(r) |c(lambda)|^{-2} d lambda,
//!   K(r)       = -(1 / (2 pi^{3/2})) ∫_r^∞ m_hat'(s) (cosh s - cosh r)^{-1/2} ds,
//! with m_hat(s) = (2 pi)^{-1/2} ∫ m(xi) e^{i s xi} d xi for even m.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{abel_lower_nodes, abel_upper_nodes, NodeSet, QuadConfig};
use crate::special::{c_function, plancherel_closed, PhiExpansion, PhiNodes};

/// Shortest round-trip decimal form of a float, scientific outside [1e-5, 1e16).
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || (x.abs() >= 1e-5 && x.abs() < 1e16) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Quadrature grid on [0, r_max]; the first node is r = 0 with weight zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
}

impl RadialGrid {
    /// GL16 panels on [0, r_max] resolving oscillation at `freq`.
    pub fn gauss(r_max: f64, freq: f64, cfg: &QuadConfig) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return invalid(format!("r_max {r_max} must be positive"));
        }
        let mut ns = NodeSet::default();
        ns.x.push(0.0);
        ns.w.push(0.0);
        let n = cfg.panel_count(r_max, freq);
        ns.push_panels(0.0, r_max, n, |_| 1.0);
        Ok(RadialGrid { r: ns.x, w: ns.w })
    }

    /// Trapezoid weights on an arbitrary increasing grid starting at 0.
    pub fn trapezoid(r: Vec<f64>) -> Result<Self> {
        validate_grid(&r)?;
        let n = r.len();
        let mut w = vec![0.0; n];
        for k in 0..n.saturating_sub(1) {
            let h = r[k + 1] - r[k];
            w[k] += h / 2.0;
            w[k + 1] += h / 2.0;
        }
        Ok(RadialGrid { r, w })
    }
}

fn validate_grid(r: &[f64]) -> Result<()> {
    if r.is_empty() {
        return invalid("empty radial grid");
    }
    if r[0] != 0.0 {
        return invalid("radial grid must start at 0");
    }
    for w in r.windows(2) {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return invalid("radial grid must be strictly increasing and finite");
        }
    }
    Ok(())
}

/// Samples of a radial function with quadrature weights on its grid and an exponential
/// decay rate used for tail bounds beyond the last node.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub values: Vec<Complex64>,
    pub weights: Vec<f64>,
    /// |f(r)| <= |f(R)| e^{-tail_exponent (r - R)} beyond the grid; infinity for compact support.
    pub tail_exponent: f64,
}

impl RadialProfile {
    pub fn new(grid: &RadialGrid, values: Vec<Complex64>, tail_exponent: f64) -> Result<Self> {
        validate_grid(&grid.r)?;
        if values.len() != grid.r.len() || grid.w.len() != grid.r.len() {
            return invalid("profile values and grid have different lengths");
        }
        if !(tail_exponent >= 0.0) {
            return invalid("tail exponent must be non-negative");
        }
        Ok(RadialProfile { r: grid.r.clone(), values, weights: grid.w.clone(), tail_exponent })
    }

    pub fn from_fn<F: FnMut(f64) -> Complex64>(grid: &RadialGrid, mut f: F, tail_exponent: f64) -> Result<Self> {
        let values = grid.r.iter().map(|&r| f(r)).collect();
        RadialProfile::new(grid, values, tail_exponent)
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap_or(&0.0)
    }

    /// sup |f| over the last tenth of the grid, the amplitude used in tail bounds.
    pub fn edge_amplitude(&self) -> f64 {
        let rm = self.r_max();
        self.r
            .iter()
            .zip(&self.values)
            .filter(|(r, _)| **r >= 0.9 * rm)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Six-point Lagrange interpolation on the grid; `None` outside [0, r_max].
    pub fn interpolate(&self, r: f64) -> Option<Complex64> {
        let n = self.r.len();
        if !(r >= 0.0 && r <= self.r_max()) || n == 0 {
            return None;
        }
        if n < 6 {
            let k = self.r.iter().position(|&x| x >= r).unwrap_or(n - 1);
            return Some(self.values[k]);
        }
        let k = self.r.partition_point(|&x| x < r);
        let lo = k.saturating_sub(3).min(n - 6);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in lo..lo + 6 {
            let mut w = 1.0;
            for j in lo..lo + 6 {
                if j != i {
                    w *= (r - self.r[j]) / (self.r[i] - self.r[j]);
                }
            }
            acc += self.values[i] * w;
        }
        Some(acc)
    }

    /// CSV with header `r,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,re,im\n");
        for (r, v) in self.r.iter().zip(&self.values) {
            out.push_str(&format!("{},{},{}\n", fmt_f64(*r), fmt_f64(v.re), fmt_f64(v.im)));
        }
        out
    }

    /// Parses the CSV written by [`RadialProfile::to_csv`]; weights are trapezoidal.
    pub fn from_csv(text: &str, tail_exponent: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| Error::InvalidArgument(format!("csv header: {e}")))?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != ["r", "re", "im"] {
            return invalid(format!("expected header r,re,im, found {}", names.join(",")));
        }
        let mut r = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::InvalidArgument(format!("csv row {}: {e}", i + 2)))?;
            if rec.len() != 3 {
                return invalid(format!("csv row {} has {} fields", i + 2, rec.len()));
            }
            let mut nums = [0.0; 3];
            for (k, field) in rec.iter().enumerate() {
                nums[k] = field
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("csv row {} column {}: bad number {field:?}", i + 2, k + 1)))?;
                if !nums[k].is_finite() {
                    return invalid(format!("csv row {} column {}: non-finite value", i + 2, k + 1));
                }
            }
            r.push(nums[0]);
            values.push(Complex64::new(nums[1], nums[2]));
        }
        let grid = RadialGrid::trapezoid(r)?;
        RadialProfile::new(&grid, values, tail_exponent)
    }
}

/// Samples of a spectral function on lambda >= 0 with quadrature weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralSamples {
    pub lambda: Vec<f64>,
    pub values: Vec<Complex64>,
    pub weights: Vec<f64>,
}

impl SpectralSamples {
    /// GL16 panels over the given bands, resolving oscillation at `freq` in lambda.
    pub fn from_fn<F: FnMut(f64) -> Complex64>(bands: &[(f64, f64)], freq: f64, cfg: &QuadConfig, mut f: F) -> Result<Self> {
        let ns = band_nodes(bands, freq, cfg)?;
        let values = ns.x.iter().map(|&l| f(l)).collect();
        Ok(SpectralSamples { lambda: ns.x, values, weights: ns.w })
    }
}

/// GL16 nodes covering a union of non-negative intervals.
pub fn band_nodes(bands: &[(f64, f64)], freq: f64, cfg: &QuadConfig) -> Result<NodeSet> {
    let mut ns = NodeSet::default();
    for &(a, b) in &merge_bands(bands)? {
        let n = cfg.panel_count(b - a, freq);
        ns.push_panels(a, b, n, |_| 1.0);
    }
    Ok(ns)
}

fn merge_bands(bands: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let mut v: Vec<(f64, f64)> = Vec::new();
    for &(a, b) in bands {
        if !(a.is_finite() && b.is_finite()) || b < a {
            return invalid(format!("bad spectral band [{a}, {b}]"));
        }
        let a = a.max(0.0);
        if b > a {
            v.push((a, b));
        }
    }
    v.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    Ok(out)
}

/// Transform values with a bound on the part of the integral beyond the grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformOutput {
    pub lambda: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub tail_bound: f64,
}

/// Envelope |phi_lambda(r)| <= (1 + r) e^{-(1/2 - |Im lambda|) r}.
pub fn phi_envelope(im: f64, r: f64) -> f64 {
    (1.0 + r) * (-(0.5 - im.abs()) * r).exp()
}

/// f~(lambda) for each requested lambda in the strip |Im lambda| <= 1/2.
pub fn spherical_transform(f: &RadialProfile, lambdas: &[Complex64], cfg: &QuadConfig) -> Result<TransformOutput> {
    let mut b_max: f64 = 0.0;
    let mut freq: f64 = 0.0;
    for l in lambdas {
        if l.im.abs() > 0.5 + 1e-12 {
            return Err(Error::OutOfStrip(l.im));
        }
        b_max = b_max.max(l.im.abs());
        freq = freq.max(l.re.abs() + l.im.abs());
    }
    let mut values = vec![Complex64::new(0.0, 0.0); lambdas.len()];
    for ((&r, v), w) in f.r.iter().zip(&f.values).zip(&f.weights) {
        if *w == 0.0 {
            continue;
        }
        let scale = *v * (2.0 * PI * w * r.sinh());
        if r == 0.0 {
            continue;
        }
        let ns = abel_lower_nodes(r, freq, cfg);
        for (out, l) in values.iter_mut().zip(lambdas) {
            let phi = ns.sum(|s| complex_cos(*l, s)) * (std::f64::consts::SQRT_2 / PI);
            *out += scale * phi;
        }
    }
    // Tail: |f| <= A e^{-tau (r - R)}, |phi| <= (1 + r) e^{-(1/2 - b) r}, sinh r <= e^r / 2.
    let rm = f.r_max();
    let a = f.edge_amplitude();
    let rate = f.tail_exponent + 0.5 - b_max - 1.0;
    let tail_bound = if a == 0.0 || f.tail_exponent.is_infinite() {
        0.0
    } else if rate <= 0.0 {
        f64::INFINITY
    } else {
        // ∫_R^∞ (1 + r) e^{-rate (r - R)} dr = (1 + R) / rate + 1 / rate^2
        PI * a * (rm * (0.5 + b_max)).exp() * ((1.0 + rm) / rate + 1.0 / (rate * rate))
    };
    Ok(TransformOutput { lambda: lambdas.to_vec(), values, tail_bound })
}

fn complex_cos(l: Complex64, s: f64) -> Complex64 {
    if l.im == 0.0 {
        Complex64::new((l.re * s).cos(), 0.0)
    } else {
        (l * s).cos()
    }
}

/// Precomputed spectral rule: coefficients c_j = m(mu_j) w_j |c(mu_j)|^{-2} / (2 pi^2).
#[derive(Debug, Clone)]
pub struct SpectralRule {
    pub mu: Vec<f64>,
    pub coef: Vec<Complex64>,
}

impl SpectralRule {
    /// `m` must be entire of exponential type at most `freq` minus the largest radius; beyond
    /// mu = 6, where tanh(pi mu) is flat to 1e-16, panels are sized by frequency alone.
    pub fn new<F: Fn(f64) -> Complex64>(bands: &[(f64, f64)], freq: f64, cfg: &QuadConfig, m: F) -> Result<Self> {
        const FLAT: f64 = 6.0;
        let mut ns = NodeSet::default();
        let far = QuadConfig { max_panel: cfg.max_panel * 4.0, ..*cfg };
        for &(a, b) in &merge_bands(bands)? {
            if a < FLAT {
                let e = b.min(FLAT);
                ns.push_panels(a, e, cfg.panel_count(e - a, freq), |_| 1.0);
            }
            let a = a.max(FLAT);
            if b > a {
                ns.push_panels(a, b, far.panel_count(b - a, freq), |_| 1.0);
            }
        }
        let norm = 1.0 / (2.0 * PI * PI);
        let coef = ns.x.iter().zip(&ns.w).map(|(&mu, &w)| m(mu) * (w * plancherel_closed(mu) * norm)).collect();
        Ok(SpectralRule { mu: ns.x, coef })
    }

    pub fn from_samples(g: &SpectralSamples) -> Self {
        let norm = 1.0 / (2.0 * PI * PI);
        let coef = g
            .lambda
            .iter()
            .zip(&g.values)
            .zip(&g.weights)
            .map(|((&mu, &v), &w)| v * (w * plancherel_closed(mu) * norm))
            .collect();
        SpectralRule { mu: g.lambda.clone(), coef }
    }

    pub fn mu_max(&self) -> f64 {
        self.mu.iter().cloned().fold(0.0, f64::max)
    }

    /// sum_j c_j phi_{mu_j}(r).
    pub fn kernel_at(&self, r: f64, cfg: &QuadConfig) -> Complex64 {
        let nodes = PhiNodes::new(r, self.mu_max(), cfg);
        let mut acc = Complex64::new(0.0, 0.0);
        for (mu, c) in self.mu.iter().zip(&self.coef) {
            acc += *c * nodes.eval(*mu);
        }
        acc
    }

    /// `kernel_at` on many radii; away from the origin each phi_mu comes from its series
    /// expansion, built once per node, at a cost that does not grow with mu.
    pub fn kernel_at_many(&self, radii: &[f64], cfg: &QuadConfig) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); radii.len()];
        let far: Vec<usize> = (0..radii.len()).filter(|&k| radii[k] >= PhiExpansion::SERIES_RADIUS).collect();
        for (k, r) in radii.iter().enumerate() {
            if *r < PhiExpansion::SERIES_RADIUS {
                out[k] = self.kernel_at(*r, cfg);
            }
        }
        if far.is_empty() {
            return Ok(out);
        }
        let r_min = far.iter().map(|&k| radii[k]).fold(f64::INFINITY, f64::min);
        let mut small = SpectralRule { mu: Vec::new(), coef: Vec::new() };
        for (mu, coef) in self.mu.iter().zip(&self.coef) {
            // The expansion degenerates at mu = 0; the few nodes near it use the integral.
            if *mu < 1e-3 {
                small.mu.push(*mu);
                small.coef.push(*coef);
                continue;
            }
            let e = PhiExpansion::down_to(*mu, r_min);
            let c = c_function(Complex64::new(*mu, 0.0))?;
            for &k in &far {
                let phi = 2.0 * (c * e.big_phi(radii[k])).re;
                out[k] += *coef * phi;
            }
        }
        if !small.mu.is_empty() {
            for &k in &far {
                out[k] += small.kernel_at(radii[k], cfg);
            }
        }
        Ok(out)
    }
}

/// (1 / 2 pi^2) ∫ g(lambda) phi_lambda(r) |c|^{-2} d lambda on the given radii.
pub fn inverse_spherical_transform(g: &SpectralSamples, grid: &RadialGrid, cfg: &QuadConfig) -> Result<RadialProfile> {
    let rule = SpectralRule::from_samples(g);
    let values = grid.r.iter().map(|&r| rule.kernel_at(r, cfg)).collect();
    RadialProfile::new(grid, values, 0.5)
}

/// ((1 / 2 pi^2) ∫ |g|^2 |c|^{-2} d lambda)^{1/2}.
pub fn plancherel_norm(g: &SpectralSamples) -> f64 {
    let s: f64 = g
        .lambda
        .iter()
        .zip(&g.values)
        .zip(&g.weights)
        .map(|((&l, v), w)| v.norm_sqr() * w * plancherel_closed(l))
        .sum();
    (s / (2.0 * PI * PI)).sqrt()
}

/// Radial L^p norm with respect to 2 pi sinh r dr.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LpReport {
    pub p: f64,
    /// Norm over [0, r_max].
    pub value: f64,
    /// Bound on the p-th power of the norm beyond r_max.
    pub tail_bound: f64,
    /// The declared tail exponent does not make the full-space norm finite.
    pub unbounded: bool,
    pub r_max: f64,
}

pub fn lp_norm_radial(f: &RadialProfile, p: f64, r_max: Option<f64>) -> Result<LpReport> {
    if !(p >= 1.0) {
        return invalid(format!("p = {p} must be at least 1"));
    }
    let rm = r_max.unwrap_or(f.r_max()).min(f.r_max());
    if p.is_infinite() {
        let v = f
            .r
            .iter()
            .zip(&f.values)
            .filter(|(r, _)| **r <= rm)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        return Ok(LpReport { p, value: v, tail_bound: 0.0, unbounded: false, r_max: rm });
    }
    let mut acc = 0.0;
    for ((r, v), w) in f.r.iter().zip(&f.values).zip(&f.weights) {
        if *r <= rm {
            acc += 2.0 * PI * w * r.sinh() * v.norm().powf(p);
        }
    }
    let a = f
        .r
        .iter()
        .zip(&f.values)
        .filter(|(r, _)| **r >= 0.9 * rm && **r <= rm)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    let rate = p * f.tail_exponent - 1.0;
    let (tail_bound, unbounded) = if f.tail_exponent.is_infinite() && rm >= f.r_max() {
        (0.0, false)
    } else if rate <= 0.0 {
        (f64::INFINITY, true)
    } else {
        (PI * a.powf(p) * rm.exp() / rate, false)
    };
    Ok(LpReport { p, value: acc.powf(1.0 / p), tail_bound, unbounded, r_max: rm })
}

type RealToComplex = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// The Euclidean Fourier transform side of a multiplier, used by the Abel route.
#[derive(Clone)]
pub enum HatSymbol {
    /// Closed-form derivative m_hat'(s), supported in |s| <= support.
    Analytic { deriv: RealToComplex, support: f64, oscillation: f64 },
    /// m_hat on s = k ds, k = 0, 1, ..., zero beyond the last sample.
    Sampled { ds: f64, values: Vec<Complex64> },
}

/// An even multiplier m on the spectral half-line with its truncation bands.
#[derive(Clone)]
pub struct MultiplierSymbol {
    eval: RealToComplex,
    /// Intervals of mu >= 0 outside which |m| falls below the truncation tolerance.
    pub bands: Vec<(f64, f64)>,
    /// Frequency at which m oscillates in mu.
    pub oscillation: f64,
    pub hat: Option<HatSymbol>,
}

impl MultiplierSymbol {
    pub fn new<F: Fn(f64) -> Complex64 + Send + Sync + 'static>(m: F, bands: Vec<(f64, f64)>, oscillation: f64) -> Self {
        MultiplierSymbol { eval: Arc::new(m), bands, oscillation, hat: None }
    }

    pub fn with_hat(mut self, hat: HatSymbol) -> Self {
        self.hat = Some(hat);
        self
    }

    pub fn eval(&self, mu: f64) -> Complex64 {
        (self.eval)(mu)
    }
}

/// Kernel of m(D) on the radii of `grid` from the spectral side.
pub fn multiplier_kernel_spectral(m: &MultiplierSymbol, grid: &RadialGrid, cfg: &QuadConfig) -> Result<RadialProfile> {
    let r_max = grid.r.iter().cloned().fold(0.0, f64::max);
    let rule = SpectralRule::new(&m.bands, r_max + m.oscillation, cfg, |mu| m.eval(mu))?;
    let values = rule.kernel_at_many(&grid.r, cfg)?;
    RadialProfile::new(grid, values, 0.5)
}

/// -(1 / (2 pi^{3/2})) ∫_r^end g(s) (cosh s - cosh r)^{-1/2} ds with g = m_hat'.
pub fn abel_kernel<F: Fn(f64) -> Complex64>(deriv: F, r: f64, end: f64, freq: f64, cfg: &QuadConfig) -> Complex64 {
    if end <= r {
        return Complex64::new(0.0, 0.0);
    }
    let ns = abel_upper_nodes(r, end, freq, cfg);
    ns.sum(&deriv) * (-1.0 / (2.0 * PI.powf(1.5)))
}

/// Kernel of m(D) from a compactly supported m_hat; exact zero outside the support.
pub fn multiplier_kernel_abel(m: &MultiplierSymbol, grid: &RadialGrid, cfg: &QuadConfig) -> Result<RadialProfile> {
    let hat = m.hat.as_ref().ok_or_else(|| Error::InvalidArgument("multiplier has no Fourier-side data".into()))?;
    let values = match hat {
        HatSymbol::Analytic { deriv, support, oscillation } => {
            if !support.is_finite() {
                return invalid("Abel route needs a compactly supported m_hat");
            }
            grid.r.iter().map(|&r| abel_kernel(|s| deriv(s), r, *support, *oscillation, cfg)).collect()
        }
        HatSymbol::Sampled { ds, values } => {
            if !(*ds > 0.0) || values.len() < 8 {
                return invalid("sampled m_hat needs a positive step and at least 8 samples");
            }
            let d = sampled_derivative(*ds, values);
            let support = *ds * (values.len() - 1) as f64;
            let freq = PI / ds / 4.0;
            grid.r
                .iter()
                .map(|&r| abel_kernel(|s| interp_uniform(*ds, &d, s), r, support, freq, cfg))
                .collect()
        }
    };
    RadialProfile::new(grid, values, f64::INFINITY)
}

/// Fourth-order central differences of an even sampled function, zero-extended.
fn sampled_derivative(ds: f64, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let get = |k: isize| -> Complex64 {
        let idx = k.unsigned_abs();
        if idx < n {
            v[idx]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    (0..n as isize)
        .map(|k| (get(k - 2) - get(k - 1) * 8.0 + get(k + 1) * 8.0 - get(k + 2)) / (12.0 * ds))
        .collect()
}

/// Four-point Lagrange interpolation of samples d_k at s = k ds, odd extension for s < 0.
fn interp_uniform(ds: f64, d: &[Complex64], s: f64) -> Complex64 {
    let x = s / ds;
    let i = x.floor() as isize;
    let t = x - i as f64;
    let get = |k: isize| -> Complex64 {
        if k < 0 {
            -d.get(k.unsigned_abs()).copied().unwrap_or_default()
        } else {
            d.get(k as usize).copied().unwrap_or_default()
        }
    };
    let (p0, p1, p2, p3) = (get(i - 1), get(i), get(i + 1), get(i + 2));
    let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    p0 * w0 + p1 * w1 + p2 * w2 + p3 * w3
}

/// Recovery of the heat multiplier in the strip from the spatial side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub t: f64,
    pub lambda: Vec<Complex64>,
    pub recovered: Vec<Complex64>,
    pub exact: Vec<Complex64>,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
}

fn heat_profile(time: f64, cfg: &QuadConfig) -> Result<RadialProfile> {
    // |h_T(r)| sinh r e^{r/2} stays below e^{-40} beyond r = 2T + sqrt(4T^2 + 160 T) + 4.
    let r_max = 2.0 * time + (4.0 * time * time + 160.0 * time).sqrt() + 4.0;
    let lam_max = (40.0 / time).sqrt() + 1.0;
    // The profile varies on scale sqrt(T); coarser panels keep long times affordable.
    let cfg = &QuadConfig { max_panel: cfg.max_panel * time.sqrt().clamp(1.0, 8.0), ..*cfg };
    let grid = RadialGrid::gauss(r_max, lam_max, cfg)?;
    let g = SpectralSamples::from_fn(&[(0.0, lam_max)], r_max, cfg, |l| {
        Complex64::new((-time * (l * l + 0.25)).exp(), 0.0)
    })?;
    let mut prof = inverse_spherical_transform(&g, &grid, cfg)?;
    prof.tail_exponent = f64::INFINITY;
    Ok(prof)
}

/// Applies the heat multiplier e^{-t(lambda^2 + 1/4)} to a heat-kernel test function and
/// recovers the multiplier at complex lambda as (2 pi / f~(lambda)) ∫ Tf phi_lambda sinh r dr.
pub fn multiplier_extension_check(t: f64, lambdas: &[Complex64], cfg: &QuadConfig) -> Result<ExtensionReport> {
    if !(t > 0.0) || !t.is_finite() {
        return invalid(format!("heat time {t} must be positive"));
    }
    let t_f = 0.5;
    let f = heat_profile(t_f, cfg)?;
    let tf = heat_profile(t + t_f, cfg)?;
    let f_hat = spherical_transform(&f, lambdas, cfg)?;
    let tf_hat = spherical_transform(&tf, lambdas, cfg)?;
    let mut recovered = Vec::new();
    let mut exact = Vec::new();
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    for ((l, a), b) in lambdas.iter().zip(&f_hat.values).zip(&tf_hat.values) {
        if a.norm() < 1e-12 {
            return Err(Error::DivisionUnstable(a.norm()));
        }
        let m = *b / *a;
        let e = (-(*l * *l + 0.25) * t).exp();
        let err = (m - e).norm();
        max_abs = max_abs.max(err);
        max_rel = max_rel.max(err / e.norm().max(1e-300));
        recovered.push(m);
        exact.push(e);
    }
    Ok(ExtensionReport { t, lambda: lambdas.to_vec(), recovered, exact, max_abs_err: max_abs, max_rel_err: max_rel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{spherical_function, PhiRoute};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn heat_round_trip() {
        let cfg = QuadConfig::default();
        let t = 0.5;
        let lam_max = 10.0;
        let grid = RadialGrid::gauss(16.0, lam_max, &cfg).unwrap();
        let g = SpectralSamples::from_fn(&[(0.0, lam_max)], 16.0, &cfg, |l| c((-t * (l * l + 0.25)).exp())).unwrap();
        let mut f = inverse_spherical_transform(&g, &grid, &cfg).unwrap();
        f.tail_exponent = f64::INFINITY;
        let ls: Vec<Complex64> = [0.0, 0.5, 1.0, 2.5, 4.0].iter().map(|&l| c(l)).collect();
        let back = spherical_transform(&f, &ls, &cfg).unwrap();
        for (l, v) in ls.iter().zip(&back.values) {
            let e = (-t * (l.re * l.re + 0.25)).exp();
            assert!((v.re - e).abs() < 1e-9, "lambda={l}: {v} vs {e}");
        }
        // Plancherel on both sides.
        let l2_spatial = lp_norm_radial(&f, 2.0, None).unwrap().value;
        let l2_spectral = plancherel_norm(&g);
        assert!((l2_spatial - l2_spectral).abs() < 1e-9 * l2_spectral);
    }

    #[test]
    fn lp_of_indicator() {
        let grid = RadialGrid::gauss(3.0, 0.0, &QuadConfig::default()).unwrap();
        let f = RadialProfile::from_fn(&grid, |_| c(1.0), f64::INFINITY).unwrap();
        let rep = lp_norm_radial(&f, 2.0, None).unwrap();
        let exact = (2.0 * PI * (3f64.cosh() - 1.0)).sqrt();
        assert!((rep.value - exact).abs() < 1e-12 * exact);
        assert_eq!(rep.tail_bound, 0.0);
        let slow = RadialProfile::from_fn(&grid, |r| c((-0.4 * r).exp()), 0.4).unwrap();
        assert!(lp_norm_radial(&slow, 2.0, None).unwrap().unbounded);
        assert!(!lp_norm_radial(&slow, 3.0, None).unwrap().unbounded);
    }

    #[test]
    fn spectral_and_abel_kernels_agree_for_gaussian_hat() {
        // m(mu) = e^{-mu^2 / 2} has m_hat(s) = e^{-s^2 / 2}; truncate m_hat smoothly at s = 12,
        // where it is below 1e-31.
        let cfg = QuadConfig::default();
        let sym = MultiplierSymbol::new(|mu| c((-mu * mu / 2.0).exp()), vec![(0.0, 12.0)], 0.0).with_hat(
            HatSymbol::Analytic { deriv: Arc::new(|s| c(-s * (-s * s / 2.0).exp())), support: 12.0, oscillation: 2.0 },
        );
        let grid = RadialGrid::trapezoid(vec![0.0, 0.1, 0.5, 1.0, 2.0, 4.0]).unwrap();
        let a = multiplier_kernel_spectral(&sym, &grid, &cfg).unwrap();
        let b = multiplier_kernel_abel(&sym, &grid, &cfg).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() < 1e-12, "{x} vs {y}");
        }
        // Sampled m_hat reproduces the analytic kernel to interpolation accuracy.
        let ds = 0.01;
        let samples: Vec<Complex64> = (0..1200).map(|k| c((-(k as f64 * ds).powi(2) / 2.0).exp())).collect();
        let sampled = MultiplierSymbol::new(|_| c(0.0), vec![], 0.0).with_hat(HatSymbol::Sampled { ds, values: samples });
        let s = multiplier_kernel_abel(&sampled, &grid, &cfg).unwrap();
        for (x, y) in s.values.iter().zip(&b.values) {
            assert!((x - y).norm() < 1e-7, "{x} vs {y}");
        }
    }

    #[test]
    fn abel_route_rejects_infinite_support() {
        let sym = MultiplierSymbol::new(|_| c(1.0), vec![(0.0, 1.0)], 0.0).with_hat(HatSymbol::Analytic {
            deriv: Arc::new(|_| c(0.0)),
            support: f64::INFINITY,
            oscillation: 0.0,
        });
        let grid = RadialGrid::trapezoid(vec![0.0, 1.0]).unwrap();
        assert!(multiplier_kernel_abel(&sym, &grid, &QuadConfig::default()).is_err());
    }

    #[test]
    fn heat_extension_into_strip() {
        let cfg = QuadConfig::default();
        let ls = [Complex64::new(0.5, 0.0), Complex64::new(1.0, -0.2), Complex64::new(0.0, 0.45), Complex64::new(2.0, 0.3)];
        let rep = multiplier_extension_check(0.5, &ls, &cfg).unwrap();
        assert!(rep.max_rel_err < 1e-4, "{rep:?}");
        // Strip points at t = 50 cancel e^{|Im lambda| r} growth over r ~ 240 and are not
        // resolvable in double precision; the decay example uses the real axis.
        let ls: Vec<Complex64> = [0.5, 1.0, 2.0, 4.0].iter().map(|&l| c(l)).collect();
        let rep = multiplier_extension_check(50.0, &ls, &cfg).unwrap();
        assert!(rep.recovered.iter().all(|m| m.norm() <= 1e-8), "{rep:?}");
    }

    #[test]
    fn profile_csv_round_trip() {
        let grid = RadialGrid::trapezoid(vec![0.0, 0.25, 1.0]).unwrap();
        let f = RadialProfile::new(&grid, vec![c(1.0), Complex64::new(0.1, -3e-20), c(1e17)], 0.5).unwrap();
        let text = f.to_csv();
        let g = RadialProfile::from_csv(&text, 0.5).unwrap();
        assert_eq!(f.r, g.r);
        assert_eq!(f.values, g.values);
        assert!(RadialProfile::from_csv("r,re\n0,1\n", 0.5).is_err());
        assert!(RadialProfile::from_csv("r,re,im\n0.5,1,0\n", 0.5).is_err());
        assert!(RadialProfile::from_csv("r,re,im\n0,1,0\n0,1,0\n", 0.5).is_err());
    }

    #[test]
    fn phi_envelope_holds() {
        for b in [0.0, 0.2, 0.45] {
            for r in [0.3, 2.0, 10.0, 40.0] {
                let v = spherical_function(Complex64::new(0.0, b), r, PhiRoute::Integral).unwrap().re;
                assert!(v <= phi_envelope(b, r));
            }
        }
    }
}
