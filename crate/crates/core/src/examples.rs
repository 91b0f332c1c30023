//! Lower-bound extremizers: the radial (spherical) example and the Knapp example,
//! their L^p / L^2 ratios, the exponent target gamma(p) and log-log fitting.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ols, Point};
use crate::projector::SpectralWindow;
use crate::quad::{GaussLegendre, QuadConfig};
use crate::special::{big_c, c_function, plancherel_closed, PhiExpansion, PhiNodes};
use crate::transform::{lp_norm_radial, LpReport, RadialGrid, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Radial,
    Knapp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTarget {
    pub p: f64,
    pub gamma_p: f64,
    pub branch: Branch,
}

impl ExponentTarget {
    pub fn radial_value(p: f64) -> f64 {
        0.5 - 2.0 / p
    }

    pub fn knapp_value(p: f64) -> f64 {
        0.5 * (0.5 - 1.0 / p)
    }
}

/// max{1/2 - 2/p, (1/2)(1/2 - 1/p)}; the radial branch is reported at p = 6.
pub fn gamma_exponent(p: f64) -> Result<ExponentTarget> {
    if !(p > 2.0) {
        return invalid(format!("p = {p} must exceed 2"));
    }
    let r = ExponentTarget::radial_value(p);
    let k = ExponentTarget::knapp_value(p);
    let (gamma_p, branch) = if r >= k { (r, Branch::Radial) } else { (k, Branch::Knapp) };
    Ok(ExponentTarget { p, gamma_p, branch })
}

/// GL nodes of `rule` on `panels` equal panels of [a, b].
fn gl_nodes(rule: &GaussLegendre, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.nodes.len());
    for k in 0..panels {
        let lo = a + k as f64 * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    out
}

/// Pieces (a, b, value) of the spectral side 1_{|mu - lambda| <= eta/2} + 1_{|mu + lambda| <= eta/2}
/// restricted to mu >= 0.
fn spherical_pieces(w: &SpectralWindow) -> Vec<(f64, f64, f64)> {
    let (l, h) = (w.lambda, w.eta / 2.0);
    if l >= h {
        return vec![(l - h, l + h, 1.0)];
    }
    let mut v = vec![(0.0, h - l, 2.0)];
    if l > 0.0 {
        v.push((h - l, l + h, 1.0));
    }
    v
}

/// Radial extremizer: the profile, both L^2 routes, the L^p norm and the ratio.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphericalExample {
    pub lambda: f64,
    pub eta: f64,
    pub p: f64,
    /// Plancherel side: ((1/2 pi^2) ∫ |f~|^2 |c|^{-2})^{1/2}.
    pub l2: f64,
    /// Radial quadrature on [0, r_max] plus the large-radius asymptotic tail.
    pub l2_radial: f64,
    pub lp: LpReport,
    pub ratio: f64,
}

/// Spectral nodes (mu, w, f~(mu)) resolving phases mu * r for r <= r_max.
fn spectral_nodes(pieces: &[(f64, f64, f64)], r_max: f64, extra_panel: usize) -> Vec<(f64, f64, f64)> {
    let cfg = QuadConfig::default();
    let rule = crate::quad::gl16();
    let mut out = Vec::new();
    for &(a, b, v) in pieces {
        let n = cfg.panel_count(b - a, r_max) + extra_panel;
        out.extend(gl_nodes(rule, a, b, n).into_iter().map(|(x, w)| (x, w, v)));
    }
    out
}

/// (1 / 2 pi^3) ∫_R^∞ (Re F)^2 dr for F(r) = ∫ h(mu) e^{i mu r} d mu, h = f~ / conj(c).
///
/// Uses ∫_R^∞ e^{i a r} dr = pi delta(a) + i e^{iaR} / a; the kernels below are smooth on the
/// diagonal, and the two node sets never coincide.
fn asymptotic_l2_tail(pieces: &[(f64, f64, f64)], big_r: f64) -> Result<f64> {
    let h = |mu: f64| -> Result<Complex64> { Ok(c_function(Complex64::new(mu, 0.0))?.conj().inv()) };
    let a_nodes = spectral_nodes(pieces, 2.0 * big_r, 0);
    let b_nodes = spectral_nodes(pieces, 2.0 * big_r, 1);
    let ha: Vec<Complex64> = a_nodes.iter().map(|&(mu, w, g)| h(mu).map(|v| v * (w * g))).collect::<Result<_>>()?;
    let hb: Vec<Complex64> = b_nodes.iter().map(|&(mu, w, g)| h(mu).map(|v| v * (w * g))).collect::<Result<_>>()?;
    let diag: f64 = a_nodes.iter().zip(&ha).map(|(&(_, w, _), v)| v.norm_sqr() / w).sum::<f64>() * PI;
    let mut cross = 0.0;
    let mut sum_part = Complex64::new(0.0, 0.0);
    for (&(mu, _, _), va) in a_nodes.iter().zip(&ha) {
        for (&(nu, _, _), vb) in b_nodes.iter().zip(&hb) {
            let x = mu - nu;
            cross += (*va * vb.conj() * Complex64::from_polar(1.0, x * big_r)).im / x;
            let s = mu + nu;
            if s > 0.0 {
                sum_part += *va * vb * Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, s * big_r) / s;
            }
        }
    }
    let j = diag - cross;
    Ok((j + sum_part.re) / (2.0 * PI.powi(3)))
}

/// Profile of the radial example on a GL grid of [0, r_max].
pub fn spherical_profile(window: &SpectralWindow, p: f64, r_max: f64) -> Result<RadialProfile> {
    let pieces = spherical_pieces(window);
    let nodes = spectral_nodes(&pieces, r_max, 0);
    let mu_max = window.lambda + window.eta;
    let cfg = QuadConfig::default();
    let grid = RadialGrid::gauss(r_max, p.max(2.0) * mu_max, &cfg)?;
    let norm = 1.0 / (2.0 * PI * PI);
    let near: Vec<(f64, f64)> = nodes.iter().map(|&(mu, w, g)| (mu, w * g * plancherel_closed(mu) * norm)).collect();
    let mut far = Vec::with_capacity(nodes.len());
    for &(mu, w, g) in &nodes {
        // |c|^{-2} c = 1 / conj(c); phi = 2 Re(c Phi).
        let k = c_function(Complex64::new(mu, 0.0))?.conj().inv() * (w * g / (PI * PI));
        far.push((PhiExpansion::new(mu), k));
    }
    let mut values = Vec::with_capacity(grid.r.len());
    for &r in &grid.r {
        let v = if r < PhiExpansion::MIN_RADIUS {
            let ph = PhiNodes::new(r, mu_max, &cfg);
            near.iter().map(|&(mu, c)| c * ph.eval(mu)).sum::<f64>()
        } else {
            far.iter().map(|(e, k)| (*k * e.big_phi(r)).re).sum::<f64>()
        };
        values.push(Complex64::new(v, 0.0));
    }
    RadialProfile::new(&grid, values, 0.5)
}

pub fn spherical_example(window: &SpectralWindow, p: f64, r_max: f64) -> Result<SphericalExample> {
    if !(p > 2.0) || p.is_infinite() {
        return invalid(format!("p = {p} must be finite and exceed 2"));
    }
    if !(r_max >= PhiExpansion::MIN_RADIUS) || !r_max.is_finite() {
        return invalid(format!("r_max = {r_max} must be at least {}", PhiExpansion::MIN_RADIUS));
    }
    let pieces = spherical_pieces(window);
    let rule = crate::quad::gl16();
    let mut l2sq = 0.0;
    for &(a, b, v) in &pieces {
        for (mu, w) in gl_nodes(rule, a, b, 4) {
            l2sq += w * v * v * plancherel_closed(mu);
        }
    }
    let l2 = (l2sq / (2.0 * PI * PI)).sqrt();
    let profile = spherical_profile(window, p, r_max)?;
    let lp = lp_norm_radial(&profile, p, None)?;
    let inner = lp_norm_radial(&profile, 2.0, None)?.value;
    let l2_radial = (inner * inner + asymptotic_l2_tail(&pieces, r_max)?).sqrt();
    Ok(SphericalExample { lambda: window.lambda, eta: window.eta, p, l2, l2_radial, ratio: lp.value / l2, lp })
}

/// Physical region where the Knapp field is non-oscillating, with factor `margin` in place of
/// each "much less than": 1 <= x <= y / margin, mu x <= y^2 / margin, eta_region log y <= 1 / margin,
/// and sqrt(lambda) <= y <= lambda.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnappRegionSpec {
    /// Spectral side 1_{[lambda - eta, lambda + eta]}(mu) 1_{[-1, 1]}(xi).
    pub window: SpectralWindow,
    /// Width used in the log y condition; kept fixed while eta itself is scanned.
    pub region_eta: f64,
    pub ny: usize,
    pub nx: usize,
    pub margin: f64,
}

impl KnappRegionSpec {
    pub fn new(window: SpectralWindow) -> Result<Self> {
        if !(window.lambda > 1.0) {
            return invalid(format!("Knapp example needs lambda > 1, got {}", window.lambda));
        }
        if window.eta * window.lambda.ln() > 1.0 || window.eta >= window.lambda {
            return invalid(format!("eta = {} violates eta log lambda <= 1", window.eta));
        }
        let margin = 10.0;
        let spec = KnappRegionSpec {
            window,
            region_eta: window.eta.min(1.0 / (margin * window.lambda.ln())),
            ny: 64,
            nx: 32,
            margin,
        };
        spec.y_range()?;
        Ok(spec)
    }

    fn mu_max(&self) -> f64 {
        self.window.lambda + self.window.eta
    }

    pub fn y_range(&self) -> Result<(f64, f64)> {
        let l = self.window.lambda;
        let lo = l.sqrt().max(self.margin).max((self.margin * self.mu_max()).sqrt());
        let hi = l.min((1.0 / (self.margin * self.region_eta)).exp());
        if !(hi > lo) {
            return invalid(format!("Knapp region is empty for lambda = {l}"));
        }
        Ok((lo, hi))
    }

    pub fn x_max(&self, y: f64) -> f64 {
        (y / self.margin).min(y * y / (self.margin * self.mu_max()))
    }

    pub fn contains(&self, z: Point) -> bool {
        match self.y_range() {
            Ok((lo, hi)) => z.y >= lo && z.y <= hi && z.x >= 1.0 && z.x <= self.x_max(z.y),
            Err(_) => false,
        }
    }

    /// GL nodes (x, y, weight of dx dy / y^2) in log coordinates over the region.
    pub fn nodes(&self) -> Result<Vec<(Point, f64)>> {
        let (lo, hi) = self.y_range()?;
        let gy = GaussLegendre::new(self.ny);
        let gx = GaussLegendre::new(self.nx);
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for (v, wv) in gl_nodes(&gy, lo.ln(), hi.ln(), 1) {
            let y = v.exp();
            let u_hi = self.x_max(y).ln().max(0.0);
            for (u, wu) in gl_nodes(&gx, 0.0, u_hi, 1) {
                let x = u.exp();
                out.push((Point::new(x, y)?, wv * wu * x / y));
            }
        }
        Ok(out)
    }
}

fn gl32() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

/// f(z) = (2/pi) ∫_{lambda-eta}^{lambda+eta} ∫_{-1}^{1} E(mu, xi, z) d xi mu^2 d mu with
/// E = C(mu) (y / ((x - xi)^2 + y^2))^{1/2 + i mu}.
pub fn knapp_field(z: Point, window: &SpectralWindow) -> Complex64 {
    knapp_field_at(z, window, 1)
}

fn knapp_field_at(z: Point, window: &SpectralWindow, refine: usize) -> Complex64 {
    let (lambda, eta) = (window.lambda, window.eta);
    let mu_hi = lambda + eta;
    let rule = gl32();
    let log_ratio = |xi: f64| (z.y / ((z.x - xi).powi(2) + z.y * z.y)).ln();
    // |d/dxi log(...)| <= 1 / y and the amplitude varies on the scale y.
    let n_xi = ((2.0 * mu_hi / (16.0 * z.y)).max(1.0 / (2.0 * z.y)).ceil() as usize).max(1) * refine;
    let xi_nodes = gl_nodes(rule, -1.0, 1.0, n_xi);
    let logs: Vec<f64> = xi_nodes.iter().map(|&(xi, _)| log_ratio(xi)).collect();
    let l_max = logs.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let n_mu = ((2.0 * eta * l_max / 16.0).ceil() as usize).max(1) * refine;
    let mut acc = Complex64::new(0.0, 0.0);
    for (mu, wm) in gl_nodes(rule, lambda - eta, mu_hi, n_mu) {
        let mut inner = Complex64::new(0.0, 0.0);
        for (&(_, wx), &l) in xi_nodes.iter().zip(&logs) {
            inner += Complex64::from_polar(wx * (0.5 * l).exp(), mu * l);
        }
        acc += inner * big_c(mu) * (wm * mu * mu);
    }
    acc * (2.0 / PI)
}

/// Relative change of |f(z)| when every quadrature panel count is doubled.
pub fn knapp_resolution_defect(z: Point, window: &SpectralWindow) -> f64 {
    let a = knapp_field_at(z, window, 1);
    let b = knapp_field_at(z, window, 2);
    (a - b).norm() / b.norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnappNorms {
    pub lambda: f64,
    pub eta: f64,
    pub p: f64,
    /// sqrt(2/pi) ||mu f~||_{L^2(d mu d xi)}.
    pub l2_exact: f64,
    /// (∫_region |f|^p dx dy / y^2)^{1/p}, a lower bound for the full norm.
    pub lp_region: f64,
    pub ratio: f64,
}

pub fn knapp_l2_exact(window: &SpectralWindow) -> f64 {
    let (a, b) = (window.lambda - window.eta, window.lambda + window.eta);
    // ∫∫ mu^2 over [a, b] x [-1, 1].
    let mass = 2.0 * (b.powi(3) - a.powi(3)) / 3.0;
    (2.0 / PI * mass).sqrt()
}

pub fn knapp_norms(spec: &KnappRegionSpec, p: f64) -> Result<KnappNorms> {
    if !(p > 2.0) || p.is_infinite() {
        return invalid(format!("p = {p} must be finite and exceed 2"));
    }
    let mut acc = 0.0;
    for (z, w) in spec.nodes()? {
        acc += w * knapp_field(z, &spec.window).norm().powf(p);
    }
    let l2_exact = knapp_l2_exact(&spec.window);
    let lp_region = acc.powf(1.0 / p);
    Ok(KnappNorms { lambda: spec.window.lambda, eta: spec.window.eta, p, l2_exact, lp_region, ratio: lp_region / l2_exact })
}

/// max / min of |f(z)| y^{1/2} / (lambda^{3/2} eta) over an n x n grid of region points.
pub fn knapp_magnitude_band(spec: &KnappRegionSpec, n: usize) -> Result<f64> {
    if n < 2 {
        return invalid("magnitude band needs at least a 2 x 2 grid");
    }
    let (lo, hi) = spec.y_range()?;
    let (l, e) = (spec.window.lambda, spec.window.eta);
    let (mut mn, mut mx) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        let y = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
        let xm = spec.x_max(y);
        for j in 0..n {
            let x = xm.powf(j as f64 / (n - 1) as f64);
            let v = knapp_field(Point::new(x, y)?, &spec.window).norm() * y.sqrt() / (l.powf(1.5) * e);
            mn = mn.min(v);
            mx = mx.max(v);
        }
    }
    Ok(mx / mn)
}

/// ∫ |f|^2 dx dy / y^2 over the box |x| <= x_max, y_lo <= y <= y_hi, with GL in (x, log y)
/// using `n` panels of 16 nodes per unit of log y and per unit of x.
pub fn knapp_l2_box(window: &SpectralWindow, x_max: f64, y_lo: f64, y_hi: f64, n: usize) -> Result<f64> {
    if !(x_max > 0.0 && y_lo > 0.0 && y_hi > y_lo) || n == 0 {
        return invalid("bad Knapp box");
    }
    let rule = crate::quad::gl16();
    let nv = ((y_hi / y_lo).ln().ceil() as usize).max(1) * n;
    let mut acc = 0.0;
    for (v, wv) in gl_nodes(rule, y_lo.ln(), y_hi.ln(), nv) {
        let y = v.exp();
        // The field varies on the scale min(y, 1) in x.
        let nx = ((2.0 * x_max / y.min(1.0)).ceil() as usize).max(1) * n;
        for (x, wx) in gl_nodes(rule, -x_max, x_max, nx) {
            acc += wv * wx / y * knapp_field(Point::new(x, y)?, window).norm_sqr();
        }
    }
    Ok(acc.sqrt())
}

/// Least-squares fit of log value against log scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub scale_grid: Vec<f64>,
}

pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<ExponentFit> {
    if pairs.len() < 3 {
        return Err(Error::InsufficientData(format!("exponent fit needs 3 points, got {}", pairs.len())));
    }
    let mut pts = pairs.to_vec();
    for &(s, v) in &pts {
        if !(s > 0.0) || !s.is_finite() {
            return invalid(format!("scale {s} must be positive"));
        }
        if !(v > 0.0) || !v.is_finite() {
            return invalid(format!("value {v} must be positive"));
        }
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for w in pts.windows(2) {
        if w[1].0 < w[0].0 * (2f64.sqrt() - 1e-9) {
            return invalid(format!("scales {} and {} are closer than a factor sqrt 2", w[0].0, w[1].0));
        }
    }
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r_squared) = ols(&x, &y);
    Ok(ExponentFit { slope, intercept, r_squared, scale_grid: pts.iter().map(|p| p.0).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gamma_branches() {
        let t = gamma_exponent(8.0).unwrap();
        assert_eq!((t.gamma_p, t.branch), (0.25, Branch::Radial));
        let t = gamma_exponent(4.0).unwrap();
        assert_eq!((t.gamma_p, t.branch), (0.125, Branch::Knapp));
        // The branches meet at p = 6 with value 1/6.
        let t = gamma_exponent(6.0).unwrap();
        assert!((t.gamma_p - 1.0 / 6.0).abs() < 1e-15);
        assert!((ExponentTarget::knapp_value(6.0) - 1.0 / 6.0).abs() < 1e-15);
        for p in [2.5, 4.0, 5.9, 6.1, 9.0, 40.0] {
            let t = gamma_exponent(p).unwrap();
            let (r, k) = (ExponentTarget::radial_value(p), ExponentTarget::knapp_value(p));
            assert!(t.gamma_p >= r && t.gamma_p >= k);
            assert!((t.gamma_p == r) != (t.gamma_p == k));
        }
        assert!(gamma_exponent(2.0).is_err());
    }

    #[test]
    fn fit_synthetic() {
        let exact: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&s: &f64| (s, s.powf(0.25))).collect();
        let f = fit_exponent(&exact).unwrap();
        assert!((f.slope - 0.25).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = [1.0, 2.0, 4.0].iter().map(|&s| (s, 3.0)).collect();
        assert!(fit_exponent(&flat).unwrap().slope.abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noisy: Vec<(f64, f64)> = (0..8)
            .map(|k| {
                let s = 2f64.powi(k);
                (s, s.powf(0.4) * (1.0 + rng.gen_range(-0.01..0.01)))
            })
            .collect();
        assert!((fit_exponent(&noisy).unwrap().slope - 0.4).abs() < 0.01);
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, -1.0), (4.0, 1.0)]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (1.2, 1.0), (4.0, 1.0)]).is_err());
        assert!(matches!(fit_exponent(&exact[..2]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn spherical_profile_matches_direct_inverse() {
        let w = SpectralWindow::new(3.0, 0.5).unwrap();
        let prof = spherical_profile(&w, 4.0, 6.0).unwrap();
        let cfg = QuadConfig::default();
        for k in (1..prof.r.len()).step_by(37) {
            let r = prof.r[k];
            // Direct: (1/2 pi^2) ∫ phi_mu(r) pi mu tanh(pi mu) over the window by adaptive quadrature.
            let ph = PhiNodes::new(r, 4.0, &cfg);
            let (v, _) = crate::quad::integrate_adaptive(
                |mu| ph.eval(mu) * plancherel_closed(mu),
                2.75,
                3.25,
                1e-14,
                1e-13,
                200,
            )
            .unwrap();
            let want = v / (2.0 * PI * PI);
            assert!((prof.values[k].re - want).abs() < 1e-11, "r={r}: {} vs {want}", prof.values[k].re);
        }
    }

    #[test]
    fn spherical_l2_two_ways() {
        for &(l, e) in &[(2.0, 0.4), (0.3, 1.0), (0.0, 0.5), (12.0, 0.1)] {
            let w = SpectralWindow::new(l, e).unwrap();
            let ex = spherical_example(&w, 4.0, 25.0).unwrap();
            let rel = (ex.l2_radial - ex.l2).abs() / ex.l2;
            assert!(rel < 1e-4, "lambda={l} eta={e}: {} vs {} ({rel})", ex.l2_radial, ex.l2);
        }
    }

    #[test]
    fn spherical_low_regime_ratio() {
        let w = SpectralWindow::new(0.5, 0.1).unwrap();
        let ex = spherical_example(&w, 4.0, 40.0).unwrap();
        let target = (0.5 + 0.1) * 0.1f64.sqrt();
        assert!(ex.ratio / target < 5.0 && target / ex.ratio < 5.0, "{} vs {target}", ex.ratio);
        assert!(ex.lp.tail_bound < 1e-6 * ex.lp.value.powi(4));
    }

    #[test]
    fn knapp_field_resolution_and_region() {
        let w = SpectralWindow::new(100.0, 0.05).unwrap();
        let spec = KnappRegionSpec::new(w).unwrap();
        let (lo, hi) = spec.y_range().unwrap();
        assert!(lo >= 10.0 && hi == 100.0);
        for (z, _) in spec.nodes().unwrap().into_iter().step_by(97) {
            assert!(knapp_resolution_defect(z, &w) < 1e-6);
        }
        let off = Point::new(0.0, 50.0).unwrap();
        assert!(knapp_field(off, &w).norm().is_finite());
        assert!(knapp_resolution_defect(off, &w) < 1e-6);
        assert!(knapp_magnitude_band(&spec, 10).unwrap() <= 10.0);
        assert!(KnappRegionSpec::new(SpectralWindow::new(4.0, 0.1).unwrap()).is_err());
    }

    #[test]
    fn knapp_l2_exact_scale() {
        for l in [64.0f64, 128.0, 256.0] {
            let e = 0.1 / l.ln();
            let v = knapp_l2_exact(&SpectralWindow::new(l, e).unwrap()) / (l * e.sqrt());
            assert!(v > 0.5 && v < 2.0);
        }
    }

    #[test]
    fn knapp_truncated_l2_increases_below_exact() {
        let w = SpectralWindow::new(2.0, 0.5).unwrap();
        let exact = knapp_l2_exact(&w);
        let mut prev = 0.0;
        for (xm, ylo, yhi) in [(1.0, 0.5, 2.0), (2.0, 0.35, 4.0), (4.0, 0.25, 8.0)] {
            let v = knapp_l2_box(&w, xm, ylo, yhi, 1).unwrap();
            assert!(v >= prev * (1.0 - 1e-6) && v <= exact * (1.0 + 1e-6), "{v} {prev} {exact}");
            prev = v;
        }
        assert!(prev > 0.1 * exact);
        let coarse = knapp_l2_box(&w, 1.0, 0.5, 2.0, 1).unwrap();
        let fine = knapp_l2_box(&w, 1.0, 0.5, 2.0, 2).unwrap();
        assert!((coarse - fine).abs() < 1e-6 * fine);
    }
}
