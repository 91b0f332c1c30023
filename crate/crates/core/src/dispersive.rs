//! Kernels of e^{it Delta} applied to the unit-width projector chi(D - lambda) + chi(D + lambda),
//! their dyadic pieces, and the Schrödinger subordination weight Z.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::examples::{fit_exponent, ExponentFit};
use crate::projector::bump::plateau_step;
use crate::projector::{BumpFamily, SpectralWindow};
use crate::quad::{abel_upper_nodes, abel_upper_tail_mass, gl16, integrate_adaptive_breaks, QuadConfig};
use crate::transform::{RadialGrid, RadialProfile, SpectralRule};

/// Relative size of chi below which the amplitude is treated as zero.
const AMPLITUDE_TOL: f64 = 1e-12;

/// m(xi) = e^{-it xi^2} [chi_j(xi - lambda) + chi_j(xi + lambda)], or the full chi when no
/// dyadic index is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerSymbol {
    pub t: f64,
    pub window: SpectralWindow,
    pub bump: BumpFamily,
    pub dyadic_index: Option<u32>,
}

impl SchrodingerSymbol {
    pub fn new(t: f64, lambda: f64, bump: BumpFamily, dyadic_index: Option<u32>) -> Result<Self> {
        if !t.is_finite() || t == 0.0 {
            return invalid(format!("t = {t} must be finite and non-zero"));
        }
        let window = SpectralWindow::new(lambda, 1.0)?;
        Ok(SchrodingerSymbol { t, window, bump, dyadic_index })
    }

    pub fn lambda(&self) -> f64 {
        self.window.lambda
    }

    pub fn piece(&self, x: f64) -> f64 {
        match self.dyadic_index {
            None => self.bump.chi(x),
            Some(j) => chi_piece(&self.bump, j, x),
        }
    }

    /// chi_j(xi - lambda) + chi_j(xi + lambda).
    pub fn amplitude(&self, xi: f64) -> f64 {
        let l = self.lambda();
        self.piece(xi - l) + self.piece(xi + l)
    }

    /// Half-width X of the region |xi -+ lambda| <= X carrying the amplitude.
    fn reach(&self) -> f64 {
        let x = self.bump.tail_radius(AMPLITUDE_TOL);
        match self.dyadic_index {
            None => x,
            Some(j) => x.min(2f64.powi(j as i32 + 1)),
        }
    }

    /// Union of the two amplitude intervals.
    fn cover(&self) -> Vec<(f64, f64)> {
        let (l, x) = (self.lambda(), self.reach());
        if l <= x {
            vec![(-l - x, l + x)]
        } else {
            vec![(-l - x, -l + x), (l - x, l + x)]
        }
    }
}

/// Even cutoff equal to 1 on [-1, 1] and supported in [-2, 2].
pub fn theta(x: f64) -> f64 {
    plateau_step(x)
}

/// chi_0 = chi theta(x), chi_j = chi [theta(2^{-j} x) - theta(2^{1-j} x)].
pub fn chi_piece(bump: &BumpFamily, j: u32, x: f64) -> f64 {
    let c = bump.chi(x);
    if j == 0 {
        return c * theta(x);
    }
    let s = 2f64.powi(-(j as i32));
    c * (theta(s * x) - theta(2.0 * s * x))
}

/// Number of dyadic pieces after which |chi| < tol on the remaining support.
pub fn dyadic_depth(bump: &BumpFamily, tol: f64) -> u32 {
    let x = bump.tail_radius(tol);
    (x.log2().ceil().max(1.0)) as u32
}

/// m_hat(s) and its s-derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HatSample {
    pub s: f64,
    pub value: Complex64,
    pub deriv: Complex64,
    /// Change under halved panels, relative to the L^1 mass of the amplitude.
    pub refinement_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HatRoute {
    /// Quadrature of the xi-integral with panels sized by the local frequency |s - 2 t xi|.
    Direct,
    /// Convolution of a_hat (compactly supported) with the transform of the chirp.
    Chirp,
}

/// (1/sqrt(2 pi)) ∫ e^{i s xi - i t xi^2} a(xi) (1, i xi) d xi on the panels of `cfg`.
fn direct_hat(sym: &SchrodingerSymbol, s: f64, cfg: &QuadConfig) -> (Complex64, Complex64) {
    let t = sym.t;
    let rule = gl16();
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for (lo, hi) in sym.cover() {
        let chunks = ((hi - lo) / cfg.max_panel).ceil().max(1.0) as usize;
        let hc = (hi - lo) / chunks as f64;
        for c in 0..chunks {
            let a = lo + hc * c as f64;
            let b = a + hc;
            let freq = (s - 2.0 * t * a).abs().max((s - 2.0 * t * b).abs()) + 1.0;
            let n = cfg.panel_count(hc, freq);
            let h = hc / n as f64;
            for k in 0..n {
                let mid = a + h * (k as f64 + 0.5);
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let xi = mid + 0.5 * h * x;
                    let amp = sym.amplitude(xi);
                    if amp == 0.0 {
                        continue;
                    }
                    let e = Complex64::from_polar(w * 0.5 * h * amp, xi * (s - t * xi));
                    v += e;
                    d += e * Complex64::new(0.0, xi);
                }
            }
        }
    }
    let n = 1.0 / (2.0 * PI).sqrt();
    (v * n, d * n)
}

/// (2 i t)^{-1/2}, the chirp transform prefactor.
fn chirp_prefactor(t: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 * t).sqrt().inv()
}

/// Chirp route: m_hat = (1/sqrt(2 pi)) ∫ a_hat(sigma) c_hat(s - sigma) d sigma with
/// a_hat = 2 cos(lambda sigma) chi_hat(sigma) and c_hat(u) = (2it)^{-1/2} e^{i u^2 / 4t}.
fn chirp_hat(sym: &SchrodingerSymbol, s: f64, cfg: &QuadConfig) -> (Complex64, Complex64) {
    let (t, l) = (sym.t, sym.lambda());
    let b = sym.bump.hat_support();
    let freq = l + (s.abs() + b) / (2.0 * t.abs());
    // The cutoff transforms have flat smooth steps; at least 16 panels per unit.
    let n = cfg.panel_count(2.0 * b, freq).max((32.0 * b / cfg.max_panel).ceil() as usize);
    let rule = gl16();
    let h = 2.0 * b / n as f64;
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let mid = -b + h * (k as f64 + 0.5);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let sigma = mid + 0.5 * h * x;
            let ah = 2.0 * (l * sigma).cos() * sym.bump.chi_hat(sigma);
            if ah == 0.0 {
                continue;
            }
            let u = s - sigma;
            let e = Complex64::from_polar(w * 0.5 * h * ah, u * u / (4.0 * t));
            v += e;
            d += e * Complex64::new(0.0, u / (2.0 * t));
        }
    }
    let pre = chirp_prefactor(t) / (2.0 * PI).sqrt();
    (v * pre, d * pre)
}

fn hat_by(sym: &SchrodingerSymbol, s: f64, route: HatRoute, cfg: &QuadConfig) -> (Complex64, Complex64) {
    match route {
        HatRoute::Direct => direct_hat(sym, s, cfg),
        HatRoute::Chirp => chirp_hat(sym, s, cfg),
    }
}

/// ∫ |a(xi)| d xi / sqrt(2 pi), the scale of m_hat.
fn amplitude_mass(sym: &SchrodingerSymbol) -> f64 {
    let mut m = 0.0;
    for (lo, hi) in sym.cover() {
        let n = (hi - lo).ceil().max(1.0) as usize;
        let h = (hi - lo) / n as f64;
        for k in 0..n {
            let a = lo + h * k as f64;
            m += gl16().integrate(|xi| sym.amplitude(xi).abs(), a, a + h);
        }
    }
    m / (2.0 * PI).sqrt()
}

/// m_hat and m_hat' at each s, with a panel-halving self-check at `tol` relative to the
/// amplitude mass.
pub fn symbol_hat(sym: &SchrodingerSymbol, s_grid: &[f64], route: HatRoute, cfg: &QuadConfig, tol: f64) -> Result<Vec<HatSample>> {
    if route == HatRoute::Chirp && sym.dyadic_index.is_some() {
        return invalid("the chirp route needs a compactly supported a_hat; dyadic pieces use the direct route");
    }
    let scale = amplitude_mass(sym).max(f64::MIN_POSITIVE);
    let fine = cfg.refined();
    let mut out = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let (v, d) = hat_by(sym, s, route, cfg);
        let (v2, d2) = hat_by(sym, s, route, &fine);
        let lam = sym.lambda().max(1.0);
        let err = ((v - v2).norm()).max((d - d2).norm() / lam) / scale;
        if err > tol {
            return Err(Error::Accuracy { achieved: err, requested: tol });
        }
        out.push(HatSample { s, value: v2, deriv: d2, refinement_error: err });
    }
    Ok(out)
}

/// Samples of an odd function at s = k h, k >= 0, with six-point Lagrange interpolation.
struct OddSamples {
    h: f64,
    v: Vec<Complex64>,
}

impl OddSamples {
    fn get(&self, k: i64) -> Complex64 {
        if k < 0 {
            -self.v.get((-k) as usize).copied().unwrap_or_default()
        } else {
            self.v.get(k as usize).copied().unwrap_or_default()
        }
    }

    fn eval(&self, s: f64) -> Complex64 {
        let x = s / self.h;
        let i = x.floor() as i64;
        let u = x - i as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for a in -2..=3i64 {
            let mut w = 1.0;
            for b in -2..=3i64 {
                if b != a {
                    w *= (u - b as f64) / (a - b) as f64;
                }
            }
            acc += self.get(i + a) * w;
        }
        acc
    }
}

/// Numerical parameters of the Abel-route Schrödinger kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersiveConfig {
    pub quad_wavelengths: f64,
    pub quad_max_panel: f64,
    /// Samples of m_hat' per wavelength of its fastest oscillation.
    pub samples_per_wavelength: f64,
    /// Abel integrals stop at r + abel_tail at the latest.
    pub abel_tail: f64,
}

impl Default for DispersiveConfig {
    fn default() -> Self {
        let q = QuadConfig::default();
        DispersiveConfig { quad_wavelengths: q.wavelengths_per_panel, quad_max_panel: q.max_panel, samples_per_wavelength: 24.0, abel_tail: 80.0 }
    }
}

impl DispersiveConfig {
    pub fn quad(&self) -> QuadConfig {
        QuadConfig { wavelengths_per_panel: self.quad_wavelengths, max_panel: self.quad_max_panel }
    }

    pub fn refined(&self) -> Self {
        let q = self.quad().refined();
        DispersiveConfig {
            quad_wavelengths: q.wavelengths_per_panel,
            quad_max_panel: q.max_panel,
            samples_per_wavelength: self.samples_per_wavelength * 2.0,
            ..*self
        }
    }
}

/// Kernel values with the bound on the part of the Abel integral beyond its cut.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DispersiveKernel {
    pub t: f64,
    pub lambda: f64,
    pub dyadic_index: Option<u32>,
    pub profile: RadialProfile,
    pub tail_bound: f64,
}

/// Beyond this s the stationary point s / 2t has left the amplitude support and m_hat is
/// below the amplitude tolerance.
fn hat_extent(sym: &SchrodingerSymbol) -> f64 {
    2.0 * sym.t.abs() * (sym.lambda() + sym.reach()) + sym.bump.hat_support() + 10.0
}

/// K(r) = -(1 / 2 pi^{3/2}) ∫_r^∞ m_hat'(s) (cosh s - cosh r)^{-1/2} ds on the radii of `grid`.
///
/// m_hat' is tabulated once on a uniform s grid by the chirp route (the direct route for
/// dyadic pieces) and interpolated at the Abel nodes.
pub fn dispersive_kernel(sym: &SchrodingerSymbol, grid: &RadialGrid, cfg: &DispersiveConfig) -> Result<DispersiveKernel> {
    let r_max = grid.r.iter().cloned().fold(0.0, f64::max);
    let t = sym.t.abs();
    let extent = hat_extent(sym);
    let s_end = (r_max + cfg.abel_tail).min(extent.max(r_max));
    let freq = (sym.lambda() + sym.reach()).min(sym.lambda() + s_end / (2.0 * t)) + 8.0;
    let h = 2.0 * PI / (freq * cfg.samples_per_wavelength);
    let n = (s_end / h).ceil() as usize + 4;
    let route = if sym.dyadic_index.is_some() { HatRoute::Direct } else { HatRoute::Chirp };
    let q = cfg.quad();
    let samples: Vec<Complex64> = (0..=n).map(|k| hat_by(sym, k as f64 * h, route, &q).1).collect();
    let dmax = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let table = OddSamples { h, v: samples };
    let norm = -1.0 / (2.0 * PI.powf(1.5));
    let mut tail: f64 = 0.0;
    let mut values = Vec::with_capacity(grid.r.len());
    for &r in &grid.r {
        let end = (r + cfg.abel_tail).min(extent.max(r));
        if end >= extent {
            // Nothing is cut but the region where m_hat vanishes to the amplitude tolerance.
        } else {
            tail = tail.max(dmax * abel_upper_tail_mass(r, end) / (2.0 * PI.powf(1.5)));
        }
        let ns = abel_upper_nodes(r, end, freq, &q);
        let v: Complex64 = ns.x.iter().zip(&ns.w).map(|(&s, &w)| table.eval(s) * w).sum();
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Diverged(format!("Schrödinger kernel at r = {r}")));
        }
        values.push(v * norm);
    }
    let profile = RadialProfile::new(grid, values, 0.5)?;
    Ok(DispersiveKernel { t: sym.t, lambda: sym.lambda(), dyadic_index: sym.dyadic_index, profile, tail_bound: tail })
}

/// Spectral route: (1 / 2 pi^2) ∫ e^{-it mu^2} a(mu) phi_mu(r) |c(mu)|^{-2} d mu.
pub fn dispersive_kernel_spectral(sym: &SchrodingerSymbol, grid: &RadialGrid, cfg: &QuadConfig) -> Result<RadialProfile> {
    let s = *sym;
    let top = s.lambda() + s.reach();
    let r_max = grid.r.iter().cloned().fold(0.0, f64::max);
    let rule = SpectralRule::new(&[(0.0, top)], r_max + 2.0 * s.t.abs() * top, cfg, |mu| {
        Complex64::from_polar(s.amplitude(mu), -s.t * mu * mu)
    })?;
    RadialProfile::new(grid, rule.kernel_at_many(&grid.r, cfg)?, 0.5)
}

/// Radii [0, min(3 t lambda + 10, 40)] at `ppw` points per wavelength of lambda.
pub fn dispersive_grid(t: f64, lambda: f64, ppw: f64) -> Result<RadialGrid> {
    let r_end = (3.0 * t.abs() * lambda + 10.0).min(40.0);
    let n = ((r_end * lambda.max(1.0) * ppw / (2.0 * PI)).ceil() as usize).max(16);
    RadialGrid::trapezoid((0..=n).map(|k| r_end * k as f64 / n as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayBranch {
    /// t < 1: sup |K| against lambda (1 + t lambda)^{-N}.
    Small,
    /// t >= 1: sup |K| against t^{-3/2}.
    Large,
}

/// One row of the decay report CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub lambda: f64,
    pub t: f64,
    pub sup_abs_k: f64,
    pub r_argmax: f64,
    pub branch: DecayBranch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub lambda: f64,
    pub rows: Vec<DecayRow>,
    /// Fit of log sup |K| against log t over the large-t rows.
    pub fit: Option<ExponentFit>,
    /// (min, max) of sup |K| (1 + t lambda)^N / lambda over the small-t rows with t >= 1/lambda.
    pub small_t_band: Option<(f64, f64)>,
    pub envelope_n: u32,
}

pub const DECAY_CSV_HEADER: &str = "lambda,t,sup_abs_K,r_argmax,branch";

impl DecayReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(DECAY_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let b = match r.branch {
                DecayBranch::Small => "small",
                DecayBranch::Large => "large",
            };
            s.push_str(&format!("{},{},{:e},{},{}\n", r.lambda, r.t, r.sup_abs_k, r.r_argmax, b));
        }
        s
    }
}

/// sup over the radii of `dispersive_grid` and the radius where it is attained.
pub fn kernel_sup(t: f64, lambda: f64, bump: BumpFamily, ppw: f64, cfg: &DispersiveConfig) -> Result<(f64, f64)> {
    let sym = SchrodingerSymbol::new(t, lambda, bump, None)?;
    let grid = dispersive_grid(t, lambda, ppw)?;
    let k = dispersive_kernel(&sym, &grid, cfg)?;
    let mut best = (0.0, 0.0);
    for (r, v) in k.profile.r.iter().zip(&k.profile.values) {
        if v.norm() > best.0 {
            best = (v.norm(), *r);
        }
    }
    Ok(best)
}

/// sup_r |K(t, r)| along `t_grid`, the slope over t >= 1 and the small-t band for N.
pub fn verify_dispersive_decay(lambda: f64, t_grid: &[f64], bump: BumpFamily, envelope_n: u32, cfg: &DispersiveConfig) -> Result<DecayReport> {
    if !(lambda > 1.0) {
        return invalid("dispersive decay needs lambda > 1");
    }
    let ppw = 8.0;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t > 0.0) {
            return invalid(format!("t = {t} must be positive"));
        }
        let (sup, arg) = kernel_sup(t, lambda, bump, ppw, cfg)?;
        let branch = if t < 1.0 { DecayBranch::Small } else { DecayBranch::Large };
        rows.push(DecayRow { lambda, t, sup_abs_k: sup, r_argmax: arg, branch });
    }
    let large: Vec<(f64, f64)> = rows.iter().filter(|r| r.branch == DecayBranch::Large).map(|r| (r.t, r.sup_abs_k)).collect();
    let fit = if large.len() >= 3 { Some(fit_exponent(&large)?) } else { None };
    let band: Vec<f64> = rows
        .iter()
        .filter(|r| r.branch == DecayBranch::Small && r.t * lambda >= 1.0)
        .map(|r| r.sup_abs_k * (1.0 + r.t * lambda).powi(envelope_n as i32) / lambda)
        .collect();
    let small_t_band = if band.is_empty() {
        None
    } else {
        Some((band.iter().cloned().fold(f64::INFINITY, f64::min), band.iter().cloned().fold(0.0, f64::max)))
    };
    Ok(DecayReport { lambda, rows, fit, small_t_band, envelope_n })
}

/// Inner cutoff phi of the subordination formula, supported in [-1/2, 1/2].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerBump {
    /// 1 on [-1/4, 1/4], smooth step to 0 at |sigma| = 1/2.
    Plateau,
    /// exp(1 - 1 / (1 - 4 sigma^2)).
    Exponential,
}

impl InnerBump {
    pub fn eval(&self, sigma: f64) -> f64 {
        match self {
            InnerBump::Plateau => plateau_step(4.0 * sigma),
            InnerBump::Exponential => {
                let u = 1.0 - 4.0 * sigma * sigma;
                if u <= 0.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / u).exp()
                }
            }
        }
    }
}

/// Z_{lambda, eta}(t) on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZProfile {
    pub window: SpectralWindow,
    pub phi: InnerBump,
    pub chi_positive: BumpFamily,
    pub t: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// Integrand of Z after tau = (lambda + eta sigma)^2 without the phase.
fn z_amplitude(window: SpectralWindow, phi: InnerBump, chi: &BumpFamily, sigma: f64) -> Result<f64> {
    let (l, e) = (window.lambda, window.eta);
    let den = chi.chi(e * sigma) + chi.chi(2.0 * l + e * sigma);
    if !(den > 1e-14) {
        return Err(Error::DivisionUnstable(den));
    }
    Ok(phi.eval(sigma) / den.powi(3) * 2.0 * e * (l + e * sigma))
}

/// e^{it lambda^2} Z(t): the carrier phase removed, so its modulus is that of Z and its
/// phase is accurate for large t.
fn z_envelope(window: SpectralWindow, nodes: &[(f64, f64)], t: f64) -> Complex64 {
    let (l, e) = (window.lambda, window.eta);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(sigma, wa) in nodes {
        acc += Complex64::from_polar(wa, -t * e * sigma * (2.0 * l + e * sigma));
    }
    acc / (2.0 * PI).sqrt()
}

/// Z(t) = (1 / sqrt(2 pi)) ∫_{-1/2}^{1/2} e^{-it (lambda + eta sigma)^2} A(sigma) d sigma.
fn z_at(window: SpectralWindow, nodes: &[(f64, f64)], t: f64) -> Complex64 {
    let l = window.lambda;
    z_envelope(window, nodes, t) * Complex64::from_polar(1.0, -t * l * l)
}

/// Nodes (sigma, weight * amplitude) resolving the phase up to |t| <= t_max.
fn z_nodes(window: SpectralWindow, phi: InnerBump, chi: &BumpFamily, t_max: f64, cfg: &QuadConfig) -> Result<Vec<(f64, f64)>> {
    let freq = 2.0 * t_max * window.eta * (window.lambda + window.eta) + 16.0;
    // The plateau step has essential flatness at its ends; finer panels than the phase needs.
    let n = cfg.panel_count(1.0, freq).max(16);
    let h = 1.0 / n as f64;
    let rule = gl16();
    let mut out = Vec::with_capacity(16 * n);
    for k in 0..n {
        let mid = -0.5 + h * (k as f64 + 0.5);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let sigma = mid + 0.5 * h * x;
            out.push((sigma, w * 0.5 * h * z_amplitude(window, phi, chi, sigma)?));
        }
    }
    Ok(out)
}

pub fn z_weight(window: SpectralWindow, phi: InnerBump, chi_positive: BumpFamily, t_grid: &[f64], cfg: &QuadConfig) -> Result<ZProfile> {
    if t_grid.iter().any(|t| !t.is_finite()) {
        return invalid("time grid must be finite");
    }
    let t_max = t_grid.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let nodes = z_nodes(window, phi, &chi_positive, t_max, cfg)?;
    let values = t_grid.iter().map(|&t| z_at(window, &nodes, t)).collect();
    Ok(ZProfile { window, phi, chi_positive, t: t_grid.to_vec(), values })
}

/// L^1, L^2 and L^inf norms of Z over the real line and the decay constants
/// C_L = sup |Z(t)| (1 + lambda eta |t|)^L / (lambda eta) for L = 2, 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZNorms {
    pub lambda: f64,
    pub eta: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub c2: f64,
    pub c3: f64,
}

impl ZNorms {
    pub fn norm(&self, r: f64) -> Result<f64> {
        match r {
            x if x == 1.0 => Ok(self.l1),
            x if x == 2.0 => Ok(self.l2),
            x if x.is_infinite() => Ok(self.linf),
            _ => invalid(format!("Z norms are tabulated for r in {{1, 2, inf}}, got {r}")),
        }
    }
}

/// Norms of Z from t = 0 to `span / (lambda eta)`; Z(-t) = conj Z(t) doubles the half-line
/// integrals.
pub fn z_norms(window: SpectralWindow, phi: InnerBump, chi_positive: BumpFamily, span: f64, cfg: &QuadConfig) -> Result<ZNorms> {
    let le = window.lambda * window.eta;
    if !(le > 0.0) || !(span > 0.0) {
        return invalid("Z norms need lambda eta > 0 and a positive span");
    }
    let t_max = span / le;
    let nodes = z_nodes(window, phi, &chi_positive, t_max, cfg)?;
    let z = |t: f64| z_envelope(window, &nodes, t);
    // Z varies on the time scale 1 / (lambda eta) and oscillates at lambda^2.
    let breaks: Vec<f64> = (0..=((span * 4.0).ceil() as usize)).map(|k| (k as f64 / 4.0).min(span) / le).collect();
    let z0 = z(0.0).norm();
    let abs_tol = 1e-12 * z0 / le;
    let (l1, _) = integrate_adaptive_breaks(|t| z(t).norm(), &breaks, abs_tol, 1e-10, 200_000)?;
    let (l2sq, _) = integrate_adaptive_breaks(|t| z(t).norm_sqr(), &breaks, abs_tol * z0, 1e-10, 200_000)?;
    let mut linf: f64 = z0;
    let (mut c2, mut c3): (f64, f64) = (0.0, 0.0);
    let n = (span * 64.0).ceil() as usize;
    for k in 0..=n {
        let t = t_max * k as f64 / n as f64;
        let a = z(t).norm();
        linf = linf.max(a);
        let g = 1.0 + le * t;
        c2 = c2.max(a * g * g / le);
        c3 = c3.max(a * g * g * g / le);
    }
    Ok(ZNorms { lambda: window.lambda, eta: window.eta, l1: 2.0 * l1, l2: (2.0 * l2sq).sqrt(), linf, c2, c3 })
}
