//! Radial kernels p_{lambda,eta}, q_{lambda,eta} and sigma_{lambda,y}.
//!
//! All three are kernels of even multipliers whose Fourier transforms are compactly
//! supported, so the Abel route is exact beyond the support. The spectral route is an
//! independent evaluation used as a cross-check.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::projector::BumpFamily;
use crate::quad::{abel_upper_tail_mass, QuadConfig};
use crate::transform::{
    abel_kernel, multiplier_kernel_spectral, HatSymbol, MultiplierSymbol, RadialGrid, RadialProfile, SpectralRule,
};

/// Band [lambda - eta, lambda + eta] of the spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub lambda: f64,
    pub eta: f64,
}

impl SpectralWindow {
    pub fn new(lambda: f64, eta: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return invalid(format!("lambda = {lambda} must be finite and non-negative"));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return invalid(format!("eta = {eta} must be finite and positive"));
        }
        Ok(SpectralWindow { lambda, eta })
    }
}

/// Numerical parameters shared by the kernel routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub quad_wavelengths: f64,
    pub quad_max_panel: f64,
    /// Relative size of the spectral multiplier discarded outside its bands.
    pub spectral_tol: f64,
    /// Abel integrals stop at min(support, r + abel_tail); the remainder is bounded.
    pub abel_tail: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        let q = QuadConfig::default();
        KernelConfig { quad_wavelengths: q.wavelengths_per_panel, quad_max_panel: q.max_panel, spectral_tol: 1e-12, abel_tail: 80.0 }
    }
}

impl KernelConfig {
    pub fn quad(&self) -> QuadConfig {
        QuadConfig { wavelengths_per_panel: self.quad_wavelengths, max_panel: self.quad_max_panel }
    }

    pub fn refined(&self) -> Self {
        let q = self.quad().refined();
        KernelConfig { quad_wavelengths: q.wavelengths_per_panel, quad_max_panel: q.max_panel, ..*self }
    }
}

/// Which of the three kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelFamily {
    P(SpectralWindow),
    Q(SpectralWindow),
    Sigma { lambda: f64, y: f64 },
}

/// A kernel together with the cutoff it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorKernel {
    pub family: KernelFamily,
    pub bump: BumpFamily,
}

/// -ceil(log2 lambda): the smallest integer with 2^{-k0} >= lambda.
pub fn dyadic_k0(lambda: f64) -> i32 {
    -(lambda.log2().ceil() as i32)
}

impl ProjectorKernel {
    pub fn p(window: SpectralWindow, bump: BumpFamily) -> Result<Self> {
        Self::check_window(window)?;
        Ok(ProjectorKernel { family: KernelFamily::P(window), bump })
    }

    pub fn q(window: SpectralWindow, bump: BumpFamily) -> Result<Self> {
        Self::check_window(window)?;
        Ok(ProjectorKernel { family: KernelFamily::Q(window), bump })
    }

    pub fn sigma(lambda: f64, y: f64, bump: BumpFamily) -> Result<Self> {
        if !(lambda > 1.0) || !lambda.is_finite() || !y.is_finite() {
            return invalid(format!("sigma kernel needs lambda > 1 and finite y, got {lambda}, {y}"));
        }
        Ok(ProjectorKernel { family: KernelFamily::Sigma { lambda, y }, bump })
    }

    fn check_window(w: SpectralWindow) -> Result<()> {
        SpectralWindow::new(w.lambda, w.eta).map(|_| ())
    }

    pub fn lambda(&self) -> f64 {
        match self.family {
            KernelFamily::P(w) | KernelFamily::Q(w) => w.lambda,
            KernelFamily::Sigma { lambda, .. } => lambda,
        }
    }

    /// Radius beyond which the kernel vanishes identically.
    pub fn support(&self) -> f64 {
        match self.family {
            KernelFamily::P(w) | KernelFamily::Q(w) => self.bump.hat_support() / w.eta,
            KernelFamily::Sigma { .. } => self.bump.hat_support(),
        }
    }

    /// Terms (weight, scale) of theta_{k0}(s) = sum_k w_k psi_hat(s / scale_k), scale_k = 2^k.
    fn sigma_terms(lambda: f64, y: f64) -> Vec<(Complex64, f64)> {
        let k0 = dyadic_k0(lambda);
        ((k0 + 1)..=0)
            .map(|k| {
                let kf = k as f64;
                let w = Complex64::new(0.0, y * kf * 2f64.ln()).exp() * 2f64.powf(0.5 * kf);
                (w, 2f64.powi(k))
            })
            .collect()
    }

    /// m_hat(s).
    pub fn hat(&self, s: f64) -> Complex64 {
        let b = self.bump;
        match self.family {
            KernelFamily::P(w) => Complex64::new(2.0 * w.eta * (w.lambda * s).cos() * b.chi_hat(w.eta * s), 0.0),
            KernelFamily::Q(w) => Complex64::new(2.0 * w.eta * (w.lambda * s).cos() * b.psi_hat(w.eta * s), 0.0),
            KernelFamily::Sigma { lambda, y } => {
                let th: Complex64 = Self::sigma_terms(lambda, y).iter().map(|(w, sc)| *w * b.psi_hat(s / sc)).sum();
                th * (2.0 * (lambda * s).cos())
            }
        }
    }

    /// d/ds m_hat(s).
    pub fn hat_deriv(&self, s: f64) -> Complex64 {
        let b = self.bump;
        let d = |l: f64, f: f64, df: f64| 2.0 * (-l * (l * s).sin() * f + (l * s).cos() * df);
        match self.family {
            KernelFamily::P(w) => {
                let e = w.eta;
                Complex64::new(e * d(w.lambda, b.chi_hat(e * s), e * b.chi_hat_deriv(e * s)), 0.0)
            }
            KernelFamily::Q(w) => {
                let e = w.eta;
                Complex64::new(e * d(w.lambda, b.psi_hat(e * s), e * b.psi_hat_deriv(e * s)), 0.0)
            }
            KernelFamily::Sigma { lambda, y } => {
                let mut th = Complex64::new(0.0, 0.0);
                let mut dth = Complex64::new(0.0, 0.0);
                for (w, sc) in Self::sigma_terms(lambda, y) {
                    th += w * b.psi_hat(s / sc);
                    dth += w * (b.psi_hat_deriv(s / sc) / sc);
                }
                let (sn, cs) = (lambda * s).sin_cos();
                th * (-2.0 * lambda * sn) + dth * (2.0 * cs)
            }
        }
    }

    /// Frequency used to size Abel panels: the carrier plus the cutoff's own variation.
    fn hat_frequency(&self) -> f64 {
        match self.family {
            KernelFamily::P(w) | KernelFamily::Q(w) => w.lambda + 64.0 * w.eta,
            KernelFamily::Sigma { lambda, .. } => 65.0 * lambda,
        }
    }

    /// sup |m_hat'|, bounded from the pieces.
    fn hat_deriv_bound(&self) -> f64 {
        // |chi_hat| <= sqrt(2 pi) covers every family; |chi_hat'| <= 8 for the plateau step and
        // the B-splines of order >= 4 after the sqrt(2) rescaling.
        let (h, dh) = ((2.0 * PI).sqrt(), 8.0 * (2.0 * PI).sqrt());
        match self.family {
            KernelFamily::P(w) | KernelFamily::Q(w) => 2.0 * w.eta * (w.lambda * 2.0 * h + w.eta * 3.0 * dh),
            KernelFamily::Sigma { lambda, y } => Self::sigma_terms(lambda, y)
                .iter()
                .map(|(w, sc)| 2.0 * w.norm() * (lambda * 2.0 * h + 3.0 * dh / sc))
                .sum(),
        }
    }

    /// The spectral-side multiplier m(mu) with truncation bands.
    pub fn symbol(&self, tol: f64) -> MultiplierSymbol {
        let b = self.bump;
        let support = self.support();
        let this = *self;
        let hat = HatSymbol::Analytic {
            deriv: Arc::new(move |s| this.hat_deriv(s)),
            support,
            oscillation: self.hat_frequency(),
        };
        match self.family {
            KernelFamily::P(w) => {
                let x = b.tail_radius(tol);
                let (l, e) = (w.lambda, w.eta);
                MultiplierSymbol::new(
                    move |mu| Complex64::new(b.chi((mu - l) / e) + b.chi((mu + l) / e), 0.0),
                    vec![((l - x * e).max(0.0), l + x * e)],
                    support,
                )
                .with_hat(hat)
            }
            KernelFamily::Q(w) => {
                let x = b.psi_tail_radius(tol);
                let (l, e) = (w.lambda, w.eta);
                MultiplierSymbol::new(
                    move |mu| Complex64::new(b.psi((mu - l) / e) + b.psi((mu + l) / e), 0.0),
                    vec![((l - x * e).max(0.0), l + x * e)],
                    support,
                )
                .with_hat(hat)
            }
            KernelFamily::Sigma { lambda, y } => {
                // The k-th piece is 2^{(3/2 + iy) k} psi(2^k (mu -+ lambda)).
                let terms: Vec<(Complex64, f64)> =
                    Self::sigma_terms(lambda, y).into_iter().map(|(w, sc)| (w * sc, sc)).collect();
                let bands = terms
                    .iter()
                    .map(|(w, sc)| {
                        let x = b.psi_tail_radius((tol / w.norm()).min(1.0));
                        ((lambda - x / sc).max(0.0), lambda + x / sc)
                    })
                    .collect();
                MultiplierSymbol::new(
                    move |mu| terms.iter().map(|(w, sc)| *w * (b.psi(sc * (mu - lambda)) + b.psi(sc * (mu + lambda)))).sum(),
                    bands,
                    support,
                )
                .with_hat(hat)
            }
        }
    }

    /// Abel-route kernel on the radii of `grid`, with a bound on the discarded remainder.
    pub fn abel(&self, grid: &RadialGrid, cfg: &KernelConfig) -> Result<KernelValues> {
        let q = cfg.quad();
        let support = self.support();
        let freq = self.hat_frequency();
        let dbound = self.hat_deriv_bound();
        let mut values = Vec::with_capacity(grid.r.len());
        let mut tail: f64 = 0.0;
        for &r in &grid.r {
            if r >= support {
                values.push(Complex64::new(0.0, 0.0));
                continue;
            }
            let end = support.min(r + cfg.abel_tail);
            let v = abel_kernel(|s| self.hat_deriv(s), r, end, freq, &q);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Diverged(format!("Abel kernel at r = {r}")));
            }
            if end < support {
                tail = tail.max(dbound * abel_upper_tail_mass(r, end) / (2.0 * PI.powf(1.5)));
            }
            values.push(v);
        }
        let profile = RadialProfile::new(grid, values, f64::INFINITY)?;
        Ok(KernelValues { profile, tail_bound: tail })
    }

    /// Spectral-route kernel on the radii of `grid`.
    pub fn spectral(&self, grid: &RadialGrid, cfg: &KernelConfig) -> Result<RadialProfile> {
        let mut prof = multiplier_kernel_spectral(&self.symbol(cfg.spectral_tol), grid, &cfg.quad())?;
        for (r, v) in prof.r.iter().zip(prof.values.iter_mut()) {
            if *r >= self.support() {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        prof.tail_exponent = f64::INFINITY;
        Ok(prof)
    }

    /// Abel route at `cfg` and at halved panels; an accuracy error if they disagree by more
    /// than `rel_tol` of the sup.
    pub fn abel_checked(&self, grid: &RadialGrid, cfg: &KernelConfig, rel_tol: f64) -> Result<KernelValues> {
        let a = self.abel(grid, cfg)?;
        let b = self.abel(grid, &cfg.refined())?;
        let err = rel_sup_error(&a.profile.values, &b.profile.values);
        if err > rel_tol {
            return Err(Error::Accuracy { achieved: err, requested: rel_tol });
        }
        Ok(b)
    }
}

/// Kernel samples with a bound on the truncated part of the Abel integral.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelValues {
    pub profile: RadialProfile,
    pub tail_bound: f64,
}

/// max |a - b| / max |b|; zero when both vanish.
pub fn rel_sup_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().chain(a.iter()).map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

pub fn kernel_p(window: SpectralWindow, bump: BumpFamily, grid: &RadialGrid, cfg: &KernelConfig) -> Result<RadialProfile> {
    Ok(ProjectorKernel::p(window, bump)?.abel(grid, cfg)?.profile)
}

pub fn kernel_q(window: SpectralWindow, bump: BumpFamily, grid: &RadialGrid, cfg: &KernelConfig) -> Result<RadialProfile> {
    Ok(ProjectorKernel::q(window, bump)?.abel(grid, cfg)?.profile)
}

pub fn kernel_sigma(lambda: f64, y: f64, bump: BumpFamily, grid: &RadialGrid, cfg: &KernelConfig) -> Result<RadialProfile> {
    Ok(ProjectorKernel::sigma(lambda, y, bump)?.abel(grid, cfg)?.profile)
}

/// Both routes on a common grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualRouteReport {
    pub family: KernelFamily,
    pub abel: Vec<Complex64>,
    pub spectral: Vec<Complex64>,
    pub r: Vec<f64>,
    pub rel_sup_err: f64,
    /// (1 / 2 pi^2) ∫ |m| |c|^{-2} d mu, which bounds sup |K| over all radii.
    pub scale: f64,
    /// max |abel - spectral| / scale.
    pub scaled_err: f64,
}

/// Kernels whose sup on the grid is below this fraction of `scale` are at roundoff for
/// the spectral route, and only `scaled_err` carries information.
pub const DUAL_ROUTE_RESOLUTION: f64 = 1e-10;

impl DualRouteReport {
    pub fn resolved(&self) -> bool {
        let sup = self.abel.iter().chain(&self.spectral).map(|v| v.norm()).fold(0.0, f64::max);
        sup > DUAL_ROUTE_RESOLUTION * self.scale
    }
}

pub fn dual_route(kernel: &ProjectorKernel, grid: &RadialGrid, cfg: &KernelConfig) -> Result<DualRouteReport> {
    let a = kernel.abel(grid, cfg)?.profile;
    let s = kernel.spectral(grid, cfg)?;
    let rel_sup_err = rel_sup_error(&a.values, &s.values);
    let sym = kernel.symbol(cfg.spectral_tol);
    let abs_rule = SpectralRule::new(&sym.bands, sym.oscillation, &cfg.quad(), |mu| Complex64::new(sym.eval(mu).norm(), 0.0))?;
    let scale: f64 = abs_rule.coef.iter().map(|c| c.re).sum();
    let diff = a.values.iter().zip(&s.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    Ok(DualRouteReport {
        family: kernel.family,
        abel: a.values,
        spectral: s.values,
        r: grid.r.clone(),
        rel_sup_err,
        scale,
        scaled_err: diff / scale,
    })
}

/// `n` equally spaced radii on [0, r_max] with trapezoid weights.
pub fn uniform_grid(r_max: f64, n: usize) -> Result<RadialGrid> {
    if n < 2 || !(r_max > 0.0) {
        return invalid("uniform grid needs n >= 2 and r_max > 0");
    }
    RadialGrid::trapezoid((0..n).map(|k| r_max * k as f64 / (n - 1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projector::BumpKind;

    #[test]
    fn p_vanishes_beyond_support() {
        let w = SpectralWindow::new(50.0, 0.1).unwrap();
        let k = ProjectorKernel::p(w, BumpFamily::plateau()).unwrap();
        let grid = RadialGrid::trapezoid(vec![0.0, 19.9, 20.0, 25.0]).unwrap();
        let v = k.abel(&grid, &KernelConfig::default()).unwrap().profile.values;
        assert_eq!(v[2], Complex64::new(0.0, 0.0));
        assert_eq!(v[3], Complex64::new(0.0, 0.0));
        assert!(v[0].norm() > 0.0);
    }

    #[test]
    fn dual_routes_agree_for_p_and_q() {
        let cfg = KernelConfig::default();
        for bump in [BumpFamily::plateau(), BumpFamily::build(BumpKind::BSpline { order: 6 }).unwrap()] {
            let w = SpectralWindow::new(12.0, 0.5).unwrap();
            for k in [ProjectorKernel::p(w, bump).unwrap(), ProjectorKernel::q(w, bump).unwrap()] {
                let grid = uniform_grid(k.support().min(20.0), 30).unwrap();
                let rep = dual_route(&k, &grid, &cfg).unwrap();
                assert!(rep.rel_sup_err < 1e-6, "{:?}: {}", k.family, rep.rel_sup_err);
            }
        }
    }

    #[test]
    fn sigma_support_and_dual_route() {
        let cfg = KernelConfig::default();
        let k = ProjectorKernel::sigma(8.0, 5.0, BumpFamily::plateau()).unwrap();
        let grid = RadialGrid::trapezoid(vec![0.0, 0.1, 0.5, 1.0, 1.5, 1.99, 2.0, 3.0]).unwrap();
        let rep = dual_route(&k, &grid, &cfg).unwrap();
        assert!(rep.rel_sup_err < 1e-6, "{}", rep.rel_sup_err);
        assert_eq!(rep.abel[7], Complex64::new(0.0, 0.0));
        assert!(rep.spectral[5].norm() < 1e-6 * rep.spectral[0].norm().max(1.0));
    }

    #[test]
    fn hat_derivative_matches_differences() {
        let w = SpectralWindow::new(7.0, 0.3).unwrap();
        let ks = [
            ProjectorKernel::p(w, BumpFamily::plateau()).unwrap(),
            ProjectorKernel::q(w, BumpFamily::plateau()).unwrap(),
            ProjectorKernel::sigma(9.0, 1.5, BumpFamily::plateau()).unwrap(),
        ];
        for k in ks {
            for s in [0.05, 0.3, 0.9, 1.4] {
                let h = 1e-6;
                let fd = (k.hat(s + h) - k.hat(s - h)) / (2.0 * h);
                let d = k.hat_deriv(s);
                assert!((fd - d).norm() < 1e-6 * (1.0 + d.norm()), "{:?} s={s}: {fd} vs {d}", k.family);
            }
        }
    }

    #[test]
    fn k0_definition() {
        assert_eq!(dyadic_k0(2.0), -1);
        assert_eq!(dyadic_k0(3.0), -2);
        assert_eq!(dyadic_k0(8.0), -3);
        for l in [1.5, 2.0, 5.0, 100.0, 511.0] {
            let k0 = dyadic_k0(l);
            assert!(2f64.powi(-k0) >= l && l > 2f64.powi(-k0 - 1));
        }
    }
}
