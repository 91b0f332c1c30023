//! Parabolic cylinder witness f(y) = eta y^{1/2 - i lambda} phi_hat(eta log y): finite L^2 norm,
//! L^p norms that grow without bound as the truncation height increases.
//!
//! The x-period is 1 and the measure is dx dy / y^2, so with u = log y
//!   ||f||_2^2 = eta ∫ |phi_hat(v)|^2 dv,
//!   ||f||_p^p = eta^p ∫ e^{(p/2 - 1) u} |phi_hat(eta u)|^p du.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::examples::{fit_exponent, ExponentFit};
use crate::projector::SpectralWindow;
use crate::quad::integrate_adaptive;

/// phi_hat(u) = amplitude (1 + |u|)^{-alpha}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspProfile {
    pub window: SpectralWindow,
    pub alpha: f64,
    pub amplitude: f64,
}

impl CuspProfile {
    pub fn new(window: SpectralWindow, alpha: f64) -> Result<Self> {
        Self::with_amplitude(window, alpha, 1.0)
    }

    pub fn with_amplitude(window: SpectralWindow, alpha: f64, amplitude: f64) -> Result<Self> {
        if !(alpha > 0.5) || !alpha.is_finite() {
            return invalid(format!("alpha = {alpha} must exceed 1/2 for a square-integrable profile"));
        }
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return invalid("amplitude must be positive and finite");
        }
        Ok(CuspProfile { window, alpha, amplitude })
    }

    pub fn phi_hat(&self, u: f64) -> f64 {
        self.amplitude * (1.0 + u.abs()).powf(-self.alpha)
    }

    /// ||phi_hat||_2 in closed form: 2 A^2 / (2 alpha - 1).
    pub fn phi_hat_l2(&self) -> f64 {
        (2.0 * self.amplitude * self.amplitude / (2.0 * self.alpha - 1.0)).sqrt()
    }
}

pub fn cusp_field(profile: &CuspProfile, y: f64) -> Complex64 {
    cusp_field_log(profile, y.ln())
}

/// f at y = e^u, usable where y itself overflows.
pub fn cusp_field_log(profile: &CuspProfile, u: f64) -> Complex64 {
    let (l, e) = (profile.window.lambda, profile.window.eta);
    Complex64::from_polar(e * (0.5 * u).exp() * profile.phi_hat(e * u), -l * u)
}

/// |f(e^u)|^2 / e^u, the L^2 density against du.
fn l2_density(profile: &CuspProfile, u: f64) -> f64 {
    let (e, p) = (profile.window.eta, profile);
    let m = e * p.phi_hat(e * u);
    m * m
}

/// ||f||_{L^2} by quadrature of |f|^2 dy / y^2.
///
/// On each half-line u = ±(e^w - 1) / eta turns the power tail into e^{(1 - 2 alpha) w};
/// the rest beyond w = W is bounded in closed form.
pub fn cusp_l2(profile: &CuspProfile) -> Result<f64> {
    let e = profile.window.eta;
    let decay = 2.0 * profile.alpha - 1.0;
    let w_end = 40.0 / decay;
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        let g = |w: f64| {
            let u = sign * w.exp_m1() / e;
            l2_density(profile, u) * w.exp() / e
        };
        let (v, _) = integrate_adaptive(g, 0.0, w_end, 0.0, 1e-13, 4000)?;
        total += v;
    }
    // Beyond W the density in w is eta A^2 e^{(1 - 2 alpha) w} exactly.
    let tail = 2.0 * e * profile.amplitude.powi(2) * (-decay * w_end).exp() / decay;
    total += tail;
    if !total.is_finite() {
        return Err(Error::Diverged("cusp L^2 norm".into()));
    }
    Ok(total.sqrt())
}

/// η^{1/2} ||phi_hat||_2.
pub fn cusp_l2_closed(profile: &CuspProfile) -> f64 {
    profile.window.eta.sqrt() * profile.phi_hat_l2()
}

/// ||f||_{L^p} over the part y <= e^U of the cylinder.
pub fn cusp_lp_truncated(profile: &CuspProfile, p: f64, big_u: f64) -> Result<f64> {
    if !(p >= 2.0) || !p.is_finite() {
        return invalid(format!("p = {p} must be finite and at least 2"));
    }
    if !big_u.is_finite() {
        return invalid("truncation height must be finite");
    }
    let e = profile.window.eta;
    let k = p / 2.0 - 1.0;
    let dens = |u: f64| (k * u).exp() * profile.phi_hat(e * u).powf(p);
    let integral = if k > 0.0 {
        // Below u = lo the density is at most A^p e^{k u}.
        let lo = big_u.min(0.0) - 40.0 / k;
        let breaks: Vec<f64> = {
            let n = ((big_u - lo) / 5.0).ceil().max(1.0) as usize;
            (0..=n).map(|j| lo + (big_u - lo) * j as f64 / n as f64).collect()
        };
        let mut acc = 0.0;
        for w in breaks.windows(2) {
            acc += integrate_adaptive(dens, w[0], w[1], 0.0, 1e-13, 2000)?.0;
        }
        acc + profile.amplitude.powf(p) * (k * lo).exp() / k
    } else {
        // p = 2: the power tail as in cusp_l2, cut at u = U on the upper side.
        let decay = p * profile.alpha - 1.0;
        if !(decay > 0.0) {
            return Err(Error::Diverged("p alpha <= 1".into()));
        }
        let w_end = 40.0 / decay;
        let g = |w: f64| dens(-w.exp_m1() / e) * w.exp() / e;
        let (below, _) = integrate_adaptive(g, 0.0, w_end, 0.0, 1e-13, 4000)?;
        let below = below + profile.amplitude.powf(p) * (-decay * w_end).exp() / (decay * e);
        let above = if big_u > 0.0 {
            let w_top = (e * big_u).ln_1p();
            let g = |w: f64| dens(w.exp_m1() / e) * w.exp() / e;
            integrate_adaptive(g, 0.0, w_top, 0.0, 1e-13, 4000)?.0
        } else {
            -integrate_adaptive(dens, big_u, 0.0, 0.0, 1e-13, 4000)?.0
        };
        below + above
    };
    Ok(e * integral.powf(1.0 / p))
}

/// One row of the divergence CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub p: f64,
    pub alpha: f64,
    pub eta: f64,
    pub big_u: f64,
    pub lp_truncated: f64,
    /// d log(value) / dU between this row and the previous one.
    pub slope_estimate: Option<f64>,
}

pub const DIVERGENCE_CSV_HEADER: &str = "p,alpha,eta,U,lp_truncated,slope_estimate";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub rows: Vec<DivergenceRow>,
    /// Least-squares slope of log(value) against U.
    pub slope: f64,
    pub target: f64,
    pub l2: f64,
    pub l2_closed: f64,
}

impl DivergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(DIVERGENCE_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let sl = r.slope_estimate.map(|v| v.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{},{:e},{}\n", r.p, r.alpha, r.eta, r.big_u, r.lp_truncated, sl));
        }
        s
    }
}

/// Truncated L^p norms along `u_grid` and the fitted growth rate of their logarithm.
pub fn cusp_divergence(profile: &CuspProfile, p: f64, u_grid: &[f64]) -> Result<DivergenceReport> {
    if u_grid.len() < 2 {
        return Err(Error::InsufficientData("divergence fit needs two heights".into()));
    }
    let mut rows: Vec<DivergenceRow> = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        let v = cusp_lp_truncated(profile, p, u)?;
        let slope_estimate = rows.last().map(|r| (v.ln() - r.lp_truncated.ln()) / (u - r.big_u));
        rows.push(DivergenceRow { p, alpha: profile.alpha, eta: profile.window.eta, big_u: u, lp_truncated: v, slope_estimate });
    }
    // log(value) is linear in U, so fit it against U itself: e^U as the scale.
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.big_u.exp(), r.lp_truncated)).collect();
    let slope = if pairs.len() >= 3 {
        fit_exponent(&pairs).map(|f: ExponentFit| f.slope)?
    } else {
        rows[1].slope_estimate.unwrap_or(f64::NAN)
    };
    Ok(DivergenceReport { rows, slope, target: 0.5 - 1.0 / p, l2: cusp_l2(profile)?, l2_closed: cusp_l2_closed(profile) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(alpha: f64, eta: f64) -> CuspProfile {
        CuspProfile::new(SpectralWindow::new(20.0, eta).unwrap(), alpha).unwrap()
    }

    #[test]
    fn field_values() {
        let p = profile(0.75, 0.1);
        assert!((cusp_field(&p, 1.0) - Complex64::new(0.1, 0.0)).norm() < 1e-15);
        let y = (1.0f64 / 0.1).exp();
        let want = 0.1 * (0.5f64 / 0.1).exp() * p.phi_hat(1.0);
        assert!((cusp_field(&p, y).norm() - want).abs() < 1e-12 * want);
        let q = CuspProfile { window: SpectralWindow::new(3.0, 0.1).unwrap(), ..p };
        assert!((cusp_field(&q, 7.5).norm() - cusp_field(&p, 7.5).norm()).abs() < 1e-15);
    }

    #[test]
    fn l2_matches_closed_form() {
        let p = profile(1.0, 0.1);
        let v = cusp_l2(&p).unwrap();
        assert!((v - 0.1f64.sqrt() * 2f64.sqrt()).abs() < 1e-8 * v);
        for eta in [0.02, 0.1, 0.5] {
            let p = profile(0.75, eta);
            assert!((cusp_l2(&p).unwrap() / cusp_l2_closed(&p) - 1.0).abs() < 1e-8);
        }
        let a = cusp_l2(&profile(0.75, 0.1)).unwrap();
        let b = cusp_l2(&CuspProfile::with_amplitude(SpectralWindow::new(20.0, 0.1).unwrap(), 0.75, 2.0).unwrap()).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-10 * b);
        assert!(CuspProfile::new(SpectralWindow::new(1.0, 0.1).unwrap(), 0.5).is_err());
    }

    #[test]
    fn l2_eta_slope_is_one_half() {
        let a = cusp_l2(&profile(0.75, 0.05)).unwrap();
        let b = cusp_l2(&profile(0.75, 0.2)).unwrap();
        assert!(((b / a).ln() / 4f64.ln() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn truncated_lp_grows() {
        let p = profile(0.75, 0.1);
        let v20 = cusp_lp_truncated(&p, 4.0, 20.0).unwrap();
        let v40 = cusp_lp_truncated(&p, 4.0, 40.0).unwrap();
        assert!(v40 / v20 > (0.25f64 * 15.0).exp());
        let r = cusp_divergence(&p, 4.0, &[30.0, 40.0, 50.0, 60.0]).unwrap();
        assert!((r.slope - 0.25).abs() < 0.02, "{r:?}");
        assert!(r.rows[3].lp_truncated / r.rows[0].lp_truncated >= (0.25f64 * 25.0).exp());
    }

    #[test]
    fn p_two_converges() {
        let p = profile(0.75, 0.1);
        let a = cusp_lp_truncated(&p, 2.0, 1e3).unwrap();
        let b = cusp_lp_truncated(&p, 2.0, 1e6).unwrap();
        let full = cusp_l2(&p).unwrap();
        assert!(a < b && b < full * (1.0 + 1e-12));
        // The part above U is eta A^2 ∫_{eta U}^∞ (1+v)^{-3/2} dv = 2 eta A^2 (1 + eta U)^{-1/2}.
        let rest = 2.0 * 0.1 * (1.0 + 0.1 * 1e6f64).powf(-0.5);
        assert!((full * full - b * b - rest).abs() < 1e-9 * full * full);
    }
}
