//! Gamma function, Harish-Chandra c-function, Plancherel density and the
//! spherical functions phi_lambda(r), computed along two independent routes.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{abel_lower_nodes, NodeSet, QuadConfig};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// log sin(w) without overflow for large |Im w|.
fn ln_sin(w: Complex64) -> Result<Complex64> {
    let i = Complex64::i();
    if w.im > 20.0 {
        Ok(c(0.0, 0.5).ln() - i * w + (-(i * w * 2.0).exp()).ln_1p_c())
    } else if w.im < -20.0 {
        Ok(c(0.0, -0.5).ln() + i * w + (-(-i * w * 2.0).exp()).ln_1p_c())
    } else {
        let s = w.sin();
        if s.norm() == 0.0 {
            return Err(Error::Pole(w.re / PI));
        }
        Ok(s.ln())
    }
}

trait Ln1p {
    fn ln_1p_c(self) -> Complex64;
}

impl Ln1p for Complex64 {
    fn ln_1p_c(self) -> Complex64 {
        if self.norm() < 1e-8 {
            self - self * self / 2.0
        } else {
            (self + 1.0).ln()
        }
    }
}

/// log Gamma(z) on the principal sheet of the Lanczos form; the imaginary part is only
/// meaningful modulo 2 pi.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return invalid("non-finite gamma argument");
    }
    if is_pole(z) {
        return Err(Error::Pole(z.re));
    }
    if z.re < 0.5 {
        // Reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z).
        let rest = ln_gamma(c(1.0, 0.0) - z)?;
        return Ok(c(PI.ln(), 0.0) - ln_sin(z * PI)? - rest);
    }
    let z = z - 1.0;
    let mut x = c(LANCZOS[0], 0.0);
    for (i, coef) in LANCZOS.iter().enumerate().skip(1) {
        x += *coef / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(c(0.5 * (2.0 * PI).ln(), 0.0) + (z + 0.5) * t.ln() - t + x.ln())
}

/// Gamma(z) for complex z; non-positive integers are poles.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(ln_gamma(z)?.exp())
}

/// Harish-Chandra c-function c(lambda) = Gamma(i lambda) / (sqrt(pi) Gamma(1/2 + i lambda)).
pub fn c_function(lambda: Complex64) -> Result<Complex64> {
    let i = Complex64::i();
    let num = ln_gamma(i * lambda)?;
    let den = ln_gamma(i * lambda + 0.5)?;
    Ok((num - den).exp() / PI.sqrt())
}

/// |c(lambda)|^{-2} for real lambda through the gamma function, in log space.
pub fn plancherel_density(lambda: f64) -> Result<f64> {
    if !lambda.is_finite() {
        return invalid("non-finite spectral parameter");
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let a = ln_gamma(c(0.5, lambda))?.re;
    let b = ln_gamma(c(0.0, lambda))?.re;
    Ok(PI * (2.0 * (a - b)).exp())
}

/// Closed form pi lambda tanh(pi lambda) of the Plancherel density.
pub fn plancherel_closed(lambda: f64) -> f64 {
    PI * lambda * (PI * lambda).tanh()
}

/// C(lambda) = Gamma(1/2 + i lambda) / (2 sqrt(pi) Gamma(1 + i lambda)).
pub fn big_c(lambda: f64) -> Complex64 {
    let a = ln_gamma(c(0.5, lambda)).expect("Re > 0 has no poles");
    let b = ln_gamma(c(1.0, lambda)).expect("Re > 0 has no poles");
    (a - b).exp() / (2.0 * PI.sqrt())
}

/// Which integral representation evaluates phi_lambda.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiRoute {
    /// (sqrt 2 / pi) ∫_0^r cos(lambda s) (cosh r - cosh s)^{-1/2} ds.
    Mechanism,
    /// (1 / pi) ∫_0^pi (cosh r - sinh r cos theta)^{i lambda - 1/2} d theta.
    Integral,
}

fn check_strip(lambda: Complex64, r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return invalid(format!("radius {r} must be finite and non-negative"));
    }
    if !lambda.re.is_finite() || !lambda.im.is_finite() {
        return invalid("non-finite spectral parameter");
    }
    if lambda.im.abs() > 0.5 + 1e-12 {
        return Err(Error::OutOfStrip(lambda.im));
    }
    Ok(())
}

/// Spherical function phi_lambda(r) for |Im lambda| <= 1/2.
///
/// Each route is evaluated at two resolutions; disagreement beyond 1e-10 is reported as
/// an accuracy error.
pub fn spherical_function(lambda: Complex64, r: f64, route: PhiRoute) -> Result<Complex64> {
    check_strip(lambda, r)?;
    if r == 0.0 {
        return Ok(c(1.0, 0.0));
    }
    let cfg = QuadConfig::default();
    let eval = |cfg: &QuadConfig| match route {
        PhiRoute::Mechanism => phi_mechanism_raw(lambda, r, cfg),
        PhiRoute::Integral => phi_integral_raw(lambda, r, cfg),
    };
    let coarse = eval(&cfg);
    let fine = eval(&cfg.refined());
    let diff = (fine - coarse).norm();
    let tol = 1e-10 * (1.0 + fine.norm());
    if diff > tol || !fine.re.is_finite() {
        return Err(Error::Accuracy { achieved: diff, requested: tol });
    }
    Ok(fine)
}

fn phi_mechanism_raw(lambda: Complex64, r: f64, cfg: &QuadConfig) -> Complex64 {
    let ns = abel_lower_nodes(r, lambda.re.abs() + lambda.im.abs(), cfg);
    ns.sum(|s| (lambda * s).cos()) * (SQRT_2 / PI)
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// theta = 2 atan(e^v) turns the integral into
/// (1/pi) ∫ (cosh(r + v) / cosh v)^{i lambda - 1/2} sech v dv over the real line.
fn phi_integral_raw(lambda: Complex64, r: f64, cfg: &QuadConfig) -> Complex64 {
    let expo = Complex64::i() * lambda - 0.5;
    let v_lo = -(40.0 + 2.0 * r);
    let v_hi = 40.0 + r;
    let freq = 2.0 * lambda.re.abs();
    let mut ns = NodeSet::default();
    let n = cfg.panel_count(v_hi - v_lo, freq);
    ns.push_panels(v_lo, v_hi, n, |_| 1.0);
    ns.sum(|v| {
        let l = ln_cosh(r + v) - ln_cosh(v);
        (expo * l).exp() * (1.0 / v.cosh())
    }) / PI
}

/// Mechanism-route node set for a fixed radius, reusable for every real lambda up to
/// the frequency it was sized for: phi_mu(r) = sum_k w_k cos(mu s_k).
#[derive(Debug, Clone)]
pub struct PhiNodes {
    pub r: f64,
    nodes: NodeSet,
}

impl PhiNodes {
    pub fn new(r: f64, mu_max: f64, cfg: &QuadConfig) -> Self {
        let mut nodes = abel_lower_nodes(r, mu_max, cfg);
        for w in nodes.w.iter_mut() {
            *w *= SQRT_2 / PI;
        }
        PhiNodes { r, nodes }
    }

    pub fn eval(&self, mu: f64) -> f64 {
        if self.r == 0.0 {
            return 1.0;
        }
        let mut acc = 0.0;
        for (s, w) in self.nodes.x.iter().zip(&self.nodes.w) {
            acc += w * (mu * s).cos();
        }
        acc
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Large-radius expansion phi_lambda(r) = 2 Re(c(lambda) Phi_lambda(r)) for real lambda, with
/// Phi_lambda(r) = e^{(i lambda - 1/2) r} sum_k a_k e^{-2kr}, a_0 = 1. The coefficients come from
/// the radial equation phi'' + coth(r) phi' + (lambda^2 + 1/4) phi = 0.
#[derive(Debug, Clone)]
pub struct PhiExpansion {
    pub lambda: f64,
    a: Vec<Complex64>,
}

impl PhiExpansion {
    /// Smallest radius for which the stored coefficients reach double precision.
    pub const MIN_RADIUS: f64 = 1.0;
    /// Smallest radius `down_to` accepts.
    pub const SERIES_RADIUS: f64 = 0.01;

    pub fn new(lambda: f64) -> Self {
        Self::down_to(lambda, Self::MIN_RADIUS)
    }

    /// Coefficients enough for every r >= r_min; the k-th term is bounded by a multiple of
    /// k^{-1/2} e^{-2kr}, so the count grows like 1 / r_min.
    pub fn down_to(lambda: f64, r_min: f64) -> Self {
        let r_min = r_min.max(Self::SERIES_RADIUS);
        let cap = (21.0 / r_min).ceil() as usize;
        let nu = c(-0.5, lambda);
        let mut a = vec![c(1.0, 0.0)];
        let mut s = nu;
        let q = (-2.0 * r_min).exp();
        let mut pw = 1.0;
        let mut k = 1usize;
        loop {
            let ak = -s / (c(k as f64, -lambda) * (2.0 * k as f64));
            s += ak * (nu - 2.0 * k as f64);
            a.push(ak);
            pw *= q;
            if ak.norm_sqr() * pw * pw < 1e-36 || k >= cap {
                break;
            }
            k += 1;
        }
        PhiExpansion { lambda, a }
    }

    /// Phi_lambda(r) for r at or above the radius the coefficients were built for.
    pub fn big_phi(&self, r: f64) -> Complex64 {
        let q = (-2.0 * r).exp();
        let mut acc = c(0.0, 0.0);
        let mut pw = 1.0;
        for ak in &self.a {
            let t = *ak * pw;
            acc += t;
            if t.norm_sqr() < 1e-36 * acc.norm_sqr() {
                break;
            }
            pw *= q;
        }
        acc * (c(-0.5, self.lambda) * r).exp()
    }

    pub fn phi(&self, r: f64) -> Result<f64> {
        if r < Self::MIN_RADIUS {
            return invalid(format!("expansion needs r >= {}, got {r}", Self::MIN_RADIUS));
        }
        if self.lambda == 0.0 {
            return invalid("expansion is degenerate at lambda = 0");
        }
        Ok(2.0 * (c_function(c(self.lambda, 0.0))? * self.big_phi(r)).re)
    }
}

/// phi_{-i eps}(r) e^{(1/2 - eps) r} on a radial grid, and the band it occupies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StripReport {
    pub epsilon: f64,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub ratio: Vec<f64>,
    pub band_min: f64,
    pub band_max: f64,
    /// The lower bound e^{-(1/2 - eps) r} <= phi_{-i eps}(r) held at every radius.
    pub lower_bound_holds: bool,
    /// eps * band_max, which the upper bound keeps of order one.
    pub scaled_upper: f64,
}

pub fn strip_decay_check(epsilon: f64, r_grid: &[f64]) -> Result<StripReport> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return invalid(format!("epsilon {epsilon} must lie in (0, 1/2]"));
    }
    if r_grid.is_empty() {
        return invalid("empty radial grid");
    }
    let lambda = c(0.0, -epsilon);
    let mut phi = Vec::with_capacity(r_grid.len());
    let mut ratio = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let v = spherical_function(lambda, r, PhiRoute::Integral)?.re;
        phi.push(v);
        ratio.push(v * ((0.5 - epsilon) * r).exp());
    }
    let band_min = ratio.iter().cloned().fold(f64::INFINITY, f64::min);
    let band_max = ratio.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(StripReport {
        epsilon,
        r: r_grid.to_vec(),
        phi,
        ratio,
        band_min,
        band_max,
        lower_bound_holds: band_min >= 1.0 - 1e-10,
        scaled_upper: epsilon * band_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn gamma_reference_values() {
        assert!(close(gamma(c(0.5, 0.0)).unwrap().re, PI.sqrt(), 1e-14));
        assert!(close(gamma(c(5.0, 0.0)).unwrap().re, 24.0, 1e-14));
        assert!(close(gamma(c(-0.5, 0.0)).unwrap().re, -2.0 * PI.sqrt(), 1e-13));
        // Gamma(i) = -0.1549498283018110 - 0.4980156681183560 i
        let g = gamma(c(0.0, 1.0)).unwrap();
        assert!((g.re + 0.154_949_828_301_811_0).abs() < 1e-14);
        assert!((g.im + 0.498_015_668_118_356_0).abs() < 1e-14);
    }

    #[test]
    fn gamma_poles() {
        for n in [0.0, -1.0, -7.0] {
            assert_eq!(gamma(c(n, 0.0)), Err(Error::Pole(n)));
        }
    }

    #[test]
    fn plancherel_matches_closed_form() {
        for l in [1e-6, 0.1, 1.0, 7.5, 100.0, 1000.0] {
            let g = plancherel_density(l).unwrap();
            assert!(close(g, plancherel_closed(l), 1e-10), "lambda={l}");
        }
        assert_eq!(plancherel_density(0.0).unwrap(), 0.0);
    }

    #[test]
    fn big_c_relation() {
        for l in [0.3, 2.0, 40.0] {
            let lhs = big_c(l);
            let rhs = Complex64::new(1.0, 0.0)
                / (Complex64::new(0.0, 2.0 * PI * l) * c_function(c(l, 0.0)).unwrap());
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
        }
        assert!((big_c(0.0).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn expansion_matches_integral_route() {
        for &l in &[0.05, 0.7, 3.0, 40.0, 250.0] {
            let e = PhiExpansion::new(l);
            for &r in &[1.0, 1.7, 4.0, 12.0] {
                let a = e.phi(r).unwrap();
                let b = spherical_function(c(l, 0.0), r, PhiRoute::Integral).unwrap().re;
                let scale = (-0.5 * r).exp() * (1.0 + r);
                assert!((a - b).abs() < 1e-11 * scale, "lambda={l} r={r}: {a} vs {b}");
            }
        }
        assert!(PhiExpansion::new(1.0).phi(0.5).is_err());
    }

    #[test]
    fn phi_special_values() {
        // phi_{-i/2} = phi_{i/2} = 1.
        for r in [0.5, 3.0, 20.0] {
            for route in [PhiRoute::Mechanism, PhiRoute::Integral] {
                let v = spherical_function(c(0.0, 0.5), r, route).unwrap();
                assert!((v.re - 1.0).abs() < 1e-11, "r={r} {route:?}: {v}");
            }
        }
        assert_eq!(spherical_function(c(3.0, 0.0), 0.0, PhiRoute::Integral).unwrap().re, 1.0);
        assert!(matches!(
            spherical_function(c(0.0, 0.6), 1.0, PhiRoute::Integral),
            Err(Error::OutOfStrip(_))
        ));
    }

    #[test]
    fn phi_routes_agree() {
        for &(l, r) in &[(0.0, 1.0), (0.5, 7.0), (3.0, 0.2), (12.0, 2.5), (40.0, 4.0), (1.0, 30.0)] {
            let a = spherical_function(c(l, 0.0), r, PhiRoute::Mechanism).unwrap();
            let b = spherical_function(c(l, 0.0), r, PhiRoute::Integral).unwrap();
            assert!((a - b).norm() < 1e-10, "lambda={l} r={r}: {a} vs {b}");
        }
        let l = c(2.0, -0.3);
        let a = spherical_function(l, 3.0, PhiRoute::Mechanism).unwrap();
        let b = spherical_function(l, 3.0, PhiRoute::Integral).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn phi_nodes_match_single_evaluation() {
        let cfg = QuadConfig::default();
        let nodes = PhiNodes::new(2.0, 50.0, &cfg);
        for mu in [0.0, 5.0, 49.0] {
            let a = nodes.eval(mu);
            let b = spherical_function(c(mu, 0.0), 2.0, PhiRoute::Integral).unwrap().re;
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn strip_band() {
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 1.5).collect();
        let rep = strip_decay_check(0.5, &grid).unwrap();
        assert!((rep.band_min - 1.0).abs() < 1e-10 && (rep.band_max - 1.0).abs() < 1e-10);
        let rep = strip_decay_check(0.1, &grid).unwrap();
        assert!(rep.lower_bound_holds);
        assert!(rep.scaled_upper < 2.0);
        assert!(strip_decay_check(0.0, &grid).is_err());
        assert!(strip_decay_check(0.6, &grid).is_err());
    }
}
