//! Cutoff functions chi with compactly supported Fourier transform, and the
//! Littlewood-Paley differences psi = chi - chi(./2)/2.
//!
//! Fourier convention: chi(x) = (2 pi)^{-1/2} ∫ chi_hat(s) e^{i s x} ds.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Shape of the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BumpKind {
    /// chi_hat = 1 on [-1, 1], smooth step to 0 on 1 <= |s| <= 2 built from e^{-1/x}.
    Plateau,
    /// chi(x) = sinc(x / m)^m, chi_hat a B-spline supported in [-1, 1].
    BSpline { order: u32 },
    /// (sinc(x / m)^m + sinc(x / (m sqrt 2))^m) / 2 with m even: strictly positive,
    /// chi(0) = 1, chi_hat supported in [-1, 1].
    PositiveBSpline { order: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BumpFamily {
    pub kind: BumpKind,
}

impl BumpFamily {
    pub fn build(kind: BumpKind) -> Result<Self> {
        match kind {
            BumpKind::Plateau => {}
            BumpKind::BSpline { order } | BumpKind::PositiveBSpline { order } => {
                if !(4..=12).contains(&order) || order % 2 == 1 {
                    return invalid(format!("B-spline order {order} must be even in 4..=12"));
                }
            }
        }
        Ok(BumpFamily { kind })
    }

    pub fn plateau() -> Self {
        BumpFamily { kind: BumpKind::Plateau }
    }

    /// Radius of the support of chi_hat.
    pub fn hat_support(&self) -> f64 {
        match self.kind {
            BumpKind::Plateau => 2.0,
            _ => 1.0,
        }
    }

    pub fn chi(&self, x: f64) -> f64 {
        match self.kind {
            BumpKind::Plateau => plateau_table().chi(x),
            BumpKind::BSpline { order } => sinc_pow(x / order as f64, order),
            BumpKind::PositiveBSpline { order } => {
                let m = order as f64;
                0.5 * (sinc_pow(x / m, order) + sinc_pow(x / (m * std::f64::consts::SQRT_2), order))
            }
        }
    }

    pub fn chi_hat(&self, s: f64) -> f64 {
        match self.kind {
            BumpKind::Plateau => plateau_step(s),
            BumpKind::BSpline { order } => bspline_hat(s, order),
            BumpKind::PositiveBSpline { order } => {
                let r2 = std::f64::consts::SQRT_2;
                0.5 * (bspline_hat(s, order) + r2 * bspline_hat(r2 * s, order))
            }
        }
    }

    pub fn chi_hat_deriv(&self, s: f64) -> f64 {
        match self.kind {
            BumpKind::Plateau => plateau_step_deriv(s),
            BumpKind::BSpline { order } => bspline_hat_deriv(s, order),
            BumpKind::PositiveBSpline { order } => {
                let r2 = std::f64::consts::SQRT_2;
                0.5 * (bspline_hat_deriv(s, order) + 2.0 * bspline_hat_deriv(r2 * s, order))
            }
        }
    }

    pub fn psi(&self, x: f64) -> f64 {
        self.chi(x) - 0.5 * self.chi(x / 2.0)
    }

    pub fn psi_hat(&self, s: f64) -> f64 {
        self.chi_hat(s) - self.chi_hat(2.0 * s)
    }

    pub fn psi_hat_deriv(&self, s: f64) -> f64 {
        self.chi_hat_deriv(s) - 2.0 * self.chi_hat_deriv(2.0 * s)
    }

    /// A radius X with |chi(x)| <= tol * chi(0) for |x| >= X.
    pub fn tail_radius(&self, tol: f64) -> f64 {
        let tol = tol.max(1e-30);
        match self.kind {
            BumpKind::Plateau => plateau_table().tail_radius(tol),
            BumpKind::BSpline { order } => {
                let m = order as f64;
                m * tol.powf(-1.0 / m)
            }
            BumpKind::PositiveBSpline { order } => {
                let m = order as f64;
                m * std::f64::consts::SQRT_2 * tol.powf(-1.0 / m)
            }
        }
    }

    /// A radius beyond which |psi(x)| <= tol * chi(0).
    pub fn psi_tail_radius(&self, tol: f64) -> f64 {
        2.0 * self.tail_radius(tol / 2.0)
    }

    /// Largest frequency at which chi oscillates, i.e. the support radius of chi_hat.
    pub fn oscillation(&self) -> f64 {
        self.hat_support()
    }
}

fn sinc_pow(u: f64, m: u32) -> f64 {
    let s = if u.abs() < 1e-8 { 1.0 - u * u / 6.0 } else { u.sin() / u };
    s.powi(m as i32)
}

fn binom(m: u32, k: u32) -> f64 {
    let mut v = 1.0;
    for j in 0..k {
        v = v * (m - j) as f64 / (j + 1) as f64;
    }
    v
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Irwin-Hall density of order m and its derivative, evaluated on the left half.
fn irwin_hall(y: f64, m: u32, deriv: bool) -> f64 {
    let mf = m as f64;
    if y <= 0.0 || y >= mf {
        return 0.0;
    }
    let (yy, sign) = if y > mf / 2.0 { (mf - y, if deriv { -1.0 } else { 1.0 }) } else { (y, 1.0) };
    let pw = if deriv { m - 2 } else { m - 1 };
    let mut acc = 0.0;
    let mut k = 0u32;
    while (k as f64) < yy && k <= m {
        let term = binom(m, k) * (yy - k as f64).powi(pw as i32);
        acc += if k % 2 == 0 { term } else { -term };
        k += 1;
    }
    sign * acc / factorial(pw)
}

fn bspline_hat(s: f64, m: u32) -> f64 {
    let mf = m as f64;
    (2.0 * PI).sqrt() * (mf / 2.0) * irwin_hall((mf * s + mf) / 2.0, m, false)
}

fn bspline_hat_deriv(s: f64, m: u32) -> f64 {
    if m < 2 {
        return 0.0;
    }
    let mf = m as f64;
    (2.0 * PI).sqrt() * (mf / 2.0).powi(2) * irwin_hall((mf * s + mf) / 2.0, m, true)
}

/// Smooth even step: 1 on [-1, 1], 0 outside [-2, 2], 1/(1 + e^E) in between with
/// E = 1/(2 - |s|) - 1/(|s| - 1).
pub fn plateau_step(s: f64) -> f64 {
    let a = s.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let e = 1.0 / (2.0 - a) - 1.0 / (a - 1.0);
        logistic(-e)
    }
}

fn plateau_step_deriv(s: f64) -> f64 {
    let a = s.abs();
    if a <= 1.0 || a >= 2.0 {
        return 0.0;
    }
    let e = 1.0 / (2.0 - a) - 1.0 / (a - 1.0);
    let de = 1.0 / (2.0 - a).powi(2) + 1.0 / (a - 1.0).powi(2);
    let d = -logistic(e) * logistic(-e) * de;
    if s < 0.0 {
        -d
    } else {
        d
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// chi for the plateau kind by the trapezoid rule on the cached grid s_k = k h: the
/// integrand is smooth and compactly supported, so the only error is aliasing from
/// chi(2 pi / h - x), negligible for |x| <= X_TABLE.
///
/// Evaluations interpolate a sampled copy: chi is band-limited to [-2, 2], so a
/// STENCIL-point Lagrange fit at spacing SAMPLE_STEP is exact to roundoff.
struct PlateauTable {
    h: f64,
    coef: Vec<f64>,
    samples: Vec<f64>,
    envelope_step: f64,
    envelope: Vec<f64>,
}

const X_TABLE: f64 = 4096.0;
const RESYNC: usize = 32;
const SAMPLE_STEP: f64 = 1.0 / 32.0;
const STENCIL: usize = 10;

fn plateau_table() -> &'static PlateauTable {
    static T: OnceLock<PlateauTable> = OnceLock::new();
    T.get_or_init(PlateauTable::new)
}

impl PlateauTable {
    fn new() -> Self {
        let h = 2.0 * PI / (X_TABLE + 1024.0);
        let n = (2.0 / h).floor() as usize;
        let scale = (2.0 / PI).sqrt() * h;
        let mut coef: Vec<f64> = (0..=n).map(|k| plateau_step(k as f64 * h) * scale).collect();
        coef[0] *= 0.5;
        let mut t = PlateauTable { h, coef, samples: Vec::new(), envelope_step: 4.0, envelope: Vec::new() };
        let m = (X_TABLE / SAMPLE_STEP) as usize + STENCIL;
        t.samples = (0..=m).map(|j| t.chi_sum(j as f64 * SAMPLE_STEP)).collect();
        t.envelope = t.build_envelope();
        t
    }

    fn chi(&self, x: f64) -> f64 {
        let x = x.abs();
        // |chi| decays like exp(-c sqrt x) with c > 1.5; past X_TABLE it sits below 1e-40,
        // far under the aliasing floor of the table itself.
        if x > X_TABLE {
            return 0.0;
        }
        let t = x / SAMPLE_STEP;
        let base = t.floor() as isize - (STENCIL as isize / 2 - 1);
        // Barycentric form on equispaced nodes, weights (-1)^j binom(STENCIL - 1, j).
        let (mut num, mut den) = (0.0, 0.0);
        let mut w = 1.0;
        for j in 0..STENCIL {
            let idx = base + j as isize;
            let v = self.samples[idx.unsigned_abs()];
            let d = t - idx as f64;
            if d == 0.0 {
                return v;
            }
            let q = w / d;
            num += q * v;
            den += q;
            w *= -((STENCIL - 1 - j) as f64) / (j + 1) as f64;
        }
        num / den
    }

    /// The trapezoid sum itself.
    fn chi_sum(&self, x: f64) -> f64 {
        let theta = self.h * x;
        let (sn, cs) = theta.sin_cos();
        let mut acc = 0.0;
        let mut re = 1.0;
        let mut im = 0.0;
        for (k, c) in self.coef.iter().enumerate() {
            if k % RESYNC == 0 {
                let (s, cc) = (k as f64 * theta).sin_cos();
                re = cc;
                im = s;
            }
            acc += c * re;
            let nre = re * cs - im * sn;
            im = re * sn + im * cs;
            re = nre;
        }
        acc
    }

    /// envelope[j] = sup_{x >= j * step} |chi(x)| on a fine scan.
    fn build_envelope(&self) -> Vec<f64> {
        let m = (X_TABLE / self.envelope_step) as usize;
        let mut env = vec![0.0; m + 1];
        let mut running: f64 = 0.0;
        let dx = 0.125;
        let per = (self.envelope_step / dx) as usize;
        for j in (0..=m).rev() {
            if j < m {
                for i in 0..per {
                    let x = j as f64 * self.envelope_step + i as f64 * dx;
                    running = running.max(self.chi(x).abs());
                }
            }
            env[j] = running;
        }
        env
    }

    fn tail_radius(&self, tol: f64) -> f64 {
        let thr = tol * self.chi(0.0);
        for (j, e) in self.envelope.iter().enumerate() {
            if *e <= thr {
                return j as f64 * self.envelope_step;
            }
        }
        X_TABLE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_interpolation_matches_the_sum() {
        let t = plateau_table();
        let mut worst: f64 = 0.0;
        for k in 0..20000 {
            let x = k as f64 * 0.2047 + 1e-3 * (k % 7) as f64;
            worst = worst.max((t.chi(x) - t.chi_sum(x)).abs());
        }
        assert!(worst < 1e-14, "{worst}");
    }

    #[test]
    fn plateau_chi_reference_values() {
        // Reference values from 40-digit quadrature of the defining integral.
        let refs = [
            (0.0, 1.1968268412042980),
            (5.0, 0.10505236437238509),
            (8.0, -0.019603599420613602),
            (16.0, 0.0042661144910364465),
            (40.0, -4.3357334420244041e-6),
            (100.0, -2.2641605948237807e-9),
            (160.0, 2.6975087593311335e-9),
            (256.0, 5.5785928743681266e-12),
            (320.0, -6.75156603453e-13),
        ];
        let b = BumpFamily::plateau();
        for (x, v) in refs {
            let got = b.chi(x);
            assert!((got - v).abs() < 1e-14 + 1e-9 * v.abs(), "x={x}: {got} vs {v}");
        }
        assert!((b.chi(5000.0)).abs() < 1e-15);
    }

    #[test]
    fn bspline_transform_pair() {
        // chi(x) = (2 pi)^{-1/2} ∫ chi_hat(s) cos(s x) ds.
        for kind in [
            BumpKind::BSpline { order: 4 },
            BumpKind::PositiveBSpline { order: 4 },
            BumpKind::Plateau,
        ] {
            let b = BumpFamily::build(kind).unwrap();
            let r = b.hat_support();
            for x in [0.0, 0.7, 3.0, 11.0] {
                let (v, _) = crate::quad::integrate_adaptive_breaks(
                    |s: f64| b.chi_hat(s) * (s * x).cos(),
                    &[-r, -1.0, -0.5, 0.0, 0.5, 1.0, r],
                    1e-14,
                    1e-13,
                    2000,
                )
                .unwrap();
                let v = v / (2.0 * PI).sqrt();
                assert!((v - b.chi(x)).abs() < 1e-11, "{kind:?} x={x}: {v} vs {}", b.chi(x));
            }
        }
    }

    #[test]
    fn hat_derivatives_match_differences() {
        for kind in [BumpKind::BSpline { order: 6 }, BumpKind::PositiveBSpline { order: 8 }, BumpKind::Plateau] {
            let b = BumpFamily::build(kind).unwrap();
            for s in [0.13, 0.4, 0.77, 1.3, 1.61, -1.2] {
                let h = 1e-5;
                let fd = (b.chi_hat(s + h) - b.chi_hat(s - h)) / (2.0 * h);
                assert!((fd - b.chi_hat_deriv(s)).abs() < 1e-6, "{kind:?} s={s}");
            }
        }
    }

    #[test]
    fn positive_variant_is_positive() {
        let b = BumpFamily::build(BumpKind::PositiveBSpline { order: 4 }).unwrap();
        assert_eq!(b.chi(0.0), 1.0);
        for k in 0..4000 {
            let x = k as f64 * 0.05;
            assert!(b.chi(x) > 0.0, "x={x}");
        }
        assert!(BumpFamily::build(BumpKind::PositiveBSpline { order: 3 }).is_err());
        assert!(BumpFamily::build(BumpKind::BSpline { order: 5 }).is_err());
        assert!(BumpFamily::build(BumpKind::BSpline { order: 2 }).is_err());
    }

    #[test]
    fn tail_radius_is_honest() {
        let b = BumpFamily::plateau();
        let x0 = b.tail_radius(1e-10);
        assert!(x0 > 50.0 && x0 < 400.0);
        for k in 0..400 {
            let x = x0 + k as f64 * 0.37;
            assert!(b.chi(x).abs() <= 1e-10 * b.chi(0.0) * 1.01);
        }
    }
}
