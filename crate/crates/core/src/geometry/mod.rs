//! Upper half-plane model: points, distances, Möbius maps, geodesics and Fermi
//! coordinates around the imaginary axis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

mod orbit;
pub use orbit::{
    critical_exponent_estimate, cyclic_poincare_closed_form, enumerate_orbit, poincare_partial_sum, word_distance_lower_bound, GroupKind,
    GroupPresentation, Orbit, OrbitPoint, PoincareSum,
};
pub(crate) use orbit::ols;

/// A point z = x + iy of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return invalid(format!("point ({x}, {y}) is not in the upper half-plane"));
        }
        Ok(Point { x, y })
    }

    /// Caller guarantees y > 0.
    pub(crate) fn raw(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn i() -> Self {
        Point { x: 0.0, y: 1.0 }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Point::new(z.re, z.im)
    }

    /// The dilation z -> e^a z.
    pub fn scaled(self, a: f64) -> Self {
        let e = a.exp();
        Point { x: e * self.x, y: e * self.y }
    }
}

/// Hyperbolic distance, computed as 2 asinh(|z - w| / (2 sqrt(y_z y_w))).
pub fn distance(z: Point, w: Point) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    let num = (dx * dx + dy * dy).sqrt();
    2.0 * (num / (2.0 * (z.y * w.y).sqrt())).asinh()
}

/// Hyperbolic distance, computed from cosh d = 1 + |z - w|^2 / (2 y_z y_w).
pub fn distance_via_cosh(z: Point, w: Point) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    (1.0 + (dx * dx + dy * dy) / (2.0 * z.y * w.y)).acosh()
}

/// Real Möbius map z -> (az + b)/(cz + d) normalized to determinant one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return invalid(format!("Möbius determinant {det} must be positive"));
        }
        let s = det.sqrt();
        Ok(Mobius { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub fn identity() -> Self {
        Mobius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// z -> e^l z.
    pub fn dilation(l: f64) -> Self {
        Mobius { a: (l / 2.0).exp(), b: 0.0, c: 0.0, d: (-l / 2.0).exp() }
    }

    /// The map taking the exterior of the geodesic |z - p| = rp onto the interior of
    /// |z - q| = rq.
    pub fn circle_pairing(p: f64, rp: f64, q: f64, rq: f64) -> Result<Self> {
        if !(rp > 0.0 && rq > 0.0) {
            return invalid("circle radii must be positive");
        }
        Mobius::new(q, -p * q - rp * rq, 1.0, -p)
    }

    pub fn apply(&self, z: Point) -> Point {
        let zc = z.to_complex();
        let w = (zc * self.a + self.b) / (zc * self.c + self.d);
        // Im w = y / |cz + d|^2 > 0 exactly; recompute it in that form.
        let den = (zc * self.c + self.d).norm_sqr();
        Point { x: w.re, y: z.y / den }
    }

    pub fn compose(&self, o: &Mobius) -> Mobius {
        Mobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Translation length 2 acosh(|tr| / 2); zero for non-hyperbolic maps.
    pub fn translation_length(&self) -> f64 {
        let t = self.trace().abs() / 2.0;
        if t <= 1.0 {
            0.0
        } else {
            2.0 * t.acosh()
        }
    }

    /// Isometric circle |cz + d| = 1, as a geodesic; `None` when c = 0.
    pub fn isometric_circle(&self) -> Option<Geodesic> {
        if self.c.abs() < 1e-300 {
            return None;
        }
        Some(Geodesic::Semicircle { center: -self.d / self.c, radius: 1.0 / self.c.abs() })
    }
}

/// A complete geodesic of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Geodesic {
    Semicircle { center: f64, radius: f64 },
    Vertical { x: f64 },
}

impl Geodesic {
    /// Hyperbolic distance from a point to the geodesic.
    pub fn distance_to(&self, z: Point) -> f64 {
        match *self {
            Geodesic::Semicircle { center, radius } => {
                let dx = z.x - center;
                ((dx * dx + z.y * z.y - radius * radius).abs() / (2.0 * radius * z.y)).asinh()
            }
            Geodesic::Vertical { x } => ((z.x - x).abs() / z.y).asinh(),
        }
    }

    /// Whether z lies strictly inside the half-disc bounded by a semicircle.
    pub fn encloses(&self, z: Point) -> bool {
        match *self {
            Geodesic::Semicircle { center, radius } => {
                let dx = z.x - center;
                dx * dx + z.y * z.y < radius * radius
            }
            Geodesic::Vertical { .. } => false,
        }
    }

    /// Distance between two geodesics; zero when they meet or are asymptotic.
    pub fn separation(&self, o: &Geodesic) -> f64 {
        let inv = match (*self, *o) {
            (
                Geodesic::Semicircle { center: c1, radius: r1 },
                Geodesic::Semicircle { center: c2, radius: r2 },
            ) => ((c1 - c2).powi(2) - r1 * r1 - r2 * r2).abs() / (2.0 * r1 * r2),
            (Geodesic::Semicircle { center, radius }, Geodesic::Vertical { x })
            | (Geodesic::Vertical { x }, Geodesic::Semicircle { center, radius }) => {
                (center - x).abs() / radius
            }
            (Geodesic::Vertical { .. }, Geodesic::Vertical { .. }) => 0.0,
        };
        if inv > 1.0 {
            inv.acosh()
        } else {
            0.0
        }
    }
}

/// Distance from z to the closed half-disc bounded by a semicircle geodesic.
pub fn distance_to_halfdisc(g: &Geodesic, z: Point) -> f64 {
    if g.encloses(z) {
        0.0
    } else {
        g.distance_to(z)
    }
}

/// Fermi coordinates around the imaginary axis: signed distance `rho` to the axis
/// and arclength `t` along it, z = e^t (tanh rho + i sech rho).
pub fn fermi_point(rho: f64, t: f64) -> Point {
    let e = t.exp();
    Point::raw(e * rho.tanh(), e / rho.cosh())
}

/// Distance from the Fermi point (rho, t) to i, from cosh d = cosh rho cosh t.
pub fn fermi_distance_to_i(rho: f64, t: f64) -> f64 {
    // cosh a cosh b - 1 in half-angle form, accurate near the origin.
    let sa = (rho / 2.0).sinh();
    let sb = (t / 2.0).sinh();
    let m = 2.0 * sa * sa + 2.0 * sb * sb + 4.0 * sa * sa * sb * sb;
    2.0 * (m / 2.0).sqrt().asinh()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let i = Point::i();
        let two_i = Point::new(0.0, 2.0).unwrap();
        assert!((distance(i, two_i) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(distance(i, i), 0.0);
        assert!(Point::new(0.0, -1.0).is_err());
        assert!(Point::new(0.0, 0.0).is_err());
    }

    #[test]
    fn mobius_preserves_distance() {
        let g = Mobius::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let z = Point::new(0.3, 0.7).unwrap();
        let w = Point::new(-1.2, 2.5).unwrap();
        let d0 = distance(z, w);
        let d1 = distance(g.apply(z), g.apply(w));
        assert!((d0 - d1).abs() < 1e-13);
        let back = g.inverse().apply(g.apply(z));
        assert!((back.x - z.x).abs() < 1e-14 && (back.y - z.y).abs() < 1e-14);
    }

    #[test]
    fn circle_pairing_maps_circles() {
        let g = Mobius::circle_pairing(-3.0, 0.5, 3.0, 0.25).unwrap();
        for th in [0.3f64, 1.0, 2.0] {
            let z = Point::new(-3.0 + 0.5 * th.cos(), 0.5 * th.sin()).unwrap();
            let w = g.apply(z);
            let r = ((w.x - 3.0).powi(2) + w.y * w.y).sqrt();
            assert!((r - 0.25).abs() < 1e-13);
        }
        let far = g.apply(Point::new(0.0, 100.0).unwrap());
        assert!(((far.x - 3.0).powi(2) + far.y * far.y).sqrt() < 0.25);
    }

    #[test]
    fn fermi_distance_matches_direct() {
        for &(rho, t) in &[(0.0, 0.0), (0.3, -0.2), (2.0, 1.5), (-1.0, 3.0), (1e-9, 1e-9)] {
            let z = fermi_point(rho, t);
            let d = distance(z, Point::i());
            assert!((d - fermi_distance_to_i(rho, t)).abs() < 1e-12 * (1.0 + d), "{rho} {t}");
        }
    }

    #[test]
    fn geodesic_separation() {
        let a = Geodesic::Semicircle { center: -3.0, radius: 1.0 };
        let b = Geodesic::Semicircle { center: 3.0, radius: 1.0 };
        // cosh d = (36 - 2) / 2 = 17
        assert!((a.separation(&b) - 17f64.acosh()).abs() < 1e-14);
        let p = Point::new(-3.0, 1.0).unwrap();
        assert!(a.distance_to(p) < 1e-15);
    }
}
