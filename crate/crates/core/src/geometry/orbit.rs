//! Orbits of cyclic and Schottky groups, Poincaré series with certified tails, and
//! orbit-count estimates of the exponent of convergence.

use serde::{Deserialize, Serialize};

use super::{distance, distance_to_halfdisc, Geodesic, Mobius, Point};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GroupKind {
    /// Generated by z -> e^ell z.
    Cyclic { ell: f64 },
    /// Free group on the listed generators; their isometric circles must be disjoint.
    Schottky { generators: Vec<Mobius> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPresentation {
    pub kind: GroupKind,
    pub max_word_length: usize,
    /// Words all of whose extensions lie farther than this from the base point are dropped.
    pub prune_radius: f64,
}

impl GroupPresentation {
    pub fn cyclic(ell: f64, max_word_length: usize) -> Result<Self> {
        if !(ell > 0.0) || !ell.is_finite() {
            return invalid(format!("cyclic translation length {ell} must be positive"));
        }
        Ok(GroupPresentation { kind: GroupKind::Cyclic { ell }, max_word_length, prune_radius: f64::INFINITY })
    }

    pub fn schottky(generators: Vec<Mobius>, max_word_length: usize) -> Result<Self> {
        if generators.is_empty() {
            return invalid("Schottky group needs at least one generator");
        }
        for g in &generators {
            let det = g.a * g.d - g.b * g.c;
            if (det - 1.0).abs() > 1e-12 {
                return invalid(format!("generator determinant {det} is not 1"));
            }
        }
        Ok(GroupPresentation { kind: GroupKind::Schottky { generators }, max_word_length, prune_radius: f64::INFINITY })
    }

    pub fn with_prune_radius(mut self, r: f64) -> Result<Self> {
        if !(r >= 0.0) {
            return invalid(format!("prune radius {r} must be non-negative"));
        }
        self.prune_radius = r;
        Ok(self)
    }

    pub fn with_max_word_length(mut self, l: usize) -> Self {
        self.max_word_length = l;
        self
    }

    /// Letters: generators followed by their inverses; letter j has inverse (j + g) mod 2g.
    fn letters(&self) -> Vec<Mobius> {
        match &self.kind {
            GroupKind::Cyclic { ell } => vec![Mobius::dilation(*ell), Mobius::dilation(-*ell)],
            GroupKind::Schottky { generators } => {
                generators.iter().copied().chain(generators.iter().map(|g| g.inverse())).collect()
            }
        }
    }
}

/// One orbit element gamma with d(gamma z, z0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    pub word_length: usize,
    pub distance: f64,
    pub element: Mobius,
}

/// Orbit points with the bookkeeping needed for tail bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Orbit {
    pub points: Vec<OrbitPoint>,
    /// Number of words of length <= max_word_length dropped by pruning.
    pub pruned: u64,
}

/// Isometric-circle data for the ping-pong lower bound d(o, gamma o) >= (n - 1) d_min.
struct PingPong {
    /// disc[j] bounds the region letter j maps the outside into: int I_{letter_j^{-1}}.
    disc: Vec<Geodesic>,
    d_min: f64,
    base: Point,
}

fn ping_pong(letters: &[Mobius]) -> Result<PingPong> {
    let n = letters.len();
    let g = n / 2;
    let mut iso = Vec::with_capacity(n);
    for l in letters {
        iso.push(l.isometric_circle().ok_or_else(|| Error::Diverged("generator fixes infinity".into()))?);
    }
    let mut d_min = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            d_min = d_min.min(iso[i].separation(&iso[j]));
        }
    }
    if !(d_min > 0.0) {
        return Err(Error::Diverged("isometric circles are not disjoint; displacement minimum is 0".into()));
    }
    let reach = iso
        .iter()
        .map(|c| match c {
            Geodesic::Semicircle { center, radius } => center.abs() + radius,
            Geodesic::Vertical { .. } => 0.0,
        })
        .fold(1.0, f64::max);
    let disc = (0..n).map(|j| iso[(j + g) % n]).collect();
    Ok(PingPong { disc, d_min, base: Point::raw(0.0, 2.0 * reach) })
}

pub fn enumerate_orbit(group: &GroupPresentation, z: Point, z0: Point) -> Result<Orbit> {
    match &group.kind {
        GroupKind::Cyclic { ell } => Ok(enumerate_cyclic(*ell, group, z, z0)),
        GroupKind::Schottky { .. } => enumerate_free(group, z, z0),
    }
}

fn enumerate_cyclic(ell: f64, group: &GroupPresentation, z: Point, z0: Point) -> Orbit {
    let big_l = group.max_word_length;
    let r = group.prune_radius;
    let d0 = distance(z, z0);
    let mut points = vec![OrbitPoint { word_length: 0, distance: d0, element: Mobius::identity() }];
    let mut pruned = 0u64;
    for sign in [1.0, -1.0] {
        for k in 1..=big_l {
            let g = Mobius::dilation(sign * k as f64 * ell);
            let d = distance(g.apply(z), z0);
            // d(g^j z, z0) >= j ell - d(z, z0) for every later j.
            if d > r && (k as f64 + 1.0) * ell - d0 > r {
                pruned += (big_l - k + 1) as u64;
                break;
            }
            if d <= r {
                points.push(OrbitPoint { word_length: k, distance: d, element: g });
            } else {
                pruned += 1;
            }
        }
    }
    Orbit { points, pruned }
}

fn enumerate_free(group: &GroupPresentation, z: Point, z0: Point) -> Result<Orbit> {
    let letters = group.letters();
    let n = letters.len();
    let half = n / 2;
    let pp = ping_pong(&letters)?;
    let big_l = group.max_word_length;
    let r = group.prune_radius;
    let mut points = vec![OrbitPoint { word_length: 0, distance: distance(z, z0), element: Mobius::identity() }];
    let mut pruned = 0u64;
    // Words of length <= big_l - depth in a subtree hanging below a node at `depth` (node included).
    let subtree = |depth: usize| -> u64 {
        let mut total = 0u64;
        let mut level = 1u64;
        for _ in depth..=big_l {
            total = total.saturating_add(level);
            level = level.saturating_mul((n - 1) as u64);
        }
        total
    };
    // Extensions of w by first letter u lie in w(D_u) when z is outside every disc; otherwise
    // fall back to the triangle inequality through the ping-pong base point.
    let z_outside = pp.disc.iter().all(|c| !c.encloses(z));
    let dz = distance(z, pp.base);
    let mut stack: Vec<(Mobius, usize, usize)> = (0..n).map(|j| (letters[j], j, 1)).collect();
    stack.reverse();
    while let Some((w, last, depth)) = stack.pop() {
        if depth > big_l {
            continue;
        }
        let d = distance(w.apply(z), z0);
        let keep_self = d <= r;
        let extend = depth < big_l;
        if !keep_self && r.is_finite() {
            let wz0 = w.inverse().apply(z0);
            let lower = if z_outside {
                (0..n)
                    .filter(|&u| u != (last + half) % n)
                    .map(|u| distance_to_halfdisc(&pp.disc[u], wz0))
                    .fold(f64::INFINITY, f64::min)
            } else {
                // d(w u... z, z0) >= d(u... o, w^{-1} z0) - d(z, o) and u... o lies in D_u.
                (0..n)
                    .filter(|&u| u != (last + half) % n)
                    .map(|u| distance_to_halfdisc(&pp.disc[u], wz0) - dz)
                    .fold(f64::INFINITY, f64::min)
            };
            if !extend || lower > r {
                pruned += subtree(depth);
                continue;
            }
        }
        if keep_self {
            points.push(OrbitPoint { word_length: depth, distance: d, element: w });
        } else {
            pruned += 1;
        }
        if extend {
            for u in (0..n).rev() {
                if u != (last + half) % n {
                    stack.push((w.compose(&letters[u]), u, depth + 1));
                }
            }
        }
    }
    Ok(Orbit { points, pruned })
}

/// A lower bound on d(gamma z, z0) valid for every group element of word length >= n.
pub fn word_distance_lower_bound(group: &GroupPresentation, z: Point, z0: Point, n: usize) -> Result<f64> {
    match &group.kind {
        GroupKind::Cyclic { ell } => Ok(n as f64 * ell - distance(z, z0)),
        GroupKind::Schottky { .. } => {
            let pp = ping_pong(&group.letters())?;
            let big_d = distance(z, pp.base) + distance(z0, pp.base);
            Ok((n as f64 - 1.0) * pp.d_min - big_d)
        }
    }
}

/// Partial Poincaré sum over words of length <= L with a certified remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareSum {
    pub s: f64,
    pub partial: f64,
    pub word_length_used: usize,
    pub tail_bound: f64,
}

pub fn poincare_partial_sum(group: &GroupPresentation, s: f64, z: Point, z0: Point, big_l: usize) -> Result<PoincareSum> {
    if !(s > 0.0) || !s.is_finite() {
        return invalid(format!("Poincaré exponent s = {s} must be positive"));
    }
    let g = group.clone().with_max_word_length(big_l);
    let orbit = enumerate_orbit(&g, z, z0)?;
    // Summation from the smallest term up keeps the sum reproducible and accurate.
    let mut terms: Vec<f64> = orbit.points.iter().map(|p| (-s * p.distance).exp()).collect();
    terms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let partial: f64 = terms.iter().sum();
    let pruned_part = if orbit.pruned > 0 { orbit.pruned as f64 * (-s * g.prune_radius).exp() } else { 0.0 };
    let tail = match &g.kind {
        GroupKind::Cyclic { ell } => {
            let d0 = distance(z, z0);
            let q = (-s * ell).exp();
            2.0 * (s * d0).exp() * q.powi(big_l as i32 + 1) / (1.0 - q)
        }
        GroupKind::Schottky { .. } => {
            let letters = g.letters();
            let pp = ping_pong(&letters)?;
            let n = letters.len() as f64;
            let q = (n - 1.0) * (-s * pp.d_min).exp();
            if q >= 1.0 {
                return Err(Error::Diverged(format!(
                    "geometric majorant ratio {q} >= 1; s = {s} is too small for the displacement bound"
                )));
            }
            // d(gamma z, z0) >= (|gamma| - 1) d_min - d(z, o) - d(z0, o).
            let big_d = distance(z, pp.base) + distance(z0, pp.base);
            (s * big_d).exp() * n * q.powi(big_l as i32) / (1.0 - q)
        }
    };
    Ok(PoincareSum { s, partial, word_length_used: big_l, tail_bound: tail + pruned_part })
}

/// (1 + e^{-s ell}) / (1 - e^{-s ell}): the full cyclic series at z = z0 on the axis.
pub fn cyclic_poincare_closed_form(s: f64, ell: f64) -> f64 {
    let q = (-s * ell).exp();
    (1.0 + q) / (1.0 - q)
}

/// Least-squares slope of log #{gamma : d(gamma z, z) <= R} against R.
pub fn critical_exponent_estimate(group: &GroupPresentation, z: Point, radius_grid: &[f64]) -> Result<f64> {
    if radius_grid.len() < 2 {
        return Err(Error::InsufficientData("radius grid needs at least two radii".into()));
    }
    let r_max = radius_grid.iter().cloned().fold(0.0, f64::max);
    let needed = match &group.kind {
        GroupKind::Cyclic { ell } => (r_max / ell).ceil() as usize + 1,
        GroupKind::Schottky { .. } => {
            let pp = ping_pong(&group.letters())?;
            let slack = 2.0 * distance(z, pp.base);
            ((r_max + slack) / pp.d_min).ceil() as usize + 2
        }
    };
    let g = group.clone().with_max_word_length(needed).with_prune_radius(r_max)?;
    let orbit = enumerate_orbit(&g, z, z)?;
    if orbit.points.len() < 10 {
        return Err(Error::InsufficientData(format!("only {} orbit points within {r_max}", orbit.points.len())));
    }
    let xs: Vec<f64> = radius_grid.to_vec();
    let ys: Vec<f64> = radius_grid
        .iter()
        .map(|&r| (orbit.points.iter().filter(|p| p.distance <= r).count().max(1) as f64).ln())
        .collect();
    Ok(ols(&xs, &ys).0)
}

/// Ordinary least squares: (slope, intercept, r^2).
pub(crate) fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schottky2() -> GroupPresentation {
        let a = Mobius::circle_pairing(-4.0, 0.5, 4.0, 0.5).unwrap();
        let b = Mobius::circle_pairing(-1.5, 0.3, 1.5, 0.3).unwrap();
        GroupPresentation::schottky(vec![a, b], 4).unwrap()
    }

    #[test]
    fn cyclic_orbit_distances() {
        let g = GroupPresentation::cyclic(1.0, 2).unwrap();
        let o = enumerate_orbit(&g, Point::i(), Point::i()).unwrap();
        let mut d: Vec<f64> = o.points.iter().map(|p| p.distance).collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = [0.0, 1.0, 1.0, 2.0, 2.0];
        assert_eq!(d.len(), 5);
        for (a, b) in d.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn prune_zero_keeps_identity() {
        for g in [GroupPresentation::cyclic(1.0, 3).unwrap(), schottky2()] {
            let g = g.with_prune_radius(0.0).unwrap();
            let o = enumerate_orbit(&g, Point::i(), Point::i()).unwrap();
            assert_eq!(o.points.len(), 1);
            assert_eq!(o.points[0].word_length, 0);
        }
    }

    #[test]
    fn one_generator_schottky_matches_cyclic() {
        let ell = 1.3f64;
        // Hyperbolic map with translation length ell and axis the unit semicircle.
        let (c, s) = ((ell / 2.0).cosh(), (ell / 2.0).sinh());
        let g = Mobius::new(c, s, s, c).unwrap();
        let sch = GroupPresentation::schottky(vec![g], 3).unwrap();
        let cyc = GroupPresentation::cyclic(ell, 3).unwrap();
        // Conjugate base point: the axis of g passes through i.
        let z = Point::i();
        let mut a: Vec<f64> = enumerate_orbit(&sch, z, z).unwrap().points.iter().map(|p| p.distance).collect();
        let mut b: Vec<f64> = enumerate_orbit(&cyc, z, z).unwrap().points.iter().map(|p| p.distance).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn cyclic_poincare_brackets_closed_form() {
        for &(s, ell) in &[(0.3, 0.5), (0.45, 2.0), (0.3, 2.0)] {
            let g = GroupPresentation::cyclic(ell, 0).unwrap();
            let exact = cyclic_poincare_closed_form(s, ell);
            let zero = poincare_partial_sum(&g, s, Point::i(), Point::i(), 0).unwrap();
            assert_eq!(zero.partial, 1.0);
            for l in [5, 20, 80] {
                let ps = poincare_partial_sum(&g, s, Point::i(), Point::i(), l).unwrap();
                assert!(ps.partial <= exact * (1.0 + 1e-14));
                assert!(exact <= ps.partial + ps.tail_bound);
                let ps2 = poincare_partial_sum(&g, s, Point::i(), Point::i(), 2 * l).unwrap();
                assert!(ps2.partial - ps.partial <= ps.tail_bound);
            }
        }
        assert!(poincare_partial_sum(&GroupPresentation::cyclic(1.0, 0).unwrap(), 0.0, Point::i(), Point::i(), 3).is_err());
    }

    #[test]
    fn schottky_tail_is_certified_and_pruning_respects_it() {
        let g = schottky2();
        let z = Point::new(0.2, 3.0).unwrap();
        let s = 0.9;
        let small = poincare_partial_sum(&g, s, z, z, 3).unwrap();
        let big = poincare_partial_sum(&g, s, z, z, 7).unwrap();
        assert!(big.partial >= small.partial);
        assert!(big.partial - small.partial <= small.tail_bound, "{small:?} {big:?}");
        let pr = g.clone().with_prune_radius(8.0).unwrap();
        let p = poincare_partial_sum(&pr, s, z, z, 5).unwrap();
        let u = poincare_partial_sum(&g, s, z, z, 5).unwrap();
        assert!(u.partial - p.partial <= p.tail_bound);
        assert!(p.partial <= u.partial);
    }

    #[test]
    fn pruning_only_drops_far_words() {
        let g = schottky2().with_max_word_length(6);
        let z = Point::new(0.1, 2.0).unwrap();
        let full = enumerate_orbit(&g, z, z).unwrap();
        let pr = enumerate_orbit(&g.clone().with_prune_radius(9.0).unwrap(), z, z).unwrap();
        let near_full = full.points.iter().filter(|p| p.distance <= 9.0).count();
        assert_eq!(near_full, pr.points.len());
        assert_eq!(full.points.len() as u64, pr.points.len() as u64 + pr.pruned);
    }

    #[test]
    fn lower_bound_holds_on_enumerated_words() {
        let z = Point::new(0.3, 2.0).unwrap();
        let z0 = Point::new(-0.2, 1.5).unwrap();
        for g in [schottky2().with_max_word_length(5), GroupPresentation::cyclic(0.7, 6).unwrap()] {
            for p in enumerate_orbit(&g, z, z0).unwrap().points {
                assert!(p.distance >= word_distance_lower_bound(&g, z, z0, p.word_length).unwrap() - 1e-9);
            }
        }
    }

    #[test]
    fn critical_exponents() {
        let grid: Vec<f64> = (0..=10).map(|k| 10.0 + 5.0 * k as f64).collect();
        let cyc = GroupPresentation::cyclic(1.0, 0).unwrap();
        let d = critical_exponent_estimate(&cyc, Point::i(), &grid).unwrap();
        assert!((0.0..=0.05).contains(&d), "{d}");
        let grid: Vec<f64> = (0..=8).map(|k| 14.0 + 2.0 * k as f64).collect();
        let d = critical_exponent_estimate(&schottky2(), Point::new(0.0, 3.0).unwrap(), &grid).unwrap();
        assert!(d > 0.0 && d < 0.5, "{d}");
        assert!(matches!(critical_exponent_estimate(&cyc, Point::i(), &[10.0]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn orbit_elements_are_isometries() {
        let g = schottky2().with_max_word_length(3);
        let z = Point::new(0.3, 1.7).unwrap();
        let w = Point::new(-0.4, 0.9).unwrap();
        for p in enumerate_orbit(&g, z, z).unwrap().points {
            let e = p.element;
            let dd = distance(e.apply(z), e.apply(w));
            assert!((dd - distance(z, w)).abs() < 1e-9 * (1.0 + p.distance), "{dd} at length {}", p.word_length);
        }
    }
}
