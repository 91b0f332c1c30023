//! Periodized kernels on cyclic and Schottky quotients, the generalized eigenfunctions of
//! the hyperbolic cylinder and the cylinder spectral-measure identity.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{
    distance, enumerate_orbit, fermi_distance_to_i, poincare_partial_sum, word_distance_lower_bound, GroupKind,
    GroupPresentation, Point,
};
use crate::projector::{uniform_grid, BumpFamily, KernelConfig, ProjectorKernel, SpectralWindow};
use crate::quad::{gl16, integrate_adaptive_breaks, NodeSet, QuadConfig};
use crate::special::{big_c, plancherel_closed, spherical_function, PhiExpansion, PhiRoute};
use crate::transform::{RadialProfile, SpectralRule};

/// Sum over the orbit with a bound on everything left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodizedKernelValue {
    pub value: Complex64,
    pub word_length_used: usize,
    pub tail_bound: f64,
}

/// sup_r |K(r)| e^{s r} over the profile grid.
fn envelope(kernel: &RadialProfile, s: f64) -> f64 {
    kernel.r.iter().zip(&kernel.values).map(|(r, v)| v.norm() * (s * r).exp()).fold(0.0, f64::max)
}

/// K_X(x, x0) = sum_gamma K(d(x, gamma x0)) over words of length <= the group's maximum.
///
/// Beyond the grid the kernel is bounded by A e^{-s r} with s its tail exponent (any s for a
/// compactly supported kernel); words that are not enumerated contribute A times the
/// Poincaré tail at s.
pub fn periodize_kernel(group: &GroupPresentation, kernel: &RadialProfile, x: Point, x0: Point) -> Result<PeriodizedKernelValue> {
    let compact = kernel.tail_exponent.is_infinite();
    let s = if compact { 0.5 } else { kernel.tail_exponent };
    if !(s > 0.0) {
        return Err(Error::Diverged(format!("kernel tail exponent {s} does not exceed the critical exponent")));
    }
    let big_l = group.max_word_length;
    let r_max = kernel.r_max();
    let a = envelope(kernel, s);
    let orbit = enumerate_orbit(group, x0, x)?;
    let mut terms: Vec<(usize, Complex64)> = Vec::with_capacity(orbit.points.len());
    let mut tail = 0.0;
    for p in &orbit.points {
        match kernel.interpolate(p.distance) {
            Some(v) => terms.push((p.word_length, v)),
            None if compact => {}
            None => tail += a * (-s * p.distance).exp(),
        }
    }
    // Fixed summation order: by word length, then by enumeration order.
    terms.sort_by_key(|t| t.0);
    let value = terms.iter().map(|t| t.1).sum();
    let beyond_grid = compact && word_distance_lower_bound(group, x0, x, big_l + 1)? > r_max;
    if !beyond_grid {
        let ps = poincare_partial_sum(group, s, x0, x, big_l).map_err(|e| match e {
            Error::Diverged(m) => Error::Diverged(format!("kernel tail exponent {s} too small for this group: {m}")),
            other => other,
        })?;
        tail += a * ps.tail_bound;
    }
    Ok(PeriodizedKernelValue { value, word_length_used: big_l, tail_bound: tail })
}

/// E(lambda, xi, z) = C(lambda) (y / ((x - xi)^2 + y^2))^{1/2 + i lambda}.
pub fn generalized_eigenfunction(lambda: f64, xi: f64, z: Point) -> Complex64 {
    big_c(lambda) * poisson_power(lambda, xi, z)
}

/// (y / ((x - xi)^2 + y^2))^{1/2 + i lambda}.
fn poisson_power(lambda: f64, xi: f64, z: Point) -> Complex64 {
    let l = (z.y / ((z.x - xi).powi(2) + z.y * z.y)).ln();
    Complex64::from_polar((0.5 * l).exp(), lambda * l)
}

/// Cylinder eigenfunction E_C(lambda, xi, z) = sum_{|k| <= K} E(lambda, xi, e^{k ell} z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderEigenfunction {
    pub ell: f64,
    pub lambda: f64,
    pub xi: f64,
    pub truncation_k: usize,
}

impl CylinderEigenfunction {
    pub fn new(ell: f64, lambda: f64, xi: f64, truncation_k: usize) -> Result<Self> {
        if !(ell > 0.0) || !ell.is_finite() {
            return invalid(format!("ell = {ell} must be positive"));
        }
        if !lambda.is_finite() || !xi.is_finite() || xi == 0.0 {
            return invalid("lambda must be finite and xi finite and non-zero");
        }
        Ok(CylinderEigenfunction { ell, lambda, xi, truncation_k })
    }
}

/// Smallest K for which the |k| = K summands are below `tol` times the k = 0 summand for every
/// z in `points` and every 1 <= |xi| <= e^{ell}.
pub fn cylinder_truncation(ell: f64, points: &[Point], tol: f64) -> usize {
    let xi_hi = ell.exp();
    let mut k_need = 0usize;
    for z in points {
        // Smallest size of the k = 0 summand over the xi range.
        let far = z.x.abs() + xi_hi;
        let base = (z.y / (far * far + z.y * z.y)).sqrt();
        let mut k = 1usize;
        loop {
            let up = (k as f64 * ell).exp();
            let yu = z.y * up;
            let big = (1.0 / yu).sqrt();
            let (xd, yd) = (z.x / up, z.y / up);
            let small = if xd.abs() <= 0.5 { (4.0 * yd).sqrt() } else { f64::INFINITY };
            if big.max(small) < tol * base || k > 100_000 {
                break;
            }
            k += 1;
        }
        k_need = k_need.max(k);
    }
    k_need
}

/// Sum of the un-normalized summands and of their moduli.
fn cylinder_sum(ell: f64, lambda: f64, xi: f64, z: Point, k: usize) -> (Complex64, f64, f64) {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    let mut edge: f64 = 0.0;
    for j in -(k as i64)..=(k as i64) {
        let t = poisson_power(lambda, xi, z.scaled(j as f64 * ell));
        acc += t;
        abs += t.norm();
        if j.unsigned_abs() as usize == k {
            edge = edge.max(t.norm());
        }
    }
    (acc, abs, edge)
}

pub fn cylinder_eigenfunction(params: &CylinderEigenfunction, z: Point) -> Result<Complex64> {
    let k = params.truncation_k;
    let (acc, abs, edge) = cylinder_sum(params.ell, params.lambda, params.xi, z, k);
    if k > 0 && edge > 1e-10 * abs {
        return Err(Error::Accuracy { achieved: edge / abs, requested: 1e-10 });
    }
    Ok(acc * big_c(params.lambda))
}

/// |E_C(lambda, e^{ell} xi, z) - e^{-(1/2 + i lambda) ell} E_C(lambda, xi, z)| relative to the
/// sum of the moduli of the summands.
pub fn quasi_periodicity_defect(params: &CylinderEigenfunction, z: Point) -> f64 {
    let (ell, l, k) = (params.ell, params.lambda, params.truncation_k);
    let (a, abs, _) = cylinder_sum(ell, l, params.xi, z, k);
    let (b, _, _) = cylinder_sum(ell, l, params.xi * ell.exp(), z, k);
    let phase = Complex64::new(-0.5, -l).scale(ell).exp();
    (b - a * phase).norm() / abs
}

/// Both sides of the cylinder spectral-measure identity at one (lambda, z, z0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub ell: f64,
    pub lambda: f64,
    /// (2/pi) lambda^2 ∫_{1<|xi|<e^ell} E_C(z) conj(E_C(z0)) d xi.
    pub lhs: Complex64,
    /// (1 / 2 pi^2) |c|^{-2} sum_k phi_lambda(d(z, e^{k ell} z0)).
    pub rhs: f64,
    /// |lhs - rhs| divided by (1 / 2 pi^2) |c|^{-2} sum_k |phi_lambda(d_k)|.
    pub residual: f64,
    pub k: usize,
    pub quad_nodes: usize,
}

fn phi_real(lambda: f64, r: f64) -> Result<f64> {
    if r >= PhiExpansion::MIN_RADIUS && lambda > 0.0 {
        PhiExpansion::new(lambda).phi(r)
    } else {
        Ok(spherical_function(Complex64::new(lambda, 0.0), r, PhiRoute::Integral)?.re)
    }
}

pub fn spectral_measure_identity_check(ell: f64, lambda: f64, z: Point, z0: Point) -> Result<IdentityReport> {
    if !(ell > 0.0) || !(lambda > 0.0) {
        return invalid("identity check needs ell > 0 and lambda > 0");
    }
    let k = cylinder_truncation(ell, &[z, z0], 1e-12);
    let e = ell.exp();
    let mut nodes = 0usize;
    let integrand = |xi: f64| -> Complex64 {
        let (a, _, _) = cylinder_sum(ell, lambda, xi, z, k);
        let (b, _, _) = cylinder_sum(ell, lambda, xi, z0, k);
        a * b.conj()
    };
    // Scale for the absolute tolerance: the integral of the modulus on a coarse rule.
    let coarse = gl16();
    let mut mass = 0.0;
    for &(lo, hi) in &[(-e, -1.0), (1.0, e)] {
        mass += coarse.integrate(|xi| integrand(xi).norm(), lo, hi);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for &(lo, hi) in &[(-e, -1.0), (1.0, e)] {
        let (v, _) = integrate_adaptive_breaks(
            |xi| {
                nodes += 1;
                integrand(xi)
            },
            &[lo, hi],
            1e-13 * mass,
            1e-12,
            20_000,
        )?;
        total += v;
    }
    let c2 = big_c(lambda).norm_sqr();
    let lhs = total * (2.0 / PI * lambda * lambda * c2);
    // The right side decays like (1 + d) e^{-d/2}.
    let d0 = distance(z, z0);
    let mut kr = 1i64;
    while ((kr as f64 * ell - d0).max(0.0) * -0.5).exp() * (1.0 + kr as f64 * ell + d0) > 1e-14 {
        kr += 1;
    }
    let mut sum = 0.0;
    let mut abs = 0.0;
    for j in -kr..=kr {
        let ph = phi_real(lambda, distance(z, z0.scaled(j as f64 * ell)))?;
        sum += ph;
        abs += ph.abs();
    }
    let norm = plancherel_closed(lambda) / (2.0 * PI * PI);
    let rhs = norm * sum;
    let residual = (lhs - rhs).norm() / (norm * abs);
    Ok(IdentityReport { ell, lambda, lhs, rhs, residual, k, quad_nodes: nodes })
}

/// ||p^X(., i)||_{L^p(F)} / ||p^X(., i)||_{L^2(F)} on the cylinder of length ell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientRatio {
    pub ell: f64,
    pub lambda: f64,
    pub eta: f64,
    pub p: f64,
    /// Unfolded: (sum_k p2(|k| ell))^{1/2} with p2 the kernel of m^2.
    pub l2: f64,
    /// The same norm by quadrature over the fundamental domain.
    pub l2_domain: f64,
    pub lp: f64,
    pub ratio: f64,
}

/// Projector kernel of a cyclic quotient applied to a point mass at i, measured on the
/// fundamental domain |t| <= ell / 2 in Fermi coordinates (rho, t) around the axis.
pub fn quotient_projector_ratio(ell: f64, window: SpectralWindow, p: f64, bump: BumpFamily) -> Result<QuotientRatio> {
    if !(ell > 0.0) || !(p > 2.0) || p.is_infinite() {
        return invalid("quotient ratio needs ell > 0 and finite p > 2");
    }
    let kern = ProjectorKernel::p(window, bump)?;
    let support = kern.support();
    let cfg = KernelConfig::default();
    let sym = kern.symbol(cfg.spectral_tol);
    let freq = sym.bands.iter().map(|b| b.1).fold(0.0, f64::max);
    let per_wavelength = 32.0;
    let n = ((support * freq / (2.0 * PI) * per_wavelength).ceil() as usize).max(64) + 1;
    let grid = uniform_grid(support, n)?;
    let prof = kern.abel(&grid, &cfg)?.profile;

    // Unfolded L^2 norm through the kernel of m^2, supported in [0, 2 support].
    let kmax = (2.0 * support / ell).floor() as i64;
    let rule = SpectralRule::new(&sym.bands, 4.0 * support + 1.0, &cfg.quad(), |mu| {
        let v = sym.eval(mu);
        v * v
    })?;
    let mut l2sq = 0.0;
    for k in -kmax..=kmax {
        l2sq += rule.kernel_at((k as f64 * ell).abs(), &cfg.quad()).re;
    }

    let q = QuadConfig::default();
    let mut rho_nodes = NodeSet::default();
    rho_nodes.push_panels(-support, support, q.panel_count(2.0 * support, freq), |_| 1.0);
    let mut t_nodes = NodeSet::default();
    t_nodes.push_panels(-ell / 2.0, ell / 2.0, q.panel_count(ell, freq), |_| 1.0);
    let (mut lp_acc, mut l2_acc) = (0.0, 0.0);
    for (&rho, &wr) in rho_nodes.x.iter().zip(&rho_nodes.w) {
        let ch = rho.cosh();
        for (&t, &wt) in t_nodes.x.iter().zip(&t_nodes.w) {
            let mut v = 0.0;
            let kk = ((support + ell) / ell).ceil() as i64;
            for k in -kk..=kk {
                let tau = t - k as f64 * ell;
                if tau.abs() >= support {
                    continue;
                }
                if let Some(x) = prof.interpolate(fermi_distance_to_i(rho, tau)) {
                    v += x.re;
                }
            }
            let w = wr * wt * ch;
            lp_acc += w * v.abs().powf(p);
            l2_acc += w * v * v;
        }
    }
    let l2 = l2sq.max(0.0).sqrt();
    let lp = lp_acc.powf(1.0 / p);
    Ok(QuotientRatio { ell, lambda: window.lambda, eta: window.eta, p, l2, l2_domain: l2_acc.sqrt(), lp, ratio: lp / l2 })
}

/// Windows m_j(mu) = chi((mu - lambda_j)/eta) + chi((mu + lambda_j)/eta) with
/// lambda_j = (j + 1/2) T eta; by Poisson summation their sum is the constant
/// sqrt(2 pi) chi_hat(0) / T whenever T hat_support < 2 pi. Returns the largest relative
/// deviation from that constant on [0, mu_max].
pub fn window_partition_defect(bump: &BumpFamily, eta: f64, mu_max: f64) -> Result<f64> {
    if !(eta > 0.0 && mu_max > 0.0) {
        return invalid("partition check needs eta > 0 and mu_max > 0");
    }
    let t = PI / bump.hat_support();
    let constant = (2.0 * PI).sqrt() * bump.chi_hat(0.0) / t;
    let reach = bump.tail_radius(1e-14);
    let jmax = ((mu_max / eta + reach) / t).ceil() as usize + 1;
    let mut worst: f64 = 0.0;
    let n = 2000;
    for i in 0..=n {
        let mu = mu_max * i as f64 / n as f64;
        let mut s = 0.0;
        for j in 0..=jmax {
            let lj = (j as f64 + 0.5) * t * eta;
            s += bump.chi((mu - lj) / eta) + bump.chi((mu + lj) / eta);
        }
        worst = worst.max((s / constant - 1.0).abs());
    }
    Ok(worst)
}

/// Group helper for the cylinder of length ell.
pub fn cylinder_group(ell: f64, max_word_length: usize) -> Result<GroupPresentation> {
    GroupPresentation::cyclic(ell, max_word_length)
}

/// Translation length of a cyclic presentation, if it is one.
pub fn cyclic_length(group: &GroupPresentation) -> Option<f64> {
    match group.kind {
        GroupKind::Cyclic { ell } => Some(ell),
        GroupKind::Schottky { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Mobius;
    use crate::projector::BumpKind;
    use crate::transform::RadialGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn heat_like(r_max: f64) -> RadialProfile {
        let grid = RadialGrid::gauss(r_max, 1.0, &QuadConfig::default()).unwrap();
        RadialProfile::from_fn(&grid, |r| Complex64::new((-0.8 * r).exp() * (1.0 + r), 0.0), 0.75).unwrap()
    }

    #[test]
    fn identity_only_truncation() {
        let k = heat_like(30.0);
        let x = Point::new(0.2, 1.3).unwrap();
        let x0 = Point::new(-0.1, 0.8).unwrap();
        let g = cylinder_group(1.0, 0).unwrap();
        let v = periodize_kernel(&g, &k, x, x0).unwrap();
        let want = k.interpolate(distance(x, x0)).unwrap();
        assert!((v.value - want).norm() < 1e-14);
    }

    #[test]
    fn long_cylinder_two_term_oracle() {
        let k = heat_like(60.0);
        let x = Point::i();
        let g = cylinder_group(20.0, 3).unwrap();
        let v = periodize_kernel(&g, &k, x, x).unwrap();
        let two_term = k.interpolate(0.0).unwrap() + 2.0 * k.interpolate(20.0).unwrap();
        let rest = 2.0 * (41.0 * (-32.0f64).exp() + 61.0 * (-48.0f64).exp());
        assert!((v.value - two_term).norm() <= rest + v.tail_bound + 1e-15, "{v:?} {two_term}");
    }

    #[test]
    fn truncation_refinement_within_tail() {
        let k = heat_like(80.0);
        let x = Point::new(0.3, 1.1).unwrap();
        for g in [
            cylinder_group(0.7, 3).unwrap(),
            GroupPresentation::schottky(
                vec![
                    Mobius::circle_pairing(-4.0, 0.5, 4.0, 0.5).unwrap(),
                    Mobius::circle_pairing(-1.5, 0.3, 1.5, 0.3).unwrap(),
                ],
                2,
            )
            .unwrap(),
        ] {
            let a = periodize_kernel(&g, &k, x, x).unwrap();
            let b = periodize_kernel(&g.clone().with_max_word_length(g.max_word_length + 3), &k, x, x).unwrap();
            assert!((a.value - b.value).norm() <= a.tail_bound, "{a:?} {b:?}");
            assert!(b.tail_bound < a.tail_bound);
        }
    }

    #[test]
    fn slow_kernel_diverges_on_schottky() {
        let grid = RadialGrid::gauss(10.0, 1.0, &QuadConfig::default()).unwrap();
        let k = RadialProfile::from_fn(&grid, |r| Complex64::new((-0.01 * r).exp(), 0.0), 0.01).unwrap();
        let g = GroupPresentation::schottky(vec![Mobius::circle_pairing(-2.0, 0.9, 2.0, 0.9).unwrap(), Mobius::circle_pairing(-0.5, 0.2, 0.5, 0.2).unwrap()], 2).unwrap();
        assert!(matches!(periodize_kernel(&g, &k, Point::new(0.0, 3.0).unwrap(), Point::new(0.0, 3.0).unwrap()), Err(Error::Diverged(_))));
    }

    #[test]
    fn periodized_is_deck_invariant() {
        let k = heat_like(80.0);
        let g = cylinder_group(1.0, 80).unwrap();
        let x = Point::new(0.4, 0.9).unwrap();
        let x0 = Point::new(-0.3, 1.6).unwrap();
        let a = periodize_kernel(&g, &k, x, x0).unwrap();
        let b = periodize_kernel(&g, &k, x, x0.scaled(1.0)).unwrap();
        assert!((a.value - b.value).norm() < 1e-8 * a.value.norm());
    }

    #[test]
    fn eigenfunction_basics() {
        let z = Point::new(0.3, 0.7).unwrap();
        let p0 = CylinderEigenfunction::new(1.0, 5.0, 1.5, 0).unwrap();
        let one = cylinder_eigenfunction(&p0, z).unwrap();
        assert!((one - generalized_eigenfunction(5.0, 1.5, z)).norm() < 1e-15);
        let k = cylinder_truncation(1.0, &[z], 1e-12);
        let p = CylinderEigenfunction::new(1.0, 5.0, 1.5, k).unwrap();
        let a = cylinder_eigenfunction(&p, z).unwrap();
        let b = cylinder_eigenfunction(&CylinderEigenfunction { truncation_k: k + 5, ..p }, z).unwrap();
        assert!((a - b).norm() < 1e-10 * a.norm().max(1e-3));
        assert!(matches!(cylinder_eigenfunction(&CylinderEigenfunction { truncation_k: 2, ..p }, z), Err(Error::Accuracy { .. })));
    }

    #[test]
    fn quasi_periodicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for ell in [0.5f64, 1.0, 2.0] {
            for _ in 0..5 {
                let z = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..2.0)).unwrap();
                let xi = rng.gen_range(1.0..ell.exp()) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let k = cylinder_truncation(ell, &[z], 1e-12) + 2;
                let p = CylinderEigenfunction::new(ell, rng.gen_range(0.1..20.0), xi, k).unwrap();
                assert!(quasi_periodicity_defect(&p, z) < 1e-8, "{p:?} {z:?} {}", quasi_periodicity_defect(&p, z));
            }
        }
    }

    #[test]
    fn spectral_identity_examples() {
        let r = spectral_measure_identity_check(1.0, 5.0, Point::i(), Point::i()).unwrap();
        assert!(r.residual < 1e-4, "{r:?}");
        let r = spectral_measure_identity_check(1.0, 0.1, Point::i(), Point::i()).unwrap();
        assert!(r.residual < 1e-4, "{r:?}");
        let z = Point::new(0.2, 0.8).unwrap();
        let z0 = Point::new(-0.5, 1.4).unwrap();
        let a = spectral_measure_identity_check(1.0, 3.0, z, z0).unwrap();
        let b = spectral_measure_identity_check(1.0, 3.0, z, z0.scaled(1.0)).unwrap();
        assert!((a.rhs - b.rhs).abs() < 1e-8 * a.rhs.abs().max(1e-3));
        assert!((a.lhs - b.lhs).norm() < 1e-8 * a.lhs.norm().max(1e-3));
    }

    #[test]
    fn partition_of_windows() {
        for bump in [BumpFamily::plateau(), BumpFamily::build(BumpKind::BSpline { order: 6 }).unwrap()] {
            assert!(window_partition_defect(&bump, 0.5, 20.0).unwrap() < 1e-3);
        }
    }

    #[test]
    fn quotient_ratio_two_routes() {
        let w = SpectralWindow::new(8.0, 0.5).unwrap();
        let q = quotient_projector_ratio(2.0, w, 8.0, BumpFamily::plateau()).unwrap();
        assert!((q.l2 - q.l2_domain).abs() < 1e-4 * q.l2, "{q:?}");
    }
}
