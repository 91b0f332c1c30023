//! Numerical surrogates of the pointwise kernel bounds and the dyadic telescoping.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::projector::kernels::{dyadic_k0, KernelConfig, ProjectorKernel, SpectralWindow};
use crate::projector::BumpFamily;
use crate::transform::RadialGrid;

/// Max over mu of the defect of
/// 2^{k0} chi(2^{k0} mu) + sum_{k0 < k <= K} 2^k psi(2^k mu) = 2^K chi(2^K mu),
/// each defect divided by max_k |2^k chi(2^k mu)|.
pub fn telescoping_check(bump: &BumpFamily, lambda: f64, k_max: i32, mu: &[f64]) -> Result<f64> {
    let k0 = dyadic_k0(lambda);
    if k_max <= k0 {
        return invalid(format!("K = {k_max} must exceed k0 = {k0}"));
    }
    let mut worst: f64 = 0.0;
    for &m in mu {
        let scaled = |k: i32| 2f64.powi(k) * bump.chi(2f64.powi(k) * m);
        let mut lhs = scaled(k0);
        let mut scale = lhs.abs();
        for k in (k0 + 1)..=k_max {
            let two_k = 2f64.powi(k);
            lhs += two_k * bump.psi(two_k * m);
            scale = scale.max(scaled(k).abs());
        }
        let rhs = scaled(k_max);
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    Ok(worst)
}

/// How eta is chosen for each lambda in a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EtaRule {
    InverseLambda,
    Fixed(f64),
    EqualLambda,
}

impl EtaRule {
    pub fn eta(&self, lambda: f64) -> f64 {
        match *self {
            EtaRule::InverseLambda => 1.0 / lambda,
            EtaRule::Fixed(e) => e,
            EtaRule::EqualLambda => lambda,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            EtaRule::InverseLambda => "1/lambda".into(),
            EtaRule::Fixed(e) => format!("{e}"),
            EtaRule::EqualLambda => "lambda".into(),
        }
    }
}

/// Pointwise-bound scan over (lambda, eta).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSpec {
    pub lambdas: Vec<f64>,
    pub etas: Vec<EtaRule>,
    /// Radii examined: [0, min(support, r_cap)].
    pub r_cap: f64,
    pub points_per_wavelength: f64,
    pub bump: BumpFamily,
    pub epsilon: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            lambdas: (3..=9).map(|k| 2f64.powi(k)).collect(),
            etas: vec![EtaRule::InverseLambda, EtaRule::Fixed(0.1), EtaRule::Fixed(1.0)],
            r_cap: 12.0,
            points_per_wavelength: 6.0,
            bump: BumpFamily::plateau(),
            epsilon: 0.5,
        }
    }
}

/// One normalized sup.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRow {
    pub lambda: f64,
    pub eta: f64,
    pub eta_rule: EtaRule,
    /// "p:r<=1", "p:r>1" or "q".
    pub regime: String,
    pub normalized_sup: f64,
    pub r_argmax: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    /// Per (eta rule, regime): the largest factor by which the normalized sup changes
    /// per lambda octave between consecutive scan points.
    pub octave_factors: Vec<(String, String, f64)>,
}

impl BoundReport {
    pub fn max_octave_factor(&self, regime_prefix: &str) -> f64 {
        self.octave_factors
            .iter()
            .filter(|(_, r, _)| r.starts_with(regime_prefix))
            .map(|(_, _, f)| *f)
            .fold(1.0, f64::max)
    }
}

/// Uniform radii with at least `ppw` points per wavelength 2 pi / freq, spacing <= 0.05.
pub fn sampling_grid(r_end: f64, freq: f64, ppw: f64) -> Result<RadialGrid> {
    let h = (2.0 * std::f64::consts::PI / (ppw * freq.max(1e-9))).min(0.05);
    let n = (r_end / h).ceil().max(1.0) as usize;
    let mut r: Vec<f64> = (0..=n).map(|k| r_end * k as f64 / n as f64).collect();
    if r_end > 1.0 && !r.contains(&1.0) {
        r.push(1.0);
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    RadialGrid::trapezoid(r)
}

/// Normalized sups of one (lambda, eta) cell.
pub fn bound_cell(lambda: f64, rule: EtaRule, spec: &ScanSpec, cfg: &KernelConfig) -> Result<Vec<BoundRow>> {
    let eta = rule.eta(lambda);
    let w = SpectralWindow::new(lambda, eta)?;
    let p = ProjectorKernel::p(w, spec.bump)?;
    let q = ProjectorKernel::q(w, spec.bump)?;
    let r_end = p.support().min(spec.r_cap);
    let grid = sampling_grid(r_end, lambda + eta, spec.points_per_wavelength)?;
    let pv = p.abel(&grid, cfg)?.profile;
    let qv = q.abel(&grid, cfg)?.profile;
    let eps = spec.epsilon;
    let mut small = (0.0f64, 0.0f64);
    let mut large = (0.0f64, f64::NAN);
    let mut qsup = (0.0f64, 0.0f64);
    for ((&r, pk), qk) in grid.r.iter().zip(&pv.values).zip(&qv.values) {
        if r <= 1.0 {
            let v = pk.norm() / (lambda * eta);
            if v > small.0 {
                small = (v, r);
            }
        } else {
            let v = pk.norm() * (r / 2.0).exp() / (lambda.sqrt() * eta);
            if v > large.0 || large.1.is_nan() {
                large = (v, r);
            }
        }
        // Logarithms keep e^{eps / (8 eta)} finite for tiny eta.
        let ln = qk.norm().ln() + (1.0 - eps) * r / 2.0 + eps / (8.0 * eta)
            - (lambda.sqrt() * eta * (1.0 + eta).sqrt()).ln();
        let v = ln.exp();
        if v > qsup.0 {
            qsup = (v, r);
        }
    }
    let row = |regime: &str, (v, r): (f64, f64)| BoundRow {
        lambda,
        eta,
        eta_rule: rule,
        regime: regime.into(),
        normalized_sup: v,
        r_argmax: r,
    };
    let mut rows = vec![row("p:r<=1", small)];
    if !large.1.is_nan() {
        rows.push(row("p:r>1", large));
    }
    rows.push(row("q", qsup));
    Ok(rows)
}

/// Runs every cell of the scan in lexicographic (eta rule, lambda) order.
pub fn verify_pointwise_bounds(spec: &ScanSpec, cfg: &KernelConfig) -> Result<BoundReport> {
    let mut rows = Vec::new();
    for rule in &spec.etas {
        for &l in &spec.lambdas {
            rows.extend(bound_cell(l, *rule, spec, cfg)?);
        }
    }
    Ok(summarize_bounds(rows))
}

const NEGLIGIBLE: f64 = 1e-12;

/// Groups rows by (eta rule, regime) and computes per-octave variation.
pub fn summarize_bounds(rows: Vec<BoundRow>) -> BoundReport {
    let mut octave_factors = Vec::new();
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in &rows {
        let k = (r.eta_rule.label(), r.regime.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    for (rule, regime) in keys {
        let mut series: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.eta_rule.label() == rule && r.regime == regime)
            .map(|r| (r.lambda, r.normalized_sup))
            .collect();
        series.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut worst: f64 = 1.0;
        for w in series.windows(2) {
            let octaves = (w[1].0 / w[0].0).log2();
            // Values at roundoff level carry no scaling information.
            if octaves <= 0.0 || w[0].1 <= NEGLIGIBLE || w[1].1 <= NEGLIGIBLE {
                continue;
            }
            let f = (w[1].1 / w[0].1).max(w[0].1 / w[1].1).powf(1.0 / octaves.max(1.0));
            worst = worst.max(f);
        }
        octave_factors.push((rule, regime, worst));
    }
    BoundReport { rows, octave_factors }
}

/// sup_r |p_{lambda,eta}(r)| / ((lambda^2 + eta^2) eta (1 + r) e^{-r/2}) and its location.
pub fn low_frequency_check(
    lambda: f64,
    eta: f64,
    bump: &BumpFamily,
    grid: &RadialGrid,
    cfg: &KernelConfig,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&lambda) {
        return invalid(format!("low-frequency check needs 0 <= lambda <= 1, got {lambda}"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return invalid(format!("low-frequency check needs 0 < eta < 1, got {eta}"));
    }
    let k = ProjectorKernel::p(SpectralWindow::new(lambda, eta)?, *bump)?;
    let v = k.abel(grid, cfg)?.profile;
    let mut best = (0.0, 0.0);
    for (&r, p) in grid.r.iter().zip(&v.values) {
        let n = p.norm() / ((lambda * lambda + eta * eta) * eta * (1.0 + r) * (-r / 2.0).exp());
        if n > best.0 {
            best = (n, r);
        }
    }
    Ok(best)
}

/// Low-frequency normalized sups over a (lambda, eta) grid, and max / min over the grid.
pub fn low_frequency_scan(
    lambdas: &[f64],
    etas: &[f64],
    bump: &BumpFamily,
    r_cap: f64,
    cfg: &KernelConfig,
) -> Result<(Vec<(f64, f64, f64, f64)>, f64)> {
    let mut rows = Vec::new();
    for &l in lambdas {
        for &e in etas {
            let support = bump.hat_support() / e;
            let grid = sampling_grid(support.min(r_cap), l + e, 8.0)?;
            let (v, r) = low_frequency_check(l, e, bump, &grid, cfg)?;
            rows.push((l, e, v, r));
        }
    }
    let hi = rows.iter().map(|x| x.2).fold(0.0, f64::max);
    let lo = rows.iter().map(|x| x.2).fold(f64::INFINITY, f64::min);
    Ok((rows, hi / lo))
}

/// sup_r |sigma_{lambda,y}(r)| / lambda^{1/2} for each lambda, and the band max / min.
pub fn sigma_band(lambdas: &[f64], y: f64, bump: &BumpFamily, cfg: &KernelConfig) -> Result<(Vec<(f64, f64)>, f64)> {
    let mut out = Vec::new();
    for &l in lambdas {
        let k = ProjectorKernel::sigma(l, y, *bump)?;
        let grid = sampling_grid(k.support(), l, 6.0)?;
        let v = k.abel(&grid, cfg)?.profile;
        let sup = v.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        out.push((l, sup / l.sqrt()));
    }
    let hi = out.iter().map(|x| x.1).fold(0.0, f64::max);
    let lo = out.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    Ok((out, hi / lo))
}
