//! Experiment dispatch. Cells are independent and merged in their declared order, so
//! serial and parallel runs produce the same numbers.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use hypspec::cusp::{cusp_divergence, CuspProfile, DIVERGENCE_CSV_HEADER};
use hypspec::dispersive::{kernel_sup, z_norms, DispersiveConfig, InnerBump, DECAY_CSV_HEADER};
use hypspec::examples::{fit_exponent, knapp_norms, spherical_example, ExponentFit, ExponentTarget, KnappRegionSpec};
use hypspec::geometry::{cyclic_poincare_closed_form, poincare_partial_sum, GroupPresentation, Point};
use hypspec::projector::{bound_cell, summarize_bounds, BoundRow, KernelConfig, ScanSpec, SpectralWindow};
use hypspec::quad::QuadConfig;
use hypspec::quotient::{cylinder_truncation, quasi_periodicity_defect, spectral_measure_identity_check, CylinderEigenfunction};
use hypspec::special::{spherical_function, strip_decay_check, PhiRoute};
use hypspec::transform::{fmt_f64, multiplier_extension_check};
use hypspec::Complex64;

use crate::config::{EtaSpec, Experiment, ExperimentConfig};
use crate::error::{HarnessError, HarnessResult};
use crate::summary::{versions, Cell, FitRecord, Flag, Num, RunSummary, Table};

pub const KERNEL_CSV_HEADER: &str = "lambda,eta,regime,normalized_sup,r_argmax";
pub const SCAN_CSV_HEADER: &str = "lambda,eta,p,l2,lp,ratio,slope_target";
pub const IDENTITY_CSV_HEADER: &str = "ell,lambda,residual,K,quad_nodes";
pub const POINCARE_CSV_HEADER: &str = "s,ell,L,partial,tail_bound,closed_form";
pub const Z_CSV_HEADER: &str = "lambda,eta,l1,l2,linf,c2,c3";
pub const STRIP_CSV_HEADER: &str = "epsilon,r,phi,ratio";

/// What the cells of one experiment produced before fits and flags.
struct Partial {
    cells: Vec<Cell>,
    tables: Vec<Table>,
    fits: Vec<FitRecord>,
    flags: Vec<Flag>,
}

impl Partial {
    fn new(cells: Vec<Cell>) -> Self {
        Partial { cells, tables: Vec::new(), fits: Vec::new(), flags: Vec::new() }
    }
}

fn quad(c: &ExperimentConfig) -> QuadConfig {
    QuadConfig { wavelengths_per_panel: c.quadrature.wavelengths_per_panel, max_panel: c.quadrature.max_panel }
}

fn kernel_cfg(c: &ExperimentConfig) -> KernelConfig {
    KernelConfig {
        quad_wavelengths: c.quadrature.wavelengths_per_panel,
        quad_max_panel: c.quadrature.max_panel,
        abel_tail: c.quadrature.abel_tail,
        ..KernelConfig::default()
    }
}

fn dispersive_cfg(c: &ExperimentConfig) -> DispersiveConfig {
    DispersiveConfig {
        quad_wavelengths: c.quadrature.wavelengths_per_panel,
        quad_max_panel: c.quadrature.max_panel,
        samples_per_wavelength: c.quadrature.samples_per_wavelength,
        abel_tail: c.quadrature.abel_tail,
    }
}

/// Runs `f` over `items` on the current pool, keeping input order; a failing item
/// becomes a cell carrying the error.
fn map_cells<T, R, F>(items: &[T], id: impl Fn(&T) -> String + Sync, f: F) -> Vec<(Cell, Option<R>)>
where
    T: Sync,
    R: Send,
    F: Fn(&T, Cell) -> hypspec::Result<(Cell, R)> + Sync,
{
    items
        .par_iter()
        .map(|it| {
            let base = Cell::new(id(it));
            match f(it, base.clone()) {
                Ok((c, r)) => (c, Some(r)),
                Err(e) => (Cell { error: Some(e.to_string()), ..base }, None),
            }
        })
        .collect()
}

fn fit_record(name: String, pts: &[(f64, f64)], target: f64, tolerance: f64) -> FitRecord {
    match fit_exponent(pts) {
        Ok(ExponentFit { slope, intercept, r_squared, .. }) => FitRecord {
            name,
            slope: Num(slope),
            intercept: Num(intercept),
            r_squared: Num(r_squared),
            points: pts.len(),
            target,
            tolerance,
            pass: (slope - target).abs() <= tolerance,
        },
        Err(_) => FitRecord {
            name,
            slope: Num(f64::NAN),
            intercept: Num(f64::NAN),
            r_squared: Num(f64::NAN),
            points: pts.len(),
            target,
            tolerance,
            pass: false,
        },
    }
}

fn eta_label(e: EtaSpec) -> String {
    match e {
        EtaSpec::Value(v) => fmt_f64(v),
        EtaSpec::InverseLambda => "1/lambda".into(),
        EtaSpec::EqualLambda => "lambda".into(),
        EtaSpec::InverseLog => "0.1/log(lambda)".into(),
    }
}

fn kernel_scan(c: &ExperimentConfig) -> HarnessResult<Partial> {
    let mut spec = ScanSpec { lambdas: c.lambda.clone(), r_cap: c.r_max, bump: c.bump_family()?, ..ScanSpec::default() };
    spec.etas = c
        .eta
        .iter()
        .map(|e| e.eta_rule().ok_or(HarnessError::Config { line: 0, message: "kernel-scan has no 0.1/log(lambda) rule".into() }))
        .collect::<HarnessResult<_>>()?;
    let cfg = kernel_cfg(c);
    let items: Vec<(EtaSpec, f64)> = c.eta.iter().flat_map(|&e| c.lambda.iter().map(move |&l| (e, l))).collect();
    let out = map_cells(
        &items,
        |(e, l)| format!("lambda={}/eta={}", fmt_f64(*l), eta_label(*e)),
        |&(e, l), cell| {
            let rows = bound_cell(l, e.eta_rule().expect("checked above"), &spec, &cfg)?;
            let mut cell = cell.with("lambda", l).with("eta", e.eta(l));
            for r in &rows {
                cell = cell.with(&format!("{}.normalized_sup", r.regime), r.normalized_sup);
            }
            Ok((cell, rows))
        },
    );
    let mut table = Table::new("kernel.csv", KERNEL_CSV_HEADER);
    let mut rows: Vec<BoundRow> = Vec::new();
    let mut cells = Vec::new();
    for (cell, r) in out {
        cells.push(cell);
        for row in r.into_iter().flatten() {
            table.rows.push(vec![
                fmt_f64(row.lambda),
                fmt_f64(row.eta),
                row.regime.clone(),
                fmt_f64(row.normalized_sup),
                fmt_f64(row.r_argmax),
            ]);
            rows.push(row);
        }
    }
    let report = summarize_bounds(rows);
    let mut p = Partial::new(cells);
    for (rule, regime, f) in &report.octave_factors {
        p.flags.push(Flag::new(format!("octave_factor[{regime}, eta={rule}]"), *f, 5.0));
    }
    p.tables.push(table);
    Ok(p)
}

fn scan_row(table: &mut Table, l: f64, e: f64, p: f64, l2: f64, lp: f64, ratio: f64, target: f64) {
    table.push_nums(&[l, e, p, l2, lp, ratio, target]);
}

/// Slope fits over lambda (per p and eta rule) and over numeric eta (per p and lambda).
fn scaling_fits(
    c: &ExperimentConfig,
    cells: &[Cell],
    lambda_target: fn(f64) -> f64,
    lambda_tol: f64,
) -> Vec<FitRecord> {
    let mut fits = Vec::new();
    if !c.fit {
        return fits;
    }
    let ratio_of = |l: f64, e: EtaSpec, p: f64| {
        cells
            .iter()
            .find(|x| x.id == cell_id(l, e, p))
            .and_then(|x| x.get("ratio"))
    };
    for &p in &c.p {
        if c.lambda.len() >= 3 {
            for &e in &c.eta {
                let pts: Vec<(f64, f64)> = c.lambda.iter().filter_map(|&l| ratio_of(l, e, p).map(|r| (l, r))).collect();
                let name = format!("lambda-slope[p={}, eta={}]", fmt_f64(p), eta_label(e));
                fits.push(fit_record(name, &pts, lambda_target(p), lambda_tol));
            }
        }
        let numeric: Vec<EtaSpec> = c.eta.iter().copied().filter(|e| matches!(e, EtaSpec::Value(_))).collect();
        if numeric.len() >= 3 {
            for &l in &c.lambda {
                let pts: Vec<(f64, f64)> =
                    numeric.iter().filter_map(|&e| ratio_of(l, e, p).map(|r| (e.eta(l), r))).collect();
                let name = format!("eta-slope[p={}, lambda={}]", fmt_f64(p), fmt_f64(l));
                fits.push(fit_record(name, &pts, 0.5, 0.05));
            }
        }
    }
    fits
}

fn cell_id(l: f64, e: EtaSpec, p: f64) -> String {
    format!("lambda={}/eta={}/p={}", fmt_f64(l), eta_label(e), fmt_f64(p))
}

fn triples(c: &ExperimentConfig) -> Vec<(f64, EtaSpec, f64)> {
    let mut v = Vec::new();
    for &p in &c.p {
        for &e in &c.eta {
            for &l in &c.lambda {
                v.push((l, e, p));
            }
        }
    }
    v
}

fn spherical_scan(c: &ExperimentConfig) -> HarnessResult<Partial> {
    let items = triples(c);
    let r_max = c.r_max;
    let out = map_cells(
        &items,
        |&(l, e, p)| cell_id(l, e, p),
        |&(l, e, p), cell| {
            let ex = spherical_example(&SpectralWindow::new(l, e.eta(l))?, p, r_max)?;
            let cell = cell.with("lambda", l).with("eta", e.eta(l)).with("p", p);
            let cell = cell.with("l2", ex.l2).with("l2_radial", ex.l2_radial).with("lp", ex.lp.value).with("ratio", ex.ratio);
            Ok((cell, ex))
        },
    );
    let mut table = Table::new("scan.csv", SCAN_CSV_HEADER);
    let mut cells = Vec::new();
    for (cell, ex) in out {
        if let Some(ex) = ex {
            scan_row(&mut table, ex.lambda, ex.eta, ex.p, ex.l2, ex.lp.value, ex.ratio, ExponentTarget::radial_value(ex.p));
        }
        cells.push(cell);
    }
    let mut p = Partial::new(cells);
    p.fits = scaling_fits(c, &p.cells, ExponentTarget::radial_value, 0.05);
    p.tables.push(table);
    Ok(p)
}

fn knapp_scan(c: &ExperimentConfig) -> HarnessResult<Partial> {
    let items = triples(c);
    let out = map_cells(
        &items,
        |&(l, e, p)| cell_id(l, e, p),
        |&(l, e, p), cell| {
            let spec = KnappRegionSpec::new(SpectralWindow::new(l, e.eta(l))?)?;
            let n = knapp_norms(&spec, p)?;
            let cell = cell.with("lambda", l).with("eta", e.eta(l)).with("p", p);
            Ok((cell.with("l2", n.l2_exact).with("lp", n.lp_region).with("ratio", n.ratio), n))
        },
    );
    let mut table = Table::new("scan.csv", SCAN_CSV_HEADER);
    let mut cells = Vec::new();
    for (cell, n) in out {
        if let Some(n) = n {
            scan_row(&mut table, n.lambda, n.eta, n.p, n.l2_exact, n.lp_region, n.ratio, ExponentTarget::knapp_value(n.p));
        }
        cells.push(cell);
    }
    let mut p = Partial::new(cells);
    p.fits = scaling_fits(c, &p.cells, ExponentTarget::knapp_value, 0.06);
    p.tables.push(table);
    Ok(p)
}

#[derive(Debug, Clone, Copy)]
struct CylinderSample {
    ell: f64,
    lambda: f64,
    z: Point,
    z0: Point,
    xi: f64,
}

fn cylinder_check(c: &ExperimentConfig) -> HarnessResult<Partial> {
    let lo = c.lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = c.lambda.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) {
        return Err(HarnessError::Config { line: 0, message: "cylinder-check needs positive lambda".into() });
    }
    // Samples are drawn serially so the stream does not depend on the pool.
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut samples = Vec::new();
    for &ell in &c.ell {
        for _ in 0..c.samples {
            let z = Point { x: rng.gen_range(-1.0..1.0), y: rng.gen_range(0.5..2.0) };
            let z0 = Point { x: rng.gen_range(-1.0..1.0), y: rng.gen_range(0.5..2.0) };
            let lambda = if hi > lo { rng.gen_range(lo..hi) } else { lo };
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let xi = sign * if ell > 0.0 { rng.gen_range(1.0..ell.exp().max(1.0 + 1e-9)) } else { 1.0 };
            samples.push(CylinderSample { ell, lambda, z, z0, xi });
        }
    }
    let out = map_cells(
        &samples,
        |s| format!("ell={}/lambda={}", fmt_f64(s.ell), fmt_f64(s.lambda)),
        |s, cell| {
            let rep = spectral_measure_identity_check(s.ell, s.lambda, s.z, s.z0)?;
            let k = cylinder_truncation(s.ell, &[s.z], 1e-12) + 2;
            let quasi = quasi_periodicity_defect(&CylinderEigenfunction::new(s.ell, s.lambda, s.xi, k)?, s.z);
            let cell = cell
                .with("ell", s.ell)
                .with("lambda", s.lambda)
                .with("x", s.z.x)
                .with("y", s.z.y)
                .with("x0", s.z0.x)
                .with("y0", s.z0.y)
                .with("residual", rep.residual)
                .with("quasi_periodicity", quasi);
            Ok((cell, rep))
        },
    );
    let mut table = Table::new("identity.csv", IDENTITY_CSV_HEADER);
    let mut cells = Vec::new();
    let mut worst_res: f64 = 0.0;
    let mut worst_quasi: f64 = 0.0;
    for (cell, rep) in out {
        if let Some(r) = rep {
            table.push_nums(&[r.ell, r.lambda, r.residual, r.k as f64, r.quad_nodes as f64]);
            worst_res = worst_res.max(r.residual);
            worst_quasi = worst_quasi.max(cell.get("quasi_periodicity").unwrap_or(f64::NAN));
        }
        cells.push(cell);
    }
    let mut poincare = Table::new("poincare.csv", POINCARE_CSV_HEADER);
    let mut bracket: f64 = 0.0;
    for &s in &c.s {
        for &ell in &c.ell {
            let closed = cyclic_poincare_closed_form(s, ell);
            for big_l in [5usize, 20, 80] {
                let g = GroupPresentation::cyclic(ell, big_l)?;
                let ps = poincare_partial_sum(&g, s, Point::i(), Point::i(), big_l)?;
                poincare.push_nums(&[s, ell, big_l as f64, ps.partial, ps.tail_bound, closed]);
                // Positive when the closed form leaves [partial, partial + tail].
                let miss = (ps.partial - closed).max(closed - ps.partial - ps.tail_bound) / closed;
                bracket = bracket.max(miss);
            }
        }
    }
    let mut p = Partial::new(cells);
    p.flags.push(Flag::new("max_identity_residual", worst_res, 1e-4));
    p.flags.push(Flag::new("max_quasi_periodicity_defect", worst_quasi, 1e-8));
    p.flags.push(Flag::new("poincare_bracket_excess", bracket, 1e-12));
    p.tables.push(table);
    p.tables.push(poincare);
    Ok(p)
}

fn dispersive_scan(c: &ExperimentConfig) -> HarnessResult<Partial> {
    let bump = c.bump_family()?;
    let cfg = dispersive_cfg(c);
    let items: Vec<(f64, f64)> = c.lambda.iter().flat_map(|&l| c.t.iter().map(move |&t| (l, t))).collect();
    let out = map_cells(
        &items,
        |(l, t)| format!("lambda={}/t={}", fmt_f64(*l), fmt_f64(*t)),
        |&(l, t), cell| {
            let (sup, arg) = kernel_sup(t, l, bump, 8.0, &cfg)?;
            Ok((cell.with("lambda", l).with("t", t).with("sup_abs_K", sup).with("r_argmax", arg), (sup, arg)))
        },
    );
    let mut table = Table::new("decay.csv", DECAY_CSV_HEADER);
    let mut cells = Vec::new();
    for (cell, v) in out {
        if let Some((sup, arg)) = v {
            let (l, t) = (cell.get("lambda").unwrap_or(f64::NAN), cell.get("t").unwrap_or(f64::NAN));
            let branch = if t < 1.0 { "small" } else { "large" };
            table.rows.push(vec![fmt_f64(l), fmt_f64(t), fmt_f64(sup), fmt_f64(arg), branch.into()]);
        }
        cells.push(cell);
    }
    let mut p = Partial::new(cells);
    if c.fit {
        for &l in &c.lambda {
            let pts: Vec<(f64, f64)> = p
                .cells
                .iter()
                .filter(|x| x.get("lambda") == Some(l) && x.get("t").is_some_and(|t| t >= 1.0))
                .filter_map(|x| Some((x.get("t")?, x.get("sup_abs_K")?)))
                .collect();
            if pts.len() >= 3 {
                p.fits.push(fit_record(format!("t-slope[lambda={}]", fmt_f64(l)), &pts, -1.5, 0.15));
            }
        }
    }
    p.tables.push(table);
    Ok(p)
}

fn z_scan(c: &ExperimentConfig) -> HarnessResult<Partial> {
    let chi = c.bump_family()?;
    let etas = c.eta_values()?;
    let q = quad(c);
    let span = c.span;
    let items: Vec<(f64, f64)> = c.lambda.iter().flat_map(|&l| etas.iter().map(move |&e| (l, e))).collect();
    let out = map_cells(
        &items,
        |(l, e)| format!("lambda={}/eta={}", fmt_f64(*l), fmt_f64(*e)),
        |&(l, e), cell| {
            let n = z_norms(SpectralWindow::new(l, e)?, InnerBump::Plateau, chi, span, &q)?;
            let cell = cell.with("lambda", l).with("eta", e);
            let cell = cell.with("l1", n.l1).with("l2", n.l2).with("linf", n.linf).with("c2", n.c2).with("c3", n.c3);
            Ok((cell, n))
        },
    );
    let mut table = Table::new("z.csv", Z_CSV_HEADER);
    let mut cells = Vec::new();
    for (cell, n) in out {
        if let Some(n) = n {
            table.push_nums(&[n.lambda, n.eta, n.l1, n.l2, n.linf, n.c2, n.c3]);
        }
        cells.push(cell);
    }
    let mut p = Partial::new(cells);
    if c.fit && etas.len() >= 3 {
        for &l in &c.lambda {
            for (key, target) in [("l1", 0.0), ("l2", 0.5), ("linf", 1.0)] {
                let pts: Vec<(f64, f64)> = p
                    .cells
                    .iter()
                    .filter(|x| x.get("lambda") == Some(l))
                    .filter_map(|x| Some((x.get("eta")?, x.get(key)?)))
                    .collect();
                p.fits.push(fit_record(format!("eta-slope[{key}, lambda={}]", fmt_f64(l)), &pts, target, 0.05));
            }
        }
    }
    p.tables.push(table);
    Ok(p)
}

fn cusp_run(c: &ExperimentConfig) -> HarnessResult<Partial> {
    let etas = c.eta_values()?;
    let mut items = Vec::new();
    for &l in &c.lambda {
        for &e in &etas {
            for &p in &c.p {
                items.push((l, e, p));
            }
        }
    }
    let (alpha, u) = (c.alpha, c.u.clone());
    let out = map_cells(
        &items,
        |&(l, e, p)| format!("lambda={}/eta={}/p={}", fmt_f64(l), fmt_f64(e), fmt_f64(p)),
        |&(l, e, p), cell| {
            let prof = CuspProfile::new(SpectralWindow::new(l, e)?, alpha)?;
            let rep = cusp_divergence(&prof, p, &u)?;
            let cell = cell.with("lambda", l).with("eta", e).with("p", p).with("alpha", alpha);
            let cell = cell.with("slope", rep.slope).with("l2", rep.l2).with("l2_closed", rep.l2_closed);
            Ok((cell, rep))
        },
    );
    let mut table = Table::new("divergence.csv", DIVERGENCE_CSV_HEADER);
    let mut cells = Vec::new();
    let mut fits = Vec::new();
    let mut flags = Vec::new();
    for (cell, rep) in out {
        if let Some(rep) = rep {
            for r in &rep.rows {
                table.rows.push(vec![
                    fmt_f64(r.p),
                    fmt_f64(r.alpha),
                    fmt_f64(r.eta),
                    fmt_f64(r.big_u),
                    fmt_f64(r.lp_truncated),
                    r.slope_estimate.map(fmt_f64).unwrap_or_default(),
                ]);
            }
            let err = (rep.l2 / rep.l2_closed - 1.0).abs();
            flags.push(Flag::new(format!("l2_closed_form_rel_err[{}]", cell.id), err, 1e-8));
            if c.fit && u.len() >= 3 && rep.target > 0.0 {
                let fr = FitRecord {
                    name: format!("U-slope[{}]", cell.id),
                    slope: Num(rep.slope),
                    intercept: Num(f64::NAN),
                    r_squared: Num(f64::NAN),
                    points: rep.rows.len(),
                    target: rep.target,
                    tolerance: 0.02,
                    pass: (rep.slope - rep.target).abs() <= 0.02,
                };
                fits.push(fr);
            }
        }
        cells.push(cell);
    }
    let mut p = Partial::new(cells);
    p.fits = fits;
    p.flags = flags;
    p.tables.push(table);
    Ok(p)
}

/// Strip points used for the route, domination and heat-recovery checks.
fn strip_points(eps: &[f64]) -> Vec<Complex64> {
    let mut v = Vec::new();
    for &e in eps {
        for (k, re) in [0.0, 1.0, 2.5].into_iter().enumerate() {
            let im = if k % 2 == 0 { -e } else { e };
            v.push(Complex64::new(re, im));
        }
    }
    v
}

fn strip_check(c: &ExperimentConfig) -> HarnessResult<Partial> {
    let r_grid = c.r.clone();
    let out = map_cells(
        &c.epsilon,
        |e| format!("epsilon={}", fmt_f64(*e)),
        |&e, cell| {
            let rep = strip_decay_check(e, &r_grid)?;
            let cell = cell.with("epsilon", e).with("band_min", rep.band_min).with("band_max", rep.band_max);
            Ok((cell.with("band_ratio", rep.band_max / rep.band_min), rep))
        },
    );
    let mut table = Table::new("strip.csv", STRIP_CSV_HEADER);
    let mut cells = Vec::new();
    let mut band: f64 = 0.0;
    let mut lower: f64 = 0.0;
    for (cell, rep) in out {
        if let Some(rep) = rep {
            for ((r, phi), ratio) in rep.r.iter().zip(&rep.phi).zip(&rep.ratio) {
                table.push_nums(&[rep.epsilon, *r, *phi, *ratio]);
            }
            band = band.max(rep.band_max / rep.band_min);
            lower = lower.max(1.0 - rep.band_min);
        }
        cells.push(cell);
    }
    let pts = strip_points(&c.epsilon);
    let checks = map_cells(
        &pts,
        |l| format!("lambda={}{:+}i", fmt_f64(l.re), l.im),
        |&l, cell| {
            let mut at_zero: f64 = 0.0;
            let mut routes: f64 = 0.0;
            let mut excess: f64 = 0.0;
            for r in [0.0, 1.0, 4.0, 12.0] {
                let a = spherical_function(l, r, PhiRoute::Mechanism)?;
                let b = spherical_function(l, r, PhiRoute::Integral)?;
                if r == 0.0 {
                    at_zero = at_zero.max((a - 1.0).norm()).max((b - 1.0).norm());
                }
                routes = routes.max((a - b).norm() / b.norm().max(1e-300));
                let env = spherical_function(Complex64::new(0.0, l.im), r, PhiRoute::Integral)?.re;
                excess = excess.max(b.norm() / env - 1.0);
            }
            let cell = cell.with("re", l.re).with("im", l.im).with("phi0_err", at_zero).with("route_rel_err", routes);
            Ok((cell.with("domination_excess", excess), ()))
        },
    );
    let mut worst = [0.0f64; 3];
    for (cell, _) in checks {
        for (k, key) in ["phi0_err", "route_rel_err", "domination_excess"].iter().enumerate() {
            worst[k] = worst[k].max(cell.get(key).unwrap_or(f64::INFINITY));
        }
        cells.push(cell);
    }
    // Multiplier continuation is only claimed inside the open strip.
    let inner: Vec<Complex64> = pts.iter().copied().filter(|l| l.im.abs() < 0.5).collect();
    let heat = if inner.is_empty() { 0.0 } else { multiplier_extension_check(0.5, &inner, &quad(c))?.max_rel_err };
    let mut p = Partial::new(cells);
    p.flags.push(Flag::new("envelope_band_ratio", band, 100.0));
    p.flags.push(Flag::new("lower_bound_deficit", lower, 1e-10));
    p.flags.push(Flag::new("phi_at_zero_err", worst[0], 1e-10));
    p.flags.push(Flag::new("route_rel_err", worst[1], 1e-8));
    p.flags.push(Flag::new("domination_excess", worst[2], 1e-10));
    p.flags.push(Flag::new("heat_recovery_rel_err", heat, 1e-4));
    p.tables.push(table);
    Ok(p)
}

/// Runs the configured experiment on a pool of `threads` workers (0 = rayon default).
pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> HarnessResult<RunSummary> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config { line: 0, message: format!("thread pool: {e}") })?;
    let partial = pool.install(|| match config.experiment {
        Experiment::KernelScan => kernel_scan(config),
        Experiment::SphericalScan => spherical_scan(config),
        Experiment::KnappScan => knapp_scan(config),
        Experiment::CylinderCheck => cylinder_check(config),
        Experiment::DispersiveScan => dispersive_scan(config),
        Experiment::ZScan => z_scan(config),
        Experiment::CuspRun => cusp_run(config),
        Experiment::StripCheck => strip_check(config),
    })?;
    let mut flags = partial.flags;
    let errors = partial.cells.iter().filter(|c| c.error.is_some()).count();
    flags.push(Flag::new("failed_cells", errors as f64, 0.0));
    Ok(RunSummary {
        experiment: config.experiment,
        cells: partial.cells,
        fits: partial.fits,
        flags,
        versions: versions(),
        config_echo: config.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        tables: partial.tables,
    })
}
