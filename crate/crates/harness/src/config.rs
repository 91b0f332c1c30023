//! Flat key/value experiment configuration.
//!
//! ```text
//! experiment = spherical-scan
//! lambda = 50:400:log4
//! eta = 0.1
//! p = 8
//!
//! [quadrature]
//! max_panel = 1.0
//! ```
//!
//! Keys inside a `[section]` are read as `section.key`. Grids are `start:stop:logN`,
//! `start:stop:linN` or comma lists.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use hypspec::projector::{BumpFamily, BumpKind, EtaRule};

use crate::error::{HarnessError, HarnessResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    KernelScan,
    SphericalScan,
    KnappScan,
    CylinderCheck,
    DispersiveScan,
    ZScan,
    CuspRun,
    StripCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::KernelScan,
        Experiment::SphericalScan,
        Experiment::KnappScan,
        Experiment::CylinderCheck,
        Experiment::DispersiveScan,
        Experiment::ZScan,
        Experiment::CuspRun,
        Experiment::StripCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::KernelScan => "kernel-scan",
            Experiment::SphericalScan => "spherical-scan",
            Experiment::KnappScan => "knapp-scan",
            Experiment::CylinderCheck => "cylinder-check",
            Experiment::DispersiveScan => "dispersive-scan",
            Experiment::ZScan => "z-scan",
            Experiment::CuspRun => "cusp-run",
            Experiment::StripCheck => "strip-check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

/// How eta is set per lambda in Knapp and kernel scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaSpec {
    Value(f64),
    InverseLambda,
    EqualLambda,
    /// 0.1 / log lambda.
    InverseLog,
}

impl EtaSpec {
    pub fn eta(self, lambda: f64) -> f64 {
        match self {
            EtaSpec::Value(e) => e,
            EtaSpec::InverseLambda => 1.0 / lambda,
            EtaSpec::EqualLambda => lambda,
            EtaSpec::InverseLog => 0.1 / lambda.ln(),
        }
    }

    pub fn eta_rule(self) -> Option<EtaRule> {
        match self {
            EtaSpec::Value(e) => Some(EtaRule::Fixed(e)),
            EtaSpec::InverseLambda => Some(EtaRule::InverseLambda),
            EtaSpec::EqualLambda => Some(EtaRule::EqualLambda),
            EtaSpec::InverseLog => None,
        }
    }

    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "1/lambda" => Ok(EtaSpec::InverseLambda),
            "lambda" => Ok(EtaSpec::EqualLambda),
            "0.1/log(lambda)" | "inverse-log" => Ok(EtaSpec::InverseLog),
            _ => parse_f64(s).map(EtaSpec::Value),
        }
    }
}

/// Cutoff family as written in a config: `plateau`, `bspline6`, `positive-bspline6`.
pub fn parse_bump(s: &str) -> Result<BumpFamily, String> {
    let kind = if s == "plateau" {
        BumpKind::Plateau
    } else if let Some(n) = s.strip_prefix("positive-bspline") {
        BumpKind::PositiveBSpline { order: n.parse().map_err(|_| format!("bad B-spline order in '{s}'"))? }
    } else if let Some(n) = s.strip_prefix("bspline") {
        BumpKind::BSpline { order: n.parse().map_err(|_| format!("bad B-spline order in '{s}'"))? }
    } else {
        return Err(format!("unknown bump '{s}'"));
    };
    BumpFamily::build(kind).map_err(|e| e.to_string())
}

pub fn bump_name(b: &BumpFamily) -> String {
    match b.kind {
        BumpKind::Plateau => "plateau".into(),
        BumpKind::BSpline { order } => format!("bspline{order}"),
        BumpKind::PositiveBSpline { order } => format!("positive-bspline{order}"),
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("malformed number '{s}'"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not a finite number"))
    }
}

const MAX_GRID_POINTS: usize = 100_000;

/// Expands `start:stop:logN`, `start:stop:linN` or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty grid".into());
    }
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.len() {
        1 => s.split(',').map(|x| parse_f64(x.trim())).collect(),
        3 => {
            let a = parse_f64(parts[0])?;
            let b = parse_f64(parts[1])?;
            let (log, n) = if let Some(n) = parts[2].strip_prefix("log") {
                (true, n)
            } else if let Some(n) = parts[2].strip_prefix("lin") {
                (false, n)
            } else {
                return Err(format!("grid spacing '{}' must be logN or linN", parts[2]));
            };
            let n: usize = n.parse().map_err(|_| format!("malformed point count '{n}'"))?;
            if !(1..=MAX_GRID_POINTS).contains(&n) {
                return Err(format!("point count {n} outside 1..={MAX_GRID_POINTS}"));
            }
            if n == 1 {
                return if a == b { Ok(vec![a]) } else { Err("one-point grid needs start = stop".into()) };
            }
            if log && !(a > 0.0 && b > 0.0) {
                return Err("log grid needs positive ends".into());
            }
            let out = (0..n)
                .map(|k| {
                    let f = k as f64 / (n - 1) as f64;
                    if k == n - 1 {
                        b
                    } else if log {
                        let v = (a.ln() + f * (b.ln() - a.ln())).exp();
                        // Snap to integers when the ratio is exact, so 32:512:log5 gives powers of two.
                        if (v - v.round()).abs() < 1e-9 * v.abs() { v.round() } else { v }
                    } else {
                        a + f * (b - a)
                    }
                })
                .collect::<Vec<f64>>();
            if out.iter().any(|x| !x.is_finite()) {
                return Err(format!("grid '{s}' overflows"));
            }
            Ok(out)
        }
        _ => Err(format!("malformed grid '{s}'")),
    }
}

fn is_geometric(g: &[f64]) -> bool {
    if g.len() < 2 || g.iter().any(|&x| !(x > 0.0)) {
        return false;
    }
    let r = g[1] / g[0];
    r > 1.0 && g.windows(2).all(|w| ((w[1] / w[0]) / r - 1.0).abs() < 1e-6)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOverrides {
    pub wavelengths_per_panel: f64,
    pub max_panel: f64,
    pub samples_per_wavelength: f64,
    pub abel_tail: f64,
}

impl Default for QuadOverrides {
    fn default() -> Self {
        QuadOverrides { wavelengths_per_panel: 2.0, max_panel: 1.0, samples_per_wavelength: 24.0, abel_tail: 80.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub lambda: Vec<f64>,
    pub eta: Vec<EtaSpec>,
    pub p: Vec<f64>,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub ell: Vec<f64>,
    pub s: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub r: Vec<f64>,
    pub alpha: f64,
    pub r_max: f64,
    pub span: f64,
    pub samples: usize,
    pub bump: String,
    pub fit: bool,
    pub seed: u64,
    pub quadrature: QuadOverrides,
    pub out: Option<String>,
    pub overwrite: bool,
}

impl ExperimentConfig {
    /// Defaults reproducing the reference scan of each experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let pow2 = |a: i32, b: i32| (a..=b).map(|k| 2f64.powi(k)).collect::<Vec<_>>();
        let mut c = ExperimentConfig {
            experiment,
            lambda: vec![100.0],
            eta: vec![EtaSpec::Value(0.1)],
            p: vec![4.0],
            t: vec![1.0],
            u: vec![30.0, 40.0, 50.0, 60.0],
            ell: vec![0.5, 1.0, 2.0],
            s: vec![0.3, 0.45],
            epsilon: vec![0.05, 0.1, 0.25, 0.5],
            r: (0..=58).map(|k| 1.0 + 0.5 * k as f64).collect(),
            alpha: 0.75,
            r_max: 10.0,
            span: 60.0,
            samples: 10,
            bump: "plateau".into(),
            fit: true,
            seed: 0,
            quadrature: QuadOverrides::default(),
            out: None,
            overwrite: false,
        };
        match experiment {
            Experiment::KernelScan => {
                c.lambda = pow2(3, 9);
                c.eta = vec![EtaSpec::InverseLambda, EtaSpec::Value(0.1), EtaSpec::Value(1.0)];
                c.r_max = 12.0;
            }
            Experiment::SphericalScan => {
                c.lambda = vec![50.0, 100.0, 200.0, 400.0];
                c.p = vec![8.0];
            }
            Experiment::KnappScan => {
                c.lambda = pow2(6, 8);
                c.eta = vec![EtaSpec::InverseLog];
            }
            Experiment::CylinderCheck => {
                c.lambda = vec![0.1, 8.0];
            }
            Experiment::DispersiveScan => {
                c.lambda = vec![16.0, 64.0];
                c.t = pow2(0, 6);
            }
            Experiment::ZScan => {
                c.eta = [0.01, 0.02, 0.04, 0.08, 0.16].map(EtaSpec::Value).to_vec();
                c.bump = "positive-bspline6".into();
            }
            Experiment::CuspRun => {
                c.lambda = vec![20.0];
            }
            Experiment::StripCheck => {}
        }
        c
    }

    pub fn bump_family(&self) -> HarnessResult<BumpFamily> {
        parse_bump(&self.bump).map_err(|m| HarnessError::Config { line: 0, message: m })
    }

    /// Numeric eta values; rejects per-lambda rules.
    pub fn eta_values(&self) -> HarnessResult<Vec<f64>> {
        self.eta
            .iter()
            .map(|e| match e {
                EtaSpec::Value(v) => Ok(*v),
                _ => Err(HarnessError::Config { line: 0, message: format!("{} needs numeric eta values", self.experiment) }),
            })
            .collect()
    }

    fn validate(&self) -> Result<(), String> {
        let grids: [(&str, usize); 9] = [
            ("lambda", self.lambda.len()),
            ("eta", self.eta.len()),
            ("p", self.p.len()),
            ("t", self.t.len()),
            ("u", self.u.len()),
            ("ell", self.ell.len()),
            ("s", self.s.len()),
            ("epsilon", self.epsilon.len()),
            ("r", self.r.len()),
        ];
        for (name, n) in grids {
            if n == 0 {
                return Err(format!("grid '{name}' is empty"));
            }
        }
        if self.samples == 0 {
            return Err("samples must be positive".into());
        }
        parse_bump(&self.bump)?;
        let q = &self.quadrature;
        for (name, v) in [
            ("quadrature.wavelengths_per_panel", q.wavelengths_per_panel),
            ("quadrature.max_panel", q.max_panel),
            ("quadrature.samples_per_wavelength", q.samples_per_wavelength),
            ("quadrature.abel_tail", q.abel_tail),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive and finite"));
            }
        }
        if self.fit {
            let scan = match self.experiment {
                Experiment::SphericalScan | Experiment::KnappScan if self.lambda.len() > 1 => Some(("lambda", &self.lambda)),
                Experiment::DispersiveScan => Some(("t", &self.t)),
                _ => None,
            };
            if let Some((name, g)) = scan {
                if g.len() >= 3 && !is_geometric(g) {
                    return Err(format!("grid '{name}' must be geometric for a slope fit"));
                }
            }
        }
        Ok(())
    }
}

/// Parses a configuration document. Unknown and duplicate keys are errors.
pub fn parse_config(text: &str) -> HarnessResult<ExperimentConfig> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| HarnessError::Config { line: line_no, message: "unterminated section header".into() })?
                .trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(HarnessError::Config { line: line_no, message: format!("bad section name '{name}'") });
            }
            section = format!("{name}.");
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Config { line: line_no, message: "expected key = value".into() })?;
        let key = format!("{section}{}", k.trim());
        let value = v.trim().trim_matches('"').to_string();
        if entries.insert(key.clone(), (line_no, value)).is_some() {
            return Err(HarnessError::Config { line: line_no, message: format!("duplicate key '{key}'") });
        }
    }
    let (exp_line, exp) = entries
        .remove("experiment")
        .ok_or(HarnessError::Config { line: 0, message: "missing key 'experiment'".into() })?;
    let experiment: Experiment = exp.parse().map_err(|m| HarnessError::Config { line: exp_line, message: m })?;
    let mut c = ExperimentConfig::defaults(experiment);
    for (key, (line, value)) in entries {
        let err = |m: String| HarnessError::Parse { line, key: key.clone(), message: m };
        let num = |v: &str| parse_f64(v).map_err(err);
        match key.as_str() {
            "lambda" => c.lambda = parse_grid(&value).map_err(err)?,
            "eta" => c.eta = value.split(',').map(|x| EtaSpec::parse(x.trim())).collect::<Result<_, _>>().map_err(err)?,
            "p" => c.p = parse_grid(&value).map_err(err)?,
            "t" => c.t = parse_grid(&value).map_err(err)?,
            "u" => c.u = parse_grid(&value).map_err(err)?,
            "ell" => c.ell = parse_grid(&value).map_err(err)?,
            "s" => c.s = parse_grid(&value).map_err(err)?,
            "epsilon" => c.epsilon = parse_grid(&value).map_err(err)?,
            "r" => c.r = parse_grid(&value).map_err(err)?,
            "alpha" => c.alpha = num(&value)?,
            "r_max" => c.r_max = num(&value)?,
            "span" => c.span = num(&value)?,
            "samples" => c.samples = value.parse().map_err(|_| err(format!("malformed count '{value}'")))?,
            "bump" => {
                parse_bump(&value).map_err(err)?;
                c.bump = value;
            }
            "fit" => c.fit = value.parse().map_err(|_| err(format!("expected true or false, got '{value}'")))?,
            "seed" => c.seed = value.parse().map_err(|_| err(format!("malformed seed '{value}'")))?,
            "out" | "output.dir" => c.out = Some(value),
            "overwrite" | "output.overwrite" => {
                c.overwrite = value.parse().map_err(|_| err(format!("expected true or false, got '{value}'")))?
            }
            "quadrature.wavelengths_per_panel" => c.quadrature.wavelengths_per_panel = num(&value)?,
            "quadrature.max_panel" => c.quadrature.max_panel = num(&value)?,
            "quadrature.samples_per_wavelength" => c.quadrature.samples_per_wavelength = num(&value)?,
            "quadrature.abel_tail" => c.quadrature.abel_tail = num(&value)?,
            _ => return Err(HarnessError::Config { line, message: format!("unknown key '{key}'") }),
        }
    }
    c.validate().map_err(|m| HarnessError::Config { line: 0, message: m })?;
    Ok(c)
}
