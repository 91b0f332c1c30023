//! Run records and their JSON form.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use hypspec::transform::fmt_f64;

use crate::config::{Experiment, ExperimentConfig};

/// A float that survives JSON: finite values are numbers, the rest the strings
/// "inf", "-inf" and "nan".
/// Equality is on stored values, so NaN equals NaN.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0 || (self.0.is_nan() && other.0.is_nan())
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                match v {
                    "inf" => Ok(Num(f64::INFINITY)),
                    "-inf" => Ok(Num(f64::NEG_INFINITY)),
                    "nan" => Ok(Num(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// One unit of work: its parameters, results and any module error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: String,
    pub values: BTreeMap<String, Num>,
    pub error: Option<String>,
}

impl Cell {
    pub fn new(id: impl Into<String>) -> Self {
        Cell { id: id.into(), values: BTreeMap::new(), error: None }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.into(), Num(v));
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).map(|n| n.0)
    }
}

/// Slope fit with its target; `pass` is |slope - target| <= tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub name: String,
    pub slope: Num,
    pub intercept: Num,
    pub r_squared: Num,
    pub points: usize,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl FitRecord {
    pub fn recheck(&self) -> bool {
        (self.slope.0 - self.target).abs() <= self.tolerance
    }
}

/// Scalar check; `pass` is value <= bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub name: String,
    pub value: Num,
    pub bound: f64,
    pub pass: bool,
}

impl Flag {
    pub fn new(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Flag { name: name.into(), value: Num(value), bound, pass: value <= bound }
    }

    pub fn recheck(&self) -> bool {
        self.value.0 <= self.bound
    }
}

/// A CSV file produced by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: String,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, header: &str) -> Self {
        Table { file: file.into(), header: header.into(), rows: Vec::new() }
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    pub fn render(&self) -> String {
        let mut s = self.header.clone();
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub experiment: Experiment,
    pub cells: Vec<Cell>,
    pub fits: Vec<FitRecord>,
    pub flags: Vec<Flag>,
    pub versions: BTreeMap<String, String>,
    pub config_echo: ExperimentConfig,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl RunSummary {
    pub fn all_pass(&self) -> bool {
        self.fits.iter().all(|f| f.pass) && self.flags.iter().all(|f| f.pass)
    }

    pub fn cell_errors(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }

    /// True when every stored pass flag agrees with its recorded numbers.
    pub fn flags_consistent(&self) -> bool {
        self.fits.iter().all(|f| f.pass == f.recheck()) && self.flags.iter().all(|f| f.pass == f.recheck())
    }
}

pub fn versions() -> BTreeMap<String, String> {
    let mut v = BTreeMap::new();
    v.insert("hypspec-harness".into(), env!("CARGO_PKG_VERSION").into());
    v.insert("summary-schema".into(), "1".into());
    v
}

pub fn parse_summary(text: &str) -> serde_json::Result<RunSummary> {
    serde_json::from_str(text)
}
