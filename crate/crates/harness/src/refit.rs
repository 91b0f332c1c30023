//! Slope refits from a CSV written by an earlier run.

use hypspec::examples::fit_exponent;

use crate::error::{HarnessError, HarnessResult};
use crate::summary::{FitRecord, Num};

/// Reads `(x, y)` pairs from columns `x_col` and `y_col`. Rows may be restricted with
/// `filter = (column, value)`, compared as numbers when both parse.
pub fn parse_fit_csv(text: &str, x_col: &str, y_col: &str, filter: Option<(&str, &str)>) -> HarnessResult<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| HarnessError::Csv(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::Csv(format!("no column '{name}'")))
    };
    let (xi, yi) = (col(x_col)?, col(y_col)?);
    let f = match filter {
        Some((c, v)) => Some((col(c)?, v)),
        None => None,
    };
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::Csv(e.to_string()))?;
        if let Some((fi, want)) = f {
            let got = rec.get(fi).unwrap_or("");
            let same = match (got.parse::<f64>(), want.parse::<f64>()) {
                (Ok(a), Ok(b)) => a == b,
                _ => got == want,
            };
            if !same {
                continue;
            }
        }
        let num = |i: usize, name: &str| -> HarnessResult<f64> {
            let s = rec.get(i).unwrap_or("");
            s.parse()
                .map_err(|_| HarnessError::Csv(format!("row {}: column '{name}' value '{s}' is not a number", n + 2)))
        };
        out.push((num(xi, x_col)?, num(yi, y_col)?));
    }
    Ok(out)
}

pub fn refit(pts: &[(f64, f64)], name: &str, target: f64, tolerance: f64) -> HarnessResult<FitRecord> {
    let fit = fit_exponent(pts)?;
    Ok(FitRecord {
        name: name.into(),
        slope: Num(fit.slope),
        intercept: Num(fit.intercept),
        r_squared: Num(fit.r_squared),
        points: pts.len(),
        target,
        tolerance,
        pass: (fit.slope - target).abs() <= tolerance,
    })
}
