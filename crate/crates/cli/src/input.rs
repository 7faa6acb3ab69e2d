//! Parsing of grids, measure specifications and CSV tables.

use gauss_extremal::error::{Error, Result};
use gauss_extremal::periodic::EvenCircleMeasure;
use gauss_extremal::subordination::SubordinationMeasure;
use std::path::Path;

/// `lin:a:b:n` or `log:a:b:n`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidParameter(format!("grid must be lin:a:b:n or log:a:b:n, got '{s}'"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let a: f64 = parts[1].parse().map_err(|_| bad())?;
    let b: f64 = parts[2].parse().map_err(|_| bad())?;
    let n: usize = parts[3].parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let t = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
    match parts[0] {
        "lin" => Ok((0..n).map(|i| a + (b - a) * t(i)).collect()),
        "log" => {
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::InvalidParameter(format!("log grid needs positive endpoints, got '{s}'")));
            }
            let mut g: Vec<f64> = (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * t(i)).exp()).collect();
            g[0] = a;
            if n > 1 {
                g[n - 1] = b;
            }
            Ok(g)
        }
        _ => Err(bad()),
    }
}

/// Comma-separated coordinates.
pub fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad coordinate '{v}' in point '{s}'")))
        })
        .collect()
}

/// Numeric rows of a CSV file; a non-numeric first row is taken as header.
pub fn read_rows(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|v| v.parse::<f64>()).collect();
        match parsed {
            Ok(v) => {
                if columns > 0 && v.len() != columns {
                    return Err(Error::InvalidParameter(format!(
                        "{} line {}: expected {columns} columns, got {}",
                        path.display(),
                        i + 1,
                        v.len()
                    )));
                }
                rows.push(v);
            }
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::InvalidParameter(format!("{} line {}: non-numeric entry", path.display(), i + 1)));
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::InvalidParameter(format!("{} has no data rows", path.display())));
    }
    Ok(rows)
}

fn pairs(path: &str) -> Result<Vec<(f64, f64)>> {
    Ok(read_rows(Path::new(path), 2)?.into_iter().map(|r| (r[0], r[1])).collect())
}

/// `point:λ0`, `power:sigma=σ`, `table:path.csv`, `expsub:path.csv`.
pub fn parse_measure(s: &str) -> Result<SubordinationMeasure> {
    let (kind, arg) = s
        .split_once(':')
        .ok_or_else(|| Error::InvalidParameter(format!("measure must look like kind:argument, got '{s}'")))?;
    match kind {
        "point" => {
            let l: f64 = arg.parse().map_err(|_| Error::InvalidParameter(format!("bad point mass location '{arg}'")))?;
            SubordinationMeasure::point_mass(l)
        }
        "power" => {
            let v = arg.strip_prefix("sigma=").unwrap_or(arg);
            let sigma: f64 = v.parse().map_err(|_| Error::InvalidParameter(format!("bad sigma '{arg}'")))?;
            SubordinationMeasure::power(sigma)
        }
        "table" => SubordinationMeasure::finite_table(pairs(arg)?),
        "expsub" => SubordinationMeasure::exp_subordination(pairs(arg)?),
        _ => Err(Error::InvalidParameter(format!("unknown measure kind '{kind}' (point, power, table, expsub)"))),
    }
}

/// `lebesgue`, `density:path.csv` (x, weight on a uniform grid) or
/// `moments:path.csv` (m, c_m).
pub fn parse_circle_measure(s: &str) -> Result<EvenCircleMeasure> {
    if s == "lebesgue" {
        return Ok(EvenCircleMeasure::lebesgue());
    }
    match s.split_once(':') {
        Some(("density", path)) => {
            let rows = read_rows(Path::new(path), 2)?;
            let n = rows.len();
            for (i, r) in rows.iter().enumerate() {
                if (r[0] - i as f64 / n as f64).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "density table must sample the uniform grid i/{n}; row {i} has x = {}",
                        r[0]
                    )));
                }
            }
            EvenCircleMeasure::from_samples(&rows.iter().map(|r| r[1]).collect::<Vec<_>>())
        }
        Some(("moments", path)) => {
            let rows = read_rows(Path::new(path), 2)?;
            let mut c = Vec::with_capacity(rows.len());
            for (i, r) in rows.iter().enumerate() {
                if r[0] != i as f64 {
                    return Err(Error::InvalidParameter(format!("moment rows must list m = 0, 1, 2, ...; row {i} has m = {}", r[0])));
                }
                c.push(r[1]);
            }
            EvenCircleMeasure::from_moments(c)
        }
        _ => Err(Error::InvalidParameter(format!("unknown circle measure '{s}' (lebesgue, density:path, moments:path)"))),
    }
}
