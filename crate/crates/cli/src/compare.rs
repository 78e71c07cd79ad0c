//! Node-wise comparison of run directories.

use std::fs;
use std::path::Path;

/// One solution.csv: coordinates, values and optional standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub coords: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
}

pub fn read_table(dir: &Path) -> Result<Table, String> {
    let path = dir.join("solution.csv");
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| format!("{}: empty file", path.display()))?.split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let value = col("value").ok_or_else(|| format!("{}: no `value` column", path.display()))?;
    let xs: Vec<usize> = ["x", "y"].iter().filter_map(|c| col(c)).collect();
    if xs.is_empty() {
        return Err(format!("{}: no coordinate column", path.display()));
    }
    let se = col("stderr");
    let mut t = Table { coords: Vec::new(), values: Vec::new(), stderr: se.map(|_| Vec::new()) };
    for (ln, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let num = |i: usize| -> Result<f64, String> {
            f.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| format!("{}: bad number on line {}", path.display(), ln + 2))
        };
        t.coords.push(xs.iter().map(|&i| num(i)).collect::<Result<_, _>>()?);
        t.values.push(num(value)?);
        if let (Some(i), Some(s)) = (se, t.stderr.as_mut()) {
            s.push(num(i)?);
        }
    }
    Ok(t)
}

fn find(t: &Table, x: &[f64], tol: f64) -> Option<usize> {
    t.coords
        .iter()
        .position(|c| c.len() == x.len() && c.iter().zip(x).all(|(a, b)| (a - b).abs() <= tol))
}

/// Indices into each table of the points they share.
fn common(tables: &[&Table]) -> Vec<Vec<usize>> {
    let span = tables[0]
        .coords
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let tol = 1e-9 * (span.1 - span.0).abs().max(1.0);
    let mut out = Vec::new();
    for (i, x) in tables[0].coords.iter().enumerate() {
        let idx: Option<Vec<usize>> = tables[1..].iter().map(|t| find(t, x, tol)).collect();
        if let Some(mut rest) = idx {
            rest.insert(0, i);
            out.push(rest);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub matched: usize,
    pub max_abs_diff: f64,
    /// Largest |a − b| / stderr when either run carries standard errors.
    pub max_stderr_ratio: Option<f64>,
    /// Richardson order log₂(|a − b| / |b − c|) when a third run is given.
    pub order: Option<f64>,
}

impl Comparison {
    pub fn to_csv(&self, tolerance: f64) -> String {
        let mut s = String::from("key,value\n");
        s += &format!("matched_points,{}\n", self.matched);
        s += &format!("max_abs_diff,{:.17e}\n", self.max_abs_diff);
        s += &format!("tolerance,{tolerance:.17e}\n");
        s += &format!("within_tolerance,{}\n", self.max_abs_diff <= tolerance);
        if let Some(r) = self.max_stderr_ratio {
            s += &format!("max_diff_over_stderr,{r:.17e}\n");
            s += &format!("within_3_stderr,{}\n", r <= 3.0);
        }
        if let Some(p) = self.order {
            s += &format!("empirical_order,{p:.17e}\n");
        }
        s
    }
}

/// Compares run `a` with `b` (and with a finer run `c` when given) on the
/// points they share.
pub fn compare(a: &Table, b: &Table, c: Option<&Table>) -> Result<Comparison, String> {
    let idx = common(&[a, b]);
    if idx.is_empty() {
        return Err("the runs share no grid points".into());
    }
    let mut max_abs: f64 = 0.0;
    let mut ratio: Option<f64> = None;
    for p in &idx {
        let d = (a.values[p[0]] - b.values[p[1]]).abs();
        max_abs = max_abs.max(d);
        let se = a.stderr.as_ref().map(|s| s[p[0]]).or_else(|| b.stderr.as_ref().map(|s| s[p[1]]));
        if let Some(se) = se {
            let r = if se > 0.0 { d / se } else if d == 0.0 { 0.0 } else { f64::INFINITY };
            ratio = Some(ratio.unwrap_or(0.0).max(r));
        }
    }
    let order = match c {
        None => None,
        Some(c) => {
            let idx = common(&[a, b, c]);
            if idx.is_empty() {
                return Err("the three runs share no grid points".into());
            }
            let (mut ab, mut bc): (f64, f64) = (0.0, 0.0);
            for p in &idx {
                ab = ab.max((a.values[p[0]] - b.values[p[1]]).abs());
                bc = bc.max((b.values[p[1]] - c.values[p[2]]).abs());
            }
            Some((ab / bc).log2())
        }
    };
    Ok(Comparison { matched: idx.len(), max_abs_diff: max_abs, max_stderr_ratio: ratio, order })
}
