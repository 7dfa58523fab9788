//! Complex matrices as JSON: `{"rows", "cols", "data"}` with `data` a
//! row-major nested array of `[re, im]` pairs.
//!
//! Numbers are written with 17 significant digits, enough for every `f64`
//! to parse back to the same bits.

use std::fmt::Write as _;

use anyhow::{bail, ensure, Context, Result};
use pilotspace::{Complex, ComplexMatrix};
use serde::Deserialize;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    data: Vec<Vec<[f64; 2]>>,
}

/// `x` with 17 significant digits, in a form JSON accepts.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_matrix(m: &ComplexMatrix) -> Result<String> {
    ensure!(
        m.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        "matrix has non-finite entries"
    );
    let mut s = format!("{{\n  \"rows\": {},\n  \"cols\": {},\n  \"data\": [", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        s.push_str(if i == 0 { "\n    [" } else { ",\n    [" });
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if j > 0 {
                s.push_str(", ");
            }
            write!(s, "[{}, {}]", fmt_f64(z.re), fmt_f64(z.im))?;
        }
        s.push(']');
    }
    s.push_str(if m.nrows() == 0 { "]\n}\n" } else { "\n  ]\n}\n" });
    Ok(s)
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let f: MatrixFile = serde_json::from_str(text).context("malformed matrix JSON")?;
    if f.data.len() != f.rows {
        bail!("header says {} rows, data has {}", f.rows, f.data.len());
    }
    for (i, row) in f.data.iter().enumerate() {
        if row.len() != f.cols {
            bail!("row {i} has {} entries, header says {} columns", row.len(), f.cols);
        }
    }
    Ok(ComplexMatrix::from_fn(f.rows, f.cols, |i, j| {
        let [re, im] = f.data[i][j];
        Complex::new(re, im)
    }))
}
