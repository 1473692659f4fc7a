//! Plain-text jet files: line 1 the source point, line 2 the target point,
//! then n rows for the frame block, n rows for the base block and n slices
//! of n rows for the second-order block. Blank lines are ignored.

use matdist_core::jet::Jet;
use matdist_core::tensor::Tensor3;
use nalgebra::{DMatrix, DVector};

pub fn parse_jet_file(text: &str, n: usize) -> Result<Jet, String> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
        let vals = vals.map_err(|_| format!("jet file line {}: expected numbers", lineno + 1))?;
        if vals.len() != n {
            return Err(format!(
                "jet file line {}: expected {n} values, found {}",
                lineno + 1,
                vals.len()
            ));
        }
        rows.push(vals);
    }
    let expect = 2 + 2 * n + n * n;
    if rows.len() != expect {
        return Err(format!(
            "jet file: expected {expect} data rows for n = {n}, found {}",
            rows.len()
        ));
    }
    let x = DVector::from_vec(rows[0].clone());
    let y = DVector::from_vec(rows[1].clone());
    let a = DMatrix::from_fn(n, n, |j, i| rows[2 + j][i]);
    let b = DMatrix::from_fn(n, n, |j, i| rows[2 + n + j][i]);
    let c = Tensor3::from_fn(n, |j, i, k| rows[2 + 2 * n + j * n + i][k]);
    Jet::new(x, y, a, b, c).map_err(|e| format!("jet file: {e}"))
}
