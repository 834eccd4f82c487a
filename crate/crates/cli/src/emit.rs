//! File emitters: Matrix Market for 0/1 matrices, CSV triplets for exact
//! rational matrices. Output bytes depend only on the input matrices.

use std::fs;
use std::path::{Path, PathBuf};
use twistg_core::graph::DenseRat;
use twistg_core::sparse::BinMat;

use crate::report::Table;

pub fn write_text(dir: &Path, name: &str, body: &str) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

/// Matrix Market `coordinate pattern symmetric` body: one-based indices,
/// entries of the lower triangle only, row-major order.
pub fn matrix_market_pattern_symmetric(m: &BinMat) -> String {
    assert_eq!(m.nrows, m.ncols, "pattern-symmetric export needs a square matrix");
    let mut entries = Vec::new();
    for r in 0..m.nrows {
        for &c in m.row(r) {
            if (c as usize) <= r {
                entries.push((r + 1, c as usize + 1));
            }
        }
    }
    let mut out = String::from("%%MatrixMarket matrix coordinate pattern symmetric\n");
    out.push_str(&format!("{} {} {}\n", m.nrows, m.ncols, entries.len()));
    for (r, c) in entries {
        out.push_str(&format!("{r} {c}\n"));
    }
    out
}

/// Sparse triplet CSV (`row,col,value`) with one-based indices and exact
/// rational values; zeros are omitted.
pub fn rational_triplets_table(m: &DenseRat) -> Table {
    use num_traits::Zero;
    let mut t = Table::new(&["row", "col", "value"]);
    for (r, row) in m.iter().enumerate() {
        for (c, x) in row.iter().enumerate() {
            if !x.is_zero() {
                t.push(vec![(r + 1).to_string(), (c + 1).to_string(), x.to_string()]);
            }
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use twistg_core::Rat;

    #[test]
    fn pattern_export_keeps_lower_triangle() {
        let m = BinMat::from_entries(3, 3, [(0, 1), (1, 0), (1, 2), (2, 1)].into_iter());
        let body = matrix_market_pattern_symmetric(&m);
        assert_eq!(
            body,
            "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 2\n"
        );
    }

    #[test]
    fn triplets_skip_zeros_and_render_exactly() {
        let half = Rat::new(1.into(), 2.into());
        let m = vec![
            vec![Rat::from_integer(0.into()), half.clone()],
            vec![half, Rat::from_integer(3.into())],
        ];
        let t = rational_triplets_table(&m);
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[0], vec!["1", "2", "1/2"]);
        assert_eq!(t.rows[2], vec!["2", "2", "3"]);
    }
}
