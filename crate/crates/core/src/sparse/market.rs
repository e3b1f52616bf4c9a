//! MatrixMarket coordinate format (`real general`), 1-based on disk.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::CsrMatrix;
use crate::error::{Error, Result};

pub fn to_matrix_market_string(a: &CsrMatrix) -> String {
    let mut s = String::with_capacity(32 * a.nnz() + 64);
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let _ = writeln!(s, "{} {} {:.17e}", i + 1, j + 1, v);
        }
    }
    s
}

pub fn write_matrix_market(a: &CsrMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_matrix_market_string(a))?;
    Ok(())
}

pub fn parse_matrix_market(text: &str, origin: &Path) -> Result<CsrMatrix> {
    let err = |message: String| Error::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let mut lines = text.lines();
    let banner = lines.next().ok_or_else(|| err("empty file".into()))?;
    let banner_lc = banner.to_ascii_lowercase();
    if !banner_lc.starts_with("%%matrixmarket matrix coordinate") {
        return Err(err(format!("unsupported banner `{banner}`")));
    }
    let symmetric = banner_lc.contains("symmetric");
    let skew = banner_lc.contains("skew-symmetric");
    if banner_lc.contains("complex") || banner_lc.contains("pattern") {
        return Err(err("only real matrices are supported".into()));
    }
    let mut body = lines.filter(|l| !l.trim().is_empty() && !l.starts_with('%'));
    let header = body.next().ok_or_else(|| err("missing size line".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(format!("bad size line `{header}`"))))
        .collect::<Result<_>>()?;
    let [nrows, ncols, nnz] = dims[..] else {
        return Err(err(format!("bad size line `{header}`")));
    };
    let mut triplets = Vec::with_capacity(nnz);
    for line in body {
        let mut tok = line.split_whitespace();
        let mut next = |what: &str| tok.next().ok_or_else(|| err(format!("missing {what} in `{line}`")));
        let i: usize = next("row")?.parse().map_err(|_| err(format!("bad row in `{line}`")))?;
        let j: usize = next("column")?.parse().map_err(|_| err(format!("bad column in `{line}`")))?;
        let v: f64 = next("value")?.parse().map_err(|_| err(format!("bad value in `{line}`")))?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(err(format!("entry ({i},{j}) outside {nrows}x{ncols}")));
        }
        triplets.push((i - 1, j - 1, v));
        if (symmetric || skew) && i != j {
            triplets.push((j - 1, i - 1, if skew { -v } else { v }));
        }
    }
    let stored = triplets
        .iter()
        .filter(|&&(i, j, _)| !(symmetric || skew) || i >= j)
        .count();
    if stored != nnz {
        return Err(err(format!("header announces {nnz} entries, found {stored}")));
    }
    CsrMatrix::from_triplets(nrows, ncols, &triplets)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text, path)
}
