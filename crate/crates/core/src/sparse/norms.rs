use super::CsrMatrix;
use crate::error::{Error, Result};

/// `sqrt(v^T A v)`; a tiny negative quadratic form from roundoff is clamped to zero.
pub fn weighted_norm(a: &CsrMatrix, v: &[f64]) -> Result<f64> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch("norm matrix must be square".into()));
    }
    let q = a.bilinear(v, v)?;
    Ok(q.max(0.0).sqrt())
}

/// Discrete L² norm of the P1 function with nodal values `v`.
pub fn m_norm(m: &CsrMatrix, v: &[f64]) -> Result<f64> {
    weighted_norm(m, v)
}

/// Discrete H¹ norm, `K = M + A`.
pub fn k_norm(k: &CsrMatrix, v: &[f64]) -> Result<f64> {
    weighted_norm(k, v)
}

pub fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_norm_examples() {
        assert_eq!(max_norm(&[]), 0.0);
        assert_eq!(max_norm(&[1.0, -3.0, 2.0]), 3.0);
    }

    #[test]
    fn weighted_norm_of_identity_is_euclidean() {
        let i = CsrMatrix::identity(2);
        assert!((weighted_norm(&i, &[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-15);
        assert!(weighted_norm(&i, &[1.0]).is_err());
    }
}
