//! Matrices on all `n²` nodes, without periodic identification.

use std::collections::BTreeMap;

use super::local::{local_r_constant, local_r_quadrature, local_s, LocalBasis};
use super::PFieldSpec;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sparse::CsrMatrix;

/// Entries of the unfolded `S(U)` that are not identically zero as linear
/// functions of `U`. Values are set to one.
pub fn general_s_structure(mesh: &Mesh) -> Result<CsrMatrix> {
    let n2 = mesh.node_count();
    let mut coeffs: BTreeMap<(usize, usize), BTreeMap<usize, f64>> = BTreeMap::new();
    let mut scale = 0.0_f64;
    for tri in mesh.triangles() {
        let lb = LocalBasis::new(mesh.triangle_coords(tri))?;
        for k in 0..3 {
            let mut e = [0.0; 3];
            e[k] = 1.0;
            let s = local_s(&lb, e);
            for a in 0..3 {
                for b in 0..3 {
                    let c = coeffs
                        .entry((tri.vertices[a], tri.vertices[b]))
                        .or_default()
                        .entry(tri.vertices[k])
                        .or_insert(0.0);
                    *c += s[a][b];
                    scale = scale.max(s[a][b].abs());
                }
            }
        }
    }
    let triplets: Vec<_> = coeffs
        .into_iter()
        .filter(|(_, c)| c.values().any(|v| v.abs() > 1e-12 * scale))
        .map(|((i, j), _)| (i, j, 1.0))
        .collect();
    CsrMatrix::from_triplets(n2, n2, &triplets)
}

/// `S(U)` for a nodal vector on all `n²` nodes, stored on [`general_s_structure`].
pub fn general_s(mesh: &Mesh, u_full: &[f64]) -> Result<CsrMatrix> {
    let n2 = mesh.node_count();
    if u_full.len() != n2 {
        return Err(Error::DimensionMismatch(format!("unfolded S needs {n2} values")));
    }
    let mut out = general_s_structure(mesh)?;
    out.values_mut().iter_mut().for_each(|v| *v = 0.0);
    for tri in mesh.triangles() {
        let lb = LocalBasis::new(mesh.triangle_coords(tri))?;
        let s = local_s(&lb, tri.vertices.map(|v| u_full[v]));
        for a in 0..3 {
            for b in 0..3 {
                if let Some(slot) = out.slot(tri.vertices[a], tri.vertices[b]) {
                    out.values_mut()[slot] += s[a][b];
                }
            }
        }
    }
    Ok(out)
}

/// Unfolded `R`; entries that cancel to (near) zero are not stored.
pub fn general_r(mesh: &Mesh, p: &PFieldSpec) -> Result<CsrMatrix> {
    let n2 = mesh.node_count();
    let mut triplets = Vec::with_capacity(9 * mesh.triangle_count());
    for tri in mesh.triangles() {
        let lb = LocalBasis::new(mesh.triangle_coords(tri))?;
        let r = match *p {
            PFieldSpec::Constant { k_hat } => local_r_constant(&lb, k_hat),
            PFieldSpec::Analytic(g) => local_r_quadrature(&lb, g),
        };
        for a in 0..3 {
            for b in 0..3 {
                triplets.push((tri.vertices[a], tri.vertices[b], r[a][b]));
            }
        }
    }
    let raw = CsrMatrix::from_triplets(n2, n2, &triplets)?;
    let scale = raw.max_abs();
    Ok(raw.drop_small(1e-12 * scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unfolded_counts() {
        for n in 3..9 {
            let mesh = Mesh::new(n, 0.0, 0.0, 1.0).unwrap();
            assert_eq!(general_s_structure(&mesh).unwrap().nnz(), 6 * n * n - 4 * n - 2);
            let r = general_r(&mesh, &PFieldSpec::Constant { k_hat: 12.0 }).unwrap();
            assert_eq!(r.nnz(), 6 * n * n - 8 * n + 4);
        }
    }

    #[test]
    fn unfolded_s_constant_field_vanishes() {
        let mesh = Mesh::new(5, 0.0, 0.0, 1.0).unwrap();
        let s = general_s(&mesh, &[1.5; 25]).unwrap();
        assert!(s.max_abs() < 1e-15);
        assert!(general_s(&mesh, &[0.0; 3]).is_err());
    }
}
