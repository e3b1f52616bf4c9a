//! Brute-force dense assembler used as a reference for the production path.
//!
//! Basis coefficients come from inverting the 3×3 vertex matrix, every
//! integral uses a 7-point degree-5 rule, and periodic folding compares
//! coordinates against the list of surviving nodes.

use nalgebra::{DMatrix, Matrix3};

use crate::mesh::Mesh;

/// What to assemble.
pub enum OracleKind<'a> {
    Mass,
    Stiffness,
    /// `S(U)` for a reduced vector `U`.
    Convection(&'a [f64]),
    /// `R` for the gradient field `(p_x, p_y)`.
    Gradient(&'a dyn Fn(f64, f64) -> (f64, f64)),
}

/// Barycentric points and weights (summing to one) of the degree-5 rule.
fn gauss7() -> [([f64; 3], f64); 7] {
    let s = 15f64.sqrt();
    let a1 = (6.0 - s) / 21.0;
    let a2 = (6.0 + s) / 21.0;
    let w1 = (155.0 - s) / 1200.0;
    let w2 = (155.0 + s) / 1200.0;
    let t = 1.0 / 3.0;
    [
        ([t, t, t], 9.0 / 40.0),
        ([1.0 - 2.0 * a1, a1, a1], w1),
        ([a1, 1.0 - 2.0 * a1, a1], w1),
        ([a1, a1, 1.0 - 2.0 * a1], w1),
        ([1.0 - 2.0 * a2, a2, a2], w2),
        ([a2, 1.0 - 2.0 * a2, a2], w2),
        ([a2, a2, 1.0 - 2.0 * a2], w2),
    ]
}

/// Reduced index of every full node, found by coordinate search.
pub fn fold_by_search(mesh: &Mesh) -> Vec<usize> {
    let m = mesh.n() - 1;
    let (x0, y0, h, l) = (mesh.x0(), mesh.y0(), mesh.h(), mesh.length());
    let survivors: Vec<[f64; 2]> = (0..m * m)
        .map(|r| [x0 + (r % m) as f64 * h, y0 + (r / m) as f64 * h])
        .collect();
    let congruent = |a: f64, b: f64| {
        let d = (a - b) / l;
        (d - d.round()).abs() < 1e-9
    };
    mesh.nodes()
        .iter()
        .map(|&[x, y]| {
            survivors
                .iter()
                .position(|&[sx, sy]| congruent(x, sx) && congruent(y, sy))
                .expect("every node is congruent to a surviving node")
        })
        .collect()
}

pub fn oracle_assemble(mesh: &Mesh, kind: OracleKind) -> DMatrix<f64> {
    let fold = fold_by_search(mesh);
    let n1 = (mesh.n() - 1) * (mesh.n() - 1);
    let mut out = DMatrix::<f64>::zeros(n1, n1);
    let rule = gauss7();
    for tri in mesh.triangles() {
        let p = tri.vertices.map(|v| mesh.node(v));
        let v = Matrix3::new(
            1.0, p[0][0], p[0][1], //
            1.0, p[1][0], p[1][1], //
            1.0, p[2][0], p[2][1],
        );
        let coef = v.try_inverse().expect("non-degenerate triangle");
        // column i holds (a_i, b_i, c_i)
        let grad = |i: usize| (coef[(1, i)], coef[(2, i)]);
        let phi = |i: usize, x: f64, y: f64| coef[(0, i)] + coef[(1, i)] * x + coef[(2, i)] * y;
        let area = 0.5 * v.determinant().abs();
        let (ux, uy) = match kind {
            OracleKind::Convection(u) => (0..3).fold((0.0, 0.0), |(ax, ay), k| {
                let val = u[fold[tri.vertices[k]]];
                let (bx, by) = grad(k);
                (ax + val * bx, ay + val * by)
            }),
            _ => (0.0, 0.0),
        };
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for (bary, w) in rule {
                    let x = bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0];
                    let y = bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1];
                    let (gix, giy) = grad(i);
                    let (gjx, gjy) = grad(j);
                    let f = match kind {
                        OracleKind::Mass => phi(i, x, y) * phi(j, x, y),
                        OracleKind::Stiffness => gix * gjx + giy * gjy,
                        OracleKind::Convection(_) => (-uy * gix + ux * giy) * phi(j, x, y),
                        OracleKind::Gradient(g) => {
                            let (px, py) = g(x, y);
                            (px * giy - py * gix) * phi(j, x, y)
                        }
                    };
                    acc += w * f;
                }
                let (gi, gj) = (fold[tri.vertices[i]], fold[tri.vertices[j]]);
                out[(gi, gj)] += area * acc;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_quintics() {
        // ∫ over the unit right triangle of x^a y^b = a! b! / (a+b+2)!
        let fact = |n: u32| (1..=n).product::<u32>().max(1) as f64;
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let q: f64 = gauss7()
                    .iter()
                    .map(|(l, w)| w * 0.5 * l[1].powi(a as i32) * l[2].powi(b as i32))
                    .sum();
                assert!((q - exact).abs() < 1e-15, "{a} {b}");
            }
        }
    }

    #[test]
    fn folding_examples() {
        let mesh = Mesh::new(5, 0.0, 0.0, 1.0).unwrap();
        let f = fold_by_search(&mesh);
        assert_eq!(f[4], 0);
        assert_eq!(f[24], 0);
        assert_eq!(f[9], 4);
        assert_eq!(f[20], 0);
        assert_eq!(f[6], 5);
    }

    #[test]
    fn mass_sums_to_area() {
        let mesh = Mesh::new(6, 0.0, 0.0, 2.0).unwrap();
        let m = oracle_assemble(&mesh, OracleKind::Mass);
        assert!((m.sum() - 4.0).abs() < 1e-13);
        let a = oracle_assemble(&mesh, OracleKind::Stiffness);
        assert!(a.row_sum().iter().all(|v| v.abs() < 1e-12));
    }
}
