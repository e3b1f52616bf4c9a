//! Element matrices of the P1 basis on one triangle.
//!
//! Rows index the basis function that is differentiated (or the first factor
//! for the symmetric matrices); columns index the test function.

use crate::error::{Error, Result};

pub type Local = [[f64; 3]; 3];

/// `ψ_i(x, y) = a_i + b_i x + c_i y` together with the vertex differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBasis {
    pub coords: [[f64; 2]; 3],
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    /// `(y3−y2, y1−y3, y2−y1)`
    pub b_hat: [f64; 3],
    /// `(x3−x2, x1−x3, x2−x1)`
    pub c_hat: [f64; 3],
    pub area: f64,
    /// `1 / (12 · area)`
    pub d: f64,
}

impl LocalBasis {
    pub fn new(coords: [[f64; 2]; 3]) -> Result<Self> {
        let [[x1, y1], [x2, y2], [x3, y3]] = coords;
        let b_hat = [y3 - y2, y1 - y3, y2 - y1];
        let c_hat = [x3 - x2, x1 - x3, x2 - x1];
        let two_area = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
        let area = 0.5 * two_area;
        if !(area > 0.0) || !area.is_finite() {
            return Err(Error::DegenerateTriangle(area));
        }
        let a = [
            (x2 * y3 - x3 * y2) / two_area,
            (x3 * y1 - x1 * y3) / two_area,
            (x1 * y2 - x2 * y1) / two_area,
        ];
        let b = b_hat.map(|v| -v / two_area);
        let c = c_hat.map(|v| v / two_area);
        Ok(Self {
            coords,
            a,
            b,
            c,
            b_hat,
            c_hat,
            area,
            d: 1.0 / (12.0 * area),
        })
    }

    pub fn eval(&self, i: usize, x: f64, y: f64) -> f64 {
        self.a[i] + self.b[i] * x + self.c[i] * y
    }

    /// Edge midpoints; midpoint `m` lies opposite vertex `m`.
    pub fn midpoints(&self) -> [[f64; 2]; 3] {
        let p = self.coords;
        let mid = |i: usize, j: usize| [0.5 * (p[i][0] + p[j][0]), 0.5 * (p[i][1] + p[j][1])];
        [mid(1, 2), mid(2, 0), mid(0, 1)]
    }
}

pub fn local_mass(basis: &LocalBasis) -> Local {
    let off = basis.area / 12.0;
    let diag = basis.area / 6.0;
    let mut m = [[off; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = diag;
    }
    m
}

pub fn local_stiffness(basis: &LocalBasis) -> Local {
    let mut k = [[0.0; 3]; 3];
    for (i, row) in k.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = basis.area * (basis.b[i] * basis.b[j] + basis.c[i] * basis.c[j]);
        }
    }
    k
}

/// `S_ij = ∫ (V(u)·∇ψ_i) ψ_j` with `V(u) = (−u_y, u_x)`, from vertex differences.
pub fn local_s(basis: &LocalBasis, u: [f64; 3]) -> Local {
    let cu = basis.c_hat[0] * u[0] + basis.c_hat[1] * u[1] + basis.c_hat[2] * u[2];
    let bu = basis.b_hat[0] * u[0] + basis.b_hat[1] * u[1] + basis.b_hat[2] * u[2];
    let row = |i: usize| basis.d * (cu * basis.b_hat[i] - bu * basis.c_hat[i]);
    let r = [row(0), row(1), row(2)];
    r.map(|v| [v; 3])
}

/// Right-angled triangles of the structured mesh, both orientations.
pub fn local_s_uniform(u: [f64; 3]) -> Local {
    let r = [(u[2] - u[1]) / 6.0, (u[0] - u[2]) / 6.0, (u[1] - u[0]) / 6.0];
    r.map(|v| [v; 3])
}

/// Constant background gradient `p_x = k̂`, `p_y = 0`.
pub fn local_r_constant(basis: &LocalBasis, k_hat: f64) -> Local {
    basis.c_hat.map(|c| [k_hat * c / 6.0; 3])
}

/// `R_ij = ∫ (p_x ψ_{i,y} − p_y ψ_{i,x}) ψ_j` by the edge-midpoint rule.
pub fn local_r_quadrature(basis: &LocalBasis, grad: &dyn Fn(f64, f64) -> (f64, f64)) -> Local {
    let mids = basis.midpoints();
    let g = mids.map(|[x, y]| grad(x, y));
    let mut r = [[0.0; 3]; 3];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            // ψ_j is 1/2 on the two edges through vertex j, 0 on the opposite one
            let s: f64 = (0..3)
                .filter(|&m| m != j)
                .map(|m| 0.5 * (g[m].0 * basis.c[i] - g[m].1 * basis.b[i]))
                .sum();
            *v = basis.area / 3.0 * s;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TYPE_A: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    const TYPE_B: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]];

    /// Degree-2 exact quadrature on a triangle (three interior points).
    fn integrate(coords: [[f64; 2]; 3], f: impl Fn(f64, f64) -> f64) -> f64 {
        let [p1, p2, p3] = coords;
        let area = 0.5 * ((p2[0] - p1[0]) * (p3[1] - p1[1]) - (p3[0] - p1[0]) * (p2[1] - p1[1]));
        let bary = [[4.0, 1.0, 1.0], [1.0, 4.0, 1.0], [1.0, 1.0, 4.0]];
        bary.iter()
            .map(|l| {
                let x = (l[0] * p1[0] + l[1] * p2[0] + l[2] * p3[0]) / 6.0;
                let y = (l[0] * p1[1] + l[1] * p2[1] + l[2] * p3[1]) / 6.0;
                f(x, y)
            })
            .sum::<f64>()
            * area
            / 3.0
    }

    #[test]
    fn basis_is_nodal() {
        for coords in [TYPE_A, TYPE_B, [[0.3, -0.2], [1.7, 0.1], [0.4, 2.2]]] {
            let lb = LocalBasis::new(coords).unwrap();
            for i in 0..3 {
                for (j, p) in coords.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((lb.eval(i, p[0], p[1]) - want).abs() < 1e-14);
                }
            }
            assert!(lb.b_hat.iter().sum::<f64>().abs() < 1e-15);
            assert!(lb.c_hat.iter().sum::<f64>().abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_and_clockwise_rejected() {
        assert!(LocalBasis::new([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).is_err());
        assert!(LocalBasis::new([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).is_err());
    }

    #[test]
    fn mass_unit_element() {
        let m = local_mass(&LocalBasis::new(TYPE_A).unwrap());
        let lb = LocalBasis::new(TYPE_A).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 / 12.0 } else { 1.0 / 24.0 };
                assert!((m[i][j] - want).abs() < 1e-16);
                let oracle = integrate(TYPE_A, |x, y| lb.eval(i, x, y) * lb.eval(j, x, y));
                assert!((m[i][j] - oracle).abs() < 1e-15);
            }
            let row: f64 = m[i].iter().sum();
            assert!((row - lb.area / 3.0).abs() < 1e-16);
        }
    }

    #[test]
    fn mass_scales_with_area() {
        let small = local_mass(&LocalBasis::new(TYPE_B).unwrap());
        let big = local_mass(&LocalBasis::new(TYPE_B.map(|p| p.map(|v| 2.0 * v))).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(big[i][j], 4.0 * small[i][j]);
            }
        }
    }

    #[test]
    fn stiffness_unit_elements() {
        // right angle at the third vertex for type a, at the second for type b
        let ka = local_stiffness(&LocalBasis::new(TYPE_A).unwrap());
        let want_a = [[0.5, 0.0, -0.5], [0.0, 0.5, -0.5], [-0.5, -0.5, 1.0]];
        let kb = local_stiffness(&LocalBasis::new(TYPE_B).unwrap());
        let want_b = [[0.5, -0.5, 0.0], [-0.5, 1.0, -0.5], [0.0, -0.5, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((ka[i][j] - want_a[i][j]).abs() < 1e-15);
                assert!((kb[i][j] - want_b[i][j]).abs() < 1e-15);
            }
            assert!(ka[i].iter().sum::<f64>().abs() < 1e-15);
        }
    }

    #[test]
    fn stiffness_translation_invariant() {
        let base = [[0.1, 0.2], [1.3, 0.4], [0.5, 1.9]];
        let shifted = base.map(|[x, y]| [x + 7.25, y - 3.5]);
        let k0 = local_stiffness(&LocalBasis::new(base).unwrap());
        let k1 = local_stiffness(&LocalBasis::new(shifted).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                assert!((k0[i][j] - k1[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn s_examples() {
        let lb = LocalBasis::new(TYPE_A).unwrap();
        assert_eq!(local_s(&lb, [0.0; 3]), [[0.0; 3]; 3]);
        let c = local_s(&lb, [2.5; 3]);
        assert!(c.iter().flatten().all(|v| v.abs() < 1e-15));
        let s = local_s_uniform([0.0, 1.0, 2.0]);
        for (row, want) in s.iter().zip([1.0, -2.0, 1.0]) {
            assert_eq!(*row, [want / 6.0; 3]);
        }
    }

    #[test]
    fn s_matches_direct_integral() {
        let coords = [[0.2, 0.1], [1.1, 0.3], [0.6, 1.4]];
        let lb = LocalBasis::new(coords).unwrap();
        let u = [0.7, -1.2, 0.4];
        let ux: f64 = (0..3).map(|k| u[k] * lb.b[k]).sum();
        let uy: f64 = (0..3).map(|k| u[k] * lb.c[k]).sum();
        let s = local_s(&lb, u);
        for i in 0..3 {
            for j in 0..3 {
                let oracle = integrate(coords, |x, y| (-uy * lb.b[i] + ux * lb.c[i]) * lb.eval(j, x, y));
                assert!((s[i][j] - oracle).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn r_type_a_closed_form() {
        let r = local_r_constant(&LocalBasis::new(TYPE_A).unwrap(), 6.0);
        assert_eq!(r, [[-1.0; 3], [0.0; 3], [1.0; 3]]);
        let rb = local_r_constant(&LocalBasis::new(TYPE_B).unwrap(), 6.0);
        assert_eq!(rb, [[0.0; 3], [-1.0; 3], [1.0; 3]]);
        let z = local_r_constant(&LocalBasis::new(TYPE_B).unwrap(), 0.0);
        assert!(z.iter().flatten().all(|&v| v == 0.0));
        let zq = local_r_quadrature(&LocalBasis::new(TYPE_A).unwrap(), &|_, _| (0.0, 0.0));
        assert_eq!(zq, [[0.0; 3]; 3]);
    }

    proptest! {
        #[test]
        fn uniform_fast_path_agrees(u in proptest::array::uniform3(-10.0f64..10.0), h in 0.01f64..3.0) {
            for coords in [TYPE_A, TYPE_B] {
                let lb = LocalBasis::new(coords.map(|p| p.map(|v| v * h))).unwrap();
                let g = local_s(&lb, u);
                let f = local_s_uniform(u);
                for i in 0..3 {
                    prop_assert!((g[i][0] - f[i][0]).abs() < 1e-13 * (1.0 + u.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
                }
            }
        }

        #[test]
        fn linear_p_quadrature_matches_closed_form(
            a in -20.0f64..20.0,
            pts in proptest::array::uniform6(-2.0f64..2.0),
        ) {
            let coords = [[pts[0], pts[1]], [pts[2] + 3.0, pts[3]], [pts[4], pts[5] + 3.0]];
            prop_assume!(LocalBasis::new(coords).is_ok());
            let lb = LocalBasis::new(coords).unwrap();
            prop_assume!(lb.area > 0.05);
            let q = local_r_quadrature(&lb, &|_, _| (a, 0.0));
            let c = local_r_constant(&lb, a);
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((q[i][j] - c[i][j]).abs() <= 1e-12 * (1.0 + c[i][j].abs()));
                }
            }
        }

        #[test]
        fn quadrature_exact_for_linear_gradient(
            k in proptest::array::uniform6(-3.0f64..3.0),
        ) {
            let coords = [[0.1, 0.0], [1.2, 0.2], [0.3, 0.9]];
            let lb = LocalBasis::new(coords).unwrap();
            let grad = |x: f64, y: f64| (k[0] + k[1] * x + k[2] * y, k[3] + k[4] * x + k[5] * y);
            let r = local_r_quadrature(&lb, &grad);
            for i in 0..3 {
                for j in 0..3 {
                    let oracle = integrate(coords, |x, y| {
                        let (px, py) = grad(x, y);
                        (px * lb.c[i] - py * lb.b[i]) * lb.eval(j, x, y)
                    });
                    prop_assert!((r[i][j] - oracle).abs() < 1e-13);
                }
            }
        }
    }
}
