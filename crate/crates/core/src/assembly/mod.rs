//! Global matrices on the periodic unknowns.
//!
//! The pattern of every matrix is fixed by the mesh. For each stored slot the
//! assembler keeps the list of `(triangle, local row, local column)` pairs that
//! fold onto it, in ascending triangle order. Values are produced by computing
//! all element matrices and then summing each slot's list in that order, so
//! threaded and sequential assembly give bit-identical results.

mod general;
mod local;

pub use general::{general_r, general_s, general_s_structure};
pub use local::{
    local_mass, local_r_constant, local_r_quadrature, local_s, local_s_uniform, local_stiffness, Local,
    LocalBasis,
};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sparse::CsrMatrix;

/// Background density gradient `∇p`.
#[derive(Clone, Copy)]
pub enum PFieldSpec<'a> {
    /// `p = k̂ x + B`
    Constant { k_hat: f64 },
    /// Any gradient field `(x, y) ↦ (p_x, p_y)`.
    Analytic(&'a (dyn Fn(f64, f64) -> (f64, f64) + Sync)),
}

impl std::fmt::Debug for PFieldSpec<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PFieldSpec::Constant { k_hat } => write!(f, "Constant {{ k_hat: {k_hat} }}"),
            PFieldSpec::Analytic(_) => write!(f, "Analytic(..)"),
        }
    }
}

impl PFieldSpec<'_> {
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            PFieldSpec::Constant { k_hat } => (*k_hat, 0.0),
            PFieldSpec::Analytic(g) => g(x, y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Mass,
    Stiffness,
    /// `K = M + A`
    H1,
}

/// Element formula for the convection matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SPath {
    /// Vertex-difference shortcut, valid on the structured right-angled mesh.
    #[default]
    Uniform,
    /// Coordinate formula valid for any triangle.
    General,
}

#[derive(Debug, Clone)]
struct Gather {
    pattern: CsrMatrix,
    offsets: Vec<usize>,
    /// `(triangle, 3 * local_row + local_col)`
    entries: Vec<(u32, u8)>,
}

impl Gather {
    fn build(n1: usize, tris: &[[usize; 3]], with_diagonal: bool) -> Self {
        let mut triplets = Vec::new();
        for v in tris {
            for a in 0..3 {
                for b in 0..3 {
                    if with_diagonal || v[a] != v[b] {
                        triplets.push((v[a], v[b], 0.0));
                    }
                }
            }
        }
        let pattern = CsrMatrix::from_triplets(n1, n1, &triplets).expect("reduced indices in range");
        let mut counts = vec![0usize; pattern.nnz() + 1];
        let mut raw = Vec::with_capacity(triplets.len());
        for (t, v) in tris.iter().enumerate() {
            for a in 0..3 {
                for b in 0..3 {
                    if with_diagonal || v[a] != v[b] {
                        let s = pattern.slot(v[a], v[b]).expect("slot in pattern");
                        counts[s + 1] += 1;
                        raw.push((s, t as u32, (3 * a + b) as u8));
                    }
                }
            }
        }
        for s in 0..pattern.nnz() {
            counts[s + 1] += counts[s];
        }
        let offsets = counts.clone();
        let mut next = counts;
        let mut entries = vec![(0u32, 0u8); raw.len()];
        // raw is in ascending triangle order, so each slot's list is as well
        for (s, t, p) in raw {
            entries[next[s]] = (t, p);
            next[s] += 1;
        }
        Self {
            pattern,
            offsets,
            entries,
        }
    }

    fn fill(&self, locals: &[Local], out: &mut CsrMatrix) {
        let sum_slot = |s: usize| {
            self.entries[self.offsets[s]..self.offsets[s + 1]]
                .iter()
                .fold(0.0, |acc, &(t, p)| acc + locals[t as usize][(p / 3) as usize][(p % 3) as usize])
        };
        let values = out.values_mut();
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            if values.len() >= PAR_SLOTS {
                values.par_iter_mut().enumerate().for_each(|(s, v)| *v = sum_slot(s));
                return;
            }
        }
        values.iter_mut().enumerate().for_each(|(s, v)| *v = sum_slot(s));
    }

    fn assemble(&self, locals: &[Local]) -> CsrMatrix {
        let mut out = self.pattern.clone();
        self.fill(locals, &mut out);
        out
    }
}

#[cfg(feature = "parallel")]
const PAR_SLOTS: usize = 4096;

fn map_triangles<F>(count: usize, f: F) -> Vec<Local>
where
    F: Fn(usize) -> Local + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if count >= PAR_SLOTS / 4 {
            return (0..count).into_par_iter().map(f).collect();
        }
    }
    (0..count).map(f).collect()
}

/// Assembler for one mesh; the gather lists are built once and reused.
#[derive(Debug, Clone)]
pub struct Assembler {
    n1: usize,
    h: f64,
    bases: Vec<LocalBasis>,
    reduced: Vec<[usize; 3]>,
    full_gather: Gather,
    skew_gather: Gather,
    s_path: SPath,
}

impl Assembler {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        Self::with_path(mesh, SPath::Uniform)
    }

    pub fn with_path(mesh: &Mesh, s_path: SPath) -> Result<Self> {
        let bases = mesh
            .triangles()
            .iter()
            .map(|t| LocalBasis::new(mesh.triangle_coords(t)))
            .collect::<Result<Vec<_>>>()?;
        let reduced: Vec<[usize; 3]> = mesh.triangles().iter().map(|t| mesh.reduced_vertices(t)).collect();
        let n1 = mesh.reduced_dof();
        Ok(Self {
            n1,
            h: mesh.h(),
            full_gather: Gather::build(n1, &reduced, true),
            skew_gather: Gather::build(n1, &reduced, false),
            bases,
            reduced,
            s_path,
        })
    }

    pub fn dof(&self) -> usize {
        self.n1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn s_path(&self) -> SPath {
        self.s_path
    }

    /// Pattern of `M`, `A`, `K`: every pair of unknowns sharing a triangle.
    pub fn full_pattern(&self) -> &CsrMatrix {
        &self.full_gather.pattern
    }

    /// Pattern of `S(U)` and constant-gradient `R`: the full pattern without its diagonal.
    pub fn skew_pattern(&self) -> &CsrMatrix {
        &self.skew_gather.pattern
    }

    pub fn bases(&self) -> &[LocalBasis] {
        &self.bases
    }

    pub fn assemble(&self, kind: MatrixKind) -> CsrMatrix {
        let locals = map_triangles(self.bases.len(), |t| {
            let lb = &self.bases[t];
            match kind {
                MatrixKind::Mass => local_mass(lb),
                MatrixKind::Stiffness => local_stiffness(lb),
                MatrixKind::H1 => {
                    let m = local_mass(lb);
                    let a = local_stiffness(lb);
                    std::array::from_fn(|i| std::array::from_fn(|j| m[i][j] + a[i][j]))
                }
            }
        });
        self.full_gather.assemble(&locals)
    }

    pub fn mass(&self) -> CsrMatrix {
        self.assemble(MatrixKind::Mass)
    }

    pub fn stiffness(&self) -> CsrMatrix {
        self.assemble(MatrixKind::Stiffness)
    }

    pub fn h1(&self) -> CsrMatrix {
        self.assemble(MatrixKind::H1)
    }

    /// Background-gradient matrix. A constant gradient uses the skew pattern;
    /// an analytic field keeps the diagonal, which only vanishes in exact arithmetic.
    pub fn r(&self, p: &PFieldSpec) -> CsrMatrix {
        match *p {
            PFieldSpec::Constant { k_hat } => {
                let locals = map_triangles(self.bases.len(), |t| local_r_constant(&self.bases[t], k_hat));
                self.skew_gather.assemble(&locals)
            }
            PFieldSpec::Analytic(g) => {
                let locals = map_triangles(self.bases.len(), |t| local_r_quadrature(&self.bases[t], g));
                self.full_gather.assemble(&locals)
            }
        }
    }

    fn s_locals(&self, u: &[f64]) -> Result<Vec<Local>> {
        if u.len() != self.n1 {
            return Err(Error::DimensionMismatch(format!(
                "S(U) needs {} unknowns, got {}",
                self.n1,
                u.len()
            )));
        }
        Ok(map_triangles(self.bases.len(), |t| {
            let v = self.reduced[t];
            let ul = [u[v[0]], u[v[1]], u[v[2]]];
            match self.s_path {
                SPath::Uniform => local_s_uniform(ul),
                SPath::General => local_s(&self.bases[t], ul),
            }
        }))
    }

    pub fn s(&self, u: &[f64]) -> Result<CsrMatrix> {
        Ok(self.skew_gather.assemble(&self.s_locals(u)?))
    }

    /// Overwrite the values of `out` with `S(U)`; the pattern must be the skew pattern.
    pub fn s_into(&self, u: &[f64], out: &mut CsrMatrix) -> Result<()> {
        if !out.same_pattern(&self.skew_gather.pattern) {
            return Err(Error::PatternMismatch("S(U) target does not carry the canonical pattern".into()));
        }
        let locals = self.s_locals(u)?;
        self.skew_gather.fill(&locals, out);
        Ok(())
    }
}

pub fn assemble(mesh: &Mesh, kind: MatrixKind) -> Result<CsrMatrix> {
    Ok(Assembler::new(mesh)?.assemble(kind))
}

pub fn assemble_r(mesh: &Mesh, p: &PFieldSpec) -> Result<CsrMatrix> {
    Ok(Assembler::new(mesh)?.r(p))
}

/// With `into`, only values are rewritten and the same matrix is returned.
pub fn assemble_s(mesh: &Mesh, u: &[f64], into: Option<CsrMatrix>) -> Result<CsrMatrix> {
    let asm = Assembler::new(mesh)?;
    match into {
        Some(mut m) => {
            asm.s_into(u, &mut m)?;
            Ok(m)
        }
        None => asm.s(u),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_u(n1: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n1).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn s_has_six_entries_per_row() {
        for n in 4..10 {
            let mesh = Mesh::new(n, 0.0, 0.0, 1.0).unwrap();
            let asm = Assembler::new(&mesh).unwrap();
            let s = asm.s(&random_u(asm.dof(), n as u64)).unwrap();
            assert_eq!(s.nnz(), 6 * (n - 1) * (n - 1));
            assert_eq!(asm.full_pattern().nnz(), 7 * (n - 1) * (n - 1));
        }
    }

    #[test]
    fn s_of_constant_vanishes_pattern_kept() {
        let mesh = Mesh::new(6, 0.0, 0.0, 2.0).unwrap();
        let asm = Assembler::new(&mesh).unwrap();
        let s = asm.s(&vec![3.0; asm.dof()]).unwrap();
        assert_eq!(s.nnz(), 6 * 25);
        assert!(s.values().iter().all(|&v| v == 0.0));
        let z = asm.s(&vec![0.0; asm.dof()]).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn s_into_reuses_and_checks_pattern() {
        let mesh = Mesh::new(5, 0.0, 0.0, 1.0).unwrap();
        let asm = Assembler::new(&mesh).unwrap();
        let u = random_u(16, 1);
        let fresh = asm.s(&u).unwrap();
        let mut reused = asm.s(&random_u(16, 2)).unwrap();
        asm.s_into(&u, &mut reused).unwrap();
        assert_eq!(fresh, reused);
        let mut wrong = asm.mass();
        assert!(matches!(asm.s_into(&u, &mut wrong), Err(Error::PatternMismatch(_))));
        assert!(asm.s(&u[..3]).is_err());
        let via_free = assemble_s(&mesh, &u, Some(reused)).unwrap();
        assert_eq!(via_free, fresh);
    }

    #[test]
    fn k_is_mass_plus_stiffness() {
        let mesh = Mesh::new(7, 0.0, 0.0, 3.0).unwrap();
        let asm = Assembler::new(&mesh).unwrap();
        let sum = CsrMatrix::add_scaled(&asm.mass(), &asm.stiffness(), 1.0, 1.0).unwrap();
        let k = asm.h1();
        assert!(k.same_pattern(&sum));
        assert!(k.max_abs_diff(&sum).unwrap() < 1e-14);
        assert!(k.max_abs_diff(&k.transpose()).unwrap() == 0.0 || k.max_abs_diff(&k.transpose()).unwrap() < 1e-15);
    }

    #[test]
    fn stiffness_is_five_point_stencil() {
        let mesh = Mesh::new(6, 0.0, 0.0, 1.0).unwrap();
        let a = assemble(&mesh, MatrixKind::Stiffness).unwrap();
        for i in 0..a.nrows() {
            let (cols, vals) = a.row(i);
            let mut nz: Vec<f64> = cols
                .iter()
                .zip(vals)
                .filter(|(_, v)| v.abs() > 1e-14)
                .map(|(_, &v)| v)
                .collect();
            nz.sort_by(f64::total_cmp);
            assert_eq!(nz.len(), 5);
            assert!((nz[4] - 4.0).abs() < 1e-14);
            assert!(nz[..4].iter().all(|v| (v + 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn mass_total_is_domain_area() {
        let mesh = Mesh::new(9, 1.0, -2.0, 2.5).unwrap();
        let m = assemble(&mesh, MatrixKind::Mass).unwrap();
        let total: f64 = m.values().iter().sum();
        assert!((total - 6.25).abs() < 1e-12);
    }

    #[test]
    fn constant_r_entries_and_sums() {
        let mesh = Mesh::new(5, 0.0, 0.0, 1.0).unwrap();
        let k_hat = 12.0;
        let r = assemble_r(&mesh, &PFieldSpec::Constant { k_hat }).unwrap();
        let unit = mesh.h() * k_hat / 6.0;
        assert_eq!(r.nnz(), 96);
        for i in 0..16 {
            let (_, vals) = r.row(i);
            assert!(vals.iter().sum::<f64>().abs() < 1e-14);
            for &v in vals {
                let alpha = v / unit;
                assert!([-2.0, -1.0, 1.0, 2.0].iter().any(|a| (alpha - a).abs() < 1e-12));
            }
            assert_eq!(r.get(i, i), 0.0);
        }
        let rt = r.transpose();
        assert!(CsrMatrix::add_scaled(&r, &rt, 1.0, 1.0).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn analytic_linear_gradient_matches_constant() {
        let mesh = Mesh::new(7, 0.0, 0.0, 2.0).unwrap();
        let asm = Assembler::new(&mesh).unwrap();
        let grad = |_: f64, _: f64| (12.0, 0.0);
        let rc = asm.r(&PFieldSpec::Constant { k_hat: 12.0 });
        let ra = asm.r(&PFieldSpec::Analytic(&grad));
        assert!(CsrMatrix::add_scaled(&ra, &rc, 1.0, -1.0).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn general_and_uniform_paths_agree() {
        let mesh = Mesh::new(8, 0.5, 0.25, 3.0).unwrap();
        let u = random_u(49, 9);
        let fast = Assembler::new(&mesh).unwrap().s(&u).unwrap();
        let slow = Assembler::with_path(&mesh, SPath::General).unwrap().s(&u).unwrap();
        assert!(fast.max_abs_diff(&slow).unwrap() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn s_is_skew_and_bounded(n in 4usize..11, seed in any::<u64>(), scale in 1e-6f64..1e3) {
            let mesh = Mesh::new(n, 0.0, 0.0, 1.0).unwrap();
            let asm = Assembler::new(&mesh).unwrap();
            let u: Vec<f64> = random_u(asm.dof(), seed).iter().map(|v| v * scale).collect();
            let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let s = asm.s(&u).unwrap();
            let skew = CsrMatrix::add_scaled(&s, &s.transpose(), 1.0, 1.0).unwrap().max_abs();
            prop_assert!(skew <= 1e-14 * umax);
            prop_assert!(s.max_abs() <= umax / 3.0 * (1.0 + 1e-14));
            let v = random_u(asm.dof(), seed ^ 0x5555);
            let q = s.bilinear(&v, &v).unwrap();
            prop_assert!(q.abs() <= 1e-13 * umax);
        }

        #[test]
        fn s_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let mesh = Mesh::new(6, 0.0, 0.0, 1.0).unwrap();
            let asm = Assembler::new(&mesh).unwrap();
            let u1 = random_u(25, seed);
            let u2 = random_u(25, seed.wrapping_add(1));
            let mix: Vec<f64> = u1.iter().zip(&u2).map(|(x, y)| a * x + b * y).collect();
            let lhs = asm.s(&mix).unwrap();
            let rhs = CsrMatrix::add_scaled(&asm.s(&u1).unwrap(), &asm.s(&u2).unwrap(), a, b).unwrap();
            prop_assert!(lhs.same_pattern(&rhs));
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-14);
        }
    }
}
