//! Structured triangulation of a square with periodic identification.
//!
//! Nodes are numbered row-major, left to right then bottom to top. Each grid
//! cell carries two triangles split along the diagonal from its lower-left to
//! its upper-right corner:
//!
//! ```text
//!  v+n ---- v+n+1        type a: (v, v+n+1, v+n)
//!   |  a  /  |           type b: (v, v+1,   v+n+1)
//!   |   /  b |
//!   v ----- v+1
//! ```
//!
//! All indices in this module are zero-based. The closed-form triangle rule
//! is stated for one-based triangle numbers `J = 2j-1, 2j` and node numbers,
//! so the implementation converts at the boundary of [`Mesh::triangle`].

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleKind {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangle {
    pub index: usize,
    pub kind: TriangleKind,
    /// Full-grid node indices, counter-clockwise.
    pub vertices: [usize; 3],
    pub area: f64,
}

/// Folding of the `n x n` node grid onto the `(n-1)^2` torus unknowns.
///
/// The right column is identified with the left one and the top row with the
/// bottom one. Surviving full indices are the first `n-1` nodes of each of
/// the first `n-1` rows, renumbered consecutively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicMap {
    full_to_reduced: Vec<usize>,
    reduced_to_full: Vec<usize>,
}

impl PeriodicMap {
    fn new(n: usize) -> Self {
        let m = n - 1;
        let mut full_to_reduced = vec![0; n * n];
        let mut reduced_to_full = vec![0; m * m];
        for j in 0..n {
            for i in 0..n {
                let r = (j % m) * m + (i % m);
                full_to_reduced[j * n + i] = r;
                if i < m && j < m {
                    reduced_to_full[r] = j * n + i;
                }
            }
        }
        Self {
            full_to_reduced,
            reduced_to_full,
        }
    }

    pub fn full_to_reduced(&self) -> &[usize] {
        &self.full_to_reduced
    }

    pub fn reduced_to_full(&self) -> &[usize] {
        &self.reduced_to_full
    }

    pub fn reduced_len(&self) -> usize {
        self.reduced_to_full.len()
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    n: usize,
    x0: f64,
    y0: f64,
    length: f64,
    h: f64,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<Triangle>,
    periodic: PeriodicMap,
}

impl Mesh {
    /// Uniform mesh of `[x0, x0+length] x [y0, y0+length]` with `n` nodes per side.
    pub fn new(n: usize, x0: f64, y0: f64, length: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidMesh(format!(
                "need at least 3 nodes per side, got {n}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidMesh(format!(
                "side length must be positive and finite, got {length}"
            )));
        }
        if !x0.is_finite() || !y0.is_finite() {
            return Err(Error::InvalidMesh("origin must be finite".into()));
        }
        let h = length / (n - 1) as f64;
        let mut nodes = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                nodes.push([x0 + i as f64 * h, y0 + j as f64 * h]);
            }
        }

        let m = n - 1;
        let mut triangles = Vec::with_capacity(2 * m * m);
        for j in 1..=m * m {
            // c = ceil(j / (n-1)) - 1 skips the last node of each row.
            let c = j.div_ceil(m) - 1;
            let a = [j + c, j + n + 1 + c, j + n + c];
            let b = [j + c, j + 1 + c, j + n + 1 + c];
            for (kind, v) in [(TriangleKind::A, a), (TriangleKind::B, b)] {
                let vertices = [v[0] - 1, v[1] - 1, v[2] - 1];
                let area = signed_area(&nodes, vertices);
                triangles.push(Triangle {
                    index: triangles.len(),
                    kind,
                    vertices,
                    area,
                });
            }
        }

        Ok(Self {
            n,
            x0,
            y0,
            length,
            h,
            nodes,
            triangles,
            periodic: PeriodicMap::new(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> [f64; 2] {
        self.nodes[index]
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Number of unknowns after periodic folding, `(n-1)^2`.
    pub fn reduced_dof(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn triangle(&self, index: usize) -> Result<&Triangle> {
        self.triangles.get(index).ok_or(Error::IndexOutOfRange {
            what: "triangle",
            index,
            limit: self.triangles.len(),
        })
    }

    pub fn periodic(&self) -> &PeriodicMap {
        &self.periodic
    }

    pub fn reduce_index(&self, full: usize) -> Result<usize> {
        self.periodic
            .full_to_reduced
            .get(full)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                what: "node",
                index: full,
                limit: self.node_count(),
            })
    }

    /// Full-grid representative of a reduced unknown.
    pub fn representative(&self, reduced: usize) -> usize {
        self.periodic.reduced_to_full[reduced]
    }

    /// Coordinates of the representative node of each reduced unknown.
    pub fn reduced_nodes(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.periodic
            .reduced_to_full
            .iter()
            .map(move |&f| self.nodes[f])
    }

    /// Vertex coordinates of a triangle in local order.
    pub fn triangle_coords(&self, tri: &Triangle) -> [[f64; 2]; 3] {
        tri.vertices.map(|v| self.nodes[v])
    }

    /// Triangle vertices mapped to reduced unknowns.
    pub fn reduced_vertices(&self, tri: &Triangle) -> [usize; 3] {
        tri.vertices.map(|v| self.periodic.full_to_reduced[v])
    }

    /// Expand a reduced vector to all `n^2` nodes (closing edges replicated).
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        self.periodic
            .full_to_reduced
            .iter()
            .map(|&r| reduced[r])
            .collect()
    }

    /// Sample a function at the reduced nodes (nodal interpolant).
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.reduced_nodes().map(|[x, y]| f(x, y)).collect()
    }

    /// Number of triangles touching each full node in the unfolded mesh.
    pub fn node_valence(&self) -> Vec<usize> {
        let mut count = vec![0; self.node_count()];
        for t in &self.triangles {
            for &v in &t.vertices {
                count[v] += 1;
            }
        }
        count
    }

    pub fn is_boundary_node(&self, full: usize) -> bool {
        let (i, j) = (full % self.n, full / self.n);
        i == 0 || j == 0 || i == self.n - 1 || j == self.n - 1
    }
}

fn signed_area(nodes: &[[f64; 2]], v: [usize; 3]) -> f64 {
    let [x1, y1] = nodes[v[0]];
    let [x2, y2] = nodes[v[1]];
    let [x3, y3] = nodes[v[2]];
    0.5 * (x1 * (y2 - y3) + x2 * (y3 - y1) + x3 * (y1 - y2))
}
