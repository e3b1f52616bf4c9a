//! CSV snapshots: header `x,y,u,w`, one row per grid node in row-major order,
//! with periodic values repeated on the closing edges.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::stepper::State;

pub fn snapshot_csv(mesh: &Mesh, state: &State) -> Result<String> {
    let n1 = mesh.reduced_dof();
    if state.u.len() != n1 || state.w.len() != n1 {
        return Err(Error::DimensionMismatch("snapshot state does not match mesh".into()));
    }
    let u = mesh.expand(&state.u);
    let w = mesh.expand(&state.w);
    let mut s = String::with_capacity(mesh.node_count() * 96 + 8);
    s.push_str("x,y,u,w\n");
    for (i, [x, y]) in mesh.nodes().iter().enumerate() {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", x, y, u[i], w[i]);
    }
    Ok(s)
}

pub fn write_snapshot(mesh: &Mesh, state: &State, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, snapshot_csv(mesh, state)?)?;
    Ok(())
}

/// Rows `[x, y, u, w]` of a snapshot file.
pub fn read_snapshot_rows(path: impl AsRef<Path>) -> Result<Vec<[f64; 4]>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some("x,y,u,w") => {}
        other => return Err(err(format!("expected header `x,y,u,w`, found {other:?}"))),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let v: Vec<f64> = l
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(format!("row {}: bad number", i + 2)))?;
            <[f64; 4]>::try_from(v).map_err(|_| err(format!("row {}: expected 4 columns", i + 2)))
        })
        .collect()
}

/// Recover the reduced `(U, W)` from a snapshot written for `mesh`.
pub fn read_snapshot(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(Vec<f64>, Vec<f64>)> {
    let path = path.as_ref();
    let rows = read_snapshot_rows(path)?;
    if rows.len() != mesh.node_count() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("{} rows for a mesh with {} nodes", rows.len(), mesh.node_count()),
        });
    }
    let pick = |col: usize| {
        (0..mesh.reduced_dof())
            .map(|r| rows[mesh.representative(r)][col])
            .collect::<Vec<_>>()
    };
    Ok((pick(2), pick(3)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn constant_state_rows() {
        let mesh = Mesh::new(5, 0.0, 0.0, 1.0).unwrap();
        let st = State::constant(16, 0.125);
        let csv = snapshot_csv(&mesh, &st).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,u,w");
        assert_eq!(lines.len(), 26);
        assert!(lines[1..].iter().all(|l| l.ends_with("1.2500000000000000e-1,1.2500000000000000e-1")));
    }

    #[test]
    fn roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mesh = Mesh::new(7, -1.0, 2.0, 3.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let st = State {
            t: 1.0,
            u: (0..36).map(|_| rng.gen::<f64>() * 1e-7).collect(),
            w: (0..36).map(|_| rng.gen::<f64>() - 0.5).collect(),
        };
        write_snapshot(&mesh, &st, &path).unwrap();
        let (u, w) = read_snapshot(&mesh, &path).unwrap();
        assert_eq!(u, st.u);
        assert_eq!(w, st.w);
        let rows = read_snapshot_rows(&path).unwrap();
        // closing edge repeats the opposite side
        assert_eq!(rows[6][2], rows[0][2]);
        assert_eq!(rows[48][3], rows[0][3]);
        assert_eq!(rows[1][0], -0.5);
    }

    #[test]
    fn rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(read_snapshot_rows(&p).is_err());
        fs::write(&p, "x,y,u,w\n1,2,3\n").unwrap();
        assert!(read_snapshot_rows(&p).is_err());
        let mesh = Mesh::new(3, 0.0, 0.0, 1.0).unwrap();
        fs::write(&p, "x,y,u,w\n1,2,3,4\n").unwrap();
        assert!(read_snapshot(&mesh, &p).is_err());
    }
}
