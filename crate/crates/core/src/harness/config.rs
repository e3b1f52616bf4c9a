//! Run configuration and its flat `section.key = value` text form.
//!
//! ```text
//! # comments start with '#'
//! mesh.n = 33
//! mesh.length = pi
//! problem.initial = sin_y
//! problem.initial.amplitude = 1e-5
//! problem.initial.wavenumber = 3
//! scheme.tau = 0.1
//! ```
//!
//! Numeric values may be written as constant expressions (`pi`, `10*pi`).
//! Written files use the shortest representation that parses back exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::problems::{DensityProfile, Expr, InitialCondition};
use crate::sparse::SolverOptions;
use crate::stepper::SchemeConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    pub n: usize,
    pub x0: f64,
    pub y0: f64,
    pub length: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            n: 33,
            x0: 0.0,
            y0: 0.0,
            length: std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub initial: InitialCondition,
    pub density: DensityProfile,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            initial: InitialCondition::SinY {
                amplitude: 1e-5,
                wavenumber: 3.0,
            },
            density: DensityProfile::Exponential { a: 12.0, b: 0.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunControl {
    pub t_end: f64,
    pub u_max: f64,
    /// Snapshot cadence in steps; 0 keeps only the first and last state.
    pub snapshot_every: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunControl {
    fn default() -> Self {
        Self {
            t_end: 20.0,
            u_max: 0.3,
            snapshot_every: 10,
            output_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    pub problem: ProblemConfig,
    pub scheme: SchemeConfig,
    pub solver: SolverOptions,
    pub run: RunControl,
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn parse_f64(key: &str, text: &str) -> Result<f64> {
    if let Ok(v) = text.trim().parse::<f64>() {
        return Ok(v);
    }
    let e = Expr::parse(text).map_err(|e| Error::config(key, e.to_string()))?;
    let a = e.eval(0.0, 0.0);
    // a constant expression does not depend on x or y
    if a.to_bits() != e.eval(1.25, -0.75).to_bits() {
        return Err(Error::config(key, format!("`{text}` is not a constant")));
    }
    Ok(a)
}

fn parse_usize(key: &str, text: &str) -> Result<usize> {
    text.trim()
        .parse()
        .map_err(|_| Error::config(key, format!("expected a non-negative integer, got `{text}`")))
}

struct Reader {
    map: BTreeMap<String, String>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        self.take(key).map_or(Ok(default), |v| parse_f64(key, &v))
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        self.take(key).map_or(Ok(default), |v| parse_usize(key, &v))
    }

    fn parsed_or<T: std::str::FromStr<Err = String>>(&mut self, key: &str, default: T) -> Result<T> {
        self.take(key)
            .map_or(Ok(default), |v| v.parse().map_err(|e: String| Error::config(key, e)))
    }

    fn expr(&mut self, key: &str) -> Result<Expr> {
        let v = self
            .take(key)
            .ok_or_else(|| Error::config(key, "required for this variant"))?;
        Expr::parse(&v).map_err(|e| Error::config(key, e.to_string()))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let m = &self.mesh;
        if m.n < 3 {
            return Err(Error::config("mesh.n", format!("must be at least 3, got {}", m.n)));
        }
        if !(m.length > 0.0) || !m.length.is_finite() {
            return Err(Error::config("mesh.length", format!("must be positive, got {}", m.length)));
        }
        if !m.x0.is_finite() || !m.y0.is_finite() {
            return Err(Error::config("mesh.x0", "origin must be finite"));
        }
        self.scheme.validate()?;
        if !(self.solver.tol > 0.0) || !self.solver.tol.is_finite() {
            return Err(Error::config("solver.tol", format!("must be positive, got {}", self.solver.tol)));
        }
        if self.solver.max_iter == Some(0) {
            return Err(Error::config("solver.max_iter", "must be at least 1"));
        }
        if !(self.run.t_end >= 0.0) || !self.run.t_end.is_finite() {
            return Err(Error::config("run.t_end", format!("must be non-negative, got {}", self.run.t_end)));
        }
        if !(self.run.u_max > 0.0) {
            return Err(Error::config("run.u_max", format!("must be positive, got {}", self.run.u_max)));
        }
        if let InitialCondition::GaussDeriv { width, .. } = self.problem.initial {
            if !(width > 0.0) {
                return Err(Error::config("problem.initial.width", "must be positive"));
            }
        }
        if let DensityProfile::Gaussian {
            width,
            amplitude,
            omega_ci,
            ..
        } = self.problem.density
        {
            if !(width > 0.0) || !(amplitude > 0.0) || !(omega_ci > 0.0) {
                return Err(Error::config(
                    "problem.density",
                    "gaussian amplitude, width and omega_ci must be positive",
                ));
            }
        }
        Ok(())
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        Mesh::new(self.mesh.n, self.mesh.x0, self.mesh.y0, self.mesh.length)
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("mesh.n", self.mesh.n.to_string());
        put("mesh.x0", num(self.mesh.x0));
        put("mesh.y0", num(self.mesh.y0));
        put("mesh.length", num(self.mesh.length));

        put("problem.initial", self.problem.initial.kind().into());
        match &self.problem.initial {
            InitialCondition::SinY { amplitude, wavenumber } | InitialCondition::SinX { amplitude, wavenumber } => {
                put("problem.initial.amplitude", num(*amplitude));
                put("problem.initial.wavenumber", num(*wavenumber));
            }
            InitialCondition::PolyDemo => {}
            InitialCondition::GaussDeriv {
                amplitude,
                center,
                width,
            } => {
                put("problem.initial.amplitude", num(*amplitude));
                put("problem.initial.center_x", num(center[0]));
                put("problem.initial.center_y", num(center[1]));
                put("problem.initial.width", num(*width));
            }
            InitialCondition::Expression(e) => put("problem.initial.expr", e.source().into()),
        }

        put("problem.density", self.problem.density.kind().into());
        match &self.problem.density {
            DensityProfile::Exponential { a, b } => {
                put("problem.density.a", num(*a));
                put("problem.density.b", num(*b));
            }
            DensityProfile::Gaussian {
                amplitude,
                center,
                width,
                omega_ci,
            } => {
                put("problem.density.amplitude", num(*amplitude));
                put("problem.density.center_x", num(center[0]));
                put("problem.density.center_y", num(center[1]));
                put("problem.density.width", num(*width));
                put("problem.density.omega_ci", num(*omega_ci));
            }
            DensityProfile::Expression { px, py } => {
                put("problem.density.px", px.source().into());
                put("problem.density.py", py.source().into());
            }
        }

        let s = &self.scheme;
        put("scheme.type", s.scheme.to_string());
        put("scheme.tau", num(s.tau));
        put("scheme.fp_tol", num(s.fp_tol));
        put("scheme.fp_maxit", s.fp_maxit.to_string());
        put("scheme.stability_mode", s.stability_mode.to_string());
        put("scheme.contraction_safety", num(s.contraction_safety));
        put("scheme.hyperbolic_solver", s.hyperbolic_solver.to_string());
        put("scheme.assembly", s.assembly.to_string());

        put("solver.tol", num(self.solver.tol));
        put(
            "solver.max_iter",
            self.solver.max_iter.map_or("auto".into(), |v| v.to_string()),
        );

        put("run.t_end", num(self.run.t_end));
        put("run.u_max", num(self.run.u_max));
        put("run.snapshot_every", self.run.snapshot_every.to_string());
        if let Some(dir) = &self.run.output_dir {
            put("run.output_dir", dir.display().to_string());
        }
        m
    }

    /// Missing keys take their defaults; unknown or unused keys are errors.
    pub fn from_map(map: BTreeMap<String, String>) -> Result<Self> {
        let d = RunConfig::default();
        let mut r = Reader { map };
        let mesh = MeshConfig {
            n: r.usize_or("mesh.n", d.mesh.n)?,
            x0: r.f64_or("mesh.x0", d.mesh.x0)?,
            y0: r.f64_or("mesh.y0", d.mesh.y0)?,
            length: r.f64_or("mesh.length", d.mesh.length)?,
        };

        let initial = match r.take("problem.initial").as_deref().map(str::trim) {
            None => d.problem.initial.clone(),
            Some(kind @ ("sin_y" | "sin_x")) => {
                let amplitude = r.f64_or("problem.initial.amplitude", 1e-5)?;
                let wavenumber = r.f64_or("problem.initial.wavenumber", 3.0)?;
                if kind == "sin_y" {
                    InitialCondition::SinY { amplitude, wavenumber }
                } else {
                    InitialCondition::SinX { amplitude, wavenumber }
                }
            }
            Some("poly_demo") => InitialCondition::PolyDemo,
            Some("gauss_deriv") => InitialCondition::GaussDeriv {
                amplitude: r.f64_or("problem.initial.amplitude", 1e-5)?,
                center: [
                    r.f64_or("problem.initial.center_x", 10.0)?,
                    r.f64_or("problem.initial.center_y", 10.0)?,
                ],
                width: r.f64_or("problem.initial.width", 1.0)?,
            },
            Some("expression") => InitialCondition::Expression(r.expr("problem.initial.expr")?),
            Some(other) => {
                return Err(Error::config(
                    "problem.initial",
                    format!("unknown kind `{other}` (sin_y, sin_x, poly_demo, gauss_deriv, expression)"),
                ))
            }
        };

        let density = match r.take("problem.density").as_deref().map(str::trim) {
            None => d.problem.density.clone(),
            Some("exponential") => DensityProfile::Exponential {
                a: r.f64_or("problem.density.a", 12.0)?,
                b: r.f64_or("problem.density.b", 0.0)?,
            },
            Some("gaussian") => DensityProfile::Gaussian {
                amplitude: r.f64_or("problem.density.amplitude", 1e20)?,
                center: [
                    r.f64_or("problem.density.center_x", 10.0)?,
                    r.f64_or("problem.density.center_y", 10.0)?,
                ],
                width: r.f64_or("problem.density.width", 64.0)?,
                omega_ci: r.f64_or("problem.density.omega_ci", 1e7)?,
            },
            Some("expression") => DensityProfile::Expression {
                px: r.expr("problem.density.px")?,
                py: r.expr("problem.density.py")?,
            },
            Some(other) => {
                return Err(Error::config(
                    "problem.density",
                    format!("unknown kind `{other}` (exponential, gaussian, expression)"),
                ))
            }
        };

        let ds = d.scheme;
        let scheme = SchemeConfig {
            scheme: r.parsed_or("scheme.type", ds.scheme)?,
            tau: r.f64_or("scheme.tau", ds.tau)?,
            fp_tol: r.f64_or("scheme.fp_tol", ds.fp_tol)?,
            fp_maxit: r.usize_or("scheme.fp_maxit", ds.fp_maxit)?,
            stability_mode: r.parsed_or("scheme.stability_mode", ds.stability_mode)?,
            contraction_safety: r.f64_or("scheme.contraction_safety", ds.contraction_safety)?,
            hyperbolic_solver: r.parsed_or("scheme.hyperbolic_solver", ds.hyperbolic_solver)?,
            assembly: r.parsed_or("scheme.assembly", ds.assembly)?,
        };
        let solver = SolverOptions {
            tol: r.f64_or("solver.tol", d.solver.tol)?,
            max_iter: match r.take("solver.max_iter") {
                None => d.solver.max_iter,
                Some(v) if v.trim() == "auto" => None,
                Some(v) => Some(parse_usize("solver.max_iter", &v)?),
            },
        };
        let run = RunControl {
            t_end: r.f64_or("run.t_end", d.run.t_end)?,
            u_max: r.f64_or("run.u_max", d.run.u_max)?,
            snapshot_every: r.usize_or("run.snapshot_every", d.run.snapshot_every)?,
            output_dir: r.take("run.output_dir").map(|s| PathBuf::from(s.trim())),
        };
        if let Some((k, _)) = r.map.into_iter().next() {
            return Err(Error::config(k, "unknown key, or not used by the selected variant"));
        }
        let cfg = RunConfig {
            mesh,
            problem: ProblemConfig { initial, density },
            scheme,
            solver,
            run,
        };
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.to_map() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        Self::from_map(parse_pairs(text, origin)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Apply `key=value` overrides. Changing a variant kind discards the
    /// parameters of the old variant.
    pub fn with_overrides<'a>(&self, overrides: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut map = self.to_map();
        for (k, v) in overrides {
            let k = k.trim();
            if k == "problem.initial" || k == "problem.density" {
                let prefix = format!("{k}.");
                map.retain(|key, _| !key.starts_with(&prefix));
            }
            map.insert(k.to_string(), v.trim().to_string());
        }
        Self::from_map(map)
    }
}

/// Parse `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                message: format!("line {}: expected `key = value`", lineno + 1),
            });
        };
        let k = k.trim().to_string();
        if map.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                message: format!("line {}: duplicate key `{k}`", lineno + 1),
            });
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{preset, preset_names};
    use crate::stepper::{HyperbolicSolver, Scheme};

    #[test]
    fn presets_roundtrip_through_text() {
        for name in preset_names() {
            let cfg = preset(name).unwrap();
            let back = RunConfig::parse(&cfg.to_text(), Path::new("mem")).unwrap();
            assert_eq!(back, cfg, "{name}");
        }
    }

    #[test]
    fn expression_variants_roundtrip() {
        let mut cfg = RunConfig::default();
        cfg.problem.initial = InitialCondition::Expression(Expr::parse("1e-5*sin(2*x)*cos(y)").unwrap());
        cfg.problem.density = DensityProfile::Expression {
            px: Expr::parse("0").unwrap(),
            py: Expr::parse("12").unwrap(),
        };
        cfg.scheme.scheme = Scheme::FixedPoint;
        cfg.scheme.hyperbolic_solver = HyperbolicSolver::Lu;
        cfg.solver.max_iter = Some(77);
        cfg.run.output_dir = Some(PathBuf::from("out/dir"));
        cfg.mesh.length = 0.1 + 0.2;
        let back = RunConfig::parse(&cfg.to_text(), Path::new("mem")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn constant_expressions_in_numbers() {
        let cfg = RunConfig::parse("mesh.length = 10*pi\n# c\n\nscheme.tau=0.05", Path::new("mem")).unwrap();
        assert_eq!(cfg.mesh.length, 10.0 * std::f64::consts::PI);
        assert_eq!(cfg.scheme.tau, 0.05);
        assert!(RunConfig::parse("mesh.length = 2*x", Path::new("mem")).is_err());
    }

    #[test]
    fn field_level_errors() {
        let p = Path::new("mem");
        let err = RunConfig::parse("mesh.n = many", p).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "mesh.n"));
        let err = RunConfig::parse("mesh.size = 3", p).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "mesh.size"));
        let err = RunConfig::parse("scheme.type = newton", p).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "scheme.type"));
        assert!(matches!(RunConfig::parse("just text", p), Err(Error::Parse { .. })));
        assert!(matches!(RunConfig::parse("a=1\na=2", p), Err(Error::Parse { .. })));
        // poly_demo takes no parameters
        assert!(RunConfig::parse("problem.initial = poly_demo\nproblem.initial.amplitude = 1", p).is_err());
    }

    #[test]
    fn validation() {
        RunConfig::default().validate().unwrap();
        let bad = RunConfig::default().with_overrides([("scheme.tau", "0")]).unwrap();
        assert!(matches!(bad.validate(), Err(Error::Config { ref field, .. }) if field == "scheme.tau"));
        let bad = RunConfig::default().with_overrides([("mesh.n", "2")]).unwrap();
        assert!(bad.validate().is_err());
        let bad = RunConfig::default().with_overrides([("run.u_max", "-1")]).unwrap();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn overrides_switch_variants() {
        let cfg = preset("case2")
            .unwrap()
            .with_overrides([("problem.initial", "gauss_deriv"), ("problem.initial.width", "2")])
            .unwrap();
        assert_eq!(
            cfg.problem.initial,
            InitialCondition::GaussDeriv {
                amplitude: 1e-5,
                center: [10.0, 10.0],
                width: 2.0
            }
        );
    }
}
