//! Initial conditions, background density profiles and the named experiments.

mod expr;
mod presets;

pub use expr::Expr;
pub use presets::{preset, preset_names, Preset, PRESETS};

use crate::assembly::PFieldSpec;
use crate::mesh::Mesh;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `amplitude · sin(wavenumber · y)`
    SinY { amplitude: f64, wavenumber: f64 },
    /// `amplitude · sin(wavenumber · x)`
    SinX { amplitude: f64, wavenumber: f64 },
    /// `1e-10 · x y (x − 2) sin x`
    PolyDemo,
    /// `−amplitude (x − cx) exp(−((x − cx)² + (y − cy)²) / (2 width²))`
    GaussDeriv {
        amplitude: f64,
        center: [f64; 2],
        width: f64,
    },
    Expression(Expr),
}

impl InitialCondition {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            InitialCondition::SinY { amplitude, wavenumber } => amplitude * (wavenumber * y).sin(),
            InitialCondition::SinX { amplitude, wavenumber } => amplitude * (wavenumber * x).sin(),
            InitialCondition::PolyDemo => 1e-10 * x * y * (x - 2.0) * x.sin(),
            InitialCondition::GaussDeriv {
                amplitude,
                center: [cx, cy],
                width,
            } => {
                let (dx, dy) = (x - cx, y - cy);
                -amplitude * dx * (-(dx * dx + dy * dy) / (2.0 * width * width)).exp()
            }
            InitialCondition::Expression(e) => e.eval(x, y),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            InitialCondition::SinY { .. } => "sin_y",
            InitialCondition::SinX { .. } => "sin_x",
            InitialCondition::PolyDemo => "poly_demo",
            InitialCondition::GaussDeriv { .. } => "gauss_deriv",
            InitialCondition::Expression(_) => "expression",
        }
    }
}

/// `p = ln(n₀ / ω_ci)`; only its gradient enters the equations.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityProfile {
    /// `n₀ / ω_ci = e^{a x + b}`, so `p_x = a`, `p_y = 0`.
    Exponential { a: f64, b: f64 },
    /// `n₀ = amplitude · exp(−|x − c|² / width)`
    Gaussian {
        amplitude: f64,
        center: [f64; 2],
        width: f64,
        omega_ci: f64,
    },
    /// Gradient given directly.
    Expression { px: Expr, py: Expr },
}

impl DensityProfile {
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            DensityProfile::Exponential { a, .. } => (*a, 0.0),
            DensityProfile::Gaussian {
                center: [cx, cy], width, ..
            } => (-2.0 * (x - cx) / width, -2.0 * (y - cy) / width),
            DensityProfile::Expression { px, py } => (px.eval(x, y), py.eval(x, y)),
        }
    }

    /// `p` itself, up to the additive constant where only the gradient is known.
    pub fn potential(&self, x: f64, y: f64) -> Option<f64> {
        match self {
            DensityProfile::Exponential { a, b } => Some(a * x + b),
            DensityProfile::Gaussian {
                amplitude,
                center: [cx, cy],
                width,
                omega_ci,
            } => Some((amplitude / omega_ci).ln() - ((x - cx).powi(2) + (y - cy).powi(2)) / width),
            DensityProfile::Expression { .. } => None,
        }
    }

    /// `Some(k̂)` when `∇p = (k̂, 0)` everywhere.
    pub fn constant_k_hat(&self) -> Option<f64> {
        match self {
            DensityProfile::Exponential { a, .. } => Some(*a),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DensityProfile::Exponential { .. } => "exponential",
            DensityProfile::Gaussian { .. } => "gaussian",
            DensityProfile::Expression { .. } => "expression",
        }
    }

    /// Run `f` with the assembly view of this profile.
    pub fn with_field<T>(&self, f: impl FnOnce(&PFieldSpec) -> T) -> T {
        match self.constant_k_hat() {
            Some(k_hat) => f(&PFieldSpec::Constant { k_hat }),
            None => {
                let g = |x: f64, y: f64| self.gradient(x, y);
                f(&PFieldSpec::Analytic(&g))
            }
        }
    }

    /// `‖∇p‖_∞` sampled at nodes and edge midpoints of the mesh.
    pub fn k_hat_sup(&self, mesh: &Mesh) -> f64 {
        if let Some(k) = self.constant_k_hat() {
            return k.abs();
        }
        let mag = |x: f64, y: f64| {
            let (px, py) = self.gradient(x, y);
            px.hypot(py)
        };
        let mut sup = mesh.nodes().iter().fold(0.0_f64, |m, &[x, y]| m.max(mag(x, y)));
        for t in mesh.triangles() {
            let p = mesh.triangle_coords(t);
            for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                sup = sup.max(mag(0.5 * (p[a][0] + p[b][0]), 0.5 * (p[a][1] + p[b][1])));
            }
        }
        sup
    }
}

pub fn evaluate_p_gradient(profile: &DensityProfile, x: f64, y: f64) -> (f64, f64) {
    profile.gradient(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_gaussian() -> DensityProfile {
        DensityProfile::Gaussian {
            amplitude: 1e20,
            center: [10.0, 10.0],
            width: 64.0,
            omega_ci: 1e7,
        }
    }

    #[test]
    fn gradient_examples() {
        let e = DensityProfile::Exponential { a: 12.0, b: 0.0 };
        assert_eq!(evaluate_p_gradient(&e, 0.3, 7.0), (12.0, 0.0));
        let g = reference_gaussian();
        assert_eq!(g.gradient(10.0, 10.0), (0.0, 0.0));
        assert_eq!(g.gradient(20.0, 10.0), (-10.0 / 32.0, 0.0));
        let (x, y) = (3.0, 14.0);
        let (px, py) = g.gradient(x, y);
        assert!((px + (x - 10.0) / 32.0).abs() < 1e-15);
        assert!((py + (y - 10.0) / 32.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_gradient_matches_potential() {
        let g = reference_gaussian();
        let d = 1e-6;
        for &(x, y) in &[(1.0, 2.0), (12.5, 9.0), (19.0, 19.0)] {
            let fx = (g.potential(x + d, y).unwrap() - g.potential(x - d, y).unwrap()) / (2.0 * d);
            let fy = (g.potential(x, y + d).unwrap() - g.potential(x, y - d).unwrap()) / (2.0 * d);
            let (px, py) = g.gradient(x, y);
            assert!((fx - px).abs() < 1e-7 && (fy - py).abs() < 1e-7);
        }
    }

    #[test]
    fn initial_conditions() {
        let s = InitialCondition::SinY {
            amplitude: 1e-5,
            wavenumber: 3.0,
        };
        assert_eq!(s.eval(0.4, 0.5), 1e-5 * 1.5f64.sin());
        let gd = InitialCondition::GaussDeriv {
            amplitude: 1e-5,
            center: [10.0, 10.0],
            width: 1.0,
        };
        let expected = |x: f64, y: f64| -1e-5 * (x - 10.0) * (-0.5 * (x - 10.0).powi(2) - 0.5 * (y - 10.0).powi(2)).exp();
        for &(x, y) in &[(10.0, 10.0), (11.0, 9.5), (8.2, 12.0)] {
            assert!((gd.eval(x, y) - expected(x, y)).abs() < 1e-20);
        }
        let e = InitialCondition::Expression(Expr::parse("1e-10*x*y*(x-2)*sin(x)").unwrap());
        assert_eq!(e.eval(1.1, 2.0), InitialCondition::PolyDemo.eval(1.1, 2.0));
    }

    #[test]
    fn sup_of_gradient() {
        let mesh = Mesh::new(5, 0.0, 0.0, 20.0).unwrap();
        assert_eq!(DensityProfile::Exponential { a: -3.0, b: 1.0 }.k_hat_sup(&mesh), 3.0);
        let sup = reference_gaussian().k_hat_sup(&mesh);
        assert!((sup - (200.0f64).sqrt() / 32.0).abs() < 1e-12);
    }
}
