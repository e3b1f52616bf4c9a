use std::f64::consts::PI;

use super::{DensityProfile, InitialCondition};
use crate::error::{Error, Result};
use crate::harness::{MeshConfig, ProblemConfig, RunConfig, RunControl};

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "case1",
        description: "[0,1]^2, n=65, u0 = 1e-5 sin(10 pi y), k=12; grows late and stops near t = 260",
    },
    Preset {
        name: "case2",
        description: "[0,pi]^2, n=33, u0 = 1e-5 sin(3y), k=12; stops near t = 9.6",
    },
    Preset {
        name: "case2_fine",
        description: "case2 on the 65 x 65 grid",
    },
    Preset {
        name: "case3",
        description: "[0,pi]^2, n=33, u0 = 1e-5 sin(3x), k=12; x-mode turning into a y-travelling wave",
    },
    Preset {
        name: "poly_demo",
        description: "[0,pi]^2, n=33, u0 = 1e-10 x y (x-2) sin x, k=12",
    },
    Preset {
        name: "gaussian",
        description: "[0,20]^2, n=65, Gaussian density centred at (10,10), rotating pulse",
    },
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.name)
}

fn preset_base(n: usize, length: f64, initial: InitialCondition, t_end: f64) -> RunConfig {
    RunConfig {
        mesh: MeshConfig {
            n,
            x0: 0.0,
            y0: 0.0,
            length,
        },
        problem: ProblemConfig {
            initial,
            density: DensityProfile::Exponential { a: 12.0, b: 0.0 },
        },
        run: RunControl {
            t_end,
            u_max: 0.3,
            ..RunControl::default()
        },
        ..RunConfig::default()
    }
}

pub fn preset(name: &str) -> Result<RunConfig> {
    let sin_y = |k: f64| InitialCondition::SinY {
        amplitude: 1e-5,
        wavenumber: k,
    };
    let cfg = match name {
        "case1" => preset_base(65, 1.0, sin_y(10.0 * PI), 300.0),
        "case2" => preset_base(33, PI, sin_y(3.0), 20.0),
        "case2_fine" => preset_base(65, PI, sin_y(3.0), 20.0),
        "case3" => preset_base(
            33,
            PI,
            InitialCondition::SinX {
                amplitude: 1e-5,
                wavenumber: 3.0,
            },
            60.0,
        ),
        "poly_demo" | "case4" => preset_base(33, PI, InitialCondition::PolyDemo, 60.0),
        "gaussian" => {
            let mut c = preset_base(
                65,
                20.0,
                InitialCondition::GaussDeriv {
                    amplitude: 1e-5,
                    center: [10.0, 10.0],
                    width: 1.0,
                },
                20.0,
            );
            c.problem.density = DensityProfile::Gaussian {
                amplitude: 1e20,
                center: [10.0, 10.0],
                width: 64.0,
                omega_ci: 1e7,
            };
            c
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepper::Scheme;

    #[test]
    fn preset_settings() {
        let c1 = preset("case1").unwrap();
        assert_eq!((c1.mesh.n, c1.mesh.length), (65, 1.0));
        assert_eq!(c1.problem.density.constant_k_hat(), Some(12.0));
        assert_eq!(c1.scheme.tau, 0.1);
        assert_eq!(c1.run.u_max, 0.3);
        assert_eq!(c1.scheme.scheme, Scheme::Semilinear);
        assert!((c1.problem.initial.eval(0.3, 0.05) - 1e-5 * (0.5 * PI).sin()).abs() < 1e-20);

        let c3 = preset("case3").unwrap();
        assert_eq!((c3.mesh.n, c3.mesh.length), (33, PI));
        assert!(matches!(c3.problem.initial, InitialCondition::SinX { wavenumber, .. } if wavenumber == 3.0));

        let g = preset("gaussian").unwrap();
        assert_eq!((g.mesh.n, g.mesh.length), (65, 20.0));
        assert_eq!(g.problem.density.gradient(20.0, 10.0), (-10.0 / 32.0, 0.0));
        assert_eq!(g.scheme.tau, 0.1);
    }

    #[test]
    fn all_listed_presets_resolve_and_validate() {
        for name in preset_names() {
            preset(name).unwrap().validate().unwrap();
        }
        assert!(matches!(preset("case9"), Err(Error::UnknownPreset(_))));
    }
}
