//! Named initial-condition generators.
//!
//! Shapes follow the boundary conditions: strain-type fields vanish at free
//! ends and velocity-type fields at clamped ends, so every generated state is
//! admissible. Initial kinematics are reconstructed in space from `φ(0) = 0`,
//! `R(0) = I`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::{EndCondition, Model};
use crate::error::{BeamError, Result};
use crate::kinematics::reconstruct_space;
use crate::so3::{Rot3, Vec3};
use crate::state::{KinematicState, MobileFieldState};
use crate::statics::static_ivp;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BendingPlane {
    /// Bending about `d2`, deflection along `d1`.
    #[default]
    Plane13,
    /// Bending about `d1`, deflection along `d2`.
    Plane23,
}

fn first_mode() -> u32 {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    #[default]
    Zero,
    /// Curvature modal shape at rest.
    BendingPluck {
        amplitude: f64,
        #[serde(default = "first_mode")]
        mode: u32,
        #[serde(default)]
        plane: BendingPlane,
    },
    /// Axial strain modal shape at rest.
    AxialPulse {
        amplitude: f64,
        #[serde(default = "first_mode")]
        mode: u32,
    },
    /// Twist modal shape at rest.
    TwistPulse {
        amplitude: f64,
        #[serde(default = "first_mode")]
        mode: u32,
    },
    /// Uniform body spin of a straight beam.
    RigidSpin { omega: [f64; 3] },
    /// Quasi-static profiles marched from root strains, at rest.
    StaticInject { eps0: [f64; 3], kappa0: [f64; 3] },
}

/// Modal shapes `(strain_shape, velocity_shape)` at `s` for the end
/// conditions of `model`.
pub fn modal_shapes(model: &Model, mode: u32, s: f64) -> (f64, f64) {
    let l = model.grid.length();
    let m = mode as f64;
    let quarter = (2.0 * m - 1.0) * PI * s / (2.0 * l);
    let half = m * PI * s / l;
    match (model.bc.end0, model.bc.end_l) {
        (EndCondition::Clamped, EndCondition::Free) => (quarter.cos(), quarter.sin()),
        (EndCondition::Free, EndCondition::Clamped) => (quarter.sin(), quarter.cos()),
        (EndCondition::Free, EndCondition::Free) => (half.sin(), half.cos()),
        (EndCondition::Clamped, EndCondition::Clamped) => (half.cos(), half.sin()),
    }
}

impl InitSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| {
            Err(BeamError::InvalidKey { key: format!("init.{key}"), reason: reason.into() })
        };
        match self {
            InitSpec::BendingPluck { amplitude, mode, .. }
            | InitSpec::AxialPulse { amplitude, mode }
            | InitSpec::TwistPulse { amplitude, mode } => {
                if !amplitude.is_finite() {
                    return bad("amplitude", "must be finite");
                }
                if *mode == 0 {
                    return bad("mode", "modes are numbered from 1");
                }
            }
            InitSpec::RigidSpin { omega } => {
                if omega.iter().any(|x| !x.is_finite()) {
                    return bad("omega", "must be finite");
                }
            }
            InitSpec::StaticInject { eps0, kappa0 } => {
                if eps0.iter().chain(kappa0).any(|x| !x.is_finite()) {
                    return bad("eps0", "root strains must be finite");
                }
            }
            InitSpec::Zero => {}
        }
        Ok(())
    }

    pub fn build(&self, model: &Model) -> Result<(MobileFieldState, KinematicState)> {
        self.validate()?;
        let grid = &model.grid;
        let n = grid.n_nodes();
        let mut u = MobileFieldState::zeros(n);
        let modal = |mode: u32| -> Vec<f64> { grid.nodes().map(|s| modal_shapes(model, mode, s).0).collect() };
        match *self {
            InitSpec::Zero => return Ok((u, KinematicState::straight(grid))),
            InitSpec::BendingPluck { amplitude, mode, plane } => {
                let c = match plane {
                    BendingPlane::Plane13 => 1,
                    BendingPlane::Plane23 => 0,
                };
                for (k, f) in u.kappa.iter_mut().zip(modal(mode)) {
                    k[c] = amplitude * f;
                }
            }
            InitSpec::AxialPulse { amplitude, mode } => {
                for (e, f) in u.eps.iter_mut().zip(modal(mode)) {
                    e.z = amplitude * f;
                }
            }
            InitSpec::TwistPulse { amplitude, mode } => {
                for (k, f) in u.kappa.iter_mut().zip(modal(mode)) {
                    k.z = amplitude * f;
                }
            }
            InitSpec::RigidSpin { omega } => {
                u.omega.iter_mut().for_each(|w| *w = Vec3::from(omega));
            }
            InitSpec::StaticInject { eps0, kappa0 } => {
                let (eps, kappa) = static_ivp(&Vec3::from(eps0), &Vec3::from(kappa0), &model.tensors, grid)?;
                u.eps = eps;
                u.kappa = kappa;
            }
        }
        for (j, end) in [(0, model.bc.end0), (n - 1, model.bc.end_l)] {
            match end {
                EndCondition::Clamped => {
                    u.v[j] = Vec3::zeros();
                    u.omega[j] = Vec3::zeros();
                }
                EndCondition::Free => {
                    u.eps[j] = Vec3::zeros();
                    u.kappa[j] = Vec3::zeros();
                }
            }
        }
        model.subspace.project(&mut u);
        let kin = reconstruct_space(Vec3::zeros(), Rot3::identity(), &u.eps, &u.kappa, grid)?;
        Ok((u, kin))
    }
}
