//! Section and material data, the four diagonal tensors of the beam, and the
//! quadratic energy densities built from them.
//!
//! `e_mod` plays the extensional role in `EA` and `EI`.

use serde::{Deserialize, Serialize};

use crate::error::{BeamError, Result};
use crate::so3::Vec3;

/// Material and section parameters of a uniform beam.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialParams {
    pub rho: f64,
    pub e_mod: f64,
    pub g_mod: f64,
    pub a_sec: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub length: f64,
}

impl Default for MaterialParams {
    /// Dimensionless desk-scale beam with an axisymmetric section.
    fn default() -> Self {
        MaterialParams {
            rho: 1.0,
            e_mod: 1.0,
            g_mod: 0.5,
            a_sec: 1.0,
            i1: 1e-2,
            i2: 1e-2,
            i3: 2e-2,
            length: 1.0,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("material.rho", self.rho),
            ("material.e_mod", self.e_mod),
            ("material.g_mod", self.g_mod),
            ("material.a_sec", self.a_sec),
            ("material.i1", self.i1),
            ("material.i2", self.i2),
            ("material.i3", self.i3),
            ("material.length", self.length),
        ];
        for (key, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(BeamError::InvalidKey {
                    key: key.to_string(),
                    reason: format!("must be finite and strictly positive, got {value}"),
                });
            }
        }
        Ok(())
    }

    pub fn tensors(&self) -> RigidityTensors {
        RigidityTensors::from_params(self)
    }
}

/// Diagonal 3x3 tensor expressed in the director frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diag3(pub [f64; 3]);

impl Diag3 {
    pub fn uniform(value: f64) -> Self {
        Diag3([value; 3])
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        Vec3::new(self.0[0] * x.x, self.0[1] * x.y, self.0[2] * x.z)
    }

    pub fn solve(&self, x: &Vec3) -> Vec3 {
        Vec3::new(x.x / self.0[0], x.y / self.0[1], x.z / self.0[2])
    }

    /// `x · D x`
    pub fn quad(&self, x: &Vec3) -> f64 {
        self.0[0] * x.x * x.x + self.0[1] * x.y * x.y + self.0[2] * x.z * x.z
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Rigidities `G = diag(GA, GA, EA)`, `H = diag(EI1, EI2, GI3)` and
/// inertias `A = rho A I`, `J = diag(rho I1, rho I2, rho I3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidityTensors {
    pub g: Diag3,
    pub h: Diag3,
    pub a: Diag3,
    pub j: Diag3,
}

impl RigidityTensors {
    pub fn from_params(p: &MaterialParams) -> Self {
        RigidityTensors {
            g: Diag3([p.g_mod * p.a_sec, p.g_mod * p.a_sec, p.e_mod * p.a_sec]),
            h: Diag3([p.e_mod * p.i1, p.e_mod * p.i2, p.g_mod * p.i3]),
            a: Diag3::uniform(p.rho * p.a_sec),
            j: Diag3([p.rho * p.i1, p.rho * p.i2, p.rho * p.i3]),
        }
    }

    /// Line density `rho A`; `A` is a multiple of the identity.
    pub fn mass_per_length(&self) -> f64 {
        self.a.0[0]
    }

    /// Fastest characteristic speed of the first-order system:
    /// `max_i sqrt(G_ii / A_ii)` and `max_i sqrt(H_ii / J_ii)`.
    pub fn max_wave_speed(&self) -> f64 {
        (0..3)
            .map(|i| (self.g.0[i] / self.a.0[i]).sqrt().max((self.h.0[i] / self.j.0[i]).sqrt()))
            .fold(0.0, f64::max)
    }

    /// String limit: shear rigidities and all of `H` scaled down by `floor`.
    pub fn string_limit(&self, floor: f64) -> Self {
        let mut out = *self;
        out.g.0[0] *= floor;
        out.g.0[1] *= floor;
        for k in out.h.0.iter_mut() {
            *k *= floor;
        }
        out
    }
}

/// `U = ½(ε·Gε + κ·Hκ)`
pub fn strain_energy_density(eps: &Vec3, kappa: &Vec3, m: &RigidityTensors) -> f64 {
    0.5 * (m.g.quad(eps) + m.h.quad(kappa))
}

/// `N = Gε`, `M = Hκ` in director components.
pub fn stress_resultants(eps: &Vec3, kappa: &Vec3, m: &RigidityTensors) -> (Vec3, Vec3) {
    (m.g.apply(eps), m.h.apply(kappa))
}

/// `T = ½ v·Av + ½ ω·Jω`
pub fn kinetic_energy_density(v: &Vec3, omega: &Vec3, m: &RigidityTensors) -> f64 {
    0.5 * (m.a.quad(v) + m.j.quad(omega))
}
