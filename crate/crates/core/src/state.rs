//! Uniform grid over the material coordinate, nodal field containers and the
//! second-order derivative in `S`.

use std::ops::{Add, Mul, Sub};

use crate::error::{BeamError, Result};
use crate::so3::{e3, skew_project, vee, Mat3, Rot3, Vec3};

/// Uniform node-collocated grid on `[0, L]` with `S_j = j ds`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n_nodes: usize,
    length: f64,
}

impl Grid {
    pub fn new(n_nodes: usize, length: f64) -> Result<Self> {
        if n_nodes < 3 {
            return Err(BeamError::InvalidKey {
                key: "grid.n_nodes".into(),
                reason: format!("at least 3 nodes are required, got {n_nodes}"),
            });
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(BeamError::InvalidKey {
                key: "material.length".into(),
                reason: format!("must be positive, got {length}"),
            });
        }
        Ok(Grid { n_nodes, length })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn ds(&self) -> f64 {
        self.length / (self.n_nodes - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j + 1 == self.n_nodes {
            self.length
        } else {
            j as f64 * self.ds()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes).map(|j| self.node(j))
    }

    /// Trapezoid weight of node `j`.
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.n_nodes {
            0.5 * self.ds()
        } else {
            self.ds()
        }
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n_nodes {
            Ok(())
        } else {
            Err(BeamError::LengthMismatch { expected: self.n_nodes, got: len })
        }
    }

    /// Trapezoid quadrature of nodal values.
    pub fn integrate(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        values.into_iter().enumerate().map(|(j, f)| self.weight(j) * f).sum()
    }
}

/// Second-order derivative in `S`: central differences inside, three-point
/// one-sided stencils at both ends.
pub fn d_ds<T>(field: &[T], grid: &Grid) -> Result<Vec<T>>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = field.len();
    if n < 3 {
        return Err(BeamError::Config(format!(
            "spatial derivative needs at least 3 nodes, got {n}"
        )));
    }
    grid.check_len(n)?;
    let inv = 1.0 / (2.0 * grid.ds());
    let mut out = Vec::with_capacity(n);
    out.push((field[1] * 4.0 - field[0] * 3.0 - field[2]) * inv);
    for j in 1..n - 1 {
        out.push((field[j + 1] - field[j - 1]) * inv);
    }
    out.push((field[n - 1] * 3.0 - field[n - 2] * 4.0 + field[n - 3]) * inv);
    Ok(out)
}

/// Mobile-frame unknowns `u = (v, ω, ε, κ)` at every node, all in director
/// components.
#[derive(Clone, Debug, PartialEq)]
pub struct MobileFieldState {
    pub v: Vec<Vec3>,
    pub omega: Vec<Vec3>,
    pub eps: Vec<Vec3>,
    pub kappa: Vec<Vec3>,
}

/// Names of the twelve scalar components, in storage order.
pub const COMPONENT_NAMES: [&str; 12] =
    ["v1", "v2", "v3", "w1", "w2", "w3", "e1", "e2", "e3", "k1", "k2", "k3"];

impl MobileFieldState {
    pub fn zeros(n: usize) -> Self {
        MobileFieldState {
            v: vec![Vec3::zeros(); n],
            omega: vec![Vec3::zeros(); n],
            eps: vec![Vec3::zeros(); n],
            kappa: vec![Vec3::zeros(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn fields(&self) -> [&Vec<Vec3>; 4] {
        [&self.v, &self.omega, &self.eps, &self.kappa]
    }

    pub fn fields_mut(&mut self) -> [&mut Vec<Vec3>; 4] {
        [&mut self.v, &mut self.omega, &mut self.eps, &mut self.kappa]
    }

    /// Scalar component `c` (0..12, see [`COMPONENT_NAMES`]) at node `j`.
    pub fn component(&self, j: usize, c: usize) -> f64 {
        self.fields()[c / 3][j][c % 3]
    }

    pub fn set_component(&mut self, j: usize, c: usize, value: f64) {
        self.fields_mut()[c / 3][j][c % 3] = value;
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        for f in self.fields() {
            grid.check_len(f.len())?;
        }
        if !self.is_finite() {
            return Err(BeamError::NumericFailure("mobile field state"));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.iter().all(|x| x.iter().all(|c| c.is_finite())))
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &MobileFieldState) {
        for (dst, src) in self.fields_mut().into_iter().zip(other.fields()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s * alpha;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.fields()
            .iter()
            .flat_map(|f| f.iter())
            .fold(0.0, |acc: f64, x| acc.max(x.amax()))
    }

    /// Max-norm distance to another state.
    pub fn max_diff(&self, other: &MobileFieldState) -> f64 {
        let mut d = self.clone();
        d.axpy(-1.0, other);
        d.max_abs()
    }
}

/// Placement `φ` (Cartesian) and frame `R` at every node.
#[derive(Clone, Debug, PartialEq)]
pub struct KinematicState {
    pub phi: Vec<Vec3>,
    pub rot: Vec<Rot3>,
}

impl KinematicState {
    /// Stress-free reference: `φ = S e3`, `R = I`.
    pub fn straight(grid: &Grid) -> Self {
        KinematicState {
            phi: grid.nodes().map(|s| e3() * s).collect(),
            rot: vec![Rot3::identity(); grid.n_nodes()],
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        grid.check_len(self.phi.len())?;
        grid.check_len(self.rot.len())?;
        if self.rot.iter().any(|r| r.orthonormality_error() > Rot3::TOL_ORTH) {
            return Err(BeamError::Config("kinematic state holds a non-rotation frame".into()));
        }
        Ok(())
    }

    pub fn max_orthonormality_error(&self) -> f64 {
        self.rot.iter().map(Rot3::orthonormality_error).fold(0.0, f64::max)
    }
}

/// Strains recovered from a configuration: `ε = R^T φ' - e3` and
/// `κ = vee(skew(R^T R'))`.
pub fn strain_from_kinematics(kin: &KinematicState, grid: &Grid) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    let dphi = d_ds(&kin.phi, grid)?;
    let mats: Vec<Mat3> = kin.rot.iter().map(|r| *r.matrix()).collect();
    let drot = d_ds(&mats, grid)?;
    let mut eps = Vec::with_capacity(kin.len());
    let mut kappa = Vec::with_capacity(kin.len());
    for ((r, dp), dr) in kin.rot.iter().zip(&dphi).zip(&drot) {
        let rt = r.matrix().transpose();
        eps.push(rt * dp - e3());
        kappa.push(vee(&skew_project(&(rt * dr))));
    }
    Ok((eps, kappa))
}
