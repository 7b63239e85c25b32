//! The mobile-frame system `D u' + Y u = M u̇`, its boundary conditions and
//! explicit time stepping.
//!
//! The right-hand side is evaluated node by node from the four component
//! equations
//!
//! ```text
//! A v̇ = N' + κ∧N − ω∧Av
//! J ω̇ = M' + κ∧M + (ε+d3)∧N − ω∧Jω
//!   ε̇ = v' + κ∧v + (ε+d3)∧ω
//!   κ̇ = ω' + κ∧ω
//! ```
//!
//! with `N = Gε`, `M = Hκ`. The block operators are only assembled on the
//! debug path ([`rhs_assembled`]) used to cross-check the nodal evaluation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{BeamError, Result};
use crate::kinematics::closure_residuals;
use crate::material::RigidityTensors;
use crate::so3::{e3, exp_so3, Vec3};
use crate::state::{d_ds, Grid, KinematicState, MobileFieldState};

/// Default fraction of the CFL bound admitted by [`Model::check_dt`].
pub const CFL_SAFETY: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndCondition {
    /// `v = ω = 0`
    #[default]
    Clamped,
    /// `ε = κ = 0`, hence `N = M = 0`
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub end0: EndCondition,
    #[serde(rename = "endL", alias = "end_l")]
    pub end_l: EndCondition,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec { end0: EndCondition::Clamped, end_l: EndCondition::Free }
    }
}

impl BoundarySpec {
    pub fn new(end0: EndCondition, end_l: EndCondition) -> Self {
        BoundarySpec { end0, end_l }
    }

    fn ends(&self, n: usize) -> [(usize, EndCondition); 2] {
        [(0, self.end0), (n - 1, self.end_l)]
    }

    /// Overwrites the time-derivative rows pinned by each end condition.
    pub fn apply(&self, rate: &mut MobileFieldState) {
        let n = rate.len();
        for (j, end) in self.ends(n) {
            match end {
                EndCondition::Clamped => {
                    rate.v[j] = Vec3::zeros();
                    rate.omega[j] = Vec3::zeros();
                }
                EndCondition::Free => {
                    rate.eps[j] = Vec3::zeros();
                    rate.kappa[j] = Vec3::zeros();
                }
            }
        }
    }
}

/// Invariant subspaces of the mobile system used by the special-case presets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subspace {
    #[default]
    Full,
    /// Torsion and extension: only `(v3, ω3, ε3, κ3)`.
    Longitudinal,
    /// Bending and shear in the `(e1, e3)` plane.
    Planar13,
    /// Bending and shear in the `(e2, e3)` plane.
    Planar23,
    /// `v = ω = 0`
    Static,
    /// `ε = κ = 0`: every section is a free rigid body.
    Rigid,
}

impl Subspace {
    /// Active scalar components in storage order `v1..3, w1..3, e1..3, k1..3`.
    pub fn active(&self) -> [bool; 12] {
        const T: bool = true;
        const F: bool = false;
        match self {
            Subspace::Full => [T; 12],
            Subspace::Longitudinal => [F, F, T, F, F, T, F, F, T, F, F, T],
            Subspace::Planar13 => [T, F, T, F, T, F, T, F, T, F, T, F],
            Subspace::Planar23 => [F, T, T, T, F, F, F, T, T, T, F, F],
            Subspace::Static => [F, F, F, F, F, F, T, T, T, T, T, T],
            Subspace::Rigid => [T, T, T, T, T, T, F, F, F, F, F, F],
        }
    }

    /// Zeroes every inactive component.
    pub fn project(&self, state: &mut MobileFieldState) {
        if *self == Subspace::Full {
            return;
        }
        let active = self.active();
        for (f, field) in state.fields_mut().into_iter().enumerate() {
            for x in field.iter_mut() {
                for i in 0..3 {
                    if !active[3 * f + i] {
                        x[i] = 0.0;
                    }
                }
            }
        }
    }
}

/// Nodal right-hand side `u̇ = M^{-1}(D u' + Y u)` with boundary rows
/// overwritten.
pub fn rhs_mobile(
    u: &MobileFieldState,
    bc: &BoundarySpec,
    m: &RigidityTensors,
    grid: &Grid,
) -> Result<MobileFieldState> {
    u.validate(grid)?;
    let n = u.len();
    let normal: Vec<Vec3> = u.eps.iter().map(|e| m.g.apply(e)).collect();
    let moment: Vec<Vec3> = u.kappa.iter().map(|k| m.h.apply(k)).collect();
    let dn = d_ds(&normal, grid)?;
    let dm = d_ds(&moment, grid)?;
    let dv = d_ds(&u.v, grid)?;
    let dw = d_ds(&u.omega, grid)?;

    let mut rate = MobileFieldState::zeros(n);
    for j in 0..n {
        let (v, w, k) = (&u.v[j], &u.omega[j], &u.kappa[j]);
        let shear_axis = u.eps[j] + e3();
        let momentum = m.a.apply(v);
        let spin_momentum = m.j.apply(w);
        rate.v[j] = m.a.solve(&(dn[j] + k.cross(&normal[j]) - w.cross(&momentum)));
        rate.omega[j] = m.j.solve(
            &(dm[j] + k.cross(&moment[j]) + shear_axis.cross(&normal[j]) - w.cross(&spin_momentum)),
        );
        rate.eps[j] = dv[j] + k.cross(v) + shear_axis.cross(w);
        rate.kappa[j] = dw[j] + k.cross(w);
    }
    bc.apply(&mut rate);
    if !rate.is_finite() {
        return Err(BeamError::NumericFailure("mobile right-hand side"));
    }
    Ok(rate)
}

/// Dense first-derivative matrix matching [`d_ds`].
pub fn derivative_matrix(grid: &Grid) -> DMatrix<f64> {
    let n = grid.n_nodes();
    let inv = 1.0 / (2.0 * grid.ds());
    let mut d = DMatrix::zeros(n, n);
    d[(0, 0)] = -3.0 * inv;
    d[(0, 1)] = 4.0 * inv;
    d[(0, 2)] = -inv;
    for j in 1..n - 1 {
        d[(j, j - 1)] = -inv;
        d[(j, j + 1)] = inv;
    }
    d[(n - 1, n - 3)] = inv;
    d[(n - 1, n - 2)] = -4.0 * inv;
    d[(n - 1, n - 1)] = 3.0 * inv;
    d
}

fn skew_dense(x: &Vec3) -> nalgebra::Matrix3<f64> {
    crate::so3::hat(x).matrix()
}

fn diag_dense(d: &crate::material::Diag3) -> nalgebra::Matrix3<f64> {
    nalgebra::Matrix3::from_diagonal(&Vec3::new(d.0[0], d.0[1], d.0[2]))
}

/// Global operators of `D u' + Y u = M u̇` in node-major ordering
/// (`v, ω, ε, κ` per node). `D` already includes the spatial derivative.
/// Intended for small grids only.
pub fn assemble_operators(
    u: &MobileFieldState,
    m: &RigidityTensors,
    grid: &Grid,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DVector<f64>)> {
    u.validate(grid)?;
    let n = grid.n_nodes();
    let dim = 12 * n;
    let (g, h, a, jm) = (diag_dense(&m.g), diag_dense(&m.h), diag_dense(&m.a), diag_dense(&m.j));

    let mut local_d = DMatrix::<f64>::zeros(12, 12);
    local_d.fixed_view_mut::<3, 3>(0, 6).copy_from(&g);
    local_d.fixed_view_mut::<3, 3>(3, 9).copy_from(&h);
    local_d.fixed_view_mut::<3, 3>(6, 0).copy_from(&g);
    local_d.fixed_view_mut::<3, 3>(9, 3).copy_from(&h);

    let dmat = derivative_matrix(grid);
    let mut big_d = DMatrix::zeros(dim, dim);
    for i in 0..n {
        for k in 0..n {
            let c = dmat[(i, k)];
            if c != 0.0 {
                let block = &local_d * c;
                big_d.view_mut((12 * i, 12 * k), (12, 12)).copy_from(&block);
            }
        }
    }

    let mut big_y = DMatrix::zeros(dim, dim);
    for j in 0..n {
        let kk = skew_dense(&u.kappa[j]);
        let ww = skew_dense(&u.omega[j]);
        let ee = skew_dense(&(u.eps[j] + e3()));
        let mut y = DMatrix::<f64>::zeros(12, 12);
        y.fixed_view_mut::<3, 3>(0, 0).copy_from(&(-ww * a));
        y.fixed_view_mut::<3, 3>(0, 6).copy_from(&(kk * g));
        y.fixed_view_mut::<3, 3>(3, 3).copy_from(&(-ww * jm));
        y.fixed_view_mut::<3, 3>(3, 6).copy_from(&(ee * g));
        y.fixed_view_mut::<3, 3>(3, 9).copy_from(&(kk * h));
        y.fixed_view_mut::<3, 3>(6, 0).copy_from(&(g * kk));
        y.fixed_view_mut::<3, 3>(6, 3).copy_from(&(g * ee));
        y.fixed_view_mut::<3, 3>(9, 3).copy_from(&(h * kk));
        big_y.view_mut((12 * j, 12 * j), (12, 12)).copy_from(&y);
    }

    let mut mass = DVector::zeros(dim);
    for j in 0..n {
        for i in 0..3 {
            mass[12 * j + i] = m.a.0[i];
            mass[12 * j + 3 + i] = m.j.0[i];
            mass[12 * j + 6 + i] = m.g.0[i];
            mass[12 * j + 9 + i] = m.h.0[i];
        }
    }
    Ok((big_d, big_y, mass))
}

pub fn flatten(u: &MobileFieldState) -> DVector<f64> {
    let n = u.len();
    let mut x = DVector::zeros(12 * n);
    for j in 0..n {
        for c in 0..12 {
            x[12 * j + c] = u.component(j, c);
        }
    }
    x
}

pub fn unflatten(x: &DVector<f64>) -> MobileFieldState {
    let n = x.len() / 12;
    let mut u = MobileFieldState::zeros(n);
    for j in 0..n {
        for c in 0..12 {
            u.set_component(j, c, x[12 * j + c]);
        }
    }
    u
}

/// Assemble-and-multiply evaluation of the same right-hand side.
pub fn rhs_assembled(
    u: &MobileFieldState,
    bc: &BoundarySpec,
    m: &RigidityTensors,
    grid: &Grid,
) -> Result<MobileFieldState> {
    let (d, y, mass) = assemble_operators(u, m, grid)?;
    let x = flatten(u);
    let lhs = &d * &x + &y * &x;
    let mut rate = unflatten(&lhs.component_div(&mass));
    bc.apply(&mut rate);
    Ok(rate)
}

/// Everything the time stepper needs besides the state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Model {
    pub grid: Grid,
    pub tensors: RigidityTensors,
    pub bc: BoundarySpec,
    pub subspace: Subspace,
    pub cfl_safety: f64,
}

impl Model {
    pub fn new(grid: Grid, tensors: RigidityTensors, bc: BoundarySpec) -> Self {
        Model { grid, tensors, bc, subspace: Subspace::Full, cfl_safety: CFL_SAFETY }
    }

    pub fn with_subspace(mut self, subspace: Subspace) -> Self {
        self.subspace = subspace;
        self
    }

    pub fn rhs(&self, u: &MobileFieldState) -> Result<MobileFieldState> {
        let mut rate = rhs_mobile(u, &self.bc, &self.tensors, &self.grid)?;
        self.subspace.project(&mut rate);
        Ok(rate)
    }

    /// `ds / c_max`
    pub fn cfl_dt(&self) -> f64 {
        self.grid.ds() / self.tensors.max_wave_speed()
    }

    pub fn max_stable_dt(&self) -> f64 {
        self.cfl_safety * self.cfl_dt()
    }

    pub fn check_dt(&self, dt: f64) -> Result<()> {
        let dt_max = self.max_stable_dt();
        if dt.is_nan() || dt <= 0.0 {
            return Err(BeamError::InvalidKey {
                key: "time.dt".into(),
                reason: format!("must be positive, got {dt}"),
            });
        }
        if dt > dt_max * (1.0 + 1e-12) {
            return Err(BeamError::Cfl { dt, dt_max, c_max: self.tensors.max_wave_speed() });
        }
        Ok(())
    }
}

/// Inverse right Jacobian of `exp`, truncated after the second-order term.
fn dexp_inv(theta: &Vec3, w: &Vec3) -> Vec3 {
    let tw = theta.cross(w);
    w + tw * 0.5 + theta.cross(&tw) / 12.0
}

/// One classical four-stage step of the field equations. The frames are
/// co-advanced in the Lie algebra around `R_n` (stage rotations
/// `R_n exp(θ_i)`), so every stored frame is an exact rotation up to
/// roundoff; `φ` uses the stage frames applied to the stage velocities.
pub fn step_rk4(
    u: &MobileFieldState,
    kin: &KinematicState,
    dt: f64,
    model: &Model,
) -> Result<(MobileFieldState, KinematicState)> {
    model.check_dt(dt)?;
    let n = u.len();
    let k1 = model.rhs(u)?;
    let mut u2 = u.clone();
    u2.axpy(0.5 * dt, &k1);
    let k2 = model.rhs(&u2)?;
    let mut u3 = u.clone();
    u3.axpy(0.5 * dt, &k2);
    let k3 = model.rhs(&u3)?;
    let mut u4 = u.clone();
    u4.axpy(dt, &k3);
    let k4 = model.rhs(&u4)?;

    let mut next = u.clone();
    next.axpy(dt / 6.0, &k1);
    next.axpy(dt / 3.0, &k2);
    next.axpy(dt / 3.0, &k3);
    next.axpy(dt / 6.0, &k4);
    if !next.is_finite() {
        return Err(BeamError::NumericFailure("time step"));
    }

    let mut phi = Vec::with_capacity(n);
    let mut rot = Vec::with_capacity(n);
    for j in 0..n {
        let r0 = kin.rot[j];
        let s1 = u.omega[j];
        let th2 = s1 * (0.5 * dt);
        let s2 = dexp_inv(&th2, &u2.omega[j]);
        let th3 = s2 * (0.5 * dt);
        let s3 = dexp_inv(&th3, &u3.omega[j]);
        let th4 = s3 * dt;
        let s4 = dexp_inv(&th4, &u4.omega[j]);
        let theta = (s1 + s2 * 2.0 + s3 * 2.0 + s4) * (dt / 6.0);

        let c1 = r0 * u.v[j];
        let c2 = (r0 * exp_so3(&th2)) * u2.v[j];
        let c3 = (r0 * exp_so3(&th3)) * u3.v[j];
        let c4 = (r0 * exp_so3(&th4)) * u4.v[j];
        phi.push(kin.phi[j] + (c1 + c2 * 2.0 + c3 * 2.0 + c4) * (dt / 6.0));
        rot.push((r0 * exp_so3(&theta)).renormalized());
    }
    Ok((next, KinematicState { phi, rot }))
}

/// Stored state at one output time.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub u: MobileFieldState,
    pub kin: KinematicState,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosureRow {
    pub t: f64,
    pub r_eps: f64,
    pub r_kappa: f64,
}

/// Result of [`simulate`]: snapshots plus the per-snapshot diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub model: Model,
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    pub ledger: Vec<crate::energy::EnergyLedgerRow>,
    pub closure: Vec<ClosureRow>,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory holds the initial snapshot")
    }
}

/// Fixed-step driver that hands every state to an observer.
pub struct Integrator {
    pub model: Model,
    pub dt: f64,
    pub n_steps: usize,
}

impl Integrator {
    /// Uses the largest step not exceeding `dt_target` that divides `t_end`
    /// into an integer number of steps.
    pub fn new(model: Model, dt_target: f64, t_end: f64) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(BeamError::InvalidKey {
                key: "time.t_end".into(),
                reason: format!("must be positive, got {t_end}"),
            });
        }
        model.check_dt(dt_target)?;
        let n_steps = ((t_end / dt_target) - 1e-9).ceil().max(1.0) as usize;
        Ok(Integrator { model, dt: t_end / n_steps as f64, n_steps })
    }

    pub fn run<F>(&self, mut u: MobileFieldState, mut kin: KinematicState, mut observe: F) -> Result<(MobileFieldState, KinematicState)>
    where
        F: FnMut(usize, f64, &MobileFieldState, &KinematicState) -> Result<()>,
    {
        observe(0, 0.0, &u, &kin)?;
        for step in 1..=self.n_steps {
            let (nu, nk) = step_rk4(&u, &kin, self.dt, &self.model)?;
            u = nu;
            kin = nk;
            observe(step, step as f64 * self.dt, &u, &kin)?;
        }
        Ok((u, kin))
    }
}

/// Runs a configuration and records snapshots every `output_stride` steps
/// (and at the final step), each with an energy ledger row and closure
/// residuals.
pub fn simulate(cfg: &crate::config::SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let model = cfg.model()?;
    let (u0, kin0) = cfg.init.build(&model)?;
    let time = cfg.time()?;
    let integrator = Integrator::new(model, time.dt_for(&model), time.t_end)?;
    let stride = time.output_stride.max(1);
    let last = integrator.n_steps;
    let mut snapshots = Vec::new();
    integrator.run(u0, kin0, |step, t, u, kin| {
        if step % stride == 0 || step == last {
            snapshots.push(Snapshot { step, t, u: u.clone(), kin: kin.clone() });
        }
        Ok(())
    })?;
    let ledger = crate::energy::energy_report(&snapshots, &model.tensors, &model.grid);
    let closure = snapshots
        .iter()
        .map(|s| {
            closure_residuals(&s.u, &s.kin, &model.grid)
                .map(|(r_eps, r_kappa)| ClosureRow { t: s.t, r_eps, r_kappa })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { model, dt: integrator.dt, snapshots, ledger, closure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::MaterialParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize) -> (Grid, RigidityTensors) {
        let p = MaterialParams::default();
        (Grid::new(n, p.length).unwrap(), p.tensors())
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng, scale: f64) -> MobileFieldState {
        let mut u = MobileFieldState::zeros(n);
        for j in 0..n {
            for c in 0..12 {
                u.set_component(j, c, scale * rng.random_range(-1.0..1.0));
            }
        }
        u
    }

    #[test]
    fn rest_state_is_equilibrium() {
        let (g, m) = setup(11);
        let u = MobileFieldState::zeros(11);
        for bc in [BoundarySpec::default(), BoundarySpec::new(EndCondition::Free, EndCondition::Free)] {
            assert_eq!(rhs_mobile(&u, &bc, &m, &g).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn uniform_extension_is_equilibrium() {
        let (g, m) = setup(11);
        let mut u = MobileFieldState::zeros(11);
        u.eps.iter_mut().for_each(|e| *e = Vec3::new(0.0, 0.0, 0.02));
        let bc = BoundarySpec::new(EndCondition::Free, EndCondition::Free);
        assert!(rhs_mobile(&u, &bc, &m, &g).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn principal_axis_spin_is_steady() {
        let (g, m) = setup(11);
        let mut u = MobileFieldState::zeros(11);
        u.omega.iter_mut().for_each(|w| *w = Vec3::new(0.0, 0.0, 2.5));
        let bc = BoundarySpec::new(EndCondition::Free, EndCondition::Free);
        let rate = rhs_mobile(&u, &bc, &m, &g).unwrap();
        assert!(rate.omega.iter().all(|w| w.amax() < 1e-15));
    }

    #[test]
    fn non_finite_input_is_reported() {
        let (g, m) = setup(5);
        let mut u = MobileFieldState::zeros(5);
        u.v[2].x = f64::NAN;
        let err = rhs_mobile(&u, &BoundarySpec::default(), &m, &g).unwrap_err();
        assert!(matches!(err, BeamError::NumericFailure(_)));
    }

    #[test]
    fn boundary_rows_are_overwritten() {
        let (g, m) = setup(9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_state(9, &mut rng, 0.3);
        let rate = rhs_mobile(&u, &BoundarySpec::default(), &m, &g).unwrap();
        assert_eq!(rate.v[0], Vec3::zeros());
        assert_eq!(rate.omega[0], Vec3::zeros());
        assert_eq!(rate.eps[8], Vec3::zeros());
        assert_eq!(rate.kappa[8], Vec3::zeros());
        assert!(rate.eps[0].amax() > 0.0);
    }

    #[test]
    fn assembled_path_matches_nodal_path() {
        let (g, m) = setup(7);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for bc in [BoundarySpec::default(), BoundarySpec::new(EndCondition::Free, EndCondition::Clamped)] {
            for _ in 0..5 {
                let u = random_state(7, &mut rng, 0.5);
                let nodal = rhs_mobile(&u, &bc, &m, &g).unwrap();
                let dense = rhs_assembled(&u, &bc, &m, &g).unwrap();
                let scale = 1.0 + nodal.max_abs();
                assert!(nodal.max_diff(&dense) <= 1e-14 * scale, "{}", nodal.max_diff(&dense));
            }
        }
    }

    #[test]
    fn gyroscopic_block_is_energy_neutral_per_node() {
        let (g, m) = setup(6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_state(6, &mut rng, 1.0);
        let (_, y, _) = assemble_operators(&u, &m, &g).unwrap();
        let x = flatten(&u);
        let work = x.dot(&(&y * &x));
        assert!(work.abs() < 1e-13, "{work}");
    }

    #[test]
    fn cfl_violation_is_refused_with_diagnostic() {
        let (g, m) = setup(11);
        let model = Model::new(g, m, BoundarySpec::default());
        let u = MobileFieldState::zeros(11);
        let kin = KinematicState::straight(&g);
        let err = step_rk4(&u, &kin, 0.051, &model).unwrap_err();
        match err {
            BeamError::Cfl { dt_max, c_max, .. } => {
                assert!((c_max - 1.0).abs() < 1e-15);
                assert!((dt_max - 0.05).abs() < 1e-15);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(step_rk4(&u, &kin, 0.05, &model).is_ok());
    }

    #[test]
    fn zero_state_is_unchanged_by_a_step() {
        let (g, m) = setup(11);
        let model = Model::new(g, m, BoundarySpec::default());
        let kin = KinematicState::straight(&g);
        let (u, k) = step_rk4(&MobileFieldState::zeros(11), &kin, 0.05, &model).unwrap();
        assert_eq!(u.max_abs(), 0.0);
        assert_eq!(k, kin);
    }

    #[test]
    fn planar_data_stays_planar() {
        let (g, m) = setup(21);
        let model = Model::new(g, m, BoundarySpec::default());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut u = MobileFieldState::zeros(21);
        for j in 1..20 {
            let s = g.node(j);
            u.v[j] = Vec3::new(0.1 * (3.0 * s).sin(), 0.0, 0.05 * s * s);
            u.omega[j] = Vec3::new(0.0, 0.2 * s * rng.random::<f64>(), 0.0);
        }
        for j in 0..20 {
            let s = g.node(j);
            u.eps[j] = Vec3::new(0.02 * (1.0 - s), 0.0, 0.01 * (1.0 - s));
            u.kappa[j] = Vec3::new(0.0, 0.3 * (1.0 - s), 0.0);
        }
        let mut kin = KinematicState::straight(&g);
        let dt = model.max_stable_dt();
        for _ in 0..200 {
            (u, kin) = step_rk4(&u, &kin, dt, &model).unwrap();
        }
        let out_of_plane = (0..21)
            .map(|j| {
                [u.v[j].y, u.omega[j].x, u.omega[j].z, u.eps[j].y, u.kappa[j].x, u.kappa[j].z]
                    .iter()
                    .fold(0.0f64, |a, x| a.max(x.abs()))
            })
            .fold(0.0, f64::max);
        assert!(out_of_plane <= 1e-12, "{out_of_plane}");
        assert!(u.max_abs() > 1e-3);
    }

    #[test]
    fn longitudinal_data_stays_longitudinal() {
        let (g, m) = setup(21);
        let model = Model::new(g, m, BoundarySpec::default());
        let mut u = MobileFieldState::zeros(21);
        for j in 0..21 {
            let s = g.node(j);
            u.eps[j].z = 0.01 * (std::f64::consts::FRAC_PI_2 * s).cos();
            u.kappa[j].z = 0.05 * (std::f64::consts::FRAC_PI_2 * s).cos();
            u.omega[j].z = 0.1 * (std::f64::consts::FRAC_PI_2 * s).sin();
        }
        let mut kin = KinematicState::straight(&g);
        let dt = model.max_stable_dt();
        for _ in 0..200 {
            (u, kin) = step_rk4(&u, &kin, dt, &model).unwrap();
        }
        let stray = (0..21)
            .map(|j| {
                [0, 1, 3, 4, 6, 7, 9, 10]
                    .iter()
                    .fold(0.0f64, |a, &c| a.max(u.component(j, c).abs()))
            })
            .fold(0.0, f64::max);
        assert!(stray <= 1e-12, "{stray}");
    }

    #[test]
    fn subspace_masks() {
        assert_eq!(Subspace::Full.active(), [true; 12]);
        let planar = Subspace::Planar13.active();
        assert!(planar[0] && !planar[1] && planar[4] && planar[10] && !planar[9]);
        let rigid = Subspace::Rigid.active();
        assert!(rigid[..6].iter().all(|&a| a) && rigid[6..].iter().all(|&a| !a));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut u = random_state(4, &mut rng, 1.0);
        Subspace::Longitudinal.project(&mut u);
        assert!((0..4).all(|j| u.v[j].x == 0.0 && u.kappa[j].y == 0.0 && u.kappa[j].z != 0.0));
    }

    #[test]
    fn frames_stay_orthonormal_over_many_steps() {
        let (g, m) = setup(3);
        let model = Model::new(g, m, BoundarySpec::new(EndCondition::Free, EndCondition::Free))
            .with_subspace(Subspace::Rigid);
        let mut u = MobileFieldState::zeros(3);
        u.omega.iter_mut().for_each(|w| *w = Vec3::new(0.3, -0.2, 1.0));
        let mut kin = KinematicState::straight(&g);
        for _ in 0..100_000 {
            (u, kin) = step_rk4(&u, &kin, 1e-3, &model).unwrap();
        }
        assert!(kin.max_orthonormality_error() <= 1e-13, "{}", kin.max_orthonormality_error());
    }
}
