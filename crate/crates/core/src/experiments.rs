//! Measurement routines shared by the acceptance tests and `verify`: the
//! standard runs, random admissible states and the derived quantities
//! (drift, frequencies, closure orders, bracket and action residuals).

use std::f64::consts::PI;

use rand::Rng;

use crate::config::{GridConfig, SimConfig, TimeConfig};
use crate::dynamics::{simulate, BoundarySpec, EndCondition, Integrator, Snapshot, Trajectory};
use crate::energy::max_drift;
use crate::error::{BeamError, Result};
use crate::hamiltonian::{
    bracket_from_gradients, functional_gradient, hamilton_rhs, legendre, legendre_tangent, Observable, PhaseField,
    PhaseState,
};
use crate::init::{BendingPlane, InitSpec};
use crate::kinematics::{closure_residuals, reconstruct_space};
use crate::material::{MaterialParams, RigidityTensors};
use crate::so3::{Rot3, Vec3};
use crate::state::{strain_from_kinematics, Grid, KinematicState, MobileFieldState};
use crate::statics::{preset, rigid_euler};

/// Amplitude of the bending pluck used by the conservation runs.
pub const PLUCK_AMPLITUDE: f64 = 0.5;

/// Clamped-free bending pluck with the default material.
pub fn bending_pluck_config(n_nodes: usize, cfl: f64, t_end: f64, output_stride: usize) -> SimConfig {
    SimConfig {
        material: MaterialParams::default(),
        grid: GridConfig { n_nodes },
        bc: BoundarySpec::new(EndCondition::Clamped, EndCondition::Free),
        time: Some(TimeConfig { dt: None, cfl: Some(cfl), t_end, output_stride }),
        init: InitSpec::BendingPluck { amplitude: PLUCK_AMPLITUDE, mode: 1, plane: BendingPlane::Plane13 },
        model: Default::default(),
        output: Default::default(),
        statics: None,
    }
}

pub fn bending_pluck_run(n_nodes: usize) -> Result<Trajectory> {
    simulate(&bending_pluck_config(n_nodes, 0.5, 1.0, 1))
}

/// `max |drift| / total(0)`
pub fn relative_drift(traj: &Trajectory) -> f64 {
    max_drift(&traj.ledger) / traj.ledger[0].total
}

/// Largest closure residual (strain or curvature) over a run.
pub fn max_closure(traj: &Trajectory) -> f64 {
    traj.closure.iter().map(|r| r.r_eps.max(r.r_kappa)).fold(0.0, f64::max)
}

/// `log2(a / b)`
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Angular frequency from linearly interpolated zero crossings.
pub fn zero_crossing_frequency(samples: &[(f64, f64)]) -> Option<f64> {
    let mut crossings = Vec::new();
    for w in samples.windows(2) {
        let ((t0, y0), (t1, y1)) = (w[0], w[1]);
        if y0 == 0.0 && crossings.last() != Some(&t0) {
            crossings.push(t0);
        } else if y0 * y1 < 0.0 {
            crossings.push(t0 + (t1 - t0) * y0 / (y0 - y1));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let half_periods = (crossings.len() - 1) as f64;
    Some(PI * half_periods / (crossings[crossings.len() - 1] - crossings[0]))
}

/// Simulated spin of the middle node next to the [`rigid_euler`] oracle,
/// `(t, ω_sim, ω_oracle)` every `sample_every` steps. Expects a
/// `rigid_spin` initial condition.
pub fn rigid_comparison_for(cfg: &SimConfig, sample_every: usize) -> Result<Vec<(f64, Vec3, Vec3)>> {
    if !matches!(cfg.init, InitSpec::RigidSpin { .. }) {
        return Err(BeamError::InvalidKey { key: "init.kind".into(), reason: "the rigid comparison needs `rigid_spin`".into() });
    }
    cfg.validate()?;
    let time = cfg.time()?;
    let model = cfg.model()?;
    let (u0, kin0) = cfg.init.build(&model)?;
    let integrator = Integrator::new(model, time.dt_for(&model), time.t_end)?;
    let every = sample_every.max(1);
    let node = model.grid.n_nodes() / 2;
    let oracle = rigid_euler(&u0.omega[node], time.t_end, integrator.dt * every as f64, &model.tensors)?;
    let mut out = Vec::with_capacity(oracle.len());
    integrator.run(u0, kin0, |step, t, u, _| {
        if step % every == 0 {
            if let Some(&(_, w_ref)) = oracle.get(step / every) {
                out.push((t, u.omega[node], w_ref));
            }
        }
        Ok(())
    })?;
    Ok(out)
}

/// [`rigid_comparison_for`] on the rigid preset run to `t_end`.
pub fn rigid_comparison(t_end: f64, sample_every: usize) -> Result<Vec<(f64, Vec3, Vec3)>> {
    let mut cfg = preset("rigid")?;
    cfg.time.as_mut().expect("preset carries a time block").t_end = t_end;
    rigid_comparison_for(&cfg, sample_every)
}

/// Body precession rate `ω3 (I3 - I1) / I1` of an axisymmetric section,
/// `None` when `I1 != I2`.
pub fn precession_rate(p: &MaterialParams, omega3: f64) -> Option<f64> {
    (p.i1 == p.i2).then(|| omega3 * (p.i3 - p.i1) / p.i1)
}

/// Closed-form body precession rate for the rigid preset.
pub fn rigid_precession_rate() -> Result<f64> {
    let cfg = preset("rigid")?;
    let InitSpec::RigidSpin { omega } = cfg.init else { unreachable!("rigid preset spins") };
    Ok(precession_rate(&cfg.material, omega[2]).expect("rigid preset is axisymmetric"))
}

/// Clamped-free axial mode of the longitudinal preset: angular frequency
/// measured from zero crossings of the tip velocity over `periods`
/// analytic periods.
pub fn axial_frequency(n_nodes: usize, periods: f64) -> Result<(f64, f64)> {
    let mut cfg = preset("longitudinal")?;
    cfg.grid.n_nodes = n_nodes;
    let p = cfg.material;
    let expected = 0.5 * PI * (p.e_mod / p.rho).sqrt() / p.length;
    let t_end = periods * 2.0 * PI / expected;
    let model = cfg.model()?;
    let (u0, kin0) = cfg.init.build(&model)?;
    let integrator = Integrator::new(model, cfg.time()?.dt_for(&model), t_end)?;
    let tip = n_nodes - 1;
    let mut signal = Vec::with_capacity(integrator.n_steps + 1);
    integrator.run(u0, kin0, |_, t, u, _| {
        signal.push((t, u.v[tip].z));
        Ok(())
    })?;
    let measured = zero_crossing_frequency(&signal).unwrap_or(0.0);
    Ok((measured, expected))
}

fn smooth_field<R: Rng + ?Sized>(rng: &mut R, grid: &Grid, amplitude: f64) -> Vec<Vec3> {
    let l = grid.length();
    let coef: Vec<(Vec3, Vec3)> = (1..=3)
        .map(|_| {
            let mut v = || Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (v(), v())
        })
        .collect();
    grid.nodes()
        .map(|s| {
            coef.iter().enumerate().fold(Vec3::zeros(), |acc, (k, (a, b))| {
                let x = (k + 1) as f64 * PI * s / l;
                acc + (a * x.cos() + b * x.sin()) * (amplitude / (k + 1) as f64)
            })
        })
        .collect()
}

/// Field amplitudes of [`random_admissible_state`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateScale {
    pub eps: f64,
    pub kappa: f64,
    pub v: f64,
    pub omega: f64,
}

impl StateScale {
    /// Strains and rates of a beam in ordinary service.
    pub const MODERATE: StateScale = StateScale { eps: 1e-3, kappa: 0.1, v: 0.1, omega: 0.1 };
    /// Large rotations and strains.
    pub const LARGE: StateScale = StateScale { eps: 0.05, kappa: 1.0, v: 0.3, omega: 1.0 };
}

/// Smooth random state with compatible strains (`ε, κ` recovered from the
/// configuration) and rates vanishing at clamped ends.
pub fn random_admissible_state<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &Grid,
    bc: &BoundarySpec,
    scale: StateScale,
) -> Result<(MobileFieldState, KinematicState)> {
    let eps = smooth_field(rng, grid, scale.eps);
    let kappa = smooth_field(rng, grid, scale.kappa);
    let r0 = crate::so3::exp_so3(&Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let kin = reconstruct_space(Vec3::zeros(), r0, &eps, &kappa, grid)?;
    let (eps, kappa) = strain_from_kinematics(&kin, grid)?;
    let mut u = MobileFieldState { v: smooth_field(rng, grid, scale.v), omega: smooth_field(rng, grid, scale.omega), eps, kappa };
    let n = grid.n_nodes();
    for (j, end) in [(0, bc.end0), (n - 1, bc.end_l)] {
        if end == EndCondition::Clamped {
            u.v[j] = Vec3::zeros();
            u.omega[j] = Vec3::zeros();
        }
    }
    Ok((u, kin))
}

/// Mismatch between the Hamiltonian and mobile right-hand sides:
/// `(velocity/spin rows, strain/curvature rows)` in max-norm.
pub fn hamilton_mismatch(
    u: &MobileFieldState,
    kin: &KinematicState,
    bc: &BoundarySpec,
    m: &RigidityTensors,
    grid: &Grid,
) -> Result<(f64, f64)> {
    let ps = legendre(u, kin, m);
    let tangent = legendre_tangent(&ps, &hamilton_rhs(&ps, bc, m, grid)?, m, grid)?;
    let mobile = crate::dynamics::rhs_mobile(u, bc, m, grid)?;
    let dist = |a: &[Vec3], b: &[Vec3]| a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max);
    let rates = dist(&tangent.v, &mobile.v).max(dist(&tangent.omega, &mobile.omega));
    let strains = dist(&tangent.eps, &mobile.eps).max(dist(&tangent.kappa, &mobile.kappa));
    Ok((rates, strains))
}

/// `{f, H}` against the matching component of [`hamilton_rhs`].
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerCheck {
    pub name: String,
    pub bracket: f64,
    pub expected: f64,
}

impl SamplerCheck {
    pub fn error(&self) -> f64 {
        (self.bracket - self.expected).abs()
    }
}

/// Coordinate samplers at random interior nodes (`3 <= j <= n-4`).
pub fn bracket_checks<R: Rng + ?Sized>(
    rng: &mut R,
    ps: &PhaseState,
    bc: &BoundarySpec,
    m: &RigidityTensors,
    grid: &Grid,
    count: usize,
) -> Result<Vec<SamplerCheck>> {
    let n = grid.n_nodes();
    let rate = hamilton_rhs(ps, bc, m, grid)?;
    let h = Observable::hamiltonian(*m, *grid);
    let gh = functional_gradient(&h, ps, grid)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let j = rng.random_range(3..=n - 4);
        let i = rng.random_range(0..3);
        let field = match rng.random_range(0..3) {
            0 => PhaseField::Phi,
            1 => PhaseField::PPhi,
            _ => PhaseField::Sigma,
        };
        let f = Observable::sampler(field, j, i);
        let gf = functional_gradient(&f, ps, grid)?;
        let bracket = bracket_from_gradients(&gf, &gh, ps, grid).total();
        let expected = match field {
            PhaseField::Phi => rate.phi[j][i],
            PhaseField::PPhi => rate.p_phi[j][i],
            PhaseField::Sigma => rate.sigma[j][i],
        };
        out.push(SamplerCheck { name: f.name().to_string(), bracket, expected });
    }
    Ok(out)
}

/// Copy of a record whose velocities and spins are scaled by `1 + eta`
/// after mid-run; no longer a solution.
pub fn perturb_mid_run(snaps: &[Snapshot], eta: f64) -> Vec<Snapshot> {
    let t_mid = 0.5 * (snaps[0].t + snaps[snaps.len() - 1].t);
    snaps
        .iter()
        .map(|s| {
            let mut s = s.clone();
            if s.t > t_mid {
                s.u.v.iter_mut().chain(s.u.omega.iter_mut()).for_each(|x| *x *= 1.0 + eta);
            }
            s
        })
        .collect()
}

/// Closure residuals at the final snapshot of a run.
pub fn final_closure(traj: &Trajectory) -> Result<(f64, f64)> {
    let last = traj.last();
    closure_residuals(&last.u, &last.kin, &traj.model.grid)
}

/// Straight rest kinematics rotated rigidly by `r0`.
pub fn rotated_rest(grid: &Grid, r0: Rot3) -> KinematicState {
    let kin = KinematicState::straight(grid);
    KinematicState { phi: kin.phi.iter().map(|p| r0 * *p).collect(), rot: vec![r0; grid.n_nodes()] }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_crossings_of_a_sine() {
        let w = 2.3;
        let samples: Vec<(f64, f64)> = (0..5000).map(|k| {
            let t = k as f64 * 0.003;
            (t, (w * t + 0.4).sin())
        }).collect();
        let f = zero_crossing_frequency(&samples).unwrap();
        assert!((f - w).abs() < 1e-5, "{f}");
        assert!(zero_crossing_frequency(&[(0.0, 1.0), (1.0, 2.0)]).is_none());
    }

    #[test]
    fn admissible_states_are_compatible() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = Grid::new(21, 1.0).unwrap();
        let bc = BoundarySpec::default();
        let (u, kin) = random_admissible_state(&mut rng, &g, &bc, StateScale::LARGE).unwrap();
        assert_eq!(closure_residuals(&u, &kin, &g).unwrap(), (0.0, 0.0));
        assert_eq!(u.v[0], Vec3::zeros());
        assert!(u.v[20].amax() > 0.0);
    }
}
