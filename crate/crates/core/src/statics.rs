//! Quasi-static equilibria in `S`, tip-load shooting, the rigid-body oracle
//! and the named special-case presets.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::config::{GridConfig, ModelConfig, SimConfig, TimeConfig};
use crate::dynamics::{BoundarySpec, EndCondition, Subspace};
use crate::error::{BeamError, Result};
use crate::init::{BendingPlane, InitSpec};
use crate::material::{MaterialParams, RigidityTensors};
use crate::so3::{e3, Vec3};
use crate::state::Grid;

type Vec6 = SVector<f64, 6>;

fn static_rate(n: &Vec3, m: &Vec3, t: &RigidityTensors) -> (Vec3, Vec3) {
    let eps = t.g.solve(n);
    let kappa = t.h.solve(m);
    (-kappa.cross(n), -kappa.cross(m) - (eps + e3()).cross(n))
}

/// Marches `N' = -κ∧N`, `M' = -κ∧M - (ε+d3)∧N` from root strains with RK4,
/// one step per grid interval; returns nodal `(ε, κ)`.
pub fn static_ivp(eps0: &Vec3, kappa0: &Vec3, m: &RigidityTensors, grid: &Grid) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    let h = grid.ds();
    let mut n = m.g.apply(eps0);
    let mut mm = m.h.apply(kappa0);
    let mut eps = vec![*eps0];
    let mut kappa = vec![*kappa0];
    for _ in 1..grid.n_nodes() {
        let (a1, b1) = static_rate(&n, &mm, m);
        let (a2, b2) = static_rate(&(n + a1 * (0.5 * h)), &(mm + b1 * (0.5 * h)), m);
        let (a3, b3) = static_rate(&(n + a2 * (0.5 * h)), &(mm + b2 * (0.5 * h)), m);
        let (a4, b4) = static_rate(&(n + a3 * h), &(mm + b3 * h), m);
        n += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
        mm += (b1 + b2 * 2.0 + b3 * 2.0 + b4) * (h / 6.0);
        eps.push(m.g.solve(&n));
        kappa.push(m.h.solve(&mm));
    }
    if eps.iter().chain(&kappa).any(|x| !x.iter().all(|c| c.is_finite())) {
        return Err(BeamError::NumericFailure("static march"));
    }
    Ok((eps, kappa))
}

/// Six tip conditions for the shooting problem; the unknowns are the root
/// strains at `S = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TipTarget {
    Resultants { n: [f64; 3], m: [f64; 3] },
    Strains { eps: [f64; 3], kappa: [f64; 3] },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticBVPSpec {
    pub target: TipTarget,
    pub guess_eps0: Vec3,
    pub guess_kappa0: Vec3,
}

impl StaticBVPSpec {
    pub fn new(target: TipTarget) -> Self {
        StaticBVPSpec { target, guess_eps0: Vec3::zeros(), guess_kappa0: Vec3::zeros() }
    }
}

#[derive(Clone, Debug)]
pub struct StaticSolution {
    pub eps0: Vec3,
    pub kappa0: Vec3,
    pub eps: Vec<Vec3>,
    pub kappa: Vec<Vec3>,
    pub residual: f64,
    pub iterations: usize,
}

pub const SHOOT_TOL: f64 = 1e-10;
pub const SHOOT_MAX_ITER: usize = 50;
const SHOOT_FD_STEP: f64 = 1e-6;

fn split(x: &Vec6) -> (Vec3, Vec3) {
    (Vec3::new(x[0], x[1], x[2]), Vec3::new(x[3], x[4], x[5]))
}

fn join(a: &Vec3, b: &Vec3) -> Vec6 {
    Vec6::from_column_slice(&[a.x, a.y, a.z, b.x, b.y, b.z])
}

fn tip_residual(x: &Vec6, spec: &StaticBVPSpec, m: &RigidityTensors, grid: &Grid) -> Result<Vec6> {
    let (e0, k0) = split(x);
    let (eps, kappa) = static_ivp(&e0, &k0, m, grid)?;
    let (e, k) = (eps[eps.len() - 1], kappa[kappa.len() - 1]);
    Ok(match spec.target {
        TipTarget::Resultants { n, m: mt } => join(&(m.g.apply(&e) - Vec3::from(n)), &(m.h.apply(&k) - Vec3::from(mt))),
        TipTarget::Strains { eps, kappa } => join(&(e - Vec3::from(eps)), &(k - Vec3::from(kappa))),
    })
}

/// Newton shooting on the root strains with a forward-difference Jacobian
/// and step halving.
pub fn static_shoot(spec: &StaticBVPSpec, m: &RigidityTensors, grid: &Grid) -> Result<StaticSolution> {
    let mut x = join(&spec.guess_eps0, &spec.guess_kappa0);
    let mut r = tip_residual(&x, spec, m, grid)?;
    let mut iterations = 0;
    while r.norm().is_nan() || r.norm() > SHOOT_TOL {
        if iterations == SHOOT_MAX_ITER {
            return Err(BeamError::ShootingFailed { residual: r.norm(), iterations });
        }
        iterations += 1;
        let mut jac = SMatrix::<f64, 6, 6>::zeros();
        for c in 0..6 {
            let h = SHOOT_FD_STEP * (1.0 + x[c].abs());
            let mut xp = x;
            xp[c] += h;
            jac.set_column(c, &((tip_residual(&xp, spec, m, grid)? - r) / h));
        }
        let step = jac
            .lu()
            .solve(&(-r))
            .ok_or(BeamError::ShootingFailed { residual: r.norm(), iterations })?;
        let mut alpha = 1.0;
        loop {
            let trial = x + step * alpha;
            if let Ok(rt) = tip_residual(&trial, spec, m, grid) {
                if rt.norm() < r.norm() {
                    x = trial;
                    r = rt;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-6 {
                return Err(BeamError::ShootingFailed { residual: r.norm(), iterations });
            }
        }
    }
    let (eps0, kappa0) = split(&x);
    let (eps, kappa) = static_ivp(&eps0, &kappa0, m, grid)?;
    Ok(StaticSolution { eps0, kappa0, eps, kappa, residual: r.norm(), iterations })
}

fn euler_rate(w: &Vec3, m: &RigidityTensors) -> Vec3 {
    m.j.solve(&-w.cross(&m.j.apply(w)))
}

/// Samples `ω(k dt)` of `J ω̇ = -ω∧Jω` for `k dt ≤ t_end`, integrating with RK4
/// on internal substeps no longer than `1e-5 t_end`.
pub fn rigid_euler(omega0: &Vec3, t_end: f64, dt: f64, m: &RigidityTensors) -> Result<Vec<(f64, Vec3)>> {
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(BeamError::Config(format!("rigid_euler needs dt > 0 and T > 0, got {dt}, {t_end}")));
    }
    let n_samples = (t_end / dt + 1e-9).floor() as usize;
    let sub = (dt / (1e-5 * t_end)).ceil().max(1.0) as usize;
    let h = dt / sub as f64;
    let mut w = *omega0;
    let mut out = Vec::with_capacity(n_samples + 1);
    out.push((0.0, w));
    for k in 1..=n_samples {
        for _ in 0..sub {
            let k1 = euler_rate(&w, m);
            let k2 = euler_rate(&(w + k1 * (0.5 * h)), m);
            let k3 = euler_rate(&(w + k2 * (0.5 * h)), m);
            let k4 = euler_rate(&(w + k3 * h), m);
            w += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        out.push((k as f64 * dt, w));
    }
    Ok(out)
}

pub const PRESET_NAMES: [&str; 6] = ["longitudinal", "planar13", "planar23", "static", "rigid", "string"];

pub const STRING_FLOOR: f64 = 1e-8;

/// Model-level content of a preset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PresetModel {
    pub subspace: Subspace,
    pub rigidity_floor: Option<f64>,
}

pub fn preset_model(name: &str) -> Result<PresetModel> {
    let subspace = match name {
        "longitudinal" => Subspace::Longitudinal,
        "planar13" => Subspace::Planar13,
        "planar23" => Subspace::Planar23,
        "static" => Subspace::Static,
        "rigid" => Subspace::Rigid,
        "string" => Subspace::Full,
        other => return Err(BeamError::UnknownPreset(other.to_string())),
    };
    let rigidity_floor = (name == "string").then_some(STRING_FLOOR);
    Ok(PresetModel { subspace, rigidity_floor })
}

/// Complete configuration template for a preset.
pub fn preset(name: &str) -> Result<SimConfig> {
    preset_model(name)?;
    use EndCondition::{Clamped, Free};
    let time = |cfl: Option<f64>, dt: Option<f64>, t_end: f64, output_stride: usize| {
        Some(TimeConfig { dt, cfl, t_end, output_stride })
    };
    let (n_nodes, bc, time, init) = match name {
        "longitudinal" => (
            201,
            BoundarySpec::new(Clamped, Free),
            time(Some(0.5), None, 80.0, 400),
            InitSpec::AxialPulse { amplitude: 1e-6, mode: 1 },
        ),
        "planar13" | "planar23" => (
            101,
            BoundarySpec::new(Clamped, Free),
            time(Some(0.5), None, 1.0, 10),
            InitSpec::BendingPluck {
                amplitude: 0.5,
                mode: 1,
                plane: if name == "planar13" { BendingPlane::Plane13 } else { BendingPlane::Plane23 },
            },
        ),
        "static" => (
            51,
            BoundarySpec::new(Clamped, Clamped),
            time(Some(0.5), None, 1.0, 10),
            InitSpec::StaticInject { eps0: [0.0; 3], kappa0: [0.0, 0.5, 0.2] },
        ),
        "rigid" => (
            3,
            BoundarySpec::new(Free, Free),
            time(None, Some(1e-4), 20.0, 100),
            InitSpec::RigidSpin { omega: [0.3, 0.0, 1.0] },
        ),
        _ => (
            101,
            BoundarySpec::new(Clamped, Clamped),
            time(Some(0.5), None, 1.0, 10),
            InitSpec::AxialPulse { amplitude: 1e-3, mode: 1 },
        ),
    };
    let cfg = SimConfig {
        material: MaterialParams::default(),
        grid: GridConfig { n_nodes },
        bc,
        time,
        init,
        model: ModelConfig { preset: Some(name.to_string()), subspace: None, rigidity_floor: None },
        output: Default::default(),
        statics: None,
    };
    cfg.validate()?;
    Ok(cfg)
}
