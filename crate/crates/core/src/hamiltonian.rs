//! Phase-space form `(φ, p_φ, R, σ)`: Legendre map, Hamiltonian, Hamilton's
//! equations, a finite-difference Poisson bracket and the discrete action.
//!
//! `φ` and `p_φ` are Cartesian; `σ = Jω` and the strains are in director
//! components. `Ṙ` is always carried left-trivialized as `ω = R⁻¹Ṙ`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::dynamics::{BoundarySpec, EndCondition, Snapshot};
use crate::error::{BeamError, Result};
use crate::material::{kinetic_energy_density, strain_energy_density, RigidityTensors};
use crate::so3::{e3, exp_so3, frobenius_dense, hat, right_jacobian, skew_project, vee, Mat3, Rot3, Vec3};
use crate::state::{d_ds, strain_from_kinematics, Grid, KinematicState, MobileFieldState};

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseState {
    pub phi: Vec<Vec3>,
    pub p_phi: Vec<Vec3>,
    pub rot: Vec<Rot3>,
    pub sigma: Vec<Vec3>,
}

impl PhaseState {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        for len in [self.phi.len(), self.p_phi.len(), self.rot.len(), self.sigma.len()] {
            grid.check_len(len)?;
        }
        Ok(())
    }

    pub fn kinematics(&self) -> KinematicState {
        KinematicState { phi: self.phi.clone(), rot: self.rot.clone() }
    }
}

/// `p_φ = ρA R v`, `σ = Jω`.
pub fn legendre(u: &MobileFieldState, kin: &KinematicState, m: &RigidityTensors) -> PhaseState {
    let rho_a = m.mass_per_length();
    PhaseState {
        phi: kin.phi.clone(),
        p_phi: kin.rot.iter().zip(&u.v).map(|(r, v)| r * v * rho_a).collect(),
        rot: kin.rot.clone(),
        sigma: u.omega.iter().map(|w| m.j.apply(w)).collect(),
    }
}

/// Inverse of [`legendre`]; the strains are recovered from the configuration.
pub fn inverse_legendre(
    ps: &PhaseState,
    m: &RigidityTensors,
    grid: &Grid,
) -> Result<(MobileFieldState, KinematicState)> {
    ps.validate(grid)?;
    let kin = ps.kinematics();
    let (eps, kappa) = strain_from_kinematics(&kin, grid)?;
    let rho_a = m.mass_per_length();
    let u = MobileFieldState {
        v: ps.rot.iter().zip(&ps.p_phi).map(|(r, p)| r.transpose() * *p / rho_a).collect(),
        omega: ps.sigma.iter().map(|s| m.j.solve(s)).collect(),
        eps,
        kappa,
    };
    Ok((u, kin))
}

pub fn hamiltonian(ps: &PhaseState, m: &RigidityTensors, grid: &Grid) -> Result<f64> {
    ps.validate(grid)?;
    let (eps, kappa) = strain_from_kinematics(&ps.kinematics(), grid)?;
    let rho_a = m.mass_per_length();
    Ok(grid.integrate((0..ps.len()).map(|j| {
        0.5 * ps.p_phi[j].norm_squared() / rho_a
            + 0.5 * ps.sigma[j].dot(&m.j.solve(&ps.sigma[j]))
            + strain_energy_density(&eps[j], &kappa[j], m)
    })))
}

/// `∫ (T - U)` evaluated on the mobile fields as given.
pub fn field_lagrangian(u: &MobileFieldState, m: &RigidityTensors, grid: &Grid) -> f64 {
    grid.integrate((0..u.len()).map(|j| {
        kinetic_energy_density(&u.v[j], &u.omega[j], m) - strain_energy_density(&u.eps[j], &u.kappa[j], m)
    }))
}

/// Lagrangian of a configuration `(φ, R)` moving with `(v, ω)`; the strains
/// are those of the configuration.
pub fn lagrangian(u: &MobileFieldState, kin: &KinematicState, m: &RigidityTensors, grid: &Grid) -> Result<f64> {
    let (eps, kappa) = strain_from_kinematics(kin, grid)?;
    let w = MobileFieldState { v: u.v.clone(), omega: u.omega.clone(), eps, kappa };
    Ok(field_lagrangian(&w, m, grid))
}

/// Tangent vector `(φ̇, Ṙ)` in Cartesian and matrix form.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVelocity {
    pub phi_dot: Vec<Vec3>,
    pub rot_dot: Vec<Mat3>,
}

pub fn phase_velocity(u: &MobileFieldState, kin: &KinematicState) -> PhaseVelocity {
    PhaseVelocity {
        phi_dot: kin.rot.iter().zip(&u.v).map(|(r, v)| r * v).collect(),
        rot_dot: kin.rot.iter().zip(&u.omega).map(|(r, w)| r.matrix() * hat(w).matrix()).collect(),
    }
}

/// Kinetic metric `g(a, b) = ∫ ρA φ̇_a·φ̇_b + ⟪R hat(J R⁻¹Ṙ_a), Ṙ_b⟫`.
pub fn metric(rot: &[Rot3], a: &PhaseVelocity, b: &PhaseVelocity, m: &RigidityTensors, grid: &Grid) -> f64 {
    let rho_a = m.mass_per_length();
    grid.integrate((0..rot.len()).map(|j| {
        let r = rot[j].matrix();
        let w = vee(&skew_project(&(r.transpose() * a.rot_dot[j])));
        rho_a * a.phi_dot[j].dot(&b.phi_dot[j]) + frobenius_dense(&(r * hat(&m.j.apply(&w)).matrix()), &b.rot_dot[j])
    }))
}

/// Pairing of momenta with a tangent vector, `∫ p_φ·φ̇ + ⟪R hat(σ), Ṙ⟫`.
pub fn momentum_pairing(ps: &PhaseState, vel: &PhaseVelocity, grid: &Grid) -> f64 {
    grid.integrate((0..ps.len()).map(|j| {
        let p_r = ps.rot[j].matrix() * hat(&ps.sigma[j]).matrix();
        ps.p_phi[j].dot(&vel.phi_dot[j]) + frobenius_dense(&p_r, &vel.rot_dot[j])
    }))
}

/// Time derivative of a phase state; `omega` is `R⁻¹Ṙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRate {
    pub phi: Vec<Vec3>,
    pub p_phi: Vec<Vec3>,
    pub omega: Vec<Vec3>,
    pub sigma: Vec<Vec3>,
}

/// Hamilton's equations:
///
/// ```text
/// φ̇ = p_φ / ρA
/// ṗ_φ = R (N' + κ∧N)
/// R⁻¹Ṙ = J⁻¹σ
/// σ̇ = M' + κ∧M + (ε+d3)∧N − ω∧σ
/// ```
///
/// with `ṗ_φ = σ̇ = 0` at clamped ends.
pub fn hamilton_rhs(ps: &PhaseState, bc: &BoundarySpec, m: &RigidityTensors, grid: &Grid) -> Result<PhaseRate> {
    ps.validate(grid)?;
    let (eps, kappa) = strain_from_kinematics(&ps.kinematics(), grid)?;
    let normal: Vec<Vec3> = eps.iter().map(|e| m.g.apply(e)).collect();
    let moment: Vec<Vec3> = kappa.iter().map(|k| m.h.apply(k)).collect();
    let dn = d_ds(&normal, grid)?;
    let dm = d_ds(&moment, grid)?;
    let rho_a = m.mass_per_length();
    let n = ps.len();
    let mut rate = PhaseRate {
        phi: ps.p_phi.iter().map(|p| p / rho_a).collect(),
        p_phi: Vec::with_capacity(n),
        omega: ps.sigma.iter().map(|s| m.j.solve(s)).collect(),
        sigma: Vec::with_capacity(n),
    };
    for j in 0..n {
        let k = &kappa[j];
        rate.p_phi.push(ps.rot[j] * (dn[j] + k.cross(&normal[j])));
        rate.sigma.push(
            dm[j] + k.cross(&moment[j]) + (eps[j] + e3()).cross(&normal[j]) - rate.omega[j].cross(&ps.sigma[j]),
        );
    }
    for (j, end) in [(0, bc.end0), (n - 1, bc.end_l)] {
        if end == EndCondition::Clamped {
            rate.p_phi[j] = Vec3::zeros();
            rate.sigma[j] = Vec3::zeros();
        }
    }
    let finite = |f: &Vec<Vec3>| f.iter().all(|x| x.iter().all(|c| c.is_finite()));
    if !(finite(&rate.p_phi) && finite(&rate.sigma)) {
        return Err(BeamError::NumericFailure("Hamilton right-hand side"));
    }
    Ok(rate)
}

/// Pushes a phase rate through the tangent of [`inverse_legendre`], giving
/// `(v̇, ω̇, ε̇, κ̇)` of the mobile fields.
pub fn legendre_tangent(
    ps: &PhaseState,
    rate: &PhaseRate,
    m: &RigidityTensors,
    grid: &Grid,
) -> Result<MobileFieldState> {
    let (u, kin) = inverse_legendre(ps, m, grid)?;
    let rho_a = m.mass_per_length();
    let n = ps.len();
    let mats: Vec<Mat3> = kin.rot.iter().map(|r| *r.matrix()).collect();
    let rot_dot: Vec<Mat3> = mats.iter().zip(&rate.omega).map(|(r, w)| r * hat(w).matrix()).collect();
    let dphi = d_ds(&kin.phi, grid)?;
    let dphi_dot = d_ds(&rate.phi, grid)?;
    let drot = d_ds(&mats, grid)?;
    let drot_dot = d_ds(&rot_dot, grid)?;
    let mut out = MobileFieldState::zeros(n);
    for j in 0..n {
        let rt = mats[j].transpose();
        let w = &rate.omega[j];
        out.v[j] = rt * rate.p_phi[j] / rho_a - w.cross(&u.v[j]);
        out.omega[j] = m.j.solve(&rate.sigma[j]);
        out.eps[j] = rt * dphi_dot[j] - w.cross(&(rt * dphi[j]));
        out.kappa[j] = vee(&skew_project(&(rot_dot[j].transpose() * drot[j] + rt * drot_dot[j])));
    }
    Ok(out)
}

/// Scalar function of a phase state.
#[derive(Clone)]
pub struct Observable {
    name: String,
    eval: Arc<dyn Fn(&PhaseState) -> f64 + Send + Sync>,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable").field("name", &self.name).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseField {
    Phi,
    PPhi,
    Sigma,
}

impl Observable {
    pub fn new(name: impl Into<String>, eval: impl Fn(&PhaseState) -> f64 + Send + Sync + 'static) -> Self {
        Observable { name: name.into(), eval: Arc::new(eval) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, ps: &PhaseState) -> f64 {
        (self.eval)(ps)
    }

    /// Component `i` of a stored field at node `j`.
    pub fn sampler(field: PhaseField, j: usize, i: usize) -> Self {
        let name = format!("{field:?}[{j}].{i}");
        Observable::new(name, move |ps| match field {
            PhaseField::Phi => ps.phi[j][i],
            PhaseField::PPhi => ps.p_phi[j][i],
            PhaseField::Sigma => ps.sigma[j][i],
        })
    }

    /// Component `i` of the configuration strain (`kappa = false`) or
    /// curvature at node `j`.
    pub fn strain_sampler(kappa: bool, j: usize, i: usize, grid: Grid) -> Self {
        let name = format!("{}[{j}].{i}", if kappa { "kappa" } else { "eps" });
        Observable::new(name, move |ps| match strain_from_kinematics(&ps.kinematics(), &grid) {
            Ok((e, k)) => (if kappa { k } else { e })[j][i],
            Err(_) => f64::NAN,
        })
    }

    pub fn hamiltonian(m: RigidityTensors, grid: Grid) -> Self {
        Observable::new("H", move |ps| hamiltonian(ps, &m, &grid).unwrap_or(f64::NAN))
    }

    /// `a f + b g`
    pub fn combine(a: f64, f: &Observable, b: f64, g: &Observable) -> Self {
        let (f, g) = (f.clone(), g.clone());
        Observable::new(format!("{a}*{} + {b}*{}", f.name, g.name), move |ps| a * f.eval(ps) + b * g.eval(ps))
    }
}

/// Nodal functional gradients (density per unit length). `rot` is the
/// left-trivialized derivative along `R exp(h ê_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalGradient {
    pub phi: Vec<Vec3>,
    pub p_phi: Vec<Vec3>,
    pub rot: Vec<Vec3>,
    pub sigma: Vec<Vec3>,
}

/// Relative finite-difference step for functional gradients.
pub const H_FD: f64 = 1e-5;

fn field_mut(ps: &mut PhaseState, field: PhaseField) -> &mut Vec<Vec3> {
    match field {
        PhaseField::Phi => &mut ps.phi,
        PhaseField::PPhi => &mut ps.p_phi,
        PhaseField::Sigma => &mut ps.sigma,
    }
}

pub fn functional_gradient(f: &Observable, ps: &PhaseState, grid: &Grid) -> Result<FunctionalGradient> {
    ps.validate(grid)?;
    let n = ps.len();
    let mut work = ps.clone();
    // phi, p_phi and sigma slots of the gradient; rot is kept separately
    let mut grad_fields = PhaseState {
        phi: vec![Vec3::zeros(); n],
        p_phi: vec![Vec3::zeros(); n],
        rot: Vec::new(),
        sigma: vec![Vec3::zeros(); n],
    };
    let mut rot_grad = vec![Vec3::zeros(); n];
    for (j, slot) in rot_grad.iter_mut().enumerate() {
        let w = grid.weight(j);
        for i in 0..3 {
            for field in [PhaseField::Phi, PhaseField::PPhi, PhaseField::Sigma] {
                let x = field_mut(&mut work, field)[j][i];
                let h = H_FD * (1.0 + x.abs());
                field_mut(&mut work, field)[j][i] = x + h;
                let fp = f.eval(&work);
                field_mut(&mut work, field)[j][i] = x - h;
                let fm = f.eval(&work);
                field_mut(&mut work, field)[j][i] = x;
                field_mut(&mut grad_fields, field)[j][i] = (fp - fm) / (2.0 * h) / w;
            }
            let mut axis = Vec3::zeros();
            axis[i] = H_FD;
            let r = ps.rot[j];
            work.rot[j] = r * exp_so3(&axis);
            let fp = f.eval(&work);
            work.rot[j] = r * exp_so3(&-axis);
            let fm = f.eval(&work);
            work.rot[j] = r;
            slot[i] = (fp - fm) / (2.0 * H_FD) / w;
        }
    }
    let grad = FunctionalGradient {
        phi: grad_fields.phi,
        p_phi: grad_fields.p_phi,
        rot: rot_grad,
        sigma: grad_fields.sigma,
    };
    let all = [&grad.phi, &grad.p_phi, &grad.rot, &grad.sigma];
    if all.iter().any(|f| f.iter().any(|x| !x.iter().all(|c| c.is_finite()))) {
        return Err(BeamError::NumericFailure("functional gradient"));
    }
    Ok(grad)
}

/// The three parts of the trivialized bracket: canonical translation pairing,
/// rotation/spin pairing, and the Lie–Poisson term `-σ·(∂σf ∧ ∂σg)` from the
/// left trivialization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketTerms {
    pub canonical: f64,
    pub rotational: f64,
    pub lie_poisson: f64,
}

impl BracketTerms {
    pub fn total(&self) -> f64 {
        self.canonical + self.rotational + self.lie_poisson
    }
}

pub fn bracket_from_gradients(
    gf: &FunctionalGradient,
    gg: &FunctionalGradient,
    ps: &PhaseState,
    grid: &Grid,
) -> BracketTerms {
    let n = ps.len();
    let canonical = grid.integrate((0..n).map(|j| gf.phi[j].dot(&gg.p_phi[j]) - gg.phi[j].dot(&gf.p_phi[j])));
    let rotational = grid.integrate((0..n).map(|j| gf.rot[j].dot(&gg.sigma[j]) - gg.rot[j].dot(&gf.sigma[j])));
    let lie_poisson = -grid.integrate((0..n).map(|j| ps.sigma[j].dot(&gf.sigma[j].cross(&gg.sigma[j]))));
    BracketTerms { canonical, rotational, lie_poisson }
}

pub fn bracket_terms(f: &Observable, g: &Observable, ps: &PhaseState, grid: &Grid) -> Result<BracketTerms> {
    let gf = functional_gradient(f, ps, grid)?;
    let gg = functional_gradient(g, ps, grid)?;
    Ok(bracket_from_gradients(&gf, &gg, ps, grid))
}

pub fn bracket(f: &Observable, g: &Observable, ps: &PhaseState, grid: &Grid) -> Result<f64> {
    Ok(bracket_terms(f, g, ps, grid)?.total())
}

/// Variation field `(δφ, δθ)(S, t) = b(t) a(S) (c, d)` with `sin⁴` bumps in
/// time over the whole record and in `S` over an interior window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Variation {
    pub window: (f64, f64),
    pub span: (f64, f64),
    pub c: Vec3,
    pub d: Vec3,
}

impl Variation {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, grid: &Grid, span: (f64, f64)) -> Self {
        let l = grid.length();
        let s0 = rng.random_range(0.1..0.4) * l;
        let s1 = s0 + rng.random_range(0.3..0.5) * l;
        let mut unit = || Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        Variation { window: (s0, s1), span, c: unit(), d: unit() }
    }

    fn space(&self, s: f64) -> f64 {
        let (a, b) = self.window;
        if s <= a || s >= b {
            0.0
        } else {
            (std::f64::consts::PI * (s - a) / (b - a)).sin().powi(4)
        }
    }

    /// `(b(t), ḃ(t))`
    fn time(&self, t: f64) -> (f64, f64) {
        let (t0, t1) = self.span;
        let w = std::f64::consts::PI / (t1 - t0);
        let x = w * (t - t0);
        let (sn, cs) = x.sin_cos();
        (sn.powi(4), 4.0 * sn.powi(3) * cs * w)
    }
}

fn varied_lagrangian(
    snap: &Snapshot,
    base_strain: &(Vec<Vec3>, Vec<Vec3>),
    var: &Variation,
    s: f64,
    m: &RigidityTensors,
    grid: &Grid,
) -> Result<f64> {
    let (b, b_dot) = var.time(snap.t);
    let n = grid.n_nodes();
    let mut u = snap.u.clone();
    let mut kin = snap.kin.clone();
    for j in 0..n {
        let a = var.space(grid.node(j));
        if a == 0.0 || b == 0.0 {
            continue;
        }
        let dphi = var.c * (s * a * b);
        let dtheta = var.d * (s * a * b);
        let dphi_dot = var.c * (s * a * b_dot);
        let dtheta_dot = var.d * (s * a * b_dot);
        let e = exp_so3(&dtheta);
        let r = snap.kin.rot[j];
        let rs = r * e;
        u.v[j] = rs.transpose() * (r * snap.u.v[j] + dphi_dot);
        u.omega[j] = e.transpose() * snap.u.omega[j] + right_jacobian(&dtheta) * dtheta_dot;
        kin.phi[j] += dphi;
        kin.rot[j] = rs;
    }
    let (eps, kappa) = strain_from_kinematics(&kin, grid)?;
    for j in 0..n {
        u.eps[j] += eps[j] - base_strain.0[j];
        u.kappa[j] += kappa[j] - base_strain.1[j];
    }
    Ok(field_lagrangian(&u, m, grid))
}

/// Time-trapezoid action of the variation at parameter `s`.
fn varied_action(
    snaps: &[Snapshot],
    strains: &[(Vec<Vec3>, Vec<Vec3>)],
    var: &Variation,
    s: f64,
    m: &RigidityTensors,
    grid: &Grid,
) -> Result<f64> {
    let mut total = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (snap, strain) in snaps.iter().zip(strains) {
        let l = varied_lagrangian(snap, strain, var, s, m, grid)?;
        if let Some((t0, l0)) = prev {
            total += 0.5 * (snap.t - t0) * (l + l0);
        }
        prev = Some((snap.t, l));
    }
    Ok(total)
}

/// Step of the four-point central difference in the variation parameter.
pub const ACTION_FD_STEP: f64 = 1e-3;

/// Directional derivative of the discrete action along one variation.
pub fn action_derivative(snaps: &[Snapshot], var: &Variation, m: &RigidityTensors, grid: &Grid) -> Result<f64> {
    let strains = snaps
        .iter()
        .map(|s| strain_from_kinematics(&s.kin, grid))
        .collect::<Result<Vec<_>>>()?;
    let h = ACTION_FD_STEP;
    let a = |s: f64| varied_action(snaps, &strains, var, s, m, grid);
    Ok((8.0 * (a(h)? - a(-h)?) - (a(2.0 * h)? - a(-2.0 * h)?)) / (12.0 * h))
}

/// Largest `|δS|` over `n_variations` random admissible variations of a
/// recorded trajectory.
pub fn action_stationarity<R: Rng + ?Sized>(
    snaps: &[Snapshot],
    m: &RigidityTensors,
    grid: &Grid,
    n_variations: usize,
    rng: &mut R,
) -> Result<f64> {
    if snaps.len() < 2 {
        return Err(BeamError::Config("action needs at least two snapshots".into()));
    }
    let span = (snaps[0].t, snaps[snaps.len() - 1].t);
    let mut worst = 0.0f64;
    for _ in 0..n_variations {
        let var = Variation::random(rng, grid, span);
        worst = worst.max(action_derivative(snaps, &var, m, grid)?.abs());
    }
    Ok(worst)
}
