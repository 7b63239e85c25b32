//! Recovery of placement and frames from the mobile fields, in time (co-advanced
//! with the dynamics) and in space (marching from data at `S = 0`).

use crate::error::Result;
use crate::so3::{e3, exp_so3, hat, Mat3, Rot3, Vec3};
use crate::state::{strain_from_kinematics, Grid, KinematicState, MobileFieldState};

/// Multiplicative frame update `R ← R exp(dt ω)` and `φ ← φ + dt R v`.
pub fn update_kinematics(kin: &KinematicState, v: &[Vec3], omega: &[Vec3], dt: f64) -> KinematicState {
    let phi = kin.phi.iter().zip(&kin.rot).zip(v).map(|((p, r), v)| p + r * v * dt).collect();
    let rot = kin
        .rot
        .iter()
        .zip(omega)
        .map(|(r, w)| (*r * exp_so3(&(w * dt))).renormalized())
        .collect();
    KinematicState { phi, rot }
}

/// Integrates `R' = R hat(κ)`, `φ' = R(ε + e3)` from `(phi0, r0)` at `S = 0`
/// with classical RK4, interpolating the strains linearly at half steps.
pub fn reconstruct_space(
    phi0: Vec3,
    r0: Rot3,
    eps: &[Vec3],
    kappa: &[Vec3],
    grid: &Grid,
) -> Result<KinematicState> {
    grid.check_len(eps.len())?;
    grid.check_len(kappa.len())?;
    let n = grid.n_nodes();
    let h = grid.ds();
    let f = |r: &Mat3, e: &Vec3, k: &Vec3| (r * hat(k).matrix(), r * (e + e3()));

    let mut phi = Vec::with_capacity(n);
    let mut rot = Vec::with_capacity(n);
    phi.push(phi0);
    rot.push(r0);
    let (mut p, mut r) = (phi0, *r0.matrix());
    for j in 0..n - 1 {
        let (e_a, e_b) = (eps[j], eps[j + 1]);
        let (k_a, k_b) = (kappa[j], kappa[j + 1]);
        let (e_m, k_m) = ((e_a + e_b) * 0.5, (k_a + k_b) * 0.5);

        let (dr1, dp1) = f(&r, &e_a, &k_a);
        let (dr2, dp2) = f(&(r + dr1 * (0.5 * h)), &e_m, &k_m);
        let (dr3, dp3) = f(&(r + dr2 * (0.5 * h)), &e_m, &k_m);
        let (dr4, dp4) = f(&(r + dr3 * h), &e_b, &k_b);
        r += (dr1 + dr2 * 2.0 + dr3 * 2.0 + dr4) * (h / 6.0);
        p += (dp1 + dp2 * 2.0 + dp3 * 2.0 + dp4) * (h / 6.0);

        let frame = Rot3::from_matrix_unchecked(r).orthonormalize();
        r = *frame.matrix();
        phi.push(p);
        rot.push(frame);
    }
    Ok(KinematicState { phi, rot })
}

/// Max-norm mismatch between evolved strains and the strains of the
/// co-advanced configuration.
pub fn closure_residuals(u: &MobileFieldState, kin: &KinematicState, grid: &Grid) -> Result<(f64, f64)> {
    grid.check_len(u.len())?;
    let (eps, kappa) = strain_from_kinematics(kin, grid)?;
    let dist = |a: &[Vec3], b: &[Vec3]| a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max);
    Ok((dist(&eps, &u.eps), dist(&kappa, &u.kappa)))
}
