//! Total energy, boundary power and the conservation ledger.

use crate::dynamics::Snapshot;
use crate::material::{kinetic_energy_density, strain_energy_density, RigidityTensors};
use crate::state::{Grid, MobileFieldState};

/// One ledger line; `drift = total - total(0) - cumulative_flux_integral`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyLedgerRow {
    pub t: f64,
    pub kinetic: f64,
    pub strain: f64,
    pub total: f64,
    pub boundary_flux: f64,
    pub cumulative_flux_integral: f64,
    pub drift: f64,
}

pub const LEDGER_COLUMNS: [&str; 7] =
    ["t", "kinetic", "strain", "total", "boundary_flux", "cumulative_flux_integral", "drift"];

impl EnergyLedgerRow {
    pub fn values(&self) -> [f64; 7] {
        [
            self.t,
            self.kinetic,
            self.strain,
            self.total,
            self.boundary_flux,
            self.cumulative_flux_integral,
            self.drift,
        ]
    }
}

/// Trapezoid quadrature of the kinetic and strain densities.
pub fn total_energy(u: &MobileFieldState, m: &RigidityTensors, grid: &Grid) -> (f64, f64) {
    let kinetic = grid.integrate(u.v.iter().zip(&u.omega).map(|(v, w)| kinetic_energy_density(v, w, m)));
    let strain = grid.integrate(u.eps.iter().zip(&u.kappa).map(|(e, k)| strain_energy_density(e, k, m)));
    (kinetic, strain)
}

/// `[v·Gε + ω·Hκ]` at `S = L` minus the same at `S = 0`.
pub fn boundary_flux(u: &MobileFieldState, m: &RigidityTensors) -> f64 {
    let power = |j: usize| u.v[j].dot(&m.g.apply(&u.eps[j])) + u.omega[j].dot(&m.h.apply(&u.kappa[j]));
    power(u.len() - 1) - power(0)
}

/// Ledger rows in time order; the flux is integrated with the trapezoid rule
/// over the snapshot times.
pub fn energy_report(snapshots: &[Snapshot], m: &RigidityTensors, grid: &Grid) -> Vec<EnergyLedgerRow> {
    let mut rows: Vec<EnergyLedgerRow> = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let (kinetic, strain) = total_energy(&s.u, m, grid);
        let total = kinetic + strain;
        let flux = boundary_flux(&s.u, m);
        let (cumulative, total0) = match rows.last() {
            Some(prev) => (
                prev.cumulative_flux_integral + 0.5 * (s.t - prev.t) * (flux + prev.boundary_flux),
                rows[0].total,
            ),
            None => (0.0, total),
        };
        rows.push(EnergyLedgerRow {
            t: s.t,
            kinetic,
            strain,
            total,
            boundary_flux: flux,
            cumulative_flux_integral: cumulative,
            drift: total - total0 - cumulative,
        });
    }
    rows
}

/// Largest `|drift|` of a ledger.
pub fn max_drift(rows: &[EnergyLedgerRow]) -> f64 {
    rows.iter().map(|r| r.drift.abs()).fold(0.0, f64::max)
}
