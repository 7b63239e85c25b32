//! Geometrically exact Timoshenko beam dynamics in mobile-frame form.
//!
//! The beam is described by per-node velocity `v`, spin `ω`, strain `ε` and
//! curvature `κ` in director components, advanced by an explicit method of
//! lines; placement and frames are co-advanced on `SO(3)`.

pub mod config;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod init;
pub mod kinematics;
pub mod material;
pub mod output;
pub mod so3;
pub mod state;
pub mod statics;

pub use config::SimConfig;
pub use dynamics::{
    rhs_mobile, simulate, step_rk4, BoundarySpec, EndCondition, Model, Snapshot, Subspace, Trajectory,
};
pub use energy::{boundary_flux, energy_report, total_energy, EnergyLedgerRow};
pub use error::{BeamError, Result};
pub use init::InitSpec;
pub use kinematics::{closure_residuals, reconstruct_space, update_kinematics};
pub use material::{MaterialParams, RigidityTensors};
pub use so3::{exp_so3, hat, vee, Rot3, Skew3, Vec3};
pub use state::{d_ds, strain_from_kinematics, Grid, KinematicState, MobileFieldState};
pub use statics::{preset, rigid_euler, static_ivp, static_shoot, StaticBVPSpec, TipTarget};
