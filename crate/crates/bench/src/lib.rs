//! Fixtures shared by the solver benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use timoshenko_core::experiments::{random_admissible_state, StateScale};
use timoshenko_core::hamiltonian::{legendre, PhaseState};
use timoshenko_core::{BoundarySpec, Grid, KinematicState, MaterialParams, MobileFieldState, Model};

/// Clamped-free default beam with a smooth, compatible random state.
pub fn fixture(n_nodes: usize) -> (Model, MobileFieldState, KinematicState) {
    let p = MaterialParams::default();
    let grid = Grid::new(n_nodes, p.length).expect("at least three nodes");
    let model = Model::new(grid, p.tensors(), BoundarySpec::default());
    let mut rng = ChaCha8Rng::seed_from_u64(n_nodes as u64);
    let (u, kin) = random_admissible_state(&mut rng, &grid, &model.bc, StateScale::MODERATE).expect("valid state");
    (model, u, kin)
}

pub fn phase_fixture(n_nodes: usize) -> (Model, PhaseState) {
    let (model, u, kin) = fixture(n_nodes);
    let ps = legendre(&u, &kin, &model.tensors);
    (model, ps)
}
