//! Property suites behind `timoshenko verify`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use timoshenko_core::experiments::{
    bending_pluck_run, bracket_checks, hamilton_mismatch, max_closure, perturb_mid_run, random_admissible_state,
    relative_drift, StateScale,
};
use timoshenko_core::hamiltonian::{
    action_stationarity, bracket, bracket_from_gradients, functional_gradient, legendre, Observable, PhaseField,
};
use timoshenko_core::output::fmt_real;
use timoshenko_core::so3::{frobenius, Mat3};
use timoshenko_core::{exp_so3, hat, rhs_mobile, vee, BeamError, BoundarySpec, Grid, MaterialParams, Result, Vec3};

/// Grid of the bracket suite; the sampler residual is O(ds²).
pub const BRACKET_NODES: usize = 61;

pub const SUITES: [&str; 6] = ["so3", "energy", "hamilton-equivalence", "bracket", "action", "closure"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Report,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: Bound,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, bound: Bound) -> Self {
        Check { name: name.into(), measured, bound }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost(b) => self.measured <= b,
            Bound::AtLeast(b) => self.measured >= b,
            Bound::Report => true,
        }
    }

    fn relation(&self) -> (&'static str, String) {
        match self.bound {
            Bound::AtMost(b) => ("<=", fmt_real(b)),
            Bound::AtLeast(b) => (">=", fmt_real(b)),
            Bound::Report => ("report", String::new()),
        }
    }
}

fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    Vec3::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale), rng.random_range(-scale..scale))
}

fn so3(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let (mut inverse, mut morphism, mut isometry, mut orth, mut group_inv) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (a, b) = (random_vec(rng, 1.0), random_vec(rng, 1.0));
        inverse = inverse.max((vee(&hat(&a)) - a).amax());
        morphism = morphism.max((vee(&hat(&a).commutator(&hat(&b))) - a.cross(&b)).amax());
        isometry = isometry.max((frobenius(&hat(&a), &hat(&b)) - a.dot(&b)).abs());
        let w = random_vec(rng, 1.0).normalize() * rng.random_range(0.0..10.0);
        let r = *exp_so3(&w).matrix();
        orth = orth.max((r.transpose() * r - Mat3::identity()).amax()).max((r.determinant() - 1.0).abs());
        group_inv = group_inv.max((r * exp_so3(&-w).matrix() - Mat3::identity()).amax());
    }
    let (a, b) = (random_vec(rng, 1.0), random_vec(rng, 1.0));
    let spin = |s: f64| exp_so3(&(b * s)).matrix().transpose() * a;
    let hs = [1e-2, 1e-3, 1e-4];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| ((spin(0.4 + h) - spin(0.4 - h)) / (2.0 * h) - spin(0.4).cross(&b)).amax())
        .collect();
    let slope = (errs[0] / errs[2]).log10() / 2.0;
    vec![
        Check::new("hat_vee_inverse", inverse, Bound::AtMost(0.0)),
        Check::new("lie_morphism", morphism, Bound::AtMost(1e-14)),
        Check::new("isometry", isometry, Bound::AtMost(1e-14)),
        Check::new("exp_orthonormality", orth, Bound::AtMost(1e-12)),
        Check::new("exp_group_inverse", group_inv, Bound::AtMost(1e-14)),
        Check::new("perturbation_slope_error", (slope - 2.0).abs(), Bound::AtMost(0.3)),
    ]
}

fn energy() -> Result<Vec<Check>> {
    let (coarse, fine) = (bending_pluck_run(101)?, bending_pluck_run(201)?);
    let (d0, d1) = (relative_drift(&coarse), relative_drift(&fine));
    let parts = coarse
        .ledger
        .iter()
        .chain(&fine.ledger)
        .map(|r| (r.kinetic + r.strain - r.total).abs() + (-r.kinetic).max(0.0) + (-r.strain).max(0.0))
        .fold(0.0, f64::max);
    Ok(vec![
        Check::new("relative_drift_n101", d0, Bound::Report),
        Check::new("relative_drift_n201", d1, Bound::Report),
        Check::new("drift_order", (d0 / d1).log2(), Bound::AtLeast(1.5)),
        Check::new("ledger_parts", parts, Bound::AtMost(1e-15)),
    ])
}

fn defaults(n_nodes: usize) -> (MaterialParams, Grid, BoundarySpec) {
    let p = MaterialParams::default();
    (p, Grid::new(n_nodes, p.length).expect("valid grid"), BoundarySpec::default())
}

fn hamilton(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let (p, grid, bc) = defaults(31);
    let m = p.tensors();
    let (mut rates, mut strains) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let (u, kin) = random_admissible_state(rng, &grid, &bc, StateScale::LARGE)?;
        let (r, s) = hamilton_mismatch(&u, &kin, &bc, &m, &grid)?;
        rates = rates.max(r);
        strains = strains.max(s);
    }
    Ok(vec![
        Check::new("rate_rows", rates, Bound::AtMost(1e-10)),
        Check::new("strain_rows", strains, Bound::Report),
    ])
}

fn brackets(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let (p, grid, bc) = defaults(BRACKET_NODES);
    let m = p.tensors();
    let (u, kin) = random_admissible_state(rng, &grid, &bc, StateScale::MODERATE)?;
    let ps = legendre(&u, &kin, &m);
    let mut out: Vec<Check> = bracket_checks(rng, &ps, &bc, &m, &grid, 5)?
        .into_iter()
        .map(|c| Check::new(format!("sampler_{}", c.name), c.error(), Bound::AtMost(1e-6)))
        .collect();
    let h = Observable::hamiltonian(m, grid);
    let gh = functional_gradient(&h, &ps, &grid)?;
    let mut asym = 0.0f64;
    for field in [PhaseField::Phi, PhaseField::PPhi, PhaseField::Sigma] {
        let gf = functional_gradient(&Observable::sampler(field, grid.n_nodes() / 2, 1), &ps, &grid)?;
        let sum = bracket_from_gradients(&gf, &gh, &ps, &grid).total() + bracket_from_gradients(&gh, &gf, &ps, &grid).total();
        asym = asym.max(sum.abs());
    }
    out.push(Check::new("antisymmetry", asym, Bound::AtMost(0.0)));
    out.push(Check::new("self_bracket_of_h", bracket(&h, &h, &ps, &grid)?.abs(), Bound::AtMost(0.0)));
    Ok(out)
}

fn action(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let run = bending_pluck_run(201)?;
    let (m, grid) = (run.model.tensors, run.model.grid);
    let seed = rng.random::<u64>();
    let residual = action_stationarity(&run.snapshots, &m, &grid, 10, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let perturbed =
        action_stationarity(&perturb_mid_run(&run.snapshots, 0.1), &m, &grid, 10, &mut ChaCha8Rng::seed_from_u64(seed))?;
    Ok(vec![
        Check::new("solution_residual", residual, Bound::Report),
        Check::new("perturbed_residual", perturbed, Bound::Report),
        Check::new("residual_ratio", residual / perturbed, Bound::AtMost(1e-3)),
    ])
}

fn closure(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let runs = [bending_pluck_run(101)?, bending_pluck_run(201)?, bending_pluck_run(401)?];
    let c: Vec<f64> = runs.iter().map(max_closure).collect();
    let mut out = vec![
        Check::new("max_residual_n101", c[0], Bound::Report),
        Check::new("order_101_201", (c[0] / c[1]).log2(), Bound::AtLeast(1.5)),
        Check::new("order_201_401", (c[1] / c[2]).log2(), Bound::AtLeast(1.5)),
    ];

    // {ε, H} and {κ, H} against the strain rows of the mobile system, reported only.
    let (p, grid, bc) = defaults(31);
    let m = p.tensors();
    let (u, kin) = random_admissible_state(rng, &grid, &bc, StateScale::MODERATE)?;
    let ps = legendre(&u, &kin, &m);
    let rate = rhs_mobile(&u, &bc, &m, &grid)?;
    let h = Observable::hamiltonian(m, grid);
    for (kappa, label) in [(false, "eps"), (true, "kappa")] {
        let mut worst = 0.0f64;
        for j in [grid.n_nodes() / 3, grid.n_nodes() / 2] {
            for i in 0..3 {
                let f = Observable::strain_sampler(kappa, j, i, grid);
                let expected = if kappa { rate.kappa[j][i] } else { rate.eps[j][i] };
                worst = worst.max((bracket(&f, &h, &ps, &grid)? - expected).abs());
            }
        }
        out.push(Check::new(format!("bracket_{label}_h_vs_rate"), worst, Bound::Report));
    }
    Ok(out)
}

fn suite(name: &str, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    match name {
        "so3" => Ok(so3(rng)),
        "energy" => energy(),
        "hamilton-equivalence" => hamilton(rng),
        "bracket" => brackets(rng),
        "action" => action(rng),
        "closure" => closure(rng),
        other => Err(BeamError::Config(format!("unknown suite `{other}`; expected one of {} or all", SUITES.join(", ")))),
    }
}

fn write_report(dir: &Path, name: &str, checks: &[Check]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(dir.join(format!("verify_{name}.csv")))?;
    w.write_record(["check", "measured", "relation", "bound", "pass"])?;
    for c in checks {
        let (rel, bound) = c.relation();
        w.write_record([c.name.as_str(), &fmt_real(c.measured), rel, &bound, if c.passed() { "true" } else { "false" }])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs one suite or all of them; `Ok(false)` when any bounded check fails.
pub fn run(name: &str, seed: u64, out: Option<&Path>) -> Result<bool> {
    let names: Vec<&str> = if name == "all" { SUITES.to_vec() } else { vec![name] };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all_ok = true;
    for n in names {
        let checks = suite(n, &mut rng)?;
        for c in &checks {
            let (rel, bound) = c.relation();
            let status = match (c.bound, c.passed()) {
                (Bound::Report, _) => "INFO",
                (_, true) => "PASS",
                (_, false) => "FAIL",
            };
            println!("{n}/{} {status} {} {rel} {bound}", c.name, fmt_real(c.measured));
        }
        all_ok &= checks.iter().all(Check::passed);
        if let Some(dir) = out {
            write_report(dir, n, &checks)?;
        }
    }
    Ok(all_ok)
}
