use std::fs::File;
use std::path::{Path, PathBuf};

use timoshenko_core::config::StaticMode;
use timoshenko_core::experiments::{precession_rate, rigid_comparison_for};
use timoshenko_core::output::{fmt_real, write_run, write_table};
use timoshenko_core::statics::PRESET_NAMES;
use timoshenko_core::{
    reconstruct_space, simulate as run_dynamics, static_ivp, static_shoot, BeamError, InitSpec, Result, Rot3,
    SimConfig, Vec3,
};

/// A readable file is a config; otherwise the argument must name a preset.
pub fn load(arg: &str) -> Result<SimConfig> {
    let path = Path::new(arg);
    if path.is_file() {
        return SimConfig::load(path);
    }
    if PRESET_NAMES.contains(&arg) {
        return timoshenko_core::preset(arg);
    }
    Err(BeamError::Io(std::io::Error::new(
        std::io::ErrorKind::NotFound,
        format!("`{arg}` is neither a config file nor a preset ({})", PRESET_NAMES.join(", ")),
    )))
}

pub fn out_dir(cli: Option<&Path>, cfg: Option<&SimConfig>) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| cfg.and_then(|c| c.output.directory.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

pub fn simulate(arg: &str, out: Option<&Path>) -> Result<bool> {
    let cfg = load(arg)?;
    let dir = out_dir(out, Some(&cfg));
    let traj = run_dynamics(&cfg)?;
    write_run(&dir, &traj)?;
    let last = traj.ledger.last().expect("ledger has the initial row");
    println!(
        "simulate: {} snapshots, dt {}, final drift {} -> {}",
        traj.snapshots.len(),
        fmt_real(traj.dt),
        fmt_real(last.drift),
        dir.display()
    );
    Ok(true)
}

pub fn statics(arg: &str, out: Option<&Path>) -> Result<bool> {
    let cfg = load(arg)?;
    let dir = out_dir(out, Some(&cfg));
    let grid = cfg.grid()?;
    let m = cfg.model()?.tensors;

    let (eps0, kappa0, residual, iterations, profiles) = match (&cfg.statics, &cfg.init) {
        (Some(s), _) if s.mode == StaticMode::Shoot => {
            let sol = static_shoot(&s.bvp()?, &m, &grid)?;
            (sol.eps0, sol.kappa0, sol.residual, sol.iterations, (sol.eps, sol.kappa))
        }
        (Some(s), _) => {
            let (e0, k0) = (Vec3::from(s.eps0), Vec3::from(s.kappa0));
            (e0, k0, 0.0, 0, static_ivp(&e0, &k0, &m, &grid)?)
        }
        (None, InitSpec::StaticInject { eps0, kappa0 }) => {
            let (e0, k0) = (Vec3::from(*eps0), Vec3::from(*kappa0));
            (e0, k0, 0.0, 0, static_ivp(&e0, &k0, &m, &grid)?)
        }
        _ => {
            return Err(BeamError::InvalidKey {
                key: "static".into(),
                reason: "needs a [static] section or a `static_inject` initial condition".into(),
            })
        }
    };
    let (eps, kappa) = profiles;
    let kin = reconstruct_space(Vec3::zeros(), Rot3::identity(), &eps, &kappa, &grid)?;

    std::fs::create_dir_all(&dir)?;
    let header = [
        "S", "e1", "e2", "e3", "k1", "k2", "k3", "n1", "n2", "n3", "m1", "m2", "m3", "phi_x", "phi_y", "phi_z", "qw",
        "qx", "qy", "qz",
    ];
    let rows = (0..grid.n_nodes()).map(|j| {
        let mut row = vec![grid.node(j)];
        row.extend(eps[j].iter().chain(kappa[j].iter()));
        row.extend(m.g.apply(&eps[j]).iter());
        row.extend(m.h.apply(&kappa[j]).iter());
        row.extend(kin.phi[j].iter());
        row.extend(kin.rot[j].to_quaternion());
        row
    });
    write_table(File::create(dir.join("static.csv"))?, &header, rows)?;

    let summary = ["e1_0", "e2_0", "e3_0", "k1_0", "k2_0", "k3_0", "tip_residual", "iterations"];
    let mut row: Vec<f64> = eps0.iter().chain(kappa0.iter()).copied().collect();
    row.extend([residual, iterations as f64]);
    write_table(File::create(dir.join("static_summary.csv"))?, &summary, [row])?;
    println!("static: {} nodes, tip residual {} -> {}", grid.n_nodes(), fmt_real(residual), dir.display());
    Ok(true)
}

/// Angular frequency of `ω1` from its sign changes.
fn crossing_frequency(samples: &[(f64, Vec3, Vec3)]) -> Option<f64> {
    let signal: Vec<(f64, f64)> = samples.iter().map(|(t, w, _)| (*t, w.x)).collect();
    timoshenko_core::experiments::zero_crossing_frequency(&signal)
}

pub fn rigid(arg: &str, out: Option<&Path>) -> Result<bool> {
    let cfg = load(arg)?;
    let dir = out_dir(out, Some(&cfg));
    let stride = cfg.time()?.output_stride;
    let samples = rigid_comparison_for(&cfg, stride)?;

    std::fs::create_dir_all(&dir)?;
    let header = ["t", "w1", "w2", "w3", "w1_ref", "w2_ref", "w3_ref", "max_abs_err"];
    let rows = samples.iter().map(|(t, w, r)| {
        let mut row = vec![*t];
        row.extend(w.iter().chain(r.iter()));
        row.push((w - r).amax());
        row
    });
    write_table(File::create(dir.join("rigid.csv"))?, &header, rows)?;

    let InitSpec::RigidSpin { omega } = cfg.init else { unreachable!("checked by the comparison") };
    let expected = precession_rate(&cfg.material, omega[2]).unwrap_or(f64::NAN);
    let measured = crossing_frequency(&samples).unwrap_or(f64::NAN);
    let rel = (measured - expected).abs() / expected.abs();
    let max_err = samples.iter().map(|(_, w, r)| (w - r).amax()).fold(0.0, f64::max);
    write_table(
        File::create(dir.join("rigid_summary.csv"))?,
        &["measured_frequency", "expected_frequency", "frequency_rel_error", "max_abs_err"],
        [vec![measured, expected, rel, max_err]],
    )?;
    println!(
        "rigid: precession {} vs {} (rel {}), max |w - w_ref| {} -> {}",
        fmt_real(measured),
        fmt_real(expected),
        fmt_real(rel),
        fmt_real(max_err),
        dir.display()
    );
    Ok(true)
}
