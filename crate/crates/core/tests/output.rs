use timoshenko_core::output::{trajectory_header, write_run};
use timoshenko_core::{preset, simulate, Rot3, SimConfig};

#[test]
fn run_files_have_expected_layout() {
    let dir = tempfile::tempdir().unwrap();
    let traj = simulate(&preset("planar23").unwrap()).unwrap();
    write_run(dir.path(), &traj).unwrap();

    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), trajectory_header().join(","));
    let n = traj.model.grid.n_nodes();
    assert_eq!(lines.clone().count(), n * traj.snapshots.len());
    for line in lines {
        let row: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(row.len(), 21);
        let q = [row[17], row[18], row[19], row[20]];
        assert!(q[0] >= 0.0);
        let norm: f64 = q.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-14);
    }

    let last = traj.last();
    let tail: Vec<f64> = text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    let r = Rot3::from_quaternion([tail[17], tail[18], tail[19], tail[20]]);
    assert!((r.matrix() - last.kin.rot[n - 1].matrix()).amax() < 1e-15);
    assert_eq!(tail[0], last.t);
    assert_eq!(tail[14], last.kin.phi[n - 1].x);

    let energy = std::fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    assert_eq!(
        energy.lines().next().unwrap(),
        "t,kinetic,strain,total,boundary_flux,cumulative_flux_integral,drift"
    );
    assert_eq!(energy.lines().count(), traj.ledger.len() + 1);
    let closure = std::fs::read_to_string(dir.path().join("closure.csv")).unwrap();
    assert_eq!(closure.lines().next().unwrap(), "t,r_eps,r_kappa");
}

#[test]
fn identical_configs_give_identical_bytes() {
    let cfg = SimConfig::from_toml_str(&preset("planar13").unwrap().to_toml_string()).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_run(a.path(), &simulate(&cfg).unwrap()).unwrap();
    write_run(b.path(), &simulate(&cfg).unwrap()).unwrap();
    for file in ["trajectory.csv", "energy.csv", "closure.csv"] {
        assert_eq!(std::fs::read(a.path().join(file)).unwrap(), std::fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn config_files_reject_misspelled_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    let text = preset("rigid").unwrap().to_toml_string().replace("t_end", "t_ned");
    std::fs::write(&path, text).unwrap();
    let err = SimConfig::load(&path).unwrap_err().to_string();
    assert!(err.contains("t_ned"), "{err}");
}
