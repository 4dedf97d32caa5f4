use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fsi_bem::output::read_trace_csv;
use tempfile::TempDir;

const UNIT: &str = "geometry.radius = 1.0
geometry.elements = 32
material.lambda = 1.0
material.mu = 2.0
material.rho = 1.0
material.rho_f = 0.5
material.c = 1.0
material.omega = 6.0
incident.direction = [1.0, 0.0]
";

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn config(&self, text: &str) -> PathBuf {
        let p = self.dir.path().join("scenario.toml");
        std::fs::write(&p, text).unwrap();
        p
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn exec(&self, args: &[&str], config: &Path, out: &Path) -> Output {
        Command::new(env!("CARGO_BIN_EXE_fsi-bem"))
            .args(args)
            .arg("--config")
            .arg(config)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap()
    }
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn invalid_material_names_the_field() {
    let r = Run::new();
    let cfg = r.config(&UNIT.replace("material.mu = 2.0", "material.mu = -1.0"));
    let o = r.exec(&["solve"], &cfg, &r.out("t.csv"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mu"), "{}", stderr(&o));
}

#[test]
fn two_material_parameterisations_are_refused() {
    let r = Run::new();
    let cfg = r.config(&format!("{UNIT}material.c_s = 2.0\nmaterial.c_p = 3.0\n"));
    let o = r.exec(&["solve"], &cfg, &r.out("t.csv"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("material"));
}

#[test]
fn bad_sweep_grids_and_empty_lists_are_input_errors() {
    let r = Run::new();
    let cfg = r.config(UNIT);
    let out = r.out("s.csv");
    for args in [
        &["sweep", "--omega-range", "5,6", "--step", "0"][..],
        &["sweep", "--omega-range", "5,6", "--step", "-0.1"][..],
        &["sweep", "--omega-range", "6,5"][..],
        &["convergence", "--n-list", ""][..],
    ] {
        let o = r.exec(args, &cfg, &out);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn resonant_oracle_exits_with_three() {
    let r = Run::new();
    let cfg = r.config(&UNIT.replace("material.omega = 6.0", "material.omega = 7.2629"));
    let o = r.exec(&["oracle"], &cfg, &r.out("o.csv"));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("7.2629"));
}

#[test]
fn solve_writes_traces_and_metadata_deterministically() {
    let r = Run::new();
    let cfg = r.config(UNIT);
    let (a, b) = (r.out("a.csv"), r.out("b.csv"));
    assert!(r.exec(&["solve"], &cfg, &a).status.success());
    assert!(r.exec(&["solve"], &cfg, &b).status.success());
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("# fsi-bem v"));
    assert_eq!(read_trace_csv(&text).unwrap().len(), 32);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let meta: toml::Table = std::fs::read_to_string(r.out("a.meta.toml")).unwrap().parse().unwrap();
    assert!(meta["relative_residual"].as_float().unwrap() < 1e-10);
}

#[test]
fn oracle_traces_round_trip() {
    let r = Run::new();
    let cfg = r.config(UNIT);
    let out = r.out("o.csv");
    assert!(r.exec(&["oracle"], &cfg, &out).status.success());
    let rows = read_trace_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 32);
    let modes = std::fs::read_to_string(r.out("o.modes.csv")).unwrap();
    assert!(modes.lines().nth(1).unwrap().starts_with("n,re_A"));
}

#[test]
fn indirect_sweep_expects_only_the_jones_dip() {
    let r = Run::new();
    let cfg = r.config(&UNIT.replace("geometry.elements = 32", "geometry.elements = 16"));
    let out = r.out("s.csv");
    let o = r.exec(&["sweep", "--formulation", "indirect", "--omega-range", "6.3,6.5", "--step", "0.1"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let sweep = std::fs::read_to_string(&out).unwrap();
    assert_eq!(sweep.lines().count(), 2 + 3);
    let reference = std::fs::read_to_string(r.out("s.reference.csv")).unwrap();
    let neumann: Vec<&str> = reference.lines().filter(|l| l.starts_with("neumann")).collect();
    assert!(!neumann.is_empty());
    assert!(neumann.iter().all(|l| l.ends_with("false")), "{reference}");
}
