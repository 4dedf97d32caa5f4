//! `fsi-bem`: solve, convergence, sweep and oracle runs from a scenario file.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 resonance or
//! near-singular system.

mod config;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fsi_bem::fields::convergence_study_multi;
use fsi_bem::mesh::build_circle_mesh;
use fsi_bem::oracle::{find_jones_frequencies, neumann_eigenfrequencies_by_order, solve_oracle};
use fsi_bem::output::{self, ReferenceLine, TraceRow, TRACE_HEADER};
use fsi_bem::parallel::{configure_threads, Execution};
use fsi_bem::systems::{default_beta, logdet_sweep_multi, omega_grid, solve, Blocks, Formulation, Solution};
use fsi_bem::BemError;
use toml::Value;

use config::{ConfigError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "fsi-bem", version, about = "2D fluid-solid interaction boundary element solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; sidecar files are written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Overrides `run.formulation`: direct, indirect or burton_miller.
    #[arg(long)]
    formulation: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Boundary traces (or densities) of one solve.
    Solve(Common),
    /// Errors against the exact disc solution for a list of element counts.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Comma-separated element counts; defaults to `geometry.elements`.
        #[arg(long)]
        n_list: Option<String>,
    },
    /// `ln |det|` of the system matrix over a frequency grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `lo,hi`.
        #[arg(long)]
        omega_range: String,
        #[arg(long, default_value_t = 0.005)]
        step: f64,
    },
    /// Exact traces and mode coefficients of the disc problem.
    Oracle(Common),
}

enum Failure {
    Input(String),
    Resonance(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Input(_) => 2,
            Failure::Resonance(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Resonance(m) | Failure::Io(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<BemError> for Failure {
    fn from(e: BemError) -> Self {
        let inner = match &e {
            BemError::AtResolution { source, .. } => source.as_ref(),
            other => other,
        };
        match inner {
            BemError::NearSingular { omega, .. } => Failure::Resonance(format!(
                "{e}; omega = {omega} is likely an irregular or Jones frequency of this configuration"
            )),
            BemError::Resonance { .. } => Failure::Resonance(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load(common: &Common) -> Result<ScenarioConfig, Failure> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", common.config.display())))?;
    let cfg = ScenarioConfig::parse(&text, common.formulation.as_deref())?;
    if let Some(t) = cfg.threads {
        // The pool can only be set once per process.
        let _ = configure_threads(t);
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::Io(format!("cannot create {}: {e}", path.display())))
}

/// `dir/stem.csv` to `dir/stem.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn write_meta(out: &Path, cfg: &ScenarioConfig, extra: toml::Table) -> Result<(), Failure> {
    let mut t = toml::Table::new();
    t.insert("version".into(), Value::String(fsi_bem::VERSION.into()));
    t.insert("scenario_hash".into(), Value::String(cfg.hash()));
    let mut scenario = toml::Table::new();
    for (k, v) in &cfg.entries {
        scenario.insert(k.clone(), v.clone());
    }
    t.insert("scenario".into(), Value::Table(scenario));
    t.extend(extra);
    let text = toml::to_string(&t).map_err(|e| Failure::Io(e.to_string()))?;
    std::fs::write(sibling(out, "meta.toml"), text)?;
    Ok(())
}

fn float(v: f64) -> Value {
    Value::Float(v)
}

fn material_meta(cfg: &ScenarioConfig) -> Result<toml::Table, Failure> {
    let m = cfg.scenario.material()?;
    let mut t = toml::Table::new();
    for (k, v) in [
        ("lambda", m.lambda),
        ("mu", m.mu),
        ("k", m.k),
        ("k_s", m.k_s),
        ("k_p", m.k_p),
        ("eta", m.eta),
    ] {
        t.insert(k.into(), float(v));
    }
    Ok(t)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve(c) => cmd_solve(&c),
        Command::Convergence { common, n_list } => cmd_convergence(&common, n_list.as_deref()),
        Command::Sweep { common, omega_range, step } => cmd_sweep(&common, &omega_range, step),
        Command::Oracle(c) => cmd_oracle(&c),
    }
}

fn cmd_solve(c: &Common) -> Result<(), Failure> {
    let cfg = load(c)?;
    let sc = &cfg.scenario;
    let material = sc.material()?;
    let wave = sc.wave()?;
    let mesh = build_circle_mesh(sc.radius, cfg.elements)?;
    let blocks = Blocks::assemble(&mesh, &material, &[cfg.formulation], sc.quadrature, Execution::default());
    let system = blocks.system(&mesh, &wave, cfg.formulation, sc.beta)?;
    let report = solve(&system)?;
    let theta: Vec<f64> = mesh.nodes.iter().map(|x| x[1].atan2(x[0])).collect();
    let (header, rows): ([&str; 7], Vec<TraceRow>) = match &report.solution {
        Solution::Traces(t) => (
            TRACE_HEADER,
            (0..mesh.len()).map(|i| (theta[i], t.u_nodes[i], t.p_nodes[i])).collect(),
        ),
        Solution::Densities(d) => (
            ["theta", "re_v1", "im_v1", "re_v2", "im_v2", "re_psi", "im_psi"],
            (0..mesh.len()).map(|i| (theta[i], d.v_nodes[i], d.psi_nodes[i])).collect(),
        ),
    };
    output::write_trace_csv(create(&c.out)?, &cfg.hash(), header, &rows).map_err(|e| Failure::Io(e.to_string()))?;
    let mut extra = toml::Table::new();
    extra.insert("formulation".into(), Value::String(cfg.formulation.name().into()));
    extra.insert("elements".into(), Value::Integer(mesh.len() as i64));
    if let Some(b) = system.beta {
        extra.insert("beta".into(), Value::Array(vec![float(b.re), float(b.im)]));
    }
    extra.insert("relative_residual".into(), float(report.relative_residual));
    extra.insert("condition_estimate".into(), float(report.condition_estimate));
    extra.insert("min_relative_pivot".into(), float(report.min_relative_pivot));
    extra.insert("condition_warning".into(), Value::Boolean(report.condition_warning));
    extra.insert("material".into(), Value::Table(material_meta(&cfg)?));
    if report.condition_warning {
        eprintln!(
            "warning: condition estimate {:.3e} at omega = {}; the frequency may be close to a resonance",
            report.condition_estimate, material.omega
        );
    }
    write_meta(&c.out, &cfg, extra)
}

fn parse_n_list(text: &str) -> Result<Vec<usize>, Failure> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(Failure::Input("--n-list must name at least one element count".into()));
    }
    items
        .iter()
        .map(|s| s.parse::<usize>().map_err(|_| Failure::Input(format!("--n-list: `{s}` is not an element count"))))
        .collect()
}

fn cmd_convergence(c: &Common, n_list: Option<&str>) -> Result<(), Failure> {
    let cfg = load(c)?;
    let ns = match n_list {
        Some(t) => parse_n_list(t)?,
        None => vec![cfg.elements],
    };
    let rows = convergence_study_multi(&[cfg.formulation], &cfg.scenario, &ns, Execution::default())?.remove(0);
    let reports: Vec<_> = rows.iter().map(|r| r.report.clone()).collect();
    output::write_study_csv(create(&c.out)?, &cfg.hash(), &reports).map_err(|e| Failure::Io(e.to_string()))?;
    let mut extra = toml::Table::new();
    extra.insert("formulation".into(), Value::String(cfg.formulation.name().into()));
    extra.insert("norm".into(), Value::String(reports[0].norm_kind.name().into()));
    if let (Some(ru), Some(rp)) = (reports[0].eval_radius_u, reports[0].eval_radius_p) {
        extra.insert("eval_radius_u".into(), float(ru));
        extra.insert("eval_radius_p".into(), float(rp));
    }
    extra.insert(
        "relative_residuals".into(),
        Value::Array(rows.iter().map(|r| float(r.solve.relative_residual)).collect()),
    );
    extra.insert("material".into(), Value::Table(material_meta(&cfg)?));
    write_meta(&c.out, &cfg, extra)
}

fn parse_range(text: &str) -> Result<(f64, f64), Failure> {
    let parts: Vec<&str> = text.split([',', ':']).map(str::trim).collect();
    let bad = || Failure::Input(format!("--omega-range: expected `lo,hi`, got `{text}`"));
    match parts[..] {
        [a, b] => Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn cmd_sweep(c: &Common, range: &str, step: f64) -> Result<(), Failure> {
    let cfg = load(c)?;
    let (lo, hi) = parse_range(range)?;
    let grid = omega_grid(lo, hi, step)?;
    let sc = &cfg.scenario;
    let mesh = build_circle_mesh(sc.radius, cfg.elements)?;
    let beta = sc.beta;
    let sweep = logdet_sweep_multi(
        &[cfg.formulation],
        &sc.template,
        &mesh,
        &grid,
        move |m| beta.unwrap_or_else(|| default_beta(m)),
        sc.quadrature,
        Execution::default(),
    )?
    .remove(0);
    let hash = cfg.hash();
    output::write_sweep_csv(create(&c.out)?, &hash, &sweep).map_err(|e| Failure::Io(e.to_string()))?;

    let jones = find_jones_frequencies(&sc.template, sc.radius, lo, hi, 20)?;
    let n_max = (hi * sc.radius / sc.template.c).ceil() as u32 + 2;
    let neumann = neumann_eigenfrequencies_by_order(sc.template.c, sc.radius, lo, hi, n_max);
    let mut lines: Vec<ReferenceLine> =
        jones.iter().map(|&w| ReferenceLine { kind: "jones", omega: w, order: None, expected_dip: true }).collect();
    lines.extend(neumann.iter().map(|&(n, w)| ReferenceLine {
        kind: "neumann",
        omega: w,
        order: Some(n),
        expected_dip: cfg.formulation == Formulation::Direct,
    }));
    lines.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    let reference = sibling(&c.out, "reference.csv");
    output::write_reference_csv(create(&reference)?, &hash, &lines).map_err(|e| Failure::Io(e.to_string()))?;

    let mut extra = toml::Table::new();
    extra.insert("formulation".into(), Value::String(cfg.formulation.name().into()));
    extra.insert("elements".into(), Value::Integer(mesh.len() as i64));
    extra.insert("omega_range".into(), Value::Array(vec![float(lo), float(hi)]));
    extra.insert("step".into(), float(step));
    extra.insert("reference".into(), Value::String(reference.display().to_string()));
    write_meta(&c.out, &cfg, extra)
}

fn cmd_oracle(c: &Common) -> Result<(), Failure> {
    let cfg = load(c)?;
    let sc = &cfg.scenario;
    let material = sc.material()?;
    let solution = solve_oracle(&material, sc.radius, &sc.wave()?, sc.oracle_n_max)?;
    let n = cfg.elements;
    let rows: Vec<TraceRow> = (0..n)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let (u, p) = solution.trace(theta);
            (theta, u, p)
        })
        .collect();
    let hash = cfg.hash();
    output::write_trace_csv(create(&c.out)?, &hash, TRACE_HEADER, &rows).map_err(|e| Failure::Io(e.to_string()))?;
    let modes = sibling(&c.out, "modes.csv");
    output::write_modes_csv(create(&modes)?, &hash, &solution).map_err(|e| Failure::Io(e.to_string()))?;
    let (r1, r2) = solution.transmission_residuals(100);
    let mut extra = toml::Table::new();
    extra.insert("n_max_requested".into(), Value::Integer(sc.oracle_n_max as i64));
    extra.insert("n_max_used".into(), Value::Integer(solution.n_max() as i64));
    extra.insert("tail".into(), float(solution.tail));
    extra.insert("residual_normal_displacement".into(), float(r1));
    extra.insert("residual_traction".into(), float(r2));
    extra.insert("material".into(), Value::Table(material_meta(&cfg)?));
    write_meta(&c.out, &cfg, extra)
}
