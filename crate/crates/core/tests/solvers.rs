use fsi_bem::assembly::QuadratureConfig;
use fsi_bem::fields::{
    l2_trace_errors, represent_field_direct, represent_field_indirect, FieldValue, Region, Scenario,
};
use fsi_bem::material::{MaterialTemplate, PlaneWave};
use fsi_bem::mesh::build_circle_mesh;
use fsi_bem::parallel::Execution;
use fsi_bem::systems::{solve, Blocks, Formulation, SolveReport, CONDITION_WARNING};
use fsi_bem::BemError;
use num_complex::Complex64;

const UNIT: MaterialTemplate = MaterialTemplate { lambda: 1.0, mu: 2.0, rho: 1.0, rho_f: 0.5, c: 1.0 };

fn scenario(omega: f64) -> Scenario {
    Scenario {
        radius: 1.0,
        template: UNIT,
        omega,
        direction: [1.0, 0.0],
        beta: None,
        quadrature: QuadratureConfig::default(),
        oracle_n_max: 40,
    }
}

fn solve_all(omega: f64, n: usize) -> Vec<Result<SolveReport, BemError>> {
    let sc = scenario(omega);
    let m = sc.material().unwrap();
    let mesh = build_circle_mesh(1.0, n).unwrap();
    let blocks = Blocks::assemble(&mesh, &m, &Formulation::ALL, sc.quadrature, Execution::default());
    let wave = sc.wave().unwrap();
    Formulation::ALL.iter().map(|&f| solve(&blocks.system(&mesh, &wave, f, None)?)).collect()
}

#[test]
fn direct_and_burton_miller_agree_with_the_series_solution() {
    let sc = scenario(6.0);
    let oracle = sc.oracle().unwrap();
    let mesh = build_circle_mesh(1.0, 128).unwrap();
    let m = sc.material().unwrap();
    let blocks = Blocks::assemble(
        &mesh,
        &m,
        &[Formulation::Direct, Formulation::BurtonMiller],
        sc.quadrature,
        Execution::default(),
    );
    let wave = sc.wave().unwrap();
    let mut traces = Vec::new();
    for f in [Formulation::Direct, Formulation::BurtonMiller] {
        let rep = solve(&blocks.system(&mesh, &wave, f, None).unwrap()).unwrap();
        assert!(rep.relative_residual < 1e-10, "{} residual {:e}", f.name(), rep.relative_residual);
        let t = rep.solution.traces().unwrap().clone();
        let (_, u_rel, _, p_rel) = l2_trace_errors(&mesh, &t, &oracle);
        assert!(u_rel < 1e-2 && p_rel < 1e-2, "{}: u {u_rel:e}, p {p_rel:e}", f.name());
        traces.push(t);
    }
    let gap = traces[0].p_nodes.iter().zip(&traces[1].p_nodes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(gap < 1e-2, "direct and Burton-Miller pressures differ by {gap:e}");
}

#[test]
fn represented_fields_match_the_series_solution() {
    let sc = scenario(6.0);
    let oracle = sc.oracle().unwrap();
    let m = sc.material().unwrap();
    let wave = sc.wave().unwrap();
    let mesh = build_circle_mesh(1.0, 256).unwrap();
    let blocks = Blocks::assemble(&mesh, &m, &Formulation::ALL, sc.quadrature, Execution::default());
    let direct = solve(&blocks.system(&mesh, &wave, Formulation::Direct, None).unwrap()).unwrap();
    let indirect = solve(&blocks.system(&mesh, &wave, Formulation::Indirect, None).unwrap()).unwrap();
    let traces = direct.solution.traces().unwrap();
    let densities = indirect.solution.densities().unwrap();
    let p_scale = (0..64).map(|j| oracle.pressure(2.0, j as f64 * 0.1).0.norm()).fold(0.0, f64::max);
    for j in 0..8 {
        let theta = j as f64 * std::f64::consts::PI / 4.0;
        let x = [2.0 * theta.cos(), 2.0 * theta.sin()];
        let exact = oracle.pressure(2.0, theta).0;
        let p = represent_field_direct(&mesh, traces, &m, &wave, x, Region::Fluid).unwrap().value.pressure().unwrap();
        assert!((p - exact).norm() < 1e-2 * p_scale, "direct p at {theta}: {p} vs {exact}");
        let p = represent_field_indirect(&mesh, densities, &m, x, Region::Fluid).unwrap().value.pressure().unwrap();
        assert!((p - exact).norm() < 1e-2 * p_scale, "indirect p at {theta}: {p} vs {exact}");
    }
    let centre = oracle.displacement(1e-9, 0.0);
    let u_scale = (0..64).map(|j| {
        let d = oracle.displacement(0.5, j as f64 * 0.1);
        d[0].norm().hypot(d[1].norm())
    });
    let u_scale = u_scale.fold(0.0, f64::max);
    for value in [
        represent_field_direct(&mesh, traces, &m, &wave, [0.0, 0.0], Region::Solid).unwrap().value,
        represent_field_indirect(&mesh, densities, &m, [0.0, 0.0], Region::Solid).unwrap().value,
    ] {
        let FieldValue::Displacement(u) = value else { panic!("expected a displacement") };
        let err = (u[0] - centre[0]).norm().hypot((u[1] - centre[1]).norm());
        assert!(err < 1e-2 * u_scale, "centre displacement {u:?} vs {centre:?}");
    }
}

#[test]
fn densities_are_not_boundary_traces() {
    let sc = scenario(6.0);
    let oracle = sc.oracle().unwrap();
    let reports = solve_all(6.0, 64);
    let d = reports[1].as_ref().unwrap().solution.densities().unwrap();
    let mesh = build_circle_mesh(1.0, 64).unwrap();
    let gap = d
        .psi_nodes
        .iter()
        .zip(&mesh.nodes)
        .map(|(psi, x)| (psi - oracle.trace(x[1].atan2(x[0])).1).norm())
        .fold(0.0, f64::max);
    assert!(gap > 1e-2, "psi coincides with the boundary pressure ({gap:e})");
}

#[test]
fn jones_frequency_degrades_every_formulation() {
    let cond = |r: &Result<SolveReport, BemError>| match r {
        Ok(rep) => rep.condition_estimate,
        Err(BemError::NearSingular { .. }) => f64::INFINITY,
        Err(e) => panic!("unexpected error {e}"),
    };
    let calm: Vec<f64> = solve_all(6.0, 128).iter().map(cond).collect();
    let jones: Vec<f64> = solve_all(7.2629, 128).iter().map(cond).collect();
    let shifted: Vec<f64> = solve_all(7.2643, 128).iter().map(cond).collect();
    for k in 0..3 {
        let name = Formulation::ALL[k].name();
        assert!(calm[k] < 1e4, "{name}: condition {:e} at omega = 6", calm[k]);
        assert!(jones[k] > 20.0 * calm[k], "{name}: condition {:e} at the Jones frequency", jones[k]);
        assert!(shifted[k] > CONDITION_WARNING, "{name}: condition {:e} at the discrete resonance", shifted[k]);
    }
}

#[test]
fn burton_miller_rejects_real_coupling() {
    let sc = scenario(6.0);
    let mesh = build_circle_mesh(1.0, 16).unwrap();
    let m = sc.material().unwrap();
    let blocks = Blocks::assemble(&mesh, &m, &[Formulation::BurtonMiller], sc.quadrature, Execution::default());
    let wave = PlaneWave::new([1.0, 0.0], m.k).unwrap();
    let err = blocks.system(&mesh, &wave, Formulation::BurtonMiller, Some(Complex64::new(2.0, 0.0))).unwrap_err();
    assert!(matches!(err, BemError::Parameter { name: "beta", .. }));
}
