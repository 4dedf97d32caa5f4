use std::f64::consts::PI;

use fsi_bem::assembly::{assemble_ih, Assembler, OperatorKind, QuadratureConfig, WsForm};
use fsi_bem::fields::helmholtz_layers;
use fsi_bem::material::{derive_wavenumbers, MaterialSystem, PlaneWave};
use fsi_bem::mesh::{build_circle_mesh, rotate, BoundaryMesh};
use fsi_bem::parallel::Execution;
use fsi_bem::specfun::{bessel_j_array, bessel_jy, bessel_y_array};
use fsi_bem::systems::{solve, Blocks, Formulation};
use num_complex::Complex64;
use proptest::prelude::*;

type C = Complex64;

fn material(omega: f64) -> MaterialSystem {
    derive_wavenumbers(1.0, 2.0, 1.0, 0.5, 1.0, omega).unwrap()
}

/// Ellipse with semi-axes `a`, `b`: smooth but not rotation invariant.
fn ellipse(a: f64, b: f64, n: usize) -> BoundaryMesh {
    let nodes = (0..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            [a * t.cos(), b * t.sin()]
        })
        .collect();
    BoundaryMesh::from_nodes(nodes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wronskian_holds(n in 0i32..30, x in 0.05f64..80.0) {
        let f = bessel_jy(n, x).unwrap();
        let w = f.j * f.dy - f.dj * f.y;
        prop_assert!((w - 2.0 / (PI * x)).abs() <= 1e-10 * (2.0 / (PI * x)), "W = {w}, x = {x}");
    }

    #[test]
    fn three_term_recurrence_holds(x in 0.05f64..80.0) {
        let j = bessel_j_array(25, x).unwrap();
        let y = bessel_y_array(25, x).unwrap();
        for n in 1..25 {
            let lhs = j[n - 1] + j[n + 1];
            let rhs = 2.0 * n as f64 / x * j[n];
            prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + j[n - 1].abs() + j[n + 1].abs()));
            let lhs = y[n - 1] + y[n + 1];
            let rhs = 2.0 * n as f64 / x * y[n];
            prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + y[n - 1].abs() + y[n + 1].abs()));
        }
    }

    #[test]
    fn rotation_squares_to_minus_identity(a in -1e3f64..1e3, b in -1e3f64..1e3) {
        let r = rotate(rotate([a, b]));
        prop_assert_eq!(r, [-a, -b]);
        let q = rotate([a, b]);
        prop_assert_eq!(q[0] * a + q[1] * b, 0.0);
    }

    #[test]
    fn ih_sums_to_zero_on_closed_curves(a in 0.3f64..3.0, b in 0.3f64..3.0, n in 6usize..40) {
        let ih = assemble_ih(&ellipse(a, b, n)).data;
        for comp in 0..2 {
            let mut s = C::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    s += ih[(2 * i + comp, j)];
                }
            }
            prop_assert!(s.norm() < 1e-12 * (a + b), "component {comp}: {s}");
        }
    }

    #[test]
    fn ih_scales_with_the_mesh(s in 0.1f64..10.0) {
        let mesh = ellipse(1.0, 0.6, 12);
        let base = assemble_ih(&mesh).data;
        let scaled = assemble_ih(&mesh.scaled(s)).data;
        prop_assert!(scaled.max_abs_diff(&base.scaled(C::new(s, 0.0))) < 1e-12 * s * base.max_abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn operators_are_symmetric_and_dual(omega in 1.0f64..8.0, a in 0.7f64..1.4, n in 10usize..20) {
        use OperatorKind::*;
        let mesh = ellipse(a, 1.0, n);
        let ops = Assembler::new(&mesh, &material(omega)).assemble(&[Vf, Vs, Wf, Ws(WsForm::A), Kf, Kfp, Ks, Ksp]);
        let [vf, vs, wf, ws, kf, kfp, ks, ksp] = &ops[..] else { unreachable!() };
        for (op, tol) in [(vf, 1e-10), (vs, 1e-10), (wf, 1e-10), (ws, 1e-8)] {
            let d = op.data.max_abs_diff(&op.data.transpose()) / op.data.max_abs();
            prop_assert!(d < tol, "{:?} asymmetry {d:e}", op.kind);
        }
        prop_assert!(kfp.data.max_abs_diff(&kf.data.transpose()) < 1e-10 * kf.data.max_abs());
        prop_assert!(ksp.data.max_abs_diff(&ks.data.transpose()) < 1e-10 * ks.data.max_abs());
    }

    #[test]
    fn solutions_are_linear_in_the_incident_amplitude(re in -3.0f64..3.0, im in -3.0f64..3.0, theta in 0.0f64..std::f64::consts::TAU) {
        prop_assume!(re.hypot(im) > 1e-3);
        let m = material(3.0);
        let mesh = build_circle_mesh(1.0, 16).unwrap();
        let blocks = Blocks::assemble(&mesh, &m, &Formulation::ALL, QuadratureConfig::default(), Execution::default());
        let wave = PlaneWave::new([theta.cos(), theta.sin()], m.k).unwrap();
        let alpha = C::new(re, im);
        for f in Formulation::ALL {
            let x1 = solve(&blocks.system(&mesh, &wave, f, None).unwrap()).unwrap().raw;
            let x2 = solve(&blocks.system(&mesh, &wave.with_amplitude(alpha), f, None).unwrap()).unwrap().raw;
            let scale = x1.iter().map(|v| v.norm()).fold(0.0, f64::max) * alpha.norm();
            let diff = x1.iter().zip(&x2).map(|(a, b)| (a * alpha - b).norm()).fold(0.0, f64::max);
            prop_assert!(diff < 1e-9 * scale, "{} diff {diff:e}", f.name());
        }
    }
}

#[test]
fn assembly_is_deterministic_across_execution_modes() {
    use OperatorKind::*;
    let mesh = ellipse(1.2, 0.8, 24);
    let kinds = [Vf, Kf, Wf, Vs, Ks, Ws(WsForm::A), Ws(WsForm::B), Ih, NVfN];
    let m = material(6.0);
    let seq = Assembler::new(&mesh, &m).with_execution(Execution::Sequential).assemble(&kinds);
    let par = Assembler::new(&mesh, &m).with_execution(Execution::Parallel).assemble(&kinds);
    let again = Assembler::new(&mesh, &m).with_execution(Execution::Parallel).assemble(&kinds);
    for ((s, p), q) in seq.iter().zip(&par).zip(&again) {
        assert_eq!(s.data.max_abs_diff(&p.data), 0.0, "{:?}", s.kind);
        assert_eq!(p.data.max_abs_diff(&q.data), 0.0, "{:?}", s.kind);
    }
}

#[test]
fn burton_miller_tends_to_direct_for_small_coupling() {
    let m = material(6.0);
    let mesh = build_circle_mesh(1.0, 32).unwrap();
    let wave = PlaneWave::new([1.0, 0.0], m.k).unwrap();
    let blocks = Blocks::assemble(
        &mesh,
        &m,
        &[Formulation::Direct, Formulation::BurtonMiller],
        QuadratureConfig::default(),
        Execution::default(),
    );
    let direct = solve(&blocks.system(&mesh, &wave, Formulation::Direct, None).unwrap()).unwrap().raw;
    let bm = solve(&blocks.system(&mesh, &wave, Formulation::BurtonMiller, Some(C::new(0.0, 1e-8))).unwrap())
        .unwrap()
        .raw;
    let scale = direct.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let diff = direct.iter().zip(&bm).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-6 * scale, "diff {diff:e}");
}

/// One-sided limits from `x0 +- eps n`, linearly extrapolated in `eps`.
fn limits(mesh: &BoundaryMesh, k: f64, sigma: &[C], mu: &[C], node: usize, eps: f64) -> [(C, C); 2] {
    let x0 = mesh.nodes[node];
    let r = x0[0].hypot(x0[1]);
    let n = [x0[0] / r, x0[1] / r];
    let side = |sgn: f64| {
        let at = |e: f64| helmholtz_layers(mesh, k, sigma, mu, [x0[0] + sgn * e * n[0], x0[1] + sgn * e * n[1]], 96).unwrap();
        let (s1, d1) = at(eps);
        let (s2, d2) = at(2.0 * eps);
        (s1 * 2.0 - s2, d1 * 2.0 - d2)
    };
    [side(1.0), side(-1.0)]
}

#[test]
fn layer_potentials_jump_across_the_boundary() {
    let k = 3.0;
    let n = 64;
    let mesh = build_circle_mesh(1.0, n).unwrap();
    let theta = |j: usize| 2.0 * PI * j as f64 / n as f64;
    let sigma: Vec<C> = (0..n).map(|j| C::new((2.0 * theta(j)).cos(), 0.5)).collect();
    let mu: Vec<C> = (0..n).map(|j| C::new(1.0 + 0.5 * theta(j).sin(), (3.0 * theta(j)).cos())).collect();
    for node in [0, 11, 40] {
        let [(s_out, d_out), (s_in, d_in)] = limits(&mesh, k, &sigma, &mu, node, 2e-3);
        let jump = d_out - d_in;
        assert!((jump - mu[node]).norm() < 2e-3 * mu[node].norm(), "node {node}: jump {jump}, density {}", mu[node]);
        assert!((s_out - s_in).norm() < 2e-3 * s_out.norm().max(1.0), "node {node}: single layer jumps");
    }
}
