//! Field evaluation away from the boundary, error norms against the
//! oracle, and convergence studies.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::assembly::QuadratureConfig;
use crate::error::{BemError, Result};
use crate::kernels::{traction_direct_txe, HelmholtzRadial, KernelBundle};
use crate::material::{MaterialSystem, MaterialTemplate, PlaneWave};
use crate::mesh::{build_circle_mesh, local_hats, BoundaryMesh};
use crate::oracle::{solve_oracle, OracleSolution};
use crate::parallel::Execution;
use crate::quadrature::gauss_legendre;
use crate::systems::{solve, Blocks, DensitySolution, Formulation, Solution, SolveReport, TraceSolution};

type C = Complex64;
const ZERO: C = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Interior of the curve (elastic body).
    Solid,
    /// Exterior of the curve (fluid).
    Fluid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue {
    Displacement([C; 2]),
    Pressure(C),
}

impl FieldValue {
    pub fn displacement(self) -> Option<[C; 2]> {
        match self {
            FieldValue::Displacement(u) => Some(u),
            FieldValue::Pressure(_) => None,
        }
    }

    pub fn pressure(self) -> Option<C> {
        match self {
            FieldValue::Pressure(p) => Some(p),
            FieldValue::Displacement(_) => None,
        }
    }
}

/// A field value and whether it was computed closer than
/// [`NEAR_BOUNDARY_PANELS`] panel lengths to the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEval {
    pub value: FieldValue,
    pub near_boundary: bool,
}

pub const NEAR_BOUNDARY_PANELS: f64 = 2.0;

/// Winding-number test.
pub fn inside(mesh: &BoundaryMesh, x: [f64; 2]) -> bool {
    let mut angle = 0.0;
    for a in 0..mesh.len() {
        let p = mesh.nodes[a];
        let q = mesh.nodes[(a + 1) % mesh.len()];
        let u = [p[0] - x[0], p[1] - x[1]];
        let v = [q[0] - x[0], q[1] - x[1]];
        angle += (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1]);
    }
    angle.abs() > PI
}

fn distance_to_mesh(mesh: &BoundaryMesh, x: [f64; 2]) -> f64 {
    (0..mesh.len())
        .map(|a| {
            let p = mesh.nodes[a];
            let e = [mesh.seg_tangent[a][0] * mesh.seg_length[a], mesh.seg_tangent[a][1] * mesh.seg_length[a]];
            let w = [x[0] - p[0], x[1] - p[1]];
            let s = ((w[0] * e[0] + w[1] * e[1]) / (e[0] * e[0] + e[1] * e[1])).clamp(0.0, 1.0);
            (w[0] - s * e[0]).hypot(w[1] - s * e[1])
        })
        .fold(f64::INFINITY, f64::min)
}

/// Checks the region and returns the near-boundary flag.
fn locate(mesh: &BoundaryMesh, x: [f64; 2], region: Region) -> Result<bool> {
    let is_inside = inside(mesh, x);
    let wanted = region == Region::Solid;
    if is_inside != wanted {
        return Err(BemError::Domain {
            region: if wanted { "solid" } else { "fluid" },
            detail: format!("point ({}, {}) lies on the other side of the boundary", x[0], x[1]),
        });
    }
    Ok(distance_to_mesh(mesh, x) < NEAR_BOUNDARY_PANELS * mesh.max_h())
}

/// Boundary densities sampled at panel quadrature points.
struct PanelData<'a> {
    mesh: &'a BoundaryMesh,
    q: usize,
}

impl<'a> PanelData<'a> {
    /// Calls `f(y, n_y, weight, hats, panel)` for every quadrature point.
    fn for_each(&self, mut f: impl FnMut([f64; 2], [f64; 2], f64, [f64; 2], usize)) {
        let rule = gauss_legendre(self.q);
        for a in 0..self.mesh.len() {
            let h = self.mesh.seg_length[a];
            for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
                f(self.mesh.point(a, s), self.mesh.seg_normal[a], w * h, local_hats(s), a)
            }
        }
    }
}

fn interp<T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>>(
    vals: &[T],
    a: usize,
    hats: [f64; 2],
) -> T {
    vals[a] * hats[0] + vals[(a + 1) % vals.len()] * hats[1]
}

fn interp_vec(vals: &[[C; 2]], a: usize, hats: [f64; 2]) -> [C; 2] {
    let b = (a + 1) % vals.len();
    [vals[a][0] * hats[0] + vals[b][0] * hats[1], vals[a][1] * hats[0] + vals[b][1] * hats[1]]
}

/// `gamma_k(x, y)` and `d gamma_k / d n_y`.
fn fluid_kernels(bundle: &KernelBundle, x: [f64; 2], y: [f64; 2], n: [f64; 2]) -> Result<(C, C)> {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = d[0].hypot(d[1]);
    if r == 0.0 {
        return Err(BemError::Singular);
    }
    let [g, g1, _] = bundle.fluid.eval(r);
    Ok((g, -g1 * ((d[0] * n[0] + d[1] * n[1]) / r)))
}

fn quadrature_order(near: bool) -> usize {
    if near {
        24
    } else {
        12
    }
}

/// Field from solved traces through Green's representation formulas, with
/// traction and normal pressure derivative taken from the transmission
/// conditions.
pub fn represent_field_direct(
    mesh: &BoundaryMesh,
    trace: &TraceSolution,
    material: &MaterialSystem,
    wave: &PlaneWave,
    x: [f64; 2],
    region: Region,
) -> Result<FieldEval> {
    let near = locate(mesh, x, region)?;
    let data = PanelData { mesh, q: quadrature_order(near) };
    let bundle = KernelBundle::new(material);
    match region {
        Region::Fluid => {
            let mut p = ZERO;
            let mut err = None;
            data.for_each(|y, n, w, hats, a| {
                let ph = interp(&trace.p_nodes, a, hats);
                let uh = interp_vec(&trace.u_nodes, a, hats);
                let g = wave.gradient(y);
                let dpdn = (uh[0] * n[0] + uh[1] * n[1]) * material.eta - (g[0] * n[0] + g[1] * n[1]);
                match fluid_kernels(&bundle, x, y, n) {
                    Ok((gk, dgdny)) => p += (dgdny * ph - gk * dpdn) * w,
                    Err(e) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            Ok(FieldEval { value: FieldValue::Pressure(p), near_boundary: near })
        }
        Region::Solid => {
            let mut u = [ZERO; 2];
            let mut err = None;
            data.for_each(|y, n, w, hats, a| {
                let ph = interp(&trace.p_nodes, a, hats) + wave.value(y);
                let uh = interp_vec(&trace.u_nodes, a, hats);
                let t = [-ph * n[0], -ph * n[1]];
                match (bundle.e(x, y), traction_direct_txe(&bundle, y, x, n)) {
                    (Ok(e), Ok(te)) => {
                        for j in 0..2 {
                            let single = e[j][0] * t[0] + e[j][1] * t[1];
                            let double = te[0][j] * uh[0] + te[1][j] * uh[1];
                            u[j] += (single - double) * w;
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            Ok(FieldEval { value: FieldValue::Displacement(u), near_boundary: near })
        }
    }
}

/// Field from layer densities: `u = S_s(-n psi) - D_s v` in the solid and
/// `p = D_f psi - eta S_f(v . n)` in the fluid.
pub fn represent_field_indirect(
    mesh: &BoundaryMesh,
    densities: &DensitySolution,
    material: &MaterialSystem,
    x: [f64; 2],
    region: Region,
) -> Result<FieldEval> {
    let near = locate(mesh, x, region)?;
    let data = PanelData { mesh, q: quadrature_order(near) };
    let bundle = KernelBundle::new(material);
    let mut err = None;
    let value = match region {
        Region::Fluid => {
            let mut p = ZERO;
            data.for_each(|y, n, w, hats, a| {
                let psi = interp(&densities.psi_nodes, a, hats);
                let v = interp_vec(&densities.v_nodes, a, hats);
                let vn = v[0] * n[0] + v[1] * n[1];
                match fluid_kernels(&bundle, x, y, n) {
                    Ok((gk, dgdny)) => p += (dgdny * psi - gk * vn * material.eta) * w,
                    Err(e) => err = Some(e),
                }
            });
            FieldValue::Pressure(p)
        }
        Region::Solid => {
            let mut u = [ZERO; 2];
            data.for_each(|y, n, w, hats, a| {
                let psi = interp(&densities.psi_nodes, a, hats);
                let v = interp_vec(&densities.v_nodes, a, hats);
                let t = [-psi * n[0], -psi * n[1]];
                match (bundle.e(x, y), traction_direct_txe(&bundle, y, x, n)) {
                    (Ok(e), Ok(te)) => {
                        for j in 0..2 {
                            let single = e[j][0] * t[0] + e[j][1] * t[1];
                            let double = te[0][j] * v[0] + te[1][j] * v[1];
                            u[j] += (single - double) * w;
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => err = Some(e),
                }
            });
            FieldValue::Displacement(u)
        }
    };
    if let Some(e) = err {
        return Err(e);
    }
    Ok(FieldEval { value, near_boundary: near })
}

/// Helmholtz single- and double-layer potentials `(S sigma, D mu)` of
/// piecewise-linear densities at any `x` off the boundary, with `q` Gauss
/// points per panel.
pub fn helmholtz_layers(mesh: &BoundaryMesh, k: f64, sigma: &[C], mu: &[C], x: [f64; 2], q: usize) -> Result<(C, C)> {
    let radial = HelmholtzRadial::new(k);
    let data = PanelData { mesh, q };
    let (mut s, mut d) = (ZERO, ZERO);
    let mut singular = false;
    data.for_each(|y, n, w, hats, a| {
        let e = [x[0] - y[0], x[1] - y[1]];
        let r = e[0].hypot(e[1]);
        if r == 0.0 {
            singular = true;
            return;
        }
        let [g, g1, _] = radial.eval(r);
        s += g * interp(sigma, a, hats) * w;
        d += -g1 * ((e[0] * n[0] + e[1] * n[1]) / r) * interp(mu, a, hats) * w;
    });
    if singular {
        return Err(BemError::Singular);
    }
    Ok((s, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2Gamma,
    LinfCircle,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::L2Gamma => "L2_Gamma",
            NormKind::LinfCircle => "Linf_circle",
        }
    }
}

/// Errors of one discretisation level.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub n: usize,
    pub err_u_abs: f64,
    pub err_u_rel: f64,
    pub err_p_abs: f64,
    pub err_p_rel: f64,
    /// Observed order against the previous row of a study.
    pub order_u: Option<f64>,
    pub order_p: Option<f64>,
    pub norm_kind: NormKind,
    /// Circle radii of the displacement and pressure samples (`LinfCircle`).
    pub eval_radius_u: Option<f64>,
    pub eval_radius_p: Option<f64>,
}

/// Gauss points per panel of the boundary L2 norm.
pub const L2_GAUSS_POINTS: usize = 8;
/// Samples of the circle L-infinity norm.
pub const LINF_SAMPLES: usize = 512;

/// Boundary L2 errors of piecewise-linear traces against the oracle traces
/// at the radial projection of each quadrature point:
/// `(u_abs, u_rel, p_abs, p_rel)`.
pub fn l2_trace_errors(mesh: &BoundaryMesh, trace: &TraceSolution, oracle: &OracleSolution) -> (f64, f64, f64, f64) {
    let data = PanelData { mesh, q: L2_GAUSS_POINTS };
    let (mut du, mut nu, mut dp, mut np) = (0.0, 0.0, 0.0, 0.0);
    data.for_each(|y, _, w, hats, a| {
        let theta = y[1].atan2(y[0]);
        let (ue, pe) = oracle.trace(theta);
        let uh = interp_vec(&trace.u_nodes, a, hats);
        let ph = interp(&trace.p_nodes, a, hats);
        du += w * ((uh[0] - ue[0]).norm_sqr() + (uh[1] - ue[1]).norm_sqr());
        nu += w * (ue[0].norm_sqr() + ue[1].norm_sqr());
        dp += w * (ph - pe).norm_sqr();
        np += w * pe.norm_sqr();
    });
    let (du, nu, dp, np) = (du.sqrt(), nu.sqrt(), dp.sqrt(), np.sqrt());
    (du, du / nu, dp, dp / np)
}

/// Nodal oracle traces on `mesh`, at the polar angle of each node.
pub fn oracle_trace_solution(mesh: &BoundaryMesh, oracle: &OracleSolution) -> TraceSolution {
    let (u_nodes, p_nodes) = mesh.nodes.iter().map(|x| oracle.trace(x[1].atan2(x[0]))).unzip();
    TraceSolution { u_nodes, p_nodes }
}

fn circle_points(radius: f64) -> Vec<(f64, [f64; 2])> {
    (0..LINF_SAMPLES)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / LINF_SAMPLES as f64;
            (t, [radius * t.cos(), radius * t.sin()])
        })
        .collect()
}

/// Maximum error of `numeric` against `exact` over the sample circle:
/// `(absolute, relative to the maximum of |exact|)`.
pub fn linf_circle<F, G>(radius: f64, numeric: F, exact: G) -> Result<(f64, f64)>
where
    F: Fn([f64; 2]) -> Result<Vec<C>>,
    G: Fn(f64, [f64; 2]) -> Vec<C>,
{
    let (mut e, mut s) = (0.0f64, 0.0f64);
    for (t, x) in circle_points(radius) {
        let a = numeric(x)?;
        let b = exact(t, x);
        let d: f64 = a.iter().zip(&b).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt();
        let m: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        e = e.max(d);
        s = s.max(m);
    }
    Ok((e, if s > 0.0 { e / s } else { e }))
}

/// Circle L-infinity errors of fields represented from densities: `u` on
/// the circle of radius `r_u` (solid), `p` on radius `r_p` (fluid).
pub fn linf_density_errors(
    mesh: &BoundaryMesh,
    densities: &DensitySolution,
    oracle: &OracleSolution,
    r_u: f64,
    r_p: f64,
) -> Result<(f64, f64, f64, f64)> {
    let m = &oracle.material;
    let (ua, ur) = linf_circle(
        r_u,
        |x| {
            let u = represent_field_indirect(mesh, densities, m, x, Region::Solid)?.value.displacement().unwrap();
            Ok(u.to_vec())
        },
        |t, _| oracle.displacement(r_u, t).to_vec(),
    )?;
    let (pa, pr) = linf_circle(
        r_p,
        |x| Ok(vec![represent_field_indirect(mesh, densities, m, x, Region::Fluid)?.value.pressure().unwrap()]),
        |t, _| vec![oracle.pressure(r_p, t).0],
    )?;
    Ok((ua, ur, pa, pr))
}

/// Least-squares slope of `-log(err)` against `log(N)`.
pub fn fitted_order(ns: &[usize], errs: &[f64]) -> Option<f64> {
    if ns.len() < 2 || ns.len() != errs.len() {
        return None;
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(-sxy / sxx)
}

/// Fills in the row-to-row orders of a study.
pub fn fill_orders(rows: &mut [ErrorReport]) {
    for i in 1..rows.len() {
        let ratio = (rows[i].n as f64 / rows[i - 1].n as f64).ln();
        let order = |a: f64, b: f64| if a > 0.0 && b > 0.0 { Some((a / b).ln() / ratio) } else { None };
        rows[i].order_u = order(rows[i - 1].err_u_rel, rows[i].err_u_rel);
        rows[i].order_p = order(rows[i - 1].err_p_rel, rows[i].err_p_rel);
    }
}

/// A disc scattering problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub radius: f64,
    pub template: MaterialTemplate,
    pub omega: f64,
    pub direction: [f64; 2],
    /// Burton-Miller coupling; `None` means `i k`.
    pub beta: Option<C>,
    pub quadrature: QuadratureConfig,
    pub oracle_n_max: usize,
}

impl Scenario {
    pub fn material(&self) -> Result<MaterialSystem> {
        self.template.at(self.omega)
    }

    pub fn wave(&self) -> Result<PlaneWave> {
        PlaneWave::new(self.direction, self.material()?.k)
    }

    pub fn oracle(&self) -> Result<OracleSolution> {
        solve_oracle(&self.material()?, self.radius, &self.wave()?, self.oracle_n_max)
    }
}

/// Radii of the L-infinity circles for density formulations, relative to
/// the disc radius.
pub const INDIRECT_RADIUS_U: f64 = 0.5;
pub const INDIRECT_RADIUS_P: f64 = 2.0;

/// One solve with its error report.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub report: ErrorReport,
    pub solve: SolveReport,
}

fn report_for(
    formulation: Formulation,
    mesh: &BoundaryMesh,
    scenario: &Scenario,
    oracle: &OracleSolution,
    solved: &SolveReport,
) -> Result<ErrorReport> {
    let n = mesh.len();
    match &solved.solution {
        Solution::Traces(t) => {
            let (ua, ur, pa, pr) = l2_trace_errors(mesh, t, oracle);
            Ok(ErrorReport {
                n,
                err_u_abs: ua,
                err_u_rel: ur,
                err_p_abs: pa,
                err_p_rel: pr,
                order_u: None,
                order_p: None,
                norm_kind: NormKind::L2Gamma,
                eval_radius_u: None,
                eval_radius_p: None,
            })
        }
        Solution::Densities(d) => {
            let (r_u, r_p) = (INDIRECT_RADIUS_U * scenario.radius, INDIRECT_RADIUS_P * scenario.radius);
            let (ua, ur, pa, pr) = linf_density_errors(mesh, d, oracle, r_u, r_p)?;
            debug_assert!(formulation == Formulation::Indirect);
            Ok(ErrorReport {
                n,
                err_u_abs: ua,
                err_u_rel: ur,
                err_p_abs: pa,
                err_p_rel: pr,
                order_u: None,
                order_p: None,
                norm_kind: NormKind::LinfCircle,
                eval_radius_u: Some(r_u),
                eval_radius_p: Some(r_p),
            })
        }
    }
}

/// Convergence studies of several formulations sharing one operator
/// assembly per `N`. Returns one list of rows per formulation.
pub fn convergence_study_multi(
    formulations: &[Formulation],
    scenario: &Scenario,
    n_list: &[usize],
    exec: Execution,
) -> Result<Vec<Vec<StudyRow>>> {
    if n_list.is_empty() {
        return Err(BemError::param("n_list", "must not be empty"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] < 16 {
        return Err(BemError::param("n_list", "must be ascending with every N >= 16"));
    }
    let material = scenario.material()?;
    let wave = scenario.wave()?;
    let oracle = scenario.oracle()?;
    let mut out: Vec<Vec<StudyRow>> = vec![Vec::new(); formulations.len()];
    for &n in n_list {
        let at = |e: BemError| BemError::AtResolution { n, source: Box::new(e) };
        let mesh = build_circle_mesh(scenario.radius, n).map_err(at)?;
        let blocks = Blocks::assemble(&mesh, &material, formulations, scenario.quadrature, exec);
        for (k, &f) in formulations.iter().enumerate() {
            let system = blocks.system(&mesh, &wave, f, scenario.beta).map_err(at)?;
            let solved = solve(&system).map_err(at)?;
            let report = report_for(f, &mesh, scenario, &oracle, &solved).map_err(at)?;
            out[k].push(StudyRow { report, solve: solved });
        }
    }
    for rows in out.iter_mut() {
        let mut reports: Vec<ErrorReport> = rows.iter().map(|r| r.report.clone()).collect();
        fill_orders(&mut reports);
        for (row, rep) in rows.iter_mut().zip(reports) {
            row.report = rep;
        }
    }
    Ok(out)
}

pub fn convergence_study(formulation: Formulation, scenario: &Scenario, n_list: &[usize]) -> Result<Vec<ErrorReport>> {
    Ok(convergence_study_multi(&[formulation], scenario, n_list, Execution::default())?
        .remove(0)
        .into_iter()
        .map(|r| r.report)
        .collect())
}
