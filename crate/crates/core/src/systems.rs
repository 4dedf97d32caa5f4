//! Coupled block systems of the three formulations, their solution and
//! log-determinant frequency sweeps.
//!
//! Unknown layout is `[u_1x, u_1y, ..., u_Nx, u_Ny, p_1, ..., p_N]`, with
//! vector rows tested against vector hats and scalar rows against scalar
//! hats.

use num_complex::Complex64;

use crate::assembly::{Assembler, OperatorKind, OperatorMatrix, QuadratureConfig, WsForm};
use crate::error::{BemError, Result};
use crate::linalg::{lu_factor, relative_residual, CMatrix};
use crate::material::{incident_trace, MaterialSystem, MaterialTemplate, PlaneWave};
use crate::mesh::BoundaryMesh;
use crate::parallel::{map_indices, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    Direct,
    Indirect,
    BurtonMiller,
}

impl Formulation {
    pub const ALL: [Formulation; 3] = [Formulation::Direct, Formulation::Indirect, Formulation::BurtonMiller];

    pub fn name(self) -> &'static str {
        match self {
            Formulation::Direct => "direct",
            Formulation::Indirect => "indirect",
            Formulation::BurtonMiller => "burton_miller",
        }
    }
}

impl std::str::FromStr for Formulation {
    type Err = BemError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "direct" => Ok(Formulation::Direct),
            "indirect" => Ok(Formulation::Indirect),
            "burton_miller" | "bm" => Ok(Formulation::BurtonMiller),
            other => Err(BemError::param(
                "formulation",
                format!("unknown formulation `{other}`, expected direct, indirect or burton_miller"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownSemantics {
    /// Displacement and scattered pressure traces `(u, p)`.
    Traces,
    /// Layer densities `(v, psi)`.
    Densities,
}

#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub formulation: Formulation,
    pub matrix: CMatrix,
    pub rhs: Vec<Complex64>,
    pub beta: Option<Complex64>,
    pub unknown_semantics: UnknownSemantics,
    pub n: usize,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSolution {
    pub u_nodes: Vec<[Complex64; 2]>,
    pub p_nodes: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySolution {
    pub v_nodes: Vec<[Complex64; 2]>,
    pub psi_nodes: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Traces(TraceSolution),
    Densities(DensitySolution),
}

impl Solution {
    pub fn traces(&self) -> Option<&TraceSolution> {
        match self {
            Solution::Traces(t) => Some(t),
            Solution::Densities(_) => None,
        }
    }

    pub fn densities(&self) -> Option<&DensitySolution> {
        match self {
            Solution::Densities(d) => Some(d),
            Solution::Traces(_) => None,
        }
    }
}

/// Condition estimates above this are flagged in [`SolveReport`].
pub const CONDITION_WARNING: f64 = 1e6;
/// Relative pivot below which a solve is refused.
pub const PIVOT_TOLERANCE: f64 = 1e-13;
/// Steps of iterative refinement after the LU solve.
pub const REFINEMENT_STEPS: usize = 2;

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Solution,
    pub raw: Vec<Complex64>,
    pub relative_residual: f64,
    /// 1-norm condition estimate of the row/column equilibrated matrix.
    pub condition_estimate: f64,
    pub min_relative_pivot: f64,
    pub condition_warning: bool,
}

/// Default Burton-Miller coupling `i k`.
pub fn default_beta(material: &MaterialSystem) -> Complex64 {
    Complex64::new(0.0, material.k)
}

/// Operators assembled once and shared by the block systems.
#[derive(Debug, Clone)]
pub struct Blocks {
    pub material: MaterialSystem,
    pub n: usize,
    ops: Vec<OperatorMatrix>,
}

fn kinds_for(formulations: &[Formulation]) -> Vec<OperatorKind> {
    use OperatorKind::*;
    let mut kinds = vec![Ws(WsForm::A), Wf, KspN, KfpN, Ih];
    if formulations.contains(&Formulation::BurtonMiller) {
        kinds.extend([VfN, Kf, Mass]);
    }
    if formulations.contains(&Formulation::Indirect) {
        kinds.extend([NVfN, NKf, NKs, NVsN]);
    }
    kinds
}

impl Blocks {
    pub fn assemble(
        mesh: &BoundaryMesh,
        material: &MaterialSystem,
        formulations: &[Formulation],
        quadrature: QuadratureConfig,
        exec: Execution,
    ) -> Self {
        let kinds = kinds_for(formulations);
        let ops = Assembler::new(mesh, material).with_quadrature(quadrature).with_execution(exec).assemble(&kinds);
        Self { material: *material, n: mesh.len(), ops }
    }

    pub fn get(&self, kind: OperatorKind) -> &CMatrix {
        &self
            .ops
            .iter()
            .find(|o| o.kind == kind)
            .unwrap_or_else(|| panic!("operator {kind:?} was not assembled"))
            .data
    }

    fn half_ih_t(&self) -> CMatrix {
        self.get(OperatorKind::Ih).transpose().scaled(Complex64::new(0.5, 0.0))
    }

    fn build(&self, formulation: Formulation, beta: Complex64) -> CMatrix {
        use OperatorKind::*;
        let n = self.n;
        let eta = Complex64::new(self.material.eta, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let half = Complex64::new(0.5, 0.0);
        let mut a = CMatrix::zeros(3 * n, 3 * n);
        match formulation {
            Formulation::Direct | Formulation::BurtonMiller => {
                a.set_block(0, 0, self.get(Ws(WsForm::A)));
                a.set_block(0, 2 * n, &self.get(Ih).scaled(half).add_scaled(self.get(KspN), -one));
                let mut lower = self.half_ih_t().add_scaled(self.get(KfpN), one);
                let mut wf = self.get(Wf).clone();
                if formulation == Formulation::BurtonMiller {
                    lower = lower.add_scaled(self.get(VfN), beta);
                    let bm = self.get(Mass).scaled(half).add_scaled(self.get(Kf), -one);
                    wf = wf.add_scaled(&bm, beta);
                }
                a.set_block(2 * n, 0, &lower.scaled(eta));
                a.set_block(2 * n, 2 * n, &wf);
            }
            Formulation::Indirect => {
                a.set_block(0, 0, &self.get(Ws(WsForm::A)).add_scaled(self.get(NVfN), -eta));
                a.set_block(0, 2 * n, &self.get(NKf).add_scaled(self.get(KspN), -one));
                a.set_block(2 * n, 0, &self.get(KfpN).add_scaled(self.get(NKs), -one));
                a.set_block(2 * n, 2 * n, &self.get(Wf).scaled(one / eta).add_scaled(self.get(NVsN), -one));
            }
        }
        a
    }

    /// System matrix only, for determinant sweeps.
    pub fn matrix(&self, formulation: Formulation, beta: Option<Complex64>) -> CMatrix {
        self.build(formulation, beta.unwrap_or_else(|| default_beta(&self.material)))
    }

    /// Complete system with right-hand side for `wave`.
    pub fn system(
        &self,
        mesh: &BoundaryMesh,
        wave: &PlaneWave,
        formulation: Formulation,
        beta: Option<Complex64>,
    ) -> Result<BlockSystem> {
        use OperatorKind::*;
        let beta = beta.unwrap_or_else(|| default_beta(&self.material));
        if formulation == Formulation::BurtonMiller && beta.im == 0.0 {
            return Err(BemError::param(
                "beta",
                "Burton-Miller coupling needs a non-zero imaginary part (Im beta != 0) for unique solvability",
            ));
        }
        let n = self.n;
        let (b1, b2) = incident_data(mesh, wave);
        let one = Complex64::new(1.0, 0.0);
        let half = Complex64::new(0.5, 0.0);
        let mut rhs = Vec::with_capacity(3 * n);
        match formulation {
            Formulation::Direct | Formulation::BurtonMiller => {
                let top = self.get(Ih).scaled(-half).add_scaled(self.get(KspN), one).matvec(&b1);
                let mut low = self.half_ih_t().add_scaled(self.get(KfpN), one);
                if formulation == Formulation::BurtonMiller {
                    low = low.add_scaled(self.get(VfN), beta);
                }
                rhs.extend(top);
                rhs.extend(low.matvec(&b2));
            }
            Formulation::Indirect => {
                let ih = self.get(Ih);
                rhs.extend(ih.matvec(&b1).into_iter().map(|v| -v));
                let inv_eta = 1.0 / self.material.eta;
                rhs.extend(ih.transpose().matvec(&b2).into_iter().map(|v| v * inv_eta));
            }
        }
        Ok(BlockSystem {
            formulation,
            matrix: self.build(formulation, beta),
            rhs,
            beta: (formulation == Formulation::BurtonMiller).then_some(beta),
            unknown_semantics: if formulation == Formulation::Indirect {
                UnknownSemantics::Densities
            } else {
                UnknownSemantics::Traces
            },
            n,
            omega: self.material.omega,
        })
    }
}

/// Nodal incident pressure `b1` and interleaved nodal gradient `b2`.
pub fn incident_data(mesh: &BoundaryMesh, wave: &PlaneWave) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut b1 = Vec::with_capacity(mesh.len());
    let mut b2 = Vec::with_capacity(2 * mesh.len());
    for &x in &mesh.nodes {
        let (p, _, g) = incident_trace(wave, x, [1.0, 0.0]);
        b1.push(p);
        b2.extend(g);
    }
    (b1, b2)
}

pub fn build_direct(mesh: &BoundaryMesh, material: &MaterialSystem, wave: &PlaneWave) -> Result<BlockSystem> {
    Blocks::assemble(mesh, material, &[Formulation::Direct], QuadratureConfig::default(), Execution::default())
        .system(mesh, wave, Formulation::Direct, None)
}

pub fn build_indirect(mesh: &BoundaryMesh, material: &MaterialSystem, wave: &PlaneWave) -> Result<BlockSystem> {
    Blocks::assemble(mesh, material, &[Formulation::Indirect], QuadratureConfig::default(), Execution::default())
        .system(mesh, wave, Formulation::Indirect, None)
}

pub fn build_burton_miller(
    mesh: &BoundaryMesh,
    material: &MaterialSystem,
    wave: &PlaneWave,
    beta: Complex64,
) -> Result<BlockSystem> {
    if beta.im == 0.0 {
        return Err(BemError::param(
            "beta",
            "Burton-Miller coupling needs a non-zero imaginary part (Im beta != 0) for unique solvability",
        ));
    }
    Blocks::assemble(mesh, material, &[Formulation::BurtonMiller], QuadratureConfig::default(), Execution::default())
        .system(mesh, wave, Formulation::BurtonMiller, Some(beta))
}

/// LU solve of the row/column equilibrated system.
pub fn solve(system: &BlockSystem) -> Result<SolveReport> {
    let a = &system.matrix;
    let n = a.rows;
    let rs: Vec<f64> = (0..n)
        .map(|i| {
            let m = a.row(i).iter().map(|v| v.norm()).fold(0.0, f64::max);
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect();
    let mut cs = vec![0.0f64; n];
    for i in 0..n {
        for (c, v) in cs.iter_mut().zip(a.row(i)) {
            *c = c.max(v.norm() * rs[i]);
        }
    }
    for c in cs.iter_mut() {
        *c = if *c > 0.0 { 1.0 / *c } else { 1.0 };
    }
    let scaled = CMatrix::from_fn(n, n, |i, j| a[(i, j)] * (rs[i] * cs[j]));
    let lu = lu_factor(&scaled);
    let (pivot, row) = lu.min_relative_pivot;
    if pivot < PIVOT_TOLERANCE {
        return Err(BemError::NearSingular { omega: system.omega, row, pivot });
    }
    let b: Vec<Complex64> = system.rhs.iter().zip(&rs).map(|(v, s)| v * s).collect();
    let mut y = lu.solve(&b);
    for _ in 0..REFINEMENT_STEPS {
        let ay = scaled.matvec(&y);
        let r: Vec<Complex64> = b.iter().zip(&ay).map(|(u, v)| u - v).collect();
        let dy = lu.solve(&r);
        for (v, d) in y.iter_mut().zip(dy) {
            *v += d;
        }
    }
    let x: Vec<Complex64> = y.iter().zip(&cs).map(|(v, s)| v * s).collect();
    let residual = relative_residual(a, &x, &system.rhs);
    let cond = lu.condition_estimate();
    let nn = system.n;
    let vec_part: Vec<[Complex64; 2]> = (0..nn).map(|i| [x[2 * i], x[2 * i + 1]]).collect();
    let scal_part = x[2 * nn..].to_vec();
    let solution = match system.unknown_semantics {
        UnknownSemantics::Traces => Solution::Traces(TraceSolution { u_nodes: vec_part, p_nodes: scal_part }),
        UnknownSemantics::Densities => {
            Solution::Densities(DensitySolution { v_nodes: vec_part, psi_nodes: scal_part })
        }
    };
    Ok(SolveReport {
        solution,
        raw: x,
        relative_residual: residual,
        condition_estimate: cond,
        min_relative_pivot: pivot,
        condition_warning: cond > CONDITION_WARNING,
    })
}

/// One sweep sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub omega: f64,
    pub logdet: f64,
}

/// `ln |det|` of the system matrix of each formulation on `omega_grid`.
/// One assembly per frequency is shared by all requested formulations.
pub fn logdet_sweep_multi(
    formulations: &[Formulation],
    template: &MaterialTemplate,
    mesh: &BoundaryMesh,
    omega_grid: &[f64],
    beta_of: impl Fn(&MaterialSystem) -> Complex64 + Sync + Send,
    quadrature: QuadratureConfig,
    exec: Execution,
) -> Result<Vec<Vec<SweepPoint>>> {
    if omega_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(BemError::param("omega_grid", "must be strictly ascending"));
    }
    let materials = omega_grid.iter().map(|&w| template.at(w)).collect::<Result<Vec<_>>>()?;
    // Frequencies run in parallel; each assembly is then sequential.
    let inner = if exec.is_parallel() { Execution::Sequential } else { exec };
    let rows = map_indices(exec, materials.len(), |i| {
        let m = &materials[i];
        let blocks = Blocks::assemble(mesh, m, formulations, quadrature, inner);
        formulations
            .iter()
            .map(|&f| {
                let a = blocks.matrix(f, Some(beta_of(m)));
                SweepPoint { omega: m.omega, logdet: lu_factor(&a).log_abs_det() }
            })
            .collect::<Vec<_>>()
    });
    Ok((0..formulations.len()).map(|k| rows.iter().map(|r| r[k]).collect()).collect())
}

pub fn logdet_sweep(
    formulation: Formulation,
    template: &MaterialTemplate,
    mesh: &BoundaryMesh,
    omega_grid: &[f64],
) -> Result<Vec<SweepPoint>> {
    Ok(logdet_sweep_multi(
        &[formulation],
        template,
        mesh,
        omega_grid,
        default_beta,
        QuadratureConfig::default(),
        Execution::default(),
    )?
    .remove(0))
}

/// Evenly spaced grid including both ends (up to rounding of the step).
pub fn omega_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(BemError::param("step", format!("must be positive, got {step}")));
    }
    if !(hi > lo) || !(lo > 0.0) {
        return Err(BemError::param("omega_range", format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| lo + i as f64 * step).collect())
}

/// Half-width of the median window of the dip rule.
pub const DIP_WINDOW: f64 = 0.2;
/// Required depth below the window median: two decades, in natural log.
pub fn dip_depth() -> f64 {
    2.0 * std::f64::consts::LN_10
}

/// Grid points that are local minima lying at least [`dip_depth`] below
/// the median of `logdet` over `omega +- DIP_WINDOW`.
pub fn find_dips(sweep: &[SweepPoint]) -> Vec<SweepPoint> {
    let depth = dip_depth();
    let mut out = Vec::new();
    for i in 1..sweep.len().saturating_sub(1) {
        let p = sweep[i];
        if !(p.logdet < sweep[i - 1].logdet && p.logdet < sweep[i + 1].logdet) {
            continue;
        }
        let mut window: Vec<f64> = sweep
            .iter()
            .filter(|q| (q.omega - p.omega).abs() <= DIP_WINDOW + 1e-12)
            .map(|q| q.logdet)
            .collect();
        window.sort_by(f64::total_cmp);
        let median = window[window.len() / 2];
        if p.logdet <= median - depth {
            out.push(p);
        }
    }
    out
}

/// Depth of the deepest local minimum within `tol` of `omega`, measured
/// below the window median (natural log units); `None` without a minimum.
pub fn dip_depth_near(sweep: &[SweepPoint], omega: f64, tol: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 1..sweep.len().saturating_sub(1) {
        let p = sweep[i];
        if (p.omega - omega).abs() > tol + 1e-12 {
            continue;
        }
        if !(p.logdet < sweep[i - 1].logdet && p.logdet < sweep[i + 1].logdet) {
            continue;
        }
        let mut window: Vec<f64> = sweep
            .iter()
            .filter(|q| (q.omega - p.omega).abs() <= DIP_WINDOW + 1e-12)
            .map(|q| q.logdet)
            .collect();
        window.sort_by(f64::total_cmp);
        let depth = window[window.len() / 2] - p.logdet;
        best = Some(best.map_or(depth, |b: f64| b.max(depth)));
    }
    best
}
