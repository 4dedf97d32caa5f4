//! Galerkin matrices of the boundary integral operators.
//!
//! All operators requested together are assembled in one pass over panel
//! pairs: kernels are evaluated once per quadrature point pair and every
//! operator accumulates its own local block. Arclength derivatives of the
//! hats are panel constants `-1/h` and `+1/h`, so each local block is
//! assembled from four moments
//!
//! ```text
//! s0[i][j] = sum w K0 phi_i(x) phi_j(y)     s1[i] = sum w K1 phi_i(x)
//! s2[j]    = sum w K2 phi_j(y)              s3    = sum w K3
//! ```
//!
//! and combined as `s0 + s1 dphi_j + s2 dphi_i + s3 dphi_i dphi_j`, where
//! `K1` multiplies the derivative of the trial hat, `K2` that of the test
//! hat and `K3` both.
//!
//! Panel pairs are classified by shared nodes. Coincident panels reduce to
//! a one-dimensional integral in the offset `u = s - t` on a graded rule;
//! adjacent panels use a Duffy split at the shared corner with a graded
//! radial rule; separated pairs use tensor Gauss rules whose order drops
//! with distance.

use num_complex::Complex64;
use std::io::Write;
use std::ops::{Add, AddAssign, Mul};

use crate::error::{BemError, Result};
use crate::kernels::{KernelBundle, PointKernels};
use crate::linalg::CMatrix;
use crate::material::MaterialSystem;
use crate::mesh::BoundaryMesh;
use crate::parallel::{map_indices, Execution};
use crate::quadrature::{gauss_legendre, graded_rule, Rule};

const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The two regularised displays of the elastic hypersingular operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WsForm {
    /// Trial-derivative form with the `2 mu^2 k_s^2 A E` term.
    A,
    /// Form with the test derivative on `A grad_y R n_y^T`.
    B,
}

impl std::str::FromStr for WsForm {
    type Err = BemError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(WsForm::A),
            "B" | "b" => Ok(WsForm::B),
            other => Err(BemError::param("form", format!("unknown Ws form `{other}`, expected A or B"))),
        }
    }
}

/// Operator kinds. Rows belong to the test function, columns to the trial
/// function; vector unknowns are interleaved `(x, y)` per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// `gamma_k`, N x N.
    Vf,
    /// `d gamma_k / d n_y`, N x N.
    Kf,
    /// `d gamma_k / d n_x`, N x N.
    Kfp,
    /// Regularised fluid hypersingular operator, N x N.
    Wf,
    /// `E`, 2N x 2N.
    Vs,
    /// Elastic double layer, 2N x 2N.
    Ks,
    /// Adjoint elastic double layer, 2N x 2N.
    Ksp,
    /// Regularised elastic hypersingular operator, 2N x 2N.
    Ws(WsForm),
    /// Zero-order terms of `Ws` only (no hat derivatives).
    WsZeroOrder(WsForm),
    /// `int phi_j n phi_i`, 2N x N.
    Ih,
    /// `int phi_j phi_i`, N x N.
    Mass,
    /// Vector mass matrix, 2N x 2N.
    MassVec,
    /// `(n_x . n_y) gamma_k`, N x N.
    VfNormal,
    /// `n_x gamma_k n_y^T`, 2N x 2N.
    NVfN,
    /// `Ksp` applied to `n_y` times a scalar, 2N x N.
    KspN,
    /// `n_x d gamma_k / d n_y`, 2N x N.
    NKf,
    /// `d gamma_k / d n_x n_y^T`, N x 2N.
    KfpN,
    /// `gamma_k n_y^T`, N x 2N.
    VfN,
    /// `n_x^T` times the `Ks` kernel, N x 2N.
    NKs,
    /// `n_x^T E n_y`, N x N.
    NVsN,
}

impl OperatorKind {
    /// Rows and columns per node.
    pub fn shape(self) -> (usize, usize) {
        use OperatorKind::*;
        match self {
            Vf | Kf | Kfp | Wf | Mass | VfNormal | NVsN => (1, 1),
            Vs | Ks | Ksp | Ws(_) | WsZeroOrder(_) | MassVec | NVfN => (2, 2),
            Ih | KspN | NKf => (2, 1),
            KfpN | VfN | NKs => (1, 2),
        }
    }

    fn is_elastic(self) -> bool {
        use OperatorKind::*;
        matches!(self, Vs | Ks | Ksp | Ws(_) | WsZeroOrder(_) | KspN | NKs | NVsN)
    }

    fn is_local(self) -> bool {
        matches!(self, OperatorKind::Ih | OperatorKind::Mass | OperatorKind::MassVec)
    }

    pub fn name(self) -> String {
        match self {
            OperatorKind::Ws(f) => format!("Ws{f:?}"),
            OperatorKind::WsZeroOrder(f) => format!("Ws{f:?}0"),
            other => format!("{other:?}"),
        }
    }
}

/// Quadrature orders and grading used for each panel-pair class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss order for separated pairs closer than `mid_distance`.
    pub near_order: usize,
    pub mid_order: usize,
    pub far_order: usize,
    /// Midpoint distance thresholds in units of the larger panel length.
    pub mid_distance: f64,
    pub far_distance: f64,
    pub coincident_levels: usize,
    pub coincident_order: usize,
    pub adjacent_levels: usize,
    pub adjacent_radial_order: usize,
    pub adjacent_angular_order: usize,
    /// Grading ratio shared by the coincident and adjacent rules.
    pub grading: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            near_order: 8,
            mid_order: 6,
            far_order: 4,
            mid_distance: 3.0,
            far_distance: 6.0,
            coincident_levels: 30,
            coincident_order: 8,
            adjacent_levels: 12,
            adjacent_radial_order: 6,
            adjacent_angular_order: 8,
            grading: 0.5,
        }
    }
}

impl QuadratureConfig {
    /// Uniform high order everywhere; used as a reference in tests.
    pub fn high_accuracy() -> Self {
        Self {
            near_order: 16,
            mid_order: 16,
            far_order: 16,
            coincident_levels: 40,
            coincident_order: 12,
            adjacent_levels: 30,
            adjacent_radial_order: 10,
            adjacent_angular_order: 16,
            ..Self::default()
        }
    }
}

/// Assembled Galerkin matrix with its provenance.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub data: CMatrix,
    pub n: usize,
    pub omega: f64,
    pub quadrature: QuadratureConfig,
}

impl OperatorMatrix {
    /// Text dump: header `# kind=<k> N=<n> omega=<w> rows=<r> cols=<c>`,
    /// then one `re im` pair per line in row-major order.
    pub fn dump(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(
            out,
            "# kind={} N={} omega={:.17e} rows={} cols={}",
            self.kind.name(),
            self.n,
            self.omega,
            self.data.rows,
            self.data.cols
        )?;
        for v in &self.data.data {
            writeln!(out, "{:.17e} {:.17e}", v.re, v.im)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct M2([[Complex64; 2]; 2]);

impl AddAssign for M2 {
    #[inline]
    fn add_assign(&mut self, o: M2) {
        for i in 0..2 {
            for j in 0..2 {
                self.0[i][j] += o.0[i][j];
            }
        }
    }
}

impl Add for M2 {
    type Output = M2;
    #[inline]
    fn add(mut self, o: M2) -> M2 {
        self += o;
        self
    }
}

impl Mul<f64> for M2 {
    type Output = M2;
    #[inline]
    fn mul(self, s: f64) -> M2 {
        let a = self.0;
        M2([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }
}

impl M2 {
    #[inline]
    fn scalar(c: Complex64) -> M2 {
        M2([[c, CZERO], [CZERO, c]])
    }
    #[inline]
    fn outer(a: [Complex64; 2], b: [f64; 2]) -> M2 {
        M2([[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]])
    }
    #[inline]
    fn outer_rc(a: [f64; 2], b: [Complex64; 2]) -> M2 {
        M2([[b[0] * a[0], b[1] * a[0]], [b[0] * a[1], b[1] * a[1]]])
    }
    #[inline]
    fn scale(self, c: Complex64) -> M2 {
        let a = self.0;
        M2([[a[0][0] * c, a[0][1] * c], [a[1][0] * c, a[1][1] * c]])
    }
    /// `A M`.
    #[inline]
    fn rot_left(self) -> M2 {
        let a = self.0;
        M2([[-a[1][0], -a[1][1]], [a[0][0], a[0][1]]])
    }
    /// `M A`.
    #[inline]
    fn rot_right(self) -> M2 {
        let a = self.0;
        M2([[a[0][1], -a[0][0]], [a[1][1], -a[1][0]]])
    }
    /// `M v` as a column.
    #[inline]
    fn col(self, v: [f64; 2]) -> M2 {
        let a = self.0;
        M2([[a[0][0] * v[0] + a[0][1] * v[1], CZERO], [a[1][0] * v[0] + a[1][1] * v[1], CZERO]])
    }
    /// `v^T M` as a row.
    #[inline]
    fn row(self, v: [f64; 2]) -> M2 {
        let a = self.0;
        M2([[a[0][0] * v[0] + a[1][0] * v[1], a[0][1] * v[0] + a[1][1] * v[1]], [CZERO, CZERO]])
    }
}

/// Weights of one quadrature point pair.
struct Coefs {
    w: f64,
    c0: [[f64; 2]; 2],
    cx: [f64; 2],
    cy: [f64; 2],
}

impl Coefs {
    #[inline]
    fn new(w: f64, s: f64, t: f64) -> Self {
        let px = [1.0 - s, s];
        let py = [1.0 - t, t];
        Coefs {
            w,
            c0: [[w * px[0] * py[0], w * px[0] * py[1]], [w * px[1] * py[0], w * px[1] * py[1]]],
            cx: [w * px[0], w * px[1]],
            cy: [w * py[0], w * py[1]],
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Mom {
    s0: [[M2; 2]; 2],
    s1: [M2; 2],
    s2: [M2; 2],
    s3: M2,
}

impl Mom {
    #[inline]
    fn add0(&mut self, k: M2, c: &Coefs) {
        for i in 0..2 {
            for j in 0..2 {
                self.s0[i][j] += k * c.c0[i][j];
            }
        }
    }
    #[inline]
    fn add1(&mut self, k: M2, c: &Coefs) {
        self.s1[0] += k * c.cx[0];
        self.s1[1] += k * c.cx[1];
    }
    #[inline]
    fn add2(&mut self, k: M2, c: &Coefs) {
        self.s2[0] += k * c.cy[0];
        self.s2[1] += k * c.cy[1];
    }
    #[inline]
    fn add3(&mut self, k: M2, c: &Coefs) {
        self.s3 += k * c.w;
    }

    fn finish(&self, dx: [f64; 2], dy: [f64; 2]) -> [[M2; 2]; 2] {
        let mut out = [[M2::default(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut v = self.s0[i][j];
                v += self.s1[i] * dy[j];
                v += self.s2[j] * dx[i];
                v += self.s3 * (dx[i] * dy[j]);
                out[i][j] = v;
            }
        }
        out
    }
}

/// Geometry of one panel pair.
struct PairGeo {
    n_x: [f64; 2],
    n_y: [f64; 2],
    ndotn: f64,
    /// `n_x . t_y`
    ndott: f64,
}

struct Integrand<'a> {
    bundle: &'a KernelBundle,
    kinds: &'a [OperatorKind],
    elastic: bool,
}

impl Integrand<'_> {
    #[inline]
    fn accumulate(&self, moms: &mut [Mom], d: [f64; 2], geo: &PairGeo, c: &Coefs) {
        let pk = self.bundle.point(d, geo.n_x, geo.n_y, self.elastic);
        for (mom, &kind) in moms.iter_mut().zip(self.kinds) {
            self.add_kind(mom, kind, &pk, geo, c);
        }
    }

    #[inline]
    fn add_kind(&self, mom: &mut Mom, kind: OperatorKind, pk: &PointKernels, geo: &PairGeo, c: &Coefs) {
        use OperatorKind::*;
        let m = &self.bundle.material;
        let (nx, ny) = (geo.n_x, geo.n_y);
        let one = |z: Complex64| M2([[z, CZERO], [CZERO, CZERO]]);
        match kind {
            Vf => mom.add0(one(pk.gk), c),
            Kf => mom.add0(one(pk.dgk_ny), c),
            Kfp => mom.add0(one(pk.dgk_nx), c),
            VfNormal => mom.add0(one(pk.gk * geo.ndotn), c),
            Wf => {
                mom.add3(one(pk.gk), c);
                mom.add0(one(pk.gk * (-m.k * m.k * geo.ndotn)), c);
            }
            Vs => mom.add0(M2(pk.e), c),
            Ks => {
                let (k0, k1) = ks_kernels(pk, m, ny);
                mom.add0(k0, c);
                mom.add1(k1, c);
            }
            NKs => {
                let (k0, k1) = ks_kernels(pk, m, ny);
                mom.add0(k0.row(nx), c);
                mom.add1(k1.row(nx), c);
            }
            Ksp => {
                let (k0, k2) = ksp_kernels(pk, m, nx);
                mom.add0(k0, c);
                mom.add2(k2, c);
            }
            KspN => {
                let (k0, k2) = ksp_kernels(pk, m, nx);
                mom.add0(k0.col(ny), c);
                mom.add2(k2.col(ny), c);
            }
            Ws(form) | WsZeroOrder(form) => {
                let zero_only = matches!(kind, WsZeroOrder(_));
                let mu = m.mu;
                let ks2 = m.k_s * m.k_s;
                let ng = M2::outer([nx[0].into(), nx[1].into()], ny).scale(pk.r);
                let sign = if form == WsForm::A { -1.0 } else { 1.0 };
                let mut k0 = ng
                    .add(M2::scalar(-pk.gs * geo.ndotn))
                    .add(M2::scalar(pk.gs * (sign * geo.ndott)).rot_left())
                    * (mu * ks2);
                if form == WsForm::A {
                    k0 += M2(pk.e).rot_left() * (2.0 * mu * mu * ks2 * geo.ndott);
                }
                mom.add0(k0, c);
                if zero_only {
                    return;
                }
                let k3 = M2(pk.e) * (4.0 * mu * mu) + M2::scalar(pk.gp * (-4.0 * mu * mu / (m.lambda + 2.0 * mu)));
                mom.add3(k3, c);
                let nx_grad = M2::outer_rc(nx, pk.grad_x_r);
                let mut k1 = nx_grad.rot_right() * (2.0 * mu);
                match form {
                    WsForm::A => {
                        let grad_nx = M2::outer(pk.grad_x_r, nx);
                        k1 += grad_nx.rot_left() * (-2.0 * mu);
                    }
                    WsForm::B => {
                        // -2 mu A grad_y R n_y^T with grad_y R = -grad_x R
                        let grad_ny = M2::outer(pk.grad_x_r, ny);
                        mom.add2(grad_ny.rot_left() * (2.0 * mu), c);
                    }
                }
                mom.add1(k1, c);
            }
            NVfN => mom.add0(M2::outer([pk.gk * nx[0], pk.gk * nx[1]], ny), c),
            NKf => mom.add0(M2([[pk.dgk_ny * nx[0], CZERO], [pk.dgk_ny * nx[1], CZERO]]), c),
            KfpN => mom.add0(M2([[pk.dgk_nx * ny[0], pk.dgk_nx * ny[1]], [CZERO, CZERO]]), c),
            VfN => mom.add0(M2([[pk.gk * ny[0], pk.gk * ny[1]], [CZERO, CZERO]]), c),
            NVsN => mom.add0(one(M2(pk.e).col(ny).row(nx).0[0][0]), c),
            Ih | Mass | MassVec => {}
        }
    }
}

/// `Ks` kernel: zero-order part and the part multiplying the trial derivative.
#[inline]
fn ks_kernels(pk: &PointKernels, m: &MaterialSystem, ny: [f64; 2]) -> (M2, M2) {
    // d gamma_s / d n_y I - grad_y R n_y^T, grad_y R = -grad_x R
    let k0 = M2::scalar(pk.dgs_ny).add(M2::outer(pk.grad_x_r, ny));
    let f = M2(pk.e) * (2.0 * m.mu) + M2::scalar(-pk.gs);
    (k0, f.rot_right())
}

/// `Ks'` kernel: zero-order part and the part multiplying the test derivative.
#[inline]
fn ksp_kernels(pk: &PointKernels, m: &MaterialSystem, nx: [f64; 2]) -> (M2, M2) {
    let k0 = (M2::outer_rc(nx, pk.grad_x_r) * -1.0).add(M2::scalar(pk.dgs_nx));
    let f = M2(pk.e) * (2.0 * m.mu) + M2::scalar(-pk.gs);
    (k0, f.rot_left() * -1.0)
}

/// Precomputed rules for every pair class.
struct Rules {
    near: Rule,
    mid: Rule,
    far: Rule,
    coincident: Rule,
    coincident_t: Rule,
    adjacent_radial: Rule,
    adjacent_angular: Rule,
}

impl Rules {
    fn new(cfg: &QuadratureConfig) -> Self {
        Self {
            near: gauss_legendre(cfg.near_order),
            mid: gauss_legendre(cfg.mid_order),
            far: gauss_legendre(cfg.far_order),
            coincident: graded_rule(cfg.coincident_levels, cfg.grading, cfg.coincident_order),
            coincident_t: gauss_legendre(2),
            adjacent_radial: graded_rule(cfg.adjacent_levels, cfg.grading, cfg.adjacent_radial_order),
            adjacent_angular: gauss_legendre(cfg.adjacent_angular_order),
        }
    }
}

/// Multi-operator assembler for one mesh and one frequency.
pub struct Assembler<'a> {
    mesh: &'a BoundaryMesh,
    bundle: KernelBundle,
    cfg: QuadratureConfig,
    exec: Execution,
}

impl<'a> Assembler<'a> {
    pub fn new(mesh: &'a BoundaryMesh, material: &MaterialSystem) -> Self {
        Self { mesh, bundle: KernelBundle::new(material), cfg: QuadratureConfig::default(), exec: Execution::default() }
    }

    pub fn with_quadrature(mut self, cfg: QuadratureConfig) -> Self {
        self.cfg = cfg;
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Assembles every kind in `kinds`, in order.
    pub fn assemble(&self, kinds: &[OperatorKind]) -> Vec<OperatorMatrix> {
        let n = self.mesh.len();
        let mut mats: Vec<CMatrix> = kinds
            .iter()
            .map(|k| {
                let (r, c) = k.shape();
                CMatrix::zeros(r * n, c * n)
            })
            .collect();
        for (kind, mat) in kinds.iter().zip(mats.iter_mut()) {
            if kind.is_local() {
                self.assemble_local(*kind, mat);
            }
        }
        let pair_kinds: Vec<OperatorKind> = kinds.iter().copied().filter(|k| !k.is_local()).collect();
        let slots: Vec<usize> = kinds.iter().enumerate().filter(|(_, k)| !k.is_local()).map(|(i, _)| i).collect();
        if !pair_kinds.is_empty() {
            let integrand = Integrand {
                bundle: &self.bundle,
                kinds: &pair_kinds,
                elastic: pair_kinds.iter().any(|k| k.is_elastic()),
            };
            let rules = Rules::new(&self.cfg);
            // Batches bound the memory held by local blocks.
            let batch = 32usize;
            let mut start = 0;
            while start < n {
                let end = (start + batch).min(n);
                let blocks = map_indices(self.exec, end - start, |off| {
                    let a = start + off;
                    (0..n).map(|b| self.pair_blocks(&integrand, &rules, a, b)).collect::<Vec<_>>()
                });
                for (off, row) in blocks.into_iter().enumerate() {
                    let a = start + off;
                    for (b, locals) in row.into_iter().enumerate() {
                        for (local, &slot) in locals.iter().zip(&slots) {
                            scatter(&mut mats[slot], kinds[slot].shape(), n, a, b, local);
                        }
                    }
                }
                start = end;
            }
        }
        let omega = self.bundle.material.omega;
        kinds
            .iter()
            .zip(mats)
            .map(|(&kind, data)| OperatorMatrix { kind, data, n, omega, quadrature: self.cfg })
            .collect()
    }

    pub fn assemble_one(&self, kind: OperatorKind) -> OperatorMatrix {
        self.assemble(&[kind]).pop().expect("one matrix")
    }

    fn assemble_local(&self, kind: OperatorKind, mat: &mut CMatrix) {
        let n = self.mesh.len();
        for a in 0..n {
            let h = self.mesh.seg_length[a];
            let nrm = self.mesh.seg_normal[a];
            let nodes = [a, (a + 1) % n];
            for i in 0..2 {
                for j in 0..2 {
                    let m = if i == j { h / 3.0 } else { h / 6.0 };
                    let (r, c) = (nodes[i], nodes[j]);
                    match kind {
                        OperatorKind::Mass => mat[(r, c)] += m,
                        OperatorKind::MassVec => {
                            mat[(2 * r, 2 * c)] += m;
                            mat[(2 * r + 1, 2 * c + 1)] += m;
                        }
                        OperatorKind::Ih => {
                            mat[(2 * r, c)] += m * nrm[0];
                            mat[(2 * r + 1, c)] += m * nrm[1];
                        }
                        _ => unreachable!("not a local operator"),
                    }
                }
            }
        }
    }

    fn pair_blocks(&self, f: &Integrand, rules: &Rules, a: usize, b: usize) -> Vec<[[M2; 2]; 2]> {
        let mesh = self.mesh;
        let n = mesh.len();
        let (ha, hb) = (mesh.seg_length[a], mesh.seg_length[b]);
        let (n_x, n_y) = (mesh.seg_normal[a], mesh.seg_normal[b]);
        let t_y = mesh.seg_tangent[b];
        let geo = PairGeo {
            n_x,
            n_y,
            ndotn: n_x[0] * n_y[0] + n_x[1] * n_y[1],
            ndott: n_x[0] * t_y[0] + n_x[1] * t_y[1],
        };
        let mut moms = vec![Mom::default(); f.kinds.len()];
        let pa = mesh.nodes[mesh.segments[a].0];
        let pb = mesh.nodes[mesh.segments[b].0];
        let ea = [mesh.nodes[mesh.segments[a].1][0] - pa[0], mesh.nodes[mesh.segments[a].1][1] - pa[1]];
        let eb = [mesh.nodes[mesh.segments[b].1][0] - pb[0], mesh.nodes[mesh.segments[b].1][1] - pb[1]];
        let jac = ha * hb;
        if a == b {
            // x - y = (s - t) e_a; integrate over u = |s - t| with both signs.
            for (&u, &wu) in rules.coincident.nodes.iter().zip(&rules.coincident.weights) {
                let len = 1.0 - u;
                let d = [u * ea[0], u * ea[1]];
                for (&tt, &wt) in rules.coincident_t.nodes.iter().zip(&rules.coincident_t.weights) {
                    let t = tt * len;
                    let w = wu * wt * len * jac;
                    f.accumulate(&mut moms, d, &geo, &Coefs::new(w, t + u, t));
                    f.accumulate(&mut moms, [-d[0], -d[1]], &geo, &Coefs::new(w, t, t + u));
                }
            }
        } else if (a + 1) % n == b || (b + 1) % n == a {
            // Shared corner c; sigma measures distance from c on each panel.
            let a_ends_at_c = (a + 1) % n == b;
            // direction from c into each panel, scaled by panel length
            let (va, vb) = if a_ends_at_c { ([-ea[0], -ea[1]], eb) } else { (ea, [-eb[0], -eb[1]]) };
            let local_s = |sig: f64| if a_ends_at_c { 1.0 - sig } else { sig };
            let local_t = |sig: f64| if a_ends_at_c { sig } else { 1.0 - sig };
            for (&rho, &wr) in rules.adjacent_radial.nodes.iter().zip(&rules.adjacent_radial.weights) {
                for (&v, &wv) in rules.adjacent_angular.nodes.iter().zip(&rules.adjacent_angular.weights) {
                    let w = wr * wv * rho * jac;
                    // triangle sigma_a >= sigma_b
                    let (s1, s2) = (rho, rho * v);
                    let d = [s1 * va[0] - s2 * vb[0], s1 * va[1] - s2 * vb[1]];
                    f.accumulate(&mut moms, d, &geo, &Coefs::new(w, local_s(s1), local_t(s2)));
                    // triangle sigma_b >= sigma_a
                    let (s1, s2) = (rho * v, rho);
                    let d = [s1 * va[0] - s2 * vb[0], s1 * va[1] - s2 * vb[1]];
                    f.accumulate(&mut moms, d, &geo, &Coefs::new(w, local_s(s1), local_t(s2)));
                }
            }
        } else {
            let ma = [pa[0] + 0.5 * ea[0], pa[1] + 0.5 * ea[1]];
            let mb = [pb[0] + 0.5 * eb[0], pb[1] + 0.5 * eb[1]];
            let dist = (ma[0] - mb[0]).hypot(ma[1] - mb[1]) / ha.max(hb);
            let rule = if dist < self.cfg.mid_distance {
                &rules.near
            } else if dist < self.cfg.far_distance {
                &rules.mid
            } else {
                &rules.far
            };
            let base = [pa[0] - pb[0], pa[1] - pb[1]];
            for (&s, &ws) in rule.nodes.iter().zip(&rule.weights) {
                for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
                    let d = [base[0] + s * ea[0] - t * eb[0], base[1] + s * ea[1] - t * eb[1]];
                    f.accumulate(&mut moms, d, &geo, &Coefs::new(ws * wt * jac, s, t));
                }
            }
        }
        let dx = [-1.0 / ha, 1.0 / ha];
        let dy = [-1.0 / hb, 1.0 / hb];
        moms.iter().map(|m| m.finish(dx, dy)).collect()
    }
}

fn scatter(mat: &mut CMatrix, shape: (usize, usize), n: usize, a: usize, b: usize, local: &[[M2; 2]; 2]) {
    let (rd, cd) = shape;
    let ra = [a, (a + 1) % n];
    let cb = [b, (b + 1) % n];
    for i in 0..2 {
        for j in 0..2 {
            let blk = &local[i][j].0;
            for r in 0..rd {
                for c in 0..cd {
                    mat[(ra[i] * rd + r, cb[j] * cd + c)] += blk[r][c];
                }
            }
        }
    }
}

pub fn assemble_vf(mesh: &BoundaryMesh, material: &MaterialSystem) -> OperatorMatrix {
    Assembler::new(mesh, material).assemble_one(OperatorKind::Vf)
}

pub fn assemble_kf(mesh: &BoundaryMesh, material: &MaterialSystem) -> OperatorMatrix {
    Assembler::new(mesh, material).assemble_one(OperatorKind::Kf)
}

pub fn assemble_kfp(mesh: &BoundaryMesh, material: &MaterialSystem) -> OperatorMatrix {
    Assembler::new(mesh, material).assemble_one(OperatorKind::Kfp)
}

pub fn assemble_wf(mesh: &BoundaryMesh, material: &MaterialSystem) -> OperatorMatrix {
    Assembler::new(mesh, material).assemble_one(OperatorKind::Wf)
}

pub fn assemble_vs(mesh: &BoundaryMesh, material: &MaterialSystem) -> OperatorMatrix {
    Assembler::new(mesh, material).assemble_one(OperatorKind::Vs)
}

pub fn assemble_ks(mesh: &BoundaryMesh, material: &MaterialSystem) -> OperatorMatrix {
    Assembler::new(mesh, material).assemble_one(OperatorKind::Ks)
}

pub fn assemble_ksp(mesh: &BoundaryMesh, material: &MaterialSystem) -> OperatorMatrix {
    Assembler::new(mesh, material).assemble_one(OperatorKind::Ksp)
}

pub fn assemble_ws(mesh: &BoundaryMesh, material: &MaterialSystem, form: WsForm) -> OperatorMatrix {
    Assembler::new(mesh, material).assemble_one(OperatorKind::Ws(form))
}

/// `Ws` with the form given by name (`"A"` or `"B"`).
pub fn assemble_ws_named(mesh: &BoundaryMesh, material: &MaterialSystem, form: &str) -> Result<OperatorMatrix> {
    Ok(assemble_ws(mesh, material, form.parse()?))
}

pub fn assemble_ih(mesh: &BoundaryMesh) -> OperatorMatrix {
    let mut data = CMatrix::zeros(2 * mesh.len(), mesh.len());
    let dummy = crate::material::derive_wavenumbers(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).expect("valid constants");
    Assembler::new(mesh, &dummy).assemble_local(OperatorKind::Ih, &mut data);
    OperatorMatrix { kind: OperatorKind::Ih, data, n: mesh.len(), omega: f64::NAN, quadrature: QuadratureConfig::default() }
}
