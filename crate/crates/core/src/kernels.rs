//! Fundamental solutions of the Helmholtz and time-harmonic Navier equations.
//!
//! `gamma_k(x, y) = (i/4) H_0^(1)(k |x - y|)` and
//! `E = (1/mu) gamma_ks I + (1/(rho omega^2)) grad grad R` with
//! `R = gamma_ks - gamma_kp`.
//!
//! Radial profiles are evaluated in two regimes. For `k r <= SERIES_KR` the
//! log-split expansion `sum r^(2m) (alpha_m + beta_m ln r)` is used; for `R`
//! the coefficients of the two wavenumbers are subtracted before summation,
//! so the logarithm cancels exactly and `R`, `R'` stay bounded at `r = 0`.
//! Beyond the threshold, Hankel functions and their recurrences are used.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{BemError, Result};
use crate::material::MaterialSystem;
use crate::mesh::rotate;
use crate::specfun::{hankel01, EULER_GAMMA};

/// Switch from the log-split series to Hankel functions.
pub const SERIES_KR: f64 = 2.0;
const TERMS: usize = 20;

pub type C2 = [[Complex64; 2]; 2];
pub type CVec2 = [Complex64; 2];

const CZERO: Complex64 = Complex64::new(0.0, 0.0);
const I4: Complex64 = Complex64::new(0.0, 0.25);

/// Coefficients of `r^(2m-d) (a_m + b_m ln r)` for the `d`-th derivative.
#[derive(Debug, Clone)]
struct LogSeries {
    a: [[Complex64; TERMS]; 4],
    b: [[f64; TERMS]; 4],
}

impl LogSeries {
    fn helmholtz(k: f64) -> Self {
        let half = 0.5 * k;
        let mut a = [[CZERO; TERMS]; 4];
        let mut b = [[0.0; TERMS]; 4];
        let shift = (half).ln() + EULER_GAMMA;
        let mut pow = 1.0; // (k/2)^(2m) / (m!)^2
        let mut harmonic = 0.0;
        for m in 0..TERMS {
            if m > 0 {
                pow *= half * half / (m as f64 * m as f64);
                harmonic += 1.0 / m as f64;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * pow;
            let mut alpha = I4 * c - shift * c / (2.0 * PI);
            if m > 0 {
                alpha -= Complex64::new(-sign * harmonic * pow / (2.0 * PI), 0.0);
            }
            a[0][m] = alpha;
            b[0][m] = -c / (2.0 * PI);
        }
        let mut s = Self { a, b };
        s.differentiate();
        s
    }

    fn difference(p: &Self, q: &Self) -> Self {
        let mut s = p.clone();
        for d in 0..4 {
            for m in 0..TERMS {
                s.a[d][m] = p.a[d][m] - q.a[d][m];
                s.b[d][m] = p.b[d][m] - q.b[d][m];
            }
        }
        s
    }

    fn differentiate(&mut self) {
        for d in 1..4 {
            for m in 0..TERMS {
                let e = (2 * m) as f64 - (d - 1) as f64;
                let (a, b) = (self.a[d - 1][m], self.b[d - 1][m]);
                self.a[d][m] = a * e + b;
                self.b[d][m] = e * b;
            }
        }
    }

    /// Derivatives `0..=order` at `r`.
    #[inline]
    fn eval<const D: usize>(&self, r: f64) -> [Complex64; D] {
        let rho = r * r;
        let lr = r.ln();
        let mut out = [CZERO; D];
        let mut scale = 1.0;
        for (d, slot) in out.iter_mut().enumerate() {
            let mut pa = CZERO;
            let mut pb = 0.0;
            for m in (0..TERMS).rev() {
                pa = pa * rho + self.a[d][m];
                pb = pb * rho + self.b[d][m];
            }
            *slot = (pa + pb * lr) * scale;
            scale /= r;
        }
        out
    }
}

/// Radial profile `g(r) = (i/4) H_0^(1)(k r)` and its derivatives.
#[derive(Debug, Clone)]
pub struct HelmholtzRadial {
    pub k: f64,
    series: LogSeries,
}

impl HelmholtzRadial {
    pub fn new(k: f64) -> Self {
        Self { k, series: LogSeries::helmholtz(k) }
    }

    /// `[g, g', g'']`.
    #[inline]
    pub fn eval(&self, r: f64) -> [Complex64; 3] {
        if self.k * r <= SERIES_KR {
            self.series.eval::<3>(r)
        } else {
            let (h0, h1) = hankel01(self.k * r);
            let g = I4 * h0;
            let g1 = -I4 * self.k * h1;
            [g, g1, -g1 / r - self.k * self.k * g]
        }
    }

    /// `[g, g', g'', g''']`.
    pub fn eval3(&self, r: f64) -> [Complex64; 4] {
        if self.k * r <= SERIES_KR {
            self.series.eval::<4>(r)
        } else {
            let [g, g1, g2] = self.eval(r);
            let k2 = self.k * self.k;
            [g, g1, g2, -g2 / r + g1 / (r * r) - k2 * g1]
        }
    }
}

/// Radial profile of `R = gamma_ks - gamma_kp` and derivatives.
#[derive(Debug, Clone)]
pub struct DifferenceRadial {
    pub ks: HelmholtzRadial,
    pub kp: HelmholtzRadial,
    series: LogSeries,
}

impl DifferenceRadial {
    pub fn new(k_s: f64, k_p: f64) -> Self {
        let ks = HelmholtzRadial::new(k_s);
        let kp = HelmholtzRadial::new(k_p);
        let series = LogSeries::difference(&ks.series, &kp.series);
        Self { ks, kp, series }
    }

    fn use_series(&self, r: f64) -> bool {
        self.ks.k.max(self.kp.k) * r <= SERIES_KR
    }

    /// `[R, R', R'']`.
    #[inline]
    pub fn eval(&self, r: f64) -> [Complex64; 3] {
        if self.use_series(r) {
            self.series.eval::<3>(r)
        } else {
            let s = self.ks.eval(r);
            let p = self.kp.eval(r);
            [s[0] - p[0], s[1] - p[1], s[2] - p[2]]
        }
    }

    pub fn eval3(&self, r: f64) -> [Complex64; 4] {
        if self.use_series(r) {
            self.series.eval::<4>(r)
        } else {
            let s = self.ks.eval3(r);
            let p = self.kp.eval3(r);
            [s[0] - p[0], s[1] - p[1], s[2] - p[2], s[3] - p[3]]
        }
    }

    /// Continuous extension at `r = 0`: `-(1/2 pi) ln(k_s / k_p)`.
    pub fn limit(&self) -> Complex64 {
        self.series.a[0][0]
    }
}

/// Everything the Galerkin integrands need at one point pair.
#[derive(Debug, Clone, Copy)]
pub struct PointKernels {
    pub gk: Complex64,
    pub dgk_nx: Complex64,
    pub dgk_ny: Complex64,
    pub gs: Complex64,
    pub dgs_nx: Complex64,
    pub dgs_ny: Complex64,
    pub gp: Complex64,
    pub r: Complex64,
    pub grad_x_r: CVec2,
    pub e: C2,
}

/// Kernel evaluators for one material at one frequency.
#[derive(Debug, Clone)]
pub struct KernelBundle {
    pub material: MaterialSystem,
    pub fluid: HelmholtzRadial,
    pub diff: DifferenceRadial,
}

impl KernelBundle {
    pub fn new(material: &MaterialSystem) -> Self {
        Self {
            material: *material,
            fluid: HelmholtzRadial::new(material.k),
            diff: DifferenceRadial::new(material.k_s, material.k_p),
        }
    }

    pub fn gamma(&self, k: f64, x: [f64; 2], y: [f64; 2]) -> Result<Complex64> {
        eval_gamma(k, x, y)
    }

    /// `grad_x gamma_k(x, y)`.
    pub fn grad_x_gamma(&self, k: f64, x: [f64; 2], y: [f64; 2]) -> Result<CVec2> {
        let (d, r) = separation(x, y)?;
        let g1 = HelmholtzRadial::new(k).eval(r)[1];
        Ok([g1 * (d[0] / r), g1 * (d[1] / r)])
    }

    pub fn eval_r(&self, x: [f64; 2], y: [f64; 2]) -> Complex64 {
        let d = [x[0] - y[0], x[1] - y[1]];
        let r = d[0].hypot(d[1]);
        if r == 0.0 {
            self.diff.limit()
        } else {
            self.diff.eval(r)[0]
        }
    }

    pub fn grad_x_r(&self, x: [f64; 2], y: [f64; 2]) -> CVec2 {
        let d = [x[0] - y[0], x[1] - y[1]];
        let r = d[0].hypot(d[1]);
        if r == 0.0 {
            return [CZERO; 2];
        }
        let r1 = self.diff.eval(r)[1];
        [r1 * (d[0] / r), r1 * (d[1] / r)]
    }

    /// `grad_x grad_x R`.
    pub fn hess_r(&self, x: [f64; 2], y: [f64; 2]) -> Result<C2> {
        let (d, r) = separation(x, y)?;
        let [_, r1, r2] = self.diff.eval(r);
        Ok(hessian_from_radial(d, r, r1, r2))
    }

    pub fn e(&self, x: [f64; 2], y: [f64; 2]) -> Result<C2> {
        let (d, r) = separation(x, y)?;
        let gs = self.diff.ks.eval(r)[0];
        let [_, r1, r2] = self.diff.eval(r);
        Ok(self.e_from(d, r, gs, r1, r2))
    }

    #[inline]
    fn e_from(&self, d: [f64; 2], r: f64, gs: Complex64, r1: Complex64, r2: Complex64) -> C2 {
        let m = &self.material;
        let h = hessian_from_radial(d, r, r1, r2);
        let inv_mu = 1.0 / m.mu;
        let inv_rw = 1.0 / m.rho_omega2();
        [
            [gs * inv_mu + h[0][0] * inv_rw, h[0][1] * inv_rw],
            [h[1][0] * inv_rw, gs * inv_mu + h[1][1] * inv_rw],
        ]
    }

    /// All kernels at `x - y = d` with panel normals `n_x`, `n_y`.
    /// `elastic = false` skips the solid kernels.
    #[inline]
    pub fn point(&self, d: [f64; 2], n_x: [f64; 2], n_y: [f64; 2], elastic: bool) -> PointKernels {
        let r = d[0].hypot(d[1]);
        let dh = [d[0] / r, d[1] / r];
        let dnx = dh[0] * n_x[0] + dh[1] * n_x[1];
        let dny = dh[0] * n_y[0] + dh[1] * n_y[1];
        let [gk, gk1, _] = self.fluid.eval(r);
        let mut out = PointKernels {
            gk,
            dgk_nx: gk1 * dnx,
            dgk_ny: -gk1 * dny,
            gs: CZERO,
            dgs_nx: CZERO,
            dgs_ny: CZERO,
            gp: CZERO,
            r: CZERO,
            grad_x_r: [CZERO; 2],
            e: [[CZERO; 2]; 2],
        };
        if elastic {
            let [gs, gs1, _] = self.diff.ks.eval(r);
            let gp = self.diff.kp.eval(r)[0];
            let [rv, r1, r2] = self.diff.eval(r);
            out.gs = gs;
            out.dgs_nx = gs1 * dnx;
            out.dgs_ny = -gs1 * dny;
            out.gp = gp;
            out.r = rv;
            out.grad_x_r = [r1 * dh[0], r1 * dh[1]];
            out.e = self.e_from(d, r, gs, r1, r2);
        }
        out
    }

    /// `grad_x` of each entry of `E`: `out[l][i][j] = d E_ij / d x_l`.
    pub fn grad_e(&self, x: [f64; 2], y: [f64; 2]) -> Result<[C2; 2]> {
        let (d, r) = separation(x, y)?;
        let m = &self.material;
        let gs1 = self.diff.ks.eval(r)[1];
        let [_, r1, r2, r3] = self.diff.eval3(r);
        let t = third_from_radial(d, r, r1, r2, r3);
        let dh = [d[0] / r, d[1] / r];
        let mut out = [[[CZERO; 2]; 2]; 2];
        for (l, slab) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    let mut v = t[i][j][l] / m.rho_omega2();
                    if i == j {
                        v += gs1 * dh[l] / m.mu;
                    }
                    slab[i][j] = v;
                }
            }
        }
        Ok(out)
    }
}

fn separation(x: [f64; 2], y: [f64; 2]) -> Result<([f64; 2], f64)> {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = d[0].hypot(d[1]);
    if r == 0.0 {
        Err(BemError::Singular)
    } else {
        Ok((d, r))
    }
}

/// `grad grad f` for a radial `f` with derivatives `f1`, `f2` at `r`.
#[inline]
pub fn hessian_from_radial(d: [f64; 2], r: f64, f1: Complex64, f2: Complex64) -> C2 {
    let dh = [d[0] / r, d[1] / r];
    let q = f1 / r;
    let mut h = [[CZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let rr = dh[i] * dh[j];
            let delta = if i == j { 1.0 } else { 0.0 };
            h[i][j] = f2 * rr + q * (delta - rr);
        }
    }
    h
}

/// Third partial derivatives `t[i][j][l]` of a radial function.
pub fn third_from_radial(d: [f64; 2], r: f64, f1: Complex64, f2: Complex64, f3: Complex64) -> [[[Complex64; 2]; 2]; 2] {
    let dh = [d[0] / r, d[1] / r];
    let c = (f2 - f1 / r) / r;
    let mut t = [[[CZERO; 2]; 2]; 2];
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    for i in 0..2 {
        for j in 0..2 {
            for l in 0..2 {
                let rrr = dh[i] * dh[j] * dh[l];
                let mix = delta(i, j) * dh[l] + delta(i, l) * dh[j] + delta(j, l) * dh[i] - 3.0 * rrr;
                t[i][j][l] = f3 * rrr + c * mix;
            }
        }
    }
    t
}

/// `(i/4) H_0^(1)(k |x - y|)`.
pub fn eval_gamma(k: f64, x: [f64; 2], y: [f64; 2]) -> Result<Complex64> {
    let (_, r) = separation(x, y)?;
    Ok(HelmholtzRadial::new(k).eval(r)[0])
}

/// Fundamental displacement tensor of the Navier equation.
pub fn eval_e(material: &MaterialSystem, x: [f64; 2], y: [f64; 2]) -> Result<C2> {
    KernelBundle::new(material).e(x, y)
}

/// Value of `R` at coincident points.
pub fn eval_r_limit(material: &MaterialSystem) -> Complex64 {
    Complex64::new(-(material.k_s / material.k_p).ln() / (2.0 * PI), 0.0)
}

/// The three terms of `T_x E = -n_x grad_x R^T + (d gamma_ks / d n_x) I
/// + M(d_x, n_x)[2 mu E - gamma_ks I]`, with `M = A d/ds`.
#[derive(Debug, Clone, Copy)]
pub struct TractionTerms {
    pub term_nr: C2,
    pub term_gamma_n: C2,
    pub term_m: C2,
}

impl TractionTerms {
    pub fn sum(&self) -> C2 {
        let mut s = [[CZERO; 2]; 2];
        for (i, row) in s.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.term_nr[i][j] + self.term_gamma_n[i][j] + self.term_m[i][j];
            }
        }
        s
    }
}

pub fn traction_decomposition_txe(bundle: &KernelBundle, x: [f64; 2], y: [f64; 2], n_x: [f64; 2]) -> Result<TractionTerms> {
    let (d, r) = separation(x, y)?;
    let mu = bundle.material.mu;
    let gr = bundle.grad_x_r(x, y);
    let gs1 = bundle.diff.ks.eval(r)[1];
    let dgs_nx = gs1 * ((d[0] * n_x[0] + d[1] * n_x[1]) / r);
    let t_x = rotate(n_x);
    // tangential derivative of F = 2 mu E - gamma_ks I
    let grad = bundle.grad_e(x, y)?;
    let dh = [d[0] / r, d[1] / r];
    let mut df = [[CZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut v = (grad[0][i][j] * t_x[0] + grad[1][i][j] * t_x[1]) * (2.0 * mu);
            if i == j {
                v -= gs1 * (dh[0] * t_x[0] + dh[1] * t_x[1]);
            }
            df[i][j] = v;
        }
    }
    // A = [0 -1; 1 0]
    let term_m = [[-df[1][0], -df[1][1]], [df[0][0], df[0][1]]];
    let term_nr = [[-gr[0] * n_x[0], -gr[1] * n_x[0]], [-gr[0] * n_x[1], -gr[1] * n_x[1]]];
    let term_gamma_n = [[dgs_nx, CZERO], [CZERO, dgs_nx]];
    Ok(TractionTerms { term_nr, term_gamma_n, term_m })
}

/// Traction `sigma(E e_j) n_x` of each column of `E`, straight from the
/// stress-strain law.
pub fn traction_direct_txe(bundle: &KernelBundle, x: [f64; 2], y: [f64; 2], n_x: [f64; 2]) -> Result<C2> {
    let grad = bundle.grad_e(x, y)?;
    let (lambda, mu) = (bundle.material.lambda, bundle.material.mu);
    let mut out = [[CZERO; 2]; 2];
    for j in 0..2 {
        // u_i = E_ij, du_i/dx_l = grad[l][i][j]
        let div = grad[0][0][j] + grad[1][1][j];
        for i in 0..2 {
            let mut t = div * lambda * n_x[i];
            for l in 0..2 {
                t += (grad[l][i][j] + grad[i][l][j]) * mu * n_x[l];
            }
            out[i][j] = t;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::derive_wavenumbers;
    use crate::specfun::bessel_jy;

    fn example2(omega: f64) -> MaterialSystem {
        derive_wavenumbers(1.0, 2.0, 1.0, 0.5, 1.0, omega).unwrap()
    }

    #[test]
    fn gamma_at_unit_distance() {
        let g = eval_gamma(1.0, [0.0, 0.0], [1.0, 0.0]).unwrap();
        assert!((g - Complex64::new(-0.022_064_241_053_919_24, 0.191_299_421_639_491_65)).norm() < 1e-12);
        assert!(eval_gamma(1.0, [0.5, 0.5], [0.5, 0.5]).is_err());
    }

    #[test]
    fn series_and_hankel_agree_at_switch() {
        for &k in &[0.7, 3.0, 40.0] {
            let h = HelmholtzRadial::new(k);
            let r = SERIES_KR / k;
            let s = h.series.eval::<4>(r);
            let (h0, h1) = hankel01(k * r);
            let g1 = -I4 * k * h1;
            let g2 = -g1 / r - k * k * I4 * h0;
            let g3 = -g2 / r + g1 / (r * r) - k * k * g1;
            let exact = [I4 * h0, g1, g2, g3];
            for d in 0..4 {
                let scale = exact[d].norm().max(1.0 / r.powi(d as i32));
                assert!((s[d] - exact[d]).norm() < 1e-13 * scale, "k={k} d={d}");
            }
        }
    }

    #[test]
    fn r_limit_for_unit_disc_material() {
        let m = example2(6.0);
        let lim = eval_r_limit(&m);
        assert!((lim.re + (2.5f64).sqrt().ln() / (2.0 * PI)).abs() < 1e-15);
        assert!((lim.re + 0.0729).abs() < 1e-4);
        let b = KernelBundle::new(&m);
        assert!((b.diff.limit() - lim).norm() < 1e-15);
        assert!((b.eval_r([0.0, 0.0], [1e-6, 0.0]) - lim).norm() < 1e-8);
    }

    #[test]
    fn e_is_symmetric_and_matches_definition() {
        let m = example2(6.0);
        let b = KernelBundle::new(&m);
        let (x, y) = ([0.3, -0.2], [-0.4, 0.5]);
        let e = b.e(x, y).unwrap();
        assert!((e[0][1] - e[1][0]).norm() < 1e-16);
        let e2 = b.e(y, x).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((e[i][j] - e2[i][j]).norm() < 1e-15);
            }
        }
        let r = ((0.7f64).powi(2) + 0.49).sqrt();
        let gs = (Complex64::new(0.0, 0.25)) * {
            let e = bessel_jy(0, m.k_s * r).unwrap();
            e.h1
        };
        let h = b.hess_r(x, y).unwrap();
        assert!((e[0][0] - (gs / m.mu + h[0][0] / m.rho_omega2())).norm() < 1e-13);
    }

    #[test]
    fn traction_terms_sum_to_direct_traction() {
        let m = example2(6.0);
        let b = KernelBundle::new(&m);
        let th: f64 = 0.7;
        let n_x = [th.cos(), th.sin()];
        let x = [0.1, 0.2];
        for &y in &[[0.6, 0.2], [0.1 + 0.3, 0.2 - 0.4], [-2.0, 1.0]] {
            let terms = traction_decomposition_txe(&b, x, y, n_x).unwrap();
            let direct = traction_direct_txe(&b, x, y, n_x).unwrap();
            let s = terms.sum();
            let scale = direct.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((s[i][j] - direct[i][j]).norm() < 1e-10 * scale, "{i}{j}: {} vs {}", s[i][j], direct[i][j]);
                }
            }
            let nr = terms.term_nr;
            assert!((nr[0][0] * nr[1][1] - nr[0][1] * nr[1][0]).norm() < 1e-15 * scale * scale);
        }
    }
}
