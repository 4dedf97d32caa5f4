//! Exact solution for a plane wave scattered by an elastic disc, by
//! cylindrical mode expansion.
//!
//! With `theta` measured from the incident direction,
//!
//! ```text
//! p   = sum A_n H_n(k r) cos(n theta)
//! phi = sum B_n J_n(k_p r) cos(n theta),   psi = sum C_n J_n(k_s r) sin(n theta)
//! u_r = d_r phi + d_theta psi / r,         u_theta = d_theta phi / r - d_r psi
//! ```
//!
//! and `(A_n, B_n, C_n)` solve the 3x3 system [`ModeSystem`] obtained from
//! the transmission conditions on `r = R0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{BemError, Result};
use crate::material::{MaterialSystem, MaterialTemplate, PlaneWave};
use crate::specfun::{bessel_j_array, bessel_y_array, find_bessel_derivative_zeros};

type C = Complex64;

/// Default number of modes before automatic extension.
pub const DEFAULT_N_MAX: usize = 40;
/// Largest mode count the automatic extension may reach.
pub const N_MAX_LIMIT: usize = 160;
/// Required `|A_N| / max |A_n|`.
pub const TAIL_TOLERANCE: f64 = 1e-14;

/// Mode `n` of the disc problem: `en_matrix * xn = en`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSystem {
    pub n: u32,
    pub en_matrix: [[C; 3]; 3],
    pub en: [C; 3],
    /// `(A_n, B_n, C_n)` once solved.
    pub xn: Option<[C; 3]>,
}

impl ModeSystem {
    pub fn determinant(&self) -> C {
        det3(&self.en_matrix)
    }

    /// `max_i |(E x - e)_i| / max_i |e_i|`; `None` before solving.
    pub fn residual(&self) -> Option<f64> {
        let x = self.xn?;
        let scale = self.en.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let r = (0..3)
            .map(|i| ((0..3).map(|j| self.en_matrix[i][j] * x[j]).sum::<C>() - self.en[i]).norm())
            .fold(0.0, f64::max);
        Some(if scale > 0.0 { r / scale } else { r })
    }
}

fn det3(m: &[[C; 3]; 3]) -> C {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn solve3(m: &[[C; 3]; 3], b: &[C; 3]) -> [C; 3] {
    let d = det3(m);
    let mut x = [C::new(0.0, 0.0); 3];
    for (col, xc) in x.iter_mut().enumerate() {
        let mut mc = *m;
        for row in 0..3 {
            mc[row][col] = b[row];
        }
        *xc = det3(&mc) / d;
    }
    x
}

/// `J_{n-1}` with `J_{-1} = -J_1`, from an array starting at order 0.
fn lower(arr: &[f64], n: usize) -> f64 {
    if n == 0 {
        -arr[1]
    } else {
        arr[n - 1]
    }
}

fn lower_c(arr: &[C], n: usize) -> C {
    if n == 0 {
        -arr[1]
    } else {
        arr[n - 1]
    }
}

fn hankel_array(nmax: usize, x: f64) -> Result<Vec<C>> {
    let j = bessel_j_array(nmax, x)?;
    let y = bessel_y_array(nmax, x)?;
    Ok(j.into_iter().zip(y).map(|(a, b)| C::new(a, b)).collect())
}

fn neumann_factor(n: u32) -> f64 {
    if n == 0 {
        1.0
    } else {
        2.0
    }
}

fn i_pow(n: u32) -> C {
    match n % 4 {
        0 => C::new(1.0, 0.0),
        1 => C::new(0.0, 1.0),
        2 => C::new(-1.0, 0.0),
        _ => C::new(0.0, -1.0),
    }
}

/// Unsolved mode system for mode `n` on a disc of radius `r0`.
pub fn mode_matrix(n: u32, material: &MaterialSystem, r0: f64) -> Result<ModeSystem> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(BemError::param("radius", format!("must be positive, got {r0}")));
    }
    let nu = n as usize;
    let top = nu + 1;
    let (k, kp, ks, mu, eta) = (material.k, material.k_p, material.k_s, material.mu, material.eta);
    let (x, xp, xs) = (k * r0, kp * r0, ks * r0);
    let h = hankel_array(top, x)?;
    let jk = bessel_j_array(top, x)?;
    let jp = bessel_j_array(top, xp)?;
    let js = bessel_j_array(top, xs)?;
    let nf = n as f64;
    let r2 = r0 * r0;
    let z = C::new(0.0, 0.0);
    let re = |v: f64| C::new(v, 0.0);

    let e11 = -lower_c(&h, nu) + h[nu] * (nf / x);
    let e12 = eta * kp / k * (lower(&jp, nu) - nf / xp * jp[nu]);
    let e13 = eta * nf / x * js[nu];
    let e22 = 2.0 * mu * nf * kp / r0 * lower(&jp, nu) - 2.0 * mu * (nf * nf + nf) / r2 * jp[nu];
    let shear = (2.0 * mu * (nf * nf + nf) - mu * ks * ks * r2) / r2;
    let e23 = shear * js[nu] - 2.0 * mu * ks / r0 * lower(&js, nu);
    let e31 = h[nu];
    let e32 = shear * jp[nu] - 2.0 * mu * kp / r0 * lower(&jp, nu);
    let e33 = 2.0 * mu * nf * ks / r0 * lower(&js, nu) - 2.0 * mu * (nf * nf + nf) / r2 * js[nu];

    let c = i_pow(n) * neumann_factor(n);
    let e1 = c * (lower(&jk, nu) - nf / x * jk[nu]);
    let e3 = -c * jk[nu];
    Ok(ModeSystem {
        n,
        en_matrix: [[e11, re(e12), re(e13)], [z, re(e22), re(e23)], [e31, re(e32), re(e33)]],
        en: [e1, z, e3],
        xn: None,
    })
}

/// Series solution with its truncation diagnostics.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub modes: Vec<ModeSystem>,
    pub material: MaterialSystem,
    pub r0: f64,
    pub wave: PlaneWave,
    /// `|A_N| / max |A_n|` of the last retained mode.
    pub tail: f64,
}

/// Ratio below which `|det E_n(omega)|` relative to its value at
/// `omega (1 +- RESONANCE_STEP)` marks a Jones frequency.
pub const RESONANCE_RATIO: f64 = 1e-3;
pub const RESONANCE_STEP: f64 = 0.01;

fn resonance_ratio(n: u32, material: &MaterialSystem, r0: f64) -> Result<f64> {
    let d0 = mode_matrix(n, material, r0)?.determinant().norm();
    let template = material.template();
    let mut neighbour = f64::INFINITY;
    for s in [1.0 - RESONANCE_STEP, 1.0 + RESONANCE_STEP] {
        let m = template.at(material.omega * s)?;
        neighbour = neighbour.min(mode_matrix(n, &m, r0)?.determinant().norm());
    }
    Ok(d0 / neighbour)
}

/// Solves modes `0..=n_max`, extending `n_max` until the tail criterion
/// holds.
pub fn solve_oracle(material: &MaterialSystem, r0: f64, wave: &PlaneWave, n_max: usize) -> Result<OracleSolution> {
    if (wave.wavenumber - material.k).abs() > 1e-9 * material.k {
        return Err(BemError::param(
            "wave",
            format!("wavenumber {} differs from the fluid wavenumber {}", wave.wavenumber, material.k),
        ));
    }
    let mut modes: Vec<ModeSystem> = Vec::new();
    let mut target = n_max.max(1);
    loop {
        for n in modes.len()..=target {
            let mut m = mode_matrix(n as u32, material, r0)?;
            let ratio = resonance_ratio(n as u32, material, r0)?;
            if !(ratio >= RESONANCE_RATIO) {
                return Err(BemError::Resonance { n: n as u32, omega: material.omega });
            }
            let x = solve3(&m.en_matrix, &m.en);
            m.xn = Some(x.map(|v| v * wave.amplitude));
            modes.push(m);
        }
        let amax = modes.iter().map(|m| m.xn.unwrap()[0].norm()).fold(0.0, f64::max);
        let tail = modes.last().unwrap().xn.unwrap()[0].norm() / amax;
        if tail < TAIL_TOLERANCE || amax == 0.0 {
            return Ok(OracleSolution { modes, material: *material, r0, wave: *wave, tail });
        }
        if target >= N_MAX_LIMIT {
            return Err(BemError::param(
                "n_max",
                format!("series tail {tail:.2e} still above {TAIL_TOLERANCE:e} at {N_MAX_LIMIT} modes"),
            ));
        }
        target = (target * 3 / 2).min(N_MAX_LIMIT);
    }
}

/// Which field [`eval_exact`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// Scattered pressure, defined for `r >= R0`.
    PScattered,
    /// Displacement, defined for `r <= R0`.
    U,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue {
    Scalar(C),
    Vector([C; 2]),
}

/// Relative slack on the domain checks of [`eval_exact`].
const DOMAIN_SLACK: f64 = 1e-12;

/// Exact field at the polar point `(r, theta)`.
pub fn eval_exact(solution: &OracleSolution, r: f64, theta: f64, which: FieldKind) -> Result<FieldValue> {
    let r0 = solution.r0;
    match which {
        FieldKind::PScattered => {
            if r < r0 * (1.0 - DOMAIN_SLACK) {
                return Err(BemError::Domain {
                    region: "fluid",
                    detail: format!("pressure requested at r = {r} < R0 = {r0}"),
                });
            }
            Ok(FieldValue::Scalar(solution.pressure(r, theta).0))
        }
        FieldKind::U => {
            if r > r0 * (1.0 + DOMAIN_SLACK) || r < 0.0 {
                return Err(BemError::Domain {
                    region: "solid",
                    detail: format!("displacement requested at r = {r} outside [0, R0 = {r0}]"),
                });
            }
            Ok(FieldValue::Vector(solution.displacement(r, theta)))
        }
    }
}

/// Radial profiles of one mode: values and radial derivatives of
/// `u_r = a(r) cos`, `u_theta = b(r) sin`.
struct ModeProfile {
    a: C,
    b: C,
    da: C,
    db: C,
}

impl OracleSolution {
    pub fn n_max(&self) -> usize {
        self.modes.len() - 1
    }

    fn angle(&self, theta: f64) -> f64 {
        theta - self.wave.direction[1].atan2(self.wave.direction[0])
    }

    /// Scattered pressure and its radial derivative, without domain check.
    pub fn pressure(&self, r: f64, theta: f64) -> (C, C) {
        let k = self.material.k;
        let nm = self.n_max();
        let h = hankel_array(nm + 1, k * r).expect("positive argument");
        let t = self.angle(theta);
        let mut p = C::new(0.0, 0.0);
        let mut dp = C::new(0.0, 0.0);
        for (n, m) in self.modes.iter().enumerate() {
            let a = m.xn.unwrap()[0];
            let cs = (n as f64 * t).cos();
            let dh = lower_c(&h, n) - h[n] * (n as f64 / (k * r));
            p += a * h[n] * cs;
            dp += a * k * dh * cs;
        }
        (p, dp)
    }

    fn profiles(&self, r: f64) -> Vec<ModeProfile> {
        let (kp, ks) = (self.material.k_p, self.material.k_s);
        let nm = self.n_max();
        let jp = bessel_j_array(nm + 1, kp * r).expect("positive argument");
        let js = bessel_j_array(nm + 1, ks * r).expect("positive argument");
        self.modes
            .iter()
            .enumerate()
            .map(|(n, m)| {
                let [_, b, c] = m.xn.unwrap();
                let nf = n as f64;
                let (xp, xs) = (kp * r, ks * r);
                let djp = lower(&jp, n) - nf / xp * jp[n];
                let djs = lower(&js, n) - nf / xs * js[n];
                // J'' from Bessel's equation.
                let ddjp = -djp / xp - (1.0 - nf * nf / (xp * xp)) * jp[n];
                let ddjs = -djs / xs - (1.0 - nf * nf / (xs * xs)) * js[n];
                ModeProfile {
                    a: b * kp * djp + c * nf * js[n] / r,
                    b: -b * nf * jp[n] / r - c * ks * djs,
                    da: b * kp * kp * ddjp + c * nf * (ks * djs / r - js[n] / (r * r)),
                    db: -b * nf * (kp * djp / r - jp[n] / (r * r)) - c * ks * ks * ddjs,
                }
            })
            .collect()
    }

    /// Polar displacement `(u_r, u_theta)` without domain check. The centre
    /// is evaluated at a radius `1e-9 R0` along `theta`.
    pub fn displacement_polar(&self, r: f64, theta: f64) -> [C; 2] {
        let r = r.max(1e-9 * self.r0);
        let t = self.angle(theta);
        let mut ur = C::new(0.0, 0.0);
        let mut ut = C::new(0.0, 0.0);
        for (n, pr) in self.profiles(r).iter().enumerate() {
            let (s, c) = (n as f64 * t).sin_cos();
            ur += pr.a * c;
            ut += pr.b * s;
        }
        [ur, ut]
    }

    /// Cartesian displacement without domain check.
    pub fn displacement(&self, r: f64, theta: f64) -> [C; 2] {
        let [ur, ut] = self.displacement_polar(r, theta);
        let (s, c) = theta.sin_cos();
        [ur * c - ut * s, ur * s + ut * c]
    }

    /// Polar traction `(sigma_rr, sigma_rtheta)` on the circle of radius `r`.
    pub fn traction_polar(&self, r: f64, theta: f64) -> [C; 2] {
        let (lambda, mu) = (self.material.lambda, self.material.mu);
        let t = self.angle(theta);
        let mut srr = C::new(0.0, 0.0);
        let mut srt = C::new(0.0, 0.0);
        for (n, pr) in self.profiles(r).iter().enumerate() {
            let nf = n as f64;
            let (s, c) = (nf * t).sin_cos();
            let err = pr.da;
            let ett = (pr.a + nf * pr.b) / r;
            let two_ert = -nf * pr.a / r + pr.db - pr.b / r;
            srr += (lambda * (err + ett) + 2.0 * mu * err) * c;
            srt += mu * two_ert * s;
        }
        [srr, srt]
    }

    /// Exact boundary traces `(u, p)` at angle `theta` on `r = R0`.
    pub fn trace(&self, theta: f64) -> ([C; 2], C) {
        (self.displacement(self.r0, theta), self.pressure(self.r0, theta).0)
    }

    /// Largest relative violation of the two transmission conditions over
    /// `samples` equispaced boundary points: `(normal displacement,
    /// traction)`.
    pub fn transmission_residuals(&self, samples: usize) -> (f64, f64) {
        let r0 = self.r0;
        let eta = self.material.eta;
        let (mut e1, mut s1, mut e2, mut s2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in 0..samples {
            let theta = 2.0 * PI * i as f64 / samples as f64;
            let (sn, cs) = theta.sin_cos();
            let x = [r0 * cs, r0 * sn];
            let (p, dp) = self.pressure(r0, theta);
            let g = self.wave.gradient(x);
            let ptot = p + self.wave.value(x);
            let dptot = dp + g[0] * cs + g[1] * sn;
            let [ur, _] = self.displacement_polar(r0, theta);
            let [srr, srt] = self.traction_polar(r0, theta);
            e1 = e1.max((eta * ur - dptot).norm());
            s1 = s1.max(dptot.norm());
            e2 = e2.max((srr + ptot).norm().hypot(srt.norm()));
            s2 = s2.max(ptot.norm());
        }
        (e1 / s1, e2 / s2)
    }
}

/// Golden-section minimisation of a unimodal `f` on `[a, b]`.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Grid step of the Jones-frequency scan.
pub const JONES_SCAN_STEP: f64 = 0.01;
/// Required relative depth of a Jones dip.
pub const JONES_DEPTH: f64 = 1e-6;
/// Offset at which the depth of a Jones dip is measured.
pub const JONES_PROBE: f64 = 0.1;

/// Frequencies in `[lo, hi]` where some `|det E_n|`, `n <= n_max`, has a
/// zero: a scan local minimum refined by golden section and accepted when
/// it lies [`JONES_DEPTH`] below both values at `omega +- JONES_PROBE`.
pub fn find_jones_frequencies(
    template: &MaterialTemplate,
    r0: f64,
    lo: f64,
    hi: f64,
    n_max: u32,
) -> Result<Vec<f64>> {
    if !(hi > lo) {
        return Ok(Vec::new());
    }
    let lo = lo.max(1e-6);
    let logdet = |n: u32, w: f64| -> f64 {
        template
            .at(w)
            .and_then(|m| mode_matrix(n, &m, r0))
            .map(|s| s.determinant().norm().ln())
            .unwrap_or(f64::NAN)
    };
    let steps = ((hi - lo) / JONES_SCAN_STEP).ceil() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| (lo + i as f64 * JONES_SCAN_STEP).min(hi)).collect();
    let mut found: Vec<f64> = Vec::new();
    for n in 0..=n_max {
        let vals: Vec<f64> = grid.iter().map(|&w| logdet(n, w)).collect();
        for i in 1..grid.len().saturating_sub(1) {
            if !(vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1]) {
                continue;
            }
            let w = golden_section(|w| logdet(n, w), grid[i - 1], grid[i + 1], 1e-9);
            let here = logdet(n, w);
            let side = logdet(n, w - JONES_PROBE).min(logdet(n, w + JONES_PROBE));
            if here < side + JONES_DEPTH.ln() && w >= lo && w <= hi {
                found.push(w);
            }
        }
    }
    found.sort_by(f64::total_cmp);
    found.dedup_by(|a, b| (*a - *b).abs() < 1e-4);
    Ok(found)
}

/// Frequencies in `[lo, hi]` at which `J_n'(omega R0 / c) = 0` for some
/// `n <= n_max`: the interior Neumann eigenvalues of the disc for sound
/// speed `c`. Sorted, duplicates within `1e-6` merged.
pub fn find_neumann_eigenfrequencies(c: f64, r0: f64, lo: f64, hi: f64, n_max: u32) -> Vec<f64> {
    if !(hi > lo) || !(c > 0.0) || !(r0 > 0.0) {
        return Vec::new();
    }
    let scale = r0 / c;
    let mut out: Vec<f64> = (0..=n_max)
        .flat_map(|n| find_bessel_derivative_zeros(n, lo * scale, hi * scale))
        .filter(|&x| x > 1e-6)
        .map(|x| x / scale)
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    out
}

/// Neumann eigenfrequencies together with the order of the Bessel function
/// they belong to.
pub fn neumann_eigenfrequencies_by_order(c: f64, r0: f64, lo: f64, hi: f64, n_max: u32) -> Vec<(u32, f64)> {
    let scale = r0 / c;
    let mut out: Vec<(u32, f64)> = (0..=n_max)
        .flat_map(|n| {
            find_bessel_derivative_zeros(n, lo * scale, hi * scale)
                .into_iter()
                .filter(|&x| x > 1e-6)
                .map(move |x| (n, x / scale))
        })
        .collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::derive_wavenumbers;

    fn example2(omega: f64) -> MaterialSystem {
        derive_wavenumbers(1.0, 2.0, 1.0, 0.5, 1.0, omega).unwrap()
    }

    #[test]
    fn structural_zeros_are_exact() {
        let m = example2(6.0);
        for n in 0..=60 {
            let s = mode_matrix(n, &m, 1.0).unwrap();
            assert_eq!(s.en_matrix[1][0], C::new(0.0, 0.0));
            assert_eq!(s.en[1], C::new(0.0, 0.0));
            assert!(s.en_matrix.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite()));
        }
    }

    #[test]
    fn hankel_entry_spot_check() {
        let m = derive_wavenumbers(1.0, 2.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let s = mode_matrix(0, &m, 1.0).unwrap();
        assert!((s.en_matrix[2][0] - C::new(0.7651977, 0.0882570)).norm() < 1e-7);
    }

    #[test]
    fn transmission_conditions_hold() {
        let m = example2(6.0);
        let w = PlaneWave::new([1.0, 0.0], m.k).unwrap();
        let sol = solve_oracle(&m, 1.0, &w, DEFAULT_N_MAX).unwrap();
        let (r1, r2) = sol.transmission_residuals(100);
        assert!(r1 < 1e-10 && r2 < 1e-10, "{r1:e} {r2:e}");
        assert!(sol.tail < TAIL_TOLERANCE);
        for m in &sol.modes {
            assert!(m.residual().unwrap() < 1e-12);
        }
    }

    #[test]
    fn oblique_incidence_is_a_rotation() {
        let m = example2(6.0);
        let a = solve_oracle(&m, 1.0, &PlaneWave::new([1.0, 0.0], m.k).unwrap(), 40).unwrap();
        let b = solve_oracle(&m, 1.0, &PlaneWave::new([0.0, 1.0], m.k).unwrap(), 40).unwrap();
        let (pa, _) = a.pressure(1.5, 0.3);
        let (pb, _) = b.pressure(1.5, 0.3 + PI / 2.0);
        assert!((pa - pb).norm() < 1e-13);
        assert!(b.transmission_residuals(50).0 < 1e-10);
    }

    #[test]
    fn domain_is_enforced() {
        let m = example2(6.0);
        let sol = solve_oracle(&m, 1.0, &PlaneWave::new([1.0, 0.0], m.k).unwrap(), 40).unwrap();
        assert!(eval_exact(&sol, 0.5, 0.0, FieldKind::PScattered).is_err());
        assert!(eval_exact(&sol, 1.5, 0.0, FieldKind::U).is_err());
        assert!(eval_exact(&sol, 0.0, 0.0, FieldKind::U).is_ok());
        assert!(eval_exact(&sol, 1.0, 0.0, FieldKind::U).is_ok());
    }

    #[test]
    fn jones_frequency_is_a_resonance() {
        let m = example2(7.2629);
        let w = PlaneWave::new([1.0, 0.0], m.k).unwrap();
        match solve_oracle(&m, 1.0, &w, 40) {
            Err(BemError::Resonance { n: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn neumann_zeros_by_order() {
        let by = neumann_eigenfrequencies_by_order(1.0, 1.0, 5.0, 10.0, 12);
        let order_of = |w: f64| by.iter().find(|(_, v)| (v - w).abs() < 5e-4).map(|p| p.0);
        assert_eq!(order_of(5.3314), Some(1));
        assert_eq!(order_of(8.5363), Some(1));
        assert_eq!(order_of(7.0156), Some(0));
        assert_eq!(order_of(6.7061), Some(2));
        assert_eq!(order_of(9.9695), Some(2));
        assert!(find_neumann_eigenfrequencies(1.0, 1.0, 0.5, 1.8, 12).is_empty());
    }
}
