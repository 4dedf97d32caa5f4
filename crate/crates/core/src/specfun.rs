//! Cylindrical Bessel functions of real argument.
//!
//! `J_n`, `Y_n` and `H_n^(1) = J_n + i Y_n` for integer order `n >= 0` and
//! positive real argument. Three regimes are used for the order-0/1 pair:
//!
//! * `x <= SERIES_MAX`: ascending power series,
//! * `SERIES_MAX < x <= ASYMPTOTIC_MIN`: Miller's backward recurrence for
//!   `J`, normalised with `J_0 + 2 sum J_2k = 1`, and Neumann series for `Y`,
//! * `x > ASYMPTOTIC_MIN`: Hankel's asymptotic expansion.
//!
//! Higher orders of `J` come from the same backward recurrence; `Y_n` is
//! obtained by forward recurrence, which is stable for the second kind.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::SpecFunError;

/// Upper end of the ascending-series regime. Beyond this the alternating
/// terms of the `Y_0` series cost more than two digits of cancellation.
pub const SERIES_MAX: f64 = 5.0;

/// Lower end of the asymptotic regime. At `x = 25` the smallest term of the
/// Hankel expansion is below `1e-20`, so the truncation error is negligible.
pub const ASYMPTOTIC_MIN: f64 = 25.0;

/// Below this argument `Y_n` is refused: the boundary element code never
/// evaluates Bessel functions of the second kind this close to the origin.
pub const Y_MIN_ARGUMENT: f64 = 1e-8;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Values of `J_n`, `Y_n`, `H_n^(1)` and their first derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylFunEval {
    pub order: u32,
    pub argument: f64,
    pub j: f64,
    pub y: f64,
    pub h1: Complex64,
    pub dj: f64,
    pub dy: f64,
    pub dh1: Complex64,
}

/// `J_n(x)`, `Y_n(x)`, `H_n^(1)(x)` and derivatives for `n >= 0`, `x > 0`.
///
/// Negative orders are rejected; use `J_{-n} = (-1)^n J_n` at the call site.
pub fn bessel_jy(n: i32, x: f64) -> Result<CylFunEval, SpecFunError> {
    if n < 0 {
        return Err(SpecFunError::NegativeOrder(n));
    }
    check_argument(x)?;
    let order = n as u32;
    let nu = order as usize;
    let js = bessel_j_array(nu + 1, x)?;
    let ys = bessel_y_array(nu + 1, x)?;
    let (j, y) = (js[nu], ys[nu]);
    // J_n' = J_{n-1} - (n/x) J_n, and J_0' = -J_1.
    let (dj, dy) = if nu == 0 {
        (-js[1], -ys[1])
    } else {
        let r = nu as f64 / x;
        (js[nu - 1] - r * j, ys[nu - 1] - r * y)
    };
    Ok(CylFunEval {
        order,
        argument: x,
        j,
        y,
        h1: Complex64::new(j, y),
        dj,
        dy,
        dh1: Complex64::new(dj, dy),
    })
}

fn check_argument(x: f64) -> Result<(), SpecFunError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::NonPositiveArgument(x));
    }
    if x < Y_MIN_ARGUMENT {
        return Err(SpecFunError::ArgumentTooSmall(x));
    }
    Ok(())
}

/// `[J_0(x), ..., J_nmax(x)]`.
pub fn bessel_j_array(nmax: usize, x: f64) -> Result<Vec<f64>, SpecFunError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::NonPositiveArgument(x));
    }
    Ok(miller_j(nmax, x))
}

/// `[Y_0(x), ..., Y_nmax(x)]` by forward recurrence.
pub fn bessel_y_array(nmax: usize, x: f64) -> Result<Vec<f64>, SpecFunError> {
    check_argument(x)?;
    let [_, _, y0, y1] = j0_j1_y0_y1(x);
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(y0);
    if nmax >= 1 {
        out.push(y1);
    }
    for k in 1..nmax {
        let next = 2.0 * k as f64 / x * out[k] - out[k - 1];
        out.push(next);
    }
    Ok(out)
}

/// `H_0^(1)(x)` and `H_1^(1)(x)`; the hot path of every kernel evaluation.
///
/// No small-argument guard: kernels switch to their own log-split series
/// long before `x` gets near zero.
#[inline]
pub fn hankel01(x: f64) -> (Complex64, Complex64) {
    let [j0, j1, y0, y1] = j0_j1_y0_y1(x);
    (Complex64::new(j0, y0), Complex64::new(j1, y1))
}

/// `[J_0, J_1, Y_0, Y_1]` at `x > 0`, dispatched by regime.
pub fn j0_j1_y0_y1(x: f64) -> [f64; 4] {
    if x <= SERIES_MAX {
        ascending_series01(x)
    } else if x <= ASYMPTOTIC_MIN {
        miller_neumann01(x)
    } else {
        hankel_asymptotic01(x)
    }
}

fn ascending_series01(x: f64) -> [f64; 4] {
    let q = 0.25 * x * x;
    let half = 0.5 * x;
    let log_term = (half).ln() + EULER_GAMMA;

    // J0 = sum (-q)^m / (m!)^2, J1 = (x/2) sum (-q)^m / (m! (m+1)!)
    // Y0 = (2/pi)[(ln(x/2)+g) J0 + sum_{m>=1} (-1)^{m+1} H_m q^m / (m!)^2]
    // Y1 = -2/(pi x) + (2/pi) ln(x/2) J1
    //      - (1/pi)(x/2) sum (-q)^m (psi(m+1) + psi(m+2)) / (m! (m+1)!)
    let mut j0 = 0.0;
    let mut j1 = 0.0;
    let mut y0_sum = 0.0;
    let mut y1_sum = 0.0;
    let mut t0 = 1.0; // (-q)^m / (m!)^2
    let mut t1 = 1.0; // (-q)^m / (m! (m+1)!)
    let mut harmonic = 0.0; // H_m
    for m in 0..60usize {
        let mf = m as f64;
        if m > 0 {
            t0 *= -q / (mf * mf);
            t1 *= -q / (mf * (mf + 1.0));
            harmonic += 1.0 / mf;
        }
        j0 += t0;
        j1 += t1;
        if m > 0 {
            y0_sum -= harmonic * t0;
        }
        // psi(m+1) + psi(m+2) = 2 H_m + 1/(m+1) - 2 gamma
        y1_sum += t1 * (2.0 * harmonic + 1.0 / (mf + 1.0) - 2.0 * EULER_GAMMA);
        if t0.abs() < 1e-18 * j0.abs().max(1e-300) && m > 2 {
            break;
        }
    }
    j1 *= half;
    let y0 = 2.0 / PI * (log_term * j0 + y0_sum);
    let y1 = -2.0 / (PI * x) + 2.0 / PI * half.ln() * j1 - half / PI * y1_sum;
    [j0, j1, y0, y1]
}

/// Starting order for the backward recurrence so that the discarded tail is
/// far below double precision.
fn miller_start(nmax: usize, x: f64) -> usize {
    let base = (nmax as f64).max(x);
    let m = base + 20.0 + (40.0 * base).sqrt();
    let m = m.ceil() as usize;
    m + (m % 2)
}

/// Miller's algorithm: backward recurrence from a large even order and
/// normalisation by `J_0 + 2 sum_k J_2k = 1`.
fn miller_j(nmax: usize, x: f64) -> Vec<f64> {
    let start = miller_start(nmax, x);
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-280;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        let prev = k as f64 * two_over_x * vals[k] - vals[k + 1];
        vals[k - 1] = prev;
        if prev.abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let mut norm = vals[0];
    for k in (2..=start).step_by(2) {
        norm += 2.0 * vals[k];
    }
    vals.truncate(nmax + 1);
    vals.resize(nmax + 1, 0.0);
    for v in vals.iter_mut() {
        *v /= norm;
    }
    vals
}

fn miller_neumann01(x: f64) -> [f64; 4] {
    // Single backward sweep accumulating the normalisation and both Neumann
    // sums on the fly, so the hot path never allocates.
    //   Y0 = (2/pi)(ln(x/2)+g) J0 - (4/pi) sum_{k>=1} (-1)^k J_2k / k
    //   Y1 = -2/(pi x) J0 + (2/pi)(ln(x/2)+g-1) J1
    //        - (2/pi) sum_{k>=1} (-1)^k (2k+1) J_{2k+1} / (k (k+1))
    let start = miller_start(1, x);
    let two_over_x = 2.0 / x;
    let mut next = 0.0;
    let mut cur = 1e-280;
    let mut norm = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut j1 = 0.0;
    // cur holds the unnormalised J_m for m = start, start-1, ..., 0
    let mut m = start;
    loop {
        if m % 2 == 0 {
            if m > 0 {
                let k = (m / 2) as f64;
                let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
                norm += 2.0 * cur;
                s0 += sign * cur / k;
            }
        } else {
            let k = ((m - 1) / 2) as f64;
            if m >= 3 {
                let sign = if ((m - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                s1 += sign * (2.0 * k + 1.0) * cur / (k * (k + 1.0));
            }
            if m == 1 {
                j1 = cur;
            }
        }
        if m == 0 {
            norm += cur;
            break;
        }
        let prev = m as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        m -= 1;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            s0 *= 1e-250;
            s1 *= 1e-250;
            j1 *= 1e-250;
        }
    }
    let j0 = cur / norm;
    let j1 = j1 / norm;
    let (s0, s1) = (s0 / norm, s1 / norm);
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let y0 = 2.0 / PI * log_term * j0 - 4.0 / PI * s0;
    let y1 = -2.0 / (PI * x) * j0 + 2.0 / PI * (log_term - 1.0) * j1 - 2.0 / PI * s1;
    [j0, j1, y0, y1]
}

/// Hankel's expansion `H_nu(x) ~ sqrt(2/(pi x)) (P + iQ) exp(i(x - nu pi/2 - pi/4))`.
fn hankel_asymptotic01(x: f64) -> [f64; 4] {
    let (p0, q0) = asymptotic_pq(0.0, x);
    let (p1, q1) = asymptotic_pq(1.0, x);
    let amp = (2.0 / (PI * x)).sqrt();
    let chi0 = x - FRAC_PI_4;
    let chi1 = x - 3.0 * FRAC_PI_4;
    let (s0, c0) = chi0.sin_cos();
    let (s1, c1) = chi1.sin_cos();
    [
        amp * (p0 * c0 - q0 * s0),
        amp * (p1 * c1 - q1 * s1),
        amp * (p0 * s0 + q0 * c0),
        amp * (p1 * s1 + q1 * c1),
    ]
}

fn asymptotic_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60usize {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // terms alternate between Q (k odd) and P (k even) with sign (-1)^{floor(k/2)}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

/// All roots of `J_n'` in `[lo, hi]`, sorted ascending, refined to `1e-10`.
///
/// Roots are bracketed on a grid finer than half the minimal spacing of
/// consecutive derivative zeros and polished by bisection.
pub fn find_bessel_derivative_zeros(n: u32, lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) || hi <= 0.0 {
        return Vec::new();
    }
    let lo = lo.max(1e-6);
    let f = |x: f64| derivative_j(n, x);
    let steps = (((hi - lo) / 0.05).ceil() as usize).max(8);
    let dx = (hi - lo) / steps as f64;
    let mut roots = Vec::new();
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=steps {
        let b = if i == steps { hi } else { lo + i as f64 * dx };
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(bisect(&f, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        roots.push(a);
    }
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    roots
}

fn derivative_j(n: u32, x: f64) -> f64 {
    let js = miller_j(n as usize + 1, x);
    if n == 0 {
        -js[1]
    } else {
        js[n as usize - 1] - n as f64 / x * js[n as usize]
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_y0_at_one() {
        let e = bessel_jy(0, 1.0).unwrap();
        assert!((e.j - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((e.y - 0.088_256_964_215_676_96).abs() < 1e-15);
        assert_eq!(e.h1, Complex64::new(e.j, e.y));
    }

    #[test]
    fn regimes_agree_at_switch_points() {
        for &x in &[SERIES_MAX, ASYMPTOTIC_MIN] {
            let lo = if x == SERIES_MAX { ascending_series01(x) } else { hankel_asymptotic01(x) };
            let mid = miller_neumann01(x);
            for k in 0..4 {
                assert!((lo[k] - mid[k]).abs() < 5e-14, "x={x} k={k}: {} vs {}", lo[k], mid[k]);
            }
        }
    }

    #[test]
    fn small_argument_limit() {
        let e = bessel_jy(0, 1e-7).unwrap();
        assert!((e.j - 1.0).abs() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(bessel_jy(-1, 1.0), Err(SpecFunError::NegativeOrder(-1))));
        assert!(matches!(bessel_jy(0, 0.0), Err(SpecFunError::NonPositiveArgument(_))));
        assert!(matches!(bessel_jy(0, -2.0), Err(SpecFunError::NonPositiveArgument(_))));
        assert!(matches!(bessel_jy(2, 1e-9), Err(SpecFunError::ArgumentTooSmall(_))));
    }

    #[test]
    fn first_zero_of_j1() {
        let e = bessel_jy(1, 3.831_705_970_2).unwrap();
        assert!(e.j.abs() < 1e-9);
    }

    #[test]
    fn derivative_zero_examples() {
        let z = find_bessel_derivative_zeros(1, 5.0, 6.0);
        assert_eq!(z.len(), 1);
        assert!((z[0] - 5.3314).abs() < 5e-5);
        let z = find_bessel_derivative_zeros(0, 6.5, 7.5);
        assert_eq!(z.len(), 1);
        assert!((z[0] - 7.0156).abs() < 5e-5);
        assert!(find_bessel_derivative_zeros(5, 0.1, 1.0).is_empty());
        assert!(find_bessel_derivative_zeros(1, 3.0, 3.0).is_empty());
    }
}
