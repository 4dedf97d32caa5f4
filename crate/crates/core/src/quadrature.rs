//! One-dimensional quadrature rules on `[0, 1]`.
//!
//! * [`gauss_legendre`]: classical Gauss rule by Newton iteration,
//! * [`gauss_log_rule`]: Gauss rule for the weight `ln(1/t)`, built by the
//!   Stieltjes procedure on a finely discretised weight and Golub-Welsch,
//! * [`graded_rule`]: composite Gauss rule on geometrically shrinking
//!   intervals towards `t = 0`, for integrands with an endpoint singularity.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{BemError, Result};

/// Nodes and weights of a rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    /// The same rule mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let h = b - a;
        Rule {
            nodes: self.nodes.iter().map(|t| a + h * t).collect(),
            weights: self.weights.iter().map(|w| w * h).collect(),
        }
    }
}

/// `q`-point Gauss-Legendre rule on `[0, 1]`. Panics for `q == 0`.
pub fn gauss_legendre(q: usize) -> Rule {
    assert!(q > 0, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let n = q as f64;
    for i in 0..q.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(q, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[q - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[q - 1 - i] = 0.5 * w;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Smallest and largest supported order of [`gauss_log_rule`].
pub const LOG_RULE_ORDERS: std::ops::RangeInclusive<usize> = 4..=16;

/// `q`-point Gauss rule for `∫_0^1 f(t) ln(1/t) dt`, exact for polynomials
/// of degree `2q - 1`.
pub fn gauss_log_rule(q: usize) -> Result<Rule> {
    if !LOG_RULE_ORDERS.contains(&q) {
        return Err(BemError::param("q", format!("log-weighted rule supports orders 4..=16, got {q}")));
    }
    static CACHE: OnceLock<Vec<Rule>> = OnceLock::new();
    let rules = CACHE.get_or_init(|| LOG_RULE_ORDERS.map(build_log_rule).collect());
    Ok(rules[q - LOG_RULE_ORDERS.start()].clone())
}

fn build_log_rule(q: usize) -> Rule {
    // Discretise the weight: Gauss-Legendre on dyadic intervals [2^-(j+1), 2^-j].
    // Each interval is a fixed ratio away from the singularity, so 24 points
    // resolve ln(1/t) times a degree-32 polynomial to full precision.
    let base = gauss_legendre(24);
    let mut t = Vec::new();
    let mut w = Vec::new();
    for j in 0..110 {
        let b = 0.5f64.powi(j);
        let a = 0.5 * b;
        for (&x, &wx) in base.nodes.iter().zip(&base.weights) {
            let s = a + (b - a) * x;
            t.push(s);
            w.push(wx * (b - a) * (-s.ln()));
        }
    }
    // Stieltjes procedure: recurrence coefficients of the monic orthogonal
    // polynomials with respect to the discrete measure.
    let mut alpha = vec![0.0; q];
    let mut beta = vec![0.0; q];
    let mut p_prev = vec![0.0; t.len()];
    let mut p_cur = vec![1.0; t.len()];
    let mut norm_prev = 1.0;
    for k in 0..q {
        let norm: f64 = p_cur.iter().zip(&w).map(|(p, w)| w * p * p).sum();
        let moment: f64 = p_cur.iter().zip(&w).zip(&t).map(|((p, w), t)| w * t * p * p).sum();
        alpha[k] = moment / norm;
        beta[k] = if k == 0 { norm } else { norm / norm_prev };
        let next: Vec<f64> = (0..t.len())
            .map(|i| (t[i] - alpha[k]) * p_cur[i] - if k == 0 { 0.0 } else { beta[k] * p_prev[i] })
            .collect();
        p_prev = std::mem::replace(&mut p_cur, next);
        norm_prev = norm;
    }
    let offdiag: Vec<f64> = beta[1..].iter().map(|b| b.sqrt()).collect();
    let (nodes, first) = symmetric_tridiagonal_eigen(&alpha, &offdiag);
    let mut pairs: Vec<(f64, f64)> = nodes.into_iter().zip(first.into_iter().map(|v| beta[0] * v * v)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
}

/// Eigenvalues and first eigenvector components of a symmetric tridiagonal
/// matrix (implicit QL with Wilkinson shifts).
fn symmetric_tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(offdiag);
    // z holds the first row of the accumulated eigenvector matrix.
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 60, "tridiagonal eigen solver failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    (d, z)
}

/// Composite rule on `[0, 1]` graded geometrically towards 0: intervals
/// `[sigma^(j+1), sigma^j]` for `j < levels`, plus `[0, sigma^levels]`, each
/// with `q` Gauss points.
pub fn graded_rule(levels: usize, sigma: f64, q: usize) -> Rule {
    let base = gauss_legendre(q);
    let mut nodes = Vec::with_capacity((levels + 1) * q);
    let mut weights = Vec::with_capacity((levels + 1) * q);
    let mut b = 1.0;
    for _ in 0..levels {
        let a = b * sigma;
        for (&x, &w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(a + (b - a) * x);
            weights.push(w * (b - a));
        }
        b = a;
    }
    for (&x, &w) in base.nodes.iter().zip(&base.weights) {
        nodes.push(b * x);
        weights.push(w * b);
    }
    Rule { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_high_degree() {
        for q in 1..=20 {
            let r = gauss_legendre(q);
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let deg = 2 * q - 1;
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((r.integrate(|t| t.powi(deg as i32)) - exact).abs() < 1e-14, "q={q}");
        }
        let r = gauss_legendre(1);
        assert_eq!(r.nodes, vec![0.5]);
    }

    #[test]
    fn log_rule_examples() {
        for q in LOG_RULE_ORDERS {
            let r = gauss_log_rule(q).unwrap();
            assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-14, "q={q}");
            assert!((r.integrate(|t| t) - 0.25).abs() < 1e-14);
            for j in 0..2 * q {
                let exact = 1.0 / ((j + 1) as f64).powi(2);
                let got = r.integrate(|t| t.powi(j as i32));
                assert!((got - exact).abs() < 2e-14, "q={q} j={j}: {got} vs {exact}");
            }
            assert!(r.nodes.iter().all(|&t| t > 0.0 && t < 1.0));
            assert!(r.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn log_rule_rejects_unsupported_orders() {
        assert!(gauss_log_rule(3).is_err());
        assert!(gauss_log_rule(17).is_err());
    }

    #[test]
    fn graded_rule_handles_log_endpoint() {
        let r = graded_rule(36, 0.5, 10);
        assert!((r.integrate(|t| -t.ln()) - 1.0).abs() < 1e-12);
        assert!((r.integrate(|t| t * t) - 1.0 / 3.0).abs() < 1e-15);
    }
}
