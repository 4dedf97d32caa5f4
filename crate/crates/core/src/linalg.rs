//! Dense complex matrices and LU factorisation with partial pivoting.

use num_complex::Complex64;

const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![CZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &CMatrix, s: Complex64) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect(),
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (maximum column sum).
    pub fn norm1(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Copies `block` into the sub-matrix starting at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &CMatrix) {
        for i in 0..block.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(i));
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// `PA = LU` stored in place; `perm[i]` is the original row in position `i`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    pub n: usize,
    pub lu: Vec<Complex64>,
    pub perm: Vec<usize>,
    pub sign_swaps: usize,
    /// Smallest `|u_ii| / max_j |a_ij|` met during elimination, with its row.
    pub min_relative_pivot: (f64, usize),
    /// 1-norm of the original matrix.
    pub anorm: f64,
}

/// Gaussian elimination with partial pivoting. Never fails: singular pivots
/// are recorded in `min_relative_pivot` and left for the caller to judge.
pub fn lu_factor(a: &CMatrix) -> LuFactors {
    assert_eq!(a.rows, a.cols, "LU needs a square matrix");
    let n = a.rows;
    let anorm = a.norm1();
    let row_scale: Vec<f64> = (0..n).map(|i| a.row(i).iter().map(|v| v.norm()).fold(0.0, f64::max)).collect();
    let mut lu = a.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    let mut min_rel = (f64::INFINITY, 0usize);
    for k in 0..n {
        let mut p = k;
        let mut best = lu[k * n + k].norm();
        for i in k + 1..n {
            let v = lu[i * n + k].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            swaps += 1;
        }
        let scale = row_scale[perm[k]];
        let rel = if scale > 0.0 { best / scale } else { 0.0 };
        if rel < min_rel.0 {
            min_rel = (rel, perm[k]);
        }
        if best == 0.0 {
            continue;
        }
        let inv = 1.0 / lu[k * n + k];
        let (head, tail) = lu.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n + k + 1..k * n + n];
        for row in tail.chunks_exact_mut(n) {
            let f = row[k] * inv;
            row[k] = f;
            if f == CZERO {
                continue;
            }
            for (x, &u) in row[k + 1..].iter_mut().zip(pivot_row) {
                *x -= f * u;
            }
        }
    }
    LuFactors { n, lu, perm, sign_swaps: swaps, min_relative_pivot: min_rel, anorm }
}

impl LuFactors {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: Complex64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: Complex64 = row.iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A^H x = b`.
    fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        // A = P^T L U, so A^H = U^H L^H P.
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= self.lu[k * n + i].conj() * z[k];
            }
            z[i] = s / self.lu[i * n + i].conj();
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s -= self.lu[k * n + i].conj() * z[k];
            }
            z[i] = s;
        }
        let mut x = vec![CZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    /// `ln |det A|` from the diagonal of `U`.
    pub fn log_abs_det(&self) -> f64 {
        (0..self.n).map(|i| self.lu[i * self.n + i].norm().ln()).sum()
    }

    /// Hager-Higham estimate of `||A^-1||_1 ||A||_1`.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        if (0..n).any(|i| self.lu[i * n + i] == CZERO) {
            return f64::INFINITY;
        }
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            let new_est: f64 = y.iter().map(|v| v.norm()).sum();
            let xi: Vec<Complex64> =
                y.iter().map(|v| if v.norm() > 0.0 { v / v.norm() } else { Complex64::new(1.0, 0.0) }).collect();
            let z = self.solve_adjoint(&xi);
            let (jmax, zmax) =
                z.iter().enumerate().map(|(j, v)| (j, v.norm())).fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if new_est <= est || zmax <= ztx {
                est = est.max(new_est);
                break;
            }
            est = new_est;
            x = vec![CZERO; n];
            x[jmax] = Complex64::new(1.0, 0.0);
        }
        // Higham's alternating-sign safeguard.
        let alt: Vec<Complex64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
            })
            .collect();
        let y = self.solve(&alt);
        let alt_est = 2.0 * y.iter().map(|v| v.norm()).sum::<f64>() / (3.0 * n as f64);
        est.max(alt_est) * self.anorm
    }
}

/// `||A x - b|| / ||b||` in the Euclidean norm.
pub fn relative_residual(a: &CMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
    let r = a.matvec(x);
    let num: f64 = r.iter().zip(b).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let a = CMatrix::identity(5);
        let b: Vec<_> = (0..5).map(|i| c(i as f64, -1.0)).collect();
        let lu = lu_factor(&a);
        assert_eq!(lu.solve(&b), b);
        assert!(lu.log_abs_det().abs() < 1e-15);
        assert!((lu.condition_estimate() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solve_and_determinant() {
        let a = CMatrix::from_fn(6, 6, |i, j| c(((i * 7 + j * 3) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.3) + if i == j { c(4.0, 0.0) } else { c(0.0, 0.0) });
        let x: Vec<_> = (0..6).map(|i| c(1.0, i as f64)).collect();
        let b = a.matvec(&x);
        let lu = lu_factor(&a);
        let got = lu.solve(&b);
        assert!(relative_residual(&a, &got, &b) < 1e-14);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-12);
        }
        // adjoint solve consistency
        let z = lu.solve_adjoint(&b);
        let ah = CMatrix::from_fn(6, 6, |i, j| a[(j, i)].conj());
        assert!(relative_residual(&ah, &z, &b) < 1e-13);
    }

    #[test]
    fn diagonal_condition_and_logdet() {
        let a = CMatrix::from_fn(3, 3, |i, j| if i == j { c(10f64.powi(i as i32), 0.0) } else { c(0.0, 0.0) });
        let lu = lu_factor(&a);
        assert!((lu.log_abs_det() - 3.0 * 10f64.ln()).abs() < 1e-13);
        assert!((lu.condition_estimate() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn singular_pivot_is_reported() {
        let a = CMatrix::from_fn(3, 3, |i, j| c((i + 1) as f64 * (j + 1) as f64, 0.0));
        let lu = lu_factor(&a);
        assert!(lu.min_relative_pivot.0 < 1e-13);
    }
}
