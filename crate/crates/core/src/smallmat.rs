//! Dense complex linear algebra for small systems.
//!
//! Everything here is sized for the `s x s` Runge-Kutta blocks (s <= 3) and for
//! the handful of small dense operators used in tests: partial-pivoting LU,
//! closed-form eigendecomposition, principal fractional powers and a plain DFT.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Pivots smaller than this are treated as exact zeros.
pub const PIVOT_FLOOR: f64 = 1e-30;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMat {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diag(d: &[Complex64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, a: Complex64) -> Self {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * a).collect(),
        }
    }

    pub fn add(&self, other: &CMat) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMat) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Row vector times matrix: `x^T M`.
    pub fn vecmat(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![ZERO; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &m) in out.iter_mut().zip(self.row(i)) {
                *o += xi * m;
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMat) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        Self::from_fn(r, c, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn lu(&self) -> Result<LuFactor> {
        LuFactor::new(self)
    }

    pub fn inverse(&self) -> Result<CMat> {
        let lu = self.lu()?;
        let n = self.rows;
        let mut inv = CMat::zeros(n, n);
        let mut col = vec![ZERO; n];
        for j in 0..n {
            col.iter_mut().for_each(|z| *z = ZERO);
            col[j] = ONE;
            lu.solve_in_place(&mut col);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows);
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactor {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl LuFactor {
    pub fn new(a: &CMat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Config(format!(
                "LU of non-square {}x{} matrix",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(pmax >= PIVOT_FLOOR) {
                return Err(Error::Singular {
                    pivot: pmax,
                    context: format!("in LU column {k} of {n}x{n} matrix"),
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != ZERO {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= f * u;
                    }
                }
            }
        }
        Ok(LuFactor { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * y[j];
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * y[j];
            }
            y[i] = acc / self.lu[i * n + i];
        }
        b.copy_from_slice(&y);
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solves `x^T A = b^T`, i.e. `A^T x = b`.
    pub fn solve_transposed(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        // A^T = U^T L^T P, so solve U^T z = b, L^T w = z, x = P^T w.
        let mut z = b.to_vec();
        for i in 0..n {
            let mut acc = z[i];
            for j in 0..i {
                acc -= self.lu[j * n + i] * z[j];
            }
            z[i] = acc / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for j in i + 1..n {
                acc -= self.lu[j * n + i] * z[j];
            }
            z[i] = acc;
        }
        let mut x = vec![ZERO; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        x
    }

    pub fn det(&self) -> Complex64 {
        let n = self.n;
        let mut d = (0..n).map(|i| self.lu[i * n + i]).product::<Complex64>();
        // sign of the permutation
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.perm[i];
                len += 1;
            }
            if len % 2 == 0 {
                d = -d;
            }
        }
        d
    }
}

/// Solves `M X = Y` for `n x m` right-hand sides.
pub fn lu_solve(m: &CMat, y: &CMat) -> Result<CMat> {
    if m.rows != y.rows {
        return Err(Error::Config(format!(
            "lu_solve: {} rows in matrix but {} in right-hand side",
            m.rows, y.rows
        )));
    }
    let lu = m.lu()?;
    let mut x = CMat::zeros(y.rows, y.cols);
    let mut col = vec![ZERO; y.rows];
    for j in 0..y.cols {
        for i in 0..y.rows {
            col[i] = y[(i, j)];
        }
        lu.solve_in_place(&mut col);
        for i in 0..y.rows {
            x[(i, j)] = col[i];
        }
    }
    Ok(x)
}

/// Eigendecomposition `M = U diag(d) U_inv` of a small diagonalizable matrix.
#[derive(Debug, Clone)]
pub struct EigDecomp {
    pub u: CMat,
    pub d: Vec<Complex64>,
    pub u_inv: CMat,
    /// `||U||_inf * ||U_inv||_inf`.
    pub condition: f64,
    /// `||U diag(d) U_inv - M||_max / ||M||_max`.
    pub residual: f64,
}

impl EigDecomp {
    /// Decompositions with condition estimate above this are flagged.
    pub const CONDITION_LIMIT: f64 = 1e8;

    pub fn is_ill_conditioned(&self) -> bool {
        self.condition > Self::CONDITION_LIMIT
    }

    pub fn reconstruct(&self) -> CMat {
        &(&self.u * &CMat::diag(&self.d)) * &self.u_inv
    }
}

/// Coefficients `c` of the monic characteristic polynomial
/// `λ^s + c[0] λ^{s-1} + ... + c[s-1]` for `s <= 3`.
pub fn char_poly(m: &CMat) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::Config("characteristic polynomial of non-square matrix".into()));
    }
    match m.rows {
        1 => Ok(vec![-m[(0, 0)]]),
        2 => {
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            Ok(vec![-tr, det])
        }
        3 => {
            let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
            let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
                + m[(0, 0)] * m[(2, 2)]
                - m[(0, 2)] * m[(2, 0)]
                + m[(1, 1)] * m[(2, 2)]
                - m[(1, 2)] * m[(2, 1)];
            let det = m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]);
            Ok(vec![-tr, minors, -det])
        }
        n => Err(Error::Config(format!(
            "closed-form eigenvalues support s <= 3, got {n}"
        ))),
    }
}

fn poly_eval(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    // monic: x^s + c0 x^{s-1} + ...
    let mut p = ONE;
    let mut dp = ZERO;
    for &ci in c {
        dp = dp * x + p;
        p = p * x + ci;
    }
    (p, dp)
}

/// Roots of a monic polynomial of degree <= 3 given by [`char_poly`] coefficients,
/// from the quadratic/cubic formula followed by Newton polishing.
pub fn monic_roots(c: &[Complex64]) -> Vec<Complex64> {
    let mut roots = match c.len() {
        0 => vec![],
        1 => vec![-c[0]],
        2 => quadratic_roots(c[0], c[1]),
        3 => cubic_roots(c[0], c[1], c[2]),
        _ => panic!("monic_roots supports degree <= 3"),
    };
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = poly_eval(c, *r);
            if dp.norm() == 0.0 || p.norm() == 0.0 {
                break;
            }
            let next = *r - p / dp;
            if poly_eval(c, next).0.norm() < p.norm() {
                *r = next;
            } else {
                break;
            }
        }
    }
    roots
}

/// Roots of `x^2 + b x + c`.
fn quadratic_roots(b: Complex64, c: Complex64) -> Vec<Complex64> {
    let disc = (b * b - 4.0 * c).sqrt();
    let q1 = b + disc;
    let q2 = b - disc;
    let q = -0.5 * if q1.norm() >= q2.norm() { q1 } else { q2 };
    if q.norm() == 0.0 {
        return vec![ZERO, ZERO];
    }
    vec![q, c / q]
}

/// Roots of `x^3 + a x^2 + b x + c` via Cardano on the depressed cubic.
fn cubic_roots(a: Complex64, b: Complex64, c: Complex64) -> Vec<Complex64> {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let w1 = -q / 2.0 + disc;
    let w2 = -q / 2.0 - disc;
    let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
    let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    if w.norm() == 0.0 {
        // p = q = 0: triple root
        return vec![-shift; 3];
    }
    let u = w.powf(1.0 / 3.0);
    let mut out = Vec::with_capacity(3);
    let mut rot = ONE;
    for _ in 0..3 {
        let uk = u * rot;
        let vk = -p / (3.0 * uk);
        out.push(uk + vk - shift);
        rot *= omega;
    }
    out
}

/// Null vector of a rank-deficient `s x s` matrix, by Gaussian elimination with
/// complete pivoting; the smallest trailing pivot is treated as zero.
fn null_vector(b: &CMat) -> Vec<Complex64> {
    let n = b.rows;
    let mut m = b.clone();
    let mut cols: Vec<usize> = (0..n).collect();
    for k in 0..n.saturating_sub(1) {
        let mut best = (k, k, -1.0);
        for i in k..n {
            for j in k..n {
                let v = m[(i, cols[j])].norm();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let (pi, pj, pv) = best;
        if pv == 0.0 {
            break;
        }
        if pi != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(pi, j)];
                m[(pi, j)] = t;
            }
        }
        cols.swap(k, pj);
        let piv = m[(k, cols[k])];
        for i in k + 1..n {
            let f = m[(i, cols[k])] / piv;
            if f == ZERO {
                continue;
            }
            for jj in k..n {
                let t = m[(k, cols[jj])];
                m[(i, cols[jj])] -= f * t;
            }
        }
    }
    let mut x = vec![ZERO; n];
    x[cols[n - 1]] = ONE;
    for k in (0..n - 1).rev() {
        let piv = m[(k, cols[k])];
        if piv.norm() == 0.0 {
            x[cols[k]] = ONE;
            continue;
        }
        let mut acc = ZERO;
        for jj in k + 1..n {
            acc += m[(k, cols[jj])] * x[cols[jj]];
        }
        x[cols[k]] = -acc / piv;
    }
    let nrm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    x.iter().map(|z| z / nrm).collect()
}

/// Eigendecomposition of an `s x s` complex matrix, `s <= 3`.
pub fn eig_small(m: &CMat) -> Result<EigDecomp> {
    let n = m.rows;
    let coeffs = char_poly(m)?;
    let d = monic_roots(&coeffs);
    let scale = m.max_abs().max(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
    for i in 0..n {
        for j in i + 1..n {
            let gap = (d[i] - d[j]).norm();
            if !(gap >= 1e-8 * scale) {
                return Err(Error::Decomposition(format!(
                    "eigenvalues {} and {} are within {gap:e} (scale {scale:e}); perturb the input",
                    d[i], d[j]
                )));
            }
        }
    }
    let mut u = CMat::zeros(n, n);
    for (j, &lam) in d.iter().enumerate() {
        let shifted = m.sub(&CMat::identity(n).scale(lam));
        let v = null_vector(&shifted);
        for i in 0..n {
            u[(i, j)] = v[i];
        }
    }
    let u_inv = u
        .inverse()
        .map_err(|e| Error::Decomposition(format!("eigenvector matrix not invertible: {e}")))?;
    let condition = u.norm_inf() * u_inv.norm_inf();
    let mut dec = EigDecomp {
        u,
        d,
        u_inv,
        condition,
        residual: 0.0,
    };
    let mnorm = m.max_abs();
    dec.residual = if mnorm == 0.0 {
        dec.reconstruct().max_abs()
    } else {
        dec.reconstruct().sub(m).max_abs() / mnorm
    };
    Ok(dec)
}

/// Principal branch `z^alpha` of one value.
pub fn pow_principal(z: Complex64, alpha: f64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::BranchCut { value: z });
    }
    Ok(Complex64::from_polar(z.norm().powf(alpha), alpha * z.arg()))
}

/// Elementwise principal fractional power of a diagonal.
pub fn power_alpha(d: &[Complex64], alpha: f64) -> Result<Vec<Complex64>> {
    d.iter().map(|&z| pow_principal(z, alpha)).collect()
}

/// `X_j = sum_n x_n exp(sign * 2 pi i n j / J)`; radix-2 for powers of two,
/// direct summation otherwise.
pub fn dft(x: &[Complex64], sign: i32) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return vec![];
    }
    let s = if sign < 0 { -1.0 } else { 1.0 };
    if n.is_power_of_two() {
        return fft_radix2(x, s);
    }
    let twiddle: Vec<Complex64> = (0..n)
        .map(|m| Complex64::from_polar(1.0, s * 2.0 * PI * m as f64 / n as f64))
        .collect();
    (0..n)
        .map(|j| {
            let mut acc = ZERO;
            let mut idx = 0usize;
            for &xn in x {
                acc += xn * twiddle[idx];
                idx += j;
                if idx >= n {
                    idx -= n;
                }
            }
            acc
        })
        .collect()
}

fn fft_radix2(x: &[Complex64], s: f64) -> Vec<Complex64> {
    let n = x.len();
    let bits = n.trailing_zeros();
    let mut a: Vec<Complex64> = vec![ZERO; n];
    for (i, &v) in x.iter().enumerate() {
        let r = if bits == 0 {
            0
        } else {
            i.reverse_bits() >> (usize::BITS - bits)
        };
        a[r] = v;
    }
    let mut len = 2;
    while len <= n {
        let w = Complex64::from_polar(1.0, s * 2.0 * PI / len as f64);
        for start in (0..n).step_by(len) {
            let mut wk = ONE;
            for k in 0..len / 2 {
                let u = a[start + k];
                let v = a[start + k + len / 2] * wk;
                a[start + k] = u + v;
                a[start + k + len / 2] = u - v;
                wk *= w;
            }
        }
        len <<= 1;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_mat(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn eig_of_diagonal() {
        let m = CMat::diag(&[c(2.0, 0.0), c(0.0, 3.0)]);
        let e = eig_small(&m).unwrap();
        let mut d = e.d.clone();
        d.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((d[0] - c(0.0, 3.0)).norm() < 1e-14);
        assert!((d[1] - c(2.0, 0.0)).norm() < 1e-14);
        // eigenvectors are coordinate axes up to phase
        for j in 0..2 {
            let nonzero = (0..2).filter(|&i| e.u[(i, j)].norm() > 1e-12).count();
            assert_eq!(nonzero, 1);
        }
        assert!(e.residual < 1e-14);
    }

    #[test]
    fn eig_of_rotation_generator() {
        let m = CMat::from_real_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let e = eig_small(&m).unwrap();
        let mut ims: Vec<f64> = e.d.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
        assert!(e.d.iter().all(|z| z.re.abs() < 1e-14));
    }

    #[test]
    fn eig_random_3x3_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = random_mat(&mut rng, 3);
            let e = eig_small(&m).unwrap();
            assert!(e.residual <= 1e-10, "residual {}", e.residual);
        }
    }

    #[test]
    fn eig_rejects_repeated_eigenvalue() {
        let m = CMat::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        assert!(matches!(eig_small(&m), Err(Error::Decomposition(_))));
    }

    #[test]
    fn cubic_roots_match_known() {
        // (x-1)(x-2i)(x+3)
        let r = [c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)];
        let a = -(r[0] + r[1] + r[2]);
        let b = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        let cc = -(r[0] * r[1] * r[2]);
        let roots = monic_roots(&[a, b, cc]);
        for want in r {
            assert!(roots.iter().any(|z| (z - want).norm() < 1e-13));
        }
    }

    #[test]
    fn lu_identity_and_diagonal() {
        let y = CMat::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let x = lu_solve(&CMat::identity(2), &y).unwrap();
        assert_eq!(x, y);
        let d = CMat::from_real_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]);
        let x = lu_solve(&d, &CMat::from_real_rows(&[vec![2.0], vec![4.0]])).unwrap();
        assert!((x[(0, 0)] - 1.0).norm() < 1e-15 && (x[(1, 0)] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn lu_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_mat(&mut rng, 5);
            let y = CMat::from_fn(5, 3, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let x = lu_solve(&m, &y).unwrap();
            let res = (&m * &x).sub(&y).max_abs();
            let cond = m.norm_inf() * m.inverse().unwrap().norm_inf();
            assert!(res <= 1e-10 * y.max_abs() * cond.max(1.0), "res {res}");
        }
    }

    #[test]
    fn lu_transposed_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_mat(&mut rng, 4);
        let b: Vec<Complex64> = (0..4).map(|i| c(i as f64, 1.0)).collect();
        let x = m.lu().unwrap().solve_transposed(&b);
        let back = m.transpose().matvec(&x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn lu_singular_errors() {
        let m = CMat::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(m.lu(), Err(Error::Singular { .. })));
    }

    #[test]
    fn determinant_with_pivoting() {
        let m = CMat::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((m.lu().unwrap().det() + 1.0).norm() < 1e-15);
    }

    #[test]
    fn power_alpha_principal_branch() {
        let one = power_alpha(&[c(1.0, 0.0)], 0.5).unwrap();
        assert!((one[0] - 1.0).norm() < 1e-15);
        let two = power_alpha(&[c(4.0, 0.0)], 0.5).unwrap();
        assert!((two[0] - 2.0).norm() < 1e-15);
        let i_half = power_alpha(&[c(0.0, 1.0)], 0.5).unwrap();
        assert!((i_half[0] - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        assert!(power_alpha(&[c(-1.0, 0.0)], 0.5).is_err());
        assert!(power_alpha(&[c(0.0, 0.0)], 0.5).is_err());
    }

    #[test]
    fn dft_small_cases() {
        let x = dft(&[c(1.0, 0.0), ZERO, ZERO, ZERO], -1);
        assert!(x.iter().all(|z| (z - 1.0).norm() < 1e-15));
        let x = dft(&[c(1.0, 0.0), c(1.0, 0.0)], -1);
        assert!((x[0] - 2.0).norm() < 1e-15 && x[1].norm() < 1e-15);
    }

    #[test]
    fn dft_parseval_and_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &n in &[16usize, 12, 7] {
            let x: Vec<Complex64> = (0..n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let fx = dft(&x, -1);
            let e1: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            let e2: f64 = fx.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
            assert!((e1 - e2).abs() < 1e-12 * e1.max(1.0));
            let back: Vec<Complex64> = dft(&fx, 1).iter().map(|z| z / n as f64).collect();
            let err = back.iter().zip(&x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err <= 1e-12 * n as f64);
        }
    }

    #[test]
    fn radix2_matches_direct() {
        let x: Vec<Complex64> = (0..8).map(|i| c((i * i) as f64, -(i as f64))).collect();
        let fast = dft(&x, 1);
        let direct: Vec<Complex64> = (0..8)
            .map(|j| {
                (0..8)
                    .map(|n| x[n] * Complex64::from_polar(1.0, 2.0 * PI * (n * j) as f64 / 8.0))
                    .sum()
            })
            .collect();
        for (a, b) in fast.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    /// Oracle: `M^alpha = (1/2πi) ∮ z^alpha (z - M)^{-1} dz` on a circle enclosing
    /// the spectrum and avoiding the branch cut, evaluated with a fine trapezoidal rule.
    fn matrix_power_contour(m: &CMat, alpha: f64, center: f64, radius: f64) -> CMat {
        let n = m.rows();
        let pts = 4000;
        let mut acc = CMat::zeros(n, n);
        for j in 0..pts {
            let theta = 2.0 * PI * (j as f64 + 0.5) / pts as f64;
            let e = Complex64::from_polar(1.0, theta);
            let z = center + radius * e;
            let dz = Complex64::new(0.0, 1.0) * radius * e * (2.0 * PI / pts as f64);
            let res = CMat::identity(n).scale(z).sub(m).inverse().unwrap();
            let w = pow_principal(z, alpha).unwrap() * dz / Complex64::new(0.0, 2.0 * PI);
            acc = acc.add(&res.scale(w));
        }
        acc
    }

    #[test]
    fn matrix_power_matches_contour_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut checked = 0;
        while checked < 20 {
            // well-conditioned matrices with spectrum in a disc around 3
            let m = CMat::from_fn(2, 2, |i, j| {
                let base = if i == j { c(3.0, 0.0) } else { ZERO };
                base + c(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8))
            });
            let e = eig_small(&m).unwrap();
            if e.condition > 50.0 {
                continue;
            }
            let alpha = rng.gen_range(0.1..0.9);
            let pd = power_alpha(&e.d, alpha).unwrap();
            let via_eig = &(&e.u * &CMat::diag(&pd)) * &e.u_inv;
            let oracle = matrix_power_contour(&m, alpha, 3.0, 2.5);
            let err = via_eig.sub(&oracle).max_abs();
            assert!(err <= 1e-8, "err {err}");
            checked += 1;
        }
    }
}
