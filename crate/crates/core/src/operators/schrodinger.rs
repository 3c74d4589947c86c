use num_complex::Complex64;

use super::OperatorFamily;
use crate::contour::theta1;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Roots of `φ z² + ψ z + φ = 0` for the compact scheme applied to `ν U = iΔU`,
/// ordered `(z₁, z₂)` with `|z₁| <= |z₂|` by explicit comparison of moduli.
pub fn tbc_roots(nu: Complex64, eta: f64) -> Result<(Complex64, Complex64)> {
    let phi = nu / 12.0 - I / (eta * eta);
    let psi = nu * (5.0 / 6.0) + 2.0 * I / (eta * eta);
    if phi.norm() == 0.0 {
        return Err(Error::Solver {
            nu,
            reason: "vanishing off-diagonal coefficient".into(),
        });
    }
    let disc = (psi * psi - 4.0 * phi * phi).sqrt();
    // form the larger-magnitude root without cancellation, the other by Vieta (z₁z₂ = 1)
    let plus = -psi + disc;
    let minus = -psi - disc;
    let big = if plus.norm() >= minus.norm() { plus } else { minus } / (2.0 * phi);
    let small = 1.0 / big;
    let (z1, z2) = if small.norm() <= big.norm() {
        (small, big)
    } else {
        (big, small)
    };
    if (z1.norm() - 1.0).abs() <= 1e-10 && (z2.norm() - 1.0).abs() <= 1e-10 {
        return Err(Error::DegenerateRoots {
            nu,
            z1_abs: z1.norm(),
            z2_abs: z2.norm(),
        });
    }
    Ok((z1, z2))
}

/// Compact finite differences for `ν M u - i A u` on `[-a, a]`, closed by the
/// discrete transparent boundary condition `u_outside = z₁ u_boundary`.
#[derive(Debug, Clone)]
pub struct SchrodingerTbc1d {
    a_half: f64,
    n: usize,
    eta: f64,
    theta1: f64,
}

impl SchrodingerTbc1d {
    pub fn new(a_half: f64, n_points: usize, alpha: f64) -> Result<Self> {
        if n_points < 5 {
            return Err(Error::Config(format!("need at least 5 grid points, got {n_points}")));
        }
        if !(a_half > 0.0) {
            return Err(Error::Config(format!("domain half-width must be positive, got {a_half}")));
        }
        let theta1 = theta1(alpha, 0.0)?;
        Ok(SchrodingerTbc1d {
            a_half,
            n: n_points,
            eta: 2.0 * a_half / (n_points - 1) as f64,
            theta1,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.eta
    }

    pub fn half_width(&self) -> f64 {
        self.a_half
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.n).map(|j| -self.a_half + j as f64 * self.eta).collect()
    }

    /// Coefficients `(φ, ψ + φ z₁, ψ)`: off-diagonal, closed corner diagonal, interior diagonal.
    fn coefficients(&self, nu: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
        let e2 = self.eta * self.eta;
        let phi = nu / 12.0 - I / e2;
        let psi = nu * (5.0 / 6.0) + 2.0 * I / e2;
        let (z1, _) = tbc_roots(nu, self.eta)?;
        Ok((phi, psi + phi * z1, psi))
    }
}

/// Thomas elimination for a tridiagonal system with constant off-diagonals.
fn thomas(off: Complex64, diag: &[Complex64], rhs: &[Complex64], nu: Complex64) -> Result<Vec<Complex64>> {
    let n = diag.len();
    let mut cp = vec![Complex64::new(0.0, 0.0); n];
    let mut dp = vec![Complex64::new(0.0, 0.0); n];
    let scale = diag.iter().map(|z| z.norm()).fold(off.norm(), f64::max);
    let mut denom = diag[0];
    for i in 0..n {
        if i > 0 {
            denom = diag[i] - off * cp[i - 1];
        }
        if denom.norm() <= 1e-14 * scale {
            return Err(Error::Solver {
                nu,
                reason: format!("tridiagonal elimination broke down at row {i}"),
            });
        }
        cp[i] = off / denom;
        dp[i] = if i == 0 {
            rhs[0] / denom
        } else {
            (rhs[i] - off * dp[i - 1]) / denom
        };
    }
    let mut x = dp;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= cp[i] * next;
    }
    Ok(x)
}

impl OperatorFamily for SchrodingerTbc1d {
    fn dim(&self) -> usize {
        self.n
    }

    fn theta1_hint(&self) -> f64 {
        self.theta1
    }

    fn has_mass(&self) -> bool {
        true
    }

    fn is_real(&self) -> bool {
        false
    }

    fn solve(&self, nu: Complex64, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.n {
            return Err(Error::Config(format!(
                "right-hand side has length {}, expected {}",
                y.len(),
                self.n
            )));
        }
        let (phi, corner, psi) = self.coefficients(nu)?;
        let mut diag = vec![psi; self.n];
        diag[0] = corner;
        diag[self.n - 1] = corner;
        thomas(phi, &diag, y, nu)
    }

    fn apply_mass(&self, x: &[Complex64]) -> Vec<Complex64> {
        stencil(x, 1.0 / 12.0, 5.0 / 6.0)
    }

    /// `i A x` with `A = (1/η²)(1, -2, 1)` and zero extension outside the grid.
    fn apply_operator(&self, x: &[Complex64]) -> Vec<Complex64> {
        let e2 = self.eta * self.eta;
        stencil(x, 1.0 / e2, -2.0 / e2).into_iter().map(|z| I * z).collect()
    }

    fn apply_pencil(&self, nu: Complex64, x: &[Complex64]) -> Vec<Complex64> {
        let (phi, corner, psi) = match self.coefficients(nu) {
            Ok(c) => c,
            Err(_) => return vec![Complex64::new(f64::NAN, f64::NAN); self.n],
        };
        let n = self.n;
        (0..n)
            .map(|j| {
                let d = if j == 0 || j == n - 1 { corner } else { psi };
                let left = if j > 0 { x[j - 1] } else { Complex64::new(0.0, 0.0) };
                let right = if j + 1 < n { x[j + 1] } else { Complex64::new(0.0, 0.0) };
                phi * (left + right) + d * x[j]
            })
            .collect()
    }
}

fn stencil(x: &[Complex64], lo: f64, mid: f64) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|j| {
            let left = if j > 0 { x[j - 1] } else { Complex64::new(0.0, 0.0) };
            let right = if j + 1 < n { x[j + 1] } else { Complex64::new(0.0, 0.0) };
            x[j] * mid + (left + right) * lo
        })
        .collect()
}
