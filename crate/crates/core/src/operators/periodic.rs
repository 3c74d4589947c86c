use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::OperatorFamily;
use crate::error::{Error, Result};

/// Symbols of the 1D compact stencils at the discrete frequencies `ξ_m = 2πm/n`:
/// `a(ξ) = (2cos ξ - 2)/η²` for `(1/η²)(1, -2, 1)` and `m(ξ) = 5/6 + cos(ξ)/6`
/// for `(1/12, 5/6, 1/12)`.
pub fn compact_symbols(n: usize, eta: f64) -> (Vec<f64>, Vec<f64>) {
    (0..n)
        .map(|m| {
            let xi = 2.0 * PI * m as f64 / n as f64;
            let cs = xi.cos();
            ((2.0 * cs - 2.0) / (eta * eta), 5.0 / 6.0 + cs / 6.0)
        })
        .unzip()
}

/// Fourth-order compact finite differences for the Laplacian on the 2π-periodic
/// cube with `n` points per axis, composed as Kronecker sums:
/// `A₃ = A₁⊗M₁⊗M₁ + M₁⊗A₁⊗M₁ + M₁⊗M₁⊗A₁`, `M₃ = M₁⊗M₁⊗M₁`.
///
/// Flat index of grid point `(i, j, k)` is `(i n + j) n + k`.
pub struct PeriodicCompactFd3d {
    n: usize,
    eta: f64,
    sym_a: Vec<f64>,
    sym_m: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicCompactFd3d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicCompactFd3d").field("n", &self.n).finish()
    }
}

impl PeriodicCompactFd3d {
    pub fn new(n_per_dim: usize) -> Result<Self> {
        if n_per_dim < 4 {
            return Err(Error::Config(format!(
                "periodic grid needs at least 4 points per axis, got {n_per_dim}"
            )));
        }
        let eta = 2.0 * PI / n_per_dim as f64;
        let (sym_a, sym_m) = compact_symbols(n_per_dim, eta);
        let mut planner = FftPlanner::new();
        Ok(PeriodicCompactFd3d {
            n: n_per_dim,
            eta,
            sym_a,
            sym_m,
            forward: planner.plan_fft_forward(n_per_dim),
            inverse: planner.plan_fft_inverse(n_per_dim),
        })
    }

    pub fn n_per_dim(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.eta
    }

    /// Grid coordinate of index `i` along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.eta
    }

    fn fft3(&self, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        // innermost axis: contiguous
        for line in buf.chunks_exact_mut(n) {
            fft.process_with_scratch(line, &mut scratch);
        }
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        // middle axis
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    line[j] = buf[(i * n + j) * n + k];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for j in 0..n {
                    buf[(i * n + j) * n + k] = line[j];
                }
            }
        }
        // outer axis
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    line[i] = buf[(i * n + j) * n + k];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for i in 0..n {
                    buf[(i * n + j) * n + k] = line[i];
                }
            }
        }
    }

    /// Applies the 1D circulant stencil `(lo, mid, lo)` along every axis selected in `which`,
    /// and `M₁` along the others.
    fn stencil_product(&self, x: &[Complex64], which: [bool; 3]) -> Vec<Complex64> {
        let n = self.n;
        let inv_eta2 = 1.0 / (self.eta * self.eta);
        let mut cur = x.to_vec();
        for (axis, &use_a) in which.iter().enumerate() {
            let (lo, mid) = if use_a {
                (inv_eta2, -2.0 * inv_eta2)
            } else {
                (1.0 / 12.0, 5.0 / 6.0)
            };
            let stride = n.pow(2 - axis as u32);
            let mut next = vec![Complex64::new(0.0, 0.0); cur.len()];
            for (idx, out) in next.iter_mut().enumerate() {
                let pos = (idx / stride) % n;
                let base = idx - pos * stride;
                let left = base + ((pos + n - 1) % n) * stride;
                let right = base + ((pos + 1) % n) * stride;
                *out = cur[idx] * mid + (cur[left] + cur[right]) * lo;
            }
            cur = next;
        }
        cur
    }
}

impl OperatorFamily for PeriodicCompactFd3d {
    fn dim(&self) -> usize {
        self.n.pow(3)
    }

    fn theta1_hint(&self) -> f64 {
        PI / 2.0
    }

    fn has_mass(&self) -> bool {
        true
    }

    fn is_real(&self) -> bool {
        true
    }

    fn solve(&self, nu: Complex64, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n;
        if y.len() != self.dim() {
            return Err(Error::Config(format!(
                "right-hand side has length {}, expected {}",
                y.len(),
                self.dim()
            )));
        }
        let mut buf = y.to_vec();
        self.fft3(&mut buf, &self.forward);
        let (a, m) = (&self.sym_a, &self.sym_m);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mmm = m[i] * m[j] * m[k];
                    let asum = a[i] * m[j] * m[k] + m[i] * a[j] * m[k] + m[i] * m[j] * a[k];
                    let denom = nu * mmm - asum;
                    if denom.norm() == 0.0 {
                        return Err(Error::Solver {
                            nu,
                            reason: format!("zero symbol at frequency ({i}, {j}, {k})"),
                        });
                    }
                    buf[(i * n + j) * n + k] /= denom;
                }
            }
        }
        self.fft3(&mut buf, &self.inverse);
        let scale = 1.0 / self.dim() as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        Ok(buf)
    }

    fn apply_mass(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.stencil_product(x, [false; 3])
    }

    fn apply_operator(&self, x: &[Complex64]) -> Vec<Complex64> {
        let terms = [
            self.stencil_product(x, [true, false, false]),
            self.stencil_product(x, [false, true, false]),
            self.stencil_product(x, [false, false, true]),
        ];
        (0..x.len()).map(|i| terms[0][i] + terms[1][i] + terms[2][i]).collect()
    }
}
