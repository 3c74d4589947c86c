//! Operator families: resolvent solves `(νM - A)x = y` at complex frequency `ν = λ^α`.

use num_complex::Complex64;

use crate::error::Result;

mod dense;
mod periodic;
mod schrodinger;

pub use dense::DenseOperator;
pub use periodic::{compact_symbols, PeriodicCompactFd3d};
pub use schrodinger::{tbc_roots, SchrodingerTbc1d};

/// A (possibly frequency-dependent) linear operator pencil `νM - A(ν)`.
///
/// `solve` must be callable concurrently from many threads.
pub trait OperatorFamily: Send + Sync {
    fn dim(&self) -> usize;

    /// Sector angle θ₁ inside which contours may be placed.
    fn theta1_hint(&self) -> f64;

    fn has_mass(&self) -> bool;

    /// Real `M` and `A`, so that conjugate frequencies give conjugate solutions.
    fn is_real(&self) -> bool;

    /// Solves `(νM - A(ν)) x = y`.
    fn solve(&self, nu: Complex64, y: &[Complex64]) -> Result<Vec<Complex64>>;

    fn apply_mass(&self, x: &[Complex64]) -> Vec<Complex64>;

    /// Applies the frequency-independent part of `A` (for boundary-closed families,
    /// the interior stencil with zero extension).
    fn apply_operator(&self, x: &[Complex64]) -> Vec<Complex64>;

    /// `(νM - A(ν)) x`, including any frequency-dependent closure.
    fn apply_pencil(&self, nu: Complex64, x: &[Complex64]) -> Vec<Complex64> {
        let m = self.apply_mass(x);
        let a = self.apply_operator(x);
        m.iter().zip(&a).map(|(mi, ai)| nu * mi - ai).collect()
    }
}

pub(crate) fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// SplitMix64, used for reproducible random probe vectors.
pub(crate) struct SplitMix(u64);

impl SplitMix {
    pub(crate) fn new(seed: u64) -> Self {
        SplitMix(seed)
    }

    pub(crate) fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Largest observed `|ν| ||solve(ν, y)|| / ||M y||` over the sample frequencies
/// and a few random unit vectors each: an empirical resolvent constant.
pub fn sector_probe(family: &dyn OperatorFamily, samples: &[Complex64]) -> Result<f64> {
    let n = family.dim();
    let mut rng = SplitMix::new(0x5EC7_0E);
    let mut worst = 0.0f64;
    for &nu in samples {
        for _ in 0..3 {
            let mut y: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5))
                .collect();
            let ny = norm2(&y);
            y.iter_mut().for_each(|z| *z /= ny);
            let x = family.solve(nu, &y)?;
            let my = norm2(&family.apply_mass(&y));
            worst = worst.max(nu.norm() * norm2(&x) / my);
        }
    }
    Ok(worst)
}
