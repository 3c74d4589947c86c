//! Radau IIA Butcher tableaux and the stability data used by convolution quadrature.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::smallmat::{char_poly, monic_roots, CMat};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// An `s`-stage implicit Runge-Kutta scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct Tableau {
    /// Runge-Kutta matrix, row-major `s x s`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Classical order.
    pub order: u32,
    pub stage_order: u32,
}

/// Pass/fail report for the structural requirements of Runge-Kutta convolution quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssumptionReport {
    /// Weights equal the last row of the RK matrix.
    pub stiffly_accurate: bool,
    pub invertible: bool,
    /// Every eigenvalue of the RK matrix has positive real part.
    pub right_half_plane_spectrum: bool,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.stiffly_accurate && self.invertible && self.right_half_plane_spectrum
    }
}

/// Stability function value and the row vector `q(z) = b^T (Id - zA)^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stability {
    pub r: Complex64,
    pub q: Vec<Complex64>,
}

/// Radau IIA tableau with `s` stages (order `2s - 1`, stage order `s`).
pub fn radau_iia(s: usize) -> Result<Tableau> {
    let t = match s {
        1 => Tableau {
            a: vec![vec![1.0]],
            b: vec![1.0],
            c: vec![1.0],
            order: 1,
            stage_order: 1,
        },
        2 => Tableau {
            a: vec![vec![5.0 / 12.0, -1.0 / 12.0], vec![3.0 / 4.0, 1.0 / 4.0]],
            b: vec![3.0 / 4.0, 1.0 / 4.0],
            c: vec![1.0 / 3.0, 1.0],
            order: 3,
            stage_order: 2,
        },
        3 => {
            let r6 = 6f64.sqrt();
            let a = vec![
                vec![
                    (88.0 - 7.0 * r6) / 360.0,
                    (296.0 - 169.0 * r6) / 1800.0,
                    (-2.0 + 3.0 * r6) / 225.0,
                ],
                vec![
                    (296.0 + 169.0 * r6) / 1800.0,
                    (88.0 + 7.0 * r6) / 360.0,
                    (-2.0 - 3.0 * r6) / 225.0,
                ],
                vec![(16.0 - r6) / 36.0, (16.0 + r6) / 36.0, 1.0 / 9.0],
            ];
            let b = a[2].clone();
            Tableau {
                a,
                b,
                c: vec![(4.0 - r6) / 10.0, (4.0 + r6) / 10.0, 1.0],
                order: 5,
                stage_order: 3,
            }
        }
        _ => {
            return Err(Error::Config(format!(
                "Radau IIA is available for s in {{1, 2, 3}}, got {s}"
            )))
        }
    };
    Ok(t)
}

impl Tableau {
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a_matrix(&self) -> CMat {
        CMat::from_real_rows(&self.a)
    }

    /// `Id - z A`.
    pub fn stage_matrix(&self, z: Complex64) -> CMat {
        let s = self.stages();
        CMat::from_fn(s, s, |i, j| {
            let id = if i == j { ONE } else { Complex64::new(0.0, 0.0) };
            id - z * self.a[i][j]
        })
    }

    /// `r(z) = e_s^T (Id - zA)^{-1} 1` and `q(z) = b^T (Id - zA)^{-1}` from a single LU.
    pub fn stability(&self, z: Complex64) -> Result<Stability> {
        let s = self.stages();
        let lu = self.stage_matrix(z).lu().map_err(|_| Error::Pole { z })?;
        let ones = vec![ONE; s];
        let r = lu.solve(&ones)[s - 1];
        let b: Vec<Complex64> = self.b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let q = lu.solve_transposed(&b);
        Ok(Stability { r, q })
    }

    /// `r(z) = 1 + z q(z) 1`, kept for cross-checks against [`Tableau::stability`].
    pub fn stability_via_q(&self, z: Complex64) -> Result<Complex64> {
        let st = self.stability(z)?;
        Ok(ONE + z * st.q.iter().sum::<Complex64>())
    }

    /// Eigenvalues of the RK matrix from its characteristic polynomial.
    pub fn a_eigenvalues(&self) -> Result<Vec<Complex64>> {
        Ok(monic_roots(&char_poly(&self.a_matrix())?))
    }

    /// `Δ(ζ) = (A + ζ/(1-ζ) 1 b^T)^{-1}`.
    pub fn delta(&self, zeta: Complex64) -> Result<CMat> {
        if zeta == ONE {
            return Err(Error::Pole { z: zeta });
        }
        let f = zeta / (ONE - zeta);
        let s = self.stages();
        let inner = CMat::from_fn(s, s, |i, j| Complex64::new(self.a[i][j], 0.0) + f * self.b[j]);
        inner.inverse().map_err(|e| Error::Singular {
            pivot: 0.0,
            context: format!("in Δ(ζ) at ζ = {zeta}: {e}"),
        })
    }

    pub fn check_assumptions(&self) -> AssumptionReport {
        let s = self.stages();
        let stiffly_accurate = self.a.len() == s && self.a[s - 1] == self.b;
        let invertible = self
            .a_matrix()
            .lu()
            .map(|lu| lu.det().norm() > 1e-12)
            .unwrap_or(false);
        let right_half_plane_spectrum = invertible
            && self
                .a_eigenvalues()
                .map(|ev| ev.iter().all(|z| z.re > 0.0))
                .unwrap_or(false);
        AssumptionReport {
            stiffly_accurate,
            invertible,
            right_half_plane_spectrum,
        }
    }

    /// Stage count to method name used by the CLI (`radau1`, `radau3`, `radau5`).
    pub fn name(&self) -> String {
        format!("radau{}", self.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn a_times(t: &Tableau, v: &[f64]) -> Vec<f64> {
        t.a.iter().map(|row| dot(row, v)).collect()
    }

    #[test]
    fn backward_euler() {
        let t = radau_iia(1).unwrap();
        assert_eq!(t.a, vec![vec![1.0]]);
        assert_eq!(t.b, vec![1.0]);
        assert_eq!(t.c, vec![1.0]);
        let st = t.stability(c(-1.0, 0.0)).unwrap();
        assert!((st.r - 0.5).norm() < 1e-15);
    }

    #[test]
    fn two_stage_order_conditions() {
        let t = radau_iia(2).unwrap();
        assert_eq!(t.a, vec![vec![5.0 / 12.0, -1.0 / 12.0], vec![0.75, 0.25]]);
        let one = vec![1.0; 2];
        let c2: Vec<f64> = t.c.iter().map(|x| x * x).collect();
        assert!((dot(&t.b, &one) - 1.0).abs() < 1e-15);
        assert!((dot(&t.b, &t.c) - 0.5).abs() < 1e-15);
        assert!((dot(&t.b, &c2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((dot(&t.b, &a_times(&t, &t.c)) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn three_stage_order_conditions_through_five() {
        let t = radau_iia(3).unwrap();
        let cp = |p: i32| -> Vec<f64> { t.c.iter().map(|x| x.powi(p)).collect() };
        // bushy-tree conditions b^T c^{k-1} = 1/k, k = 1..5
        for k in 1..=5 {
            assert!((dot(&t.b, &cp(k - 1)) - 1.0 / k as f64).abs() < 1e-14, "k={k}");
        }
        // simplifying assumption C(3): A c^{k-1} = c^k / k
        for k in 1..=3 {
            let lhs = a_times(&t, &cp(k - 1));
            for (l, ci) in lhs.iter().zip(&t.c) {
                assert!((l - ci.powi(k) / k as f64).abs() < 1e-14);
            }
        }
        // remaining order-4/5 conditions
        assert!((dot(&t.b, &a_times(&t, &t.c)) - 1.0 / 6.0).abs() < 1e-14);
        assert!((dot(&t.b, &a_times(&t, &cp(2))) - 1.0 / 12.0).abs() < 1e-14);
        let ac = a_times(&t, &t.c);
        assert!((dot(&t.b, &a_times(&t, &ac)) - 1.0 / 24.0).abs() < 1e-14);
        let cac: Vec<f64> = t.c.iter().zip(&ac).map(|(x, y)| x * y).collect();
        assert!((dot(&t.b, &cac) - 1.0 / 8.0).abs() < 1e-14);
        assert!((dot(&t.b, &a_times(&t, &cp(3))) - 1.0 / 20.0).abs() < 1e-14);
    }

    #[test]
    fn structural_invariants() {
        for s in 1..=3 {
            let t = radau_iia(s).unwrap();
            assert_eq!(t.a[s - 1], t.b);
            assert_eq!(t.c[s - 1], 1.0);
            for (row, ci) in t.a.iter().zip(&t.c) {
                assert!((row.iter().sum::<f64>() - ci).abs() <= 1e-14);
            }
            assert!(t.a_matrix().lu().unwrap().det().norm() > 1e-12);
            assert!(t.a_eigenvalues().unwrap().iter().all(|z| z.re > 0.0));
            assert_eq!(t.order, 2 * s as u32 - 1);
            assert_eq!(t.stage_order, s as u32);
            assert!(t.check_assumptions().all_pass());
        }
    }

    #[test]
    fn unsupported_stage_count() {
        assert!(matches!(radau_iia(4), Err(Error::Config(_))));
        assert!(matches!(radau_iia(0), Err(Error::Config(_))));
    }

    #[test]
    fn assumption_failures_are_reported() {
        let singular = Tableau {
            a: vec![vec![0.0, 0.0], vec![0.0, 1.0]],
            b: vec![0.0, 1.0],
            c: vec![0.0, 1.0],
            order: 1,
            stage_order: 1,
        };
        let rep = singular.check_assumptions();
        assert!(!rep.invertible);
        assert!(rep.stiffly_accurate);

        let r3 = 3f64.sqrt();
        let gauss = Tableau {
            a: vec![vec![0.25, 0.25 - r3 / 6.0], vec![0.25 + r3 / 6.0, 0.25]],
            b: vec![0.5, 0.5],
            c: vec![0.5 - r3 / 6.0, 0.5 + r3 / 6.0],
            order: 4,
            stage_order: 2,
        };
        let rep = gauss.check_assumptions();
        assert!(!rep.stiffly_accurate);
        assert!(rep.invertible);
    }

    #[test]
    fn stability_at_zero_is_identity() {
        for s in 1..=3 {
            let t = radau_iia(s).unwrap();
            let st = t.stability(c(0.0, 0.0)).unwrap();
            assert!((st.r - 1.0).norm() < 1e-15);
            for (q, b) in st.q.iter().zip(&t.b) {
                assert!((q - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn l_stability_limit() {
        let t = radau_iia(3).unwrap();
        assert!(t.stability(c(-1e6, 0.0)).unwrap().r.norm() <= 1e-4);
        // |r(z)| <= C/|z| with a constant that does not drift across decades
        let consts: Vec<f64> = [1e4, 1e5, 1e6, 1e7]
            .iter()
            .map(|&x| t.stability(c(-x, 0.0)).unwrap().r.norm() * x)
            .collect();
        let (lo, hi) = consts
            .iter()
            .fold((f64::MAX, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        assert!(hi / lo < 1.01, "{consts:?}");
    }

    #[test]
    fn a_stability_on_random_left_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in 1..=3 {
            let t = radau_iia(s).unwrap();
            for _ in 0..100 {
                let z = c(-rng.gen_range(0.0..50.0), rng.gen_range(-50.0..50.0));
                let st = t.stability(z).unwrap();
                assert!(st.r.norm() <= 1.0 + 1e-12);
                let alt = t.stability_via_q(z).unwrap();
                assert!((alt - st.r).norm() <= 1e-12 * st.r.norm().max(1.0));
            }
        }
    }

    #[test]
    fn pole_is_reported() {
        let t = radau_iia(1).unwrap();
        assert!(matches!(t.stability(c(1.0, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn delta_special_values() {
        let t1 = radau_iia(1).unwrap();
        let z = c(0.3, -0.2);
        let d = t1.delta(z).unwrap();
        assert!((d[(0, 0)] - (1.0 - z)).norm() < 1e-15);
        assert!(matches!(t1.delta(c(1.0, 0.0)), Err(Error::Pole { .. })));

        let t3 = radau_iia(3).unwrap();
        let d0 = t3.delta(c(0.0, 0.0)).unwrap();
        let ainv = t3.a_matrix().inverse().unwrap();
        assert!(d0.sub(&ainv).max_abs() < 1e-12);
    }

    #[test]
    fn delta_matches_adjugate_oracle() {
        let t = radau_iia(2).unwrap();
        let zeta = Complex64::from_polar(0.1, std::f64::consts::PI / 3.0);
        let f = zeta / (1.0 - zeta);
        let m = |i: usize, j: usize| Complex64::new(t.a[i][j], 0.0) + f * t.b[j];
        let det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        let adj = [[m(1, 1), -m(0, 1)], [-m(1, 0), m(0, 0)]];
        let d = t.delta(zeta).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((d[(i, j)] - adj[i][j] / det).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn delta_inverse_identity_in_disk() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for s in 1..=3 {
            let t = radau_iia(s).unwrap();
            for _ in 0..50 {
                let zeta = Complex64::from_polar(
                    rng.gen_range(0.0..0.99),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                );
                let d = t.delta(zeta).unwrap();
                let f = zeta / (1.0 - zeta);
                let inner =
                    CMat::from_fn(s, s, |i, j| Complex64::new(t.a[i][j], 0.0) + f * t.b[j]);
                let prod = &d * &inner;
                assert!(prod.sub(&CMat::identity(s)).max_abs() <= 1e-12);
            }
        }
    }
}
