//! Numerical Caputo derivatives and the manufactured test problems built from them.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::operators::{DenseOperator, OperatorFamily, PeriodicCompactFd3d, SchrodingerTbc1d};
use crate::problem::{Problem, Source};
use crate::smallmat::CMat;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_PANELS: usize = 20_000;

/// Scalar types the adaptive rule can integrate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    l1: f64,
}

fn kronrod<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> Panel<T> {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut l1 = fc.magnitude() * WGK[7];
    for i in 0..7 {
        let f1 = f(c - r * XGK[i]);
        let f2 = f(c + r * XGK[i]);
        k = k + (f1 + f2) * WGK[i];
        l1 += (f1.magnitude() + f2.magnitude()) * WGK[i];
        if i % 2 == 1 {
            g = g + (f1 + f2) * WG[i / 2];
        }
    }
    Panel {
        a,
        b,
        value: k * r,
        error: (k - g).magnitude() * r,
        l1: l1 * r,
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on `[a, b]`, starting from
/// `initial` equal panels and bisecting the worst panel until the summed
/// error estimate is below `tol · max(|I|, 10⁻³ ∫|f|)` or at roundoff level.
pub fn integrate<T: QuadValue>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    initial: usize,
    tol: f64,
) -> Result<T> {
    let initial = initial.max(1);
    let w = (b - a) / initial as f64;
    let mut panels: Vec<Panel<T>> = (0..initial)
        .map(|i| {
            let lo = a + i as f64 * w;
            let hi = if i + 1 == initial { b } else { lo + w };
            kronrod(&f, lo, hi)
        })
        .collect();
    loop {
        let (mut total, mut err, mut l1) = (T::zero(), 0.0, 0.0);
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            total = total + p.value;
            err += p.error;
            l1 += p.l1;
            if p.error > panels[worst].error {
                worst = i;
            }
        }
        let target = (tol * total.magnitude().max(1e-3 * l1)).max(50.0 * f64::EPSILON * l1);
        if err <= target {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Accuracy {
                estimate: err,
                tol: target,
            });
        }
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            return Err(Error::Accuracy {
                estimate: err,
                tol: target,
            });
        }
        panels.push(kronrod(&f, p.a, mid));
        panels.push(kronrod(&f, mid, p.b));
    }
}

fn check_args(alpha: f64, t: f64, tol: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("Caputo derivative needs t > 0, got {t}")));
    }
    if !(tol >= 1e-12) {
        return Err(Error::Config(format!("tolerance must be at least 1e-12, got {tol}")));
    }
    Ok(())
}

/// `D^α u(t) = (1/Γ(1-α)) ∫₀ᵗ (t-τ)^{-α} u'(τ) dτ`, computed as
/// `(1/Γ(2-α)) ∫₀^{t^{1-α}} u'(t - s^{1/(1-α)}) ds`.
pub fn caputo_oracle<T: QuadValue>(
    u_prime: impl Fn(f64) -> T,
    alpha: f64,
    t: f64,
    tol: f64,
) -> Result<T> {
    check_args(alpha, t, tol)?;
    let beta = 1.0 / (1.0 - alpha);
    let upper = t.powf(1.0 - alpha);
    let panels = 16 + (4.0 * t).ceil().min(512.0) as usize;
    let v = integrate(|s| u_prime((t - s.powf(beta)).max(0.0)), 0.0, upper, panels, tol)?;
    Ok(v * (1.0 / gamma(2.0 - alpha)))
}

/// `D^α e^{iωt}` at many times, sharing one cumulative integral
/// `F(t) = ∫₀ᵗ σ^{-α} e^{-iωσ} dσ` so that `D^α e^{iωt} = iω e^{iωt} F(t) / Γ(1-α)`.
pub fn caputo_exp_many(omega: f64, alpha: f64, times: &[f64], tol: f64) -> Result<Vec<Complex64>> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&i, &j| times[i].total_cmp(&times[j]));
    let mut out = vec![Complex64::new(0.0, 0.0); times.len()];
    let kernel = |s: f64| Complex64::from_polar(s.powf(-alpha), -omega * s);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut last = 0.0;
    let scale = 1.0 / gamma(1.0 - alpha);
    for &i in &order {
        let t = times[i];
        if t < 0.0 || !t.is_finite() {
            return Err(Error::Domain(format!("Caputo derivative needs t >= 0, got {t}")));
        }
        if t > last {
            if last == 0.0 {
                check_args(alpha, t, tol)?;
                // first segment: σ = s^{1/(1-α)} removes the endpoint singularity
                let beta = 1.0 / (1.0 - alpha);
                let upper = t.powf(1.0 - alpha);
                let panels = 16 + (4.0 * omega.abs() * t).ceil().min(4096.0) as usize;
                acc = integrate(
                    |s| Complex64::from_polar(beta, -omega * s.powf(beta)),
                    0.0,
                    upper,
                    panels,
                    tol,
                )?;
            } else {
                let panels = 1 + (omega.abs() * (t - last)).ceil().min(4096.0) as usize;
                acc += integrate(kernel, last, t, panels, tol)?;
            }
            last = t;
        }
        out[i] = if t == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, omega) * Complex64::from_polar(1.0, omega * t) * acc * scale
        };
    }
    Ok(out)
}

/// A problem with known exact solution.
#[derive(Debug, Clone)]
pub struct ManufacturedProblem {
    pub problem: Problem,
    pub description: String,
}

/// Accuracy requested from the oracle when sampling inhomogeneities.
pub const FACTOR_TOL: f64 = 1e-12;

// 1/2 - cos(x)/2 written as sin²(x/2) to avoid cancellation near t = 0
fn ex1_u(t: f64) -> [f64; 2] {
    let c = (0.5 * 5f64.sqrt() * t).sin().powi(2);
    [(2.0 * t).sin().powi(6), c.powi(6)]
}

fn ex1_u_prime(t: f64) -> [f64; 2] {
    let r5 = 5f64.sqrt();
    let c = (0.5 * r5 * t).sin().powi(2);
    [
        12.0 * (2.0 * t).sin().powi(5) * (2.0 * t).cos(),
        3.0 * r5 * c.powi(5) * (r5 * t).sin(),
    ]
}

/// `D^{1/2} u = A u + g` with `A = [[-1, 1], [-1, -1]]` and
/// `u(t) = (sin(2t)⁶, (1/2 - cos(√5 t)/2)⁶)`.
pub fn example1_problem() -> Result<ManufacturedProblem> {
    let alpha = 0.5;
    let a = CMat::from_real_rows(&[vec![-1.0, 1.0], vec![-1.0, -1.0]]);
    let family: Arc<dyn OperatorFamily> = Arc::new(DenseOperator::new(None, a, PI / 2.0)?);
    let factors = Arc::new(move |t: f64| {
        if t <= 0.0 {
            return vec![Complex64::new(0.0, 0.0); 2];
        }
        let d1 = caputo_oracle(|s| ex1_u_prime(s)[0], alpha, t, FACTOR_TOL)
            .expect("oracle converges for the smooth first component");
        let d2 = caputo_oracle(|s| ex1_u_prime(s)[1], alpha, t, FACTOR_TOL)
            .expect("oracle converges for the smooth second component");
        let u = ex1_u(t);
        vec![
            Complex64::new(d1 + u[0] - u[1], 0.0),
            Complex64::new(d2 + u[0] + u[1], 0.0),
        ]
    });
    let description = "dense 2x2, alpha = 1/2, u = (sin(2t)^6, (1/2 - cos(sqrt(5) t)/2)^6)";
    let problem = Problem::new(family, alpha, Source::componentwise(2, factors))?
        .with_exact(Arc::new(|t| {
            ex1_u(t).iter().map(|&x| Complex64::new(x, 0.0)).collect()
        }))
        .with_description(description);
    Ok(ManufacturedProblem {
        problem,
        description: description.into(),
    })
}

/// `h∓(x, y, z) = cos x + cos y + cos z ∓ (sin x + sin y + sin z)` on the periodic grid.
pub fn example2_modes(op: &PeriodicCompactFd3d) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = op.n_per_dim();
    let mut minus = Vec::with_capacity(n * n * n);
    let mut plus = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let (x, y, z) = (op.coord(i), op.coord(j), op.coord(k));
                let c = x.cos() + y.cos() + z.cos();
                let s = x.sin() + y.sin() + z.sin();
                minus.push(Complex64::new(c - s, 0.0));
                plus.push(Complex64::new(c + s, 0.0));
            }
        }
    }
    (minus, plus)
}

/// `(f₁(t), f₂(t))` for many times: `f₁ = D^{1/2}[sin πt] + sin πt`,
/// `f₂ = D^{1/2}[1 - cos πt] + 1 - cos πt`.
pub fn example2_factors(times: &[f64]) -> Result<Vec<[f64; 2]>> {
    let d = caputo_exp_many(PI, 0.5, times, FACTOR_TOL)?;
    Ok(times
        .iter()
        .zip(d)
        .map(|(&t, de)| {
            let (s, c) = (PI * t).sin_cos();
            [de.im + s, -de.re + 1.0 - c]
        })
        .collect())
}

/// Subdiffusion `M D^{1/2} u = A u + M g` on the periodic cube with exact solution
/// `h₋ sin πt - h₊ (cos πt - 1)`.
pub fn example2_problem(n_per_dim: usize) -> Result<ManufacturedProblem> {
    if n_per_dim < 8 {
        return Err(Error::Config(format!(
            "subdiffusion example needs at least 8 points per axis, got {n_per_dim}"
        )));
    }
    let op = PeriodicCompactFd3d::new(n_per_dim)?;
    let (hm, hp) = example2_modes(&op);
    let modes = vec![op.apply_mass(&hm), op.apply_mass(&hp)];
    let factors = Arc::new(|t: f64| {
        let f = example2_factors(&[t]).expect("oracle converges for trigonometric data")[0];
        vec![Complex64::new(f[0], 0.0), Complex64::new(f[1], 0.0)]
    });
    let batch = Arc::new(|times: &[f64]| -> Result<Vec<Vec<Complex64>>> {
        Ok(example2_factors(times)?
            .into_iter()
            .map(|f| vec![Complex64::new(f[0], 0.0), Complex64::new(f[1], 0.0)])
            .collect())
    });
    let description = format!("periodic compact FD {n_per_dim}^3, alpha = 1/2, u = h- sin(pi t) - h+ (cos(pi t) - 1)");
    let exact = Arc::new(move |t: f64| {
        let (s, c) = (PI * t).sin_cos();
        hm.iter().zip(&hp).map(|(a, b)| a * s - b * (c - 1.0)).collect()
    });
    let family: Arc<dyn OperatorFamily> = Arc::new(op);
    let problem = Problem::new(family, 0.5, Source::new(modes, factors).with_batch(batch))?
        .with_exact(exact)
        .with_description(description.clone());
    Ok(ManufacturedProblem {
        problem,
        description,
    })
}

/// `u₀(x) = 10 exp(-(4x)² + 10 i x)` sampled on `n_points` equispaced points of `[-a, a]`.
pub fn example3_initial(n_points: usize, a_half: f64) -> Result<Vec<Complex64>> {
    if !(a_half >= 1.0) {
        return Err(Error::Config(format!("domain half-width must be at least 1, got {a_half}")));
    }
    if n_points < 2 {
        return Err(Error::Config(format!("need at least 2 grid points, got {n_points}")));
    }
    let eta = 2.0 * a_half / (n_points - 1) as f64;
    let u0: Vec<Complex64> = (0..n_points)
        .map(|j| {
            let x = -a_half + j as f64 * eta;
            Complex64::from_polar(10.0 * (-(4.0 * x).powi(2)).exp(), 10.0 * x)
        })
        .collect();
    let edge = u0[0].norm().max(u0[n_points - 1].norm());
    if edge > 1e-20 {
        return Err(Error::Support(format!(
            "initial value reaches the boundary: |u0| = {edge:e} > 1e-20"
        )));
    }
    Ok(u0)
}

/// Free Schrödinger-type equation `D^α u = iΔu` on `[-a, a]` with transparent boundaries.
pub fn schrodinger_problem(a_half: f64, n_points: usize, alpha: f64) -> Result<Problem> {
    let u0 = example3_initial(n_points, a_half)?;
    let family: Arc<dyn OperatorFamily> = Arc::new(SchrodingerTbc1d::new(a_half, n_points, alpha)?);
    Ok(Problem::new(family, alpha, Source::zero(n_points))?
        .with_initial(u0)
        .with_description(format!(
            "Schrodinger with transparent boundaries on [-{a_half}, {a_half}], {n_points} points, alpha = {alpha}"
        )))
}
