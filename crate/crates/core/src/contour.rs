//! Hyperbolic integration contours and their trapezoidal discretization.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default interval growth factor.
pub const DEFAULT_LAMBDA: u32 = 5;

/// Sector excess angle `θ₁ = min{(π(1-α) + 2θ₀)/(2α), π/2}`.
pub fn theta1(alpha: f64, theta0: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(theta0 >= 0.0 && theta0 <= PI / 2.0) {
        return Err(Error::Domain(format!("theta0 must lie in [0, π/2], got {theta0}")));
    }
    Ok(((PI * (1.0 - alpha) + 2.0 * theta0) / (2.0 * alpha)).min(PI / 2.0))
}

/// Quadrature parameters shared by every level of the fast algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourParams {
    /// Asymptote angle φ.
    pub phi: f64,
    /// Half-width of the strip of analyticity.
    pub d: f64,
    pub rho_opt: f64,
    /// `a(rho_opt) = arccosh(Λ / ((1 - rho_opt) sin φ))`.
    pub a_rho: f64,
    /// Step `τ = a(rho_opt) / K`.
    pub tau: f64,
    pub k: usize,
    pub lambda: u32,
    /// Set when the objective had no interior minimum and a boundary-adjacent
    /// scan point was taken.
    pub boundary_minimum: bool,
}

/// `a(ρ) = arccosh(Λ / ((1 - ρ) sin φ))`.
pub fn a_of_rho(rho: f64, lambda: f64, phi: f64) -> f64 {
    (lambda / ((1.0 - rho) * phi.sin())).acosh()
}

/// `eps · ε_K(ρ)^{ρ-1} + ε_K(ρ)^ρ` with `ε_K(ρ) = exp(-2π d K / a(ρ))`, evaluated in log space.
pub fn parameter_objective(rho: f64, k: usize, lambda: f64, phi: f64, d: f64, eps: f64) -> f64 {
    let log_eps_k = -2.0 * PI * d * k as f64 / a_of_rho(rho, lambda, phi);
    (eps.ln() + (rho - 1.0) * log_eps_k).exp() + (rho * log_eps_k).exp()
}

/// Chooses `φ = d = θ/2` and the minimizing `ρ` by a dense scan refined by golden section.
pub fn select_parameters(k: usize, lambda: u32, theta: f64, machine_eps: f64) -> Result<ContourParams> {
    if k < 2 {
        return Err(Error::Config(format!("K must be at least 2, got {k}")));
    }
    if lambda < 2 {
        return Err(Error::Config(format!("Lambda must be an integer > 1, got {lambda}")));
    }
    if !(theta > 0.0 && theta <= PI / 2.0) {
        return Err(Error::Config(format!("contour angle must lie in (0, π/2], got {theta}")));
    }
    if !(machine_eps > 0.0 && machine_eps < 1.0) {
        return Err(Error::Config(format!("machine eps must lie in (0, 1), got {machine_eps}")));
    }
    let phi = theta / 2.0;
    let d = phi;
    let lam = lambda as f64;
    let obj = |rho: f64| parameter_objective(rho, k, lam, phi, d, machine_eps);

    const SCAN: usize = 2000;
    let grid: Vec<f64> = (1..SCAN).map(|i| i as f64 / SCAN as f64).collect();
    let (best, _) = grid
        .iter()
        .enumerate()
        .map(|(i, &r)| (i, obj(r)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let boundary_minimum = best == 0 || best == grid.len() - 1;
    let rho_opt = if boundary_minimum {
        grid[best]
    } else {
        golden_section(&obj, grid[best - 1], grid[best + 1], 1e-6)
    };
    let a_rho = a_of_rho(rho_opt, lam, phi);
    Ok(ContourParams {
        phi,
        d,
        rho_opt,
        a_rho,
        tau: a_rho / k as f64,
        k,
        lambda,
        boundary_minimum,
    })
}

fn golden_section(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Scale `μ_ℓ = 2π d K (1-ρ) / (Λ^ℓ (κ+1) h a(ρ))` of level `ℓ`.
pub fn mu_level(ell: u32, h: f64, kappa: usize, params: &ContourParams) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("step size must be positive, got {h}")));
    }
    let growth = (params.lambda as f64).powi(ell as i32);
    let mu = 2.0 * PI * params.d * params.k as f64 * (1.0 - params.rho_opt)
        / (growth * (kappa as f64 + 1.0) * h * params.a_rho);
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::Range(format!("μ underflow/overflow at level {ell}")));
    }
    Ok(mu)
}

/// One quadrature node on a hyperbola.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourNode {
    pub k: i64,
    pub lambda: Complex64,
    pub weight: Complex64,
}

/// Hyperbola `γ(x) = μ(1 + sin(ix - φ))` sampled at `x_k = kτ`, `k = -K..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourLevel {
    pub ell: u32,
    pub mu: f64,
    pub nodes: Vec<ContourNode>,
}

impl ContourLevel {
    pub fn new(ell: u32, mu: f64, params: &ContourParams) -> Self {
        ContourLevel {
            ell,
            mu,
            nodes: level_nodes(mu, params),
        }
    }

    /// Node with index `k`.
    pub fn node(&self, k: i64) -> &ContourNode {
        &self.nodes[(k + (self.nodes.len() as i64 - 1) / 2) as usize]
    }
}

/// Nodes `λ_k = μ(1 + sin(ikτ - φ))` and weights `ω_k = τμ cos(ikτ - φ) / (2π)`.
pub fn level_nodes(mu: f64, params: &ContourParams) -> Vec<ContourNode> {
    let k_max = params.k as i64;
    let (sp, cp) = params.phi.sin_cos();
    (-k_max..=k_max)
        .map(|k| {
            let x = k as f64 * params.tau;
            let (ch, sh) = (x.cosh(), x.sinh());
            ContourNode {
                k,
                lambda: Complex64::new(mu * (1.0 - sp * ch), mu * cp * sh),
                weight: Complex64::new(cp * ch, sp * sh) * (params.tau * mu / (2.0 * PI)),
            }
        })
        .collect()
}

/// True if `p` lies strictly to the right of the hyperbola with scale `mu` and angle `phi`.
pub fn right_of_hyperbola(p: Complex64, mu: f64, phi: f64) -> bool {
    let x = (p.im / (mu * phi.cos())).asinh();
    p.re > mu * (1.0 - phi.sin() * x.cosh())
}
