//! Neutrino solution `F = s⁻² exp(-β²/s)`, `G = 0`, and the probability of
//! finding its density beyond `s = 1`.

use crate::error::{invalid, Result};
use crate::quadrature::{integrate, QuadTolerance};
use crate::series::{ProfileMeta, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeutrinoSolution {
    pub beta: f64,
}

impl NeutrinoSolution {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(invalid("beta", "must be finite and non-negative"));
        }
        Ok(Self { beta })
    }

    pub fn upper(&self, s: f64) -> f64 {
        (-self.beta * self.beta / s).exp() / (s * s)
    }

    pub fn lower(&self, _s: f64) -> f64 {
        0.0
    }
}

/// `[F, G]` sampled on `grid`.
pub fn neutrino_profile(beta: f64, grid: &[f64]) -> Result<[RadialProfile; 2]> {
    let sol = NeutrinoSolution::new(beta)?;
    if let Some(&s) = grid.iter().find(|&&s| !(s > 0.0)) {
        return Err(crate::Error::NonPositiveRadius(s));
    }
    let meta = ProfileMeta {
        alpha: 0.0,
        eta: 2.0 * beta * beta,
        order: 0,
    };
    Ok([
        RadialProfile {
            name: "F".into(),
            s: grid.to_vec(),
            values: grid.iter().map(|&s| sol.upper(s)).collect(),
            meta: meta.clone(),
        },
        RadialProfile {
            name: "G".into(),
            s: grid.to_vec(),
            values: grid.iter().map(|&s| sol.lower(s)).collect(),
            meta,
        },
    ])
}

/// `∫₁^∞ F² s² ds / ∫₀^∞ F² s² ds = 1 - exp(-2β²)`.
pub fn escape_probability(beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid("beta", "must be positive"));
    }
    Ok(-(-2.0 * beta * beta).exp_m1())
}

/// The same ratio by quadrature. With `u = 1/s` both integrals become
/// `∫ e^(-a u) du`, over `[0, 1]` and `[0, ∞)`.
pub fn escape_probability_numeric(beta: f64, tol: &QuadTolerance) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid("beta", "must be positive"));
    }
    let a = 2.0 * beta * beta;
    let f = |u: f64| (-a * u).exp();
    let outer = integrate(f, 0.0, 1.0, 4, tol)?.value;
    // e^(-a u) falls below 1e-18 of its peak past u = 41.5/a
    let total = integrate(f, 0.0, 41.5 / a, 16, tol)?.value;
    Ok(outer / total)
}

/// Radius maximising `F² s²` (that is `s⁻² e^(-2β²/s)`), found on `grid`.
pub fn density_peak(beta: f64, grid: &[f64]) -> Option<f64> {
    let sol = NeutrinoSolution::new(beta).ok()?;
    grid.iter()
        .copied()
        .filter(|&s| s > 0.0)
        .map(|s| (s, sol.upper(s).powi(2) * s * s))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|p| p.0)
}
