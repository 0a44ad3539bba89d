//! Electron-neutrino mass from the vanishing of the volume integral of
//! `g G s⁻¹`, solved two ways: the logarithmic closed-form approximation
//! and full weighted quadrature of the exact product density.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::loglaurent::LogLaurentPoly;
use crate::potentials::PhysicalConstants;
use crate::quadrature::{monomial_integral, weighted_integral, QuadTolerance};
use crate::roots::{self, Bracket};
use crate::series::{product_density, SeriesSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    PaperClosedForm,
    ExactQuadrature,
}

impl SolveMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveMode::PaperClosedForm => "paper_closed_form",
            SolveMode::ExactQuadrature => "exact_quadrature",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassSolveResult {
    pub mode: SolveMode,
    pub eta_root: f64,
    pub beta: f64,
    pub m_nu_ev: f64,
    pub bracket: Bracket,
    pub residual_at_root: f64,
    /// Every root found in the search interval, ascending; `eta_root` is the first.
    pub all_roots: Vec<f64>,
}

/// Search interval and refinement settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootSearch {
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub prescan_points: usize,
    pub rel_width: f64,
}

impl Default for RootSearch {
    fn default() -> Self {
        Self {
            eta_lo: 1e-6,
            eta_hi: 1e-1,
            prescan_points: 64,
            rel_width: 1e-12,
        }
    }
}

impl RootSearch {
    /// The wider interval used for the closed form.
    pub fn closed_form() -> Self {
        Self {
            eta_lo: 1e-8,
            eta_hi: 1.0,
            ..Self::default()
        }
    }
}

/// `h(η) = -ln η + c₀ - 3/2 - (α²/12) η⁻²`.
pub fn closed_form_residual(eta: f64, alpha: f64, c0: f64) -> f64 {
    -eta.ln() + c0 - 1.5 - alpha * alpha / 12.0 / (eta * eta)
}

fn finish(
    mode: SolveMode,
    roots: Vec<(f64, Bracket)>,
    alpha: f64,
    constants: &PhysicalConstants,
    residual: impl Fn(f64) -> Result<f64>,
) -> Result<MassSolveResult> {
    let (eta_root, bracket) = roots[0];
    let beta = alpha * eta_root / 2.0;
    Ok(MassSolveResult {
        mode,
        eta_root,
        beta,
        m_nu_ev: beta * constants.m_e_ev,
        bracket,
        residual_at_root: residual(eta_root)?,
        all_roots: roots.iter().map(|r| r.0).collect(),
    })
}

/// Root of the closed-form condition; the smallest root is returned.
pub fn solve_eq29(
    alpha: f64,
    c0: f64,
    constants: &PhysicalConstants,
    search: &RootSearch,
    exec: Execution,
) -> Result<MassSolveResult> {
    if !(alpha > 0.0) {
        return Err(crate::error::invalid("alpha", "must be positive"));
    }
    let h = |eta: f64| Ok(closed_form_residual(eta, alpha, c0));
    let roots = roots::all_roots(
        h,
        search.eta_lo,
        search.eta_hi,
        search.prescan_points,
        search.rel_width,
        exec,
        "closed-form mass condition",
    )?;
    finish(SolveMode::PaperClosedForm, roots, alpha, constants, h)
}

/// `Φ(η) = Σ_k α^(2k) ∫₀¹ e^(-η/s) ξ_k ds`, with `ξ_k` taken per unit `a₀ b₀`.
#[derive(Debug, Clone)]
pub struct MassCondition {
    pub alpha: f64,
    pub xi: Vec<LogLaurentPoly>,
    pub tol: QuadTolerance,
}

/// Contribution of one monomial of one `ξ_k` to `Φ(η)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub order: usize,
    pub exp: i32,
    pub log_pow: u32,
    pub coefficient: f64,
    pub integral: f64,
    pub contribution: f64,
}

impl MassCondition {
    pub fn new(first: &SeriesSolution, second: &SeriesSolution, alpha: f64, order: usize, tol: QuadTolerance) -> Result<Self> {
        let density = product_density(first, second, order)?;
        if num_traits::Zero::is_zero(&density.norm) {
            return Err(crate::error::invalid("a0*b0", "normalisation product must be non-zero"));
        }
        Ok(Self {
            alpha,
            xi: density.per_unit_norm(),
            tol,
        })
    }

    /// Same condition with every `ξ_k` multiplied by one rational factor.
    pub fn scaled(&self, factor: &num_rational::BigRational) -> Self {
        Self {
            alpha: self.alpha,
            xi: self.xi.iter().map(|x| x.scale(factor)).collect(),
            tol: self.tol,
        }
    }

    pub fn phi(&self, eta: f64) -> Result<f64> {
        let mut total = 0.0;
        for (k, xi) in self.xi.iter().enumerate() {
            total += self.alpha.powi(2 * k as i32) * weighted_integral(eta, xi, &self.tol)?;
        }
        Ok(total)
    }

    pub fn audit(&self, eta: f64) -> Result<Vec<AuditRow>> {
        let mut rows = Vec::new();
        for (k, xi) in self.xi.iter().enumerate() {
            let weight = self.alpha.powi(2 * k as i32);
            for (mono, c) in xi.terms() {
                let integral = monomial_integral(eta, mono, &self.tol)?;
                let coefficient = crate::loglaurent::rational_to_f64(c);
                rows.push(AuditRow {
                    order: k,
                    exp: mono.exp,
                    log_pow: mono.log_pow,
                    coefficient,
                    integral,
                    contribution: weight * coefficient * integral,
                });
            }
        }
        Ok(rows)
    }

    pub fn solve(&self, constants: &PhysicalConstants, search: &RootSearch, exec: Execution) -> Result<MassSolveResult> {
        let phi = |eta: f64| self.phi(eta);
        let roots = roots::all_roots(
            phi,
            search.eta_lo,
            search.eta_hi,
            search.prescan_points,
            search.rel_width,
            exec,
            "exact mass condition",
        )?;
        finish(SolveMode::ExactQuadrature, roots, self.alpha, constants, phi)
    }
}

pub fn solve_exact_condition(
    first: &SeriesSolution,
    second: &SeriesSolution,
    alpha: f64,
    order: usize,
    constants: &PhysicalConstants,
    search: &RootSearch,
    tol: QuadTolerance,
    exec: Execution,
) -> Result<MassSolveResult> {
    MassCondition::new(first, second, alpha, order, tol)?.solve(constants, search, exec)
}

/// Per-term table of `Φ(η)`.
pub fn condition_audit(
    first: &SeriesSolution,
    second: &SeriesSolution,
    alpha: f64,
    eta: f64,
    order: usize,
    tol: QuadTolerance,
) -> Result<Vec<AuditRow>> {
    MassCondition::new(first, second, alpha, order, tol)?.audit(eta)
}

/// Share of `ξ_k`'s integral carried by its `s^exp` (no log) monomial.
pub fn dominant_share(rows: &[AuditRow], order: usize, exp: i32) -> Option<f64> {
    let total: f64 = rows.iter().filter(|r| r.order == order).map(|r| r.contribution).sum();
    let term = rows
        .iter()
        .find(|r| r.order == order && r.exp == exp && r.log_pow == 0)?
        .contribution;
    if total == 0.0 {
        None
    } else {
        Some((term / total).abs())
    }
}

/// Convenience: is the error a missing bracket (CLI exit code 3)?
pub fn is_bracket_failure(e: &Error) -> bool {
    matches!(e, Error::NoBracket { .. })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loglaurent::rat;
    use crate::quadrature::{exp_integral_e1, EULER_GAMMA};
    use crate::series::{iterate_first_family, iterate_second_family};

    const ALPHA: f64 = 1.0 / 137.0;

    fn families(k: usize) -> (SeriesSolution, SeriesSolution) {
        (iterate_first_family(rat(1, 1), k), iterate_second_family(rat(1, 1), k))
    }

    #[test]
    fn closed_form_reproduces_window() {
        let c = PhysicalConstants::default();
        let r = solve_eq29(ALPHA, -0.51, &c, &RootSearch::closed_form(), Execution::Sequential).unwrap();
        assert!(r.m_nu_ev >= 1.75 && r.m_nu_ev <= 1.78, "{r:?}");
        assert_eq!(r.beta, ALPHA * r.eta_root / 2.0);
        assert!(r.residual_at_root.abs() < 1e-9);
        // the closed form also turns over near η = e^-2.01; smallest root is reported
        assert_eq!(r.all_roots.len(), 2);
        assert!(r.all_roots[0] < r.all_roots[1]);
    }

    #[test]
    fn closed_form_with_euler_constant() {
        let c = PhysicalConstants::default();
        let reference = solve_eq29(ALPHA, -0.51, &c, &RootSearch::closed_form(), Execution::Sequential).unwrap();
        let exact = solve_eq29(ALPHA, -EULER_GAMMA, &c, &RootSearch::closed_form(), Execution::Sequential).unwrap();
        assert!((exact.eta_root - 9.5e-4).abs() < 0.3e-4, "{}", exact.eta_root);
        assert!(((exact.m_nu_ev - reference.m_nu_ev) / reference.m_nu_ev).abs() < 0.05);
    }

    #[test]
    fn log_only_condition_inverts_exactly() {
        // with α²/12 removed: -ln η - 2.01 = 0
        let h = |eta: f64| Ok(closed_form_residual(eta, 0.0, -0.51));
        let r = roots::bisect(h, Bracket { lo: 1e-3, hi: 0.9 }, 1e-14).unwrap();
        assert!((r - (-2.01f64).exp()).abs() < 1e-12);
        assert!((r - 0.1340).abs() < 1e-4);
    }

    #[test]
    fn exact_condition_close_to_closed_form() {
        let (first, second) = families(1);
        let c = PhysicalConstants::default();
        let exact = solve_exact_condition(&first, &second, ALPHA, 1, &c, &RootSearch::default(), QuadTolerance::default(), Execution::Sequential).unwrap();
        let reference = solve_eq29(ALPHA, -0.51, &c, &RootSearch::closed_form(), Execution::Sequential).unwrap();
        assert!(((exact.eta_root - reference.eta_root) / reference.eta_root).abs() < 0.1);
        assert_eq!(exact.all_roots.len(), 1);
    }

    #[test]
    fn root_is_invariant_under_common_scaling() {
        let (first, second) = families(1);
        let cond = MassCondition::new(&first, &second, ALPHA, 1, QuadTolerance::default()).unwrap();
        let c = PhysicalConstants::default();
        let base = cond.solve(&c, &RootSearch::default(), Execution::Sequential).unwrap();
        // -2 turns the computed ξ's into the reference ones
        for f in [rat(-2, 1), rat(7, 3)] {
            let scaled = cond.scaled(&f).solve(&c, &RootSearch::default(), Execution::Sequential).unwrap();
            assert!(((scaled.eta_root - base.eta_root) / base.eta_root).abs() < 1e-11);
        }
    }

    #[test]
    fn solves_are_bit_identical() {
        let (first, second) = families(1);
        let c = PhysicalConstants::default();
        let a = solve_exact_condition(&first, &second, ALPHA, 1, &c, &RootSearch::default(), QuadTolerance::default(), Execution::Parallel).unwrap();
        let b = solve_exact_condition(&first, &second, ALPHA, 1, &c, &RootSearch::default(), QuadTolerance::default(), Execution::Sequential).unwrap();
        assert_eq!(a.eta_root.to_bits(), b.eta_root.to_bits());
    }

    #[test]
    fn audit_partitions_phi_and_inverse_cube_dominates() {
        let (first, second) = families(1);
        let cond = MassCondition::new(&first, &second, ALPHA, 1, QuadTolerance::default()).unwrap();
        let eta = 1e-3;
        let rows = cond.audit(eta).unwrap();
        let sum: f64 = rows.iter().map(|r| r.contribution).sum();
        let phi = cond.phi(eta).unwrap();
        assert!(((sum - phi) / phi).abs() < 1e-10);
        assert!(dominant_share(&rows, 1, -3).unwrap() > 0.9);
        // ξ₀ contribution: -1/2 (E₁(η) - 2 + 1/2) up to O(η ln η)
        let xi0: f64 = rows.iter().filter(|r| r.order == 0).map(|r| r.contribution).sum();
        let approx = -0.5 * (exp_integral_e1(eta).unwrap() - 2.0 + 0.5);
        assert!((xi0 - approx).abs() < 0.02, "{xi0} vs {approx}");
        let approx_gamma = -0.5 * (-eta.ln() - EULER_GAMMA - 2.0 + 0.5);
        assert!((xi0 - approx_gamma).abs() < 0.02);
    }

    #[test]
    fn smaller_alpha_gives_smaller_mass_ratio() {
        let (first, second) = families(1);
        let c = PhysicalConstants::default();
        let search = RootSearch {
            eta_lo: 1e-9,
            ..RootSearch::default()
        };
        let mut prev = f64::INFINITY;
        for alpha in [ALPHA, 1e-3, 1e-4] {
            let r = solve_exact_condition(&first, &second, alpha, 1, &c, &search, QuadTolerance::default(), Execution::Parallel).unwrap();
            assert!(r.beta < prev);
            prev = r.beta;
        }
    }

    #[test]
    fn missing_bracket_is_reported() {
        let c = PhysicalConstants::default();
        let search = RootSearch {
            eta_lo: 0.5,
            eta_hi: 0.9,
            ..RootSearch::default()
        };
        let e = solve_eq29(ALPHA, -0.51, &c, &search, Execution::Sequential).unwrap_err();
        assert!(is_bracket_failure(&e));
    }

    #[test]
    fn zero_normalisation_rejected() {
        let first = iterate_first_family(rat(0, 1), 1);
        let second = iterate_second_family(rat(1, 1), 1);
        assert!(MassCondition::new(&first, &second, ALPHA, 1, QuadTolerance::default()).is_err());
    }
}
