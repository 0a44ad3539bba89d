//! Interior α²-series solutions of the reduced electron system
//!
//! ```text
//! s⁻² d/ds (s² F) =  α (1 - s⁻¹) G
//!        d/ds G   = -α (1 - s⁻¹) F
//! ```
//!
//! Both independent families are generated order by order with exact
//! integrations whose constants make every correction vanish at `s = 1`.
//! The order index `k` stands for the power of α: `α^(2k)` for the even
//! member of a family (`G` or `f`) and `α^(2k+1)` for the odd one (`F` or `g`).

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::loglaurent::{rat, LogLaurentPoly};
use crate::potentials::CouplingSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    /// `(F, G)` with `G‡₀ = a₀`.
    First,
    /// `(f, g)` with `f‡₀ = b₀ s⁻²`.
    Second,
}

/// Coefficient functions of one family, order `0..=K`.
///
/// `upper[k]` is `F‡_k` or `f‡_k` (the function in the `s⁻²(s²·)'` equation),
/// `lower[k]` is `G‡_k` or `g‡_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution {
    pub family: Family,
    pub norm: BigRational,
    pub upper: Vec<LogLaurentPoly>,
    pub lower: Vec<LogLaurentPoly>,
}

/// `1 - s⁻¹`.
fn source_factor() -> LogLaurentPoly {
    &LogLaurentPoly::one() - &LogLaurentPoly::power(-1)
}

/// Solves `s⁻² (s² U)' = (1 - s⁻¹) V` with `U(1) = 0`.
fn integrate_upper(v: &LogLaurentPoly, factor: &LogLaurentPoly) -> LogLaurentPoly {
    (factor * v).shift(2).antiderivative_vanishing_at_1().shift(-2)
}

/// Solves `V' = -(1 - s⁻¹) U` with `V(1) = 0`.
fn integrate_lower(u: &LogLaurentPoly, factor: &LogLaurentPoly) -> LogLaurentPoly {
    (-(factor * u)).antiderivative_vanishing_at_1()
}

pub fn iterate_first_family(a0: BigRational, order: usize) -> SeriesSolution {
    let factor = source_factor();
    let mut upper = Vec::with_capacity(order + 1);
    let mut lower = Vec::with_capacity(order + 1);
    lower.push(LogLaurentPoly::constant(a0.clone()));
    for k in 0..=order {
        let f_k = integrate_upper(&lower[k], &factor);
        if k < order {
            lower.push(integrate_lower(&f_k, &factor));
        }
        upper.push(f_k);
    }
    SeriesSolution {
        family: Family::First,
        norm: a0,
        upper,
        lower,
    }
}

pub fn iterate_second_family(b0: BigRational, order: usize) -> SeriesSolution {
    let factor = source_factor();
    let mut upper = Vec::with_capacity(order + 1);
    let mut lower = Vec::with_capacity(order + 1);
    upper.push(LogLaurentPoly::monomial(b0.clone(), -2, 0));
    for k in 0..=order {
        let g_k = integrate_lower(&upper[k], &factor);
        if k < order {
            upper.push(integrate_upper(&g_k, &factor));
        }
        lower.push(g_k);
    }
    SeriesSolution {
        family: Family::Second,
        norm: b0,
        upper,
        lower,
    }
}

/// Value and first derivative of one physical radial function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueSlope {
    pub value: f64,
    pub slope: f64,
}

impl SeriesSolution {
    pub fn order(&self) -> usize {
        self.upper.len() - 1
    }

    pub fn alpha_power_upper(&self, k: usize) -> i32 {
        match self.family {
            Family::First => 2 * k as i32 + 1,
            Family::Second => 2 * k as i32,
        }
    }

    pub fn alpha_power_lower(&self, k: usize) -> i32 {
        match self.family {
            Family::First => 2 * k as i32,
            Family::Second => 2 * k as i32 + 1,
        }
    }

    fn sum(&self, terms: &[LogLaurentPoly], power: impl Fn(usize) -> i32, alpha: f64, s: f64) -> f64 {
        terms
            .iter()
            .enumerate()
            .map(|(k, p)| p.eval_unchecked(s) * alpha.powi(power(k)))
            .sum()
    }

    /// Undamped `F†` (or `f†`) at `s`.
    pub fn upper_dagger(&self, alpha: f64, s: f64) -> Result<f64> {
        check_s(s)?;
        Ok(self.sum(&self.upper, |k| self.alpha_power_upper(k), alpha, s))
    }

    /// Undamped `G†` (or `g†`) at `s`.
    pub fn lower_dagger(&self, alpha: f64, s: f64) -> Result<f64> {
        check_s(s)?;
        Ok(self.sum(&self.lower, |k| self.alpha_power_lower(k), alpha, s))
    }

    fn dagger_slopes(&self, alpha: f64, s: f64) -> (f64, f64) {
        let du: Vec<_> = self.upper.iter().map(LogLaurentPoly::derivative).collect();
        let dl: Vec<_> = self.lower.iter().map(LogLaurentPoly::derivative).collect();
        (
            self.sum(&du, |k| self.alpha_power_upper(k), alpha, s),
            self.sum(&dl, |k| self.alpha_power_lower(k), alpha, s),
        )
    }

    /// Physical interior functions `X = X† exp(-(η/2)/s)` with slopes.
    pub fn physical(&self, alpha: f64, eta: f64, s: f64) -> Result<(ValueSlope, ValueSlope)> {
        check_s(s)?;
        let half = 0.5 * eta;
        let damp = (-half / s).exp();
        let ddamp = half / (s * s);
        let (u, l) = (self.upper_dagger(alpha, s)?, self.lower_dagger(alpha, s)?);
        let (du, dl) = self.dagger_slopes(alpha, s);
        Ok((
            ValueSlope {
                value: u * damp,
                slope: (du + u * ddamp) * damp,
            },
            ValueSlope {
                value: l * damp,
                slope: (dl + l * ddamp) * damp,
            },
        ))
    }

    /// Exact check that every order satisfies its recurrence relation.
    pub fn satisfies_recurrence(&self) -> bool {
        let factor = source_factor();
        let upper_eq = |u: &LogLaurentPoly, v: &LogLaurentPoly| u.shift(2).derivative().shift(-2) == &factor * v;
        let lower_eq = |v: &LogLaurentPoly, u: &LogLaurentPoly| v.derivative() == -(&factor * u);
        let k_max = self.order();
        match self.family {
            Family::First => (0..=k_max).all(|k| {
                upper_eq(&self.upper[k], &self.lower[k])
                    && (k == k_max || lower_eq(&self.lower[k + 1], &self.upper[k]))
            }),
            Family::Second => (0..=k_max).all(|k| {
                lower_eq(&self.lower[k], &self.upper[k])
                    && (k == k_max || upper_eq(&self.upper[k + 1], &self.lower[k]))
            }),
        }
    }

    /// Exact boundary conditions at `s = 1`.
    pub fn satisfies_boundary(&self) -> bool {
        let zero_at_one = |p: &LogLaurentPoly| p.value_at_one().is_zero();
        match self.family {
            Family::First => {
                self.lower[0] == LogLaurentPoly::constant(self.norm.clone())
                    && self.upper.iter().all(zero_at_one)
                    && self.lower.iter().skip(1).all(zero_at_one)
            }
            Family::Second => {
                self.upper[0] == LogLaurentPoly::monomial(self.norm.clone(), -2, 0)
                    && self.lower.iter().all(zero_at_one)
                    && self.upper.iter().skip(1).all(zero_at_one)
            }
        }
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::NonPositiveRadius(s));
    }
    Ok(())
}

fn require(series: &SeriesSolution, family: Family, order: usize) -> Result<()> {
    if series.family != family {
        return Err(Error::FamilyMismatch {
            expected: match family {
                Family::First => "first (F, G)",
                Family::Second => "second (f, g)",
            },
        });
    }
    if series.order() < order {
        return Err(Error::OrderMismatch {
            needed: order,
            available: series.order(),
        });
    }
    Ok(())
}

/// `Σ_{i+j=k} a_i b_j · s`, for `k = 0..=order`.
fn cauchy_product_times_s(a: &[LogLaurentPoly], b: &[LogLaurentPoly], order: usize) -> Vec<LogLaurentPoly> {
    (0..=order)
        .map(|k| {
            (0..=k)
                .fold(LogLaurentPoly::zero(), |acc, i| &acc + &(&a[i] * &b[k - i]))
                .shift(1)
        })
        .collect()
}

/// Coefficients `ξ_k` of `α^(2k+1)` in `(g† G† s⁻¹) s²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDensity {
    pub xi: Vec<LogLaurentPoly>,
    /// `a₀ b₀` of the families that produced `xi`.
    pub norm: BigRational,
}

pub fn product_density(first: &SeriesSolution, second: &SeriesSolution, order: usize) -> Result<ProductDensity> {
    require(first, Family::First, order)?;
    require(second, Family::Second, order)?;
    Ok(ProductDensity {
        xi: cauchy_product_times_s(&second.lower, &first.lower, order),
        norm: &first.norm * &second.norm,
    })
}

/// Coefficients of `α^(2k+1)` in `(F† f† s⁻¹) s²`.
pub fn upper_product_density(first: &SeriesSolution, second: &SeriesSolution, order: usize) -> Result<Vec<LogLaurentPoly>> {
    require(first, Family::First, order)?;
    require(second, Family::Second, order)?;
    Ok(cauchy_product_times_s(&first.upper, &second.upper, order))
}

/// The reference closed forms, per unit `a₀ b₀`.
pub fn reference_xi0() -> LogLaurentPoly {
    LogLaurentPoly::from_terms([(rat(1, 1), -1, 0), (rat(-2, 1), 0, 0), (rat(1, 1), 1, 0)])
}

/// `[s⁻³ - 4s⁻² + 40 - 5s - 36s² + 4s³ + 60 s ln s]`.
pub fn reference_xi1_bracket() -> LogLaurentPoly {
    LogLaurentPoly::from_terms([
        (rat(1, 1), -3, 0),
        (rat(-4, 1), -2, 0),
        (rat(40, 1), 0, 0),
        (rat(-5, 1), 1, 0),
        (rat(-36, 1), 2, 0),
        (rat(4, 1), 3, 0),
        (rat(60, 1), 1, 1),
    ])
}

/// `ξ₁ = -a₀b₀ [bracket] / 12`, the reference form.
pub fn reference_xi1() -> LogLaurentPoly {
    reference_xi1_bracket().scale(&rat(-1, 12))
}

/// Overall rational factors relating the computed `ξ₀, ξ₁` (per unit
/// `a₀ b₀`) to the reference ones.
#[derive(Debug, Clone, PartialEq)]
pub struct XiFactorReport {
    /// computed ξ₀ / reference ξ₀
    pub xi0_vs_reference: Option<BigRational>,
    /// computed ξ₁ / bracket
    pub xi1_vs_bracket: Option<BigRational>,
    /// computed ξ₁ / reference ξ₁ (bracket with its -1/12)
    pub xi1_vs_reference: Option<BigRational>,
}

impl ProductDensity {
    pub fn per_unit_norm(&self) -> Vec<LogLaurentPoly> {
        if self.norm.is_zero() {
            return self.xi.clone();
        }
        let inv = BigRational::one() / &self.norm;
        self.xi.iter().map(|p| p.scale(&inv)).collect()
    }

    pub fn factor_report(&self) -> XiFactorReport {
        let xi = self.per_unit_norm();
        let xi1 = xi.get(1);
        XiFactorReport {
            xi0_vs_reference: xi.first().and_then(|x| x.proportionality_factor(&reference_xi0())),
            xi1_vs_bracket: xi1.and_then(|x| x.proportionality_factor(&reference_xi1_bracket())),
            xi1_vs_reference: xi1.and_then(|x| x.proportionality_factor(&reference_xi1())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroCrossing {
    pub s_cross: f64,
    pub sign_changes: usize,
}

/// The root of `G†(s)` on `(1e-6, 1)`.
pub fn zero_crossing_g(series: &SeriesSolution, alpha: f64) -> Result<ZeroCrossing> {
    require(series, Family::First, 1)?;
    let (lo, hi) = (1e-6, 1.0 - 1e-9);
    let g = |s: f64| series.lower_dagger(alpha, s);
    let brackets = crate::roots::log_prescan(g, lo, hi, 2000, crate::exec::Execution::Sequential)?;
    let first = *brackets.first().ok_or(Error::NoBracket {
        what: "G-dagger",
        lo,
        hi,
    })?;
    let s_cross = crate::roots::bisect(g, first, 1e-13)?;
    Ok(ZeroCrossing {
        s_cross,
        sign_changes: brackets.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JoinReport {
    pub family: Family,
    pub interior_upper: ValueSlope,
    pub interior_lower: ValueSlope,
    pub exterior_upper: ValueSlope,
    pub exterior_lower: ValueSlope,
    /// Largest mismatch of values, relative to the non-zero exterior value.
    pub value_mismatch: f64,
    /// Largest mismatch of slopes, relative to the non-zero exterior slope.
    pub slope_mismatch: f64,
    pub tolerance: f64,
    pub smooth: bool,
}

/// Exterior solution at `s` (in units where `λ_e/r = (η/2)/s`):
/// `G = a₀ e^(-(η/2)/s), F = 0` or `f = b₀ s⁻² e^(-(η/2)/s), g = 0`.
pub fn exterior(series: &SeriesSolution, eta: f64, s: f64) -> Result<(ValueSlope, ValueSlope)> {
    check_s(s)?;
    let half = 0.5 * eta;
    let norm = crate::loglaurent::rational_to_f64(&series.norm);
    let damp = (-half / s).exp();
    let zero = ValueSlope { value: 0.0, slope: 0.0 };
    Ok(match series.family {
        Family::First => (
            zero,
            ValueSlope {
                value: norm * damp,
                slope: norm * damp * half / (s * s),
            },
        ),
        Family::Second => {
            let v = norm * damp / (s * s);
            (
                ValueSlope {
                    value: v,
                    slope: v * (half / (s * s) - 2.0 / s),
                },
                zero,
            )
        }
    })
}

/// Compares interior and exterior values and slopes at `s = 1`; the
/// tolerance is `10 α^(2K+2)` relative.
pub fn exterior_join_check(series: &SeriesSolution, coupling: &CouplingSpec) -> Result<JoinReport> {
    if !(coupling.eta > 0.0) {
        return Err(crate::error::invalid("eta", "must be positive"));
    }
    let (iu, il) = series.physical(coupling.alpha, coupling.eta, 1.0)?;
    let (eu, el) = exterior(series, coupling.eta, 1.0)?;
    let rel = |a: f64, b: f64, scale: f64| (a - b).abs() / scale.abs().max(f64::MIN_POSITIVE);
    let (value_scale, slope_scale) = match series.family {
        Family::First => (el.value, el.slope),
        Family::Second => (eu.value, eu.slope),
    };
    let value_mismatch = rel(iu.value, eu.value, value_scale).max(rel(il.value, el.value, value_scale));
    let slope_mismatch = rel(iu.slope, eu.slope, slope_scale).max(rel(il.slope, el.slope, slope_scale));
    let tolerance = 10.0 * coupling.alpha.powi(2 * series.order() as i32 + 2);
    Ok(JoinReport {
        family: series.family,
        interior_upper: iu,
        interior_lower: il,
        exterior_upper: eu,
        exterior_lower: el,
        value_mismatch,
        slope_mismatch,
        tolerance,
        smooth: value_mismatch <= tolerance && slope_mismatch <= tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileMeta {
    pub alpha: f64,
    pub eta: f64,
    pub order: usize,
}

/// One sampled radial function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub name: String,
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: ProfileMeta,
}

/// Default figure grid: 300 log-spaced points on `[1e-4, 1]` and 100
/// linear points on `(1, 3]`.
pub fn default_grid(points: usize) -> Vec<f64> {
    let log_points = (points * 3) / 4;
    let lin_points = points - log_points;
    let mut grid = crate::roots::log_grid(1e-4, 1.0, log_points.max(2));
    grid.extend((1..=lin_points).map(|i| 1.0 + 2.0 * i as f64 / lin_points as f64));
    grid
}

fn physical_or_exterior(series: &SeriesSolution, alpha: f64, eta: f64, s: f64) -> Result<(f64, f64)> {
    let (u, l) = if s > 1.0 {
        exterior(series, eta, s)?
    } else {
        series.physical(alpha, eta, s)?
    };
    Ok((u.value, l.value))
}

/// Samples the physical upper and lower functions of one family on `grid`,
/// switching to the exterior forms for `s > 1`.
pub fn sample_profiles(
    series: &SeriesSolution,
    alpha: f64,
    eta: f64,
    grid: &[f64],
    exec: crate::exec::Execution,
) -> Result<[RadialProfile; 2]> {
    let values = exec.map(grid, |&s| physical_or_exterior(series, alpha, eta, s));
    let mut upper = Vec::with_capacity(grid.len());
    let mut lower = Vec::with_capacity(grid.len());
    for v in values {
        let (u, l) = v?;
        upper.push(u);
        lower.push(l);
    }
    let meta = ProfileMeta {
        alpha,
        eta,
        order: series.order(),
    };
    let (un, ln) = match series.family {
        Family::First => ("F", "G"),
        Family::Second => ("f", "g"),
    };
    Ok([
        RadialProfile {
            name: un.into(),
            s: grid.to_vec(),
            values: upper,
            meta: meta.clone(),
        },
        RadialProfile {
            name: ln.into(),
            s: grid.to_vec(),
            values: lower,
            meta,
        },
    ])
}

/// Samples the bilinear products `Ff` and `Gg`, which are null beyond `s = 1`.
pub fn sample_products(
    first: &SeriesSolution,
    second: &SeriesSolution,
    alpha: f64,
    eta: f64,
    grid: &[f64],
    exec: crate::exec::Execution,
) -> Result<[RadialProfile; 2]> {
    require(first, Family::First, 0)?;
    require(second, Family::Second, 0)?;
    let values = exec.map(grid, |&s| -> Result<(f64, f64)> {
        if s > 1.0 {
            return Ok((0.0, 0.0));
        }
        let (big_f, big_g) = physical_or_exterior(first, alpha, eta, s)?;
        let (small_f, small_g) = physical_or_exterior(second, alpha, eta, s)?;
        Ok((big_f * small_f, big_g * small_g))
    });
    let mut ff = Vec::with_capacity(grid.len());
    let mut gg = Vec::with_capacity(grid.len());
    for v in values {
        let (a, b) = v?;
        ff.push(a);
        gg.push(b);
    }
    let meta = ProfileMeta {
        alpha,
        eta,
        order: first.order().min(second.order()),
    };
    Ok([
        RadialProfile {
            name: "Ff".into(),
            s: grid.to_vec(),
            values: ff,
            meta: meta.clone(),
        },
        RadialProfile {
            name: "Gg".into(),
            s: grid.to_vec(),
            values: gg,
            meta,
        },
    ])
}
