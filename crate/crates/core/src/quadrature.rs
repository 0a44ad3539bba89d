//! Integrals of the form `∫₀¹ exp(-η/s) · P(s) ds` for log-Laurent `P`.
//!
//! The essential singularity at `s = 0` is removed by `u = 1/s`, which turns
//! each monomial into `∫₁^∞ exp(-η u) u^(-j-2) (-ln u)^p du`. A second map
//! `u = e^t` makes power-law tails smooth, and the result is integrated by
//! adaptive Gauss-Kronrod (7/15) on `[0, T]`, with `T` chosen where the
//! integrand has fallen below `1e-18` of its peak.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::loglaurent::{rational_to_f64, LogLaurentPoly, Monomial};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl QuadTolerance {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs > 0.0) || !(self.rel > 0.0) {
            return Err(invalid("tolerance", "absolute and relative tolerances must be positive"));
        }
        if self.max_intervals == 0 {
            return Err(invalid("tolerance", "max_intervals must be positive"));
        }
        Ok(())
    }
}

// Kronrod abscissae (descending, last is the centre) and weights; the
// Gauss 7-point rule uses the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss-Kronrod 7/15 panel: `(kronrod estimate, |kronrod - gauss|)`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive integration of `f` over `[a, b]`, starting from
/// `initial_panels` equal panels and bisecting the worst panel until the
/// summed error estimate meets the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: &QuadTolerance,
) -> Result<QuadResult> {
    tol.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("interval", "endpoints must be finite"));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let panels = initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let mut heap = BinaryHeap::with_capacity(panels * 4);
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        let (value, error) = gk15(&f, lo, hi);
        heap.push(Panel { a: lo, b: hi, value, error });
    }
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if !value.is_finite() {
            return Err(Error::QuadratureTolerance {
                estimate: value,
                error,
                intervals: heap.len(),
            });
        }
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(QuadResult {
                value,
                error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureTolerance {
                estimate: value,
                error,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in f64
            return Err(Error::QuadratureTolerance {
                estimate: value,
                error,
                intervals: heap.len() + 1,
            });
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(invalid("eta", format!("must be positive and finite, got {eta}")));
    }
    Ok(())
}

/// Log of the `t`-space integrand magnitude of one monomial, `u = e^t`.
fn log_magnitude(eta: f64, mono: Monomial, t: f64) -> f64 {
    let power = -(mono.exp as f64) - 1.0;
    let log_part = if mono.log_pow == 0 {
        0.0
    } else if t <= 0.0 {
        f64::NEG_INFINITY
    } else {
        mono.log_pow as f64 * t.ln()
    };
    -eta * t.exp() + power * t + log_part
}

/// Upper limit in `t` beyond which the monomial integrand is below `1e-18`
/// of its maximum on `[0, ∞)`.
fn tail_cutoff(eta: f64, mono: Monomial) -> f64 {
    const DROP: f64 = 41.5; // ln(1e18)
    let power = -(mono.exp as f64) - 1.0;
    // the maximum lies at or before the point where eta e^t = power + log_pow + 1
    let reach = ((power.max(0.0) + mono.log_pow as f64 + 1.0) / eta).ln().max(1.0);
    let steps = 256;
    let mut peak = f64::NEG_INFINITY;
    let mut t_peak = 0.0;
    for i in 0..=steps {
        let t = reach * i as f64 / steps as f64;
        let v = log_magnitude(eta, mono, t);
        if v > peak {
            peak = v;
            t_peak = t;
        }
    }
    let mut t = t_peak.max(reach);
    while log_magnitude(eta, mono, t) > peak - DROP {
        t += 0.5;
    }
    t
}

/// `∫₀¹ exp(-η/s) s^exp (ln s)^log_pow ds`.
pub fn monomial_integral(eta: f64, mono: Monomial, tol: &QuadTolerance) -> Result<f64> {
    check_eta(eta)?;
    let t_max = tail_cutoff(eta, mono);
    let power = -(mono.exp as f64) - 1.0;
    let p = mono.log_pow as i32;
    let integrand = |t: f64| (-eta * t.exp() + power * t).exp() * (-t).powi(p);
    let panels = (t_max / 0.5).ceil() as usize;
    Ok(integrate(integrand, 0.0, t_max, panels, tol)?.value)
}

/// Input bundle for [`weighted_integral`].
#[derive(Debug, Clone)]
pub struct WeightedIntegralSpec {
    pub eta: f64,
    pub integrand: LogLaurentPoly,
}

/// Per-monomial contribution `c · ∫₀¹ W s^j (ln s)^p ds`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermIntegral {
    pub exp: i32,
    pub log_pow: u32,
    pub coefficient: f64,
    pub integral: f64,
    pub contribution: f64,
}

pub fn weighted_integral_terms(
    eta: f64,
    integrand: &LogLaurentPoly,
    tol: &QuadTolerance,
) -> Result<Vec<TermIntegral>> {
    check_eta(eta)?;
    integrand
        .terms()
        .map(|(mono, c)| {
            let integral = monomial_integral(eta, mono, tol)?;
            let coefficient = rational_to_f64(c);
            Ok(TermIntegral {
                exp: mono.exp,
                log_pow: mono.log_pow,
                coefficient,
                integral,
                contribution: coefficient * integral,
            })
        })
        .collect()
}

/// `∫₀¹ exp(-η/s) · integrand(s) ds`.
pub fn weighted_integral(eta: f64, integrand: &LogLaurentPoly, tol: &QuadTolerance) -> Result<f64> {
    Ok(weighted_integral_terms(eta, integrand, tol)?
        .iter()
        .map(|t| t.contribution)
        .sum())
}

impl WeightedIntegralSpec {
    pub fn new(eta: f64, integrand: LogLaurentPoly) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self { eta, integrand })
    }

    pub fn evaluate(&self, tol: &QuadTolerance) -> Result<f64> {
        weighted_integral(self.eta, &self.integrand, tol)
    }
}

/// Exponential integral `E₁(η) = ∫₁^∞ e^(-ηu) u⁻¹ du`: power series for
/// `η ≤ 1`, modified-Lentz continued fraction above.
pub fn exp_integral_e1(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    if eta <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -eta / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        Ok(-EULER_GAMMA - eta.ln() - sum)
    } else {
        const TINY: f64 = 1e-300;
        let mut b = eta + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok(h * (-eta).exp())
    }
}

/// The truncated logarithmic form `-ln η + η - η²/2 + c₀` kept verbatim
/// in the source derivation.
pub fn paper_log_approximation(eta: f64, c0: f64) -> Result<f64> {
    check_eta(eta)?;
    if eta > 1.0 {
        return Err(invalid("eta", "approximation is only meaningful for eta <= 1"));
    }
    Ok(-eta.ln() + eta - eta * eta / 2.0 + c0)
}

/// `-ln η + Σ_{k=1}^{order} (-1)^(k+1) η^k / (k·k!) + c₀`, the term-by-term
/// integral of `-η⁻¹ e^(-η)`.
pub fn log_series(eta: f64, c0: f64, order: usize) -> Result<f64> {
    check_eta(eta)?;
    let mut sum = 0.0;
    let mut pow_over_fact = 1.0;
    for k in 1..=order {
        pow_over_fact *= eta / k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * pow_over_fact / k as f64;
    }
    Ok(-eta.ln() + sum + c0)
}

/// `c₀` implied by the numerically integrated `∫₀¹ W s⁻¹ ds` and a series of
/// the given order; tends to `-γ_E` as the order grows.
pub fn c0_empirical(eta: f64, order: usize, tol: &QuadTolerance) -> Result<f64> {
    let numeric = monomial_integral(eta, Monomial::new(-1, 0), tol)?;
    Ok(numeric - log_series(eta, 0.0, order)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loglaurent::rat;

    fn tight() -> QuadTolerance {
        QuadTolerance {
            abs: 1e-15,
            rel: 1e-13,
            max_intervals: 8000,
        }
    }

    // independent oracle: plain alternating series, no continued fraction
    fn e1_series_oracle(x: f64) -> f64 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..400 {
            term *= -x / k as f64;
            sum += term / k as f64;
        }
        -EULER_GAMMA - x.ln() - sum
    }

    #[test]
    fn gk15_is_exact_for_low_degree_polynomials() {
        // Kronrod 15 is exact through degree 22, Gauss 7 through degree 13
        for deg in 0..=22 {
            let (v, _) = gk15(&|x: f64| x.powi(deg), 0.0, 1.0);
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((v - exact).abs() < 1e-14, "degree {deg}: {v} vs {exact}");
        }
        for deg in 0..=13 {
            let (_, err) = gk15(&|x: f64| x.powi(deg), -1.0, 1.0);
            assert!(err < 1e-14, "gauss part wrong at degree {deg}");
        }
        let (_, err) = gk15(&|x: f64| x.powi(14), -1.0, 1.0);
        assert!(err > 1e-6);
    }

    #[test]
    fn weighted_inverse_s_is_e1() {
        let w = weighted_integral(1.0, &LogLaurentPoly::power(-1), &QuadTolerance::default()).unwrap();
        assert!((w - 0.219_383_934_395_520_3).abs() < 1e-10);
        for eta in [1e-3, 1e-2, 0.1, 1.0] {
            let num = weighted_integral(eta, &LogLaurentPoly::power(-1), &QuadTolerance::default()).unwrap();
            let oracle = e1_series_oracle(eta);
            assert!(((num - oracle) / oracle).abs() < 1e-10, "eta={eta}: {num} vs {oracle}");
        }
    }

    #[test]
    fn weighted_inverse_cube_closed_form() {
        let w = weighted_integral(1.0, &LogLaurentPoly::power(-3), &QuadTolerance::default()).unwrap();
        assert!((w - 2.0 / std::f64::consts::E).abs() < 1e-10);
        for eta in [1e-3f64, 0.1, 1.0, 3.0] {
            let num = weighted_integral(eta, &LogLaurentPoly::power(-3), &QuadTolerance::default()).unwrap();
            let exact = (-eta).exp() * (1.0 + eta) / (eta * eta);
            assert!(((num - exact) / exact).abs() < 1e-10, "eta={eta}");
        }
    }

    #[test]
    fn weighted_constant_tends_to_one() {
        let tol = QuadTolerance::default();
        let one = LogLaurentPoly::one();
        let small = weighted_integral(1e-8, &one, &tol).unwrap();
        assert!((small - 1.0).abs() < 1e-6);
        // ∫₀¹ e^(-η/s) ds = e^(-η) - η E₁(η)
        for eta in [1e-3f64, 0.5, 2.0] {
            let exact = (-eta).exp() - eta * exp_integral_e1(eta).unwrap();
            let num = weighted_integral(eta, &one, &tol).unwrap();
            assert!((num - exact).abs() < 1e-11);
        }
    }

    // brute-force oracle: composite trapezoid in t = ln u with Richardson step
    fn trapezoid_oracle(eta: f64, exp: i32, log_pow: u32) -> f64 {
        let power = -(exp as f64) - 1.0;
        let f = |t: f64| (-eta * t.exp() + power * t).exp() * (-t).powi(log_pow as i32);
        let t_max = (60.0 / eta).ln() + 2.0;
        let trap = |n: usize| {
            let h = t_max / n as f64;
            let mut s = 0.5 * (f(0.0) + f(t_max));
            for i in 1..n {
                s += f(i as f64 * h);
            }
            s * h
        };
        let (a, b) = (trap(200_000), trap(400_000));
        b + (b - a) / 3.0
    }

    #[test]
    fn log_power_terms_match_trapezoid_oracle() {
        let tol = QuadTolerance::default();
        for (eta, exp, lp) in [(1e-3, 1, 1), (1e-2, -2, 1), (0.1, 0, 2), (1.0, -1, 3), (1e-3, -3, 1)] {
            let num = monomial_integral(eta, Monomial::new(exp, lp), &tol).unwrap();
            let oracle = trapezoid_oracle(eta, exp, lp);
            assert!(
                ((num - oracle) / oracle).abs() < 1e-8,
                "eta={eta} j={exp} p={lp}: {num} vs {oracle}"
            );
        }
    }

    #[test]
    fn weighted_integral_is_linear() {
        let tol = QuadTolerance::default();
        let a = LogLaurentPoly::from_terms([(rat(1, 1), -3, 0), (rat(-4, 1), -2, 0), (rat(60, 1), 1, 1)]);
        let b = LogLaurentPoly::from_terms([(rat(1, 1), -1, 0), (rat(-2, 1), 0, 0), (rat(1, 1), 1, 0)]);
        let eta = 2e-3;
        let lhs = weighted_integral(eta, &(&a.scale(&rat(3, 1)) + &b), &tol).unwrap();
        let rhs = 3.0 * weighted_integral(eta, &a, &tol).unwrap() + weighted_integral(eta, &b, &tol).unwrap();
        assert!(((lhs - rhs) / rhs).abs() < 1e-10);
    }

    #[test]
    fn weighted_integral_decreases_in_eta_for_positive_integrand() {
        let tol = QuadTolerance::default();
        let pos = LogLaurentPoly::from_terms([(rat(1, 1), -2, 0), (rat(1, 1), 0, 0), (rat(1, 1), 2, 0)]);
        let mut prev = f64::INFINITY;
        for eta in [1e-4, 1e-3, 1e-2, 0.1, 1.0] {
            let v = weighted_integral(eta, &pos, &tol).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn rejects_non_positive_eta() {
        let tol = QuadTolerance::default();
        assert!(weighted_integral(0.0, &LogLaurentPoly::one(), &tol).is_err());
        assert!(weighted_integral(-1.0, &LogLaurentPoly::one(), &tol).is_err());
        assert!(exp_integral_e1(0.0).is_err());
        assert!(WeightedIntegralSpec::new(-2.0, LogLaurentPoly::one()).is_err());
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        let tol = QuadTolerance {
            abs: 1e-30,
            rel: 1e-30,
            max_intervals: 8,
        };
        let e = weighted_integral(1e-3, &LogLaurentPoly::power(-1), &tol);
        assert!(matches!(e, Err(Error::QuadratureTolerance { .. })));
    }

    #[test]
    fn e1_values() {
        assert!((exp_integral_e1(1.0).unwrap() - 0.219_383_934_395_520_3).abs() < 1e-13);
        let small = exp_integral_e1(1e-3).unwrap();
        assert!((small - (-EULER_GAMMA - 1e-3f64.ln() + 1e-3)).abs() < 1e-6);
        assert!((small - 6.331_539_364_136_149).abs() < 1e-11);
        for x in [1.5, 2.0, 5.0] {
            let cf = exp_integral_e1(x).unwrap();
            let oracle = e1_series_oracle(x);
            assert!(((cf - oracle) / oracle).abs() < 1e-11, "x={x}");
        }
        let num = weighted_integral(1.0, &LogLaurentPoly::power(-1), &tight()).unwrap();
        assert!((num - exp_integral_e1(1.0).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn e1_is_monotone_decreasing() {
        let xs = [1e-4, 1e-3, 0.01, 0.5, 0.99, 1.0, 1.01, 2.0, 10.0, 40.0];
        let vals: Vec<f64> = xs.iter().map(|&x| exp_integral_e1(x).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn reference_form_versus_exact() {
        let reference = paper_log_approximation(1e-3, -0.51).unwrap();
        assert!((reference - 6.398_754_779).abs() < 1e-8);
        let exact = exp_integral_e1(1e-3).unwrap();
        assert!((reference - exact - 0.067).abs() < 1e-3);
        let gap = (-0.51) - (-EULER_GAMMA);
        assert!((reference - exact - gap).abs() < 1e-6);
        // corrected second-order term -η²/4 with c₀ = -γ_E at η = 1
        let corrected = 1.0 - 0.25 - 0.5772;
        assert!((corrected - exact_at_one()).abs() < 0.05);
        assert!(paper_log_approximation(2.0, -0.51).is_err());
    }

    fn exact_at_one() -> f64 {
        exp_integral_e1(1.0).unwrap()
    }

    #[test]
    fn log_series_second_order_term_is_quarter() {
        let eta: f64 = 0.3;
        let two = log_series(eta, 0.0, 2).unwrap();
        assert!((two - (-eta.ln() + eta - eta * eta / 4.0)).abs() < 1e-15);
    }

    #[test]
    fn c0_converges_to_minus_euler_gamma() {
        let tol = tight();
        let mut prev_gap = f64::INFINITY;
        for order in [2, 4, 6, 8, 10, 12] {
            let c0 = c0_empirical(1.0, order, &tol).unwrap();
            let gap = (c0 + EULER_GAMMA).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-6);
    }
}
