//! Exploratory proton model.
//!
//! The electron radial system is reused with its source factor
//! `α(1 - s⁻¹)` replaced by `α - V(s)`, where `V = σα/s + n e^(-μs)/s`
//! adds a neutral-meson Yukawa term to the Coulomb one (`σ = ±1` selects the
//! Coulomb sign). With the spin damping extracted, and `t = ln s`:
//!
//! ```text
//! dF/dt = s B G - 2F      dG/dt = -s B F      B = α - V(s)
//! ```
//!
//! and likewise for `(f, g)`. Integration runs inward from `s₀`, the radius
//! where `B` vanishes, with the electron boundary values. The condition and
//! self-energy integrals are carried as extra components of the state.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::ode::{integrate_adaptive, integrate_fixed, observed_order, OdeTolerance, Rhs, Trajectory};
use crate::potentials::PhysicalConstants;
use crate::roots;

/// Weight `e^(-η/s)` is below `e^-60` inside this fraction of `η`.
pub const INNER_CUTOFF: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtonSpec {
    pub alpha: f64,
    /// Combined spin damping of the two solutions, weight `e^(-η/s)`.
    pub eta: f64,
    pub n: f64,
    pub mu_pi: f64,
    /// `+1` for the electron-like Coulomb term, `-1` for the flipped one.
    pub coulomb_sign: f64,
    pub s_max: f64,
}

impl ProtonSpec {
    pub fn new(alpha: f64, eta: f64, n: f64, mu_pi: f64, coulomb_sign: f64) -> Result<Self> {
        let spec = Self {
            alpha,
            eta,
            n,
            mu_pi,
            coulomb_sign,
            s_max: 1e4,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Spin coupling `β` shared with the electron, radial scale set by the
    /// proton rest energy: `η = 2β (m_p/m_e) / α`, `μ = α m_π0/m_p`.
    pub fn from_constants(c: &PhysicalConstants, beta: f64, n: f64, coulomb_sign: f64) -> Result<Self> {
        Self::new(
            c.alpha,
            2.0 * beta / (c.alpha * c.electron_proton_ratio()),
            n,
            c.alpha * c.pion_proton_ratio(),
            coulomb_sign,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(invalid("alpha", "must be positive"));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(invalid("eta", "must be positive"));
        }
        if !(self.n >= 0.0) || !self.n.is_finite() {
            return Err(invalid("n", "must be non-negative"));
        }
        if !(self.mu_pi > 0.0) {
            return Err(invalid("mu_pi", "must be positive"));
        }
        if self.coulomb_sign != 1.0 && self.coulomb_sign != -1.0 {
            return Err(invalid("coulomb_sign", "must be +1 or -1"));
        }
        if !(self.s_max > 0.0) {
            return Err(invalid("s_max", "must be positive"));
        }
        Ok(())
    }

    pub fn with_n(self, n: f64) -> Self {
        Self { n, ..self }
    }

    pub fn with_eta(self, eta: f64) -> Self {
        Self { eta, ..self }
    }

    /// `V(s) = σα/s + n e^(-μs)/s`.
    pub fn potential(&self, s: f64) -> f64 {
        (self.coulomb_sign * self.alpha + self.n * (-self.mu_pi * s).exp()) / s
    }
}

/// `B(s) = α - V(s)`; equals `α(1 - s⁻¹)` for `n = 0`, `σ = +1`.
pub fn effective_source(s: f64, spec: &ProtonSpec) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::NonPositiveRadius(s));
    }
    Ok(spec.alpha - spec.potential(s))
}

/// Every zero of `B` on `(10⁻³, s_max)`, ascending.
pub fn source_roots(spec: &ProtonSpec) -> Result<Vec<f64>> {
    let roots = roots::all_roots(
        |s| effective_source(s, spec),
        1e-3,
        spec.s_max,
        400,
        1e-14,
        Execution::Sequential,
        "effective source",
    )?;
    Ok(roots.into_iter().map(|r| r.0).collect())
}

/// The outermost zero of `B`.
pub fn outer_s0(spec: &ProtonSpec) -> Result<f64> {
    Ok(*source_roots(spec)?.last().expect("all_roots returns at least one root"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepping {
    Adaptive(OdeTolerance),
    Fixed(usize),
}

impl Default for Stepping {
    fn default() -> Self {
        Stepping::Adaptive(OdeTolerance::default())
    }
}

/// Radial points and solution values, outermost first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtonSolution {
    pub s0: f64,
    pub s_end: f64,
    pub a0: f64,
    pub b0: f64,
    pub s: Vec<f64>,
    /// `(F, G)` at each radius.
    pub first: Vec<(f64, f64)>,
    /// `(f, g)` at each radius.
    pub second: Vec<(f64, f64)>,
    /// `∫ G g V s² e^(-η/s) ds` over `[s_end, s₀]`.
    pub condition_raw: f64,
    /// `4π ∫ V (Ff + Gg) s² e^(-η/s) ds` over `[s_end, s₀]`.
    pub energy_raw: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl ProtonSolution {
    fn per_norm(&self, v: f64) -> f64 {
        let norm = self.a0 * self.b0;
        if norm == 0.0 {
            0.0
        } else {
            v / norm
        }
    }
}

/// Default inner radius: where the weight has dropped by `e^-60`.
pub fn default_inner_radius(eta: f64, s0: f64) -> f64 {
    (eta / INNER_CUTOFF).min(0.5 * s0)
}

const STATE: usize = 8;

fn rhs(spec: ProtonSpec) -> impl Fn(f64, &[f64; STATE]) -> [f64; STATE] {
    move |t, y| {
        let s = t.exp();
        let v = spec.potential(s);
        let sb = s * (spec.alpha - v);
        let w = (-spec.eta / s).exp() * s * s * s;
        let (big_f, big_g, f, g) = (y[0], y[1], y[2], y[3]);
        let hc = big_g * g * v * w;
        let he = 4.0 * PI * v * (big_f * f + big_g * g) * w;
        [
            sb * big_g - 2.0 * big_f,
            -sb * big_f,
            sb * g - 2.0 * f,
            -sb * f,
            -hc,
            -he,
            -hc.abs(),
            -he.abs(),
        ]
    }
}

/// Each family is measured against its larger member; the integrals
/// against the total absolute integrals `totals`, or not at all when those
/// are unknown (infinite).
fn error_scale(totals: [f64; 2]) -> impl Fn(&[f64; STATE], &[f64; STATE]) -> [f64; STATE] {
    move |old, new| {
        let fam = |i: usize| old[i].abs().max(old[i + 1].abs()).max(new[i].abs()).max(new[i + 1].abs());
        let (a, b) = (fam(0), fam(2));
        let (c, e) = (new[6].abs().max(totals[0]), new[7].abs().max(totals[1]));
        [a, a, b, b, c, e, c, e]
    }
}

/// Integrates both families from `s0` inward to `s_end`.
pub fn integrate_proton_system(spec: &ProtonSpec, s0: f64, s_end: f64, a0: f64, b0: f64, stepping: Stepping) -> Result<ProtonSolution> {
    spec.validate()?;
    if !(s_end > 0.0) || !(s0 > s_end) {
        return Err(invalid("radii", format!("need 0 < s_end < s0, got ({s_end}, {s0})")));
    }
    let f = rhs(*spec);
    let f: &Rhs<STATE> = &f;
    let y0 = [0.0, a0, b0 / (s0 * s0), 0.0, 0.0, 0.0, 0.0, 0.0];
    let (t0, t1) = (s0.ln(), s_end.ln());
    let traj: Trajectory<STATE> = match stepping {
        Stepping::Adaptive(tol) => {
            // the first pass only sizes the integrals
            let rough = integrate_adaptive(f, t0, t1, y0, &tol, &error_scale([f64::INFINITY; 2]))?;
            let totals = [rough.last()[6].abs(), rough.last()[7].abs()];
            integrate_adaptive(f, t0, t1, y0, &tol, &error_scale(totals))?
        }
        Stepping::Fixed(steps) => integrate_fixed(f, t0, t1, y0, steps)?,
    };
    let last = traj.last();
    Ok(ProtonSolution {
        s0,
        s_end,
        a0,
        b0,
        s: traj.t.iter().map(|t| t.exp()).collect(),
        first: traj.y.iter().map(|y| (y[0], y[1])).collect(),
        second: traj.y.iter().map(|y| (y[2], y[3])).collect(),
        condition_raw: last[4],
        energy_raw: last[5],
        steps: traj.steps(),
        rejected: traj.rejected,
    })
}

/// `∫₀^{s₀} G g V s² e^(-η/s) ds` per unit `a₀ b₀`.
pub fn proton_condition(solution: &ProtonSolution) -> f64 {
    solution.per_norm(solution.condition_raw)
}

/// `4π ∫₀^{s₀} V (Ff + Gg) s² e^(-η/s) ds` per unit `a₀ b₀`.
pub fn proton_self_energy(solution: &ProtonSolution) -> f64 {
    solution.per_norm(solution.energy_raw)
}

/// Solves from the outermost `s₀` to the default inner radius.
pub fn solve(spec: &ProtonSpec, stepping: Stepping) -> Result<ProtonSolution> {
    let s0 = outer_s0(spec)?;
    integrate_proton_system(spec, s0, default_inner_radius(spec.eta, s0), 1.0, 1.0, stepping)
}

/// Condition value as a function of the damping `η`, with `s₀` fixed.
pub fn condition_at_eta(spec: &ProtonSpec, s0: f64, eta: f64, stepping: Stepping) -> Result<f64> {
    let spec = spec.with_eta(eta);
    let sol = integrate_proton_system(&spec, s0, default_inner_radius(eta, s0), 1.0, 1.0, stepping)?;
    Ok(proton_condition(&sol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaSearch {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub rel_width: f64,
}

impl Default for EtaSearch {
    fn default() -> Self {
        Self {
            lo: 1e-6,
            hi: 10.0,
            points: 48,
            rel_width: 1e-10,
        }
    }
}

/// Zeros in `η` of the condition integral, ascending; empty if none.
pub fn eta_roots(spec: &ProtonSpec, s0: f64, search: &EtaSearch, stepping: Stepping) -> Result<Vec<f64>> {
    let f = |eta: f64| condition_at_eta(spec, s0, eta, stepping);
    match roots::all_roots(f, search.lo, search.hi, search.points, search.rel_width, Execution::Sequential, "proton condition") {
        Ok(r) => Ok(r.into_iter().map(|r| r.0).collect()),
        Err(Error::NoBracket { .. }) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

/// Fixed-step self-convergence at `N, 2N, 4N` steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RichardsonReport {
    pub steps: [usize; 3],
    pub condition: [f64; 3],
    pub upper: [f64; 3],
    pub order_condition: f64,
    pub order_upper: f64,
}

pub fn richardson(spec: &ProtonSpec, s0: f64, s_end: f64, base_steps: usize) -> Result<RichardsonReport> {
    let steps = [base_steps, 2 * base_steps, 4 * base_steps];
    let mut condition = [0.0; 3];
    let mut upper = [0.0; 3];
    for (i, &n) in steps.iter().enumerate() {
        let sol = integrate_proton_system(spec, s0, s_end, 1.0, 1.0, Stepping::Fixed(n))?;
        condition[i] = sol.condition_raw;
        upper[i] = sol.first.last().expect("non-empty").0;
    }
    Ok(RichardsonReport {
        steps,
        condition,
        upper,
        order_condition: observed_order(condition[0], condition[1], condition[2]),
        order_upper: observed_order(upper[0], upper[1], upper[2]),
    })
}

/// Parameters of an `n` scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    pub ns: Vec<f64>,
    pub coulomb_signs: Vec<f64>,
    /// Electron spin coupling; sets the damping through the mass ratio.
    pub beta: f64,
    /// Target `m_e / m_p`.
    pub target_ratio: f64,
    pub eta_search: EtaSearch,
    pub stepping: Stepping,
}

impl Serialize for Stepping {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Stepping::Adaptive(t) => ser.serialize_str(&format!("adaptive(rel={:e})", t.rel)),
            Stepping::Fixed(n) => ser.serialize_str(&format!("fixed({n})")),
        }
    }
}

/// `n = 0`, the named couplings `1/7, 1/9, 1/11`, and `points` evenly
/// spaced values on `[lo, hi]`, sorted and deduplicated.
pub fn n_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let mut ns = vec![0.0, 1.0 / 7.0, 1.0 / 9.0, 1.0 / 11.0];
    match points {
        0 => {}
        1 => ns.push(lo),
        m => ns.extend((0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)),
    }
    ns.sort_by(f64::total_cmp);
    ns.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
    ns
}

pub fn default_n_grid(dense: usize) -> Vec<f64> {
    n_grid(1.0 / 14.0, 1.0 / 7.0, dense)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: f64,
    pub coulomb_sign: f64,
    pub s0: Option<f64>,
    pub all_s0: Vec<f64>,
    /// Condition per unit `a₀b₀` at the target damping.
    pub condition_value: Option<f64>,
    pub self_energy: Option<f64>,
    pub eta_roots: Vec<f64>,
    /// `2β / (α η_root)` for the smallest root.
    pub implied_ratio: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtonSolveReport {
    pub label: &'static str,
    pub alpha: f64,
    pub mu_pi: f64,
    pub target_eta: f64,
    pub target_ratio: f64,
    pub rows: Vec<ScanRow>,
    /// Zeros in `n` of the condition at the target damping, per sign.
    pub n_calibrated: Vec<(f64, f64)>,
    pub convergence: Option<RichardsonReport>,
    /// Continuity of the condition along `n`, per sign.
    pub continuous: Vec<(f64, bool)>,
}

fn scan_row(template: &ProtonSpec, n: f64, sign: f64, config: &ScanConfig) -> ScanRow {
    let mut row = ScanRow {
        n,
        coulomb_sign: sign,
        s0: None,
        all_s0: Vec::new(),
        condition_value: None,
        self_energy: None,
        eta_roots: Vec::new(),
        implied_ratio: None,
        error: None,
    };
    let result = (|| -> Result<()> {
        let spec = ProtonSpec {
            n,
            coulomb_sign: sign,
            ..*template
        };
        spec.validate()?;
        row.all_s0 = source_roots(&spec)?;
        let s0 = *row.all_s0.last().expect("non-empty");
        row.s0 = Some(s0);
        let sol = integrate_proton_system(&spec, s0, default_inner_radius(spec.eta, s0), 1.0, 1.0, config.stepping)?;
        row.condition_value = Some(proton_condition(&sol));
        row.self_energy = Some(proton_self_energy(&sol));
        row.eta_roots = eta_roots(&spec, s0, &config.eta_search, config.stepping)?;
        row.implied_ratio = row.eta_roots.first().map(|&e| 2.0 * config.beta / (spec.alpha * e));
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

/// Neighbouring differences never jump by more than a factor of ten.
pub fn is_continuous(values: &[f64]) -> bool {
    let d: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    (0..d.len()).all(|i| {
        let left = if i > 0 { d[i - 1] } else { 0.0 };
        let right = d.get(i + 1).copied().unwrap_or(0.0);
        let neighbour = left.max(right);
        neighbour == 0.0 || d[i] <= 10.0 * neighbour
    })
}

/// Scans `n`, tabulating `s₀`, the condition and self-energy at the target
/// damping, and the damping at which the condition vanishes.
pub fn calibrate_n(template: &ProtonSpec, config: &ScanConfig, exec: Execution) -> Result<ProtonSolveReport> {
    if config.ns.is_empty() || config.coulomb_signs.is_empty() {
        return Err(invalid("scan", "empty n range"));
    }
    if config.ns.iter().any(|&n| !(n >= 0.0) || !n.is_finite()) {
        return Err(invalid("scan", "n values must be non-negative"));
    }
    template.validate()?;
    let jobs: Vec<(f64, f64)> = config
        .coulomb_signs
        .iter()
        .flat_map(|&sign| config.ns.iter().map(move |&n| (n, sign)))
        .collect();
    let rows = exec.map(&jobs, |&(n, sign)| scan_row(template, n, sign, config));

    let mut n_calibrated = Vec::new();
    let mut continuous = Vec::new();
    for &sign in &config.coulomb_signs {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.coulomb_sign == sign && r.n > 0.0)
            .filter_map(|r| r.condition_value.map(|c| (r.n, c)))
            .collect();
        continuous.push((sign, is_continuous(&pts.iter().map(|p| p.1).collect::<Vec<_>>())));
        for w in pts.windows(2) {
            if w[0].1.signum() != w[1].1.signum() {
                let spec = ProtonSpec {
                    coulomb_sign: sign,
                    ..*template
                };
                let f = |n: f64| -> Result<f64> {
                    let s = spec.with_n(n);
                    Ok(proton_condition(&solve(&s, config.stepping)?))
                };
                let n = roots::bisect(f, roots::Bracket { lo: w[0].0, hi: w[1].0 }, 1e-8)?;
                n_calibrated.push((sign, n));
            }
        }
    }

    let reference = ProtonSpec {
        n: 1.0 / 11.0,
        coulomb_sign: 1.0,
        ..*template
    };
    let convergence = outer_s0(&reference)
        .and_then(|s0| richardson(&reference, s0, default_inner_radius(reference.eta, s0), 200))
        .ok();

    Ok(ProtonSolveReport {
        label: "exploratory",
        alpha: template.alpha,
        mu_pi: template.mu_pi,
        target_eta: template.eta,
        target_ratio: config.target_ratio,
        rows,
        n_calibrated,
        convergence,
        continuous,
    })
}
