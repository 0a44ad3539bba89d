//! Output tables and the end-to-end pipelines shared by the command line
//! and the acceptance checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::loglaurent::LogLaurentPoly;
use crate::mass::{condition_audit, solve_eq29, solve_exact_condition, AuditRow, MassSolveResult, RootSearch};
use crate::potentials::CouplingSpec;
use crate::proton::{calibrate_n, ProtonSolveReport, ProtonSpec};
use crate::series::{
    default_grid, exterior_join_check, iterate_first_family, iterate_second_family, product_density, sample_products,
    sample_profiles, JoinReport, SeriesSolution,
};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// Twelve significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.11e}")
    }
}

fn escape(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self {
            name: name.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => format_number(*x),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(t) => escape(t),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Writes `<dir>/<name>.csv`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.csv", self.name));
        std::fs::write(&path, self.to_csv())?;
        Ok(path)
    }
}

/// Named series forms stored in the golden file, for `a₀ = b₀ = 1`.
pub fn golden_forms() -> Result<Vec<(&'static str, LogLaurentPoly)>> {
    let first = iterate_first_family(BigRational::one(), 1);
    let second = iterate_second_family(BigRational::one(), 1);
    let xi = product_density(&first, &second, 1)?.per_unit_norm();
    Ok(vec![
        ("F0", first.upper[0].clone()),
        ("G1", first.lower[1].clone()),
        ("g0", second.lower[0].clone()),
        ("xi0", xi[0].clone()),
        ("xi1", xi[1].clone()),
    ])
}

pub fn golden_text() -> Result<String> {
    let mut out = String::new();
    for (name, poly) in golden_forms()? {
        writeln!(out, "{name} = {poly}").expect("writing to a String");
    }
    Ok(out)
}

pub fn parse_golden(text: &str) -> Result<BTreeMap<String, LogLaurentPoly>> {
    let mut out = BTreeMap::new();
    for (k, v) in crate::potentials::parse_key_values(text)? {
        let poly: LogLaurentPoly = v.parse().map_err(|e| Error::Parse(format!("golden entry {k}: {e}")))?;
        out.insert(k, poly);
    }
    Ok(out)
}

/// Everything the electron command produces.
#[derive(Debug, Clone)]
pub struct ElectronRun {
    pub first: SeriesSolution,
    pub second: SeriesSolution,
    pub mass: MassSolveResult,
    pub coupling: CouplingSpec,
    pub joins: [JoinReport; 2],
    /// fig1a (F, G), fig1b (f, g), fig1c (Ff, Gg).
    pub figures: [Table; 3],
}

pub fn electron_run(cfg: &RunConfig) -> Result<ElectronRun> {
    let k = cfg.order;
    let first = iterate_first_family(BigRational::one(), k);
    let second = iterate_second_family(BigRational::one(), k);
    let alpha = cfg.constants.alpha;
    let mass = solve_exact_condition(&first, &second, alpha, k, &cfg.constants, &cfg.root_search(), cfg.quad, cfg.execution)?;
    let coupling = CouplingSpec::from_eta(alpha, mass.eta_root)?;
    let joins = [
        exterior_join_check(&first, &coupling)?,
        exterior_join_check(&second, &coupling)?,
    ];
    let grid = default_grid(cfg.grid_points);
    let eta = mass.eta_root;
    let [big_f, big_g] = sample_profiles(&first, alpha, eta, &grid, cfg.execution)?;
    let [small_f, small_g] = sample_profiles(&second, alpha, eta, &grid, cfg.execution)?;
    let [ff, gg] = sample_products(&first, &second, alpha, eta, &grid, cfg.execution)?;
    let panel = |name: &str, cols: [&str; 2], a: &[f64], b: &[f64]| {
        let mut t = Table::new(name, &["s", cols[0], cols[1]]);
        for i in 0..grid.len() {
            t.push(vec![grid[i].into(), a[i].into(), b[i].into()]);
        }
        t
    };
    let figures = [
        panel("fig1a", ["F", "G"], &big_f.values, &big_g.values),
        panel("fig1b", ["f", "g"], &small_f.values, &small_g.values),
        panel("fig1c", ["Ff", "Gg"], &ff.values, &gg.values),
    ];
    Ok(ElectronRun {
        first,
        second,
        mass,
        coupling,
        joins,
        figures,
    })
}

/// Both mass solves and the term audit at the exact root.
#[derive(Debug, Clone, Serialize)]
pub struct MassRun {
    pub closed_form: MassSolveResult,
    pub exact: MassSolveResult,
    /// `(exact − closed form) / closed form` for the mass.
    pub relative_difference: f64,
    pub audit: Vec<AuditRow>,
}

impl MassRun {
    pub fn audit_table(&self) -> Table {
        let mut t = Table::new("condition_audit", &["order", "exp", "log_pow", "coefficient", "integral", "contribution"]);
        for r in &self.audit {
            t.push(vec![
                Cell::Int(r.order as i64),
                Cell::Int(r.exp as i64),
                Cell::Int(r.log_pow as i64),
                r.coefficient.into(),
                r.integral.into(),
                r.contribution.into(),
            ]);
        }
        t
    }
}

pub fn mass_run(cfg: &RunConfig) -> Result<MassRun> {
    let alpha = cfg.constants.alpha;
    let closed_form = solve_eq29(alpha, cfg.c0_value(), &cfg.constants, &RootSearch::closed_form(), cfg.execution)?;
    let first = iterate_first_family(BigRational::one(), cfg.order);
    let second = iterate_second_family(BigRational::one(), cfg.order);
    let exact = solve_exact_condition(&first, &second, alpha, cfg.order, &cfg.constants, &cfg.root_search(), cfg.quad, cfg.execution)?;
    let audit = condition_audit(&first, &second, alpha, exact.eta_root, cfg.order, cfg.quad)?;
    Ok(MassRun {
        relative_difference: (exact.m_nu_ev - closed_form.m_nu_ev) / closed_form.m_nu_ev,
        closed_form,
        exact,
        audit,
    })
}

/// Proton scan with the spin coupling of the exact electron solve.
pub fn proton_run(cfg: &RunConfig, electron_beta: f64) -> Result<ProtonSolveReport> {
    let scan = cfg.scan_config(electron_beta)?;
    let template = ProtonSpec::from_constants(&cfg.constants, electron_beta, 0.0, 1.0)?;
    calibrate_n(&template, &scan, cfg.execution)
}

pub fn scan_table(report: &ProtonSolveReport) -> Table {
    let mut t = Table::new(
        "proton_scan",
        &["n", "coulomb_sign", "s0", "condition_value", "self_energy", "eta_root", "implied_mass_ratio", "error"],
    );
    for r in &report.rows {
        t.push(vec![
            r.n.into(),
            Cell::Int(r.coulomb_sign as i64),
            r.s0.into(),
            r.condition_value.into(),
            r.self_energy.into(),
            r.eta_roots.first().copied().into(),
            r.implied_ratio.into(),
            r.error.clone().map_or(Cell::Empty, Cell::Text),
        ]);
    }
    t
}

/// The exact electron `β`, used wherever the proton scan needs it.
pub fn electron_beta(cfg: &RunConfig) -> Result<f64> {
    let first = iterate_first_family(BigRational::one(), cfg.order);
    let second = iterate_second_family(BigRational::one(), cfg.order);
    Ok(solve_exact_condition(
        &first,
        &second,
        cfg.constants.alpha,
        cfg.order,
        &cfg.constants,
        &cfg.root_search(),
        cfg.quad,
        Execution::Sequential,
    )?
    .beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_has_twelve_digits() {
        assert_eq!(format_number(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(format_number(-2.5e-7), "-2.50000000000e-7");
        assert_eq!(format_number(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("x", &["a", "b", "c"]);
        t.push(vec![1.0.into(), Cell::Empty, Cell::Text("no bracket, sorry".into())]);
        assert_eq!(t.to_csv(), "a,b,c\n1.00000000000e0,,\"no bracket, sorry\"\n");
    }

    #[test]
    fn golden_round_trip() {
        let text = golden_text().unwrap();
        let parsed = parse_golden(&text).unwrap();
        for (name, poly) in golden_forms().unwrap() {
            assert_eq!(parsed[name], poly);
        }
    }

    #[test]
    fn checked_in_golden_matches_engine() {
        let text = std::fs::read_to_string(crate::config::default_golden_file()).unwrap();
        assert_eq!(text, golden_text().unwrap());
    }

    #[test]
    fn electron_figures_have_grid_rows() {
        let cfg = RunConfig::default();
        let run = electron_run(&cfg).unwrap();
        for t in &run.figures {
            assert_eq!(t.rows.len(), 400);
            assert_eq!(t.headers.len(), 3);
        }
        assert!(run.joins.iter().all(|j| j.smooth));
    }

    #[test]
    fn orders_one_and_three_differ_at_alpha_to_the_fourth() {
        let grid: Vec<f64> = crate::roots::log_grid(0.1, 1.0, 200);
        let gap = |alpha: f64, j: usize| {
            let products = |k: usize| {
                let first = iterate_first_family(BigRational::one(), k);
                let second = iterate_second_family(BigRational::one(), k);
                sample_products(&first, &second, alpha, 0.13 * alpha, &grid, Execution::Sequential).unwrap()
            };
            let (one, three) = (products(1), products(3));
            let (a, b) = (&three[j].values, &one[j].values);
            let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
        };
        for j in 0..2 {
            let (d1, d2) = (gap(1.0 / 137.0, j), gap(0.5 / 137.0, j));
            assert!((3.5..4.5).contains(&(d1 / d2).log2()), "{j}: {d1:e} {d2:e}");
        }
    }
}
