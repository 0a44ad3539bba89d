//! Run configuration: flat `key = value` text, every key optional.
//! Layering is defaults, then a config file, then explicit overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mass::RootSearch;
use crate::ode::OdeTolerance;
use crate::potentials::{parse_key_values, parse_number, PhysicalConstants};
use crate::proton::{EtaSearch, ScanConfig, Stepping};
use crate::quadrature::QuadTolerance;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "SELFACTION_CONFIG";

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("constants_file", "key = value file with m_e_eV, m_p_eV, m_pi0_eV, alpha"),
    ("alpha", "fine-structure constant"),
    ("m_e_eV", "electron rest energy in eV"),
    ("m_p_eV", "proton rest energy in eV"),
    ("m_pi0_eV", "neutral pion rest energy in eV"),
    ("order", "series truncation order K (>= 1)"),
    ("c0", "constant of the closed-form mass condition"),
    ("c0_mode", "paper (use c0) or euler (use -gamma_E)"),
    ("quad_abs", "absolute quadrature tolerance"),
    ("quad_rel", "relative quadrature tolerance"),
    ("quad_max_intervals", "maximum adaptive quadrature subintervals"),
    ("eta_lo", "lower end of the eta bracket for the exact condition"),
    ("eta_hi", "upper end of the eta bracket for the exact condition"),
    ("prescan_points", "log-spaced prescan points for root bracketing"),
    ("grid_points", "points of the figure grid"),
    ("n_min", "smallest Yukawa coupling of the proton scan"),
    ("n_max", "largest Yukawa coupling of the proton scan"),
    ("n_points", "evenly spaced couplings between n_min and n_max"),
    ("coulomb_sign", "plus, minus or both"),
    ("ode_rel", "relative tolerance of the proton integrator"),
    ("execution", "parallel or sequential"),
    ("golden_file", "series golden file checked by verify"),
    ("output_dir", "directory receiving all output files"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum C0Mode {
    Paper,
    Euler,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub constants_file: Option<PathBuf>,
    pub constants: PhysicalConstants,
    pub order: usize,
    pub c0: f64,
    pub c0_mode: C0Mode,
    pub quad: QuadTolerance,
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub prescan_points: usize,
    pub grid_points: usize,
    pub n_min: f64,
    pub n_max: f64,
    pub n_points: usize,
    pub coulomb_signs: Vec<f64>,
    pub ode_rel: f64,
    #[serde(skip)]
    pub execution: Execution,
    pub golden_file: PathBuf,
    pub output_dir: PathBuf,
}

pub fn default_golden_file() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden").join("series.golden")
}

impl Default for RunConfig {
    fn default() -> Self {
        let search = RootSearch::default();
        Self {
            constants_file: None,
            constants: PhysicalConstants::default(),
            order: 3,
            c0: -0.51,
            c0_mode: C0Mode::Paper,
            quad: QuadTolerance::default(),
            eta_lo: search.eta_lo,
            eta_hi: search.eta_hi,
            prescan_points: search.prescan_points,
            grid_points: 400,
            n_min: 1.0 / 14.0,
            n_max: 1.0 / 7.0,
            n_points: 12,
            coulomb_signs: vec![1.0, -1.0],
            ode_rel: OdeTolerance::default().rel,
            execution: Execution::default(),
            golden_file: default_golden_file(),
            output_dir: PathBuf::from("out"),
        }
    }
}

fn cfg_err(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim().parse().map_err(|_| cfg_err(key, format!("expected a non-negative integer, got {v:?}")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    parse_number(v).map_err(|e| cfg_err(key, e))
}

impl RunConfig {
    /// Applies entries in key order; `constants_file` is read first so the
    /// individual constants keys override it.
    pub fn apply(&mut self, entries: &BTreeMap<String, String>) -> Result<()> {
        for key in entries.keys() {
            if !KEYS.iter().any(|(k, _)| k == key) {
                return Err(Error::Config(format!("unknown key `{key}`")));
            }
        }
        if let Some(path) = entries.get("constants_file") {
            let path = PathBuf::from(path);
            self.constants = PhysicalConstants::from_file(&path)?;
            self.constants_file = Some(path);
        }
        self.constants.apply(entries)?;
        for (key, v) in entries {
            let k = key.as_str();
            match k {
                "constants_file" | "alpha" | "m_e_eV" | "m_p_eV" | "m_pi0_eV" => {}
                "order" => self.order = parse_usize(k, v)?,
                "c0" => self.c0 = parse_f64(k, v)?,
                "c0_mode" => {
                    self.c0_mode = match v.as_str() {
                        "paper" => C0Mode::Paper,
                        "euler" => C0Mode::Euler,
                        _ => return Err(cfg_err(k, "expected paper or euler")),
                    }
                }
                "quad_abs" => self.quad.abs = parse_f64(k, v)?,
                "quad_rel" => self.quad.rel = parse_f64(k, v)?,
                "quad_max_intervals" => self.quad.max_intervals = parse_usize(k, v)?,
                "eta_lo" => self.eta_lo = parse_f64(k, v)?,
                "eta_hi" => self.eta_hi = parse_f64(k, v)?,
                "prescan_points" => self.prescan_points = parse_usize(k, v)?,
                "grid_points" => self.grid_points = parse_usize(k, v)?,
                "n_min" => self.n_min = parse_f64(k, v)?,
                "n_max" => self.n_max = parse_f64(k, v)?,
                "n_points" => self.n_points = parse_usize(k, v)?,
                "coulomb_sign" => {
                    self.coulomb_signs = match v.as_str() {
                        "plus" => vec![1.0],
                        "minus" => vec![-1.0],
                        "both" => vec![1.0, -1.0],
                        _ => return Err(cfg_err(k, "expected plus, minus or both")),
                    }
                }
                "ode_rel" => self.ode_rel = parse_f64(k, v)?,
                "execution" => {
                    self.execution = match v.as_str() {
                        "parallel" => Execution::Parallel,
                        "sequential" => Execution::Sequential,
                        _ => return Err(cfg_err(k, "expected parallel or sequential")),
                    }
                }
                "golden_file" => self.golden_file = PathBuf::from(v),
                "output_dir" => self.output_dir = PathBuf::from(v),
                _ => unreachable!("checked against KEYS"),
            }
        }
        self.validate()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply(&parse_key_values(text)?)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Defaults, then `file` (if any), then `overrides`.
    pub fn layered(file: Option<&Path>, overrides: &BTreeMap<String, String>) -> Result<Self> {
        let mut entries = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                parse_key_values(&text)?
            }
            None => BTreeMap::new(),
        };
        entries.extend(overrides.iter().map(|(k, v)| (k.clone(), v.clone())));
        let mut cfg = Self::default();
        cfg.apply(&entries)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if self.order < 1 {
            return Err(Error::Config("order must be at least 1".into()));
        }
        self.quad.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.eta_lo > 0.0 && self.eta_hi > self.eta_lo) {
            return Err(Error::Config(format!("need 0 < eta_lo < eta_hi, got ({}, {})", self.eta_lo, self.eta_hi)));
        }
        if self.prescan_points < 2 {
            return Err(Error::Config("prescan_points must be at least 2".into()));
        }
        if self.grid_points < 8 {
            return Err(Error::Config("grid_points must be at least 8".into()));
        }
        if !(self.ode_rel > 0.0) {
            return Err(Error::Config("ode_rel must be positive".into()));
        }
        if !self.c0.is_finite() {
            return Err(Error::Config("c0 must be finite".into()));
        }
        Ok(())
    }

    pub fn c0_value(&self) -> f64 {
        match self.c0_mode {
            C0Mode::Paper => self.c0,
            C0Mode::Euler => -crate::quadrature::EULER_GAMMA,
        }
    }

    pub fn root_search(&self) -> RootSearch {
        RootSearch {
            eta_lo: self.eta_lo,
            eta_hi: self.eta_hi,
            prescan_points: self.prescan_points,
            ..RootSearch::default()
        }
    }

    /// Couplings of the proton scan; an empty range is a configuration error.
    pub fn scan_ns(&self) -> Result<Vec<f64>> {
        if !(self.n_min > 0.0) || !(self.n_max >= self.n_min) || self.n_points == 0 || self.coulomb_signs.is_empty() {
            return Err(Error::Config(format!(
                "empty proton scan: n_min = {}, n_max = {}, n_points = {}",
                self.n_min, self.n_max, self.n_points
            )));
        }
        Ok(crate::proton::n_grid(self.n_min, self.n_max, self.n_points))
    }

    pub fn scan_config(&self, beta: f64) -> Result<ScanConfig> {
        Ok(ScanConfig {
            ns: self.scan_ns()?,
            coulomb_signs: self.coulomb_signs.clone(),
            beta,
            target_ratio: self.constants.electron_proton_ratio(),
            eta_search: EtaSearch::default(),
            stepping: Stepping::Adaptive(OdeTolerance {
                rel: self.ode_rel,
                ..OdeTolerance::default()
            }),
        })
    }

    /// Rendered as `key = value` lines that [`RunConfig::from_text`] reads back.
    pub fn to_text(&self) -> String {
        let signs = match self.coulomb_signs.as_slice() {
            [s] if *s > 0.0 => "plus",
            [_] => "minus",
            _ => "both",
        };
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        if let Some(p) = &self.constants_file {
            line("constants_file", p.display().to_string());
        }
        line("alpha", format!("{:e}", self.constants.alpha));
        line("m_e_eV", format!("{:e}", self.constants.m_e_ev));
        line("m_p_eV", format!("{:e}", self.constants.m_p_ev));
        line("m_pi0_eV", format!("{:e}", self.constants.m_pi0_ev));
        line("order", self.order.to_string());
        line("c0", format!("{:e}", self.c0));
        line("c0_mode", match self.c0_mode {
            C0Mode::Paper => "paper".into(),
            C0Mode::Euler => "euler".into(),
        });
        line("quad_abs", format!("{:e}", self.quad.abs));
        line("quad_rel", format!("{:e}", self.quad.rel));
        line("quad_max_intervals", self.quad.max_intervals.to_string());
        line("eta_lo", format!("{:e}", self.eta_lo));
        line("eta_hi", format!("{:e}", self.eta_hi));
        line("prescan_points", self.prescan_points.to_string());
        line("grid_points", self.grid_points.to_string());
        line("n_min", format!("{:e}", self.n_min));
        line("n_max", format!("{:e}", self.n_max));
        line("n_points", self.n_points.to_string());
        line("coulomb_sign", signs.into());
        line("ode_rel", format!("{:e}", self.ode_rel));
        line("execution", if self.execution == Execution::Sequential { "sequential" } else { "parallel" }.into());
        line("golden_file", self.golden_file.display().to_string());
        line("output_dir", self.output_dir.display().to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_and_overrides() {
        let cfg = RunConfig::from_text("alpha = 1/137\norder = 2\ncoulomb_sign = plus\n").unwrap();
        assert_eq!(cfg.constants.alpha, 1.0 / 137.0);
        assert_eq!(cfg.order, 2);
        assert_eq!(cfg.coulomb_signs, vec![1.0]);
    }

    #[test]
    fn text_round_trip() {
        let cfg = RunConfig {
            order: 5,
            c0_mode: C0Mode::Euler,
            execution: Execution::Sequential,
            ..RunConfig::default()
        };
        let back = RunConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.execution, Execution::Sequential);
    }

    #[test]
    fn every_key_is_documented_and_accepted() {
        let cfg = RunConfig::default();
        let text = cfg.to_text();
        for (k, _) in KEYS {
            if *k != "constants_file" {
                assert!(text.contains(&format!("{k} = ")), "{k}");
            }
        }
    }

    #[test]
    fn layering_order() {
        let dir = std::env::temp_dir().join(format!("selfaction-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("run.conf");
        std::fs::write(&file, "order = 2\ngrid_points = 50\n").unwrap();
        let mut over = BTreeMap::new();
        over.insert("order".to_string(), "4".to_string());
        let cfg = RunConfig::layered(Some(&file), &over).unwrap();
        assert_eq!(cfg.order, 4);
        assert_eq!(cfg.grid_points, 50);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rejects_invalid() {
        for text in [
            "order = 0",
            "bogus = 1",
            "quad_rel = -1",
            "eta_lo = 1\neta_hi = 0.5",
            "alpha = 0",
            "c0_mode = maybe",
            "grid_points = x",
        ] {
            assert!(matches!(RunConfig::from_text(text), Err(Error::Config(_))), "{text}");
        }
        let cfg = RunConfig::from_text("n_points = 0").unwrap();
        assert!(cfg.scan_ns().is_err());
        let cfg = RunConfig::from_text("n_min = 0.2\nn_max = 0.1").unwrap();
        assert!(cfg.scan_ns().is_err());
    }

    #[test]
    fn scan_grid_includes_named_couplings() {
        let ns = RunConfig::default().scan_ns().unwrap();
        assert_eq!(ns[0], 0.0);
        for n in [1.0 / 7.0, 1.0 / 9.0, 1.0 / 11.0] {
            assert!(ns.iter().any(|&x| (x - n).abs() < 1e-12));
        }
    }
}
