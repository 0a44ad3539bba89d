//! At-rest self-action ingredients: the invariant `I₀ = 1/r`, the Coulomb
//! 4-potential, the radial spin potential, the Yukawa scalar and the
//! dimensionless couplings. Also finite-difference checks of the harmonic
//! properties of `1/r`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Invariant `I₀` for a source at rest.
pub fn invariant_i0(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(1.0 / r)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::NonPositiveRadius(r));
    }
    Ok(())
}

/// Potentials of a singularity at rest, evaluated at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtRestPotentials {
    pub r: f64,
    pub i0: f64,
    /// `(A_x, A_y, A_z, A_t)`; the spatial part vanishes at rest.
    pub a: [f64; 4],
    /// Radial magnitude of the spatial gradient of `I₀`.
    pub sigma: f64,
    pub u: [f64; 4],
}

impl AtRestPotentials {
    pub fn at(r: f64) -> Result<Self> {
        let i0 = invariant_i0(r)?;
        Ok(Self {
            r,
            i0,
            a: [0.0, 0.0, 0.0, i0],
            sigma: 1.0 / (r * r),
            u: [0.0, 0.0, 0.0, 1.0],
        })
    }

    /// The imaginary radial spin potential `-i λ r⁻²` as its real coefficient.
    pub fn spin_potential(&self, lambda: f64) -> f64 {
        -lambda * self.sigma
    }
}

/// Yukawa scalar `r⁻¹ exp(-μ r)`.
pub fn yukawa(r: f64, mu: f64) -> Result<f64> {
    check_radius(r)?;
    if mu < 0.0 {
        return Err(invalid("mu", "meson mass must be non-negative"));
    }
    Ok((-mu * r).exp() / r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub m_e_ev: f64,
    pub m_p_ev: f64,
    pub m_pi0_ev: f64,
    pub alpha: f64,
}

impl Default for PhysicalConstants {
    /// `m_e = 511000 eV` and `α = 1/137` as used in the mass estimate; the
    /// proton and neutral-pion masses are the PDG values and are meant to
    /// be overridden from a constants file.
    fn default() -> Self {
        Self {
            m_e_ev: 511_000.0,
            m_p_ev: 938_272_088.16,
            m_pi0_ev: 134_976_800.0,
            alpha: 1.0 / 137.0,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m_e_eV", self.m_e_ev),
            ("m_p_eV", self.m_p_ev),
            ("m_pi0_eV", self.m_pi0_ev),
            ("alpha", self.alpha),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Applies `key = value` entries; unknown keys are left for the caller.
    pub fn apply(&mut self, entries: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in entries {
            let slot = match key.as_str() {
                "m_e_eV" => &mut self.m_e_ev,
                "m_p_eV" => &mut self.m_p_ev,
                "m_pi0_eV" => &mut self.m_pi0_ev,
                "alpha" => &mut self.alpha,
                _ => continue,
            };
            *slot = parse_number(value).map_err(|e| Error::Config(format!("{key}: {e}")))?;
        }
        self.validate()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let entries = parse_key_values(&text)?;
        for key in entries.keys() {
            if !matches!(key.as_str(), "m_e_eV" | "m_p_eV" | "m_pi0_eV" | "alpha") {
                return Err(Error::Config(format!("unknown constant `{key}` in {}", path.display())));
            }
        }
        let mut out = Self::default();
        out.apply(&entries)?;
        Ok(out)
    }

    /// `m_π0 / m_p`.
    pub fn pion_proton_ratio(&self) -> f64 {
        self.m_pi0_ev / self.m_p_ev
    }

    /// `m_e / m_p`.
    pub fn electron_proton_ratio(&self) -> f64 {
        self.m_e_ev / self.m_p_ev
    }
}

/// Parses flat `key = value` text; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::Config(format!("line {}: empty key or value", lineno + 1)));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

/// Parses a decimal or a `num/den` fraction.
pub fn parse_number(text: &str) -> Result<f64> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| Error::Parse(format!("bad number {text:?}")))?;
            let d: f64 = d.trim().parse().map_err(|_| Error::Parse(format!("bad number {text:?}")))?;
            n / d
        }
        None => text.parse().map_err(|_| Error::Parse(format!("bad number {text:?}")))?,
    };
    if !value.is_finite() {
        return Err(Error::Parse(format!("non-finite number {text:?}")));
    }
    Ok(value)
}

/// Dimensionless couplings. `lambda_e` is the spin coupling length in units
/// of `ħ/(m_e c)`, which equals `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingSpec {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub lambda_e: f64,
    pub n: f64,
    pub mu_pi: f64,
}

impl CouplingSpec {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(invalid("alpha", "must be positive"));
        }
        if !(beta >= 0.0) {
            return Err(invalid("beta", "must be non-negative"));
        }
        Ok(Self {
            alpha,
            beta,
            eta: 2.0 * beta / alpha,
            lambda_e: beta,
            n: 0.0,
            mu_pi: 0.0,
        })
    }

    pub fn from_eta(alpha: f64, eta: f64) -> Result<Self> {
        Self::new(alpha, alpha * eta / 2.0)
    }

    pub fn with_proton(mut self, n: f64, mu_pi: f64) -> Result<Self> {
        if !(n >= 0.0) || !(mu_pi >= 0.0) {
            return Err(invalid("n/mu_pi", "must be non-negative"));
        }
        self.n = n;
        self.mu_pi = mu_pi;
        Ok(self)
    }

    /// Damping exponent per radial function, `λ_e / r = (η/2) / s`.
    pub fn half_eta(&self) -> f64 {
        0.5 * self.eta
    }
}

/// Central second difference of `f` along each axis, summed.
fn fd_laplacian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let f0 = f(x);
    let mut buf = x.to_vec();
    let mut sum = 0.0;
    for k in 0..x.len() {
        buf[k] = x[k] + h;
        let fp = f(&buf);
        buf[k] = x[k] - h;
        let fm = f(&buf);
        buf[k] = x[k];
        sum += (fp - 2.0 * f0 + fm) / (h * h);
    }
    sum
}

fn inverse_distance(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt().recip()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionResidual {
    pub dim: usize,
    /// Finite-difference Laplacian of `|x|⁻¹`.
    pub laplacian: f64,
    /// Source-density residual `-∇²|x|⁻¹`, the amount by which `|x|⁻¹`
    /// fails to be source-free at the sample point.
    pub residual: f64,
    /// Analytic residual `(N - 3) |x|⁻³`.
    pub analytic: f64,
}

/// Finite-difference Laplacian of `|x|⁻¹` in `N` dimensions at the point
/// `(c, c, ..., c)`. Only `N = 3` gives zero.
pub fn laplacian_dimension_scan(dims: &[usize], h: f64, coord: f64) -> Result<Vec<DimensionResidual>> {
    if !(h > 0.0) || !h.is_finite() || h >= coord.abs() {
        return Err(invalid("h", format!("step must be positive and below the point scale, got {h}")));
    }
    dims.iter()
        .map(|&dim| {
            if dim < 2 {
                return Err(invalid("dim", format!("need N >= 2, got {dim}")));
            }
            let x = vec![coord; dim];
            let r = coord.abs() * (dim as f64).sqrt();
            let laplacian = fd_laplacian(&inverse_distance, &x, h);
            Ok(DimensionResidual {
                dim,
                laplacian,
                residual: -laplacian,
                analytic: (dim as f64 - 3.0) / (r * r * r),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaticWaveCheck {
    /// `∂_α ∂_α A_t` by finite differences (time derivatives vanish).
    pub wave_residual: f64,
    /// `∂_α A_α` by finite differences.
    pub divergence_residual: f64,
}

/// Checks the wave equation and Lorenz condition for the at-rest potential
/// at spatial point `r0` using central differences in `(x, y, z, t)`.
pub fn static_wave_check(r0: [f64; 3], h: f64) -> Result<StaticWaveCheck> {
    if r0.iter().all(|&v| v == 0.0) {
        return Err(Error::NonPositiveRadius(0.0));
    }
    if !(h > 0.0) {
        return Err(invalid("h", "step must be positive"));
    }
    // A_β(x, y, z, t) for a source at rest
    let potential = |x: &[f64], comp: usize| -> f64 {
        if comp == 3 {
            inverse_distance(&x[..3])
        } else {
            0.0
        }
    };
    let point = [r0[0], r0[1], r0[2], 0.0];
    let f_t = |x: &[f64]| potential(x, 3);
    // Minkowski signature: spatial Laplacian minus second time derivative
    let spatial = fd_laplacian(&|x: &[f64]| f_t(&[x[0], x[1], x[2], 0.0]), &point[..3], h);
    let mut tp = point;
    tp[3] = h;
    let mut tm = point;
    tm[3] = -h;
    let time = (f_t(&tp) - 2.0 * f_t(&point) + f_t(&tm)) / (h * h);
    let wave_residual = spatial - time;

    let mut divergence = 0.0;
    for comp in 0..4 {
        let mut p = point;
        p[comp] += h;
        let mut m = point;
        m[comp] -= h;
        divergence += (potential(&p, comp) - potential(&m, comp)) / (2.0 * h);
    }
    Ok(StaticWaveCheck {
        wave_residual,
        divergence_residual: divergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariant_and_sigma() {
        for r in [0.01, 0.1, 1.0, 10.0] {
            let p = AtRestPotentials::at(r).unwrap();
            assert!((p.i0 * r - 1.0).abs() < 1e-15);
            assert!((p.sigma * r * r - 1.0).abs() < 1e-15);
            assert_eq!(p.a[..3], [0.0; 3]);
            assert_eq!(p.u, [0.0, 0.0, 0.0, 1.0]);
        }
        assert!(AtRestPotentials::at(0.0).is_err());
        assert!(AtRestPotentials::at(-1.0).is_err());
    }

    #[test]
    fn yukawa_values() {
        assert_eq!(yukawa(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(yukawa(2.0, 0.0).unwrap(), 0.5);
        assert!((yukawa(1.0, 1.0).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!(yukawa(0.0, 1.0).is_err());
        for r in [0.01, 0.5, 3.0] {
            for mu in [0.0, 0.1, 2.0] {
                let y = yukawa(r, mu).unwrap();
                assert!(y <= 1.0 / r);
                assert_eq!(y == 1.0 / r, mu == 0.0);
            }
        }
    }

    #[test]
    fn laplacian_vanishes_only_in_three_dimensions() {
        let scan = laplacian_dimension_scan(&[2, 3, 4], 1e-3, 1.0).unwrap();
        for row in &scan {
            assert!((row.residual - row.analytic).abs() < 1e-4, "{row:?}");
        }
        assert!(scan[1].residual.abs() < 1e-5);
        assert!(scan[0].residual < 0.0 && scan[2].residual > 0.0);
        // ∇² r^-1 = -(N - 3) r^-3 in N dimensions
        assert!(scan[0].laplacian > 0.0 && scan[2].laplacian < 0.0);
        let mags: Vec<f64> = scan.iter().map(|r| r.residual.abs()).collect();
        assert!(mags[1] < mags[0] && mags[1] < mags[2]);
        assert!(laplacian_dimension_scan(&[3], 0.0, 1.0).is_err());
        assert!(laplacian_dimension_scan(&[1], 1e-3, 1.0).is_err());
    }

    #[test]
    fn static_potential_is_harmonic_off_origin() {
        for r0 in [[1.0, 0.0, 0.0], [0.5, 0.5, 0.5]] {
            let c = static_wave_check(r0, 1e-3).unwrap();
            assert!(c.wave_residual.abs() < 1e-5, "{c:?}");
            assert!(c.divergence_residual.abs() < 1e-5);
        }
        // residual grows as the point approaches the singularity at fixed h
        let far = static_wave_check([0.5, 0.0, 0.0], 1e-3).unwrap().wave_residual.abs();
        let near = static_wave_check([0.01, 0.0, 0.0], 1e-3).unwrap().wave_residual.abs();
        assert!(near > far);
        assert!(static_wave_check([0.0; 3], 1e-3).is_err());
    }

    #[test]
    fn coupling_eta() {
        let c = CouplingSpec::new(1.0 / 137.0, 3.4e-6).unwrap();
        assert!((c.eta - 2.0 * 3.4e-6 * 137.0).abs() < 1e-15);
        assert_eq!(c.lambda_e, c.beta);
        let back = CouplingSpec::from_eta(c.alpha, c.eta).unwrap();
        assert!((back.beta - c.beta).abs() < 1e-18);
        assert!(CouplingSpec::new(0.0, 1.0).is_err());
        assert!(c.with_proton(-1.0, 0.1).is_err());
    }

    #[test]
    fn constants_file_parsing() {
        let entries = parse_key_values("# constants\nm_e_eV = 511000\nalpha = 1/137  # fine structure\n").unwrap();
        let mut c = PhysicalConstants::default();
        c.apply(&entries).unwrap();
        assert_eq!(c.alpha, 1.0 / 137.0);
        assert!(parse_key_values("no equals sign").is_err());
        let bad = parse_key_values("alpha = -1").unwrap();
        assert!(PhysicalConstants::default().apply(&bad).is_err());
        assert!(parse_number("abc").is_err());
        assert_eq!(parse_number("3/4").unwrap(), 0.75);
    }
}
