//! Bispinor bilinears for the j = 1/2, m = 1/2 solutions.
//!
//! Components are kept symbolic (exact coefficient, radial label, spherical
//! harmonic) so that the angular reduction is exact. Diagonal gamma matrices
//! only: every bilinear is a sum over the four components.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::Result;
use crate::loglaurent::{rat, rational_to_f64, LogLaurentPoly};
use crate::quadrature::{weighted_integral, QuadTolerance};
use crate::series::{product_density, upper_product_density, Family, SeriesSolution};

pub type ExactComplex = Complex<BigRational>;

fn cr(re: BigRational, im: BigRational) -> ExactComplex {
    Complex::new(re, im)
}

fn c_one() -> ExactComplex {
    cr(BigRational::one(), BigRational::zero())
}

fn c_i() -> ExactComplex {
    cr(BigRational::zero(), BigRational::one())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Harmonic {
    Y00,
    Y10,
    Y11,
}

impl Harmonic {
    pub fn eval(self, theta: f64, phi: f64) -> Complex64 {
        match self {
            Harmonic::Y00 => Complex64::new(0.5 / PI.sqrt(), 0.0),
            Harmonic::Y10 => Complex64::new((3.0 / (4.0 * PI)).sqrt() * theta.cos(), 0.0),
            Harmonic::Y11 => Complex64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * theta.sin(), phi),
        }
    }
}

/// `value · √radicand` with a positive squarefree integer radicand.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub value: ExactComplex,
    pub radicand: BigInt,
}

fn squarefree_split(n: &BigInt) -> (BigInt, BigInt) {
    // n = outer² · inner
    let mut inner = n.clone();
    let mut outer = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= inner {
        let sq = &p * &p;
        while inner.is_multiple_of(&sq) {
            inner /= &sq;
            outer *= &p;
        }
        p += 1;
    }
    (outer, inner)
}

impl Coefficient {
    pub fn new(value: ExactComplex) -> Self {
        Self {
            value,
            radicand: BigInt::one(),
        }
    }

    /// `phase · √r` for a non-negative rational `r`.
    pub fn sqrt_of(r: &BigRational, phase: ExactComplex) -> Self {
        assert!(!r.is_negative(), "radicand must be non-negative");
        if r.is_zero() {
            return Self::new(cr(BigRational::zero(), BigRational::zero()));
        }
        let (p, q) = (r.numer().clone(), r.denom().clone());
        let (outer, inner) = squarefree_split(&(&p * &q));
        let scale = BigRational::new(outer, q);
        Self {
            value: cr(&phase.re * &scale, &phase.im * &scale),
            radicand: inner,
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            value: self.value.conj(),
            radicand: self.radicand.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let g = self.radicand.gcd(&other.radicand);
        let radicand = (&self.radicand / &g) * (&other.radicand / &g);
        let g = BigRational::from_integer(g);
        let v = &self.value * &other.value;
        Self {
            value: cr(&v.re * &g, &v.im * &g),
            radicand,
        }
    }

    pub fn scale(&self, c: &ExactComplex) -> Self {
        Self {
            value: &self.value * c,
            radicand: self.radicand.clone(),
        }
    }

    pub fn to_complex64(&self) -> Complex64 {
        let r = self.radicand.to_f64().unwrap_or(f64::NAN).sqrt();
        Complex64::new(rational_to_f64(&self.value.re) * r, rational_to_f64(&self.value.im) * r)
    }
}

/// One bispinor component: `coeff · R(s) · Y(θ, φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub coeff: Coefficient,
    pub radial: String,
    pub harmonic: Harmonic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bispinor {
    pub structure: Family,
    pub components: [Option<Component>; 4],
}

fn comp(coeff: Coefficient, radial: &str, harmonic: Harmonic) -> Option<Component> {
    Some(Component {
        coeff,
        radial: radial.to_string(),
        harmonic,
    })
}

impl Bispinor {
    /// `(U Y₁₀/√3, √(2/3) U Y₁₁, i V Y₀₀, 0)`.
    pub fn first(upper: &str, lower: &str) -> Self {
        Self {
            structure: Family::First,
            components: [
                comp(Coefficient::sqrt_of(&rat(1, 3), c_one()), upper, Harmonic::Y10),
                comp(Coefficient::sqrt_of(&rat(2, 3), c_one()), upper, Harmonic::Y11),
                comp(Coefficient::new(c_i()), lower, Harmonic::Y00),
                None,
            ],
        }
    }

    /// `(i L Y₀₀, 0, K Y₁₀/√3, √(2/3) K Y₁₁)`.
    pub fn second(k: &str, l: &str) -> Self {
        Self {
            structure: Family::Second,
            components: [
                comp(Coefficient::new(c_i()), l, Harmonic::Y00),
                None,
                comp(Coefficient::sqrt_of(&rat(1, 3), c_one()), k, Harmonic::Y10),
                comp(Coefficient::sqrt_of(&rat(2, 3), c_one()), k, Harmonic::Y11),
            ],
        }
    }

    pub fn zero(structure: Family) -> Self {
        Self {
            structure,
            components: [None, None, None, None],
        }
    }

    /// Numeric component values given radial values by label.
    pub fn eval(&self, radial: &dyn Fn(&str) -> f64, theta: f64, phi: f64) -> [Complex64; 4] {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (slot, c) in out.iter_mut().zip(&self.components) {
            if let Some(c) = c {
                *slot = c.coeff.to_complex64() * radial(&c.radial) * c.harmonic.eval(theta, phi);
            }
        }
        out
    }
}

/// Squared Clebsch–Gordan weights of the general `(j, m)` bispinor:
/// `[(j+1-m)/(2(j+1)), (j+1+m)/(2(j+1)), (j+m)/(2j), (j-m)/(2j)]`.
pub fn jm_brackets(j: &BigRational, m: &BigRational) -> [BigRational; 4] {
    let one = BigRational::one();
    let two = rat(2, 1);
    let jp = j + &one;
    [
        (&jp - m) / (&two * &jp),
        (&jp + m) / (&two * &jp),
        (j + m) / (&two * j),
        (j - m) / (&two * j),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gamma {
    T,
    Five,
    XY,
    XY5,
}

impl Gamma {
    pub const ALL: [Gamma; 4] = [Gamma::T, Gamma::Five, Gamma::XY, Gamma::XY5];

    /// Diagonal entries as `(re, im)` integers.
    pub fn diag_i64(self) -> [(i64, i64); 4] {
        match self {
            Gamma::T => [(1, 0), (1, 0), (1, 0), (1, 0)],
            Gamma::Five => [(1, 0), (1, 0), (-1, 0), (-1, 0)],
            Gamma::XY => [(0, 1), (0, -1), (0, 1), (0, -1)],
            Gamma::XY5 => [(0, 1), (0, -1), (0, -1), (0, 1)],
        }
    }

    pub fn diag(self) -> [ExactComplex; 4] {
        self.diag_i64()
            .map(|(re, im)| cr(BigRational::from_integer(re.into()), BigRational::from_integer(im.into())))
    }
}

/// The diagonal set `γ_t, γ₅, γ_xγ_y, γ_xγ_yγ₅`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet {
    pub gamma_t: [ExactComplex; 4],
    pub gamma_5: [ExactComplex; 4],
    pub gamma_xy: [ExactComplex; 4],
    pub gamma_xy5: [ExactComplex; 4],
}

impl Default for GammaSet {
    fn default() -> Self {
        Self {
            gamma_t: Gamma::T.diag(),
            gamma_5: Gamma::Five.diag(),
            gamma_xy: Gamma::XY.diag(),
            gamma_xy5: Gamma::XY5.diag(),
        }
    }
}

pub fn diag_mul(a: &[ExactComplex; 4], b: &[ExactComplex; 4]) -> [ExactComplex; 4] {
    std::array::from_fn(|k| &a[k] * &b[k])
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DensityKey {
    /// Sorted pair of radial labels.
    pub radial: (String, String),
    /// `(Y_a, Y_b)`, meaning `Y_a · conj(Y_b)`.
    pub harmonics: (Harmonic, Harmonic),
    pub radicand: BigInt,
}

/// Sum of `coeff · √radicand · R₁R₂ · Y_a conj(Y_b)` terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Density {
    pub terms: BTreeMap<DensityKey, ExactComplex>,
}

fn sorted(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl Density {
    fn add(&mut self, c: Coefficient, ra: &str, rb: &str, ha: Harmonic, hb: Harmonic) {
        let key = DensityKey {
            radial: sorted(ra, rb),
            harmonics: (ha, hb),
            radicand: c.radicand,
        };
        let entry = self
            .terms
            .entry(key.clone())
            .or_insert_with(|| cr(BigRational::zero(), BigRational::zero()));
        *entry = &*entry + &c.value;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, radial: &dyn Fn(&str) -> f64, theta: f64, phi: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, v)| {
                let c = Coefficient {
                    value: v.clone(),
                    radicand: k.radicand.clone(),
                };
                c.to_complex64()
                    * radial(&k.radial.0)
                    * radial(&k.radial.1)
                    * k.harmonics.0.eval(theta, phi)
                    * k.harmonics.1.eval(theta, phi).conj()
            })
            .sum()
    }
}

/// `⟨ψ_a Γ ψ_b⟩ = ½[(ψ_a+ψ_b)Γ(ψ_a+ψ_b)* − ψ_aΓψ_a* − ψ_bΓψ_b*]`, expanded as
/// `½ Σ_k Γ_kk (a_k b_k* + b_k a_k*)`.
pub fn bilinear(a: &Bispinor, b: &Bispinor, gamma: Gamma) -> Density {
    let half = cr(rat(1, 2), BigRational::zero());
    let diag = gamma.diag();
    let mut out = Density::default();
    for ((ca, cb), d) in a.components.iter().zip(&b.components).zip(&diag) {
        if let (Some(x), Some(y)) = (ca, cb) {
            let w = d * &half;
            out.add(x.coeff.mul(&y.coeff.conj()).scale(&w), &x.radial, &y.radial, x.harmonic, y.harmonic);
            out.add(y.coeff.mul(&x.coeff.conj()).scale(&w), &y.radial, &x.radial, y.harmonic, x.harmonic);
        }
    }
    out
}

/// Direct numeric polarization form of [`bilinear`] at one point.
pub fn bilinear_numeric(
    a: &Bispinor,
    b: &Bispinor,
    gamma: Gamma,
    radial: &dyn Fn(&str) -> f64,
    theta: f64,
    phi: f64,
) -> Complex64 {
    let diag = gamma.diag_i64().map(|(re, im)| Complex64::new(re as f64, im as f64));
    let quad = |x: &[Complex64; 4], y: &[Complex64; 4]| -> Complex64 { (0..4).map(|k| x[k] * diag[k] * y[k].conj()).sum() };
    let va = a.eval(radial, theta, phi);
    let vb = b.eval(radial, theta, phi);
    let sum: [Complex64; 4] = std::array::from_fn(|k| va[k] + vb[k]);
    0.5 * (quad(&sum, &sum) - quad(&va, &va) - quad(&vb, &vb))
}

/// Angular integral of a density: radial pair and radicand to coefficient.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReducedDensity {
    pub terms: BTreeMap<((String, String), BigInt), ExactComplex>,
}

impl ReducedDensity {
    /// Rational-radicand coefficient of `R₁R₂`.
    pub fn coeff(&self, r1: &str, r2: &str) -> ExactComplex {
        self.terms
            .get(&(sorted(r1, r2), BigInt::one()))
            .cloned()
            .unwrap_or_else(|| cr(BigRational::zero(), BigRational::zero()))
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|v| v.im.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn times(&self, c: &ExactComplex) -> Self {
        let mut terms = BTreeMap::new();
        for (k, v) in &self.terms {
            let p = v * c;
            if !p.is_zero() {
                terms.insert(k.clone(), p);
            }
        }
        Self { terms }
    }

    pub fn eval(&self, radial: &dyn Fn(&str) -> f64) -> Complex64 {
        self.terms
            .iter()
            .map(|((pair, rad), v)| {
                Coefficient {
                    value: v.clone(),
                    radicand: rad.clone(),
                }
                .to_complex64()
                    * radial(&pair.0)
                    * radial(&pair.1)
            })
            .sum()
    }
}

/// Integrates over the unit sphere using orthonormality of the harmonics.
pub fn volume_reduce(density: &Density) -> ReducedDensity {
    let mut out = ReducedDensity::default();
    for (k, v) in &density.terms {
        if k.harmonics.0 != k.harmonics.1 {
            continue;
        }
        let key = (k.radial.clone(), k.radicand.clone());
        let e = out
            .terms
            .entry(key.clone())
            .or_insert_with(|| cr(BigRational::zero(), BigRational::zero()));
        *e = &*e + v;
        if e.is_zero() {
            out.terms.remove(&key);
        }
    }
    out
}

/// Volume-reduced densities of one pair of solutions. `sz` and `mz` are
/// the real coefficients of `i` (the raw bilinears are imaginary).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityValue {
    pub i1: ReducedDensity,
    pub i2: ReducedDensity,
    pub t: ReducedDensity,
    pub sz: ReducedDensity,
    pub mz: ReducedDensity,
    /// The pseudo-invariant has no diagonal representative.
    pub pseudo_invariant: Option<ReducedDensity>,
}

pub fn density_table(a: &Bispinor, b: &Bispinor) -> DensityValue {
    let t = volume_reduce(&bilinear(a, b, Gamma::T));
    let (sz, mz) = spin_magnetization(a, b);
    DensityValue {
        i1: t.clone(),
        i2: volume_reduce(&bilinear(a, b, Gamma::Five)),
        t,
        sz,
        mz,
        pseudo_invariant: None,
    }
}

/// `(S_z, M_z)` as coefficients of `i`.
pub fn spin_magnetization(a: &Bispinor, b: &Bispinor) -> (ReducedDensity, ReducedDensity) {
    let minus_i = cr(BigRational::zero(), -BigRational::one());
    (
        volume_reduce(&bilinear(a, b, Gamma::XY)).times(&minus_i),
        volume_reduce(&bilinear(a, b, Gamma::XY5)).times(&minus_i),
    )
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// `∫ f(θ, φ) dΩ` by Gauss–Legendre in `cos θ` and the trapezoid rule in `φ`.
pub fn sphere_integral(f: impl Fn(f64, f64) -> Complex64, n_theta: usize, n_phi: usize) -> Complex64 {
    let (x, w) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(&w) {
        let theta = xi.acos();
        for j in 0..n_phi {
            total += f(theta, j as f64 * dphi) * (wi * dphi);
        }
    }
    total
}

/// `4π ∫₀¹ e^(-η/s) s⁻¹ (Ff + Gg) s² ds` per unit `a₀ b₀`, split by channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InertiaReport {
    pub ff: f64,
    pub gg: f64,
    pub total: f64,
}

pub fn electromagnetic_inertia(
    first: &SeriesSolution,
    second: &SeriesSolution,
    alpha: f64,
    eta: f64,
    order: usize,
    tol: &QuadTolerance,
) -> Result<InertiaReport> {
    if !(eta > 0.0) {
        return Err(crate::error::invalid("eta", "must be positive"));
    }
    let gg = product_density(first, second, order)?;
    if gg.norm.is_zero() {
        return Ok(InertiaReport {
            ff: 0.0,
            gg: 0.0,
            total: 0.0,
        });
    }
    let inv = BigRational::one() / &gg.norm;
    let ff: Vec<LogLaurentPoly> = upper_product_density(first, second, order)?
        .iter()
        .map(|p| p.scale(&inv))
        .collect();
    let channel = |polys: &[LogLaurentPoly]| -> Result<f64> {
        let mut acc = 0.0;
        for (k, p) in polys.iter().enumerate() {
            acc += alpha.powi(2 * k as i32 + 1) * weighted_integral(eta, p, tol)?;
        }
        Ok(4.0 * PI * acc)
    };
    let ff = channel(&ff)?;
    let gg = channel(&gg.per_unit_norm())?;
    Ok(InertiaReport { ff, gg, total: ff + gg })
}
