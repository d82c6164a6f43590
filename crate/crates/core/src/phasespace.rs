//! Gaussian states of a single bosonic mode in the complex `(α, α*)` basis.
//!
//! A state is fixed by its mean `μ = ⟨a⟩` and the covariance
//!
//! ```text
//! Θ = [[s,  m],
//!      [m*, s]],   s = ⟨a†a⟩ − |μ|² + ½,   m = ⟨aa⟩ − μ²
//! ```
//!
//! so that, with `v = (α − μ, α* − μ*)ᵀ`, the Wigner function is
//! `W = exp(−½ v†Θ⁻¹v) / (π √det Θ)`. The measure is `d²α = d(Re α) d(Im α)`.
//! Under `W`, `E[δα δα*] = s` and `E[δα²] = m`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound on `det Θ` from the uncertainty principle.
pub const UNCERTAINTY_BOUND: f64 = 0.25;

/// Constructors accept `det Θ ≥ ¼ − PHYSICALITY_TOL`.
pub const PHYSICALITY_TOL: f64 = 1e-12;

/// States produced by time integration that fall below the bound by no more
/// than this are clamped back onto it instead of rejected.
pub const CLAMP_WINDOW: f64 = 1e-8;

/// A point of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint(Complex64);

impl PhasePoint {
    pub fn new(alpha: Complex64) -> Result<Self> {
        if alpha.re.is_finite() && alpha.im.is_finite() {
            Ok(Self(alpha))
        } else {
            Err(Error::Domain(format!("non-finite phase point {alpha}")))
        }
    }

    pub fn from_xy(x: f64, y: f64) -> Result<Self> {
        Self::new(Complex64::new(x, y))
    }

    #[inline]
    pub fn alpha(self) -> Complex64 {
        self.0
    }
}

/// Mean and covariance of a single-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianState {
    mu: Complex64,
    s: f64,
    m: Complex64,
}

impl GaussianState {
    /// Validating constructor; rejects non-finite input and `det Θ < ¼ − 1e-12`.
    pub fn new(mu: Complex64, s: f64, m: Complex64) -> Result<Self> {
        let finite = [mu.re, mu.im, s, m.re, m.im].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("non-finite state moments".into()));
        }
        if s <= 0.0 {
            return Err(Error::Domain(format!("symmetric moment s = {s} must be positive")));
        }
        let det = s * s - m.norm_sqr();
        if det < UNCERTAINTY_BOUND - PHYSICALITY_TOL {
            return Err(Error::Domain(format!(
                "det Θ = {det} violates the uncertainty bound 1/4"
            )));
        }
        Ok(Self { mu, s, m })
    }

    /// Like [`GaussianState::new`], but a state sitting just under the
    /// uncertainty bound (integrator round-off) is moved onto it by raising `s`.
    /// The flag reports whether clamping happened.
    pub fn new_clamped(mu: Complex64, s: f64, m: Complex64) -> Result<(Self, bool)> {
        match Self::new(mu, s, m) {
            Ok(state) => Ok((state, false)),
            Err(err) => {
                let det = s * s - m.norm_sqr();
                if s.is_finite() && s > 0.0 && det >= UNCERTAINTY_BOUND - CLAMP_WINDOW {
                    let s = (UNCERTAINTY_BOUND + m.norm_sqr()).sqrt();
                    Ok((Self { mu, s, m }, true))
                } else {
                    Err(err)
                }
            }
        }
    }

    /// No validation; for affine right-hand-side evaluations on intermediate stages.
    pub(crate) fn unchecked(mu: Complex64, s: f64, m: Complex64) -> Self {
        Self { mu, s, m }
    }

    pub fn vacuum() -> Self {
        Self { mu: Complex64::new(0.0, 0.0), s: 0.5, m: Complex64::new(0.0, 0.0) }
    }

    /// Coherent state `|μ⟩`.
    pub fn coherent(mu: Complex64) -> Result<Self> {
        Self::new(mu, 0.5, Complex64::new(0.0, 0.0))
    }

    /// Thermal state with mean occupation `nbar`.
    pub fn thermal(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0) {
            return Err(Error::Domain(format!("occupation {nbar} must be non-negative")));
        }
        Self::new(Complex64::new(0.0, 0.0), nbar + 0.5, Complex64::new(0.0, 0.0))
    }

    /// Thermal state of occupation `nbar` squeezed so that its anomalous moment
    /// is `m`; `det Θ = (nbar + ½)²` is kept, which fixes `s`.
    pub fn squeezed_thermal(nbar: f64, m: Complex64) -> Result<Self> {
        if !(nbar >= 0.0) {
            return Err(Error::Domain(format!("occupation {nbar} must be non-negative")));
        }
        let sigma = nbar + 0.5;
        Self::new(Complex64::new(0.0, 0.0), (sigma * sigma + m.norm_sqr()).sqrt(), m)
    }

    /// Build from raw moments `⟨a⟩`, `⟨a†a⟩`, `⟨aa⟩`.
    pub fn from_raw_moments(a: Complex64, ada: f64, aa: Complex64) -> Result<Self> {
        Self::new(a, ada - a.norm_sqr() + 0.5, aa - a * a)
    }

    pub fn with_mean(self, mu: Complex64) -> Result<Self> {
        Self::new(mu, self.s, self.m)
    }

    #[inline]
    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    #[inline]
    pub fn s(&self) -> f64 {
        self.s
    }

    #[inline]
    pub fn m(&self) -> Complex64 {
        self.m
    }

    /// `⟨a†a⟩`.
    pub fn number(&self) -> f64 {
        self.s - 0.5 + self.mu.norm_sqr()
    }

    /// `⟨aa⟩`.
    pub fn aa(&self) -> Complex64 {
        self.m + self.mu * self.mu
    }

    /// `det Θ = s² − |m|²`.
    #[inline]
    pub fn det(&self) -> f64 {
        self.s * self.s - self.m.norm_sqr()
    }

    /// `tr ρ² = 1 / (2 √det Θ)`.
    pub fn purity(&self) -> f64 {
        0.5 / self.det().sqrt()
    }

    /// Covariance of `(Re α, Im α)`.
    pub fn real_covariance(&self) -> [[f64; 2]; 2] {
        let cxx = 0.5 * (self.s + self.m.re);
        let cyy = 0.5 * (self.s - self.m.re);
        let cxy = 0.5 * self.m.im;
        [[cxx, cxy], [cxy, cyy]]
    }

    /// Standard deviation along the major axis of the Wigner ellipse.
    pub fn sigma_max(&self) -> f64 {
        (0.5 * (self.s + self.m.norm())).sqrt()
    }

    /// `W(α, α*)`.
    pub fn wigner(&self, p: PhasePoint) -> f64 {
        (self.log_wigner(p)).exp()
    }

    /// `ln W(α, α*)`.
    pub fn log_wigner(&self, p: PhasePoint) -> f64 {
        let d = p.alpha() - self.mu;
        let det = self.det();
        // v†Θ⁻¹v = (2s|δα|² − m δα*² − m* δα²) / det
        let quad = (2.0 * self.s * d.norm_sqr() - 2.0 * (self.m * d.conj() * d.conj()).re) / det;
        -0.5 * quad - (PI * det.sqrt()).ln()
    }

    /// Wirtinger derivatives `(∂_α ln W, ∂_{α*} ln W)`.
    pub fn log_gradient(&self, p: PhasePoint) -> (Complex64, Complex64) {
        let d = p.alpha() - self.mu;
        let det = self.det();
        let d_conj = -(self.s * d - self.m * d.conj()) / det;
        (d_conj.conj(), d_conj)
    }

    /// Wigner entropy `−∫ W ln W = ½ ln det Θ + 1 + ln π`.
    pub fn wigner_entropy(&self) -> f64 {
        0.5 * self.det().ln() + 1.0 + PI.ln()
    }

    /// Von Neumann entropy `(ν+1) ln(ν+1) − ν ln ν`, `ν = √det Θ − ½`.
    pub fn von_neumann_entropy(&self) -> f64 {
        let nu = (self.det().sqrt() - 0.5).max(0.0);
        if nu == 0.0 {
            0.0
        } else {
            (nu + 1.0) * (nu + 1.0).ln() - nu * nu.ln()
        }
    }

    /// Effective thermal occupation `ν = √det Θ − ½` of the symplectic spectrum.
    pub fn symplectic_occupation(&self) -> f64 {
        (self.det().sqrt() - 0.5).max(0.0)
    }

    /// Central moment `E[δα^j δα*^k]` by Wick pairing, total degree ≤ 4.
    pub fn central_moment(&self, j: usize, k: usize) -> Result<Complex64> {
        if j + k > MAX_WICK_DEGREE {
            return Err(Error::Unsupported(format!(
                "central moments above degree {MAX_WICK_DEGREE} (requested {})",
                j + k
            )));
        }
        let mut factors = Vec::with_capacity(j + k);
        factors.extend(std::iter::repeat_n(Factor::Alpha, j));
        factors.extend(std::iter::repeat_n(Factor::AlphaConj, k));
        Ok(self.wick(&factors))
    }

    fn wick(&self, factors: &[Factor]) -> Complex64 {
        if factors.is_empty() {
            return Complex64::new(1.0, 0.0);
        }
        if factors.len() % 2 == 1 {
            return Complex64::new(0.0, 0.0);
        }
        let (first, rest) = (factors[0], &factors[1..]);
        let mut total = Complex64::new(0.0, 0.0);
        for (i, &partner) in rest.iter().enumerate() {
            let pair = match (first, partner) {
                (Factor::Alpha, Factor::Alpha) => self.m,
                (Factor::AlphaConj, Factor::AlphaConj) => self.m.conj(),
                _ => Complex64::new(self.s, 0.0),
            };
            let remaining: Vec<Factor> =
                rest.iter().enumerate().filter(|&(l, _)| l != i).map(|(_, &f)| f).collect();
            total += pair * self.wick(&remaining);
        }
        total
    }

    /// Expectation of a polynomial in `(δα, δα*)` under this state.
    pub fn expect(&self, poly: &MomentPoly) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for (j, row) in poly.coef.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if *c != Complex64::new(0.0, 0.0) {
                    total += c * self.central_moment(j, k)?;
                }
            }
        }
        Ok(total)
    }
}

/// Highest total degree handled by [`GaussianState::central_moment`].
pub const MAX_WICK_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Factor {
    Alpha,
    AlphaConj,
}

/// Polynomial `Σ c_jk δα^j δα*^k` of total degree ≤ 4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPoly {
    coef: [[Complex64; MAX_WICK_DEGREE + 1]; MAX_WICK_DEGREE + 1],
}

impl Default for MomentPoly {
    fn default() -> Self {
        Self { coef: [[Complex64::new(0.0, 0.0); MAX_WICK_DEGREE + 1]; MAX_WICK_DEGREE + 1] }
    }
}

impl MomentPoly {
    /// Affine polynomial `c0 + c1 δα + c2 δα*`.
    pub fn affine(c0: Complex64, c1: Complex64, c2: Complex64) -> Self {
        let mut p = Self::default();
        p.coef[0][0] = c0;
        p.coef[1][0] = c1;
        p.coef[0][1] = c2;
        p
    }

    pub fn term(j: usize, k: usize, c: Complex64) -> Self {
        let mut p = Self::default();
        p.coef[j][k] = c;
        p
    }

    /// Complex conjugate, swapping the roles of `δα` and `δα*`.
    pub fn conj(&self) -> Self {
        let mut p = Self::default();
        for j in 0..=MAX_WICK_DEGREE {
            for k in 0..=MAX_WICK_DEGREE {
                p.coef[k][j] = self.coef[j][k].conj();
            }
        }
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = *self;
        for j in 0..=MAX_WICK_DEGREE {
            for k in 0..=MAX_WICK_DEGREE {
                p.coef[j][k] += other.coef[j][k];
            }
        }
        p
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut p = *self;
        p.coef.iter_mut().flatten().for_each(|v| *v *= c);
        p
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut p = Self::default();
        for (j1, row1) in self.coef.iter().enumerate() {
            for (k1, c1) in row1.iter().enumerate() {
                if *c1 == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (j2, row2) in other.coef.iter().enumerate() {
                    for (k2, c2) in row2.iter().enumerate() {
                        if *c2 == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let (j, k) = (j1 + j2, k1 + k2);
                        if j + k > MAX_WICK_DEGREE {
                            return Err(Error::Unsupported(
                                "moment polynomial exceeds degree 4".into(),
                            ));
                        }
                        p.coef[j][k] += c1 * c2;
                    }
                }
            }
        }
        Ok(p)
    }

    /// `E[|p|²]` under `state`.
    pub fn mean_abs_sqr(&self, state: &GaussianState) -> Result<f64> {
        Ok(state.expect(&self.mul(&self.conj())?)?.re)
    }

    pub fn eval(&self, d: Complex64) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (j, row) in self.coef.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if *c != Complex64::new(0.0, 0.0) {
                    total += c * d.powu(j as u32) * d.conj().powu(k as u32);
                }
            }
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum StatePreset {
    Vacuum,
    Coherent { mu: Complex64 },
    Thermal { nbar: f64 },
    SqueezedThermal { nbar: f64, m: Complex64 },
    Moments { mu: Complex64, s: f64, m: Complex64 },
}

impl StatePreset {
    pub fn build(&self) -> Result<GaussianState> {
        match *self {
            StatePreset::Vacuum => Ok(GaussianState::vacuum()),
            StatePreset::Coherent { mu } => GaussianState::coherent(mu),
            StatePreset::Thermal { nbar } => GaussianState::thermal(nbar),
            StatePreset::SqueezedThermal { nbar, m } => GaussianState::squeezed_thermal(nbar, m),
            StatePreset::Moments { mu, s, m } => GaussianState::new(mu, s, m),
        }
    }
}
