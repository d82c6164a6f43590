//! Entropy production `Π` and entropy flux `Φ` of the Wigner entropy.
//!
//! # Closed forms for Gaussian states
//!
//! For a thermal reservoir with `σ = n̄ + ½`, the irreversible current is
//! `J = (γ/2)[αW + σ ∂_{α*}W]` and `Π = 4/(γσ) ∫ |J|²/W d²α`. For a Gaussian
//! state `∂_{α*} ln W = −(s δα − m δα*)/D` with `D = det Θ`, so
//!
//! ```text
//! J/W = (γ/2) [μ + c₁ δα + c₂ δα*],   c₁ = 1 − σs/D,   c₂ = σm/D
//! Π   = (γ/σ) E|μ + c₁δα + c₂δα*|²
//!     = (γ/σ) [ |μ|² + (|c₁|² + |c₂|²) s + 2 Re(c₁ c₂* m) ].
//! ```
//!
//! A squeezed reservoir is a thermal one for `b = a cosh r + a† e^{iφ} sinh r`,
//! `φ = θ − 2ω_s t`. The map `(δα, δα*) → (δβ, δβ*)` has unit determinant, so the
//! state's moments in `β` (same `D`) feed the thermal formula unchanged.
//!
//! The quadratic-form route works in the `a` representation with
//! `J_z/W = (γ/2)[α + (N+½) ∂_{α*} ln W + M_t ∂_α ln W]` and
//! `Π = (2/γ) E[(u*, u) A⁻¹ (u, u*)ᵀ]`, `u = J_z/W`, `A = [[N+½, M_t], [M_t*, N+½]]`.
//!
//! For number dephasing, `I(W) = (λ/2) α L W` with `L = α*∂_{α*} − α∂_α`, and
//! `Π = (2/λ) ∫ |I|²/(|α|² W) = (λ/2) E|L ln W|²`; `L ln W` is a quadratic
//! polynomial in `(δα, δα*)` and its second moment is evaluated by Wick pairing.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, BathSpec, HamiltonianSpec, LinearBath};
use crate::phasespace::{GaussianState, MomentPoly, PhasePoint};
use crate::quadrature::QuadratureSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Which phase-space current to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurrentKind {
    /// `J = (γ/2)[αW + (n̄+½)∂_{α*}W]`.
    ThermalJ,
    /// `J_z = (γ/2)[αW + (N+½)∂_{α*}W + M_t ∂_α W]`.
    SqueezedJz,
    /// `J_b = J_z cosh r + J_z* e^{iφ} sinh r`.
    SqueezedJb,
    /// `I = (λ/2) α [α*∂_{α*}W − α∂_α W]`.
    DephasingI,
}

/// Evaluate a current at a phase point.
pub fn current_eval(
    kind: CurrentKind,
    state: &GaussianState,
    bath: &BathSpec,
    t: f64,
    p: PhasePoint,
) -> Result<Complex64> {
    let alpha = p.alpha();
    let w = state.wigner(p);
    let (g, g_conj) = state.log_gradient(p);
    match kind {
        CurrentKind::ThermalJ => {
            let lb = linear_for(kind, bath)?;
            Ok(0.5 * lb.gamma * (alpha * w + lb.sigma() * g_conj * w))
        }
        CurrentKind::SqueezedJz => {
            let lb = linear_for(kind, bath)?;
            Ok(jz(&lb, t, alpha, w, g, g_conj))
        }
        CurrentKind::SqueezedJb => {
            let lb = linear_for(kind, bath)?;
            let j = jz(&lb, t, alpha, w, g, g_conj);
            let rot = Complex64::from_polar(1.0, lb.phase(t));
            Ok(j * lb.r.cosh() + j.conj() * rot * lb.r.sinh())
        }
        CurrentKind::DephasingI => {
            let BathSpec::Dephasing { lambda } = *bath else {
                return Err(Error::Usage("the dephasing current needs a dephasing bath".into()));
            };
            Ok(0.5 * lambda * alpha * w * (alpha.conj() * g_conj - alpha * g))
        }
    }
}

fn linear_for(kind: CurrentKind, bath: &BathSpec) -> Result<LinearBath> {
    bath.linear()
        .ok_or_else(|| Error::Usage(format!("{kind:?} needs a thermal or squeezed bath")))
}

fn jz(lb: &LinearBath, t: f64, alpha: Complex64, w: f64, g: Complex64, g_conj: Complex64) -> Complex64 {
    0.5 * lb.gamma * (alpha * w + lb.n_half() * g_conj * w + lb.m_t(t) * g * w)
}

/// `J_b` through the α-representation current,
/// `J cosh r + [γα*W − J*] e^{iφ} sinh r`.
pub fn jb_from_thermal_current(
    state: &GaussianState,
    bath: &BathSpec,
    t: f64,
    p: PhasePoint,
) -> Result<Complex64> {
    let lb = linear_for(CurrentKind::SqueezedJb, bath)?;
    let j = current_eval(CurrentKind::ThermalJ, state, bath, t, p)?;
    let w = state.wigner(p);
    let rot = Complex64::from_polar(1.0, lb.phase(t));
    Ok(j * lb.r.cosh() + (lb.gamma * p.alpha().conj() * w - j.conj()) * rot * lb.r.sinh())
}

/// The state's mean and covariance in `β = α cosh r + α* e^{iφ} sinh r`.
pub fn to_squeezed_frame(state: &GaussianState, lb: &LinearBath, t: f64) -> Result<GaussianState> {
    let (ch, sh) = (lb.r.cosh(), lb.r.sinh());
    let rot = Complex64::from_polar(1.0, lb.phase(t));
    let (mu, s, m) = (state.mu(), state.s(), state.m());
    let mu_b = ch * mu + rot * sh * mu.conj();
    let s_b = s * (2.0 * lb.r).cosh() + (2.0 * lb.r).sinh() * (rot.conj() * m).re;
    let m_b = ch * ch * m + rot * rot * sh * sh * m.conj() + 2.0 * ch * sh * rot * s;
    // D is preserved exactly in exact arithmetic; allow clamping of round-off.
    GaussianState::new_clamped(mu_b, s_b, m_b).map(|(st, _)| st)
}

/// `Π = (γ/σ)[|μ|² + (|c₁|²+|c₂|²)s + 2Re(c₁c₂*m)]` for a thermal current of occupation `σ − ½`.
fn pi_thermal_moments(state: &GaussianState, gamma: f64, sigma: f64) -> f64 {
    let d = state.det();
    let c1 = cx(1.0 - sigma * state.s() / d);
    let c2 = sigma * state.m() / d;
    gamma / sigma
        * (state.mu().norm_sqr()
            + (c1.norm_sqr() + c2.norm_sqr()) * state.s()
            + 2.0 * (c1 * c2.conj() * state.m()).re)
}

/// `L ln W = α*∂_{α*} ln W − α∂_α ln W` as a polynomial in `(δα, δα*)`.
fn rotation_log_gradient(state: &GaussianState) -> MomentPoly {
    let (mu, s, m, d) = (state.mu(), state.s(), state.m(), state.det());
    // α* ∂_{α*} ln W = −(μ* + δα*)(s δα − m δα*)/D
    let x = MomentPoly::term(1, 0, -mu.conj() * s / d)
        .add(&MomentPoly::term(0, 1, mu.conj() * m / d))
        .add(&MomentPoly::term(1, 1, cx(-s / d)))
        .add(&MomentPoly::term(0, 2, m / d));
    x.add(&x.conj().scale(cx(-1.0)))
}

/// Closed-form entropy production from Gaussian moments.
pub fn pi_closed_form(state: &GaussianState, bath: &BathSpec, t: f64) -> Result<f64> {
    bath.validate()?;
    match bath.linear() {
        Some(lb) => {
            let in_b = to_squeezed_frame(state, &lb, t)?;
            Ok(pi_thermal_moments(&in_b, lb.gamma, lb.sigma()))
        }
        None => {
            let BathSpec::Dephasing { lambda } = *bath else { unreachable!() };
            let poly = rotation_log_gradient(state);
            Ok(0.5 * lambda * poly.mean_abs_sqr(state)?)
        }
    }
}

/// Entropy production by direct quadrature of the current integral.
pub fn pi_quadrature(state: &GaussianState, bath: &BathSpec, t: f64, grid: &QuadratureSpec) -> Result<f64> {
    bath.validate()?;
    let rect = grid.box_for(state)?;
    let rule = grid.rule()?;
    let point = |x: f64, y: f64| PhasePoint::from_xy(x, y).expect("quadrature nodes are finite");
    match bath.linear() {
        Some(lb) => {
            let kind = if lb.r == 0.0 { CurrentKind::ThermalJ } else { CurrentKind::SqueezedJb };
            let pref = 4.0 / (lb.gamma * lb.sigma());
            Ok(pref
                * rule.integrate(rect, |x, y| {
                    let p = point(x, y);
                    let j = current_eval(kind, state, bath, t, p).expect("bath checked");
                    j.norm_sqr() / state.wigner(p)
                }))
        }
        None => {
            let BathSpec::Dephasing { lambda } = *bath else { unreachable!() };
            Ok(2.0 / lambda
                * rule.integrate(rect, |x, y| {
                    let p = point(x, y);
                    let w = state.wigner(p);
                    let a2 = p.alpha().norm_sqr();
                    let i_over_alpha_sqr = if a2 > 0.0 {
                        let i = current_eval(CurrentKind::DephasingI, state, bath, t, p).expect("bath checked");
                        i.norm_sqr() / a2
                    } else {
                        // |I|²/|α|² = (λ/2)² |LW|² stays finite at the origin
                        let (g, gc) = state.log_gradient(p);
                        (0.5 * lambda * w * (p.alpha().conj() * gc - p.alpha() * g)).norm_sqr()
                    };
                    i_over_alpha_sqr / w
                }))
        }
    }
}

/// Squeezed-Gibbs covariance `A = [[N+½, M_t], [M_t*, N+½]]`.
fn gibbs_matrix(lb: &LinearBath, t: f64) -> Result<(f64, Complex64, f64)> {
    let (a, m) = (lb.n_half(), lb.m_t(t));
    let det = a * a - m.norm_sqr();
    if !(a > 0.0 && det > 0.0) {
        return Err(Error::Domain(format!("reservoir matrix A is not positive definite (det {det})")));
    }
    Ok((a, m, det))
}

/// Eigenvalues of `A`, `(N+½) ± |M_t|`.
pub fn gibbs_matrix_eigenvalues(bath: &BathSpec, t: f64) -> Result<(f64, f64)> {
    let lb = bath.linear_or_err("gibbs_matrix_eigenvalues")?;
    let (a, m, _) = gibbs_matrix(&lb, t)?;
    Ok((a - m.norm(), a + m.norm()))
}

/// `u = J_z/W` as an affine polynomial in `(δα, δα*)`.
fn jz_over_w(state: &GaussianState, lb: &LinearBath, t: f64) -> MomentPoly {
    let (mu, s, m, d) = (state.mu(), state.s(), state.m(), state.det());
    let (a, mt) = (lb.n_half(), lb.m_t(t));
    // ∂_{α*} ln W = (−s δα + m δα*)/D,  ∂_α ln W = (m* δα − s δα*)/D
    let c1 = cx(1.0 - a * s / d) + mt * m.conj() / d;
    let c2 = a * m / d - mt * s / d;
    MomentPoly::affine(mu, c1, c2).scale(cx(0.5 * lb.gamma))
}

/// `Π = (2/γ) ∫ (J_z*, J_z) A⁻¹ (J_z, J_z*)ᵀ / W`, via Gaussian moments in the `a` representation.
pub fn pi_quadratic_form(state: &GaussianState, bath: &BathSpec, t: f64) -> Result<f64> {
    let lb = bath.linear_or_err("the quadratic-form route")?;
    bath.validate()?;
    let (a, mt, det_a) = gibbs_matrix(&lb, t)?;
    let u = jz_over_w(state, &lb, t);
    let u_abs2 = u.mean_abs_sqr(state)?;
    let u_sq = state.expect(&u.mul(&u)?)?;
    // (u*, u) A⁻¹ (u, u*)ᵀ = [2a|u|² − 2 Re(M u*²)] / det A
    Ok(2.0 / lb.gamma * (2.0 * a * u_abs2 - 2.0 * (mt * u_sq.conj()).re) / det_a)
}

/// `Φ = ∫ (J_z*, J_z) A⁻¹ (α, α*)ᵀ`, via Gaussian moments.
pub fn phi_quadratic_form(state: &GaussianState, bath: &BathSpec, t: f64) -> Result<f64> {
    let lb = bath.linear_or_err("the quadratic-form route")?;
    bath.validate()?;
    let (a, mt, det_a) = gibbs_matrix(&lb, t)?;
    let u = jz_over_w(state, &lb, t);
    let alpha = MomentPoly::affine(state.mu(), cx(1.0), ZERO);
    let u_conj_alpha = state.expect(&u.conj().mul(&alpha)?)?;
    let u_conj_alpha_conj = state.expect(&u.conj().mul(&alpha.conj())?)?;
    Ok((2.0 * a * u_conj_alpha.re - 2.0 * (mt * u_conj_alpha_conj).re) / det_a)
}

/// Entropy flux rate. Thermal: `γ(⟨a†a⟩ − n̄)/(n̄+½)`; squeezed:
/// `(γ/σ){cosh 2r ⟨a†a⟩ − n̄ + sinh² r − Re[M_t*⟨aa⟩]/σ}`; dephasing: 0.
pub fn phi_rate(state: &GaussianState, bath: &BathSpec, t: f64) -> Result<f64> {
    bath.validate()?;
    Ok(match bath.linear() {
        Some(lb) => {
            let sigma = lb.sigma();
            lb.gamma / sigma
                * ((2.0 * lb.r).cosh() * state.number() - lb.nbar + lb.r.sinh().powi(2)
                    - (lb.m_t(t).conj() * state.aa()).re / sigma)
        }
        None => 0.0,
    })
}

/// `Φ` by quadrature of `(γ/σ)(∫|β|²W − σ)`.
pub fn phi_quadrature(state: &GaussianState, bath: &BathSpec, t: f64, grid: &QuadratureSpec) -> Result<f64> {
    bath.validate()?;
    let Some(lb) = bath.linear() else { return Ok(0.0) };
    let rect = grid.box_for(state)?;
    let rot = Complex64::from_polar(1.0, lb.phase(t));
    let (ch, sh) = (lb.r.cosh(), lb.r.sinh());
    let beta2 = grid.rule()?.integrate(rect, |x, y| {
        let p = PhasePoint::from_xy(x, y).expect("finite node");
        let a = p.alpha();
        (ch * a + rot * sh * a.conj()).norm_sqr() * state.wigner(p)
    });
    Ok(lb.gamma / lb.sigma() * (beta2 - lb.sigma()))
}

/// Instantaneous and time-averaged steady-state production of a pumped
/// cavity in a squeezed reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyProduction {
    pub instantaneous: f64,
    pub time_averaged: f64,
}

/// Samples for averaging the beat term over one period.
pub const BEAT_AVERAGE_SAMPLES: usize = 1024;

/// Steady-state `Π = Φ`:
///
/// ```text
/// Π = 2κΔ_sc² sinh²(2r)/(κ² + Δ_sc²) + 2κ/(n̄+½) · |ℰ|² cosh(2r)/(κ² + Δ_cp²)
///   + 2κ/(n̄+½) · Re[ℰ² e^{−i(2Δ_ps t + θ)}/(κ + iΔ_cp)²] sinh(2r)
/// ```
///
/// which for a zero-temperature reservoir (`2κ/(n̄+½) = 4κ`) is the familiar
/// three-term expression. The beat term averages out when `ω_p ≠ ω_s`.
pub fn steady_state_pi_eq21(bath: &BathSpec, ham: &HamiltonianSpec, t: f64) -> Result<SteadyProduction> {
    let lb = bath.linear_or_err("steady-state production")?;
    bath.validate()?;
    ham.validate()?;
    let instantaneous = steady_pi_at(&lb, ham, t);
    let d_ps = ham.delta_ps(&lb);
    let time_averaged = if d_ps == 0.0 {
        instantaneous
    } else {
        let period = PI / d_ps.abs();
        let n = BEAT_AVERAGE_SAMPLES;
        // trapezoid rule on a periodic integrand: equal weights
        (0..n)
            .map(|k| steady_pi_at(&lb, ham, t + period * k as f64 / n as f64))
            .sum::<f64>()
            / n as f64
    };
    Ok(SteadyProduction { instantaneous, time_averaged })
}

fn steady_pi_at(lb: &LinearBath, ham: &HamiltonianSpec, t: f64) -> f64 {
    let kappa = lb.kappa();
    let d_sc = -ham.delta_cs(lb);
    let d_cp = ham.delta_cp();
    let d_ps = ham.delta_ps(lb);
    let e = ham.e();
    let r2 = 2.0 * lb.r;
    let drive = 2.0 * kappa / lb.sigma();
    let denom = Complex64::new(kappa, d_cp);
    let beat = e * e * Complex64::from_polar(1.0, -(2.0 * d_ps * t + lb.theta)) / (denom * denom);
    2.0 * kappa * d_sc * d_sc * r2.sinh().powi(2) / (kappa * kappa + d_sc * d_sc)
        + drive * e.norm_sqr() * r2.cosh() / (kappa * kappa + d_cp * d_cp)
        + drive * beat.re * r2.sinh()
}

/// `|J_b|²/W²` for the unpumped steady state:
/// `κ²Δ_sc² sinh²(2r) |β|² / (κ² + Δ_cs² cosh²(2r))`.
pub fn jb_field_squared(bath: &BathSpec, ham: &HamiltonianSpec, t: f64, p: PhasePoint) -> Result<f64> {
    let lb = bath.linear_or_err("the current field")?;
    if ham.e() != ZERO {
        return Err(Error::Usage("the closed-form current field assumes the pump is off".into()));
    }
    let kappa = lb.kappa();
    let d = ham.delta_cs(&lb);
    let r2 = 2.0 * lb.r;
    let a = p.alpha();
    let beta = a * lb.r.cosh() + a.conj() * Complex64::from_polar(1.0, lb.phase(t)) * lb.r.sinh();
    Ok(kappa * kappa * d * d * r2.sinh().powi(2) * beta.norm_sqr()
        / (kappa * kappa + d * d * r2.cosh().powi(2)))
}

/// A von Neumann rate that diverges at zero temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VnValue {
    Finite(f64),
    /// `+∞` when `positive`, else `−∞`.
    Infinite { positive: bool },
}

impl VnValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            VnValue::Finite(v) => Some(v),
            VnValue::Infinite { .. } => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, VnValue::Infinite { .. })
    }

    fn signed_infinity(x: f64) -> Self {
        if x == 0.0 {
            VnValue::Finite(0.0)
        } else {
            VnValue::Infinite { positive: x > 0.0 }
        }
    }

    fn add(self, other: Self) -> Self {
        match (self, other) {
            (VnValue::Finite(a), VnValue::Finite(b)) => VnValue::Finite(a + b),
            (VnValue::Infinite { positive }, VnValue::Finite(_))
            | (VnValue::Finite(_), VnValue::Infinite { positive }) => VnValue::Infinite { positive },
            // opposite infinities do not occur for a relaxing mode; keep the flux sign
            (_, inf @ VnValue::Infinite { .. }) => inf,
        }
    }
}

impl Serialize for VnValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            VnValue::Finite(v) => serializer.serialize_f64(v),
            VnValue::Infinite { positive: true } => serializer.serialize_str("inf"),
            VnValue::Infinite { positive: false } => serializer.serialize_str("-inf"),
        }
    }
}

impl std::fmt::Display for VnValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            VnValue::Finite(v) => write!(f, "{v}"),
            VnValue::Infinite { positive: true } => f.write_str("inf"),
            VnValue::Infinite { positive: false } => f.write_str("-inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VnRates {
    /// `Φ_vN = Φ_E/T`.
    pub phi_vn: VnValue,
    /// `dS_vN/dt + Φ_vN`.
    pub pi_vn_proxy: VnValue,
    pub temperature: f64,
}

/// Von Neumann flux and production for a thermal reservoir at
/// `T = ω_c / ln(1 + 1/n̄)`.
pub fn vn_rates(state: &GaussianState, bath: &BathSpec, ham: &HamiltonianSpec, t: f64) -> Result<VnRates> {
    let BathSpec::Thermal { nbar, .. } = *bath else {
        return Err(Error::Unsupported("von Neumann flux is defined for thermal baths only".into()));
    };
    bath.validate()?;
    let temperature = model::temperature_from_nbar(nbar, ham.omega_c);
    let phi_e = model::energy_flux(state, bath, ham, t);
    let phi_vn = if temperature > 0.0 {
        VnValue::Finite(phi_e / temperature)
    } else {
        VnValue::signed_infinity(phi_e)
    };
    let ds_vn = von_neumann_entropy_rate(state, bath, ham, t);
    Ok(VnRates { phi_vn, pi_vn_proxy: ds_vn.add(phi_vn), temperature })
}

/// `dS_vN/dt = ln((ν+1)/ν) dν/dt` with `ν = √D − ½`.
pub fn von_neumann_entropy_rate(state: &GaussianState, bath: &BathSpec, ham: &HamiltonianSpec, t: f64) -> VnValue {
    let d = model::moment_rhs(state, bath, ham, t);
    let sqrt_det = state.det().sqrt();
    let d_nu = d.d_det(state) / (2.0 * sqrt_det);
    let nu = state.symplectic_occupation();
    if nu == 0.0 {
        VnValue::signed_infinity(d_nu)
    } else {
        VnValue::Finite(((nu + 1.0) / nu).ln() * d_nu)
    }
}

/// How `Π` and `Φ` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    QuadraticForm,
}

impl Method {
    /// Tolerance on `|dS/dt − (Π − Φ)|`, relative to `max(1, |Π|, |Φ|)`.
    pub fn balance_tolerance(self) -> f64 {
        match self {
            Method::ClosedForm | Method::QuadraticForm => 1e-9,
            Method::Quadrature => 1e-6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Quadrature => "quadrature",
            Method::QuadraticForm => "quadratic_form",
        }
    }
}

/// Rates at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    pub pi: f64,
    pub phi: f64,
    pub dsdt: f64,
    pub phi_e: f64,
    /// Wigner entropy.
    pub entropy: f64,
    /// `None` for reservoirs without a temperature.
    pub phi_vn: Option<VnValue>,
    pub method: Method,
}

impl RateReport {
    pub fn balance_residual(&self) -> f64 {
        self.dsdt - (self.pi - self.phi)
    }
}

pub fn rate_report(
    state: &GaussianState,
    bath: &BathSpec,
    ham: &HamiltonianSpec,
    t: f64,
    method: Method,
) -> Result<RateReport> {
    rate_report_with(state, bath, ham, t, method, &QuadratureSpec::default())
}

/// [`rate_report`] with explicit quadrature settings. `dS/dt` comes from the
/// moment equations through `½ d ln det Θ/dt`, which is also the first-order
/// entropy change of a Gaussian snapshot under dephasing.
pub fn rate_report_with(
    state: &GaussianState,
    bath: &BathSpec,
    ham: &HamiltonianSpec,
    t: f64,
    method: Method,
    grid: &QuadratureSpec,
) -> Result<RateReport> {
    bath.validate()?;
    ham.validate()?;
    let (pi, phi) = match method {
        Method::ClosedForm => (pi_closed_form(state, bath, t)?, phi_rate(state, bath, t)?),
        Method::Quadrature => (pi_quadrature(state, bath, t, grid)?, phi_quadrature(state, bath, t, grid)?),
        Method::QuadraticForm => {
            (pi_quadratic_form(state, bath, t)?, phi_quadratic_form(state, bath, t)?)
        }
    };
    let dsdt = model::moment_rhs(state, bath, ham, t).entropy_rate(state);
    let phi_vn = match bath {
        BathSpec::Thermal { .. } => Some(vn_rates(state, bath, ham, t)?.phi_vn),
        _ => None,
    };
    let report = RateReport {
        pi,
        phi,
        dsdt,
        phi_e: model::energy_flux(state, bath, ham, t),
        entropy: state.wigner_entropy(),
        phi_vn,
        method,
    };
    let scale = 1f64.max(pi.abs()).max(phi.abs());
    if report.balance_residual().abs() > method.balance_tolerance() * scale {
        return Err(Error::SelfCheck(format!(
            "entropy balance violated ({}): dS/dt = {dsdt}, Π − Φ = {}",
            method.name(),
            pi - phi
        )));
    }
    Ok(report)
}
