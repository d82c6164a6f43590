//! Reservoirs, Hamiltonians and the exact first/second moment dynamics.
//!
//! Units: ħ = k_B = 1, so frequencies, rates and temperatures share one unit.
//!
//! The squeezed reservoir is written in the `a` representation with
//! `N + ½ = (n̄ + ½) cosh 2r` and `M_t = −(n̄ + ½) e^{i(θ − 2ω_s t)} sinh 2r`;
//! a thermal reservoir is the `r = 0` member of that family. For a Hamiltonian
//! `H = ω_c a†a + i(ℰ e^{−iω_p t} a† − h.c.)` the raw moments obey
//!
//! ```text
//! d⟨a⟩/dt   = ℰ_t − (iω_c + γ/2)⟨a⟩
//! d⟨a†a⟩/dt = ℰ_t⟨a†⟩ + ℰ_t*⟨a⟩ + γ(N − ⟨a†a⟩)
//! d⟨aa⟩/dt  = 2ℰ_t⟨a⟩ + γM_t − (2iω_c + γ)⟨aa⟩
//! ```
//!
//! with `ℰ_t = ℰ e^{−iω_p t}`. Number dephasing at rate λ adds `−λ/2 ⟨a⟩`,
//! `−2λ⟨aa⟩` and nothing to `⟨a†a⟩`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phasespace::GaussianState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Reservoir coupled to the mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BathSpec {
    Thermal { gamma: f64, nbar: f64 },
    Squeezed { gamma: f64, nbar: f64, r: f64, theta: f64, omega_s: f64 },
    Dephasing { lambda: f64 },
}

/// Parameters shared by thermal and squeezed reservoirs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearBath {
    pub gamma: f64,
    pub nbar: f64,
    pub r: f64,
    pub theta: f64,
    pub omega_s: f64,
}

impl LinearBath {
    /// `n̄ + ½`.
    #[inline]
    pub fn sigma(&self) -> f64 {
        self.nbar + 0.5
    }

    /// `N + ½ = (n̄ + ½) cosh 2r`.
    #[inline]
    pub fn n_half(&self) -> f64 {
        self.sigma() * (2.0 * self.r).cosh()
    }

    /// `N`.
    pub fn n(&self) -> f64 {
        self.n_half() - 0.5
    }

    /// Squeezing phase `θ − 2ω_s t`.
    #[inline]
    pub fn phase(&self, t: f64) -> f64 {
        self.theta - 2.0 * self.omega_s * t
    }

    /// `M_t = −(n̄ + ½) e^{i(θ − 2ω_s t)} sinh 2r`.
    pub fn m_t(&self, t: f64) -> Complex64 {
        -self.sigma() * (2.0 * self.r).sinh() * Complex64::from_polar(1.0, self.phase(t))
    }

    /// Cavity amplitude decay rate `κ = γ/2`.
    #[inline]
    pub fn kappa(&self) -> f64 {
        0.5 * self.gamma
    }
}

impl BathSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("invalid bath: {what}")));
        match *self {
            BathSpec::Thermal { gamma, nbar } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return bad("gamma must be positive");
                }
                if !(nbar >= 0.0 && nbar.is_finite()) {
                    return bad("nbar must be non-negative");
                }
            }
            BathSpec::Squeezed { gamma, nbar, r, theta, omega_s } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return bad("gamma must be positive");
                }
                if !(nbar >= 0.0 && nbar.is_finite()) {
                    return bad("nbar must be non-negative");
                }
                if !(r >= 0.0 && r.is_finite()) {
                    return bad("r must be non-negative");
                }
                if !(theta.is_finite() && omega_s.is_finite()) {
                    return bad("theta and omega_s must be finite");
                }
            }
            BathSpec::Dephasing { lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return bad("lambda must be positive");
                }
            }
        }
        Ok(())
    }

    /// Thermal and squeezed reservoirs as one family; `None` for dephasing.
    pub fn linear(&self) -> Option<LinearBath> {
        match *self {
            BathSpec::Thermal { gamma, nbar } => {
                Some(LinearBath { gamma, nbar, r: 0.0, theta: 0.0, omega_s: 0.0 })
            }
            BathSpec::Squeezed { gamma, nbar, r, theta, omega_s } => {
                Some(LinearBath { gamma, nbar, r, theta, omega_s })
            }
            BathSpec::Dephasing { .. } => None,
        }
    }

    pub fn linear_or_err(&self, what: &str) -> Result<LinearBath> {
        self.linear()
            .ok_or_else(|| Error::Usage(format!("{what} requires a thermal or squeezed bath")))
    }

    /// `N + ½`; `None` for dephasing.
    pub fn n_half(&self) -> Option<f64> {
        self.linear().map(|b| b.n_half())
    }

    /// `M_t`; `None` for dephasing.
    pub fn m_t(&self, t: f64) -> Option<Complex64> {
        self.linear().map(|b| b.m_t(t))
    }

    /// Largest relaxation rate, used to size default time steps.
    pub fn max_rate(&self) -> f64 {
        match *self {
            BathSpec::Thermal { gamma, .. } | BathSpec::Squeezed { gamma, .. } => gamma,
            BathSpec::Dephasing { lambda } => 2.0 * lambda,
        }
    }

    pub fn is_dephasing(&self) -> bool {
        matches!(self, BathSpec::Dephasing { .. })
    }
}

/// `n̄ = 1/(e^{βω} − 1)`.
pub fn nbar_from_beta(beta: f64, omega: f64) -> f64 {
    1.0 / (beta * omega).exp_m1()
}

/// Temperature for which a mode of frequency `omega` has occupation `nbar`.
/// Returns `0` for `nbar = 0`.
pub fn temperature_from_nbar(nbar: f64, omega: f64) -> f64 {
    if nbar <= 0.0 {
        0.0
    } else {
        omega / (1.0 / nbar).ln_1p()
    }
}

/// Coherent drive `i(ℰ e^{−iω_p t} a† − h.c.)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pump {
    /// Complex amplitude ℰ; `|ℰ| = √(2Pκ/ω_p)` for pump power `P`.
    pub e: Complex64,
    pub omega_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub omega_c: f64,
    #[serde(default)]
    pub pump: Option<Pump>,
}

impl HamiltonianSpec {
    pub fn free(omega_c: f64) -> Self {
        Self { omega_c, pump: None }
    }

    pub fn pumped(omega_c: f64, e: Complex64, omega_p: f64) -> Self {
        Self { omega_c, pump: Some(Pump { e, omega_p }) }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.omega_c.is_finite()
            && self.pump.is_none_or(|p| p.e.re.is_finite() && p.e.im.is_finite() && p.omega_p.is_finite());
        if finite {
            Ok(())
        } else {
            Err(Error::Config("Hamiltonian frequencies and amplitudes must be finite".into()))
        }
    }

    /// `ℰ`, zero without a pump.
    pub fn e(&self) -> Complex64 {
        self.pump.map_or(ZERO, |p| p.e)
    }

    /// `ω_p`; falls back to `ω_c` without a pump so detunings vanish.
    pub fn omega_p(&self) -> f64 {
        self.pump.map_or(self.omega_c, |p| p.omega_p)
    }

    /// `ℰ e^{−iω_p t}`.
    pub fn drive(&self, t: f64) -> Complex64 {
        self.pump.map_or(ZERO, |p| p.e * Complex64::from_polar(1.0, -p.omega_p * t))
    }

    /// `Δ_cp = ω_c − ω_p`.
    pub fn delta_cp(&self) -> f64 {
        self.omega_c - self.omega_p()
    }

    /// `Δ_cs = ω_c − ω_s`.
    pub fn delta_cs(&self, bath: &LinearBath) -> f64 {
        self.omega_c - bath.omega_s
    }

    /// `Δ_ps = ω_p − ω_s`.
    pub fn delta_ps(&self, bath: &LinearBath) -> f64 {
        self.omega_p() - bath.omega_s
    }

    /// `⟨H⟩` in the state.
    pub fn energy(&self, state: &GaussianState, t: f64) -> f64 {
        self.omega_c * state.number() - 2.0 * (self.drive(t) * state.mu().conj()).im
    }

    /// Injected power `⟨∂H/∂t⟩ = 2ω_p Re(ℰ_t ⟨a⟩*)`.
    pub fn power(&self, state: &GaussianState, t: f64) -> f64 {
        2.0 * self.omega_p() * (self.drive(t) * state.mu().conj()).re
    }
}

/// Reference frame for the moment equations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Frame {
    #[default]
    Lab,
    /// Frame rotating at `omega`; moments carry `e^{iωt}` per annihilation operator.
    Rotating { omega: f64 },
}

impl Frame {
    fn omega(self) -> f64 {
        match self {
            Frame::Lab => 0.0,
            Frame::Rotating { omega } => omega,
        }
    }

    /// Map a rotating-frame state at time `t` back to the lab frame.
    pub fn to_lab(self, state: &GaussianState, t: f64) -> Result<GaussianState> {
        let w = self.omega();
        let u = Complex64::from_polar(1.0, -w * t);
        GaussianState::new(state.mu() * u, state.s(), state.m() * u * u)
    }

    /// Map a lab-frame state at time `t` into this frame.
    pub fn from_lab(self, state: &GaussianState, t: f64) -> Result<GaussianState> {
        let w = self.omega();
        let u = Complex64::from_polar(1.0, w * t);
        GaussianState::new(state.mu() * u, state.s(), state.m() * u * u)
    }
}

/// Time derivatives of `(μ, s, m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentDerivatives {
    pub d_mu: Complex64,
    pub d_s: f64,
    pub d_m: Complex64,
}

impl MomentDerivatives {
    /// `d det Θ/dt = 2s ṡ − 2 Re(m* ṁ)`.
    pub fn d_det(&self, state: &GaussianState) -> f64 {
        2.0 * state.s() * self.d_s - 2.0 * (state.m().conj() * self.d_m).re
    }

    /// `d⟨a†a⟩/dt`.
    pub fn d_number(&self, state: &GaussianState) -> f64 {
        self.d_s + 2.0 * (state.mu().conj() * self.d_mu).re
    }

    /// Wigner entropy rate `½ d ln det Θ/dt`.
    pub fn entropy_rate(&self, state: &GaussianState) -> f64 {
        0.5 * self.d_det(state) / state.det()
    }

    pub fn max_abs(&self) -> f64 {
        self.d_mu.norm().max(self.d_s.abs()).max(self.d_m.norm())
    }
}

/// Exact moment derivatives in the lab frame.
pub fn moment_rhs(
    state: &GaussianState,
    bath: &BathSpec,
    ham: &HamiltonianSpec,
    t: f64,
) -> MomentDerivatives {
    moment_rhs_in_frame(state, bath, ham, t, Frame::Lab)
}

/// Exact moment derivatives, with `state` expressed in `frame`.
pub fn moment_rhs_in_frame(
    state: &GaussianState,
    bath: &BathSpec,
    ham: &HamiltonianSpec,
    t: f64,
    frame: Frame,
) -> MomentDerivatives {
    let w = frame.omega();
    let omega = ham.omega_c - w;
    let drive = ham.drive(t) * Complex64::from_polar(1.0, w * t);

    let mu = state.mu();
    let ada = state.number();
    let aa = state.aa();
    let i = Complex64::i();

    let mut d_a = drive - i * omega * mu;
    let mut d_ada = 2.0 * (drive * mu.conj()).re;
    let mut d_aa = 2.0 * drive * mu - 2.0 * i * omega * aa;

    match bath.linear() {
        Some(lb) => {
            let g = lb.gamma;
            let m_t = lb.m_t(t) * Complex64::from_polar(1.0, 2.0 * w * t);
            d_a -= 0.5 * g * mu;
            d_ada += g * (lb.n() - ada);
            d_aa += g * m_t - g * aa;
        }
        None => {
            let BathSpec::Dephasing { lambda } = *bath else { unreachable!() };
            d_a -= 0.5 * lambda * mu;
            d_aa -= 2.0 * lambda * aa;
        }
    }

    MomentDerivatives {
        d_mu: d_a,
        d_s: d_ada - 2.0 * (mu.conj() * d_a).re,
        d_m: d_aa - 2.0 * mu * d_a,
    }
}

/// Uniformly sampled solution of the moment equations.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GaussianState>,
    /// Number of steps whose result had to be clamped onto `det Θ = ¼`.
    pub clamp_events: usize,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn last(&self) -> &GaussianState {
        self.states.last().expect("trajectory is never empty")
    }
}

/// Default RK4 step: `min(dt_max, 1e-3/γ_max)`.
pub fn default_dt(bath: &BathSpec, dt_max: f64) -> f64 {
    dt_max.min(1e-3 / bath.max_rate())
}

/// Integrate the moment equations with fixed-step RK4 from `t0` to `t1`.
pub fn evolve(
    state: &GaussianState,
    bath: &BathSpec,
    ham: &HamiltonianSpec,
    t0: f64,
    t1: f64,
    dt_max: f64,
) -> Result<Trajectory> {
    if !(dt_max > 0.0) {
        return Err(Error::Config(format!("dt_max = {dt_max} must be positive")));
    }
    let span = t1 - t0;
    let dt = default_dt(bath, dt_max);
    let n_steps = ((span / dt).ceil() as usize).max(1);
    evolve_steps(state, bath, ham, Frame::Lab, t0, t1, n_steps)
}

/// RK4 with exactly `n_steps` uniform steps, in the given frame.
pub fn evolve_steps(
    state: &GaussianState,
    bath: &BathSpec,
    ham: &HamiltonianSpec,
    frame: Frame,
    t0: f64,
    t1: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    if bath.is_dephasing() {
        return Err(Error::GaussianityNotPreserved(
            "number dephasing makes the Wigner function non-Gaussian; \
             use instantaneous rates or the grid solver"
                .into(),
        ));
    }
    bath.validate()?;
    ham.validate()?;
    if !(t1 >= t0) || n_steps == 0 {
        return Err(Error::Config(format!("bad time span [{t0}, {t1}] with {n_steps} steps")));
    }

    let dt = (t1 - t0) / n_steps as f64;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut clamp_events = 0;
    let mut cur = *state;
    times.push(t0);
    states.push(cur);

    let rhs = |st: &GaussianState, t: f64| moment_rhs_in_frame(st, bath, ham, t, frame);
    // Intermediate RK stages may sit marginally outside the physical region.
    let shift = |st: &GaussianState, k: &MomentDerivatives, h: f64| RawState {
        mu: st.mu() + k.d_mu * h,
        s: st.s() + k.d_s * h,
        m: st.m() + k.d_m * h,
    };

    for step in 0..n_steps {
        let t = t0 + step as f64 * dt;
        let k1 = rhs(&cur, t);
        let k2 = shift(&cur, &k1, 0.5 * dt).rhs(bath, ham, t + 0.5 * dt, frame);
        let k3 = shift(&cur, &k2, 0.5 * dt).rhs(bath, ham, t + 0.5 * dt, frame);
        let k4 = shift(&cur, &k3, dt).rhs(bath, ham, t + dt, frame);
        let w = dt / 6.0;
        let mu = cur.mu() + (k1.d_mu + 2.0 * k2.d_mu + 2.0 * k3.d_mu + k4.d_mu) * w;
        let s = cur.s() + (k1.d_s + 2.0 * k2.d_s + 2.0 * k3.d_s + k4.d_s) * w;
        let m = cur.m() + (k1.d_m + 2.0 * k2.d_m + 2.0 * k3.d_m + k4.d_m) * w;
        let (next, clamped) = GaussianState::new_clamped(mu, s, m)?;
        if clamped {
            clamp_events += 1;
        }
        cur = next;
        times.push(t0 + (step + 1) as f64 * dt);
        states.push(cur);
    }
    if clamp_events > 0 {
        log::warn!("{clamp_events} RK4 steps clamped onto the uncertainty bound");
    }
    Ok(Trajectory { times, states, clamp_events })
}

/// Unvalidated moments for intermediate Runge-Kutta stages.
struct RawState {
    mu: Complex64,
    s: f64,
    m: Complex64,
}

impl RawState {
    fn rhs(&self, bath: &BathSpec, ham: &HamiltonianSpec, t: f64, frame: Frame) -> MomentDerivatives {
        // The RHS is affine in the moments; validation is irrelevant here.
        let st = GaussianState::unchecked(self.mu, self.s, self.m);
        moment_rhs_in_frame(&st, bath, ham, t, frame)
    }
}

/// Analytic lab-frame steady state of a (pumped) cavity in a thermal or squeezed bath.
///
/// `⟨a⟩ = ℰ_t/(κ + iΔ_cp)`, `s = N + ½`, `m = κ M_t/(κ + iΔ_cs)`.
pub fn steady_state(bath: &BathSpec, ham: &HamiltonianSpec, t: f64) -> Result<GaussianState> {
    let lb = bath.linear_or_err("steady_state")?;
    bath.validate()?;
    ham.validate()?;
    let kappa = lb.kappa();
    let i = Complex64::i();
    let mu = ham.drive(t) / (kappa + i * ham.delta_cp());
    let m = kappa * lb.m_t(t) / (kappa + i * ham.delta_cs(&lb));
    GaussianState::new(mu, lb.n_half(), m)
}

/// Energy flux into the reservoir, `Φ_E = −tr[H 𝒟(ρ)]`.
///
/// Thermal and squeezed: `γω_c(⟨a†a⟩ − N) − γ Im(ℰ_t⟨a⟩*)`; at the steady
/// state this equals the injected power `2κω_p|ℰ|²/(κ² + Δ_cp²)`.
/// Dephasing exchanges no energy and returns 0.
pub fn energy_flux(state: &GaussianState, bath: &BathSpec, ham: &HamiltonianSpec, t: f64) -> f64 {
    match bath.linear() {
        Some(lb) => {
            lb.gamma * ham.omega_c * (state.number() - lb.n())
                - lb.gamma * (ham.drive(t) * state.mu().conj()).im
        }
        None => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn squeezed(gamma: f64, nbar: f64, r: f64, theta: f64, omega_s: f64) -> BathSpec {
        BathSpec::Squeezed { gamma, nbar, r, theta, omega_s }
    }

    #[test]
    fn thermal_fixed_point() {
        let bath = BathSpec::Thermal { gamma: 0.7, nbar: 1.4 };
        let st = GaussianState::thermal(1.4).unwrap();
        let d = moment_rhs(&st, &bath, &HamiltonianSpec::free(2.0), 0.3);
        assert!(d.max_abs() < 1e-15);
    }

    #[test]
    fn thermal_rhs_matches_closed_equations() {
        let (gamma, nbar, w) = (0.8, 0.3, 1.7);
        let bath = BathSpec::Thermal { gamma, nbar };
        let st = GaussianState::new(c(0.4, -0.2), 1.2, c(0.3, 0.1)).unwrap();
        let d = moment_rhs(&st, &bath, &HamiltonianSpec::free(w), 0.0);
        let i = Complex64::i();
        assert!((d.d_mu + (i * w + gamma / 2.0) * st.mu()).norm() < 1e-15);
        assert_relative_eq!(d.d_number(&st), gamma * (nbar - st.number()), max_relative = 1e-14);
        let d_aa = d.d_m + 2.0 * st.mu() * d.d_mu;
        assert!((d_aa + (2.0 * i * w + gamma) * st.aa()).norm() < 1e-14);
    }

    #[test]
    fn pumped_steady_mean() {
        let bath = squeezed(2.0, 0.0, 0.5, 0.3, 1.0);
        let ham = HamiltonianSpec::pumped(1.0, c(1.0, 0.0), 1.0);
        let st = steady_state(&bath, &ham, 0.0).unwrap();
        assert!((st.mu() - c(1.0, 0.0)).norm() < 1e-15);
        // the steady state is periodic; its moments must solve the equations of motion
        let h = 1e-5;
        let (p, q) = (steady_state(&bath, &ham, h).unwrap(), steady_state(&bath, &ham, -h).unwrap());
        let d = moment_rhs(&st, &bath, &ham, 0.0);
        assert!((d.d_mu - (p.mu() - q.mu()) / (2.0 * h)).norm() < 1e-8);
        assert!((d.d_s - (p.s() - q.s()) / (2.0 * h)).abs() < 1e-8);
        assert!((d.d_m - (p.m() - q.m()) / (2.0 * h)).norm() < 1e-8);
    }

    #[test]
    fn dephasing_keeps_number() {
        let bath = BathSpec::Dephasing { lambda: 0.9 };
        let st = GaussianState::new(c(0.6, 0.8), 1.3, c(0.2, -0.4)).unwrap();
        let d = moment_rhs(&st, &bath, &HamiltonianSpec::free(0.0), 0.0);
        assert!(d.d_number(&st).abs() < 1e-15);
        assert!((d.d_mu + 0.45 * st.mu()).norm() < 1e-15);
    }

    #[test]
    fn evolve_refuses_dephasing() {
        let bath = BathSpec::Dephasing { lambda: 0.9 };
        let r = evolve(&GaussianState::vacuum(), &bath, &HamiltonianSpec::free(1.0), 0.0, 1.0, 0.01);
        assert!(matches!(r, Err(Error::GaussianityNotPreserved(_))));
    }

    #[test]
    fn equilibrium_trajectory_is_constant() {
        let bath = BathSpec::Thermal { gamma: 1.0, nbar: 0.7 };
        let st = GaussianState::thermal(0.7).unwrap();
        let traj = evolve(&st, &bath, &HamiltonianSpec::free(1.0), 0.0, 2.0, 0.01).unwrap();
        for s in &traj.states {
            assert!((s.s() - st.s()).abs() < 1e-14 && s.mu().norm() == 0.0 && s.m().norm() == 0.0);
        }
    }

    #[test]
    fn cooling_from_one_photon() {
        let bath = BathSpec::Thermal { gamma: 1.0, nbar: 0.0 };
        let st = GaussianState::thermal(1.0).unwrap();
        let traj = evolve(&st, &bath, &HamiltonianSpec::free(1.0), 0.0, 1.0, 0.01).unwrap();
        assert_relative_eq!(traj.last().s(), 0.5 + (-1.0f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn rk4_error_is_fourth_order() {
        let bath = squeezed(1.0, 0.2, 0.4, 0.1, 0.7);
        let ham = HamiltonianSpec::pumped(1.3, c(0.5, 0.2), 1.1);
        let st = GaussianState::coherent(c(0.3, 0.0)).unwrap();
        let run = |n| evolve_steps(&st, &bath, &ham, Frame::Lab, 0.0, 2.0, n).unwrap();
        let reference = *run(4096).last();
        let err = |n| {
            let s = *run(n).last();
            (s.mu() - reference.mu()).norm() + (s.s() - reference.s()).abs() + (s.m() - reference.m()).norm()
        };
        let ratio = err(20) / err(40);
        assert!((12.0..20.0).contains(&ratio), "halving ratio {ratio}");
    }

    #[test]
    fn squeezed_pump_converges_to_steady_state() {
        let bath = squeezed(2.0, 0.0, 0.5, 0.0, 0.9);
        let ham = HamiltonianSpec::pumped(1.8, c(0.7, -0.2), 1.5);
        let t1 = 40.0;
        let traj = evolve(&GaussianState::vacuum(), &bath, &ham, 0.0, t1, 0.01).unwrap();
        let ss = steady_state(&bath, &ham, t1).unwrap();
        let end = traj.last();
        assert!((end.mu() - ss.mu()).norm() < 1e-8);
        assert!((end.s() - ss.s()).abs() < 1e-8);
        assert!((end.m() - ss.m()).norm() < 1e-8);
    }

    #[test]
    fn steady_state_reference_values() {
        // κ = 1, Δ_cs = 0.9, r = 0.5, θ = 0, n̄ = 0, t = 0
        let bath = squeezed(2.0, 0.0, 0.5, 0.0, 0.0);
        let ham = HamiltonianSpec::free(0.9);
        let st = steady_state(&bath, &ham, 0.0).unwrap();
        assert_relative_eq!(st.s(), 0.5 * 1f64.cosh(), max_relative = 1e-15);
        let m0 = -0.5 * 1f64.sinh();
        let expected = m0 / c(1.0, 0.9);
        assert!((st.m() - expected).norm() < 1e-15);
        assert!((st.m() - c(-0.32465, 0.29218)).norm() < 1e-5);
    }

    #[test]
    fn steady_state_without_squeezing_or_pump_is_thermal() {
        let bath = BathSpec::Thermal { gamma: 0.4, nbar: 2.0 };
        let st = steady_state(&bath, &HamiltonianSpec::free(3.0), 1.7).unwrap();
        assert_eq!(st, GaussianState::thermal(2.0).unwrap());
    }

    #[test]
    fn steady_determinant_is_time_independent() {
        let bath = squeezed(1.2, 0.3, 0.6, 0.4, 2.0);
        let ham = HamiltonianSpec::pumped(1.1, c(0.3, 0.4), 0.8);
        let d0 = steady_state(&bath, &ham, 0.0).unwrap().det();
        for t in [0.3, 1.7, 11.0] {
            let d = steady_state(&bath, &ham, t).unwrap().det();
            assert!((d - d0).abs() < 1e-14);
        }
    }

    #[test]
    fn energy_flux_examples() {
        // ℰ = 1, κ = 1, Δ_cp = 0, ω_p = 1
        let bath = squeezed(2.0, 0.0, 0.5, 0.0, 1.3);
        let ham = HamiltonianSpec::pumped(1.0, c(1.0, 0.0), 1.0);
        let ss = steady_state(&bath, &ham, 0.4).unwrap();
        assert_relative_eq!(energy_flux(&ss, &bath, &ham, 0.4), 2.0, max_relative = 1e-14);
        assert_relative_eq!(ham.power(&ss, 0.4), 2.0, max_relative = 1e-14);

        let unpumped = HamiltonianSpec::free(1.0);
        let ss = steady_state(&bath, &unpumped, 0.4).unwrap();
        assert!(energy_flux(&ss, &bath, &unpumped, 0.4).abs() < 1e-15);

        let deph = BathSpec::Dephasing { lambda: 1.0 };
        let st = GaussianState::coherent(c(1.0, 1.0)).unwrap();
        assert_eq!(energy_flux(&st, &deph, &HamiltonianSpec::free(2.0), 0.0), 0.0);

        let th = BathSpec::Thermal { gamma: 0.5, nbar: 0.2 };
        let st = GaussianState::thermal(1.0).unwrap();
        assert_relative_eq!(energy_flux(&st, &th, &HamiltonianSpec::free(2.0), 0.0), 0.5 * 2.0 * 0.8, max_relative = 1e-14);
    }

    #[test]
    fn energy_balance_along_trajectory() {
        // d⟨H⟩/dt = ⟨∂H/∂t⟩ − Φ_E, checked by central differences of ⟨H⟩.
        let bath = squeezed(1.0, 0.1, 0.3, 0.2, 0.5);
        let ham = HamiltonianSpec::pumped(1.2, c(0.6, 0.1), 0.9);
        let traj = evolve_steps(&GaussianState::vacuum(), &bath, &ham, Frame::Lab, 0.0, 3.0, 3000).unwrap();
        let dt = traj.dt();
        for k in [500usize, 1500, 2500] {
            // ⟨H⟩ carries explicit time dependence through ℰ_t; difference it as a whole.
            let e = |j: usize| ham.energy(&traj.states[j], traj.times[j]);
            let de = (e(k + 1) - e(k - 1)) / (2.0 * dt);
            let st = &traj.states[k];
            let t = traj.times[k];
            let expected = ham.power(st, t) - energy_flux(st, &bath, &ham, t);
            assert!((de - expected).abs() < 1e-6, "{de} vs {expected}");
        }
    }

    #[test]
    fn zero_squeezing_matches_thermal() {
        let th = BathSpec::Thermal { gamma: 0.9, nbar: 0.6 };
        let sq = squeezed(0.9, 0.6, 0.0, 1.1, 2.3);
        let ham = HamiltonianSpec::pumped(1.0, c(0.2, 0.3), 1.4);
        let st = GaussianState::new(c(0.1, 0.2), 0.9, c(0.2, 0.0)).unwrap();
        let a = evolve(&st, &th, &ham, 0.0, 3.0, 0.01).unwrap();
        let b = evolve(&st, &sq, &ham, 0.0, 3.0, 0.01).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!((x.mu() - y.mu()).norm() <= 1e-12);
            assert!((x.s() - y.s()).abs() <= 1e-12);
            assert!((x.m() - y.m()).norm() <= 1e-12);
        }
    }

    #[test]
    fn rotating_frame_reproduces_lab_frame() {
        let bath = squeezed(1.0, 0.0, 0.4, 0.3, 1.9);
        let ham = HamiltonianSpec::pumped(2.0, c(0.5, 0.0), 2.1);
        let st = GaussianState::coherent(c(0.2, 0.1)).unwrap();
        let frame = Frame::Rotating { omega: 2.1 };
        let n = 4000;
        let lab = evolve_steps(&st, &bath, &ham, Frame::Lab, 0.0, 4.0, n).unwrap();
        let rot = evolve_steps(&frame.from_lab(&st, 0.0).unwrap(), &bath, &ham, frame, 0.0, 4.0, n).unwrap();
        for k in (0..=n).step_by(500) {
            let back = frame.to_lab(&rot.states[k], rot.times[k]).unwrap();
            let l = &lab.states[k];
            assert!((back.mu() - l.mu()).norm() <= 1e-9);
            assert!((back.s() - l.s()).abs() <= 1e-9);
            assert!((back.m() - l.m()).norm() <= 1e-9);
        }
    }

    #[test]
    fn temperature_round_trip() {
        let (beta, w) = (0.37, 1.5);
        let nbar = nbar_from_beta(beta, w);
        assert_relative_eq!(temperature_from_nbar(nbar, w), 1.0 / beta, max_relative = 1e-13);
        assert_eq!(temperature_from_nbar(0.0, w), 0.0);
    }

    #[test]
    fn squeezed_accessors() {
        let lb = squeezed(1.0, 0.4, 0.3, 0.2, 0.5).linear().unwrap();
        assert_relative_eq!(lb.n() + 0.5, 0.9 * 0.6f64.cosh(), max_relative = 1e-15);
        let mt = lb.m_t(1.0);
        assert_relative_eq!(mt.norm(), 0.9 * 0.6f64.sinh(), max_relative = 1e-14);
        assert_relative_eq!((-mt).arg(), 0.2 - 1.0, max_relative = 1e-13);
    }
}
