//! C interface to `wigner_entropy`.
//!
//! States, reservoirs and Hamiltonians are opaque heap handles created by
//! `we_*_new*` functions and released with the matching `we_*_free`. Every
//! fallible call returns a [`WeStatus`]; on failure a description is available
//! from [`we_last_error_message`] on the same thread. Results are written
//! through out-pointers, which are left untouched on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use wigner_entropy::model::{self, Frame};
use wigner_entropy::quadrature::QuadratureSpec;
use wigner_entropy::rates::{self, VnValue};
use wigner_entropy::trajectories::{self, KernelRatio, LangevinSpec};
use wigner_entropy::{BathSpec, Complex64, Error, GaussianState, HamiltonianSpec, Method, PhasePoint};

/// Outcome of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Unsupported = 3,
    Usage = 4,
    GaussianityNotPreserved = 5,
    Accuracy = 6,
    Config = 7,
    Stability = 8,
    SelfCheck = 9,
    Panic = 10,
}

/// Evaluation route for the entropy production rate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeMethod {
    ClosedForm = 0,
    Quadrature = 1,
    QuadraticForm = 2,
}

/// How to read [`WeRateReport::phi_vn`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeVnKind {
    /// Not defined for this reservoir; `phi_vn` is NaN.
    Undefined = 0,
    Finite = 1,
    PlusInfinity = 2,
    MinusInfinity = 3,
}

/// Bath-energy ratio used in the stochastic entropy.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeKernel {
    Truncated = 0,
    Full = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WeComplex {
    pub re: f64,
    pub im: f64,
}

impl From<WeComplex> for Complex64 {
    fn from(c: WeComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for WeComplex {
    fn from(c: Complex64) -> Self {
        WeComplex { re: c.re, im: c.im }
    }
}

/// First and second moments: `mu = ⟨a⟩`, `s = ⟨a†a⟩ − |μ|² + ½`, `m = ⟨aa⟩ − μ²`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WeMoments {
    pub mu: WeComplex,
    pub s: f64,
    pub m: WeComplex,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeRateReport {
    pub pi: f64,
    pub phi: f64,
    pub dsdt: f64,
    pub phi_e: f64,
    pub entropy: f64,
    pub phi_vn: f64,
    pub phi_vn_kind: WeVnKind,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WeSteadyProduction {
    pub instantaneous: f64,
    pub time_averaged: f64,
}

/// Parameters of a thermal Langevin ensemble.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeLangevinSpec {
    pub omega: f64,
    pub gamma: f64,
    pub nbar: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WeFtResult {
    /// Jackknife estimate of `⟨e^{−Σ}⟩` and its standard error.
    pub exp_minus_sigma: f64,
    pub exp_minus_sigma_stderr: f64,
    pub sigma_mean: f64,
    pub sigma_stderr: f64,
}

pub struct WeState(GaussianState);
pub struct WeBath(BathSpec);
pub struct WeHamiltonian(HamiltonianSpec);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> WeStatus {
    match err {
        Error::Domain(_) => WeStatus::Domain,
        Error::Unsupported(_) => WeStatus::Unsupported,
        Error::Usage(_) => WeStatus::Usage,
        Error::GaussianityNotPreserved(_) => WeStatus::GaussianityNotPreserved,
        Error::Accuracy(_) => WeStatus::Accuracy,
        Error::Config(_) => WeStatus::Config,
        Error::Stability(_) => WeStatus::Stability,
        Error::SelfCheck(_) => WeStatus::SelfCheck,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> WeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WeStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            WeStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            WeStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn write_handle<T>(p: *mut *mut T, value: T) -> Result<(), Fail> {
    if p.is_null() {
        return Err(Fail::Null("out"));
    }
    p.write(Box::into_raw(Box::new(value)));
    Ok(())
}

/// Description of the most recent failure on this thread; empty if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn we_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn we_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---------------------------------------------------------------- states

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_state_new(mu: WeComplex, s: f64, m: WeComplex, out: *mut *mut WeState) -> WeStatus {
    guard(|| {
        let st = GaussianState::new(mu.into(), s, m.into())?;
        write_handle(out, WeState(st))
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_state_coherent(mu: WeComplex, out: *mut *mut WeState) -> WeStatus {
    guard(|| write_handle(out, WeState(GaussianState::coherent(mu.into())?)))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_state_thermal(nbar: f64, out: *mut *mut WeState) -> WeStatus {
    guard(|| write_handle(out, WeState(GaussianState::thermal(nbar)?)))
}

/// # Safety
/// `state` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn we_state_free(state: *mut WeState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_state_moments(state: *const WeState, out: *mut WeMoments) -> WeStatus {
    guard(|| {
        let st = &deref(state, "state")?.0;
        write(out, WeMoments { mu: st.mu().into(), s: st.s(), m: st.m().into() }, "out")
    })
}

/// Wigner entropy `½ ln det Θ + 1 + ln π`.
///
/// # Safety
/// `state` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_state_wigner_entropy(state: *const WeState, out: *mut f64) -> WeStatus {
    guard(|| write(out, deref(state, "state")?.0.wigner_entropy(), "out"))
}

/// # Safety
/// `state` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_state_wigner(state: *const WeState, alpha: WeComplex, out: *mut f64) -> WeStatus {
    guard(|| {
        let st = &deref(state, "state")?.0;
        write(out, st.wigner(PhasePoint::new(alpha.into())?), "out")
    })
}

// ---------------------------------------------------------------- reservoirs

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_bath_thermal(gamma: f64, nbar: f64, out: *mut *mut WeBath) -> WeStatus {
    guard(|| {
        let b = BathSpec::Thermal { gamma, nbar };
        b.validate()?;
        write_handle(out, WeBath(b))
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_bath_squeezed(
    gamma: f64,
    nbar: f64,
    r: f64,
    theta: f64,
    omega_s: f64,
    out: *mut *mut WeBath,
) -> WeStatus {
    guard(|| {
        let b = BathSpec::Squeezed { gamma, nbar, r, theta, omega_s };
        b.validate()?;
        write_handle(out, WeBath(b))
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_bath_dephasing(lambda: f64, out: *mut *mut WeBath) -> WeStatus {
    guard(|| {
        let b = BathSpec::Dephasing { lambda };
        b.validate()?;
        write_handle(out, WeBath(b))
    })
}

/// # Safety
/// `bath` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn we_bath_free(bath: *mut WeBath) {
    if !bath.is_null() {
        drop(Box::from_raw(bath));
    }
}

/// Cavity at `omega_c`; with `pumped` non-zero, driven by `e·e^{−iω_p t}`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_hamiltonian_new(
    omega_c: f64,
    pumped: bool,
    e: WeComplex,
    omega_p: f64,
    out: *mut *mut WeHamiltonian,
) -> WeStatus {
    guard(|| {
        let h = if pumped { HamiltonianSpec::pumped(omega_c, e.into(), omega_p) } else { HamiltonianSpec::free(omega_c) };
        h.validate()?;
        write_handle(out, WeHamiltonian(h))
    })
}

/// # Safety
/// `ham` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn we_hamiltonian_free(ham: *mut WeHamiltonian) {
    if !ham.is_null() {
        drop(Box::from_raw(ham));
    }
}

// ---------------------------------------------------------------- rates

fn vn_parts(v: Option<VnValue>) -> (f64, WeVnKind) {
    match v {
        None => (f64::NAN, WeVnKind::Undefined),
        Some(VnValue::Finite(x)) => (x, WeVnKind::Finite),
        Some(VnValue::Infinite { positive: true }) => (f64::INFINITY, WeVnKind::PlusInfinity),
        Some(VnValue::Infinite { positive: false }) => (f64::NEG_INFINITY, WeVnKind::MinusInfinity),
    }
}

/// Π, Φ, dS/dt, Φ_E, S and Φ_vN at time `t`, with the entropy balance checked.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_rate_report(
    state: *const WeState,
    bath: *const WeBath,
    ham: *const WeHamiltonian,
    t: f64,
    method: WeMethod,
    out: *mut WeRateReport,
) -> WeStatus {
    guard(|| {
        let (st, b, h) = (&deref(state, "state")?.0, &deref(bath, "bath")?.0, &deref(ham, "ham")?.0);
        let method = match method {
            WeMethod::ClosedForm => Method::ClosedForm,
            WeMethod::Quadrature => Method::Quadrature,
            WeMethod::QuadraticForm => Method::QuadraticForm,
        };
        let r = rates::rate_report_with(st, b, h, t, method, &QuadratureSpec::default())?;
        let (phi_vn, phi_vn_kind) = vn_parts(r.phi_vn);
        write(
            out,
            WeRateReport { pi: r.pi, phi: r.phi, dsdt: r.dsdt, phi_e: r.phi_e, entropy: r.entropy, phi_vn, phi_vn_kind },
            "out",
        )
    })
}

/// Asymptotic state of a linear reservoir.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_steady_state(
    bath: *const WeBath,
    ham: *const WeHamiltonian,
    t: f64,
    out: *mut *mut WeState,
) -> WeStatus {
    guard(|| {
        let st = model::steady_state(&deref(bath, "bath")?.0, &deref(ham, "ham")?.0, t)?;
        write_handle(out, WeState(st))
    })
}

/// Steady-state entropy production of a pumped cavity in a squeezed reservoir.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_steady_production(
    bath: *const WeBath,
    ham: *const WeHamiltonian,
    t: f64,
    out: *mut WeSteadyProduction,
) -> WeStatus {
    guard(|| {
        let v = rates::steady_state_pi_eq21(&deref(bath, "bath")?.0, &deref(ham, "ham")?.0, t)?;
        write(out, WeSteadyProduction { instantaneous: v.instantaneous, time_averaged: v.time_averaged }, "out")
    })
}

/// `|J_b|²/W²` of an unpumped cavity at its steady state in a squeezed reservoir.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_jb_field_squared(
    bath: *const WeBath,
    ham: *const WeHamiltonian,
    t: f64,
    alpha: WeComplex,
    out: *mut f64,
) -> WeStatus {
    guard(|| {
        let v = rates::jb_field_squared(&deref(bath, "bath")?.0, &deref(ham, "ham")?.0, t, PhasePoint::new(alpha.into())?)?;
        write(out, v, "out")
    })
}

/// Integrate the moment equations from `t0` to `t1` in `n_steps` RK4 steps.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_evolve(
    state: *const WeState,
    bath: *const WeBath,
    ham: *const WeHamiltonian,
    t0: f64,
    t1: f64,
    n_steps: usize,
    out: *mut *mut WeState,
) -> WeStatus {
    guard(|| {
        let (st, b, h) = (&deref(state, "state")?.0, &deref(bath, "bath")?.0, &deref(ham, "ham")?.0);
        let tr = model::evolve_steps(st, b, h, Frame::Lab, t0, t1, n_steps)?;
        write_handle(out, WeState(*tr.last()))
    })
}

/// Langevin ensemble from `initial` and the fluctuation-theorem estimate of
/// its stochastic entropy production.
///
/// # Safety
/// `spec` and `initial` must be valid and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn we_fluctuation_theorem(
    spec: *const WeLangevinSpec,
    initial: *const WeState,
    kernel: WeKernel,
    out: *mut WeFtResult,
) -> WeStatus {
    guard(|| {
        let s = deref(spec, "spec")?;
        let init = &deref(initial, "initial")?.0;
        let spec = LangevinSpec {
            omega: s.omega,
            gamma: s.gamma,
            nbar: s.nbar,
            dt: s.dt,
            n_steps: s.n_steps,
            n_paths: s.n_paths,
            seed: s.seed,
        };
        spec.validate()?;
        let bath = BathSpec::Thermal { gamma: s.gamma, nbar: s.nbar };
        let ham = HamiltonianSpec::free(s.omega);
        let background = model::evolve_steps(init, &bath, &ham, Frame::Lab, 0.0, spec.duration(), spec.n_steps)?;
        let kernel = match kernel {
            WeKernel::Truncated => KernelRatio::Truncated,
            WeKernel::Full => KernelRatio::Full,
        };
        let sigmas = trajectories::sigma_ensemble(&spec, init, &background, kernel)?;
        let ft = trajectories::fluctuation_theorem_estimator(&sigmas)?;
        write(
            out,
            WeFtResult {
                exp_minus_sigma: ft.mean,
                exp_minus_sigma_stderr: ft.stderr,
                sigma_mean: ft.sigma.mean,
                sigma_stderr: ft.sigma.stderr,
            },
            "out",
        )
    })
}
