//! Reference computations in real phase-space coordinates `(x, y) = (Re α, Im α)`.
//!
//! Built from the Ornstein–Uhlenbeck form of the dynamics, `dX = (A X + f) dt + noise`
//! with diffusion matrix `D`, without going through the library's formulas.

#![allow(dead_code)]

use wigner_entropy::{BathSpec, Complex64, GaussianState};

pub type M2 = [[f64; 2]; 2];

pub fn det(a: &M2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn inv(a: &M2) -> M2 {
    let d = det(a);
    [[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]
}

pub fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn transpose(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub fn add(a: &M2, b: &M2) -> M2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

pub fn scale(a: &M2, k: f64) -> M2 {
    [[k * a[0][0], k * a[0][1]], [k * a[1][0], k * a[1][1]]]
}

pub fn trace(a: &M2) -> f64 {
    a[0][0] + a[1][1]
}

pub fn quad(v: [f64; 2], a: &M2) -> f64 {
    v[0] * (a[0][0] * v[0] + a[0][1] * v[1]) + v[1] * (a[1][0] * v[0] + a[1][1] * v[1])
}

/// Mean vector and covariance from `⟨a⟩`, `⟨a†a⟩` and `⟨aa⟩`.
pub fn real_moments(st: &GaussianState) -> ([f64; 2], M2) {
    let mu = st.mu();
    let n = st.number();
    let aa = st.aa();
    // ⟨x²⟩ = ¼⟨(a + a†)²⟩_sym etc., centred
    let exx = 0.5 * (n + 0.5 + aa.re) - mu.re * mu.re;
    let eyy = 0.5 * (n + 0.5 - aa.re) - mu.im * mu.im;
    let exy = 0.5 * aa.im - mu.re * mu.im;
    ([mu.re, mu.im], [[exx, exy], [exy, eyy]])
}

/// Linear reservoir in real coordinates: damping rate and diffusion matrix.
pub struct RealBath {
    pub gamma: f64,
    pub diffusion: M2,
}

pub fn real_bath(bath: &BathSpec, t: f64) -> Option<RealBath> {
    let (gamma, nbar, r, theta, omega_s) = match *bath {
        BathSpec::Thermal { gamma, nbar } => (gamma, nbar, 0.0, 0.0, 0.0),
        BathSpec::Squeezed { gamma, nbar, r, theta, omega_s } => (gamma, nbar, r, theta, omega_s),
        BathSpec::Dephasing { .. } => return None,
    };
    let sig = nbar + 0.5;
    let big_n = sig * (2.0 * r).cosh();
    let m = -sig * (2.0 * r).sinh() * Complex64::from_polar(1.0, theta - 2.0 * omega_s * t);
    // noise: E|dξ|² = γ(N+½)dt, E dξ² = γ M dt; D is half the real noise covariance rate
    let q = 0.25 * gamma;
    Some(RealBath { gamma, diffusion: [[q * (big_n + m.re), q * m.im], [q * m.im, q * (big_n - m.re)]] })
}

/// Free rotation plus damping.
pub fn drift_matrix(omega: f64, gamma: f64) -> M2 {
    [[-0.5 * gamma, omega], [-omega, -0.5 * gamma]]
}

/// `dS/dt = ½ tr(V⁻¹ dV/dt)`.
pub fn dsdt(st: &GaussianState, bath: &BathSpec, omega: f64, t: f64) -> f64 {
    let (_, v) = real_moments(st);
    let vdot = match real_bath(bath, t) {
        Some(rb) => {
            let a = drift_matrix(omega, rb.gamma);
            add(&add(&mul(&a, &v), &mul(&v, &transpose(&a))), &scale(&rb.diffusion, 2.0))
        }
        None => {
            let BathSpec::Dephasing { lambda } = *bath else { unreachable!() };
            // d⟨a⟩ = −(λ/2)⟨a⟩, d⟨a†a⟩ = 0, d⟨aa⟩ = −2λ⟨aa⟩ (rotation drops out of det V)
            let mu = st.mu();
            let d_mu = -0.5 * lambda * mu;
            let d_aa = -2.0 * lambda * st.aa();
            let dxx = 0.5 * d_aa.re - 2.0 * mu.re * d_mu.re;
            let dyy = -0.5 * d_aa.re - 2.0 * mu.im * d_mu.im;
            let dxy = 0.5 * d_aa.im - mu.re * d_mu.im - mu.im * d_mu.re;
            [[dxx, dxy], [dxy, dyy]]
        }
    };
    0.5 * trace(&mul(&inv(&v), &vdot))
}

/// `Π = ∫ Jᵀ D⁻¹ J / W` with the irreversible current `J = −(γ/2) X W − D ∇W`.
pub fn pi(st: &GaussianState, bath: &BathSpec, t: f64) -> f64 {
    let rb = real_bath(bath, t).expect("linear reservoir");
    let (mean, v) = real_moments(st);
    let dinv = inv(&rb.diffusion);
    // J/W = B X + b with B = −γ/2 + D V⁻¹ and E[J/W] = −(γ/2) x̄
    let b = add(&scale(&[[1.0, 0.0], [0.0, 1.0]], -0.5 * rb.gamma), &mul(&rb.diffusion, &inv(&v)));
    trace(&mul(&mul(&mul(&transpose(&b), &dinv), &b), &v)) + 0.25 * rb.gamma * rb.gamma * quad(mean, &dinv)
}

/// `Φ = Π − dS/dt`.
pub fn phi(st: &GaussianState, bath: &BathSpec, omega: f64, t: f64) -> f64 {
    pi(st, bath, t) - dsdt(st, bath, omega, t)
}

/// `J^T D^{-1} J / W²` at a point.
pub fn local_production(st: &GaussianState, bath: &BathSpec, t: f64, x: f64, y: f64) -> f64 {
    let rb = real_bath(bath, t).expect("linear reservoir");
    let (mean, v) = real_moments(st);
    let vi = inv(&v);
    let d = [x - mean[0], y - mean[1]];
    // −∇ ln W = V⁻¹ (X − x̄)
    let g = [vi[0][0] * d[0] + vi[0][1] * d[1], vi[1][0] * d[0] + vi[1][1] * d[1]];
    let dm = rb.diffusion;
    let j = [
        -0.5 * rb.gamma * x + dm[0][0] * g[0] + dm[0][1] * g[1],
        -0.5 * rb.gamma * y + dm[1][0] * g[0] + dm[1][1] * g[1],
    ];
    quad(j, &inv(&dm))
}

/// Relaxation of a coherent start `μ₀` in a thermal reservoir, solved exactly.
pub fn relaxing_coherent(mu0: Complex64, omega: f64, gamma: f64, nbar: f64, t: f64) -> GaussianState {
    let decay = (-gamma * t).exp();
    let mu = mu0 * Complex64::from_polar((-0.5 * gamma * t).exp(), -omega * t);
    let s = (nbar + 0.5) + (0.5 - (nbar + 0.5)) * decay;
    GaussianState::new(mu, s, Complex64::new(0.0, 0.0)).unwrap()
}
