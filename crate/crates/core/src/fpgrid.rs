//! Finite-volume Fokker–Planck solver for the Wigner function on a Cartesian grid.
//!
//! The equation `∂_t W = ∂_α G + ∂_{α*} G*` is written in real coordinates as
//! `∂_t W = ∂_x F_x + ∂_y F_y` with `F = (Re G, Im G)` and
//!
//! ```text
//! F_x = v_x W + D_xx ∂_x W + D_xy ∂_y W
//! F_y = v_y W + D_yx ∂_x W + D_yy ∂_y W
//! ```
//!
//! For thermal and squeezed reservoirs `v = (γ/2)(x, y) + ω(−y, x) − ℰ_t` and
//! `D = (γ/4)[[N+½+Re M, Im M], [Im M, N+½−Re M]]`; number dephasing adds
//! `(λ/2)[[y², −xy], [−xy, x²]]`.
//!
//! Values live at cell centres. Face fluxes use Scharfetter–Gummel exponential
//! fitting along the face normal, which makes the thermal Gaussian an exact
//! discrete fixed point, plus a centred cross-diffusion term. Boundaries are
//! Dirichlet zero; what flows out is booked in [`GridField::leaked`]. Time
//! stepping is classical RK4.
//!
//! The field is stored in a frame rotating at `frame_omega` (the cavity
//! frequency by default), so that the free rotation does not have to be
//! resolved by the stencil. Moments and rates are reported in the lab frame.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BathSpec, HamiltonianSpec};
use crate::phasespace::{GaussianState, PhasePoint};

/// `dt ≤ CFL · h² / D_max`.
pub const CFL: f64 = 0.2;
/// Cells below this fraction of the peak are left out of logarithmic terms.
pub const MASK_RELATIVE: f64 = 1e-12;
/// Largest tolerated masked fraction of the grid.
pub const MAX_MASK_FRACTION: f64 = 0.5;
/// Negative values below `−NEGATIVITY_TOL · max W` are a stability failure.
pub const NEGATIVITY_TOL: f64 = 1e-12;
/// Allowed deviation of the discrete mass from one.
pub const MASS_TOL: f64 = 1e-6;
/// Largest fraction of a cell that cross diffusion may remove in one step.
pub const POSITIVITY_SHARE: f64 = 0.2;
pub const AUTO_K_SIGMA: f64 = 8.0;

/// Wigner function sampled at the cell centres of a square.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    center: Complex64,
    half_width: f64,
    n: usize,
    /// Row-major, `values[j * n + i]` at `(x_i, y_j)`.
    values: Vec<f64>,
    t: f64,
    frame_omega: f64,
    leaked: f64,
}

/// Lab-frame moments of a grid field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMoments {
    pub mass: f64,
    pub mu: Complex64,
    pub number: f64,
    pub aa: Complex64,
}

impl GridMoments {
    /// Nearest Gaussian state, with moments normalised by the mass.
    pub fn to_state(&self) -> Result<GaussianState> {
        GaussianState::from_raw_moments(self.mu / self.mass, (self.number + 0.5) / self.mass - 0.5, self.aa / self.mass)
    }
}

impl GridField {
    pub fn new(
        center: Complex64,
        half_width: f64,
        n: usize,
        values: Vec<f64>,
        t: f64,
        frame_omega: f64,
    ) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) || n < 3 {
            return Err(Error::Config(format!("grid needs L > 0 and n ≥ 3 (got L = {half_width}, n = {n})")));
        }
        if values.len() != n * n {
            return Err(Error::Config(format!("expected {} values, got {}", n * n, values.len())));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain("grid values must be finite and non-negative".into()));
        }
        if !(center.re.is_finite() && center.im.is_finite() && t.is_finite() && frame_omega.is_finite()) {
            return Err(Error::Config("grid centre, time and frame must be finite".into()));
        }
        Ok(Self { center, half_width, n, values, t, frame_omega, leaked: 0.0 })
    }

    /// Sample a lab-frame Gaussian state at time `t` into a grid rotating at `frame_omega`.
    pub fn from_gaussian(
        state: &GaussianState,
        t: f64,
        frame_omega: f64,
        center: Complex64,
        half_width: f64,
        n: usize,
    ) -> Result<Self> {
        let mut field = Self::new(center, half_width, n, vec![0.0; n * n], t, frame_omega)?;
        let framed = GaussianState::new(
            state.mu() * Complex64::from_polar(1.0, frame_omega * t),
            state.s(),
            state.m() * Complex64::from_polar(1.0, 2.0 * frame_omega * t),
        )?;
        let geom = field.geometry();
        field.values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                *v = framed.wigner(PhasePoint::from_xy(geom.x(i), geom.y(j)).expect("finite cell centre"));
            }
        });
        Ok(field)
    }

    /// Domain centred on the frame-rotated mean, `AUTO_K_SIGMA` major-axis deviations wide.
    pub fn auto_domain(state: &GaussianState, t: f64, frame_omega: f64) -> (Complex64, f64) {
        (state.mu() * Complex64::from_polar(1.0, frame_omega * t), AUTO_K_SIGMA * state.sigma_max())
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn frame_omega(&self) -> f64 {
        self.frame_omega
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    /// Mass that has left through the boundary so far.
    pub fn leaked(&self) -> f64 {
        self.leaked
    }
    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    fn geometry(&self) -> Geometry {
        Geometry { n: self.n, h: self.h(), x0: self.center.re - self.half_width, y0: self.center.im - self.half_width }
    }

    pub fn mass(&self) -> f64 {
        let h = self.h();
        self.values.iter().sum::<f64>() * h * h
    }

    /// Mass held by the outermost ring of cells.
    pub fn boundary_mass(&self) -> f64 {
        let n = self.n;
        let h = self.h();
        let ring: f64 = (0..n * n)
            .filter(|&k| {
                let (i, j) = (k % n, k / n);
                i == 0 || j == 0 || i == n - 1 || j == n - 1
            })
            .map(|k| self.values[k])
            .sum();
        ring * h * h
    }

    fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn moments(&self) -> GridMoments {
        let g = self.geometry();
        let h2 = g.h * g.h;
        let (mass, a, a2, aa) = self
            .values
            .par_chunks(self.n)
            .enumerate()
            .map(|(j, row)| {
                let mut acc = (0.0, Complex64::new(0.0, 0.0), 0.0, Complex64::new(0.0, 0.0));
                for (i, &w) in row.iter().enumerate() {
                    let alpha = Complex64::new(g.x(i), g.y(j));
                    acc.0 += w;
                    acc.1 += alpha * w;
                    acc.2 += alpha.norm_sqr() * w;
                    acc.3 += alpha * alpha * w;
                }
                acc
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((0.0, Complex64::new(0.0, 0.0), 0.0, Complex64::new(0.0, 0.0)), |s, r| {
                (s.0 + r.0, s.1 + r.1, s.2 + r.2, s.3 + r.3)
            });
        let back = Complex64::from_polar(1.0, -self.frame_omega * self.t);
        GridMoments { mass: mass * h2, mu: a * h2 * back, number: a2 * h2 - 0.5, aa: aa * h2 * back * back }
    }

    /// Dense CSV: a `L,n,t,cx,cy` header and its values, then one line per row `y_j`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "L,n,t,cx,cy")?;
        writeln!(out, "{},{},{},{},{}", self.half_width, self.n, self.t, self.center.re, self.center.im)?;
        for row in self.values.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Geometry {
    n: usize,
    h: f64,
    x0: f64,
    y0: f64,
}

impl Geometry {
    #[inline]
    fn x(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.h
    }
    #[inline]
    fn y(&self, j: usize) -> f64 {
        self.y0 + (j as f64 + 0.5) * self.h
    }
    /// Position of face `i` (between cells `i − 1` and `i`).
    #[inline]
    fn xf(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }
    #[inline]
    fn yf(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.h
    }
    fn r_max(&self) -> f64 {
        let xs = [self.x0, self.x0 + self.n as f64 * self.h];
        let ys = [self.y0, self.y0 + self.n as f64 * self.h];
        xs.iter().flat_map(|x| ys.iter().map(move |y| x.hypot(*y))).fold(0.0, f64::max)
    }
}

/// Drift and diffusion coefficients in the grid frame at one instant.
#[derive(Debug, Clone, Copy)]
struct Coeffs {
    g2: f64,
    omega: f64,
    e: Complex64,
    dxx: f64,
    dxy: f64,
    dyy: f64,
    lam2: f64,
}

impl Coeffs {
    fn new(bath: &BathSpec, ham: &HamiltonianSpec, t: f64, frame_omega: f64) -> Self {
        let omega = ham.omega_c - frame_omega;
        let e = ham.drive(t) * Complex64::from_polar(1.0, frame_omega * t);
        match bath.linear() {
            Some(lb) => {
                let m = lb.m_t(t) * Complex64::from_polar(1.0, 2.0 * frame_omega * t);
                let q = 0.25 * lb.gamma;
                Coeffs {
                    g2: 0.5 * lb.gamma,
                    omega,
                    e,
                    dxx: q * (lb.n_half() + m.re),
                    dxy: q * m.im,
                    dyy: q * (lb.n_half() - m.re),
                    lam2: 0.0,
                }
            }
            None => {
                let BathSpec::Dephasing { lambda } = *bath else { unreachable!() };
                Coeffs { g2: 0.0, omega, e, dxx: 0.0, dxy: 0.0, dyy: 0.0, lam2: 0.5 * lambda }
            }
        }
    }

    fn d_max(&self, r_max: f64) -> f64 {
        let a = 0.5 * (self.dxx + self.dyy);
        let b = (0.25 * (self.dxx - self.dyy).powi(2) + self.dxy * self.dxy).sqrt();
        a + b + self.lam2 * r_max * r_max
    }

    fn v_max(&self, r_max: f64) -> f64 {
        (self.g2 + self.omega.abs()) * r_max + self.e.norm()
    }
}

/// `B(z) = z / (e^z − 1)`.
#[inline]
fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - 0.5 * z
    } else {
        z / z.exp_m1()
    }
}

/// Scharfetter–Gummel approximation of `v W + D ∂W` between `wl` and `wr`.
#[inline]
fn sg_flux(d: f64, v: f64, h: f64, wl: f64, wr: f64) -> f64 {
    if d <= 0.0 {
        return if v > 0.0 { v * wr } else { v * wl };
    }
    let p = v * h / d;
    d / h * (bernoulli(-p) * wr - bernoulli(p) * wl)
}

/// Semi-discrete right-hand side `dW/dt`; also returns the net outflow rate.
///
/// With `dt` given, the cross-diffusion outflow of any cell is scaled down so
/// that it removes at most `POSITIVITY_SHARE · W` over one step.
fn rhs(g: &Geometry, c: &Coeffs, w: &[f64], dt: Option<f64>) -> (Vec<f64>, f64) {
    let n = g.n;
    let h = g.h;
    let at = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
            0.0
        } else {
            w[j as usize * n + i as usize]
        }
    };
    // fx[j * (n+1) + i]: face between cells (i−1, j) and (i, j), as (diagonal part, cross part).
    // The h²/4 in the tangential diffusion keeps the discrete Σ r² W exactly
    // stationary against the centred cross term.
    let fx: Vec<(f64, f64)> = (0..n * (n + 1))
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % (n + 1), k / (n + 1));
            let (x, y) = (g.xf(i), g.y(j));
            let (ii, jj) = (i as isize, j as isize);
            let d = c.dxx + c.lam2 * (y * y + 0.25 * h * h);
            let v = c.g2 * x - c.omega * y - c.e.re;
            let wy = (at(ii - 1, jj + 1) - at(ii - 1, jj - 1) + at(ii, jj + 1) - at(ii, jj - 1)) / (4.0 * h);
            (sg_flux(d, v, h, at(ii - 1, jj), at(ii, jj)), (c.dxy - c.lam2 * x * y) * wy)
        })
        .collect();
    // fy[j * n + i]: face between cells (i, j−1) and (i, j)
    let fy: Vec<(f64, f64)> = (0..(n + 1) * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % n, k / n);
            let (x, y) = (g.x(i), g.yf(j));
            let (ii, jj) = (i as isize, j as isize);
            let d = c.dyy + c.lam2 * (x * x + 0.25 * h * h);
            let v = c.g2 * y + c.omega * x - c.e.im;
            let wx = (at(ii + 1, jj - 1) - at(ii - 1, jj - 1) + at(ii + 1, jj) - at(ii - 1, jj)) / (4.0 * h);
            (sg_flux(d, v, h, at(ii, jj - 1), at(ii, jj)), (c.dxy - c.lam2 * x * y) * wx)
        })
        .collect();

    // A positive face value drains the cell on the high side.
    let scale: Option<Vec<f64>> = dt.map(|dt| {
        (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % n, k / n);
                let out = fx[j * (n + 1) + i].1.max(0.0)
                    + (-fx[j * (n + 1) + i + 1].1).max(0.0)
                    + fy[j * n + i].1.max(0.0)
                    + (-fy[(j + 1) * n + i].1).max(0.0);
                let budget = POSITIVITY_SHARE * w[k] * h / dt;
                if out > budget { budget / out } else { 1.0 }
            })
            .collect()
    });
    let theta = |i: isize, j: isize| -> f64 {
        match &scale {
            None => 1.0,
            Some(s) if i >= 0 && j >= 0 && i < n as isize && j < n as isize => s[j as usize * n + i as usize],
            Some(_) => 0.0,
        }
    };
    let face_x = |i: usize, j: usize| -> f64 {
        let (d, x) = fx[j * (n + 1) + i];
        let donor = if x > 0.0 { theta(i as isize, j as isize) } else { theta(i as isize - 1, j as isize) };
        d + donor * x
    };
    let face_y = |i: usize, j: usize| -> f64 {
        let (d, x) = fy[j * n + i];
        let donor = if x > 0.0 { theta(i as isize, j as isize) } else { theta(i as isize, j as isize - 1) };
        d + donor * x
    };

    let dw: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % n, k / n);
            (face_x(i + 1, j) - face_x(i, j) + face_y(i, j + 1) - face_y(i, j)) / h
        })
        .collect();
    // ∂_t mass = Σ boundary fluxes · h; outflow is its negative
    let mut inflow = 0.0;
    for j in 0..n {
        inflow += face_x(n, j) - face_x(0, j);
    }
    for i in 0..n {
        inflow += face_y(i, n) - face_y(i, 0);
    }
    (dw, -inflow * h)
}

/// Largest stable step: `min(CFL h²/D_max, h/v_max)`.
pub fn max_stable_dt(field: &GridField, bath: &BathSpec, ham: &HamiltonianSpec) -> f64 {
    let g = field.geometry();
    let c = Coeffs::new(bath, ham, field.t, field.frame_omega);
    let r = g.r_max();
    let diff = c.d_max(r);
    let adv = c.v_max(r);
    let by_diff = if diff > 0.0 { CFL * g.h * g.h / diff } else { f64::INFINITY };
    let by_adv = if adv > 0.0 { g.h / adv } else { f64::INFINITY };
    by_diff.min(by_adv)
}

/// One RK4 step.
pub fn step(field: &GridField, bath: &BathSpec, ham: &HamiltonianSpec, dt: f64) -> Result<GridField> {
    bath.validate()?;
    ham.validate()?;
    if !(dt > 0.0) {
        return Err(Error::Config(format!("grid step dt = {dt} must be positive")));
    }
    let limit = max_stable_dt(field, bath, ham);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Config(format!("dt = {dt} exceeds the stability bound {limit:.3e}")));
    }
    let g = field.geometry();
    let t = field.t;
    let fw = field.frame_omega;
    let c1 = Coeffs::new(bath, ham, t, fw);
    let c2 = Coeffs::new(bath, ham, t + 0.5 * dt, fw);
    let c4 = Coeffs::new(bath, ham, t + dt, fw);
    let axpy = |base: &[f64], k: &[f64], a: f64| -> Vec<f64> { base.par_iter().zip(k).map(|(b, k)| b + a * k).collect() };

    let w0 = &field.values;
    let (k1, o1) = rhs(&g, &c1, w0, Some(dt));
    let (k2, o2) = rhs(&g, &c2, &axpy(w0, &k1, 0.5 * dt), Some(dt));
    let (k3, o3) = rhs(&g, &c2, &axpy(w0, &k2, 0.5 * dt), Some(dt));
    let (k4, o4) = rhs(&g, &c4, &axpy(w0, &k3, dt), Some(dt));
    let mut values: Vec<f64> = (0..w0.len())
        .into_par_iter()
        .map(|k| w0[k] + dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]))
        .collect();

    let peak = values.iter().cloned().fold(0.0, f64::max);
    let low = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !peak.is_finite() || low < -NEGATIVITY_TOL * peak {
        return Err(Error::Stability(format!(
            "grid field went negative ({low:e} against a peak of {peak:e}) at t = {}",
            t + dt
        )));
    }
    values.iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(GridField {
        values,
        t: t + dt,
        leaked: field.leaked + dt / 6.0 * (o1 + 2.0 * o2 + 2.0 * o3 + o4),
        ..field.clone()
    })
}

/// Step to `t1` with uniform steps no longer than `dt_max` (or the stability bound, if smaller).
pub fn evolve_to(
    field: &GridField,
    bath: &BathSpec,
    ham: &HamiltonianSpec,
    t1: f64,
    dt_max: Option<f64>,
) -> Result<GridField> {
    let span = t1 - field.t;
    if span < 0.0 {
        return Err(Error::Config(format!("cannot step backwards from t = {} to {t1}", field.t)));
    }
    if span == 0.0 {
        return Ok(field.clone());
    }
    let bound = 0.99 * max_stable_dt(field, bath, ham);
    let dt_cap = dt_max.map_or(bound, |d| d.min(bound));
    let steps = (span / dt_cap).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let mut cur = field.clone();
    for _ in 0..steps {
        cur = step(&cur, bath, ham, dt)?;
    }
    Ok(cur)
}

/// Rates read off a grid field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRates {
    pub pi: f64,
    pub phi: f64,
    pub dsdt: f64,
    pub mask_fraction: f64,
}

/// `Π` from the discrete current, `Φ` from the discrete second moment and
/// `dS/dt = −Σ Ẇ (ln W + 1) h²` from the semi-discrete right-hand side.
/// Logarithmic gradients are centred differences of `ln W`; cells below
/// `MASK_RELATIVE · max W`, or next to such a cell, are masked.
pub fn grid_rates(field: &GridField, bath: &BathSpec, ham: &HamiltonianSpec) -> Result<GridRates> {
    bath.validate()?;
    ham.validate()?;
    let mass = field.mass();
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::Accuracy(format!("grid mass {mass} is off by more than {MASS_TOL}")));
    }
    let n = field.n;
    let g = field.geometry();
    let h2 = g.h * g.h;
    let cut = MASK_RELATIVE * field.max_value();
    let w = &field.values;
    let ok = |i: usize, j: usize| w[j * n + i] >= cut && w[j * n + i] > 0.0;
    let usable = |i: usize, j: usize| {
        i > 0 && j > 0 && i + 1 < n && j + 1 < n && ok(i, j) && ok(i - 1, j) && ok(i + 1, j) && ok(i, j - 1) && ok(i, j + 1)
    };
    let masked = (0..n * n).filter(|&k| !usable(k % n, k / n)).count();
    let mask_fraction = masked as f64 / (n * n) as f64;
    if mask_fraction > MAX_MASK_FRACTION {
        return Err(Error::Accuracy(format!(
            "{:.1}% of the grid is below the logarithm mask; shrink the domain",
            100.0 * mask_fraction
        )));
    }
    let log_grad = |i: usize, j: usize| {
        let lw = |i: usize, j: usize| w[j * n + i].ln();
        ((lw(i + 1, j) - lw(i - 1, j)) / (2.0 * g.h), (lw(i, j + 1) - lw(i, j - 1)) / (2.0 * g.h))
    };
    let t = field.t;
    let fw = field.frame_omega;
    let c = Coeffs::new(bath, ham, t, fw);

    let (pi_sum, beta_sum) = match bath.linear() {
        Some(lb) => {
            let m = lb.m_t(t) * Complex64::from_polar(1.0, 2.0 * fw * t);
            let rot = Complex64::from_polar(1.0, lb.phase(t) + 2.0 * fw * t);
            let (ch, sh) = (lb.r.cosh(), lb.r.sinh());
            let a = lb.n_half();
            let rows: Vec<(f64, f64)> = (0..n)
                .into_par_iter()
                .map(|j| {
                    let mut acc = (0.0, 0.0);
                    for i in 0..n {
                        let alpha = Complex64::new(g.x(i), g.y(j));
                        let wv = w[j * n + i];
                        let beta = ch * alpha + rot * sh * alpha.conj();
                        acc.1 += beta.norm_sqr() * wv;
                        if usable(i, j) {
                            let (lx, ly) = log_grad(i, j);
                            let d_conj = 0.5 * Complex64::new(lx, ly);
                            let u = 0.5 * lb.gamma * (alpha + a * d_conj + m * d_conj.conj());
                            let jb = ch * u + rot * sh * u.conj();
                            acc.0 += jb.norm_sqr() * wv;
                        }
                    }
                    acc
                })
                .collect();
            let (p, b) = rows.iter().fold((0.0, 0.0), |s, r| (s.0 + r.0, s.1 + r.1));
            (4.0 / (lb.gamma * lb.sigma()) * p * h2, Some((lb, b * h2)))
        }
        None => {
            let p: f64 = (0..n)
                .into_par_iter()
                .map(|j| {
                    (0..n)
                        .filter(|&i| usable(i, j))
                        .map(|i| {
                            let (lx, ly) = log_grad(i, j);
                            let r = g.x(i) * ly - g.y(j) * lx;
                            r * r * w[j * n + i]
                        })
                        .sum::<f64>()
                })
                .collect::<Vec<_>>()
                .iter()
                .sum();
            (c.lam2 * p * h2, None)
        }
    };
    let phi = match beta_sum {
        Some((lb, b)) => lb.gamma / lb.sigma() * (b - lb.sigma()),
        None => 0.0,
    };
    let (dw, _) = rhs(&g, &c, w, None);
    let dsdt = -(0..n * n)
        .filter(|&k| usable(k % n, k / n))
        .map(|k| dw[k] * (w[k].ln() + 1.0))
        .sum::<f64>()
        * h2;
    Ok(GridRates { pi: pi_sum, phi, dsdt, mask_fraction })
}
