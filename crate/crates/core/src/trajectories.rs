//! Langevin paths, stochastic entropy production and the integral fluctuation theorem.
//!
//! Thermal paths follow `dA = −(iω + γ/2) A dt + √(γ(n̄+½)) dξ` with complex
//! white noise, `⟨dξ dξ*⟩ = dt`, `⟨dξ²⟩ = 0`. The backward path of
//! `A(t_0..t_N)` is the conjugated, time-reversed `A*(t_N..t_0)`, started from
//! `ρ_B(β) = W(β*, τ)`. With this convention the free rotation is reversible
//! and the stochastic entropy is
//!
//! ```text
//! Σ = Σ_k { ln W(A_k, t_k) − ln W(A_{k+1}, t_{k+1}) + (|A_k|² − |A_{k+1}|²)/(n̄+½) }
//! ```
//!
//! Every path is driven by its own ChaCha8 stream (`seed`, stream = path
//! index), so ensembles are reproducible and independent of thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Trajectory;
use crate::phasespace::{GaussianState, PhasePoint};

/// Largest allowed `γ dt` (or `λ dt`).
pub const MAX_RATE_DT: f64 = 0.01;

/// Thermal Langevin process and its discretisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangevinSpec {
    pub omega: f64,
    pub gamma: f64,
    pub nbar: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
}

impl LangevinSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega, self.gamma, self.nbar, self.dt].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("Langevin parameters must be finite".into()));
        }
        if self.gamma < 0.0 || self.nbar < 0.0 || !(self.dt > 0.0) {
            return Err(Error::Config(format!(
                "need γ ≥ 0, n̄ ≥ 0, dt > 0 (got γ = {}, n̄ = {}, dt = {})",
                self.gamma, self.nbar, self.dt
            )));
        }
        if self.gamma * self.dt > MAX_RATE_DT {
            return Err(Error::Config(format!(
                "γ·dt = {} exceeds {MAX_RATE_DT}",
                self.gamma * self.dt
            )));
        }
        if self.n_paths == 0 || self.n_steps == 0 {
            return Err(Error::Config("need at least one path and one step".into()));
        }
        Ok(())
    }

    /// `n̄ + ½`.
    pub fn sigma(&self) -> f64 {
        self.nbar + 0.5
    }

    pub fn duration(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| k as f64 * self.dt).collect()
    }

    /// `c = iω + γ/2`.
    fn drift(&self) -> Complex64 {
        Complex64::new(0.5 * self.gamma, self.omega)
    }
}

/// Which discretisation of the number-dephasing Langevin equation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DephasingScheme {
    /// `dA = (−iω − λ) A dt + i√(2λ) A* dW`. Preserves `⟨|A|²⟩`; the mean
    /// decays at rate λ.
    #[default]
    Literal,
    /// `dA = (−iω − λ/2) A dt + i√λ A dW`, a random phase walk whose mean
    /// decays at λ/2 like `⟨a⟩` under the dephasing master equation.
    PhaseDiffusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingSpec {
    pub lambda: f64,
    pub omega: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub scheme: DephasingScheme,
}

impl DephasingSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.omega.is_finite() && self.dt.is_finite()) {
            return Err(Error::Config("dephasing parameters must be finite".into()));
        }
        if self.lambda < 0.0 || !(self.dt > 0.0) {
            return Err(Error::Config("need λ ≥ 0 and dt > 0".into()));
        }
        if self.lambda * self.dt > MAX_RATE_DT {
            return Err(Error::Config(format!("λ·dt = {} exceeds {MAX_RATE_DT}", self.lambda * self.dt)));
        }
        if self.n_paths == 0 || self.n_steps == 0 {
            return Err(Error::Config("need at least one path and one step".into()));
        }
        Ok(())
    }
}

/// One sampled path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    /// `A(t_0), …, A(t_N)`.
    pub samples: Vec<Complex64>,
    /// Stochastic entropy, once accumulated.
    pub sigma: Option<f64>,
}

impl PathRecord {
    /// `e^{−Σ}`.
    pub fn weight(&self) -> Option<f64> {
        self.sigma.map(|s| (-s).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleSource {
    Thermal(LangevinSpec),
    Dephasing(DephasingSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub source: EnsembleSource,
    pub times: Vec<f64>,
    pub paths: Vec<PathRecord>,
}

/// Sample mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self { mean, stderr: (var / n).sqrt() }
    }

    /// `|mean − target| ≤ k·stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

/// Ensemble moments at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleMoments {
    pub mean_re: Estimate,
    pub mean_im: Estimate,
    pub abs_sqr: Estimate,
}

impl TrajectoryEnsemble {
    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn moments_at(&self, k: usize) -> EnsembleMoments {
        let a: Vec<Complex64> = self.paths.iter().map(|p| p.samples[k]).collect();
        let col = |f: fn(&Complex64) -> f64| Estimate::from_samples(&a.iter().map(f).collect::<Vec<_>>());
        EnsembleMoments { mean_re: col(|z| z.re), mean_im: col(|z| z.im), abs_sqr: col(|z| z.norm_sqr()) }
    }

    /// Fill in `Σ` for every path from the analytic background evolution.
    pub fn accumulate(&mut self, background: &Trajectory, kernel: KernelRatio) -> Result<()> {
        let spec = match self.source {
            EnsembleSource::Thermal(spec) => spec,
            EnsembleSource::Dephasing(_) => {
                return Err(Error::Unsupported(
                    "stochastic entropy is only defined for thermal Langevin paths".into(),
                ))
            }
        };
        check_background(&spec, background)?;
        let sigmas: Vec<f64> = self
            .paths
            .par_iter()
            .map(|p| sigma_terms(&p.samples, background, &spec, kernel).map(|t| t.total()))
            .collect::<Result<_>>()?;
        for (p, s) in self.paths.iter_mut().zip(sigmas) {
            p.sigma = Some(s);
        }
        Ok(())
    }

    pub fn sigmas(&self) -> Option<Vec<f64>> {
        self.paths.iter().map(|p| p.sigma).collect()
    }
}

/// Exact samples of a Gaussian state via the Cholesky factor of its real covariance.
#[derive(Debug, Clone, Copy)]
struct GaussianSampler {
    mu: Complex64,
    l11: f64,
    l21: f64,
    l22: f64,
}

impl GaussianSampler {
    fn new(state: &GaussianState) -> Self {
        let c = state.real_covariance();
        let l11 = c[0][0].sqrt();
        let l21 = c[0][1] / l11;
        let l22 = (c[1][1] - l21 * l21).max(0.0).sqrt();
        Self { mu: state.mu(), l11, l21, l22 }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Complex64 {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        self.mu + Complex64::new(self.l11 * z1, self.l21 * z1 + self.l22 * z2)
    }
}

fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn thermal_path(spec: &LangevinSpec, init: &GaussianSampler, index: usize) -> Vec<Complex64> {
    let mut rng = path_rng(spec.seed, index);
    let drift = -spec.drift() * spec.dt;
    let noise = (spec.gamma * spec.sigma() * spec.dt / 2.0).sqrt();
    let mut a = init.draw(&mut rng);
    let mut out = Vec::with_capacity(spec.n_steps + 1);
    out.push(a);
    for _ in 0..spec.n_steps {
        let n1: f64 = rng.sample(StandardNormal);
        let n2: f64 = rng.sample(StandardNormal);
        a += a * drift + noise * Complex64::new(n1, n2);
        out.push(a);
    }
    out
}

/// Euler–Maruyama thermal Langevin paths starting from samples of `initial`.
pub fn sample_paths(spec: &LangevinSpec, initial: &GaussianState) -> Result<TrajectoryEnsemble> {
    spec.validate()?;
    let init = GaussianSampler::new(initial);
    let paths = (0..spec.n_paths)
        .into_par_iter()
        .map(|i| PathRecord { samples: thermal_path(spec, &init, i), sigma: None })
        .collect();
    Ok(TrajectoryEnsemble { source: EnsembleSource::Thermal(*spec), times: spec.times(), paths })
}

/// `Σ` for every path without storing the samples. Path `i` is identical to
/// path `i` of [`sample_paths`] with the same spec.
pub fn sigma_ensemble(
    spec: &LangevinSpec,
    initial: &GaussianState,
    background: &Trajectory,
    kernel: KernelRatio,
) -> Result<Vec<f64>> {
    spec.validate()?;
    check_background(spec, background)?;
    let init = GaussianSampler::new(initial);
    (0..spec.n_paths)
        .into_par_iter()
        .map(|i| sigma_terms(&thermal_path(spec, &init, i), background, spec, kernel).map(|t| t.total()))
        .collect()
}

/// Short-time transition density
/// `K_dt(α′|α) = e^{γdt}/(πγσdt) exp{−|α′(1 + c dt) − α|²/(γσdt)}`, `c = iω + γ/2`.
pub fn propagator_density(spec: &LangevinSpec, alpha_to: Complex64, alpha_from: Complex64) -> Result<f64> {
    let diff = spec.gamma * spec.sigma() * spec.dt;
    if !(diff > 0.0) {
        return Err(Error::Unsupported("noiseless propagator is a delta function".into()));
    }
    let resid = alpha_to * (1.0 + spec.drift() * spec.dt) - alpha_from;
    Ok((spec.gamma * spec.dt).exp() / (std::f64::consts::PI * diff) * (-resid.norm_sqr() / diff).exp())
}

/// Form of the forward/backward kernel log-ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelRatio {
    /// `(|A_k|² − |A_{k+1}|²)/(n̄+½)`.
    #[default]
    Truncated,
    /// The exact ratio of short-time propagators, which carries an extra
    /// factor `1 + |iω + γ/2|² dt/γ`.
    Full,
}

/// Boundary (`ln W`) and kernel parts of `Σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaTerms {
    pub boundary: f64,
    pub kernel: f64,
}

impl SigmaTerms {
    pub fn total(&self) -> f64 {
        self.boundary + self.kernel
    }
}

fn check_background(spec: &LangevinSpec, background: &Trajectory) -> Result<()> {
    let n = background.states.len();
    if n != spec.n_steps + 1 || (background.dt() - spec.dt).abs() > 1e-9 * spec.dt {
        return Err(Error::Usage(format!(
            "background has {n} states at dt = {}, paths have {} at dt = {}",
            background.dt(),
            spec.n_steps + 1,
            spec.dt
        )));
    }
    Ok(())
}

pub fn sigma_terms(
    path: &[Complex64],
    background: &Trajectory,
    spec: &LangevinSpec,
    kernel: KernelRatio,
) -> Result<SigmaTerms> {
    if path.len() != background.states.len() {
        return Err(Error::Usage(format!(
            "path has {} samples, background {}",
            path.len(),
            background.states.len()
        )));
    }
    let factor = match kernel {
        KernelRatio::Truncated => 1.0,
        KernelRatio::Full if spec.gamma > 0.0 => 1.0 + spec.drift().norm_sqr() * spec.dt / spec.gamma,
        KernelRatio::Full => {
            return Err(Error::Unsupported("full kernel ratio needs γ > 0".into()));
        }
    } / spec.sigma();
    let log_w = |k: usize| -> Result<f64> { Ok(background.states[k].log_wigner(PhasePoint::new(path[k])?)) };
    let mut terms = SigmaTerms { boundary: 0.0, kernel: 0.0 };
    let mut prev = log_w(0)?;
    for k in 0..path.len() - 1 {
        let next = log_w(k + 1)?;
        terms.boundary += prev - next;
        terms.kernel += (path[k].norm_sqr() - path[k + 1].norm_sqr()) * factor;
        prev = next;
    }
    Ok(terms)
}

pub fn accumulate_sigma(
    path: &PathRecord,
    background: &Trajectory,
    spec: &LangevinSpec,
    kernel: KernelRatio,
) -> Result<f64> {
    sigma_terms(&path.samples, background, spec, kernel).map(|t| t.total())
}

/// `A*(t_N), …, A*(t_0)`.
pub fn reversed(path: &[Complex64]) -> Vec<Complex64> {
    path.iter().rev().map(|a| a.conj()).collect()
}

/// Fluctuation-theorem summary of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FtEstimate {
    /// Jackknife estimate of `⟨e^{−Σ}⟩`.
    pub mean: f64,
    pub stderr: f64,
    pub sigma: Estimate,
    /// `⟨Σ⟩ ≥ −3·stderr(Σ)`.
    pub jensen_ok: bool,
}

impl FtEstimate {
    /// `|⟨e^{−Σ}⟩ − 1| ≤ k·stderr`.
    pub fn holds(&self, k: f64) -> bool {
        (self.mean - 1.0).abs() <= k * self.stderr
    }
}

/// Jackknife mean and standard error of `e^{−Σ}`.
pub fn fluctuation_theorem_estimator(sigmas: &[f64]) -> Result<FtEstimate> {
    if sigmas.is_empty() {
        return Err(Error::Usage("empty ensemble".into()));
    }
    let n = sigmas.len();
    let w: Vec<f64> = sigmas.iter().map(|s| (-s).exp()).collect();
    let total: f64 = w.iter().sum();
    let (mean, stderr) = if n == 1 {
        (total, 0.0)
    } else {
        let nf = n as f64;
        let loo: Vec<f64> = w.iter().map(|x| (total - x) / (nf - 1.0)).collect();
        let loo_mean = loo.iter().sum::<f64>() / nf;
        let var = (nf - 1.0) / nf * loo.iter().map(|x| (x - loo_mean).powi(2)).sum::<f64>();
        (nf * (total / nf) - (nf - 1.0) * loo_mean, var.sqrt())
    };
    let sigma = Estimate::from_samples(sigmas);
    Ok(FtEstimate { mean, stderr, sigma, jensen_ok: sigma.mean >= -3.0 * sigma.stderr })
}

/// [`fluctuation_theorem_estimator`] over an ensemble whose `Σ` is accumulated.
pub fn ensemble_ft(ensemble: &TrajectoryEnsemble) -> Result<FtEstimate> {
    let sigmas = ensemble
        .sigmas()
        .ok_or_else(|| Error::Usage("Σ has not been accumulated for this ensemble".into()))?;
    fluctuation_theorem_estimator(&sigmas)
}

/// Trapezoid time average of `f` over the background states.
pub fn time_average<F: Fn(&GaussianState, f64) -> Result<f64>>(background: &Trajectory, f: F) -> Result<f64> {
    let n = background.states.len();
    if n < 2 {
        return Err(Error::Usage("time average needs at least two states".into()));
    }
    let vals: Vec<f64> = background
        .states
        .iter()
        .zip(&background.times)
        .map(|(s, &t)| f(s, t))
        .collect::<Result<_>>()?;
    let inner: f64 = vals[1..n - 1].iter().sum();
    Ok((inner + 0.5 * (vals[0] + vals[n - 1])) / (n - 1) as f64)
}

fn dephasing_path(spec: &DephasingSpec, init: &GaussianSampler, index: usize) -> Vec<Complex64> {
    let mut rng = path_rng(spec.seed, index);
    let rot = Complex64::from_polar(1.0, -spec.omega * spec.dt);
    let sdt = spec.dt.sqrt();
    let i = Complex64::i();
    let mut a = init.draw(&mut rng);
    let mut out = Vec::with_capacity(spec.n_steps + 1);
    out.push(a);
    for _ in 0..spec.n_steps {
        let dw: f64 = rng.sample::<f64, _>(StandardNormal) * sdt;
        // rotation is applied exactly so that λ = 0 conserves |A|
        let incr = match spec.scheme {
            DephasingScheme::Literal => -spec.lambda * a * spec.dt + i * (2.0 * spec.lambda).sqrt() * a.conj() * dw,
            DephasingScheme::PhaseDiffusion => -0.5 * spec.lambda * a * spec.dt + i * spec.lambda.sqrt() * a * dw,
        };
        a = rot * (a + incr);
        out.push(a);
    }
    out
}

/// Itô paths of the number-dephasing Langevin equation. `Σ` is not available for these.
pub fn dephasing_paths(spec: &DephasingSpec, initial: &GaussianState) -> Result<TrajectoryEnsemble> {
    spec.validate()?;
    let init = GaussianSampler::new(initial);
    let paths = (0..spec.n_paths)
        .into_par_iter()
        .map(|i| PathRecord { samples: dephasing_path(spec, &init, i), sigma: None })
        .collect();
    let times = (0..=spec.n_steps).map(|k| k as f64 * spec.dt).collect();
    Ok(TrajectoryEnsemble { source: EnsembleSource::Dephasing(*spec), times, paths })
}
