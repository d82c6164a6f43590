//! Command-line front end: scenario files, experiment runners and output writers.
//!
//! Every run is driven by a TOML scenario file. Outputs are CSV or JSON and
//! start with a version stamp and an echo of the effective configuration.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fpgrid::{self, GridField};
use crate::model::{self, BathSpec, Frame, HamiltonianSpec};
use crate::phasespace::{GaussianState, PhasePoint, StatePreset};
use crate::quadrature::QuadratureSpec;
use crate::rates::{self, CurrentKind, Method, RateReport, VnValue};
use crate::trajectories::{self, KernelRatio, LangevinSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Output directory used when `--out` is absent.
pub const ENV_OUT_DIR: &str = "WIGNER_ENTROPY_OUT_DIR";
/// Worker thread cap for data-parallel kernels.
pub const ENV_THREADS: &str = "WIGNER_ENTROPY_THREADS";

#[derive(Debug, Parser)]
#[command(name = "wigner-entropy", version, about = "Wigner entropy production and flux for a bosonic mode")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = ENV_OUT_DIR)]
    pub out: Option<PathBuf>,
    /// Overrides the seed of the scenario.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Π, Φ, dS/dt, Φ_E, S and Φ_vN at one instant, one record per method.
    Rates {
        /// Sweep the reservoir temperature at fixed energy flux.
        #[arg(long)]
        sweep: bool,
    },
    /// Time series of moments and rates.
    Evolve,
    /// Langevin ensemble with stochastic entropy and the fluctuation theorem.
    Trajectories,
    /// Current-magnitude field of an unpumped cavity in a squeezed reservoir.
    Field,
    /// Grid Fokker–Planck solver against the moment equations and closed forms.
    Fpcheck,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rates { .. } => "rates",
            Command::Evolve => "evolve",
            Command::Trajectories => "trajectories",
            Command::Field => "field",
            Command::Fpcheck => "fpcheck",
        }
    }
}

/// Scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub bath: BathSpec,
    #[serde(default = "default_hamiltonian")]
    pub hamiltonian: HamiltonianSpec,
    /// Defaults to the vacuum.
    #[serde(default)]
    pub initial_state: Option<StatePreset>,
    #[serde(default)]
    pub rates: RatesConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub trajectories: TrajectoriesConfig,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub fpcheck: FpcheckConfig,
}

fn default_hamiltonian() -> HamiltonianSpec {
    HamiltonianSpec::free(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    pub t: f64,
    /// Evaluate at the analytic steady state instead of the initial state.
    pub steady_state: bool,
    pub methods: Vec<Method>,
    pub quadrature: QuadratureSpec,
    pub sweep: SweepConfig,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self {
            t: 0.0,
            steady_state: false,
            methods: vec![Method::ClosedForm, Method::Quadrature, Method::QuadraticForm],
            quadrature: QuadratureSpec::default(),
            sweep: SweepConfig::default(),
        }
    }
}

/// Temperatures `T/ω_c` spaced log-uniformly, at a fixed energy flux.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
    pub phi_e: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { t_min: 1e-3, t_max: 1e2, per_decade: 1, phi_e: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    /// Write every `every`-th step.
    pub every: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self { t0: 0.0, t1: 1.0, dt: 1e-3, every: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoriesConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub kernel: KernelRatio,
    /// Bins of the Σ histogram; 0 disables it.
    pub histogram_bins: usize,
}

impl Default for TrajectoriesConfig {
    fn default() -> Self {
        Self { dt: 1e-3, n_steps: 100, n_paths: 100_000, seed: 1, kernel: KernelRatio::Truncated, histogram_bins: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    pub n: usize,
    /// Half-width of the square `[−extent, extent]²`.
    pub extent: f64,
    pub t: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self { n: 101, extent: 3.0, t: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    /// Thermal reservoir started in its own equilibrium.
    Equilibrium,
    /// Coherent state `μ = 1` relaxing into a zero-temperature reservoir.
    RelaxingCoherent,
    /// Squeezed displaced snapshot under number dephasing.
    DephasingSnapshot,
    /// Bath, Hamiltonian and initial state of the scenario.
    Scenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FpcheckConfig {
    pub benchmark: Benchmark,
    /// Cells per axis of the coarse grid; the fine grid has twice as many.
    pub n: usize,
    pub t_end: f64,
}

impl Default for FpcheckConfig {
    fn default() -> Self {
        Self { benchmark: Benchmark::RelaxingCoherent, n: 64, t_end: 0.5 }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.bath.validate()?;
        self.hamiltonian.validate()?;
        self.initial()?;
        if self.rates.methods.is_empty() {
            return Err(Error::Config("rates.methods is empty".into()));
        }
        let s = &self.rates.sweep;
        if !(s.t_min > 0.0 && s.t_max >= s.t_min && s.per_decade > 0 && s.phi_e.is_finite()) {
            return Err(Error::Config("rates.sweep needs 0 < t_min ≤ t_max and per_decade > 0".into()));
        }
        let e = &self.evolve;
        if !(e.dt > 0.0 && e.t1 >= e.t0 && e.every > 0) {
            return Err(Error::Config("evolve needs dt > 0, t1 ≥ t0 and every > 0".into()));
        }
        if self.field.n < 2 || !(self.field.extent > 0.0) {
            return Err(Error::Config("field needs n ≥ 2 and extent > 0".into()));
        }
        if self.fpcheck.n < 8 || !(self.fpcheck.t_end >= 0.0) {
            return Err(Error::Config("fpcheck needs n ≥ 8 and t_end ≥ 0".into()));
        }
        Ok(())
    }

    pub fn initial(&self) -> Result<GaussianState> {
        self.initial_state.map_or(Ok(GaussianState::vacuum()), |p| p.build())
    }

    fn echo(&self) -> Value {
        serde_json::to_value(self).expect("configuration serialises")
    }
}

/// One finished run: files written and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub exit_code: i32,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

/// `# wigner-entropy <version> <schema>` and `# config <json>` lines.
fn csv_preamble(schema: &str, cfg: &ScenarioConfig) -> String {
    format!("# wigner-entropy {VERSION} {schema}\n# config {}\n", cfg.echo())
}

fn json_envelope(schema: &str, cfg: &ScenarioConfig, body: Value) -> Value {
    json!({ "tool": "wigner-entropy", "version": VERSION, "schema": schema, "config": cfg.echo(), "result": body })
}

fn num(v: f64) -> String {
    v.to_string()
}

fn vn_cell(v: Option<VnValue>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

// ---------------------------------------------------------------- rates

pub const RATES_SCHEMA: &str = "rates/1";
pub const RATES_HEADER: &str = "method,t,pi,phi,dsdt,phi_e,entropy,phi_vn,balance_residual,delta_pi,delta_phi";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatesRecord {
    pub t: f64,
    #[serde(flatten)]
    pub report: RateReport,
    pub balance_residual: f64,
    /// Deviation from the first listed method.
    pub delta_pi: f64,
    pub delta_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatesOutput {
    pub state: GaussianState,
    pub records: Vec<RatesRecord>,
    /// Steady-state production of a squeezed reservoir, when applicable.
    pub steady_production: Option<rates::SteadyProduction>,
}

pub fn cmd_rates(cfg: &ScenarioConfig) -> Result<RatesOutput> {
    let t = cfg.rates.t;
    let state = if cfg.rates.steady_state {
        model::steady_state(&cfg.bath, &cfg.hamiltonian, t)?
    } else {
        cfg.initial()?
    };
    let mut records: Vec<RatesRecord> = Vec::new();
    for &method in &cfg.rates.methods {
        if method == Method::QuadraticForm && cfg.bath.is_dephasing() {
            log::info!("skipping the quadratic-form route for a dephasing bath");
            continue;
        }
        let report = rates::rate_report_with(&state, &cfg.bath, &cfg.hamiltonian, t, method, &cfg.rates.quadrature)?;
        let (ref_pi, ref_phi) = records.first().map_or((report.pi, report.phi), |r| (r.report.pi, r.report.phi));
        records.push(RatesRecord {
            t,
            balance_residual: report.balance_residual(),
            delta_pi: report.pi - ref_pi,
            delta_phi: report.phi - ref_phi,
            report,
        });
    }
    let steady_production = match cfg.bath {
        BathSpec::Squeezed { .. } if cfg.rates.steady_state => {
            Some(rates::steady_state_pi_eq21(&cfg.bath, &cfg.hamiltonian, t)?)
        }
        _ => None,
    };
    Ok(RatesOutput { state, records, steady_production })
}

pub fn render_rates_csv(cfg: &ScenarioConfig, out: &RatesOutput) -> String {
    let mut s = csv_preamble(RATES_SCHEMA, cfg);
    s.push_str(RATES_HEADER);
    s.push('\n');
    for r in &out.records {
        let p = &r.report;
        let row = [
            p.method.name().to_string(),
            num(r.t),
            num(p.pi),
            num(p.phi),
            num(p.dsdt),
            num(p.phi_e),
            num(p.entropy),
            vn_cell(p.phi_vn),
            num(r.balance_residual),
            num(r.delta_pi),
            num(r.delta_phi),
        ];
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn render_rates_jsonl(cfg: &ScenarioConfig, out: &RatesOutput) -> String {
    let mut lines = vec![json!({
        "tool": "wigner-entropy",
        "version": VERSION,
        "schema": RATES_SCHEMA,
        "config": cfg.echo(),
        "state": out.state,
        "steady_production": out.steady_production,
    })
    .to_string()];
    lines.extend(out.records.iter().map(|r| serde_json::to_string(r).expect("record serialises")));
    lines.join("\n") + "\n"
}

pub const SWEEP_SCHEMA: &str = "rates-sweep/1";
pub const SWEEP_HEADER: &str = "temperature,nbar,number,phi,phi_e,phi_vn,phi_e_over_t";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub temperature: f64,
    pub nbar: f64,
    pub number: f64,
    pub phi: f64,
    pub phi_e: f64,
    pub phi_vn: VnValue,
}

/// Thermal reservoir at temperatures `T = ω_c · 10^k`, each with the state
/// `⟨a†a⟩ = n̄ + Φ_E/(γω_c)` so that the energy flux is the configured one.
pub fn cmd_rates_sweep(cfg: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    let BathSpec::Thermal { gamma, .. } = cfg.bath else {
        return Err(Error::Unsupported("the temperature sweep needs a thermal bath".into()));
    };
    if cfg.hamiltonian.pump.is_some() {
        return Err(Error::Unsupported("the temperature sweep assumes an unpumped cavity".into()));
    }
    let w = cfg.hamiltonian.omega_c;
    if !(w > 0.0) {
        return Err(Error::Config("the temperature sweep needs ω_c > 0".into()));
    }
    let sw = &cfg.rates.sweep;
    let decades = (sw.t_max / sw.t_min).log10();
    let n = (decades * sw.per_decade as f64).round() as usize;
    let ham = cfg.hamiltonian;
    (0..=n)
        .map(|k| {
            let temperature = w * sw.t_min * 10f64.powf(k as f64 / sw.per_decade as f64);
            let nbar = model::nbar_from_beta(1.0 / temperature, w);
            let bath = BathSpec::Thermal { gamma, nbar };
            let number = nbar + sw.phi_e / (gamma * w);
            let state = GaussianState::thermal(number)?;
            let vn = rates::vn_rates(&state, &bath, &ham, 0.0)?;
            Ok(SweepRow {
                temperature,
                nbar,
                number,
                phi: rates::phi_rate(&state, &bath, 0.0)?,
                phi_e: model::energy_flux(&state, &bath, &ham, 0.0),
                phi_vn: vn.phi_vn,
            })
        })
        .collect()
}

pub fn render_sweep_csv(cfg: &ScenarioConfig, rows: &[SweepRow]) -> String {
    let mut s = csv_preamble(SWEEP_SCHEMA, cfg);
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let row = [
            num(r.temperature),
            num(r.nbar),
            num(r.number),
            num(r.phi),
            num(r.phi_e),
            r.phi_vn.to_string(),
            num(r.phi_e / r.temperature),
        ];
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------- evolve

pub const EVOLVE_SCHEMA: &str = "evolve/1";
pub const EVOLVE_HEADER: &str =
    "t,mu_re,mu_im,s,m_re,m_im,entropy,pi,phi,dsdt,phi_e,balance_residual";
/// Largest tolerated `|dS/dt − (Π − Φ)|` along a time series.
pub const EVOLVE_BALANCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveRow {
    pub t: f64,
    pub state: GaussianState,
    pub entropy: f64,
    pub pi: f64,
    pub phi: f64,
    pub dsdt: f64,
    pub phi_e: f64,
    pub balance_residual: f64,
}

pub fn cmd_evolve(cfg: &ScenarioConfig) -> Result<Vec<EvolveRow>> {
    if cfg.bath.is_dephasing() {
        return Err(Error::GaussianityNotPreserved(
            "dephasing cannot be evolved through Gaussian moments; \
             run `fpcheck` with the dephasing_snapshot benchmark for the grid solver instead"
                .into(),
        ));
    }
    let e = &cfg.evolve;
    let n_steps = (((e.t1 - e.t0) / e.dt).round() as usize).max(1);
    let traj = model::evolve_steps(&cfg.initial()?, &cfg.bath, &cfg.hamiltonian, Frame::Lab, e.t0, e.t1, n_steps)?;
    let mut rows = Vec::new();
    for (k, (st, &t)) in traj.states.iter().zip(&traj.times).enumerate() {
        if k % e.every != 0 && k != n_steps {
            continue;
        }
        let r = rates::rate_report(st, &cfg.bath, &cfg.hamiltonian, t, Method::ClosedForm)?;
        let residual = r.balance_residual();
        if residual.abs() > EVOLVE_BALANCE_TOL {
            return Err(Error::SelfCheck(format!("entropy balance residual {residual:e} at t = {t}")));
        }
        rows.push(EvolveRow {
            t,
            state: *st,
            entropy: r.entropy,
            pi: r.pi,
            phi: r.phi,
            dsdt: r.dsdt,
            phi_e: r.phi_e,
            balance_residual: residual,
        });
    }
    Ok(rows)
}

pub fn render_evolve_csv(cfg: &ScenarioConfig, rows: &[EvolveRow]) -> String {
    let mut s = csv_preamble(EVOLVE_SCHEMA, cfg);
    s.push_str(EVOLVE_HEADER);
    s.push('\n');
    for r in rows {
        let st = &r.state;
        let row = [
            r.t,
            st.mu().re,
            st.mu().im,
            st.s(),
            st.m().re,
            st.m().im,
            r.entropy,
            r.pi,
            r.phi,
            r.dsdt,
            r.phi_e,
            r.balance_residual,
        ];
        s.push_str(&row.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------- trajectories

pub const TRAJECTORIES_SCHEMA: &str = "trajectories/1";
pub const HISTOGRAM_HEADER: &str = "bin_lo,bin_hi,count";
/// The run fails its self-check when `|⟨e^{−Σ}⟩ − 1|` exceeds this many standard errors.
pub const FT_SELF_CHECK_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoriesSummary {
    pub seed: u64,
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub tau: f64,
    pub kernel: KernelRatio,
    pub exp_minus_sigma_mean: f64,
    pub exp_minus_sigma_stderr: f64,
    pub sigma_mean: f64,
    pub sigma_stderr: f64,
    pub sigma_rate: f64,
    /// Closed-form `Π` averaged over `[0, τ]`.
    pub pi_time_average: f64,
    pub pi_initial: f64,
    pub rate_relative_delta: f64,
    pub jensen_ok: bool,
    pub self_check_passed: bool,
    #[serde(skip)]
    pub sigmas: Vec<f64>,
}

pub fn cmd_trajectories(cfg: &ScenarioConfig) -> Result<TrajectoriesSummary> {
    let BathSpec::Thermal { gamma, nbar } = cfg.bath else {
        return Err(Error::Unsupported("stochastic entropy is implemented for thermal reservoirs only".into()));
    };
    if cfg.hamiltonian.pump.is_some() {
        return Err(Error::Unsupported("the Langevin sampler has no pump term".into()));
    }
    let tc = &cfg.trajectories;
    let spec = LangevinSpec {
        omega: cfg.hamiltonian.omega_c,
        gamma,
        nbar,
        dt: tc.dt,
        n_steps: tc.n_steps,
        n_paths: tc.n_paths,
        seed: tc.seed,
    };
    spec.validate()?;
    let init = cfg.initial()?;
    let background =
        model::evolve_steps(&init, &cfg.bath, &cfg.hamiltonian, Frame::Lab, 0.0, spec.duration(), spec.n_steps)?;
    let sigmas = trajectories::sigma_ensemble(&spec, &init, &background, tc.kernel)?;
    let ft = trajectories::fluctuation_theorem_estimator(&sigmas)?;
    let pi_avg = trajectories::time_average(&background, |st, t| rates::pi_closed_form(st, &cfg.bath, t))?;
    let tau = spec.duration();
    let sigma_rate = ft.sigma.mean / tau;
    Ok(TrajectoriesSummary {
        seed: spec.seed,
        dt: spec.dt,
        n_steps: spec.n_steps,
        n_paths: spec.n_paths,
        tau,
        kernel: tc.kernel,
        exp_minus_sigma_mean: ft.mean,
        exp_minus_sigma_stderr: ft.stderr,
        sigma_mean: ft.sigma.mean,
        sigma_stderr: ft.sigma.stderr,
        sigma_rate,
        pi_time_average: pi_avg,
        pi_initial: rates::pi_closed_form(&init, &cfg.bath, 0.0)?,
        rate_relative_delta: if pi_avg != 0.0 { sigma_rate / pi_avg - 1.0 } else { sigma_rate },
        jensen_ok: ft.jensen_ok,
        self_check_passed: ft.holds(FT_SELF_CHECK_SIGMAS),
        sigmas,
    })
}

pub fn render_trajectories_json(cfg: &ScenarioConfig, summary: &TrajectoriesSummary) -> String {
    let v = json_envelope(TRAJECTORIES_SCHEMA, cfg, serde_json::to_value(summary).expect("summary serialises"));
    serde_json::to_string_pretty(&v).expect("json") + "\n"
}

/// Equal-width histogram of `Σ`.
pub fn render_histogram_csv(cfg: &ScenarioConfig, sigmas: &[f64], bins: usize) -> String {
    let mut s = csv_preamble("sigma-histogram/1", cfg);
    s.push_str(HISTOGRAM_HEADER);
    s.push('\n');
    let lo = sigmas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sigmas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if bins == 0 || !lo.is_finite() {
        return s;
    }
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &x in sigmas {
        let k = (((x - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    for (k, c) in counts.iter().enumerate() {
        s.push_str(&format!("{},{},{}\n", num(lo + k as f64 * width), num(lo + (k + 1) as f64 * width), c));
    }
    s
}

// ---------------------------------------------------------------- field

pub const FIELD_SCHEMA: &str = "field/1";
pub const FIELD_HEADER: &str = "x,y,w,jb2_over_w_closed,jb2_over_w_direct,jb2_over_w2_closed,rel_delta";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldPoint {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    /// Closed-form `|J_b|²/W² · W`.
    pub closed: f64,
    /// `|J_b|²/W` from the current itself.
    pub direct: f64,
    pub closed_over_w2: f64,
    pub rel_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldOutput {
    pub state: GaussianState,
    pub max_rel_delta: f64,
    #[serde(skip)]
    pub points: Vec<FieldPoint>,
}

pub fn cmd_field(cfg: &ScenarioConfig) -> Result<FieldOutput> {
    if !matches!(cfg.bath, BathSpec::Squeezed { .. }) {
        return Err(Error::Config("the field command needs a squeezed bath".into()));
    }
    let fc = &cfg.field;
    let t = fc.t;
    let state = model::steady_state(&cfg.bath, &cfg.hamiltonian, t)?;
    let n = fc.n;
    let step = 2.0 * fc.extent / (n - 1) as f64;
    let mut points = Vec::with_capacity(n * n);
    let mut max_rel_delta: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (-fc.extent + i as f64 * step, -fc.extent + j as f64 * step);
            let p = PhasePoint::from_xy(x, y)?;
            let w = state.wigner(p);
            let closed_over_w2 = rates::jb_field_squared(&cfg.bath, &cfg.hamiltonian, t, p)?;
            let jb = rates::current_eval(CurrentKind::SqueezedJb, &state, &cfg.bath, t, p)?;
            let direct = jb.norm_sqr() / w;
            let closed = closed_over_w2 * w;
            let scale = closed.abs().max(direct.abs());
            let rel_delta = if scale > 0.0 { (closed - direct).abs() / scale } else { 0.0 };
            max_rel_delta = max_rel_delta.max(rel_delta);
            points.push(FieldPoint { x, y, w, closed, direct, closed_over_w2, rel_delta });
        }
    }
    Ok(FieldOutput { state, max_rel_delta, points })
}

pub fn render_field_csv(cfg: &ScenarioConfig, out: &FieldOutput) -> String {
    let mut s = csv_preamble(FIELD_SCHEMA, cfg);
    s.push_str(FIELD_HEADER);
    s.push('\n');
    for p in &out.points {
        let row = [p.x, p.y, p.w, p.closed, p.direct, p.closed_over_w2, p.rel_delta];
        s.push_str(&row.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

pub fn render_field_json(cfg: &ScenarioConfig, out: &FieldOutput) -> String {
    let body = json!({
        "state": out.state,
        "max_rel_delta": out.max_rel_delta,
        "points": out.points,
    });
    serde_json::to_string(&json_envelope(FIELD_SCHEMA, cfg, body)).expect("json") + "\n"
}

// ---------------------------------------------------------------- fpcheck

pub const FPCHECK_SCHEMA: &str = "fpcheck/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FpResolution {
    pub n: usize,
    pub h: f64,
    pub mass: f64,
    pub leaked: f64,
    pub delta_mu: f64,
    pub delta_number: f64,
    pub delta_aa: f64,
    pub pi: f64,
    pub phi: f64,
    pub dsdt: f64,
    pub delta_pi: f64,
    pub delta_phi: f64,
    pub delta_dsdt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpcheckReport {
    pub benchmark: Benchmark,
    pub bath: BathSpec,
    pub hamiltonian: HamiltonianSpec,
    pub initial_state: GaussianState,
    pub t_end: f64,
    pub pi_reference: f64,
    pub phi_reference: f64,
    pub dsdt_reference: f64,
    pub resolutions: Vec<FpResolution>,
    /// The error used for the convergence order.
    pub convergence_quantity: &'static str,
    /// `log₂(e_h / e_{h/2})`, when both errors are above round-off.
    pub convergence_order: Option<f64>,
}

fn benchmark_setup(cfg: &ScenarioConfig) -> Result<(BathSpec, HamiltonianSpec, GaussianState, f64)> {
    let t_end = cfg.fpcheck.t_end;
    Ok(match cfg.fpcheck.benchmark {
        Benchmark::Equilibrium => {
            (BathSpec::Thermal { gamma: 1.0, nbar: 0.5 }, HamiltonianSpec::free(1.0), GaussianState::thermal(0.5)?, t_end)
        }
        Benchmark::RelaxingCoherent => (
            BathSpec::Thermal { gamma: 1.0, nbar: 0.0 },
            HamiltonianSpec::free(1.0),
            GaussianState::coherent(Complex64::new(1.0, 0.0))?,
            t_end,
        ),
        Benchmark::DephasingSnapshot => (
            BathSpec::Dephasing { lambda: 1.0 },
            HamiltonianSpec::free(1.0),
            GaussianState::squeezed_thermal(0.3, Complex64::new(0.15, 0.0))?.with_mean(Complex64::new(0.5, 0.0))?,
            0.0,
        ),
        Benchmark::Scenario => {
            let t = if cfg.bath.is_dephasing() { 0.0 } else { t_end };
            (cfg.bath, cfg.hamiltonian, cfg.initial()?, t)
        }
    })
}

/// Exact lab-frame moments `(⟨a⟩, ⟨a†a⟩, ⟨aa⟩)` at `t`.
fn reference_moments(
    init: &GaussianState,
    bath: &BathSpec,
    ham: &HamiltonianSpec,
    t: f64,
) -> Result<(Complex64, f64, Complex64, Option<GaussianState>)> {
    if t == 0.0 {
        return Ok((init.mu(), init.number(), init.aa(), Some(*init)));
    }
    let n_steps = ((t / 1e-3).ceil() as usize).max(10);
    let st = *model::evolve_steps(init, bath, ham, Frame::Lab, 0.0, t, n_steps)?.last();
    Ok((st.mu(), st.number(), st.aa(), Some(st)))
}

pub fn cmd_fpcheck(cfg: &ScenarioConfig) -> Result<FpcheckReport> {
    let (bath, ham, init, t_end) = benchmark_setup(cfg)?;
    let (mu, number, aa, exact) = reference_moments(&init, &bath, &ham, t_end)?;
    let exact = exact.expect("Gaussian reference");
    let pi_ref = rates::pi_closed_form(&exact, &bath, t_end)?;
    let phi_ref = rates::phi_rate(&exact, &bath, t_end)?;
    let dsdt_ref = model::moment_rhs(&exact, &bath, &ham, t_end).entropy_rate(&exact);
    let frame = ham.omega_c;
    let (center, half) = GridField::auto_domain(&init, 0.0, frame);

    let mut resolutions = Vec::new();
    for n in [cfg.fpcheck.n, 2 * cfg.fpcheck.n] {
        let f0 = GridField::from_gaussian(&init, 0.0, frame, center, half, n)?;
        let f = fpgrid::evolve_to(&f0, &bath, &ham, t_end, None)?;
        let m = f.moments();
        let r = fpgrid::grid_rates(&f, &bath, &ham)?;
        resolutions.push(FpResolution {
            n,
            h: f.h(),
            mass: m.mass,
            leaked: f.leaked(),
            delta_mu: (m.mu - mu).norm(),
            delta_number: m.number - number,
            delta_aa: (m.aa - aa).norm(),
            pi: r.pi,
            phi: r.phi,
            dsdt: r.dsdt,
            delta_pi: r.pi - pi_ref,
            delta_phi: r.phi - phi_ref,
            delta_dsdt: r.dsdt - dsdt_ref,
        });
    }
    // A Gaussian snapshot has no evolution error, so Π on the grid is exact
    // up to quadrature; the stencil then shows up in dS/dt.
    let (quantity, errs): (&'static str, Vec<f64>) = if t_end == 0.0 {
        ("dsdt", resolutions.iter().map(|r| r.delta_dsdt.abs()).collect())
    } else {
        ("pi", resolutions.iter().map(|r| r.delta_pi.abs()).collect())
    };
    let order = if errs.iter().all(|e| *e > 1e-12) { Some((errs[0] / errs[1]).log2()) } else { None };
    Ok(FpcheckReport {
        benchmark: cfg.fpcheck.benchmark,
        bath,
        hamiltonian: ham,
        initial_state: init,
        t_end,
        pi_reference: pi_ref,
        phi_reference: phi_ref,
        dsdt_reference: dsdt_ref,
        resolutions,
        convergence_quantity: quantity,
        convergence_order: order,
    })
}

pub const FPCHECK_HEADER: &str =
    "n,h,mass,leaked,delta_mu,delta_number,delta_aa,pi,phi,dsdt,delta_pi,delta_phi,delta_dsdt";

pub fn render_fpcheck_csv(cfg: &ScenarioConfig, rep: &FpcheckReport) -> String {
    let mut s = csv_preamble(FPCHECK_SCHEMA, cfg);
    s.push_str(FPCHECK_HEADER);
    s.push('\n');
    for r in &rep.resolutions {
        let row = [
            r.n as f64, r.h, r.mass, r.leaked, r.delta_mu, r.delta_number, r.delta_aa, r.pi, r.phi, r.dsdt,
            r.delta_pi, r.delta_phi, r.delta_dsdt,
        ];
        s.push_str(&row.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------- driver

fn configure_threads() {
    if let Some(n) = std::env::var(ENV_THREADS).ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not cap threads at {n}: {e}");
        }
    }
}

/// Execute a parsed command line.
pub fn run(cli: &Cli) -> Result<RunOutcome> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.trajectories.seed = seed;
    }
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let csv = cli.format == Format::Csv;
    let mut files = Vec::new();
    let mut exit_code = 0;
    match &cli.command {
        Command::Rates { sweep: true } => {
            let rows = cmd_rates_sweep(&cfg)?;
            files.push(if csv {
                write_file(&dir, "rates_sweep.csv", &render_sweep_csv(&cfg, &rows))?
            } else {
                let v = json_envelope(SWEEP_SCHEMA, &cfg, serde_json::to_value(&rows).expect("json"));
                write_file(&dir, "rates_sweep.json", &(v.to_string() + "\n"))?
            });
        }
        Command::Rates { sweep: false } => {
            let out = cmd_rates(&cfg)?;
            files.push(if csv {
                write_file(&dir, "rates.csv", &render_rates_csv(&cfg, &out))?
            } else {
                write_file(&dir, "rates.jsonl", &render_rates_jsonl(&cfg, &out))?
            });
        }
        Command::Evolve => {
            let rows = cmd_evolve(&cfg)?;
            files.push(if csv {
                write_file(&dir, "evolve.csv", &render_evolve_csv(&cfg, &rows))?
            } else {
                let v = json_envelope(EVOLVE_SCHEMA, &cfg, serde_json::to_value(&rows).expect("json"));
                write_file(&dir, "evolve.json", &(v.to_string() + "\n"))?
            });
        }
        Command::Trajectories => {
            let summary = cmd_trajectories(&cfg)?;
            files.push(write_file(&dir, "trajectories.json", &render_trajectories_json(&cfg, &summary))?);
            if cfg.trajectories.histogram_bins > 0 {
                let body = render_histogram_csv(&cfg, &summary.sigmas, cfg.trajectories.histogram_bins);
                files.push(write_file(&dir, "sigma_histogram.csv", &body)?);
            }
            if !summary.self_check_passed {
                log::error!(
                    "fluctuation theorem self-check failed: <exp(-Σ)> = {} ± {}",
                    summary.exp_minus_sigma_mean,
                    summary.exp_minus_sigma_stderr
                );
                exit_code = Error::SelfCheck(String::new()).exit_code();
            }
        }
        Command::Field => {
            let out = cmd_field(&cfg)?;
            files.push(if csv {
                write_file(&dir, "field.csv", &render_field_csv(&cfg, &out))?
            } else {
                write_file(&dir, "field.json", &render_field_json(&cfg, &out))?
            });
        }
        Command::Fpcheck => {
            let rep = cmd_fpcheck(&cfg)?;
            let v = json_envelope(FPCHECK_SCHEMA, &cfg, serde_json::to_value(&rep).expect("json"));
            files.push(write_file(&dir, "fpcheck.json", &(serde_json::to_string_pretty(&v).expect("json") + "\n"))?);
            if csv {
                files.push(write_file(&dir, "fpcheck.csv", &render_fpcheck_csv(&cfg, &rep))?);
            }
        }
    }
    log::info!("{} wrote {} file(s)", cli.command.name(), files.len());
    Ok(RunOutcome { files, exit_code })
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match run(&cli) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            for f in &outcome.files {
                let _ = writeln!(stdout, "{}", f.display());
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("wigner-entropy: {e}");
            e.exit_code()
        }
    }
}
