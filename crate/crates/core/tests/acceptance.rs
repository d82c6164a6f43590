//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wigner_entropy::cli::{self, Benchmark, ScenarioConfig};
use wigner_entropy::fpgrid::{self, GridField};
use wigner_entropy::model::{self, Frame};
use wigner_entropy::quadrature::{QuadratureSpec, Rect, TensorRule};
use wigner_entropy::rates::{self, VnValue};
use wigner_entropy::trajectories::{self, KernelRatio, LangevinSpec};
use wigner_entropy::{BathSpec, Complex64, GaussianState, HamiltonianSpec, PhasePoint};

type Outcome = (bool, String);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn random_state(rng: &mut ChaCha8Rng) -> GaussianState {
    let mu = c(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
    let m = Complex64::from_polar(rng.random_range(0.0..0.8), rng.random_range(0.0..std::f64::consts::TAU));
    // s² − |m|² ≥ ¼ with margin
    let s = (0.25 + m.norm_sqr()).sqrt() + rng.random_range(0.0..1.5);
    GaussianState::new(mu, s, m).unwrap()
}

fn random_squeezed(rng: &mut ChaCha8Rng) -> BathSpec {
    BathSpec::Squeezed {
        gamma: rng.random_range(0.2..3.0),
        nbar: rng.random_range(0.0..2.0),
        r: rng.random_range(0.0..1.2),
        theta: rng.random_range(-3.0..3.0),
        omega_s: rng.random_range(-2.0..2.0),
    }
}

fn c1_equilibrium_nullity() -> Outcome {
    let mut worst_closed: f64 = 0.0;
    let mut worst_numeric: f64 = 0.0;
    for (gamma, nbar, w) in [(1.0, 0.0, 1.0), (0.7, 0.4, 1.3), (2.0, 3.0, 0.5)] {
        let bath = BathSpec::Thermal { gamma, nbar };
        let ham = HamiltonianSpec::free(w);
        let eq = GaussianState::thermal(nbar).unwrap();
        let r = rates::rate_report(&eq, &bath, &ham, 0.0, rates::Method::ClosedForm).unwrap();
        worst_closed = worst_closed.max(r.pi.abs()).max(r.phi.abs()).max(r.dsdt.abs());
        let q = QuadratureSpec::default();
        worst_numeric = worst_numeric
            .max(rates::pi_quadrature(&eq, &bath, 0.0, &q).unwrap().abs())
            .max(rates::phi_quadrature(&eq, &bath, 0.0, &q).unwrap().abs());
        let (center, l) = GridField::auto_domain(&eq, 0.0, w);
        let f0 = GridField::from_gaussian(&eq, 0.0, w, center, l, 64).unwrap();
        let f1 = fpgrid::evolve_to(&f0, &bath, &ham, 0.5, None).unwrap();
        let g = fpgrid::grid_rates(&f1, &bath, &ham).unwrap();
        worst_numeric = worst_numeric.max(g.pi.abs()).max(g.phi.abs()).max(g.dsdt.abs());
        // independent reference
        worst_closed = worst_closed.max(common::pi(&eq, &bath, 0.0).abs());
    }
    (
        worst_closed <= 1e-10 && worst_numeric <= 1e-8,
        format!("max |rate| closed form {worst_closed:.2e} (tol 1e-10), quadrature/grid {worst_numeric:.2e} (tol 1e-8)"),
    )
}

fn c2_entropy_balance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_balance: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for k in 0..100 {
        let st = random_state(&mut rng);
        let bath = if k % 2 == 0 {
            BathSpec::Thermal { gamma: rng.random_range(0.2..3.0), nbar: rng.random_range(0.0..2.0) }
        } else {
            random_squeezed(&mut rng)
        };
        let w = rng.random_range(-2.0..2.0);
        let ham = HamiltonianSpec::pumped(w, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), rng.random_range(-2.0..2.0));
        let t = rng.random_range(0.0..5.0);
        let r = rates::rate_report(&st, &bath, &ham, t, rates::Method::ClosedForm).unwrap();
        worst_balance = worst_balance.max((r.dsdt - (r.pi - r.phi)).abs());
        let scale = 1.0 + r.pi.abs() + r.phi.abs();
        worst_oracle = worst_oracle
            .max((r.dsdt - common::dsdt(&st, &bath, w, t)).abs() / scale)
            .max((r.pi - common::pi(&st, &bath, t)).abs() / scale)
            .max((r.phi - common::phi(&st, &bath, w, t)).abs() / scale);
    }
    (
        worst_balance <= 1e-9 && worst_oracle <= 1e-9,
        format!("100 states: max |dS/dt − (Π − Φ)| = {worst_balance:.2e}, max deviation from the real-coordinate reference {worst_oracle:.2e} (tol 1e-9)"),
    )
}

fn c3_pumped_steady_state() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let bath = random_squeezed(&mut rng);
        let e = c(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let ham = HamiltonianSpec::pumped(rng.random_range(-2.0..2.0), e, rng.random_range(-2.0..2.0));
        let t = rng.random_range(0.0..10.0);
        let ss = model::steady_state(&bath, &ham, t).unwrap();
        let v = rates::steady_state_pi_eq21(&bath, &ham, t).unwrap().instantaneous;
        let phi = rates::phi_rate(&ss, &bath, t).unwrap();
        let w = ham.omega_c;
        worst = worst.max(rel(v, phi)).max(rel(v, common::phi(&ss, &bath, w, t)));
    }
    let bath = BathSpec::Squeezed { gamma: 2.0, nbar: 0.0, r: 0.5, theta: 0.0, omega_s: 0.0 };
    let reference = rates::steady_state_pi_eq21(&bath, &HamiltonianSpec::free(0.9), 0.0).unwrap().instantaneous;
    let ref_ok = rel(reference, 1.23611) <= 1e-5;
    (
        worst <= 1e-10 && ref_ok,
        format!("50 sets: max relative deviation {worst:.2e} (tol 1e-10); κ=1, Δ=0.9, r=0.5 gives {reference:.6}"),
    )
}

fn c4_field() -> Outcome {
    let toml = r#"
bath = { kind = "squeezed", gamma = 2.0, nbar = 0.0, r = 0.5, theta = 0.0, omega_s = 0.0 }
hamiltonian = { omega_c = 0.9 }
"#;
    let cfg = ScenarioConfig::from_toml(toml).unwrap();
    let out = cli::cmd_field(&cfg).unwrap();
    let n_points = out.points.len();
    // independent shape check: the real-coordinate local production is proportional to the field
    let ss = out.state;
    let mut ratio_spread: f64 = 0.0;
    let mut ratio0 = None;
    for p in &out.points {
        if p.closed_over_w2 > 1e-6 {
            let q = common::local_production(&ss, &cfg.bath, 0.0, p.x, p.y);
            let ratio = q / p.closed_over_w2;
            let r0 = *ratio0.get_or_insert(ratio);
            ratio_spread = ratio_spread.max(rel(ratio, r0));
        }
    }
    let mut vanish: f64 = 0.0;
    for (bath, w) in [
        (BathSpec::Squeezed { gamma: 2.0, nbar: 0.0, r: 0.0, theta: 0.0, omega_s: 0.0 }, 0.9),
        (BathSpec::Squeezed { gamma: 2.0, nbar: 0.0, r: 0.5, theta: 0.0, omega_s: 0.0 }, 0.0),
    ] {
        for p in &out.points {
            let v = rates::jb_field_squared(&bath, &HamiltonianSpec::free(w), 0.0, PhasePoint::from_xy(p.x, p.y).unwrap()).unwrap();
            vanish = vanish.max(v.abs());
        }
    }
    (
        n_points == 101 * 101 && out.max_rel_delta <= 1e-8 && vanish == 0.0 && ratio_spread <= 1e-8,
        format!(
            "{n_points} points: closed form vs current max relative delta {:.2e} (tol 1e-8); shape vs reference {ratio_spread:.2e}; r=0 / Δ=0 max {vanish:e}",
            out.max_rel_delta
        ),
    )
}

fn c5_fluctuation_theorem() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for nbar in [0.0, 1.0] {
        let spec = LangevinSpec { omega: 1.0, gamma: 1.0, nbar, dt: 1e-3, n_steps: 100, n_paths: 100_000, seed: 2024 };
        let bath = BathSpec::Thermal { gamma: 1.0, nbar };
        let ham = HamiltonianSpec::free(1.0);
        let init = GaussianState::coherent(c(1.0, 0.0)).unwrap();
        let bg = model::evolve_steps(&init, &bath, &ham, Frame::Lab, 0.0, spec.duration(), spec.n_steps).unwrap();
        let sig = trajectories::sigma_ensemble(&spec, &init, &bg, KernelRatio::Truncated).unwrap();
        let ft = trajectories::fluctuation_theorem_estimator(&sig).unwrap();
        // trapezoid average of the exact Π(t) over [0, τ]
        let n = 1000;
        let tau = spec.duration();
        let pis: Vec<f64> = (0..=n)
            .map(|k| {
                let t = tau * k as f64 / n as f64;
                common::pi(&common::relaxing_coherent(c(1.0, 0.0), 1.0, 1.0, nbar, t), &bath, t)
            })
            .collect();
        let pi_avg = (pis.iter().sum::<f64>() - 0.5 * (pis[0] + pis[n])) / n as f64;
        let rate = ft.sigma.mean / tau;
        let ft_ok = (ft.mean - 1.0).abs() <= 3.0 * ft.stderr;
        let rate_ok = rel(rate, pi_avg) <= 0.05;
        ok &= ft_ok && rate_ok;
        lines.push(format!(
            "n̄={nbar}: <e^-Σ> = {:.5} ± {:.5}, <Σ>/τ = {rate:.4} vs Π̄ = {pi_avg:.4} ({:+.2}%)",
            ft.mean,
            ft.stderr,
            100.0 * (rate / pi_avg - 1.0)
        ));
    }
    (ok, lines.join("; "))
}

fn c6_temperature_limits() -> Outcome {
    let (gamma, w, phi_e) = (0.8, 1.3, 0.25);
    let bath_at = |t_over_w: f64| {
        let nbar = model::nbar_from_beta(1.0 / (t_over_w * w), w);
        (BathSpec::Thermal { gamma, nbar }, nbar)
    };
    let eval = |t_over_w: f64| {
        let (bath, nbar) = bath_at(t_over_w);
        let st = GaussianState::thermal(nbar + phi_e / (gamma * w)).unwrap();
        let ham = HamiltonianSpec::free(w);
        let phi = rates::phi_rate(&st, &bath, 0.0).unwrap();
        let pe = model::energy_flux(&st, &bath, &ham, 0.0);
        let vn = rates::vn_rates(&st, &bath, &ham, 0.0).unwrap();
        (phi, pe, vn.phi_vn, vn.temperature)
    };
    let (phi_hot, pe_hot, _, temp_hot) = eval(100.0);
    let high_t = rel(phi_hot, pe_hot / temp_hot);
    let mut cold_ok = true;
    let mut worst_cold: f64 = 0.0;
    let mut vn_times_t = Vec::new();
    for t_over_w in [1e-1, 3e-2, 1e-2, 3e-3] {
        let (phi, pe, vn, temp) = eval(t_over_w);
        worst_cold = worst_cold.max((phi - 2.0 * pe / w).abs());
        match vn {
            VnValue::Finite(v) => vn_times_t.push(v * temp / pe),
            VnValue::Infinite { .. } => cold_ok = false,
        }
    }
    let cold_limit = (eval(1e-2).0 - 2.0 * phi_e / w).abs();
    let vn_scaling = vn_times_t.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
    (
        high_t <= 0.01 && cold_limit <= 1e-6 && cold_ok && vn_scaling <= 1e-12,
        format!(
            "T/ω=100: |Φ − Φ_E/T|/Φ = {high_t:.2e}; T/ω=0.01: |Φ − 2Φ_E/ω| = {cold_limit:.2e}; Φ_vN·T/Φ_E − 1 ≤ {vn_scaling:.1e} down to T/ω=3e-3 (max |Φ − 2Φ_E/ω| over sweep {worst_cold:.2e})"
        ),
    )
}

fn c7_representation_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let bath = random_squeezed(&mut rng);
        let st = random_state(&mut rng);
        let t = rng.random_range(0.0..5.0);
        let a = rates::pi_quadratic_form(&st, &bath, t).unwrap();
        let b = rates::pi_closed_form(&st, &bath, t).unwrap();
        worst = worst.max(rel(a, b)).max(rel(b, common::pi(&st, &bath, t)));
    }
    (worst <= 1e-10, format!("50 squeezed cases: max relative deviation {worst:.2e} (tol 1e-10)"))
}

fn c8_grid_oracle() -> Outcome {
    let base = "bath = { kind = \"thermal\", gamma = 1.0, nbar = 0.0 }\n";
    let mut ok = true;
    let mut lines = Vec::new();
    for (bench, n) in [(Benchmark::RelaxingCoherent, 64), (Benchmark::DephasingSnapshot, 96)] {
        let mut cfg = ScenarioConfig::from_toml(base).unwrap();
        cfg.fpcheck.benchmark = bench;
        cfg.fpcheck.n = n;
        let rep = cli::cmd_fpcheck(&cfg).unwrap();
        let fine = rep.resolutions.last().unwrap();
        let pi_err = rel(fine.pi, rep.pi_reference);
        let phi_ok = if rep.phi_reference == 0.0 { fine.phi == 0.0 } else { rel(fine.phi, rep.phi_reference) <= 0.02 };
        let order = rep.convergence_order.unwrap_or(f64::NAN);
        let order_ok = (1.6..=2.4).contains(&order);
        ok &= pi_err <= 0.02 && phi_ok && order_ok;
        lines.push(format!(
            "{bench:?}: Π error {:.2}%, Φ {} , {} convergence order {order:.2} (n={n}→{})",
            100.0 * pi_err,
            if phi_ok { "ok" } else { "off" },
            rep.convergence_quantity,
            2 * n
        ));
    }
    (ok, lines.join("; "))
}

fn c9_propagator() -> Outcome {
    let rule = TensorRule::new(121).unwrap();
    let from = c(0.6, -0.3);
    let residual = |dt: f64| {
        let spec = LangevinSpec { omega: 1.0, gamma: 1.0, nbar: 0.5, dt, n_steps: 1, n_paths: 1, seed: 0 };
        let centre = from / (1.0 + c(0.5, 1.0) * dt);
        let half = 12.0 * (spec.gamma * spec.sigma() * dt).sqrt();
        let rect = Rect::square(centre.re, centre.im, half);
        rule.integrate(rect, |x, y| trajectories::propagator_density(&spec, c(x, y), from).unwrap()) - 1.0
    };
    let rs: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|&dt| residual(dt)).collect();
    let ratios = [rs[0] / rs[1], rs[1] / rs[2]];
    (
        ratios.iter().all(|r| (r - 4.0).abs() <= 0.5),
        format!("residuals {:.3e}, {:.3e}, {:.3e}; halving ratios {:.3}, {:.3}", rs[0], rs[1], rs[2], ratios[0], ratios[1]),
    )
}

fn c10_dephasing() -> Outcome {
    let lambda = 1.0;
    let bath = BathSpec::Dephasing { lambda };
    let ham = HamiltonianSpec::free(1.0);
    let st = GaussianState::squeezed_thermal(0.3, c(0.15, 0.0)).unwrap().with_mean(c(0.5, 0.0)).unwrap();
    let (center, _) = GridField::auto_domain(&st, 0.0, 1.0);
    let mut f = GridField::from_gaussian(&st, 0.0, 1.0, center, 7.0 * st.sigma_max(), 128).unwrap();
    let n0 = f.moments().number;
    let t1 = 0.5;
    let mut min_dsdt = f64::INFINITY;
    let mut phi_zero = true;
    for k in 1..=5 {
        f = fpgrid::evolve_to(&f, &bath, &ham, t1 * k as f64 / 5.0, None).unwrap();
        let r = fpgrid::grid_rates(&f, &bath, &ham).unwrap();
        min_dsdt = min_dsdt.min(r.dsdt);
        phi_zero &= r.phi == 0.0;
    }
    let drift = (f.moments().number - n0).abs() / t1;

    let mut worst_snapshot: f64 = 0.0;
    let mut worst_reference: f64 = 0.0;
    for snap in [
        st,
        GaussianState::new(c(-0.3, 0.4), 0.9, c(0.1, 0.1)).unwrap(),
        GaussianState::squeezed_thermal(0.6, c(0.0, 0.15)).unwrap(),
    ] {
        let (center, l) = GridField::auto_domain(&snap, 0.0, 1.0);
        let g = GridField::from_gaussian(&snap, 0.0, 1.0, center, l, 128).unwrap();
        let r = fpgrid::grid_rates(&g, &bath, &ham).unwrap();
        let closed = rates::pi_closed_form(&snap, &bath, 0.0).unwrap();
        let reference = common::dsdt(&snap, &bath, 1.0, 0.0);
        phi_zero &= r.phi == 0.0 && rates::phi_rate(&snap, &bath, 0.0).unwrap() == 0.0;
        worst_snapshot = worst_snapshot.max(rel(r.dsdt, r.pi)).max(rel(r.pi, closed));
        worst_reference = worst_reference.max(rel(closed, reference));
    }
    (
        drift <= 1e-4 && phi_zero && worst_snapshot <= 0.02 && worst_reference <= 1e-10 && min_dsdt >= -1e-6,
        format!(
            "⟨a†a⟩ drift {drift:.2e}/time (tol 1e-4); Φ ≡ 0: {phi_zero}; snapshot grid Π, dS/dt vs closed form max relative {worst_snapshot:.2e}, closed form vs moment reference {worst_reference:.1e}; min grid dS/dt {min_dsdt:.3e}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("equilibrium nullity", c1_equilibrium_nullity),
        ("entropy balance", c2_entropy_balance),
        ("pumped-cavity steady state", c3_pumped_steady_state),
        ("squeezed-reservoir current field", c4_field),
        ("fluctuation theorem", c5_fluctuation_theorem),
        ("temperature limits", c6_temperature_limits),
        ("representation equivalence", c7_representation_equivalence),
        ("grid oracle triangle", c8_grid_oracle),
        ("propagator normalisation", c9_propagator),
        ("dephasing energy conservation", c10_dephasing),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        failures += usize::from(!pass);
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.1}s]",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
