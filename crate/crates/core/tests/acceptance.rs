//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use nse_nudge::diagnostics::{h1_envelope_violations, power_balance, Recorder, force_stats};
use nse_nudge::flow::{FlowModel, ForcingSpec, PairState, SystemParams, TheoremConstants};
use nse_nudge::harness::{run_experiment, ExperimentConfig, RunSummary};
use nse_nudge::spectral::{bilinear, inner_hs, norm_hs, stokes_apply, GridSpec, SpectralField};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TWIN_TOML: &str = include_str!("../../../configs/twin.toml");
const SYNC_TOML: &str = include_str!("../../../configs/sync.toml");

const ORTHO_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-12;
const BALANCE_RATIO: (f64, f64) = (3.2, 4.8);
const SYNC_ORDERS: f64 = 10.0;
const SYNC_HORIZON: f64 = 5.0;
const MIN_ACCEPTED: usize = 5;
const NU_REL_TOL: f64 = 1e-6;
const IDENTITY_FACTOR: f64 = 10.0;
const ENVELOPE_REL_TOL: f64 = 1e-8;

struct Outcome {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn report(o: &Outcome) {
    println!(
        "[{}] criterion {} {}: {} ({:.2}s)",
        if o.passed { "PASS" } else { "FAIL" },
        o.id,
        o.name,
        o.detail,
        o.elapsed.as_secs_f64()
    );
}

fn timed(id: usize, name: &'static str, limit_s: f64, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = f();
    let elapsed = start.elapsed();
    let in_time = elapsed.as_secs_f64() < limit_s;
    let detail = if in_time {
        detail
    } else {
        format!("{detail}; over the {limit_s}s budget")
    };
    let o = Outcome {
        id,
        name,
        passed: ok && in_time,
        detail,
        elapsed,
    };
    report(&o);
    o
}

fn random_fields(n: usize, count: usize, seed: u64) -> Vec<SpectralField> {
    let g = GridSpec::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = g.dealias_cutoff() as f64 * 1.5;
    (0..count)
        .map(|_| SpectralField::random_solenoidal(g, &mut rng, 1.0, kmax, 1.0))
        .collect()
}

fn orthogonality() -> (bool, String) {
    let fields = random_fields(64, 100, 1);
    let (mut worst_v, mut worst_a) = (0.0f64, 0.0f64);
    for (i, u) in fields.iter().enumerate() {
        let v = &fields[(i + 1) % fields.len()];
        let (nu, nv) = (norm_hs(u, 1.0), norm_hs(v, 1.0));
        let a = inner_hs(&bilinear(u, v).unwrap(), v, 0.0).unwrap().abs();
        worst_v = worst_v.max(a / (nu * nv * nv));
        let au = stokes_apply(u, 2.0);
        let b = inner_hs(&bilinear(u, u).unwrap(), &au, 0.0).unwrap().abs();
        worst_a = worst_a.max(b / (nu * nu * norm_hs(&au, 0.0)));
    }
    (
        worst_v <= ORTHO_TOL && worst_a <= ORTHO_TOL,
        format!("max |<B(u,v),v>|/(|u||v|^2) = {worst_v:.2e}, max |<B(u,u),Au>|/(|u|^2|Au|) = {worst_a:.2e}"),
    )
}

/// `P_σ[(u·∇)v]` on the dealiased square, accumulated over every ordered
/// pair of source modes.
fn convolution_oracle(u: &SpectralField, v: &SpectralField) -> SpectralField {
    let g = u.grid();
    let c = g.dealias_cutoff() as i64;
    let side = (2 * c + 1) as usize;
    let slot = |k1: i64, k2: i64| ((k1 + c) as usize) * side + (k2 + c) as usize;
    let mut acc = vec![[Complex64::new(0.0, 0.0); 2]; side * side];
    for p1 in -c..=c {
        for p2 in -c..=c {
            let up = u.coeff(p1, p2).unwrap();
            for q1 in -c..=c {
                for q2 in -c..=c {
                    let (k1, k2) = (p1 + q1, p2 + q2);
                    if k1.abs() > c || k2.abs() > c {
                        continue;
                    }
                    let vq = v.coeff(q1, q2).unwrap();
                    let adv = Complex64::i() * (up[0] * q1 as f64 + up[1] * q2 as f64);
                    let s = &mut acc[slot(k1, k2)];
                    s[0] += adv * vq[0];
                    s[1] += adv * vq[1];
                }
            }
        }
    }
    let mut out = SpectralField::zeros(g);
    for k1 in -c..=c {
        for k2 in -c..=c {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let [a, b] = acc[slot(k1, k2)];
            let (f1, f2) = (k1 as f64, k2 as f64);
            let ksq = f1 * f1 + f2 * f2;
            let m = [[1.0 - f1 * f1 / ksq, -f1 * f2 / ksq], [-f1 * f2 / ksq, 1.0 - f2 * f2 / ksq]];
            out.set_mode(k1, k2, [a * m[0][0] + b * m[0][1], a * m[1][0] + b * m[1][1]])
                .unwrap();
        }
    }
    out
}

fn oracle() -> (bool, String) {
    let fields = random_fields(8, 40, 2);
    let mut worst = 0.0f64;
    for pair in fields.chunks(2) {
        let fast = bilinear(&pair[0], &pair[1]).unwrap();
        let slow = convolution_oracle(&pair[0], &pair[1]);
        worst = worst.max(fast.relative_distance(&slow));
    }
    (worst <= ORACLE_TOL, format!("20 pairs, max relative difference {worst:.2e}"))
}

fn balance_residual(dt: f64, steps: usize) -> f64 {
    let g = GridSpec::new(64).unwrap();
    let nu = 0.05;
    let amp = 20.0 * nu * nu / (2f64.sqrt() * std::f64::consts::PI);
    let p = SystemParams {
        nu,
        nu_tilde: 2.0 * nu,
        mu: 5.0,
        n_obs: 8,
        dt,
        forcing: ForcingSpec::kolmogorov(2, amp),
        constants: TheoremConstants::default(),
    };
    let model = FlowModel::new(g, p.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u0 = SpectralField::random_solenoidal(g, &mut rng, 1.0, 5.0, 1.0);
    let ut0 = SpectralField::random_solenoidal(g, &mut rng, 1.0, 5.0, 0.5);
    let stats = force_stats(model.forcing(), &p, 3).unwrap();
    let mut rec = Recorder::new(1, stats);
    let s0 = PairState::new(0.0, u0, ut0);
    rec.record(&model, &s0).unwrap();
    model.integrate_window(s0, dt * steps as f64, &mut rec).unwrap();
    power_balance(&rec.finish(), p.mu, p.nu).unwrap().max_residual_e
}

fn balance() -> (bool, String) {
    let dt = 0.004;
    let coarse = balance_residual(dt, 500);
    let fine = balance_residual(dt / 2.0, 1000);
    let ratio = coarse / fine;
    (
        (BALANCE_RATIO.0..=BALANCE_RATIO.1).contains(&ratio),
        format!("max residual {coarse:.3e} at dt, {fine:.3e} at dt/2, ratio {ratio:.3}"),
    )
}

fn run_config(text: &str, out: &Path) -> RunSummary {
    let mut cfg = ExperimentConfig::from_toml_str(text, Path::new("config.toml")).unwrap();
    cfg.run.output_dir = out.to_path_buf();
    run_experiment(&cfg).unwrap()
}

fn sync(s: &RunSummary) -> (bool, String) {
    let y = s.sync.as_ref().unwrap();
    let mu = s.params.mu;
    let rate = y.fitted_rate.unwrap_or(f64::NAN);
    let ok = s.t_final <= SYNC_HORIZON && y.orders_of_decay >= SYNC_ORDERS && y.monotone && rate <= -mu / 4.0;
    (
        ok,
        format!(
            "|Aw|^2 fell {:.1} orders by t = {}, {} non-monotone windows above floor, fitted rate {rate:.2} (need <= {:.2})",
            y.orders_of_decay,
            s.t_final,
            y.non_monotone_windows,
            -mu / 4.0
        ),
    )
}

fn estimator(s: &RunSummary) -> (bool, String) {
    let e = s.estimation.as_ref().unwrap();
    let betas_ok = e.betas.len() == e.accepted_updates && e.betas.iter().all(|&b| b < 1.0);
    let ok = e.accepted_updates >= MIN_ACCEPTED && betas_ok && e.final_rel_error <= NU_REL_TOL && e.all_positive;
    let betas: Vec<String> = e.betas.iter().map(|b| format!("{b:.4}")).collect();
    (
        ok,
        format!(
            "{} accepted, betas [{}], final relative error {:.2e}, all nu_m > 0: {}",
            e.accepted_updates,
            betas.join(", "),
            e.final_rel_error,
            e.all_positive
        ),
    )
}

fn identity(dir: &Path) -> (bool, String) {
    let trace: nse_nudge::estimator::EstimationTrace =
        serde_json::from_str(&fs::read_to_string(dir.join("trace.json")).unwrap()).unwrap();
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut ok = true;
    for u in trace.accepted() {
        let Some(id) = u.identity else {
            ok = false;
            continue;
        };
        count += 1;
        let r = id.error / id.residual_bound;
        worst = worst.max(r);
        ok &= id.error <= IDENTITY_FACTOR * id.residual_bound;
    }
    ok &= count >= MIN_ACCEPTED;
    (ok, format!("{count} updates checked, worst error / residual bound = {worst:.3}"))
}

fn envelope(twin: &RunSummary) -> (bool, String) {
    let g = GridSpec::new(64).unwrap();
    let p = SystemParams {
        nu: 0.05,
        nu_tilde: 0.05,
        mu: 5.0,
        n_obs: 8,
        dt: 0.01,
        forcing: ForcingSpec::kolmogorov(2, 0.0),
        constants: TheoremConstants::default(),
    };
    let model = FlowModel::new(g, p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u0 = SpectralField::random_solenoidal(g, &mut rng, 1.0, 12.0, 2.0);
    let (_, rep) = model.spin_up(&u0, 10.0).unwrap();
    let unforced = h1_envelope_violations(&rep.h1_samples, 0.05, 0.0, ENVELOPE_REL_TOL).len();
    let ball = twin.bounds.as_ref().unwrap().get("ref_H1_ball").unwrap();
    let spin = twin.spin_up.as_ref().unwrap();
    let ok = unforced == 0 && ball.violations == 0 && ball.samples == twin.records && spin.envelope_violations == 0;
    (
        ok,
        format!(
            "unforced: {unforced} of {} samples violate; forced: {} of {} records exceed R1 (worst |u|/R1 = {:.3}); spin-up envelope violations {}",
            rep.h1_samples.len(),
            ball.violations,
            ball.samples,
            ball.worst_ratio,
            spin.envelope_violations
        ),
    )
}

fn algebra(runs: &[&RunSummary]) -> (bool, String) {
    let mut total = 0;
    let mut records = 0;
    for s in runs {
        let a = s.algebra.as_ref().unwrap();
        total += a.total_violations;
        records += a.checks[0].samples;
    }
    (total == 0 && records > 0, format!("{records} records, {total} violations"))
}

fn determinism(first: &Path, second: &Path, s: &RunSummary) -> (bool, String) {
    let mut differing = Vec::new();
    for file in s.artifacts.values() {
        let a = fs::read(first.join(file)).unwrap();
        let b = fs::read(second.join(file)).unwrap();
        if a != b {
            differing.push(file.clone());
        }
    }
    (
        differing.is_empty(),
        format!("{} artifacts compared, differing: {differing:?}", s.artifacts.len()),
    )
}

#[test]
fn acceptance() {
    let mut out = Vec::new();
    out.push(timed(1, "bilinear orthogonality", 10.0, orthogonality));
    out.push(timed(2, "convolution oracle", 5.0, oracle));
    out.push(timed(3, "balance identity order", 60.0, balance));

    let sync_dir = tempfile::tempdir().unwrap();
    let mut sync_run = None;
    out.push(timed(4, "synchronization", 180.0, || {
        let s = run_config(SYNC_TOML, sync_dir.path());
        let r = sync(&s);
        sync_run = Some(s);
        r
    }));
    let sync_run = sync_run.unwrap();

    let twin_dir = tempfile::tempdir().unwrap();
    let mut twin_run = None;
    out.push(timed(5, "estimator convergence", 300.0, || {
        let s = run_config(TWIN_TOML, twin_dir.path());
        let r = estimator(&s);
        twin_run = Some(s);
        r
    }));
    let twin_run = twin_run.unwrap();

    out.push(timed(6, "inversion identity", 60.0, || identity(twin_dir.path())));
    out.push(timed(7, "envelope bounds", 60.0, || envelope(&twin_run)));
    out.push(timed(8, "diagnostics algebra", 1.0, || algebra(&[&sync_run, &twin_run])));

    let rerun_dir = tempfile::tempdir().unwrap();
    out.push(timed(9, "determinism", 300.0, || {
        run_config(TWIN_TOML, rerun_dir.path());
        determinism(twin_dir.path(), rerun_dir.path(), &twin_run)
    }));

    let failed: Vec<usize> = out.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("{} of {} criteria passed", out.len() - failed.len(), out.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
