//! Self-test suites for the spectral operators on random fields.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectral::{
    bilinear, highpass, inner_hs, leray_project, lowpass, norm_hs, stokes_apply, GridSpec, SpectralField, PLANCHEREL,
};

pub const DIVERGENCE_TOL: f64 = 1e-12;
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
pub const ROUND_TRIP_TOL: f64 = 1e-12;
pub const DISCRETE_L2_TOL: f64 = 1e-10;
pub const BILINEARITY_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 1e-12;
/// Grid of the direct-convolution comparison.
pub const ORACLE_N: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    /// Largest normalized defect seen.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n: usize,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

struct Suite {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    worst: f64,
}

impl Suite {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            cases: 0,
            worst: 0.0,
        }
    }

    fn observe(&mut self, defect: f64) {
        self.cases += 1;
        // NaN must fail the suite
        if defect.is_nan() || defect > self.worst {
            self.worst = if defect.is_nan() { f64::INFINITY } else { defect };
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name.into(),
            cases: self.cases,
            worst: self.worst,
            tolerance: self.tolerance,
            passed: self.worst <= self.tolerance,
        }
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

fn random_field(grid: GridSpec, rng: &mut ChaCha8Rng) -> SpectralField {
    let kmax = grid.dealias_cutoff() as f64 * std::f64::consts::SQRT_2;
    SpectralField::random_solenoidal(grid, rng, 1.0, kmax, 1.0)
}

/// Random real mean-free field that is not divergence-free.
fn random_gradient_mix(grid: GridSpec, rng: &mut ChaCha8Rng) -> SpectralField {
    let a = random_field(grid, rng);
    let b = random_field(grid, rng);
    // rotating b by 90 degrees pointwise breaks incompressibility
    let [b1, b2] = b.to_physical();
    let rot = SpectralField::from_physical(grid, &b2, &b1).expect("same grid");
    let mut out = a;
    out.axpy(1.0, &rot.dealiased());
    out
}

/// `P_σ[(u·∇)v]` by direct summation over all interacting wavevector
/// pairs of the dealiased square. Cost is quartic in the number of modes.
pub fn bilinear_direct(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    let grid = u.grid();
    grid.check_same(&v.grid())?;
    let c = grid.dealias_cutoff() as i64;
    let i = Complex64::i();
    let mut out = SpectralField::zeros(grid);
    for k1 in -c..=c {
        for k2 in -c..=c {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let mut acc = [Complex64::new(0.0, 0.0); 2];
            for p1 in -c..=c {
                for p2 in -c..=c {
                    let (q1, q2) = (k1 - p1, k2 - p2);
                    if q1.abs() > c || q2.abs() > c {
                        continue;
                    }
                    let up = u.coeff(p1, p2).expect("on lattice");
                    let vq = v.coeff(q1, q2).expect("on lattice");
                    let adv = up[0] * i * q1 as f64 + up[1] * i * q2 as f64;
                    acc[0] += adv * vq[0];
                    acc[1] += adv * vq[1];
                }
            }
            out.set_mode(k1, k2, acc)?;
        }
    }
    leray_project(&out)
}

/// Runs every suite with `cases` random fields per suite.
pub fn run_verify_suites(grid: GridSpec, seed: u64, cases: usize) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut div = Suite::new("divergence_free_outputs", DIVERGENCE_TOL);
    let mut ortho_v = Suite::new("orthogonality_b_uv_v", ORTHOGONALITY_TOL);
    let mut ortho_a = Suite::new("orthogonality_b_uu_au", ORTHOGONALITY_TOL);
    let mut round = Suite::new("plancherel_round_trip", ROUND_TRIP_TOL);
    let mut disc = Suite::new("discrete_l2_norm", DISCRETE_L2_TOL);
    let mut equiv = Suite::new("norm_equivalence", 0.0);
    let mut bilin = Suite::new("bilinearity", BILINEARITY_TOL);
    let mut split = Suite::new("lowpass_highpass_split", 0.0);
    let mut split_orth = Suite::new("lowpass_highpass_orthogonal", ORTHOGONALITY_TOL);
    let mut oracle = Suite::new("bilinear_direct_oracle", ORACLE_TOL);

    let n = grid.n();
    for case in 0..cases {
        let u = random_field(grid, &mut rng);
        let v = random_field(grid, &mut rng);
        let mix = random_gradient_mix(grid, &mut rng);

        let p = leray_project(&mix)?;
        div.observe(ratio(p.max_divergence(), p.max_abs()));
        let b_uv = bilinear(&u, &v)?;
        div.observe(ratio(b_uv.max_divergence(), b_uv.max_abs()));

        let (nu1, nv1) = (norm_hs(&u, 1.0), norm_hs(&v, 1.0));
        ortho_v.observe(ratio(inner_hs(&b_uv, &v, 0.0)?.abs(), nu1 * nv1 * nv1));
        let b_uu = bilinear(&u, &u)?;
        let au = stokes_apply(&u, 2.0);
        ortho_a.observe(ratio(inner_hs(&b_uu, &au, 0.0)?.abs(), nu1 * nu1 * norm_hs(&au, 0.0)));

        let [x1, x2] = mix.to_physical();
        let back = SpectralField::from_physical(grid, &x1, &x2)?;
        round.observe(back.relative_distance(&mix));
        let cell = PLANCHEREL / (n * n) as f64;
        let l2_phys = (cell * x1.iter().chain(&x2).map(|a| a * a).sum::<f64>()).sqrt();
        disc.observe(ratio((l2_phys - norm_hs(&mix, 0.0)).abs(), norm_hs(&mix, 0.0)));

        for s in [0.0, 0.5, 1.0, 2.0, 3.0] {
            let hom = norm_hs(&mix, s).powi(2);
            let mut inhom = 0.0;
            for (idx, k1, k2) in grid.modes() {
                let ksq = (k1 * k1 + k2 * k2) as f64;
                let c = mix.component(0)[idx].norm_sqr() + mix.component(1)[idx].norm_sqr();
                inhom += (1.0 + ksq).powf(s) * c;
            }
            inhom *= PLANCHEREL;
            // one ulp-scale slack on each side
            let slack = 1e-13 * inhom;
            let lo = (hom - inhom - slack).max(0.0);
            let hi = (inhom - 2f64.powf(s) * hom - slack).max(0.0);
            equiv.observe(ratio(lo + hi, inhom));
        }

        let (alpha, beta) = (-1.7 + case as f64 * 0.3, 0.45);
        let lhs = bilinear(&(&u * alpha), &(&v * beta))?;
        bilin.observe(lhs.relative_distance(&(&b_uv * (alpha * beta))));

        let cutoff = (case % grid.dealias_cutoff()) + 1;
        let low = lowpass(&mix, cutoff)?;
        let high = highpass(&mix, cutoff)?;
        let mut sum = low.clone();
        sum.axpy(1.0, &high);
        split.observe(sum.relative_distance(&mix));
        for s in [0.0, 1.0, 2.0] {
            let denom = norm_hs(&low, s) * norm_hs(&high, s);
            split_orth.observe(ratio(inner_hs(&low, &high, s)?.abs(), denom.max(f64::MIN_POSITIVE)));
        }
    }

    let small = GridSpec::new(ORACLE_N)?;
    for _ in 0..cases {
        let u = random_field(small, &mut rng);
        let v = random_field(small, &mut rng);
        let fast = bilinear(&u, &v)?;
        let slow = bilinear_direct(&u, &v)?;
        oracle.observe(fast.relative_distance(&slow));
    }

    let suites: Vec<SuiteResult> = [div, ortho_v, ortho_a, round, disc, equiv, bilin, split, split_orth, oracle]
        .into_iter()
        .map(Suite::finish)
        .collect();
    Ok(VerifyReport {
        n,
        seed,
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}
