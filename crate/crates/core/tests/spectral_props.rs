use nse_nudge::harness::bilinear_direct;
use nse_nudge::spectral::{
    bilinear, highpass, inner_hs, leray_project, lowpass, norm_hs, stokes_apply, GridSpec, SpectralField, PLANCHEREL,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(n: usize, seed: u64) -> SpectralField {
    let g = GridSpec::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralField::random_solenoidal(g, &mut rng, 1.0, g.dealias_cutoff() as f64 * 1.5, 1.0)
}

/// Physical-space oracle: `(u·∇)v` from analytic derivatives of the
/// trigonometric sums, evaluated pointwise on a fine grid, then read back
/// as Fourier coefficients by exact quadrature and projected.
fn physical_oracle(u: &SpectralField, v: &SpectralField) -> SpectralField {
    let g = u.grid();
    let c = g.dealias_cutoff() as i64;
    // 2c interacting modes per axis need 4c+1 points to integrate exactly
    let m = (4 * c + 2) as usize;
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let modes: Vec<(i64, i64)> = (-c..=c).flat_map(|a| (-c..=c).map(move |b| (a, b))).collect();
    let eval = |f: &SpectralField, x: f64, y: f64| -> [[f64; 3]; 2] {
        let mut out = [[0.0; 3]; 2];
        for &(k1, k2) in &modes {
            let e = Complex64::from_polar(1.0, k1 as f64 * x + k2 as f64 * y);
            let co = f.coeff(k1, k2).unwrap();
            for i in 0..2 {
                let z = co[i] * e;
                out[i][0] += z.re;
                out[i][1] += (z * Complex64::new(0.0, k1 as f64)).re;
                out[i][2] += (z * Complex64::new(0.0, k2 as f64)).re;
            }
        }
        out
    };
    let mut prod = vec![[0.0f64; 2]; m * m];
    for a in 0..m {
        for b in 0..m {
            let (x, y) = (a as f64 * h, b as f64 * h);
            let (uu, vv) = (eval(u, x, y), eval(v, x, y));
            for i in 0..2 {
                prod[a * m + b][i] = uu[0][0] * vv[i][1] + uu[1][0] * vv[i][2];
            }
        }
    }
    let mut out = SpectralField::zeros(g);
    for &(k1, k2) in &modes {
        if k1 == 0 && k2 == 0 {
            continue;
        }
        let mut acc = [Complex64::new(0.0, 0.0); 2];
        for a in 0..m {
            for b in 0..m {
                let e = Complex64::from_polar(1.0, -(k1 as f64 * a as f64 * h + k2 as f64 * b as f64 * h));
                for i in 0..2 {
                    acc[i] += e * prod[a * m + b][i];
                }
            }
        }
        let s = 1.0 / (m * m) as f64;
        out.set_mode(k1, k2, [acc[0] * s, acc[1] * s]).unwrap();
    }
    leray_project(&out).unwrap()
}

#[test]
fn bilinear_matches_direct_convolution_on_8x8() {
    for seed in 0..20 {
        let u = field(8, 2 * seed);
        let v = field(8, 2 * seed + 1);
        let fast = bilinear(&u, &v).unwrap();
        let direct = bilinear_direct(&u, &v).unwrap();
        assert!(fast.relative_distance(&direct) < 1e-12, "seed {seed}");
    }
}

#[test]
fn direct_convolution_matches_physical_quadrature() {
    for seed in 0..3 {
        let u = field(8, 100 + seed);
        let v = field(8, 200 + seed);
        let d = bilinear_direct(&u, &v).unwrap();
        let p = physical_oracle(&u, &v);
        assert!(d.relative_distance(&p) < 1e-12, "seed {seed}: {}", d.relative_distance(&p));
    }
}

#[test]
fn two_mode_fields_against_hand_product() {
    // u = (sin y, 0): (u·∇)v = sin y ∂₁v; v = (0, cos x) gives (0, -sin x sin y)
    let g = GridSpec::new(8).unwrap();
    let u = SpectralField::from_fn(g, |_, y| [y.sin(), 0.0]);
    let v = SpectralField::from_fn(g, |x, _| [0.0, x.cos()]);
    let want = leray_project(&SpectralField::from_fn(g, |x, y| [0.0, -x.sin() * y.sin()])).unwrap();
    assert!(bilinear(&u, &v).unwrap().relative_distance(&want) < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn outputs_are_divergence_free(seed in any::<u64>(), n in prop::sample::select(vec![8usize, 16, 32])) {
        let u = field(n, seed);
        let v = field(n, seed ^ 0x5555);
        let b = bilinear(&u, &v).unwrap();
        prop_assert!(b.max_divergence() <= 1e-12 * b.max_abs());
        prop_assert!(b.is_dealiased());
        prop_assert!(b.conjugate_symmetry_error() <= 1e-14 * b.max_abs());
        let l = leray_project(&b).unwrap();
        prop_assert!(l.relative_distance(&b) < 1e-14);
    }

    #[test]
    fn trilinear_orthogonality(seed in any::<u64>()) {
        let u = field(32, seed);
        let v = field(32, seed.wrapping_add(1));
        let (nu, nv) = (norm_hs(&u, 1.0), norm_hs(&v, 1.0));
        let a = inner_hs(&bilinear(&u, &v).unwrap(), &v, 0.0).unwrap();
        prop_assert!(a.abs() <= 1e-10 * nu * nv * nv);
        let au = stokes_apply(&u, 2.0);
        let b = inner_hs(&bilinear(&u, &u).unwrap(), &au, 0.0).unwrap();
        prop_assert!(b.abs() <= 1e-10 * nu * nu * norm_hs(&au, 0.0));
    }

    #[test]
    fn bilinearity(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let u = field(16, seed);
        let v = field(16, !seed);
        let lhs = bilinear(&(&u * a), &(&v * b)).unwrap();
        let rhs = &bilinear(&u, &v).unwrap() * (a * b);
        prop_assert!(lhs.relative_distance(&rhs) < 1e-13 || rhs.max_abs() == 0.0);
    }

    #[test]
    fn plancherel(seed in any::<u64>()) {
        let v = field(32, seed);
        let [x1, x2] = v.to_physical();
        let back = SpectralField::from_physical(v.grid(), &x1, &x2).unwrap();
        prop_assert!(back.relative_distance(&v) < 1e-12);
        let cell = PLANCHEREL / (32.0 * 32.0);
        let l2 = (cell * x1.iter().chain(&x2).map(|a| a * a).sum::<f64>()).sqrt();
        prop_assert!((l2 - norm_hs(&v, 0.0)).abs() <= 1e-10 * l2);
    }

    #[test]
    fn norm_equivalence(seed in any::<u64>(), s in 0.0f64..4.0) {
        let v = field(16, seed);
        let g = v.grid();
        let mut inhom = 0.0;
        for (idx, k1, k2) in g.modes() {
            let c = v.component(0)[idx].norm_sqr() + v.component(1)[idx].norm_sqr();
            inhom += (1.0 + (k1 * k1 + k2 * k2) as f64).powf(s) * c;
        }
        inhom *= PLANCHEREL;
        let hom = norm_hs(&v, s).powi(2);
        prop_assert!(hom <= inhom * (1.0 + 1e-13));
        prop_assert!(inhom <= 2f64.powf(s) * hom * (1.0 + 1e-13));
    }

    #[test]
    fn lowpass_split(seed in any::<u64>(), cutoff in 1usize..=10) {
        let v = field(32, seed);
        let low = lowpass(&v, cutoff).unwrap();
        let high = highpass(&v, cutoff).unwrap();
        let mut sum = low.clone();
        sum.axpy(1.0, &high);
        prop_assert!(sum.relative_distance(&v) == 0.0);
        for s in [0.0, 1.0, 2.0] {
            prop_assert!(inner_hs(&low, &high, s).unwrap() == 0.0);
        }
        let again = lowpass(&low, cutoff).unwrap();
        prop_assert!(again.relative_distance(&low) == 0.0);
    }

    #[test]
    fn leray_is_idempotent(seed in any::<u64>()) {
        let u = field(16, seed);
        let v = field(16, seed ^ 1);
        let [a1, a2] = u.to_physical();
        let [b1, b2] = v.to_physical();
        let mixed: Vec<f64> = a1.iter().zip(&b2).map(|(x, y)| x + y).collect();
        let mixed2: Vec<f64> = a2.iter().zip(&b1).map(|(x, y)| x - y).collect();
        let w = SpectralField::from_physical(u.grid(), &mixed, &mixed2).unwrap();
        let p = leray_project(&w).unwrap();
        let pp = leray_project(&p).unwrap();
        prop_assert!(pp.relative_distance(&p) < 1e-15);
        prop_assert!(p.max_divergence() <= 1e-12 * p.max_abs());
        prop_assert!(norm_hs(&p, 0.0) <= norm_hs(&w, 0.0) * (1.0 + 1e-14));
    }
}
