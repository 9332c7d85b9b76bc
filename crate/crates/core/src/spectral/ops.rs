//! Exact spectral operators: Leray projection, Stokes powers, the
//! dealiased bilinear form, low-pass filtering and Sobolev norms.

use num_complex::Complex64;

use super::fft;
use super::field::{SpectralField, PLANCHEREL};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative size of `v̂(0)` above which a field counts as having a mean.
pub const MEAN_TOLERANCE: f64 = 1e-12;

fn check_mean_free(v: &SpectralField) -> Result<()> {
    let [a, b] = v.mean();
    let mean = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if mean > MEAN_TOLERANCE * v.max_abs() {
        return Err(Error::ContractViolation(format!(
            "field has nonzero mean (|v̂(0)| = {mean:e})"
        )));
    }
    Ok(())
}

/// Orthogonal projection onto divergence-free fields,
/// `v̂ⁱ(k) ← (δᵢⱼ - kᵢkⱼ/|k|²) v̂ʲ(k)`.
pub fn leray_project(v: &SpectralField) -> Result<SpectralField> {
    check_mean_free(v)?;
    Ok(project_unchecked(v))
}

fn project_unchecked(v: &SpectralField) -> SpectralField {
    v.map_modes(|k1, k2, ksq, [a, b]| {
        if ksq == 0.0 {
            return [ZERO, ZERO];
        }
        let (k1, k2) = (k1 as f64, k2 as f64);
        let kdotv = (a * k1 + b * k2) / ksq;
        [a - kdotv * k1, b - kdotv * k2]
    })
}

/// `A^{s/2} v`, i.e. multiplication by `|k|^s` on each mode. The mean is
/// dropped, which makes negative powers well defined.
pub fn stokes_apply(v: &SpectralField, s: f64) -> SpectralField {
    v.map_modes(|_, _, ksq, [a, b]| {
        if ksq == 0.0 {
            [ZERO, ZERO]
        } else {
            let w = ksq.powf(0.5 * s);
            [a * w, b * w]
        }
    })
}

/// `P_N v`: keeps modes with Euclidean `|k| <= cutoff`.
pub fn lowpass(v: &SpectralField, cutoff: usize) -> Result<SpectralField> {
    let max = v.grid().dealias_cutoff();
    if cutoff < 1 || cutoff > max {
        return Err(Error::InvalidCutoff { cutoff, max });
    }
    let nsq = (cutoff * cutoff) as f64;
    Ok(v.map_modes(|_, _, ksq, c| if ksq <= nsq { c } else { [ZERO, ZERO] }))
}

/// `Q_N v = v - P_N v`.
pub fn highpass(v: &SpectralField, cutoff: usize) -> Result<SpectralField> {
    let low = lowpass(v, cutoff)?;
    Ok(v - &low)
}

/// Homogeneous Sobolev norm `(2π)(Σ_{k≠0} |k|^{2s} |v̂(k)|²)^{1/2}`.
pub fn norm_hs(v: &SpectralField, s: f64) -> f64 {
    weighted_sum(v, v, s).sqrt()
}

/// `Re (2π)² Σ_{k≠0} |k|^{2s} û(k)·conj(v̂(k))`.
pub fn inner_hs(u: &SpectralField, v: &SpectralField, s: f64) -> Result<f64> {
    u.grid().check_same(&v.grid())?;
    Ok(weighted_sum(u, v, s))
}

fn weighted_sum(u: &SpectralField, v: &SpectralField, s: f64) -> f64 {
    let grid = u.grid();
    let (u1, u2) = (u.component(0), u.component(1));
    let (v1, v2) = (v.component(0), v.component(1));
    let integer_power = (s == s.trunc() && s.abs() <= 8.0).then_some(s as i32);
    let mut acc = 0.0;
    for (idx, k1, k2) in grid.modes().skip(1) {
        let ksq = (k1 * k1 + k2 * k2) as f64;
        let dot = (u1[idx] * v1[idx].conj()).re + (u2[idx] * v2[idx].conj()).re;
        if dot == 0.0 {
            continue;
        }
        let w = match integer_power {
            Some(p) => ksq.powi(p),
            None => ksq.powf(s),
        };
        acc += w * dot;
    }
    PLANCHEREL * acc
}

/// `B(u, v) = P_σ[(u·∇)v]`, computed pseudo-spectrally.
///
/// Inputs are restricted to the dealiased square, products are formed on a
/// physical grid of [`GridSpec::product_size`](super::GridSpec::product_size)
/// points per side so that no quadratic aliasing reaches the retained modes,
/// and the result is truncated back to the square and Leray-projected.
pub fn bilinear(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    let grid = u.grid();
    grid.check_same(&v.grid())?;
    let n = grid.n();
    let m = grid.product_size();
    let cut = grid.dealias_cutoff() as i64;
    let plan = fft::plan(m);

    let (u1, u2) = (u.component(0), u.component(1));
    let (v1, v2) = (v.component(0), v.component(1));
    let i = Complex64::i();

    // Packed pairs of real signals: (u¹, u²), (∂₁v¹, ∂₂v¹), (∂₁v², ∂₂v²).
    let mut pu = vec![ZERO; m * m];
    let mut pv1 = vec![ZERO; m * m];
    let mut pv2 = vec![ZERO; m * m];
    let embed = |k: i64| -> usize { k.rem_euclid(m as i64) as usize };
    for k1 in -cut..=cut {
        for k2 in -cut..=cut {
            let src = grid.axis_index(k1).unwrap() * n + grid.axis_index(k2).unwrap();
            let dst = embed(k1) * m + embed(k2);
            let (d1, d2) = (i * k1 as f64, i * k2 as f64);
            pu[dst] = u1[src] + i * u2[src];
            pv1[dst] = d1 * v1[src] + i * (d2 * v1[src]);
            pv2[dst] = d1 * v2[src] + i * (d2 * v2[src]);
        }
    }
    plan.inverse(&mut pu);
    plan.inverse(&mut pv1);
    plan.inverse(&mut pv2);

    // (u·∇)vⁱ = u¹∂₁vⁱ + u²∂₂vⁱ, packed as re/im of one buffer.
    let mut prod = pu;
    for ((p, a), b) in prod.iter_mut().zip(&pv1).zip(&pv2) {
        let (x, y) = (p.re, p.im);
        *p = Complex64::new(x * a.re + y * a.im, x * b.re + y * b.im);
    }
    plan.forward(&mut prod);

    let scale = 1.0 / (m * m) as f64;
    let mut out = SpectralField::zeros(grid);
    {
        let (c1, c2) = out.components_mut();
        for k1 in -cut..=cut {
            for k2 in -cut..=cut {
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                let src = embed(k1) * m + embed(k2);
                let csrc = embed(-k1) * m + embed(-k2);
                let z = prod[src];
                let zc = prod[csrc].conj();
                let a = (z + zc) * (0.5 * scale);
                let b = (z - zc) * Complex64::new(0.0, -0.5 * scale);
                // Leray projection
                let (f1, f2) = (k1 as f64, k2 as f64);
                let kdot = (a * f1 + b * f2) / (f1 * f1 + f2 * f2);
                let dst = grid.axis_index(k1).unwrap() * n + grid.axis_index(k2).unwrap();
                c1[dst] = a - kdot * f1;
                c2[dst] = b - kdot * f2;
            }
        }
    }
    Ok(out)
}
