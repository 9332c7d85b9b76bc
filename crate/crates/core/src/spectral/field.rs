use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::fft;
use super::grid::GridSpec;
use crate::error::{Error, Result};

/// `(2π)²`, the Plancherel factor relating coefficient sums to integrals
/// over the torus. Coefficients follow `v̂(k) = (2π)⁻² ∫ v e^{-ik·x} dx`,
/// so `∫|v|² dx = PLANCHEREL · Σ_k |v̂(k)|²`. Every norm and inner product
/// in this crate carries this factor, and nowhere else.
pub const PLANCHEREL: f64 = 4.0 * PI * PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Real 2D vector field held as Fourier coefficients `(û¹(k), û²(k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: [Vec<Complex64>; 2],
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: [vec![ZERO; grid.len()], vec![ZERO; grid.len()]],
        }
    }

    pub(crate) fn from_parts(grid: GridSpec, c1: Vec<Complex64>, c2: Vec<Complex64>) -> Self {
        debug_assert_eq!(c1.len(), grid.len());
        debug_assert_eq!(c2.len(), grid.len());
        Self {
            grid,
            coeffs: [c1, c2],
        }
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn component(&self, i: usize) -> &[Complex64] {
        &self.coeffs[i]
    }

    #[inline]
    pub(crate) fn components_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        let [a, b] = &mut self.coeffs;
        (a, b)
    }

    /// Coefficient pair at wavevector `k`, if `k` is on the lattice.
    pub fn coeff(&self, k1: i64, k2: i64) -> Option<[Complex64; 2]> {
        let idx = self.grid.index(k1, k2)?;
        Some([self.coeffs[0][idx], self.coeffs[1][idx]])
    }

    /// Sets `v̂(k) = c` and `v̂(-k) = conj(c)`, keeping the field real.
    pub fn set_mode(&mut self, k1: i64, k2: i64, c: [Complex64; 2]) -> Result<()> {
        let idx = self.grid.index(k1, k2).ok_or(Error::WavenumberOutOfRange {
            k1,
            k2,
            cutoff: self.grid.n() / 2,
        })?;
        let cidx = self.grid.conjugate_index(idx);
        for (comp, val) in self.coeffs.iter_mut().zip(c) {
            comp[idx] = val;
            comp[cidx] = val.conj();
        }
        Ok(())
    }

    /// Samples `f(x, y)` on the `n × n` physical grid and transforms.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let n = grid.n();
        let h = grid.domain_length() / n as f64;
        let mut u1 = vec![0.0; grid.len()];
        let mut u2 = vec![0.0; grid.len()];
        for a in 0..n {
            for b in 0..n {
                let [p, q] = f(a as f64 * h, b as f64 * h);
                u1[a * n + b] = p;
                u2[a * n + b] = q;
            }
        }
        Self::from_physical(grid, &u1, &u2).expect("sample length matches grid")
    }

    /// Builds a field from physical samples laid out as `[ix * n + iy]`
    /// with `x = 2π ix / n`.
    pub fn from_physical(grid: GridSpec, u1: &[f64], u2: &[f64]) -> Result<Self> {
        if u1.len() != grid.len() || u2.len() != grid.len() {
            return Err(Error::ContractViolation(format!(
                "expected {} physical samples per component",
                grid.len()
            )));
        }
        let mut buf: Vec<Complex64> = u1
            .iter()
            .zip(u2)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        fft::plan(grid.n()).forward(&mut buf);
        let scale = 1.0 / grid.len() as f64;
        let (c1, c2) = unpack_real_pair(grid.n(), &buf, scale);
        Ok(Self::from_parts(grid, c1, c2))
    }

    /// Physical samples of both components on the `n × n` grid.
    pub fn to_physical(&self) -> [Vec<f64>; 2] {
        let mut buf: Vec<Complex64> = self.coeffs[0]
            .iter()
            .zip(&self.coeffs[1])
            .map(|(&a, &b)| a + Complex64::i() * b)
            .collect();
        fft::plan(self.grid.n()).inverse(&mut buf);
        [
            buf.iter().map(|z| z.re).collect(),
            buf.iter().map(|z| z.im).collect(),
        ]
    }

    /// Random real divergence-free zero-mean field supported on
    /// `kmin <= |k| <= kmax`, rescaled so that its L² norm equals `l2_norm`.
    pub fn random_solenoidal<R: Rng + ?Sized>(
        grid: GridSpec,
        rng: &mut R,
        kmin: f64,
        kmax: f64,
        l2_norm: f64,
    ) -> Self {
        let mut out = Self::zeros(grid);
        for (idx, k1, k2) in grid.modes() {
            let k2sum = (k1 * k1 + k2 * k2) as f64;
            if k2sum == 0.0 || !grid.is_dealiased_mode(k1, k2) {
                continue;
            }
            let kk = k2sum.sqrt();
            if kk < kmin || kk > kmax {
                continue;
            }
            // one independent draw per ±k pair
            let cidx = grid.conjugate_index(idx);
            if cidx < idx {
                continue;
            }
            let amp: f64 = rng.sample(StandardNormal);
            let phase: f64 = rng.random::<f64>() * 2.0 * PI;
            // the coefficient direction k⊥/|k| is already solenoidal
            let c = Complex64::from_polar(amp / kk, phase);
            let (e1, e2) = (k2 as f64 / kk, -(k1 as f64) / kk);
            out.coeffs[0][idx] = c * e1;
            out.coeffs[1][idx] = c * e2;
            out.coeffs[0][cidx] = (c * e1).conj();
            out.coeffs[1][cidx] = (c * e2).conj();
        }
        let norm = super::ops::norm_hs(&out, 0.0);
        if norm > 0.0 {
            out.scale_in_place(l2_norm / norm);
        }
        out
    }

    pub fn mean(&self) -> [Complex64; 2] {
        [self.coeffs[0][0], self.coeffs[1][0]]
    }

    /// `max_k |v̂(k)|` using the Euclidean norm of the coefficient pair.
    pub fn max_abs(&self) -> f64 {
        self.coeffs[0]
            .iter()
            .zip(&self.coeffs[1])
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    }

    /// `max_{k≠0} |k·v̂(k)|`.
    pub fn max_divergence(&self) -> f64 {
        self.grid
            .modes()
            .skip(1)
            .map(|(idx, k1, k2)| {
                (self.coeffs[0][idx] * k1 as f64 + self.coeffs[1][idx] * k2 as f64).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max_k |v̂(-k) - conj(v̂(k))|` over wavevectors whose negation is on
    /// the lattice.
    pub fn conjugate_symmetry_error(&self) -> f64 {
        let half = (self.grid.n() / 2) as i64;
        let mut worst: f64 = 0.0;
        for (idx, k1, k2) in self.grid.modes() {
            if k1 == half || k2 == half {
                continue;
            }
            let cidx = self.grid.conjugate_index(idx);
            for c in &self.coeffs {
                worst = worst.max((c[cidx] - c[idx].conj()).norm());
            }
        }
        worst
    }

    /// True when every coefficient outside the dealiased square is zero.
    pub fn is_dealiased(&self) -> bool {
        self.grid.modes().all(|(idx, k1, k2)| {
            self.grid.is_dealiased_mode(k1, k2)
                || (self.coeffs[0][idx] == ZERO && self.coeffs[1][idx] == ZERO)
        })
    }

    /// Copy with every mode outside the dealiased square set to zero.
    pub fn dealiased(&self) -> Self {
        let mut out = self.clone();
        for (idx, k1, k2) in self.grid.modes() {
            if !self.grid.is_dealiased_mode(k1, k2) {
                out.coeffs[0][idx] = ZERO;
                out.coeffs[1][idx] = ZERO;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for c in &mut self.coeffs {
            c.iter_mut().for_each(|z| *z *= s);
        }
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        assert_eq!(self.grid, x.grid, "axpy on incompatible grids");
        for (c, xc) in self.coeffs.iter_mut().zip(&x.coeffs) {
            c.iter_mut().zip(xc).for_each(|(z, &xz)| *z += xz * a);
        }
    }

    /// Applies `f(k1, k2, |k|², [v̂¹, v̂²])` to every mode.
    pub(crate) fn map_modes(
        &self,
        mut f: impl FnMut(i64, i64, f64, [Complex64; 2]) -> [Complex64; 2],
    ) -> Self {
        let mut out = Self::zeros(self.grid);
        for (idx, k1, k2) in self.grid.modes() {
            let ksq = (k1 * k1 + k2 * k2) as f64;
            let [a, b] = f(k1, k2, ksq, [self.coeffs[0][idx], self.coeffs[1][idx]]);
            out.coeffs[0][idx] = a;
            out.coeffs[1][idx] = b;
        }
        out
    }

    /// Largest coefficient difference, relative to the larger field.
    pub fn relative_distance(&self, other: &SpectralField) -> f64 {
        let scale = self.max_abs().max(other.max_abs());
        let diff = (self - other).max_abs();
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

/// Splits `Z = FFT(p1 + i p2)` into the spectra of the real signals `p1`, `p2`.
pub(crate) fn unpack_real_pair(
    n: usize,
    z: &[Complex64],
    scale: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut c1 = vec![ZERO; z.len()];
    let mut c2 = vec![ZERO; z.len()];
    for a in 0..n {
        for b in 0..n {
            let idx = a * n + b;
            let cidx = ((n - a) % n) * n + (n - b) % n;
            let zk = z[idx];
            let zc = z[cidx].conj();
            c1[idx] = (zk + zc) * (0.5 * scale);
            c2[idx] = (zk - zc) * Complex64::new(0.0, -0.5 * scale);
        }
    }
    (c1, c2)
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale_in_place(rhs);
        out
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self * -1.0
    }
}
