use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated Fourier lattice on the periodic box `[0, 2π]²`.
///
/// Coefficients are stored in FFT order: index `i` along an axis holds
/// wavenumber `i` for `i <= n/2` and `i - n` otherwise, so the lattice is
/// `{-n/2+1, ..., n/2}` in each component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    dealias_cutoff: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "mode count must be even and >= 8, got {n}"
            )));
        }
        Ok(Self {
            n,
            dealias_cutoff: n / 3,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest retained `|k_i|` under the two-thirds rule.
    #[inline]
    pub fn dealias_cutoff(&self) -> usize {
        self.dealias_cutoff
    }

    #[inline]
    pub fn domain_length(&self) -> f64 {
        2.0 * std::f64::consts::PI
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Wavenumber held at axis index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Axis index for wavenumber `k`, if it lies on the lattice.
    #[inline]
    pub fn axis_index(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k > half || k <= -half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.n as i64) as usize)
        }
    }

    /// Flat index of `(k1, k2)`; `k1` runs along the slow axis.
    #[inline]
    pub fn index(&self, k1: i64, k2: i64) -> Option<usize> {
        Some(self.axis_index(k1)? * self.n + self.axis_index(k2)?)
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> (i64, i64) {
        (self.wavenumber(idx / self.n), self.wavenumber(idx % self.n))
    }

    /// Index of `-k`, wrapping the Nyquist row onto itself.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let (a, b) = (idx / self.n, idx % self.n);
        ((self.n - a) % self.n) * self.n + (self.n - b) % self.n
    }

    #[inline]
    pub fn is_dealiased_mode(&self, k1: i64, k2: i64) -> bool {
        let c = self.dealias_cutoff as i64;
        k1.abs() <= c && k2.abs() <= c
    }

    /// Size of the physical grid used for quadratic products. It is the
    /// smallest even size exceeding `3 * cutoff`, which makes the product of
    /// two dealiased fields alias-free on the retained square.
    pub fn product_size(&self) -> usize {
        let m = 3 * self.dealias_cutoff + 1;
        let m = m + m % 2;
        m.max(self.n)
    }

    /// Iterator over `(flat index, k1, k2)` for every lattice point.
    pub fn modes(&self) -> impl Iterator<Item = (usize, i64, i64)> + '_ {
        (0..self.len()).map(move |idx| {
            let (k1, k2) = self.wavevector(idx);
            (idx, k1, k2)
        })
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            Err(Error::IncompatibleGrids {
                left: self.n,
                right: other.n,
            })
        } else {
            Ok(())
        }
    }
}
