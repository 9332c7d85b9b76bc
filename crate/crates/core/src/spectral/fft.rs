//! Square 2D complex FFTs with a process-wide plan cache.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft2d {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft2d>>>> = OnceLock::new();

pub(crate) fn plan(n: usize) -> Arc<Fft2d> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().expect("fft plan cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Fft2d {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

impl Fft2d {
    /// Unnormalised forward transform, `X(k) = Σ_x x(x) e^{-i k·x}`.
    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.run(&*self.forward, buf);
    }

    /// Unnormalised inverse transform, `x(x) = Σ_k X(k) e^{+i k·x}`.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.run(&*self.inverse, buf);
    }

    fn run(&self, fft: &dyn Fft<f64>, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n * self.n);
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(buf, &mut scratch);
        transpose(buf, self.n);
        fft.process_with_scratch(buf, &mut scratch);
        transpose(buf, self.n);
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_then_inverse_scales_by_len() {
        let n = 8;
        let p = plan(n);
        let orig: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut buf = orig.clone();
        p.forward(&mut buf);
        p.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a / (n * n) as f64 - b).norm() < 1e-13);
        }
    }

    #[test]
    fn single_mode_lands_on_its_index() {
        let n = 8;
        let p = plan(n);
        // exp(i(2x - y)) sampled on the grid
        let mut buf: Vec<Complex64> = (0..n * n)
            .map(|idx| {
                let (a, b) = (idx / n, idx % n);
                let h = 2.0 * std::f64::consts::PI / n as f64;
                Complex64::from_polar(1.0, 2.0 * a as f64 * h - b as f64 * h)
            })
            .collect();
        p.forward(&mut buf);
        let hit = 2 * n + (n - 1);
        for (i, c) in buf.iter().enumerate() {
            let expect = if i == hit { (n * n) as f64 } else { 0.0 };
            assert!((c.re - expect).abs() < 1e-10 && c.im.abs() < 1e-10);
        }
    }
}
