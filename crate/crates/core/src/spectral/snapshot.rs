//! Field snapshot format.
//!
//! Text layout, one record per line:
//!
//! ```text
//! nse-nudge-field 1
//! n <modes per dimension>
//! <k1> <k2> <Re û¹> <Im û¹> <Re û²> <Im û²>
//! ...
//! ```
//!
//! Only modes with a nonzero coefficient are listed, in storage order.
//! Reals are written in shortest round-trip exponent form, so reading a
//! snapshot back reproduces the field bit for bit. The same mode tuples
//! are used when a field is embedded in a JSON checkpoint.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::grid::GridSpec;
use crate::error::{Error, Result};

const MAGIC: &str = "nse-nudge-field 1";

/// `(k1, k2, Re û¹, Im û¹, Re û², Im û²)`.
pub type ModeRecord = (i64, i64, f64, f64, f64, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub n: usize,
    pub modes: Vec<ModeRecord>,
}

impl FieldSnapshot {
    pub fn capture(v: &SpectralField) -> Self {
        let grid = v.grid();
        let (c1, c2) = (v.component(0), v.component(1));
        let zero = Complex64::new(0.0, 0.0);
        let modes = grid
            .modes()
            .filter(|&(idx, _, _)| c1[idx] != zero || c2[idx] != zero)
            .map(|(idx, k1, k2)| (k1, k2, c1[idx].re, c1[idx].im, c2[idx].re, c2[idx].im))
            .collect();
        Self { n: grid.n(), modes }
    }

    pub fn restore(&self) -> Result<SpectralField> {
        let grid = GridSpec::new(self.n)?;
        let mut c1 = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut c2 = c1.clone();
        for &(k1, k2, a, b, c, d) in &self.modes {
            let idx = grid
                .index(k1, k2)
                .ok_or_else(|| Error::Snapshot(format!("mode ({k1}, {k2}) not on n={} lattice", self.n)))?;
            c1[idx] = Complex64::new(a, b);
            c2[idx] = Complex64::new(c, d);
        }
        Ok(SpectralField::from_parts(grid, c1, c2))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{MAGIC}\nn {}\n", self.n);
        for (k1, k2, a, b, c, d) in &self.modes {
            s.push_str(&format!("{k1} {k2} {a:e} {b:e} {c:e} {d:e}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => return Err(Error::Snapshot(format!("missing header `{MAGIC}`"))),
        }
        let n = match lines.next() {
            Some((_, l)) => l
                .trim()
                .strip_prefix("n ")
                .and_then(|v| v.trim().parse::<usize>().ok())
                .ok_or_else(|| Error::Snapshot(format!("line 2: expected `n <int>`, got `{l}`")))?,
            None => return Err(Error::Snapshot("missing `n` line".into())),
        };
        let mut modes = Vec::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Snapshot(format!("line {}: malformed mode record", lineno + 1));
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 6 {
                return Err(bad());
            }
            let k1 = tok[0].parse().map_err(|_| bad())?;
            let k2 = tok[1].parse().map_err(|_| bad())?;
            let mut vals = [0.0; 4];
            for (v, t) in vals.iter_mut().zip(&tok[2..]) {
                *v = t.parse().map_err(|_| bad())?;
            }
            modes.push((k1, k2, vals[0], vals[1], vals[2], vals[3]));
        }
        Ok(Self { n, modes })
    }
}
