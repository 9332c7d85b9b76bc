//! JSON checkpoints of the pair state. Resuming from a checkpoint
//! reproduces the uninterrupted run bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::SystemParams;
use super::stepper::PairState;
use crate::error::{Error, Result};
use crate::spectral::snapshot::FieldSnapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub params: SystemParams,
    pub t: f64,
    pub u: FieldSnapshot,
    pub u_tilde: FieldSnapshot,
}

const FORMAT: &str = "nse-nudge-checkpoint 1";

impl Checkpoint {
    pub fn capture(params: &SystemParams, state: &PairState) -> Self {
        Self {
            format: FORMAT.to_string(),
            params: params.clone(),
            t: state.t,
            u: FieldSnapshot::capture(&state.u),
            u_tilde: FieldSnapshot::capture(&state.u_tilde),
        }
    }

    pub fn state(&self) -> Result<PairState> {
        if self.format != FORMAT {
            return Err(Error::Snapshot(format!("unknown checkpoint format `{}`", self.format)));
        }
        if self.u.n != self.u_tilde.n {
            return Err(Error::Snapshot(format!(
                "u and ũ on different grids ({} vs {})",
                self.u.n, self.u_tilde.n
            )));
        }
        Ok(PairState::new(self.t, self.u.restore()?, self.u_tilde.restore()?))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
