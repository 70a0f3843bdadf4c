//! Deciding how much time to spend on reformulation.

mod apriori;
mod histogram;
mod incremental;
mod value;

pub use apriori::*;
pub use histogram::*;
pub use incremental::*;
pub use value::*;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// A document stored as pretty JSON and validated on load.
pub trait JsonFile: Serialize + DeserializeOwned {
    fn check(&self) -> Result<()>;

    fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("models serialize");
        out.push(b'\n');
        out
    }

    fn from_json(bytes: &[u8]) -> Result<Self> {
        let m: Self = serde_json::from_slice(bytes)?;
        m.check()?;
        Ok(m)
    }

    fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&bytes)
    }
}

impl JsonFile for TransitionModel {
    fn check(&self) -> Result<()> {
        self.validate()
    }
}

impl JsonFile for ExecPerUnitModel {
    fn check(&self) -> Result<()> {
        self.validate()
    }
}

impl JsonFile for ExecTimeFamily {
    fn check(&self) -> Result<()> {
        self.validate()
    }
}
