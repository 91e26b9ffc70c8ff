use std::path::Path;

use serde::{Deserialize, Serialize};

use qrlnas_core::qnet::{Architecture, EncoderLayout, OutputHead, ParamStore, QModel};
use qrlnas_core::qsim::GatePlacement;
use qrlnas_core::{Error, Result};

use crate::config::RunConfig;

pub const CHECKPOINT_VERSION: u32 = 1;

/// A trained model plus the configuration that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub version: u32,
    pub n_qubits: usize,
    pub genome: Vec<GatePlacement>,
    pub params: Vec<f64>,
    pub head: OutputHead,
    pub encoder: EncoderLayout,
    pub config_echo: RunConfig,
    pub seed: u64,
}

impl Checkpoint {
    pub fn from_model(model: &QModel, config: &RunConfig) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            n_qubits: model.arch.n_qubits(),
            genome: model.arch.placements().to_vec(),
            params: model.params.to_vec(),
            head: model.head.clone(),
            encoder: model.layout.clone(),
            config_echo: config.clone(),
            seed: config.seed,
        }
    }

    pub fn architecture(&self) -> Result<Architecture> {
        Architecture::from_placements(self.n_qubits, self.genome.clone())
    }

    pub fn to_model(&self) -> Result<QModel> {
        QModel::new(
            self.architecture()?,
            ParamStore::new(self.params.clone()),
            self.head.clone(),
            self.encoder.clone(),
            self.config_echo.train_head,
        )
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("checkpoint serializes");
        text.push('\n');
        text
    }

    /// Parses and validates; a checkpoint that cannot rebuild its model is rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let checkpoint: Self = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid checkpoint: {e}")))?;
        if checkpoint.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                checkpoint.version
            )));
        }
        checkpoint.to_model()?;
        Ok(checkpoint)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
