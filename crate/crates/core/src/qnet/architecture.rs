use std::f64::consts::PI;
use std::ops::{Deref, DerefMut};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{GateKind, GatePlacement, MAX_QUBITS};

/// An ordered gate genome. Parameter offsets are contiguous in genome order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ArchitectureDoc", into = "ArchitectureDoc")]
pub struct Architecture {
    n_qubits: usize,
    placements: Vec<GatePlacement>,
    total_params: usize,
}

#[derive(Serialize, Deserialize)]
struct ArchitectureDoc {
    n_qubits: usize,
    genome: Vec<GatePlacement>,
}

impl TryFrom<ArchitectureDoc> for Architecture {
    type Error = Error;

    fn try_from(doc: ArchitectureDoc) -> Result<Self> {
        Architecture::from_placements(doc.n_qubits, doc.genome)
    }
}

impl From<Architecture> for ArchitectureDoc {
    fn from(arch: Architecture) -> Self {
        ArchitectureDoc {
            n_qubits: arch.n_qubits,
            genome: arch.placements,
        }
    }
}

impl Architecture {
    /// Builds an architecture from `(kind, wires)` genes, assigning offsets.
    pub fn new(n_qubits: usize, genes: Vec<(GateKind, Vec<usize>)>) -> Result<Self> {
        let mut offset = 0;
        let placements = genes
            .into_iter()
            .map(|(kind, wires)| {
                let p = GatePlacement::new(kind, wires, offset);
                offset += kind.param_count();
                p
            })
            .collect();
        Self::from_placements(n_qubits, placements)
    }

    /// Validates explicit placements: offsets must tile `[0, total_params)` in order.
    pub fn from_placements(n_qubits: usize, placements: Vec<GatePlacement>) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let mut expected = 0;
        for (i, p) in placements.iter().enumerate() {
            if p.param_offset != expected {
                return Err(Error::contract(format!(
                    "placement {i} ({}) has param_offset {}, expected {expected}",
                    p.kind, p.param_offset
                )));
            }
            expected += p.kind.param_count();
        }
        for p in &placements {
            p.validate(n_qubits, expected)?;
        }
        Ok(Self {
            n_qubits,
            placements,
            total_params: expected,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn placements(&self) -> &[GatePlacement] {
        &self.placements
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    pub fn total_params(&self) -> usize {
        self.total_params
    }

    /// Genes without offsets, e.g. for comparing genomes position by position.
    pub fn genes(&self) -> impl Iterator<Item = (GateKind, &[usize])> {
        self.placements.iter().map(|p| (p.kind, p.wires.as_slice()))
    }

    /// Compact human-readable form, e.g. `RX(0) CX(0,1) ID(2)`.
    pub fn describe(&self) -> String {
        self.placements
            .iter()
            .map(|p| {
                let wires: Vec<String> = p.wires.iter().map(|w| w.to_string()).collect();
                format!("{}({})", p.kind, wires.join(","))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Flat vector of rotation angles (radians) indexed by placement offsets.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamStore {
    values: Vec<f64>,
}

impl ParamStore {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
        }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }

    pub fn check_for(&self, arch: &Architecture) -> Result<()> {
        if self.values.len() != arch.total_params() {
            return Err(Error::contract(format!(
                "parameter store has {} values, architecture needs {}",
                self.values.len(),
                arch.total_params()
            )));
        }
        Ok(())
    }
}

impl Deref for ParamStore {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl DerefMut for ParamStore {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Draws every angle i.i.d. uniform on `[-π, π]`.
pub fn init_params<R: Rng + ?Sized>(arch: &Architecture, rng: &mut R) -> ParamStore {
    ParamStore::new(
        (0..arch.total_params())
            .map(|_| rng.gen_range(-PI..=PI))
            .collect(),
    )
}
