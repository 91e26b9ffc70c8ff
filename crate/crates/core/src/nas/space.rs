use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qnet::Architecture;
use crate::qsim::{GateKind, GatePlacement};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WirePolicy {
    #[default]
    AnyDistinctPair,
    /// Two-qubit gates only act on ring neighbours `(i, i+1 mod n)`, either order.
    RingNeighbors,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub n_qubits: usize,
    pub genome_length: usize,
    pub allowed_kinds: Vec<GateKind>,
    pub wire_policy: WirePolicy,
}

impl SearchSpace {
    pub const DEFAULT_GENOME_LENGTH: usize = 12;

    /// Full gate alphabet, default genome length, any distinct pair.
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            genome_length: Self::DEFAULT_GENOME_LENGTH,
            allowed_kinds: GateKind::ALL.to_vec(),
            wire_policy: WirePolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.genome_length == 0 {
            return Err(Error::config("genome length must be at least 1"));
        }
        if self.allowed_kinds.is_empty() {
            return Err(Error::config("the search space allows no gate kinds"));
        }
        if self.n_qubits < 2 && self.allowed_kinds.iter().any(|k| k.arity() == 2) {
            return Err(Error::config(format!(
                "two-qubit gates need at least 2 qubits, got {}",
                self.n_qubits
            )));
        }
        // Surfaces the qubit range check.
        Architecture::new(self.n_qubits, Vec::new())?;
        Ok(())
    }

    /// Ordered wire pairs a two-qubit gate may act on.
    pub fn pairs(&self) -> Vec<[usize; 2]> {
        let n = self.n_qubits;
        let mut out = Vec::new();
        match self.wire_policy {
            WirePolicy::AnyDistinctPair => {
                for a in 0..n {
                    for b in 0..n {
                        if a != b {
                            out.push([a, b]);
                        }
                    }
                }
            }
            WirePolicy::RingNeighbors => {
                for a in 0..n {
                    let b = (a + 1) % n;
                    for pair in [[a, b], [b, a]] {
                        if pair[0] != pair[1] && !out.contains(&pair) {
                            out.push(pair);
                        }
                    }
                }
            }
        }
        out
    }

    /// True when `arch` could have been produced from this space.
    pub fn conforms(&self, arch: &Architecture) -> bool {
        let pairs = self.pairs();
        arch.n_qubits() == self.n_qubits
            && arch.len() == self.genome_length
            && arch.genes().all(|(kind, wires)| {
                self.allowed_kinds.contains(&kind)
                    && match wires {
                        [w] => *w < self.n_qubits,
                        [a, b] => pairs.contains(&[*a, *b]),
                        _ => false,
                    }
            })
    }

    /// Number of distinct `(kind, wires)` genes.
    pub fn gene_count(&self) -> usize {
        let pairs = self.pairs().len();
        let mut kinds: Vec<GateKind> = Vec::new();
        for k in &self.allowed_kinds {
            if !kinds.contains(k) {
                kinds.push(*k);
            }
        }
        kinds
            .iter()
            .map(|k| if k.arity() == 1 { self.n_qubits } else { pairs })
            .sum()
    }

    fn sample_gene<R: Rng + ?Sized>(&self, rng: &mut R) -> (GateKind, Vec<usize>) {
        let kind = *self.allowed_kinds.choose(rng).expect("validated non-empty");
        let wires = if kind.arity() == 1 {
            vec![rng.gen_range(0..self.n_qubits)]
        } else {
            self.pairs()
                .choose(rng)
                .expect("validated n_qubits >= 2")
                .to_vec()
        };
        (kind, wires)
    }
}

fn genes_of(arch: &Architecture) -> Vec<(GateKind, Vec<usize>)> {
    arch.genes().map(|(k, w)| (k, w.to_vec())).collect()
}

pub fn random_architecture<R: Rng + ?Sized>(
    space: &SearchSpace,
    rng: &mut R,
) -> Result<Architecture> {
    space.validate()?;
    let genes = (0..space.genome_length)
        .map(|_| space.sample_gene(rng))
        .collect();
    Architecture::new(space.n_qubits, genes)
}

/// Resamples each position with probability `rate`. If no position was
/// picked, one uniformly chosen position is redrawn until its gene changes
/// (unless the space holds a single gene).
pub fn mutate<R: Rng + ?Sized>(
    parent: &Architecture,
    space: &SearchSpace,
    rate: f64,
    rng: &mut R,
) -> Result<Architecture> {
    space.validate()?;
    if !space.conforms(parent) {
        return Err(Error::config(
            "parent architecture is outside the search space",
        ));
    }
    let mut genes = genes_of(parent);
    let mut touched = false;
    for gene in genes.iter_mut() {
        if rng.gen::<f64>() < rate {
            *gene = space.sample_gene(rng);
            touched = true;
        }
    }
    if !touched {
        let i = rng.gen_range(0..genes.len());
        let old = genes[i].clone();
        loop {
            genes[i] = space.sample_gene(rng);
            if genes[i] != old || space.gene_count() == 1 {
                break;
            }
        }
    }
    Architecture::new(space.n_qubits, genes)
}

/// Positions whose gene differs between two equal-length architectures.
pub fn changed_positions(a: &Architecture, b: &Architecture) -> Vec<usize> {
    a.placements()
        .iter()
        .zip(b.placements())
        .enumerate()
        .filter(|(_, (p, q))| !same_gene(p, q))
        .map(|(i, _)| i)
        .collect()
}

pub(crate) fn same_gene(a: &GatePlacement, b: &GatePlacement) -> bool {
    a.kind == b.kind && a.wires == b.wires
}
