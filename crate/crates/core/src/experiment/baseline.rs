use crate::error::{Error, Result};
use crate::qnet::Architecture;
use crate::qsim::GateKind;

pub const BASELINE_LAYERS: usize = 2;

/// The conventional fixed circuit used by the non-searching arms: per layer,
/// RX-RY-RZ on every wire, then a CX ring `i → (i+1) mod n`; two layers.
pub fn fixed_baseline_architecture(n_qubits: usize) -> Result<Architecture> {
    if n_qubits < 2 {
        return Err(Error::config(format!(
            "the baseline circuit needs at least 2 qubits, got {n_qubits}"
        )));
    }
    let mut genes = Vec::new();
    for _ in 0..BASELINE_LAYERS {
        for w in 0..n_qubits {
            genes.push((GateKind::RX, vec![w]));
            genes.push((GateKind::RY, vec![w]));
            genes.push((GateKind::RZ, vec![w]));
        }
        for w in 0..n_qubits {
            genes.push((GateKind::CX, vec![w, (w + 1) % n_qubits]));
        }
    }
    Architecture::new(n_qubits, genes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_qubit_counts() {
        let arch = fixed_baseline_architecture(4).unwrap();
        let rotations = arch.genes().filter(|(k, _)| k.param_count() == 1).count();
        let cx = arch.genes().filter(|(k, _)| *k == GateKind::CX).count();
        assert_eq!((rotations, cx, arch.total_params()), (24, 8, 24));
    }

    #[test]
    fn two_qubit_ring() {
        let arch = fixed_baseline_architecture(2).unwrap();
        let ring: Vec<Vec<usize>> = arch
            .genes()
            .filter(|(k, _)| *k == GateKind::CX)
            .take(2)
            .map(|(_, w)| w.to_vec())
            .collect();
        assert_eq!(ring, vec![vec![0, 1], vec![1, 0]]);
        // revalidates through the checked constructor
        Architecture::from_placements(2, arch.placements().to_vec()).unwrap();
    }

    #[test]
    fn needs_two_qubits() {
        assert!(fixed_baseline_architecture(1).is_err());
    }
}
