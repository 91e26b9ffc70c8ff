//! Brute-force full-unitary construction, used to cross-check the strided
//! simulator. Every gate is lifted to `2^n × 2^n` with Kronecker products of
//! single-wire operators and identities, then the gates are multiplied in
//! circuit order.

use num_complex::Complex64;

use super::gates::{gate_matrix, GatePlacement, Unitary};
use crate::error::{Error, Result};

pub const ORACLE_MAX_QUBITS: usize = 8;

/// `|row⟩⟨col|` on a single wire.
fn outer(row: usize, col: usize) -> Unitary {
    let mut data = vec![Complex64::new(0.0, 0.0); 4];
    data[row * 2 + col] = Complex64::new(1.0, 0.0);
    Unitary::from_rows(2, data)
}

/// `⊗_{q = n-1 … 0} ops[q]`, so qubit 0 is the least-significant tensor factor.
fn kron_all(ops: &[Unitary]) -> Unitary {
    ops.iter()
        .rev()
        .fold(Unitary::identity(1), |acc, op| acc.kron(op))
}

fn lift(placement: &GatePlacement, params: &[f64], n_qubits: usize) -> Result<Unitary> {
    let local = gate_matrix(placement.kind, placement.angles(params))?;
    let dim = 1usize << n_qubits;
    match placement.wires.as_slice() {
        [w] => {
            let mut ops = vec![Unitary::identity(2); n_qubits];
            ops[*w] = local;
            Ok(kron_all(&ops))
        }
        [w0, w1] => {
            // Expand the local 4×4 as Σ M[(i j),(k l)] |i⟩⟨k|_{w0} ⊗ |j⟩⟨l|_{w1}.
            let mut full = Unitary::from_rows(dim, vec![Complex64::new(0.0, 0.0); dim * dim]);
            for r in 0..4 {
                for c in 0..4 {
                    let coeff = local.get(r, c);
                    if coeff == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut ops = vec![Unitary::identity(2); n_qubits];
                    ops[*w0] = outer(r >> 1, c >> 1);
                    ops[*w1] = outer(r & 1, c & 1);
                    full = full.add(&kron_all(&ops).scale(coeff));
                }
            }
            Ok(full)
        }
        _ => unreachable!("placement validated"),
    }
}

/// The unitary of the whole circuit (later gates multiply on the left).
pub fn full_unitary_oracle(
    placements: &[GatePlacement],
    params: &[f64],
    n_qubits: usize,
) -> Result<Unitary> {
    if n_qubits > ORACLE_MAX_QUBITS {
        return Err(Error::OracleScale {
            n_qubits,
            limit: ORACLE_MAX_QUBITS,
        });
    }
    if n_qubits == 0 {
        return Err(Error::config("n_qubits must be at least 1"));
    }
    let mut total = Unitary::identity(1 << n_qubits);
    for p in placements {
        p.validate(n_qubits, params.len())?;
        total = lift(p, params, n_qubits)?.matmul(&total);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::GateKind;
    use std::f64::consts::PI;

    #[test]
    fn empty_circuit_is_identity() {
        let u = full_unitary_oracle(&[], &[], 2).unwrap();
        assert_eq!(u, Unitary::identity(4));
    }

    #[test]
    fn single_rx_pi() {
        let u =
            full_unitary_oracle(&[GatePlacement::new(GateKind::RX, vec![0], 0)], &[PI], 1).unwrap();
        let z = Complex64::new(0.0, 0.0);
        let mi = Complex64::new(0.0, -1.0);
        assert!(u.max_abs_diff(&Unitary::from_rows(2, vec![z, mi, mi, z])) < 1e-12);
    }

    #[test]
    fn cx_lift_respects_lsb_ordering() {
        // control wire 0, target wire 1 in a 2-qubit register: |b1 b0⟩ index.
        let u = full_unitary_oracle(&[GatePlacement::new(GateKind::CX, vec![0, 1], 0)], &[], 2)
            .unwrap();
        // index 1 (qubit0=1) -> index 3
        assert_eq!(u.get(3, 1), Complex64::new(1.0, 0.0));
        assert_eq!(u.get(1, 3), Complex64::new(1.0, 0.0));
        assert_eq!(u.get(2, 2), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn oracle_scale_limit() {
        assert!(matches!(
            full_unitary_oracle(&[], &[], 9),
            Err(Error::OracleScale { n_qubits: 9, .. })
        ));
    }
}
