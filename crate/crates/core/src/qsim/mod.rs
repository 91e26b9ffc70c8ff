//! Exact statevector simulation over the circuit gate alphabet.
//!
//! Basis index `b` stores qubit 0 in its least-significant bit. Gates are
//! applied by strided pair/quartet updates on the amplitude vector; the full
//! `2^n × 2^n` matrix is only ever built by [`oracle::full_unitary_oracle`].

pub mod gates;
pub mod oracle;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use gates::{gate_matrix, target_operator, GateKind, GatePlacement, Matrix2, Unitary};
pub use oracle::full_unitary_oracle;

pub const MAX_QUBITS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// Index of the `k`-th basis state whose bit `wire` is zero.
#[inline]
fn insert_zero_bit(k: usize, wire: usize) -> usize {
    let low = k & ((1 << wire) - 1);
    ((k >> wire) << (wire + 1)) | low
}

/// Index of the `k`-th basis state whose bits `lo` and `hi` are zero (`lo < hi`).
#[inline]
fn insert_two_zero_bits(k: usize, lo: usize, hi: usize) -> usize {
    insert_zero_bit(insert_zero_bit(k, lo), hi)
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` wires.
    pub fn new_zero(n_qubits: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The vector must have length `2^n` and unit norm
    /// within 1e-10.
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) || amplitudes.len() != 1 << n_qubits {
            return Err(Error::contract(format!(
                "{} amplitudes do not describe {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        let state = Self {
            n_qubits,
            amplitudes,
        };
        if (state.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(Error::contract(format!(
                "amplitudes are not normalized (norm² = {})",
                state.norm_sqr()
            )));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check_wire(&self, wire: usize) -> Result<()> {
        if wire >= self.n_qubits {
            return Err(Error::contract(format!(
                "wire {wire} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Applies `placement` with angles read from `params` (the whole store).
    pub fn apply_gate(&mut self, placement: &GatePlacement, params: &[f64]) -> Result<()> {
        placement.validate(self.n_qubits, params.len())?;
        self.apply_validated(placement, params);
        Ok(())
    }

    /// Applies the adjoint of `placement`. Used to un-apply gates in reverse sweeps.
    pub fn apply_gate_inverse(&mut self, placement: &GatePlacement, params: &[f64]) -> Result<()> {
        placement.validate(self.n_qubits, params.len())?;
        self.apply_validated_inverse(placement, params);
        Ok(())
    }

    pub(crate) fn apply_validated(&mut self, placement: &GatePlacement, params: &[f64]) {
        let angles = placement.angles(params);
        let wires = &placement.wires;
        match placement.kind {
            GateKind::ID => {}
            GateKind::SWAP => self.swap(wires[0], wires[1]),
            kind => {
                let m = target_operator(kind, angles)
                    .expect("validated placement")
                    .expect("non-swap kind has a target operator");
                if kind.is_controlled() {
                    self.apply_controlled(wires[0], wires[1], &m);
                } else {
                    self.apply_single(wires[0], &m);
                }
            }
        }
    }

    pub(crate) fn apply_validated_inverse(&mut self, placement: &GatePlacement, params: &[f64]) {
        let angles = placement.angles(params);
        let wires = &placement.wires;
        match placement.kind {
            GateKind::ID => {}
            GateKind::SWAP => self.swap(wires[0], wires[1]),
            kind => {
                let m = target_operator(kind, angles)
                    .expect("validated placement")
                    .expect("non-swap kind has a target operator");
                let m = dagger2(&m);
                if kind.is_controlled() {
                    self.apply_controlled(wires[0], wires[1], &m);
                } else {
                    self.apply_single(wires[0], &m);
                }
            }
        }
    }

    /// Applies a 2×2 matrix to one wire. The matrix need not be unitary.
    pub fn apply_single(&mut self, wire: usize, m: &Matrix2) {
        let stride = 1 << wire;
        for k in 0..self.amplitudes.len() / 2 {
            let i0 = insert_zero_bit(k, wire);
            let i1 = i0 | stride;
            let a0 = self.amplitudes[i0];
            let a1 = self.amplitudes[i1];
            self.amplitudes[i0] = m[0] * a0 + m[1] * a1;
            self.amplitudes[i1] = m[2] * a0 + m[3] * a1;
        }
    }

    /// Applies `m` to `target` on the subspace where `control` is 1.
    pub fn apply_controlled(&mut self, control: usize, target: usize, m: &Matrix2) {
        let (lo, hi) = (control.min(target), control.max(target));
        let cbit = 1 << control;
        let tbit = 1 << target;
        for k in 0..self.amplitudes.len() / 4 {
            let base = insert_two_zero_bits(k, lo, hi) | cbit;
            let i0 = base;
            let i1 = base | tbit;
            let a0 = self.amplitudes[i0];
            let a1 = self.amplitudes[i1];
            self.amplitudes[i0] = m[0] * a0 + m[1] * a1;
            self.amplitudes[i1] = m[2] * a0 + m[3] * a1;
        }
    }

    /// Zeroes every amplitude whose `control` bit is 0.
    pub fn project_control_one(&mut self, control: usize) {
        let cbit = 1 << control;
        for (b, a) in self.amplitudes.iter_mut().enumerate() {
            if b & cbit == 0 {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        let (lo, hi) = (a.min(b), a.max(b));
        let (abit, bbit) = (1 << a, 1 << b);
        for k in 0..self.amplitudes.len() / 4 {
            let base = insert_two_zero_bits(k, lo, hi);
            self.amplitudes.swap(base | abit, base | bbit);
        }
    }

    /// `⟨Z⟩` on `wire`: +1 weight where the wire's bit is 0, −1 where it is 1.
    pub fn expectation_z(&self, wire: usize) -> Result<f64> {
        self.check_wire(wire)?;
        Ok(self.expectation_z_unchecked(wire))
    }

    fn expectation_z_unchecked(&self, wire: usize) -> f64 {
        let bit = 1 << wire;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| {
                if b & bit == 0 {
                    a.norm_sqr()
                } else {
                    -a.norm_sqr()
                }
            })
            .sum()
    }

    /// `⟨Z_w⟩` for every wire `w` in order.
    pub fn expectations_z(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_qubits];
        for (b, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for (w, z) in out.iter_mut().enumerate() {
                if b >> w & 1 == 0 {
                    *z += p;
                } else {
                    *z -= p;
                }
            }
        }
        out
    }

    /// Multiplies amplitude `b` by `Σ_w weights[w]·z_w(b)` where `z_w(b) = ±1`.
    /// This applies the diagonal observable `Σ_w weights[w]·Z_w`.
    pub(crate) fn apply_z_observable(&mut self, weights: &[f64]) {
        for (b, a) in self.amplitudes.iter_mut().enumerate() {
            let mut s = 0.0;
            for (w, &u) in weights.iter().enumerate() {
                if b >> w & 1 == 0 {
                    s += u;
                } else {
                    s -= u;
                }
            }
            *a *= s;
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// `⟨bra| M_wire |ket⟩` for a 2×2 operator on one wire.
pub fn matrix_element_single(
    bra: &StateVector,
    ket: &StateVector,
    wire: usize,
    m: &Matrix2,
) -> Complex64 {
    let stride = 1 << wire;
    let (l, k) = (&bra.amplitudes, &ket.amplitudes);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..k.len() / 2 {
        let i0 = insert_zero_bit(j, wire);
        let i1 = i0 | stride;
        acc += l[i0].conj() * (m[0] * k[i0] + m[1] * k[i1]);
        acc += l[i1].conj() * (m[2] * k[i0] + m[3] * k[i1]);
    }
    acc
}

/// `⟨bra| (|1⟩⟨1|_control ⊗ M_target) |ket⟩`.
pub fn matrix_element_controlled(
    bra: &StateVector,
    ket: &StateVector,
    control: usize,
    target: usize,
    m: &Matrix2,
) -> Complex64 {
    let (lo, hi) = (control.min(target), control.max(target));
    let (cbit, tbit) = (1 << control, 1 << target);
    let (l, k) = (&bra.amplitudes, &ket.amplitudes);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..k.len() / 4 {
        let i0 = insert_two_zero_bits(j, lo, hi) | cbit;
        let i1 = i0 | tbit;
        acc += l[i0].conj() * (m[0] * k[i0] + m[1] * k[i1]);
        acc += l[i1].conj() * (m[2] * k[i0] + m[3] * k[i1]);
    }
    acc
}

pub(crate) fn dagger2(m: &Matrix2) -> Matrix2 {
    [m[0].conj(), m[2].conj(), m[1].conj(), m[3].conj()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis(n: usize, index: usize) -> StateVector {
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[index] = c(1.0, 0.0);
        StateVector::from_amplitudes(n, amps).unwrap()
    }

    fn close(a: &[Complex64], b: &[Complex64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn zero_state_shapes() {
        assert_eq!(
            StateVector::new_zero(1).unwrap().amplitudes(),
            &[c(1.0, 0.0), c(0.0, 0.0)]
        );
        assert_eq!(StateVector::new_zero(2).unwrap().amplitudes().len(), 4);
        let s = StateVector::new_zero(4).unwrap();
        assert_eq!(s.amplitudes().len(), 16);
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn qubit_count_out_of_range() {
        assert!(matches!(StateVector::new_zero(0), Err(Error::Config(_))));
        assert!(matches!(StateVector::new_zero(13), Err(Error::Config(_))));
    }

    #[test]
    fn rx_pi_on_zero() {
        let mut s = StateVector::new_zero(1).unwrap();
        s.apply_gate(&GatePlacement::new(GateKind::RX, vec![0], 0), &[PI])
            .unwrap();
        assert!(close(s.amplitudes(), &[c(0.0, 0.0), c(0.0, -1.0)]));
    }

    #[test]
    fn cnot_truth_table() {
        // |10⟩ means qubit 0 is 1: basis index 0b01.
        let mut s = basis(2, 0b01);
        s.apply_gate(&GatePlacement::new(GateKind::CX, vec![0, 1], 0), &[])
            .unwrap();
        assert_eq!(s, basis(2, 0b11));

        let mut untouched = basis(2, 0b10);
        untouched
            .apply_gate(&GatePlacement::new(GateKind::CX, vec![0, 1], 0), &[])
            .unwrap();
        assert_eq!(untouched, basis(2, 0b10));
    }

    #[test]
    fn swap_moves_excitation() {
        let mut s = basis(2, 0b10);
        s.apply_gate(&GatePlacement::new(GateKind::SWAP, vec![0, 1], 0), &[])
            .unwrap();
        assert_eq!(s, basis(2, 0b01));
    }

    #[test]
    fn invalid_wires_rejected() {
        let mut s = StateVector::new_zero(2).unwrap();
        let bad = GatePlacement::new(GateKind::RX, vec![2], 0);
        assert!(matches!(
            s.apply_gate(&bad, &[0.1]),
            Err(Error::Contract(_))
        ));
        assert!(matches!(s.expectation_z(2), Err(Error::Contract(_))));
    }

    #[test]
    fn expectation_examples() {
        let s = StateVector::new_zero(4).unwrap();
        assert_eq!(s.expectation_z(0).unwrap(), 1.0);

        for theta in [0.0, 0.3, 1.7, PI, -2.2] {
            let mut s = StateVector::new_zero(1).unwrap();
            s.apply_gate(&GatePlacement::new(GateKind::RY, vec![0], 0), &[theta])
                .unwrap();
            assert!((s.expectation_z(0).unwrap() - theta.cos()).abs() < 1e-12);
        }

        let uniform = StateVector::from_amplitudes(2, vec![c(0.5, 0.0); 4]).unwrap();
        assert!(uniform.expectation_z(1).unwrap().abs() < 1e-15);
        assert_eq!(uniform.expectations_z().len(), 2);
    }

    #[test]
    fn probabilities_examples() {
        assert_eq!(
            StateVector::new_zero(1).unwrap().probabilities(),
            vec![1.0, 0.0]
        );
        let plus =
            StateVector::from_amplitudes(1, vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)])
                .unwrap();
        let p = plus.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unnormalized_input_rejected() {
        assert!(StateVector::from_amplitudes(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(StateVector::from_amplitudes(2, vec![c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn inverse_undoes_gate() {
        let params = [0.4, -1.1, 2.3];
        for (kind, wires) in [
            (GateKind::U3, vec![1]),
            (GateKind::CU3, vec![2, 0]),
            (GateKind::CY, vec![0, 2]),
        ] {
            let p = GatePlacement::new(kind, wires, 0);
            let mut s = StateVector::new_zero(3).unwrap();
            s.apply_gate(&GatePlacement::new(GateKind::RY, vec![2], 0), &[0.9])
                .unwrap();
            let before = s.clone();
            s.apply_gate(&p, &params[..kind.param_count()]).unwrap();
            s.apply_gate_inverse(&p, &params[..kind.param_count()])
                .unwrap();
            assert!(close(s.amplitudes(), before.amplitudes()));
        }
    }
}
