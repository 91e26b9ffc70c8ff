//! Forward pass and the two gradient engines.
//!
//! The adjoint engine differentiates the gate matrices analytically and sweeps
//! the circuit backwards. The parameter-shift engine never touches a gate
//! derivative: it rewrites every parameterized gate as plain RX/RY/RZ rotations
//! (plus fixed CX gates for CU3) and applies the ±π/2 shift rule to each
//! rotation angle, chaining through the linear angle maps.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::architecture::Architecture;
use super::encoder::{encode, EncoderLayout};
use crate::error::{Error, Result};
use crate::qsim::gates::{rx, ry, rz, GateKind, GatePlacement, Matrix2};
use crate::qsim::{matrix_element_controlled, matrix_element_single, StateVector};

/// Encodes `features` and applies the architecture; returns the final state.
pub fn run_circuit(
    arch: &Architecture,
    params: &[f64],
    layout: &EncoderLayout,
    features: &[f64],
) -> Result<StateVector> {
    check_params(arch, params)?;
    let mut state = encode(features, layout, arch.n_qubits())?;
    for p in arch.placements() {
        state.apply_validated(p, params);
    }
    Ok(state)
}

/// Per-wire `⟨Z⟩` after encoding and the full circuit.
pub fn forward(
    arch: &Architecture,
    params: &[f64],
    layout: &EncoderLayout,
    features: &[f64],
) -> Result<Vec<f64>> {
    Ok(run_circuit(arch, params, layout, features)?.expectations_z())
}

fn check_params(arch: &Architecture, params: &[f64]) -> Result<()> {
    if params.len() != arch.total_params() {
        return Err(Error::contract(format!(
            "parameter store has {} values, architecture needs {}",
            params.len(),
            arch.total_params()
        )));
    }
    Ok(())
}

/// `∂U/∂angle_i` for each angle of a gate's (target) operator.
fn derivative_operators(kind: GateKind, angles: &[f64]) -> Vec<Matrix2> {
    let c = Complex64::new;
    match kind {
        GateKind::RX => {
            let (s, co) = (angles[0] / 2.0).sin_cos();
            vec![[
                c(-s / 2.0, 0.0),
                c(0.0, -co / 2.0),
                c(0.0, -co / 2.0),
                c(-s / 2.0, 0.0),
            ]]
        }
        GateKind::RY => {
            let (s, co) = (angles[0] / 2.0).sin_cos();
            vec![[
                c(-s / 2.0, 0.0),
                c(-co / 2.0, 0.0),
                c(co / 2.0, 0.0),
                c(-s / 2.0, 0.0),
            ]]
        }
        GateKind::RZ => {
            let half = angles[0] / 2.0;
            vec![[
                c(0.0, -0.5) * Complex64::from_polar(1.0, -half),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.5) * Complex64::from_polar(1.0, half),
            ]]
        }
        GateKind::U3 | GateKind::CU3 => {
            let (theta, phi, lambda) = (angles[0], angles[1], angles[2]);
            let (s, co) = (theta / 2.0).sin_cos();
            let i = c(0.0, 1.0);
            let zero = c(0.0, 0.0);
            let d_theta = [
                c(-s / 2.0, 0.0),
                -Complex64::from_polar(co / 2.0, lambda),
                Complex64::from_polar(co / 2.0, phi),
                -Complex64::from_polar(s / 2.0, phi + lambda),
            ];
            let d_phi = [
                zero,
                zero,
                i * Complex64::from_polar(s, phi),
                i * Complex64::from_polar(co, phi + lambda),
            ];
            let d_lambda = [
                zero,
                -i * Complex64::from_polar(s, lambda),
                zero,
                i * Complex64::from_polar(co, phi + lambda),
            ];
            vec![d_theta, d_phi, d_lambda]
        }
        _ => Vec::new(),
    }
}

/// Adjoint-style reverse sweep from an already computed final state.
///
/// Returns `∂(Σ_w upstream[w]·⟨Z_w⟩)/∂params`.
pub(crate) fn adjoint_from_state(
    arch: &Architecture,
    params: &[f64],
    final_state: &StateVector,
    upstream: &[f64],
) -> Vec<f64> {
    let mut grad = vec![0.0; arch.total_params()];
    if upstream.iter().all(|&u| u == 0.0) || arch.total_params() == 0 {
        return grad;
    }
    let mut psi = final_state.clone();
    let mut lambda = final_state.clone();
    lambda.apply_z_observable(upstream);
    for p in arch.placements().iter().rev() {
        psi.apply_validated_inverse(p, params);
        let n = p.kind.param_count();
        if n > 0 {
            let derivs = derivative_operators(p.kind, p.angles(params));
            for (i, d) in derivs.iter().enumerate() {
                let overlap = if p.kind.is_controlled() {
                    matrix_element_controlled(&lambda, &psi, p.wires[0], p.wires[1], d)
                } else {
                    matrix_element_single(&lambda, &psi, p.wires[0], d)
                };
                grad[p.param_offset + i] += 2.0 * overlap.re;
            }
        }
        lambda.apply_validated_inverse(p, params);
    }
    grad
}

/// Reverse-mode gradient of `Σ_w upstream[w]·⟨Z_w⟩`.
///
/// Returns `(param_grad, expectations)`.
pub fn backward(
    arch: &Architecture,
    params: &[f64],
    layout: &EncoderLayout,
    features: &[f64],
    upstream: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if upstream.len() != arch.n_qubits() {
        return Err(Error::contract(format!(
            "upstream has {} entries, circuit has {} wires",
            upstream.len(),
            arch.n_qubits()
        )));
    }
    let state = run_circuit(arch, params, layout, features)?;
    let grad = adjoint_from_state(arch, params, &state, upstream);
    Ok((grad, state.expectations_z()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Axis {
    X,
    Y,
    Z,
}

/// One step of a circuit rewritten for the shift rule.
#[derive(Clone, Debug)]
enum ShiftOp {
    /// Parameter-free gate applied as-is.
    Fixed(GatePlacement),
    /// `R_axis(Σ coeff·params[index])` on one wire.
    Rotation {
        axis: Axis,
        wire: usize,
        terms: Vec<(usize, f64)>,
    },
}

/// Rewrites the circuit so every parameter enters only through RX/RY/RZ
/// rotations with linear angle maps.
fn rewrite(arch: &Architecture) -> Vec<ShiftOp> {
    let mut ops = Vec::new();
    for p in arch.placements() {
        let o = p.param_offset;
        match p.kind {
            GateKind::RX => ops.push(rot(Axis::X, p.wires[0], vec![(o, 1.0)])),
            GateKind::RY => ops.push(rot(Axis::Y, p.wires[0], vec![(o, 1.0)])),
            GateKind::RZ => ops.push(rot(Axis::Z, p.wires[0], vec![(o, 1.0)])),
            GateKind::U3 => {
                // U3(θ,φ,λ) ∝ RZ(φ)·RY(θ)·RZ(λ)
                let w = p.wires[0];
                ops.push(rot(Axis::Z, w, vec![(o + 2, 1.0)]));
                ops.push(rot(Axis::Y, w, vec![(o, 1.0)]));
                ops.push(rot(Axis::Z, w, vec![(o + 1, 1.0)]));
            }
            GateKind::CU3 => {
                // Controlled-U3 as two CX gates around target rotations, with
                // a phase rotation on the control:
                //   RZ((λ+φ)/2)_c, RZ((λ-φ)/2)_t, CX,
                //   U3(-θ/2, 0, -(φ+λ)/2)_t, CX, U3(θ/2, φ, 0)_t
                let (c, t) = (p.wires[0], p.wires[1]);
                let (theta, phi, lambda) = (o, o + 1, o + 2);
                ops.push(rot(Axis::Z, c, vec![(lambda, 0.5), (phi, 0.5)]));
                ops.push(rot(Axis::Z, t, vec![(lambda, 0.5), (phi, -0.5)]));
                ops.push(ShiftOp::Fixed(GatePlacement::new(
                    GateKind::CX,
                    vec![c, t],
                    0,
                )));
                ops.push(rot(Axis::Z, t, vec![(phi, -0.5), (lambda, -0.5)]));
                ops.push(rot(Axis::Y, t, vec![(theta, -0.5)]));
                ops.push(ShiftOp::Fixed(GatePlacement::new(
                    GateKind::CX,
                    vec![c, t],
                    0,
                )));
                ops.push(rot(Axis::Y, t, vec![(theta, 0.5)]));
                ops.push(rot(Axis::Z, t, vec![(phi, 1.0)]));
            }
            GateKind::ID => {}
            kind => ops.push(ShiftOp::Fixed(GatePlacement::new(kind, p.wires.clone(), 0))),
        }
    }
    ops
}

fn rot(axis: Axis, wire: usize, terms: Vec<(usize, f64)>) -> ShiftOp {
    ShiftOp::Rotation { axis, wire, terms }
}

fn op_angle(terms: &[(usize, f64)], params: &[f64]) -> f64 {
    terms.iter().map(|&(i, c)| c * params[i]).sum()
}

fn rotation(axis: Axis, angle: f64) -> Matrix2 {
    match axis {
        Axis::X => rx(angle),
        Axis::Y => ry(angle),
        Axis::Z => rz(angle),
    }
}

fn run_rewritten(
    ops: &[ShiftOp],
    params: &[f64],
    start: &StateVector,
    shift: Option<(usize, f64)>,
) -> Vec<f64> {
    let mut state = start.clone();
    for (j, op) in ops.iter().enumerate() {
        match op {
            ShiftOp::Fixed(p) => state.apply_validated(p, &[]),
            ShiftOp::Rotation { axis, wire, terms } => {
                let mut angle = op_angle(terms, params);
                if let Some((target, delta)) = shift {
                    if target == j {
                        angle += delta;
                    }
                }
                state.apply_single(*wire, &rotation(*axis, angle));
            }
        }
    }
    state.expectations_z()
}

/// Jacobian `J[w][k] = ∂⟨Z_w⟩/∂params[k]` by the two-term shift rule applied
/// to every rotation of the rewritten circuit.
pub fn parameter_shift_jacobian(
    arch: &Architecture,
    params: &[f64],
    layout: &EncoderLayout,
    features: &[f64],
) -> Result<Vec<Vec<f64>>> {
    check_params(arch, params)?;
    let start = encode(features, layout, arch.n_qubits())?;
    let ops = rewrite(arch);
    let mut jac = vec![vec![0.0; arch.total_params()]; arch.n_qubits()];
    for (j, op) in ops.iter().enumerate() {
        let ShiftOp::Rotation { terms, .. } = op else {
            continue;
        };
        let plus = run_rewritten(&ops, params, &start, Some((j, FRAC_PI_2)));
        let minus = run_rewritten(&ops, params, &start, Some((j, -FRAC_PI_2)));
        for &(k, coeff) in terms {
            for w in 0..arch.n_qubits() {
                jac[w][k] += coeff * (plus[w] - minus[w]) / 2.0;
            }
        }
    }
    Ok(jac)
}

/// `∂⟨Z_wire⟩/∂params` by the parameter-shift rule.
pub fn grad_parameter_shift(
    arch: &Architecture,
    params: &[f64],
    layout: &EncoderLayout,
    features: &[f64],
    wire: usize,
) -> Result<Vec<f64>> {
    if wire >= arch.n_qubits() {
        return Err(Error::contract(format!(
            "wire {wire} out of range for {} qubits",
            arch.n_qubits()
        )));
    }
    let mut jac = parameter_shift_jacobian(arch, params, layout, features)?;
    Ok(jac.swap_remove(wire))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnet::encoder::Squash;
    use crate::qsim::gates::gate_matrix;
    use std::f64::consts::PI;

    fn zero_layout(n: usize) -> EncoderLayout {
        EncoderLayout::chunked(n, n, Squash::Arctan)
    }

    #[test]
    fn single_rx_forward_and_gradient() {
        let arch = Architecture::new(4, vec![(GateKind::RX, vec![0])]).unwrap();
        let layout = zero_layout(4);
        let theta = PI / 3.0;
        let z = forward(&arch, &[theta], &layout, &[0.0; 4]).unwrap();
        assert!((z[0] - theta.cos()).abs() < 1e-12);
        assert!(z[1..].iter().all(|&v| (v - 1.0).abs() < 1e-12));

        let g = grad_parameter_shift(&arch, &[theta], &layout, &[0.0; 4], 0).unwrap();
        assert!((g[0] + 3f64.sqrt() / 2.0).abs() < 1e-12);
        let g0 = grad_parameter_shift(&arch, &[0.0], &layout, &[0.0; 4], 0).unwrap();
        assert!(g0[0].abs() < 1e-12);

        let (adj, _) =
            backward(&arch, &[theta], &layout, &[0.0; 4], &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((adj[0] - g[0]).abs() < 1e-12);
    }

    #[test]
    fn all_identity_genome() {
        let arch = Architecture::new(4, vec![(GateKind::ID, vec![1]); 5]).unwrap();
        let z = forward(&arch, &[], &zero_layout(4), &[0.0; 4]).unwrap();
        assert_eq!(z, vec![1.0; 4]);
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let arch = Architecture::new(
            2,
            vec![(GateKind::U3, vec![0]), (GateKind::CU3, vec![0, 1])],
        )
        .unwrap();
        let params = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let (g, _) = backward(&arch, &params, &zero_layout(2), &[0.5, -0.5], &[0.0, 0.0]).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    /// Builds the rewritten ops' unitary column by column and compares it to
    /// the gate's own matrix up to a global phase.
    fn rewritten_matches(kind: GateKind, params: &[f64]) {
        let n = kind.arity();
        let wires: Vec<usize> = if n == 1 { vec![0] } else { vec![1, 0] };
        let arch = Architecture::new(2, vec![(kind, wires.clone())]).unwrap();
        let ops = rewrite(&arch);
        let dim = 4;
        let mut got = Vec::new();
        let mut want = Vec::new();
        for b in 0..dim {
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            amps[b] = Complex64::new(1.0, 0.0);
            let start = StateVector::from_amplitudes(2, amps).unwrap();
            let mut s = start.clone();
            for op in &ops {
                match op {
                    ShiftOp::Fixed(p) => s.apply_validated(p, &[]),
                    ShiftOp::Rotation { axis, wire, terms } => {
                        let a = op_angle(terms, params);
                        s.apply_single(*wire, &rotation(*axis, a));
                    }
                }
            }
            got.extend_from_slice(s.amplitudes());
            let mut direct = start.clone();
            direct
                .apply_gate(&GatePlacement::new(kind, wires.clone(), 0), params)
                .unwrap();
            want.extend_from_slice(direct.amplitudes());
        }
        // global phase from the first sizable entry
        let k = want.iter().position(|a| a.norm() > 0.1).unwrap();
        let phase = want[k] / got[k];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        for (g, w) in got.iter().zip(&want) {
            assert!((g * phase - w).norm() < 1e-12, "{kind} rewrite mismatch");
        }
        let _ = gate_matrix(kind, params).unwrap();
    }

    #[test]
    fn rewrite_reproduces_gates() {
        rewritten_matches(GateKind::RX, &[0.7]);
        rewritten_matches(GateKind::RY, &[-1.3]);
        rewritten_matches(GateKind::RZ, &[2.9]);
        rewritten_matches(GateKind::U3, &[0.4, -2.1, 1.7]);
        rewritten_matches(GateKind::CU3, &[0.4, -2.1, 1.7]);
        rewritten_matches(GateKind::CU3, &[-2.8, 0.3, 0.9]);
    }
}
