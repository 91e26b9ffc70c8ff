use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadMode {
    QValues,
    PolicyProbs,
}

/// Per-action affine readout of wire expectations:
/// `logit[a] = weights[a]·⟨Z_{action_wires[a]}⟩ + biases[a]`.
///
/// In `QValues` mode the logits are the Q-values; in `PolicyProbs` mode they
/// go through a softmax.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputHead {
    pub mode: HeadMode,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub action_wires: Vec<usize>,
}

impl OutputHead {
    /// Weights 1, biases 0: outputs are the raw expectations.
    pub fn identity(mode: HeadMode, action_wires: Vec<usize>) -> Self {
        let n = action_wires.len();
        Self {
            mode,
            weights: vec![1.0; n],
            biases: vec![0.0; n],
            action_wires,
        }
    }

    /// Action `a` reads wire `a mod n_qubits`.
    pub fn for_actions(mode: HeadMode, n_actions: usize, n_qubits: usize) -> Self {
        Self::identity(mode, (0..n_actions).map(|a| a % n_qubits).collect())
    }

    pub fn n_actions(&self) -> usize {
        self.action_wires.len()
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let n = self.action_wires.len();
        if n == 0 || self.weights.len() != n || self.biases.len() != n {
            return Err(Error::contract(format!(
                "head needs equal, non-zero weights/biases/action_wires lengths, got {}/{}/{}",
                self.weights.len(),
                self.biases.len(),
                n
            )));
        }
        if let Some(w) = self.action_wires.iter().find(|&&w| w >= n_qubits) {
            return Err(Error::contract(format!(
                "head reads wire {w} but the circuit has {n_qubits} qubits"
            )));
        }
        Ok(())
    }

    pub fn expect_mode(&self, mode: HeadMode) -> Result<()> {
        if self.mode != mode {
            return Err(Error::contract(format!(
                "head is in {:?} mode, {mode:?} requested",
                self.mode
            )));
        }
        Ok(())
    }

    pub fn logits(&self, expectations: &[f64]) -> Vec<f64> {
        self.action_wires
            .iter()
            .zip(self.weights.iter().zip(&self.biases))
            .map(|(&w, (&wt, &b))| wt * expectations[w] + b)
            .collect()
    }

    /// Folds `dL/dlogits` into `dL/d⟨Z_w⟩` (per wire) and accumulates the
    /// head's own gradients into `d_weights` and `d_biases`.
    pub fn backprop(
        &self,
        expectations: &[f64],
        d_logits: &[f64],
        upstream: &mut [f64],
        d_weights: &mut [f64],
        d_biases: &mut [f64],
    ) {
        for (a, &g) in d_logits.iter().enumerate() {
            let wire = self.action_wires[a];
            upstream[wire] += g * self.weights[a];
            d_weights[a] += g * expectations[wire];
            d_biases[a] += g;
        }
    }
}

/// Log-softmax, stable for any finite logits.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|l| l - max - log_sum).collect()
}

/// Softmax whose entries stay strictly inside `(0, 1)` when there are at
/// least two actions, even when the exact value would round to 0 or 1.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let logp = log_softmax(logits);
    if logp.len() < 2 {
        return vec![1.0; logp.len()];
    }
    logp.iter()
        .map(|lp| lp.exp().clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_head_passes_expectations() {
        let head = OutputHead::identity(HeadMode::QValues, vec![0, 1, 2, 3]);
        let z = [0.1, -0.2, 0.3, -0.4];
        assert_eq!(head.logits(&z), z.to_vec());
    }

    #[test]
    fn affine_readout() {
        let head = OutputHead {
            mode: HeadMode::QValues,
            weights: vec![10.0],
            biases: vec![5.0],
            action_wires: vec![0],
        };
        assert_eq!(head.logits(&[0.5]), vec![10.0]);
    }

    #[test]
    fn softmax_examples() {
        let p = softmax(&[0.3, 0.3, 0.3]);
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));

        let p = softmax(&[1.0, 0.0]);
        let e = std::f64::consts::E;
        assert!((p[0] - e / (e + 1.0)).abs() < 1e-12);
        assert!((p[1] - 1.0 / (e + 1.0)).abs() < 1e-12);
        assert!((p[0] - 0.7311).abs() < 1e-4);
    }

    #[test]
    fn softmax_never_hits_bounds() {
        for logits in [[1e6, -1e6], [800.0, 0.0], [0.0, 40.0]] {
            let p = softmax(&logits);
            assert!(p.iter().all(|&x| x > 0.0 && x < 1.0), "{p:?}");
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            assert!(log_softmax(&logits).iter().all(|l| l.is_finite()));
        }
    }

    #[test]
    fn mode_and_shape_checks() {
        let head = OutputHead::for_actions(HeadMode::PolicyProbs, 2, 4);
        assert!(head.expect_mode(HeadMode::QValues).is_err());
        assert!(head.validate(4).is_ok());
        assert!(head.validate(1).is_err());
        let mut broken = head.clone();
        broken.biases.pop();
        assert!(broken.validate(4).is_err());
    }
}
