use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{gates::rx, StateVector};

/// How an unbounded feature becomes a rotation angle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Squash {
    /// `atan(x)`, range `(-π/2, π/2)`.
    #[default]
    Arctan,
    /// `clamp(x, -π, π)`.
    Clip,
}

impl Squash {
    pub fn angle(self, x: f64) -> f64 {
        match self {
            Squash::Arctan => x.atan(),
            Squash::Clip => x.clamp(-std::f64::consts::PI, std::f64::consts::PI),
        }
    }
}

/// RX angle-encoding layout: each sublayer places features on distinct wires.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EncoderDoc", into = "EncoderDoc")]
pub struct EncoderLayout {
    n_features: usize,
    sublayers: Vec<Vec<(usize, usize)>>,
    squash: Squash,
}

#[derive(Serialize, Deserialize)]
struct EncoderDoc {
    sublayers: Vec<Vec<(usize, usize)>>,
    squash: Squash,
}

impl TryFrom<EncoderDoc> for EncoderLayout {
    type Error = Error;

    fn try_from(doc: EncoderDoc) -> Result<Self> {
        let n_features = doc.sublayers.iter().map(Vec::len).sum();
        EncoderLayout::new(n_features, doc.sublayers, doc.squash)
    }
}

impl From<EncoderLayout> for EncoderDoc {
    fn from(layout: EncoderLayout) -> Self {
        EncoderDoc {
            sublayers: layout.sublayers,
            squash: layout.squash,
        }
    }
}

impl EncoderLayout {
    /// `sublayers` holds `(wire, feature_index)` pairs.
    pub fn new(
        n_features: usize,
        sublayers: Vec<Vec<(usize, usize)>>,
        squash: Squash,
    ) -> Result<Self> {
        let mut seen = vec![false; n_features];
        for layer in &sublayers {
            let mut wires: Vec<usize> = layer.iter().map(|&(w, _)| w).collect();
            wires.sort_unstable();
            if wires.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::config(
                    "encoder sublayer assigns two features to one wire",
                ));
            }
            for &(_, f) in layer {
                if f >= n_features || seen[f] {
                    return Err(Error::config(format!(
                        "encoder feature index {f} is out of range or repeated"
                    )));
                }
                seen[f] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::config("encoder layout leaves a feature unassigned"));
        }
        Ok(Self {
            n_features,
            sublayers,
            squash,
        })
    }

    /// Chunked layout: feature `f` goes to wire `f % n_qubits` in sublayer
    /// `f / n_qubits`. Eight features on four qubits give two sublayers, wire
    /// `i` carrying features `i` and `i + 4`.
    pub fn chunked(n_features: usize, n_qubits: usize, squash: Squash) -> Self {
        let sublayers = (0..n_features)
            .collect::<Vec<_>>()
            .chunks(n_qubits.max(1))
            .map(|chunk| chunk.iter().map(|&f| (f % n_qubits, f)).collect())
            .collect();
        Self::new(n_features, sublayers, squash).expect("chunked layout is valid by construction")
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn sublayers(&self) -> &[Vec<(usize, usize)>] {
        &self.sublayers
    }

    pub fn squash(&self) -> Squash {
        self.squash
    }

    pub fn max_wire(&self) -> Option<usize> {
        self.sublayers.iter().flatten().map(|&(w, _)| w).max()
    }
}

/// Starts from `|0…0⟩` and applies `RX(angle(x_f))` for each assigned feature,
/// sublayer by sublayer.
pub fn encode(features: &[f64], layout: &EncoderLayout, n_qubits: usize) -> Result<StateVector> {
    if features.len() != layout.n_features {
        return Err(Error::contract(format!(
            "expected {} features, got {}",
            layout.n_features,
            features.len()
        )));
    }
    if layout.max_wire().is_some_and(|w| w >= n_qubits) {
        return Err(Error::contract(format!(
            "encoder layout uses wires beyond {n_qubits} qubits"
        )));
    }
    let mut state = StateVector::new_zero(n_qubits)?;
    for layer in &layout.sublayers {
        for &(wire, f) in layer {
            let angle = layout.squash.angle(features[f]);
            if angle != 0.0 {
                state.apply_single(wire, &rx(angle));
            }
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn zero_features_leave_ground_state() {
        let layout = EncoderLayout::chunked(8, 4, Squash::Arctan);
        let s = encode(&[0.0; 8], &layout, 4).unwrap();
        assert_eq!(s, StateVector::new_zero(4).unwrap());
    }

    #[test]
    fn single_feature_arctan() {
        let layout = EncoderLayout::chunked(1, 1, Squash::Arctan);
        let s = encode(&[1.0], &layout, 1).unwrap();
        assert!((s.expectation_z(0).unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn eight_features_on_four_qubits() {
        let layout = EncoderLayout::chunked(8, 4, Squash::Arctan);
        assert_eq!(layout.sublayers().len(), 2);
        assert!(layout.sublayers().iter().all(|l| l.len() == 4));
        assert_eq!(layout.sublayers()[1][2], (2, 6));
    }

    #[test]
    fn clip_squash() {
        assert_eq!(Squash::Clip.angle(10.0), std::f64::consts::PI);
        assert_eq!(Squash::Clip.angle(-0.5), -0.5);
    }

    #[test]
    fn length_mismatch_is_contract_error() {
        let layout = EncoderLayout::chunked(4, 4, Squash::Arctan);
        assert!(matches!(
            encode(&[0.0; 3], &layout, 4),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn invalid_layouts_rejected() {
        assert!(EncoderLayout::new(2, vec![vec![(0, 0), (0, 1)]], Squash::Arctan).is_err());
        assert!(EncoderLayout::new(2, vec![vec![(0, 0)], vec![(1, 0)]], Squash::Arctan).is_err());
        assert!(EncoderLayout::new(2, vec![vec![(0, 0)]], Squash::Arctan).is_err());
    }

    #[test]
    fn encoding_is_deterministic() {
        let layout = EncoderLayout::chunked(5, 4, Squash::Arctan);
        let x = [0.3, -1.2, 7.0, 0.0, 2.5];
        let a = encode(&x, &layout, 4).unwrap();
        let b = encode(&x, &layout, 4).unwrap();
        let bits = |s: &StateVector| -> Vec<(u64, u64)> {
            s.amplitudes()
                .iter()
                .map(|c| (c.re.to_bits(), c.im.to_bits()))
                .collect()
        };
        assert_eq!(bits(&a), bits(&b));
    }
}
