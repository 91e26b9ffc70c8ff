use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2×2 complex matrix stored row-major: `[m00, m01, m10, m11]`.
pub type Matrix2 = [Complex64; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// The gate alphabet available to circuit architectures.
///
/// `U3, RX, RY, RZ` act on one wire; `CU3, SWAP, CX, CY, CZ` act on two.
/// `ID` is a parameter-free single-wire no-op that lets a fixed-length genome
/// express a shallower circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    U3,
    RX,
    RY,
    RZ,
    CU3,
    SWAP,
    CX,
    CY,
    CZ,
    ID,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::U3,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::CU3,
        GateKind::SWAP,
        GateKind::CX,
        GateKind::CY,
        GateKind::CZ,
        GateKind::ID,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::U3 | GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::ID => 1,
            _ => 2,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::U3 | GateKind::CU3 => 3,
            GateKind::RX | GateKind::RY | GateKind::RZ => 1,
            GateKind::SWAP | GateKind::CX | GateKind::CY | GateKind::CZ | GateKind::ID => 0,
        }
    }

    /// Controlled kinds use `wires[0]` as control and `wires[1]` as target.
    pub fn is_controlled(self) -> bool {
        matches!(
            self,
            GateKind::CU3 | GateKind::CX | GateKind::CY | GateKind::CZ
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::U3 => "U3",
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::CU3 => "CU3",
            GateKind::SWAP => "SWAP",
            GateKind::CX => "CX",
            GateKind::CY => "CY",
            GateKind::CZ => "CZ",
            GateKind::ID => "ID",
        }
    }

    /// Accepts `CNOT` as an alias of `CX`.
    pub fn parse(name: &str) -> Option<GateKind> {
        let upper = name.trim().to_ascii_uppercase();
        if upper == "CNOT" {
            return Some(GateKind::CX);
        }
        GateKind::ALL.into_iter().find(|k| k.name() == upper)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate in a circuit: its kind, the wires it acts on, and where its
/// angles live in the owning parameter vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GatePlacement {
    pub kind: GateKind,
    pub wires: Vec<usize>,
    pub param_offset: usize,
}

impl GatePlacement {
    pub fn new(kind: GateKind, wires: Vec<usize>, param_offset: usize) -> Self {
        Self {
            kind,
            wires,
            param_offset,
        }
    }

    pub fn validate(&self, n_qubits: usize, n_params: usize) -> Result<()> {
        if self.wires.len() != self.kind.arity() {
            return Err(Error::contract(format!(
                "{} expects {} wire(s), got {:?}",
                self.kind,
                self.kind.arity(),
                self.wires
            )));
        }
        if let Some(&w) = self.wires.iter().find(|&&w| w >= n_qubits) {
            return Err(Error::contract(format!(
                "{} wire {w} out of range for {n_qubits} qubits",
                self.kind
            )));
        }
        if self.wires.len() == 2 && self.wires[0] == self.wires[1] {
            return Err(Error::contract(format!(
                "{} wires must be distinct, got {:?}",
                self.kind, self.wires
            )));
        }
        if self.param_offset + self.kind.param_count() > n_params {
            return Err(Error::contract(format!(
                "{} parameter block [{}, {}) exceeds parameter store of length {n_params}",
                self.kind,
                self.param_offset,
                self.param_offset + self.kind.param_count()
            )));
        }
        Ok(())
    }

    /// The angles of this gate within `params`. Caller must have validated.
    pub fn angles<'a>(&self, params: &'a [f64]) -> &'a [f64] {
        &params[self.param_offset..self.param_offset + self.kind.param_count()]
    }
}

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary {
    dim: usize,
    data: Vec<Complex64>,
}

impl Unitary {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = ONE;
        }
        Self { dim, data }
    }

    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data length");
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn matmul(&self, rhs: &Unitary) -> Unitary {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        Unitary { dim: n, data: out }
    }

    pub fn kron(&self, rhs: &Unitary) -> Unitary {
        let (n, m) = (self.dim, rhs.dim);
        let dim = n * m;
        let mut out = vec![ZERO; dim * dim];
        for r1 in 0..n {
            for c1 in 0..n {
                let a = self.data[r1 * n + c1];
                if a == ZERO {
                    continue;
                }
                for r2 in 0..m {
                    for c2 in 0..m {
                        out[(r1 * m + r2) * dim + c1 * m + c2] = a * rhs.data[r2 * m + c2];
                    }
                }
            }
        }
        Unitary { dim, data: out }
    }

    pub fn dagger(&self) -> Unitary {
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                out[c * n + r] = self.data[r * n + c].conj();
            }
        }
        Unitary { dim: n, data: out }
    }

    pub fn scale(&self, factor: Complex64) -> Unitary {
        Unitary {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * factor).collect(),
        }
    }

    pub fn add(&self, rhs: &Unitary) -> Unitary {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        Unitary {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn apply(&self, vector: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(vector.len(), self.dim, "apply dimension mismatch");
        (0..self.dim)
            .map(|r| {
                self.data[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(vector)
                    .map(|(a, v)| a * v)
                    .sum()
            })
            .collect()
    }

    pub fn max_abs_diff(&self, rhs: &Unitary) -> f64 {
        assert_eq!(self.dim, rhs.dim, "diff dimension mismatch");
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(M·M†) - I|` over entries.
    pub fn unitarity_error(&self) -> f64 {
        self.matmul(&self.dagger())
            .max_abs_diff(&Unitary::identity(self.dim))
    }
}

pub fn rx(theta: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        Complex64::new(c, 0.0),
        Complex64::new(0.0, -s),
        Complex64::new(0.0, -s),
        Complex64::new(c, 0.0),
    ]
}

pub fn ry(theta: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    ]
}

pub fn rz(theta: f64) -> Matrix2 {
    [
        Complex64::from_polar(1.0, -theta / 2.0),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, theta / 2.0),
    ]
}

pub fn u3(theta: f64, phi: f64, lambda: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        Complex64::new(c, 0.0),
        -Complex64::from_polar(s, lambda),
        Complex64::from_polar(s, phi),
        Complex64::from_polar(c, phi + lambda),
    ]
}

pub const PAULI_X: Matrix2 = [ZERO, ONE, ONE, ZERO];
pub const PAULI_Y: Matrix2 = [ZERO, Complex64::new(0.0, -1.0), I, ZERO];
pub const PAULI_Z: Matrix2 = [ONE, ZERO, ZERO, Complex64::new(-1.0, 0.0)];
pub const IDENTITY_2: Matrix2 = [ONE, ZERO, ZERO, ONE];

fn check_params(kind: GateKind, params: &[f64]) -> Result<()> {
    if params.len() != kind.param_count() {
        return Err(Error::contract(format!(
            "{kind} takes {} parameter(s), got {}",
            kind.param_count(),
            params.len()
        )));
    }
    Ok(())
}

/// The 2×2 operator a gate applies to its (target) wire.
///
/// For single-wire kinds this is the gate itself; for controlled kinds it is
/// the operator applied to the target when the control is `|1⟩`. SWAP has no
/// such operator and returns `None`.
pub fn target_operator(kind: GateKind, params: &[f64]) -> Result<Option<Matrix2>> {
    check_params(kind, params)?;
    Ok(match kind {
        GateKind::RX => Some(rx(params[0])),
        GateKind::RY => Some(ry(params[0])),
        GateKind::RZ => Some(rz(params[0])),
        GateKind::U3 | GateKind::CU3 => Some(u3(params[0], params[1], params[2])),
        GateKind::CX => Some(PAULI_X),
        GateKind::CY => Some(PAULI_Y),
        GateKind::CZ => Some(PAULI_Z),
        GateKind::ID => Some(IDENTITY_2),
        GateKind::SWAP => None,
    })
}

/// Full matrix of a gate on its own wires.
///
/// Two-wire matrices use the local basis `|w0 w1⟩` with `w0` (the control for
/// controlled kinds) as the high bit, so `CX` is the textbook
/// `[[1,0,0,0],[0,1,0,0],[0,0,0,1],[0,0,1,0]]`.
pub fn gate_matrix(kind: GateKind, params: &[f64]) -> Result<Unitary> {
    let op = target_operator(kind, params)?;
    Ok(match (kind.arity(), op) {
        (1, Some(m)) => Unitary::from_rows(2, m.to_vec()),
        (_, None) => {
            let mut data = vec![ZERO; 16];
            data[0] = ONE;
            data[4 + 2] = ONE;
            data[2 * 4 + 1] = ONE;
            data[15] = ONE;
            Unitary::from_rows(4, data)
        }
        (_, Some(m)) => {
            let mut out = Unitary::identity(4);
            out.data[2 * 4 + 2] = m[0];
            out.data[2 * 4 + 3] = m[1];
            out.data[3 * 4 + 2] = m[2];
            out.data[3 * 4 + 3] = m[3];
            out
        }
    })
}
