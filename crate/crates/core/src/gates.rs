//! Standard gate matrices and the [`Gate`] type.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::superop::{c, unitary_to_superop, Superoperator, C64};

pub fn identity(dim: usize) -> DMatrix<C64> {
    DMatrix::identity(dim, dim)
}

pub fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn hadamard() -> DMatrix<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

/// The phase gate `diag(1, i)`.
pub fn phase_s() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)])
}

/// Single-qubit Pauli by letter.
pub fn pauli(letter: char) -> Option<DMatrix<C64>> {
    match letter {
        'I' => Some(identity(2)),
        'X' => Some(pauli_x()),
        'Y' => Some(pauli_y()),
        'Z' => Some(pauli_z()),
        _ => None,
    }
}

/// Labels of all Pauli strings on `k` qubits, lexicographic over
/// `{I, X, Y, Z}` with qubit 0 leftmost.
pub fn pauli_labels(k: usize, include_identity: bool) -> Vec<String> {
    let mut labels = vec![String::new()];
    for _ in 0..k {
        labels = labels.into_iter().flat_map(|prefix| "IXYZ".chars().map(move |ch| format!("{prefix}{ch}"))).collect();
    }
    if !include_identity {
        labels.retain(|l| l.chars().any(|ch| ch != 'I'));
    }
    labels
}

/// Matrix of a Pauli string such as `"XZ"`.
pub fn pauli_string(label: &str) -> DMatrix<C64> {
    label
        .chars()
        .map(|ch| pauli(ch).expect("Pauli letter"))
        .reduce(|acc, p| acc.kronecker(&p))
        .unwrap_or_else(|| identity(1))
}

/// Matrices of all Pauli strings in [`pauli_labels`] order.
pub fn pauli_strings(k: usize, include_identity: bool) -> Vec<DMatrix<C64>> {
    pauli_labels(k, include_identity).iter().map(|l| pauli_string(l)).collect()
}

/// A named unitary together with its superoperator.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    label: String,
    unitary: DMatrix<C64>,
    superop: Superoperator,
}

impl Gate {
    pub fn new(label: impl Into<String>, unitary: DMatrix<C64>) -> Result<Self> {
        let superop = unitary_to_superop(&unitary)?;
        Ok(Self { label: label.into(), unitary, superop })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn unitary(&self) -> &DMatrix<C64> {
        &self.unitary
    }

    pub fn superop(&self) -> &Superoperator {
        &self.superop
    }

    pub fn num_qubits(&self) -> usize {
        self.superop.num_qubits()
    }

    pub fn dagger(&self) -> Gate {
        Gate { label: format!("{}^dag", self.label), unitary: self.unitary.adjoint(), superop: self.superop.adjoint() }
    }

    /// `P ∘ G` for a Pauli string `P` on all of the gate's qubits.
    pub fn twirled(&self, pauli_label: &str) -> Result<Gate> {
        let p = pauli_string(pauli_label);
        Gate::new(format!("{pauli_label}*{}", self.label), p * &self.unitary)
    }

    pub fn x() -> Gate {
        Gate::new("X", pauli_x()).expect("unitary")
    }

    pub fn h() -> Gate {
        Gate::new("H", hadamard()).expect("unitary")
    }

    pub fn s() -> Gate {
        Gate::new("S", phase_s()).expect("unitary")
    }

    pub fn id(num_qubits: usize) -> Gate {
        Gate::new("I", identity(1 << num_qubits)).expect("unitary")
    }
}
