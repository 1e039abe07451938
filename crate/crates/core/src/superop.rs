//! Dense density matrices, observables and superoperators.
//!
//! Density matrices are vectorized by stacking columns, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`. A unitary conjugation `ρ ↦ UρU†` is
//! therefore the matrix `conj(U) ⊗ U`. Qubit 0 is the most significant bit of
//! a basis index: `|q0 q1 … q(n-1)⟩`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::TOL;

pub type C64 = Complex64;

/// Largest register handled by the dense representation.
pub const MAX_QUBITS: usize = 4;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

fn qubits_for_dim(dim: usize) -> Option<usize> {
    if dim.is_power_of_two() && dim >= 2 {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

/// Column-stacking vectorization.
pub fn vectorize(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &DVector<C64>, dim: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// A density matrix on `dim = 2ⁿ` levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian, unit trace, positive semidefinite.
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(data)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a square matrix without checking physicality. Outputs of
    /// non-physical maps (such as a reconstructed quasi-probability sum) are
    /// represented this way.
    pub fn from_matrix_unchecked(data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch { expected: data.nrows(), found: data.ncols() });
        }
        if qubits_for_dim(data.nrows()).is_none() {
            return Err(Error::InvalidState(format!("dimension {} is not a power of two", data.nrows())));
        }
        Ok(Self { data })
    }

    /// `|0…0⟩⟨0…0|` on `num_qubits` qubits.
    pub fn zero_state(num_qubits: usize) -> Self {
        Self::basis_state(1 << num_qubits, 0)
    }

    /// `|i⟩⟨i|` in a `dim`-level system.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut data = DMatrix::zeros(dim, dim);
        data[(index, index)] = c(1.0, 0.0);
        Self { data }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { data: DMatrix::identity(dim, dim) / c(dim as f64, 0.0) }
    }

    /// `|ψ⟩⟨ψ|` for a normalized ket.
    pub fn pure(ket: &DVector<C64>) -> Result<Self> {
        let norm = ket.norm();
        if (norm - 1.0).abs() > TOL.state {
            return Err(Error::InvalidState(format!("ket norm {norm} is not 1")));
        }
        Self::new(ket * ket.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn vectorize(&self) -> DVector<C64> {
        vectorize(&self.data)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermitian_deviation(&self.data);
        if herm > TOL.state {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - c(1.0, 0.0)).norm() > TOL.state {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_eig = self.data.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -TOL.psd_floor {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(())
    }

    /// Reduced state on `keep` (a single qubit index), tracing out the rest.
    pub fn reduced_qubit(&self, keep: usize) -> DMatrix<C64> {
        let n = self.num_qubits();
        let shift = n - 1 - keep;
        let mut out = DMatrix::zeros(2, 2);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let rest_i = i & !(1 << shift);
                let rest_j = j & !(1 << shift);
                if rest_i == rest_j {
                    out[((i >> shift) & 1, (j >> shift) & 1)] += self.data[(i, j)];
                }
            }
        }
        out
    }
}

/// A Hermitian observable.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    data: DMatrix<C64>,
}

impl Observable {
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch { expected: data.nrows(), found: data.ncols() });
        }
        let dev = hermitian_deviation(&data);
        if dev > TOL.state {
            return Err(Error::NonHermitian(dev));
        }
        Ok(Self { data })
    }

    /// The projector `|i⟩⟨i|`.
    pub fn projector(dim: usize, index: usize) -> Self {
        Self { data: DensityMatrix::basis_state(dim, index).data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    /// Spectral decomposition grouped by distinct eigenvalue:
    /// `A = Σ a_k P_k` with orthogonal projectors `P_k`.
    pub fn spectral_projectors(&self) -> Vec<(f64, DMatrix<C64>)> {
        let eig = self.data.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut groups: Vec<(f64, DMatrix<C64>)> = Vec::new();
        for k in order {
            let value = eig.eigenvalues[k];
            let v = eig.eigenvectors.column(k);
            let proj = v * v.adjoint();
            match groups.last_mut() {
                Some((last, p)) if (value - *last).abs() < 1e-9 => *p += proj,
                _ => groups.push((value, proj)),
            }
        }
        groups
    }
}

/// A linear map on `dim × dim` matrices, stored as a `dim² × dim²` matrix
/// acting on column-stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: DMatrix<C64>,
}

impl Superoperator {
    pub fn identity(dim: usize) -> Self {
        let d2 = dim * dim;
        Self { dim, matrix: DMatrix::identity(d2, d2) }
    }

    pub fn zero(dim: usize) -> Self {
        let d2 = dim * dim;
        Self { dim, matrix: DMatrix::zeros(d2, d2) }
    }

    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        let d2 = matrix.nrows();
        if matrix.ncols() != d2 {
            return Err(Error::DimensionMismatch { expected: d2, found: matrix.ncols() });
        }
        let dim = (d2 as f64).sqrt().round() as usize;
        if dim * dim != d2 || qubits_for_dim(dim).is_none() {
            return Err(Error::InvalidArgument(format!("superoperator side {d2} is not the square of a power of two")));
        }
        if dim > 1 << MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("more than {MAX_QUBITS} qubits")));
        }
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// Conjugate transpose of the matrix. For a unitary channel this is the
    /// channel of the inverse unitary.
    pub fn adjoint(&self) -> Self {
        Self { dim: self.dim, matrix: self.matrix.adjoint() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { dim: self.dim, matrix: &self.matrix * c(factor, 0.0) }
    }

    /// `Σ wᵢ Sᵢ` over a nonempty list of equally sized maps.
    pub fn linear_combination<'a, I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, &'a Superoperator)>,
    {
        let mut acc: Option<Superoperator> = None;
        for (w, s) in terms {
            match acc.as_mut() {
                None => acc = Some(s.scaled(w)),
                Some(a) => {
                    if a.dim != s.dim {
                        return Err(Error::DimensionMismatch { expected: a.dim, found: s.dim });
                    }
                    a.matrix += &s.matrix * c(w, 0.0);
                }
            }
        }
        acc.ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))
    }

    /// Largest entry-wise deviation from another map.
    pub fn distance(&self, other: &Superoperator) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        max_abs(&(&self.matrix - &other.matrix))
    }

    /// Image of the matrix unit `|i⟩⟨j|`.
    fn image_of_unit(&self, i: usize, j: usize) -> DMatrix<C64> {
        let col = self.matrix.column(i + j * self.dim).into_owned();
        devectorize(&col, self.dim)
    }

    /// Largest deviation of `tr[S(|i⟩⟨j|)]` from `δᵢⱼ` over all matrix units.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for j in 0..d {
            for i in 0..d {
                // tr of the devectorized column: sum of entries at (k, k).
                let col = i + j * d;
                let tr: C64 = (0..d).map(|k| self.matrix[(k + k * d, col)]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((tr - c(expected, 0.0)).norm());
            }
        }
        worst
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_error() <= tol
    }

    /// Choi matrix `Σᵢⱼ |i⟩⟨j| ⊗ S(|i⟩⟨j|)`.
    pub fn choi(&self) -> DMatrix<C64> {
        let d = self.dim;
        let mut out = DMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let block = self.image_of_unit(i, j);
                out.view_mut((i * d, j * d), (d, d)).copy_from(&block);
            }
        }
        out
    }

    /// Smallest eigenvalue of the (Hermitian part of the) Choi matrix.
    pub fn min_choi_eigenvalue(&self) -> f64 {
        let choi = self.choi();
        let herm = (&choi + choi.adjoint()) * c(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_completely_positive(&self, floor: f64) -> bool {
        self.min_choi_eigenvalue() >= -floor
    }

    pub fn is_channel(&self) -> bool {
        self.is_trace_preserving(TOL.physical) && self.is_completely_positive(TOL.psd_floor)
    }

    /// Pauli transfer matrix `Rᵢⱼ = tr[Pᵢ S(Pⱼ)] / d` over Pauli strings in
    /// lexicographic `{I, X, Y, Z}` order.
    pub fn pauli_transfer_matrix(&self) -> DMatrix<f64> {
        let paulis = crate::gates::pauli_strings(self.num_qubits(), true);
        let n = paulis.len();
        let mut r = DMatrix::zeros(n, n);
        for (j, pj) in paulis.iter().enumerate() {
            let image = devectorize(&(&self.matrix * vectorize(pj)), self.dim);
            for (i, pi) in paulis.iter().enumerate() {
                r[(i, j)] = (pi * &image).trace().re / self.dim as f64;
            }
        }
        r
    }
}

fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let d = u.nrows();
    max_abs(&(u.adjoint() * u - DMatrix::<C64>::identity(d, d)))
}

/// `ρ ↦ UρU†` as the matrix `conj(U) ⊗ U`.
pub fn unitary_to_superop(u: &DMatrix<C64>) -> Result<Superoperator> {
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), found: u.ncols() });
    }
    let deviation = unitarity_deviation(u);
    if deviation > TOL.physical {
        return Err(Error::NotUnitary { deviation });
    }
    Superoperator::from_matrix(u.conjugate().kronecker(u))
}

/// `ρ ↦ Σ KρK†` for a complete Kraus list.
pub fn kraus_to_superop(kraus: &[DMatrix<C64>]) -> Result<Superoperator> {
    let first = kraus.first().ok_or_else(|| Error::InvalidArgument("empty Kraus list".into()))?;
    let d = first.nrows();
    let mut completeness = DMatrix::<C64>::zeros(d, d);
    let mut matrix = DMatrix::<C64>::zeros(d * d, d * d);
    for k in kraus {
        if k.nrows() != d || k.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: k.nrows().max(k.ncols()) });
        }
        completeness += k.adjoint() * k;
        matrix += k.conjugate().kronecker(k);
    }
    let residual = max_abs(&(completeness - DMatrix::<C64>::identity(d, d)));
    if residual > TOL.kraus {
        return Err(Error::IncompleteKraus { residual });
    }
    Superoperator::from_matrix(matrix)
}

/// `second ∘ first`: apply `first`, then `second`.
pub fn compose(second: &Superoperator, first: &Superoperator) -> Result<Superoperator> {
    if second.dim != first.dim {
        return Err(Error::DimensionMismatch { expected: second.dim, found: first.dim });
    }
    Ok(Superoperator { dim: first.dim, matrix: &second.matrix * &first.matrix })
}

pub fn apply(s: &Superoperator, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if s.dim != rho.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim, found: rho.dim() });
    }
    let out = &s.matrix * rho.vectorize();
    Ok(DensityMatrix { data: devectorize(&out, s.dim) })
}

/// `Re tr[Aρ]`; fails when the imaginary part is not negligible.
pub fn expectation(a: &Observable, rho: &DensityMatrix) -> Result<f64> {
    if a.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: rho.dim() });
    }
    let value = (a.matrix() * rho.matrix()).trace();
    if value.im.abs() > TOL.imaginary {
        return Err(Error::Numerical(format!("expectation value has imaginary part {:.3e}", value.im)));
    }
    Ok(value.re)
}

/// Extends a map on `targets.len()` qubits to an `n`-qubit register, acting
/// as the identity on the other qubits. `targets[0]` is the most significant
/// qubit of the small map.
pub fn embed(s: &Superoperator, targets: &[usize], n: usize) -> Result<Superoperator> {
    let k = s.num_qubits();
    if targets.len() != k {
        return Err(Error::InvalidTargets(format!("{} targets for a {k}-qubit map", targets.len())));
    }
    if n > MAX_QUBITS || k > n {
        return Err(Error::InvalidTargets(format!("{k}-qubit map on {n} qubits")));
    }
    for (idx, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(Error::InvalidTargets(format!("qubit {t} out of range for {n} qubits")));
        }
        if targets[..idx].contains(&t) {
            return Err(Error::InvalidTargets(format!("duplicate target {t}")));
        }
    }
    if k == n && targets.iter().enumerate().all(|(i, &t)| i == t) {
        return Ok(s.clone());
    }

    let dim = 1usize << n;
    let dk = s.dim;
    // Bit position (from the least significant end) of each target.
    let shifts: Vec<usize> = targets.iter().map(|&t| n - 1 - t).collect();
    let target_mask: usize = shifts.iter().map(|&sh| 1 << sh).sum();
    let split = |index: usize| -> (usize, usize) {
        let local = shifts.iter().fold(0, |acc, &sh| (acc << 1) | ((index >> sh) & 1));
        (local, index & !target_mask)
    };
    let join = |local: usize, rest: usize| -> usize {
        let mut index = rest;
        for (pos, &sh) in shifts.iter().enumerate() {
            let bit = (local >> (k - 1 - pos)) & 1;
            index |= bit << sh;
        }
        index
    };

    let mut matrix = DMatrix::<C64>::zeros(dim * dim, dim * dim);
    for out_col in 0..dim {
        let (b, rest_c) = split(out_col);
        for out_row in 0..dim {
            let (a, rest_r) = split(out_row);
            let out_idx = out_row + out_col * dim;
            for b_in in 0..dk {
                for a_in in 0..dk {
                    let value = s.matrix[(a + b * dk, a_in + b_in * dk)];
                    if value == c(0.0, 0.0) {
                        continue;
                    }
                    let in_idx = join(a_in, rest_r) + join(b_in, rest_c) * dim;
                    matrix[(out_idx, in_idx)] = value;
                }
            }
        }
    }
    Superoperator::from_matrix(matrix)
}
