use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense complex matrix.
///
/// Backed by a column-major `nalgebra` matrix, so `as_slice` on a density
/// matrix is already its column-stacked vectorization.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::arg("matrix dimensions must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(Error::arg(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::arg("matrix entries must be finite"));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    /// Real row-major convenience constructor, used mostly for fixed gates.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        let v: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_major(rows, cols, &v).expect("well-formed real matrix")
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_inner(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.0.nrows()
    }

    pub fn is_square(&self) -> bool {
        self.0.nrows() == self.0.ncols()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[(r, c)]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.0[(r, c)] = v;
    }

    /// Column-major view; for a square state this is `vec(ρ)` under column stacking.
    pub fn as_slice(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let x = DVector::from_column_slice(v);
        (&self.0 * x).as_slice().to_vec()
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_one(&self) -> f64 {
        self.0
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max |m_ij − conj(m_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.rows();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.0[(r, c)] - self.0[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// `max |(U†U − I)_ij|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.0.adjoint() * &self.0;
        (p - DMatrix::<C64>::identity(self.rows(), self.cols()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Inverse via LU; `None` when singular.
    pub fn try_inverse(&self) -> Option<Self> {
        self.0.clone().try_inverse().map(Self)
    }

    /// Solves `self · X = rhs`.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        self.0.clone().lu().solve(&rhs.0).map(Self)
    }

    /// Hermitian eigendecomposition of the Hermitian part of `self`.
    ///
    /// Returns eigenvalues (ascending) and the unitary whose columns are the
    /// matching eigenvectors.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, ComplexMatrix) {
        let h = self.hermitian_part().0;
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let n = self.rows();
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vecs = DMatrix::<C64>::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vecs.set_column(dst, &eig.eigenvectors.column(src));
        }
        (values, Self(vecs))
    }

    /// `V · diag(f(λ)) · V†` for the Hermitian part of `self`.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> C64) -> Self {
        let (vals, vecs) = self.hermitian_eigen();
        let d: Vec<C64> = vals.into_iter().map(f).collect();
        let scaled = Self(vecs.0.clone() * DMatrix::from_diagonal(&DVector::from_vec(d)));
        Self(scaled.0 * vecs.0.adjoint())
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - rhs.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}

/// Kronecker product of `factors`, left to right; qubit 0 is the leftmost
/// factor and therefore the most significant bit of the basis index.
pub fn tensor_product(factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::arg("tensor_product needs at least one factor"))?;
    if factors.iter().any(|f| !f.is_square()) {
        return Err(Error::arg("tensor_product factors must be square"));
    }
    Ok(rest.iter().fold(first.clone(), |acc, f| acc.kron(f)))
}

/// Embeds a `k`-qubit operator acting on the contiguous block starting at
/// `first_qubit` into an `n_qubits` register.
pub fn lift(op: &ComplexMatrix, first_qubit: usize, n_qubits: usize) -> Result<ComplexMatrix> {
    let k = qubit_count(op.rows())
        .ok_or_else(|| Error::arg("operator dimension must be a power of two"))?;
    if first_qubit + k > n_qubits {
        return Err(Error::arg(format!(
            "{k}-qubit operator at qubit {first_qubit} does not fit in {n_qubits} qubits"
        )));
    }
    let before = ComplexMatrix::identity(1 << first_qubit);
    let after = ComplexMatrix::identity(1 << (n_qubits - first_qubit - k));
    tensor_product(&[before, op.clone(), after])
}

/// `log2(dim)` when `dim` is a power of two.
pub fn qubit_count(dim: usize) -> Option<usize> {
    (dim.is_power_of_two()).then(|| dim.trailing_zeros() as usize)
}

/// Standard single- and two-qubit operators.
pub mod ops {
    use super::{ComplexMatrix, C64};

    pub fn identity2() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn sigma_y() -> ComplexMatrix {
        let z = C64::new(0.0, 0.0);
        ComplexMatrix::from_row_major(2, 2, &[z, C64::new(0.0, -1.0), C64::new(0.0, 1.0), z])
            .expect("2x2")
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    /// `σ⁻ = |0⟩⟨1|`.
    pub fn sigma_minus() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0])
    }

    pub fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real(2, 2, &[s, s, s, -s])
    }

    /// CNOT with the control on the more significant qubit.
    pub fn cnot() -> ComplexMatrix {
        #[rustfmt::skip]
        let m = [
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, 1.0, 0.0,
        ];
        ComplexMatrix::from_real(4, 4, &m)
    }

    /// `σx⊗σx + σy⊗σy`.
    pub fn xy_coupling() -> ComplexMatrix {
        &sigma_x().kron(&sigma_x()) + &sigma_y().kron(&sigma_y())
    }
}
