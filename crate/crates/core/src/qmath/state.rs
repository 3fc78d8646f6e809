use crate::error::{Error, Result};

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};

/// Tolerance used by [`validate_density_matrix`] for all three invariants.
pub const DENSITY_TOLERANCE: f64 = 1e-9;

/// Pure-state normalization tolerance.
pub const PURE_NORM_TOLERANCE: f64 = 1e-12;

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        Ok(PureState::basis(dim, k)?.to_density())
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Re-validates a numerically produced state with a looser tolerance.
    ///
    /// The Hermitian part is taken and the trace renormalized; eigenvalues in
    /// `[-tolerance, 0)` are clamped to zero. Violations beyond `tolerance`
    /// are reported as [`Error::NumericalInstability`].
    pub fn regularize(m: &ComplexMatrix, tolerance: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::arg("density matrix must be square"));
        }
        if !m.is_finite() {
            return Err(Error::NumericalInstability("state has non-finite entries".into()));
        }
        let herm = m.hermitian_deviation();
        if herm > tolerance {
            return Err(Error::NumericalInstability(format!(
                "Hermiticity violated by {herm:e}"
            )));
        }
        let h = m.hermitian_part();
        let tr = h.trace().re;
        if (tr - 1.0).abs() > tolerance {
            return Err(Error::NumericalInstability(format!("trace drifted to {tr}")));
        }
        let h = h.scale_real(1.0 / tr);
        let (vals, _) = h.hermitian_eigen();
        let min = vals.first().copied().unwrap_or(0.0);
        if min < -tolerance {
            return Err(Error::NumericalInstability(format!(
                "smallest eigenvalue {min:e}"
            )));
        }
        if min < -DENSITY_TOLERANCE {
            let clamped = h.hermitian_map(|l| C64::new(l.max(0.0), 0.0));
            let t = clamped.trace().re;
            return Ok(Self {
                matrix: clamped.scale_real(1.0 / t),
            });
        }
        Ok(Self { matrix: h })
    }
}

/// Checks Hermiticity, unit trace and positivity, in that order.
pub fn validate_density_matrix(m: &ComplexMatrix) -> Result<DensityMatrix> {
    if !m.is_square() {
        return Err(Error::arg(format!(
            "density matrix must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::arg("density matrix has non-finite entries"));
    }
    let herm = m.hermitian_deviation();
    if herm > DENSITY_TOLERANCE {
        return Err(Error::NotHermitian(herm));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > DENSITY_TOLERANCE || tr.im.abs() > DENSITY_TOLERANCE {
        return Err(Error::TraceMismatch(tr.re));
    }
    let (vals, _) = m.hermitian_eigen();
    let min = vals.first().copied().unwrap_or(0.0);
    if min < -DENSITY_TOLERANCE {
        return Err(Error::NotPositive(min));
    }
    Ok(DensityMatrix { matrix: m.clone() })
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::arg("state vector must be non-empty"));
        }
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > PURE_NORM_TOLERANCE {
            return Err(Error::arg(format!("state vector has squared norm {norm2}")));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `amplitudes` before wrapping them.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::arg("cannot normalize a zero or non-finite vector"));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::arg(format!("basis index {k} out of range for dimension {dim}")));
        }
        let mut v = vec![ZERO; dim];
        v[k] = ONE;
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies a unitary; the result is renormalized only by construction of `u`.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self> {
        if !u.is_square() || u.rows() != self.dim() {
            return Err(Error::arg("operator dimension does not match state"));
        }
        Ok(Self {
            amplitudes: u.mul_vec(&self.amplitudes),
        })
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap_sqr(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                m.set(r, c, self.amplitudes[r] * self.amplitudes[c].conj());
            }
        }
        DensityMatrix { matrix: m }
    }
}

/// Uhlmann fidelity `F(ρ,σ) = (Tr √(√ρ σ √ρ))²`, clamped to `[0, 1]`.
///
/// Square roots come from Hermitian eigendecompositions; eigenvalues below a
/// round-off floor are treated as zero so rank-deficient (pure) inputs do
/// not pick up spurious `√ε` contributions.
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::arg(format!(
            "fidelity dimension mismatch: {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let sqrt_rho = psd_sqrt(rho.matrix());
    let inner = &(&sqrt_rho * sigma.matrix()) * &sqrt_rho;
    let (vals, _) = inner.hermitian_eigen();
    let floor = eigen_floor(&vals, rho.dim());
    let root_trace: f64 = vals
        .iter()
        .map(|&l| if l > floor { l.sqrt() } else { 0.0 })
        .sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// `½·Tr|ρ − σ|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::arg(format!(
            "trace distance dimension mismatch: {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let (vals, _) = (rho.matrix() - sigma.matrix()).hermitian_eigen();
    Ok(0.5 * vals.iter().map(|l| l.abs()).sum::<f64>())
}

fn eigen_floor(vals: &[f64], dim: usize) -> f64 {
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    64.0 * f64::EPSILON * dim as f64 * scale.max(f64::MIN_POSITIVE)
}

fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let (vals, vecs) = m.hermitian_eigen();
    let floor = eigen_floor(&vals, m.rows());
    let n = m.rows();
    let mut scaled = vecs.clone();
    for (c, &l) in vals.iter().enumerate() {
        let s = if l > floor { l.sqrt() } else { 0.0 };
        for r in 0..n {
            scaled.set(r, c, vecs.get(r, c) * s);
        }
    }
    &scaled * &vecs.adjoint()
}
