use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::qmath::{lift, ops, ComplexMatrix};

/// Largest register the processor model supports.
pub const MAX_QUBITS: usize = 6;

const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// One control Hamiltonian `H_j`, kept both as its local operator on a
/// contiguous block of qubits and lifted to the full register.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlTerm {
    pub label: String,
    pub first_qubit: usize,
    pub local: ComplexMatrix,
    pub full: ComplexMatrix,
}

impl ControlTerm {
    pub fn span(&self) -> usize {
        crate::qmath::qubit_count(self.local.rows()).unwrap_or(0)
    }

    fn within(&self, first: usize, len: usize) -> bool {
        self.first_qubit >= first && self.first_qubit + self.span() <= first + len
    }
}

/// `H(t) = H_d + Σ_j u_j(t)·H_j` with `|u_j| ≤ u_max`, `ħ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Processor {
    n_qubits: usize,
    drift: ComplexMatrix,
    terms: Vec<ControlTerm>,
    u_max: f64,
}

impl Processor {
    /// `terms` are `(label, first_qubit, local operator)` triples.
    pub fn new(
        n_qubits: usize,
        drift: ComplexMatrix,
        terms: Vec<(String, usize, ComplexMatrix)>,
        u_max: f64,
    ) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::arg(format!(
                "processor supports 1..={MAX_QUBITS} qubits, got {n_qubits}"
            )));
        }
        let dim = 1usize << n_qubits;
        if !drift.is_square() || drift.rows() != dim {
            return Err(Error::arg("drift dimension does not match the register"));
        }
        if drift.hermitian_deviation() > HERMITIAN_TOLERANCE {
            return Err(Error::arg("drift Hamiltonian is not Hermitian"));
        }
        if !(u_max > 0.0) || !u_max.is_finite() {
            return Err(Error::arg("u_max must be positive and finite"));
        }
        let terms = terms
            .into_iter()
            .map(|(label, first_qubit, local)| {
                if local.hermitian_deviation() > HERMITIAN_TOLERANCE {
                    return Err(Error::arg(format!("control {label} is not Hermitian")));
                }
                let full = lift(&local, first_qubit, n_qubits)?;
                Ok(ControlTerm {
                    label,
                    first_qubit,
                    local,
                    full,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_qubits,
            drift,
            terms,
            u_max,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn drift(&self) -> &ComplexMatrix {
        &self.drift
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn n_controls(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[ControlTerm] {
        &self.terms
    }

    pub fn control(&self, j: usize) -> &ComplexMatrix {
        &self.terms[j].full
    }

    pub fn control_labels(&self) -> Vec<&str> {
        self.terms.iter().map(|t| t.label.as_str()).collect()
    }

    /// `H_d + Σ u_j H_j`.
    pub fn hamiltonian(&self, amplitudes: &[f64]) -> ComplexMatrix {
        debug_assert_eq!(amplitudes.len(), self.terms.len());
        self.terms
            .iter()
            .zip(amplitudes)
            .filter(|(_, &u)| u != 0.0)
            .fold(self.drift.clone(), |h, (t, &u)| &h + &t.full.scale_real(u))
    }

    /// The sub-processor on qubits `first..first+len`, keeping only controls
    /// supported there, together with the global index of each kept control.
    ///
    /// Only defined for a zero drift, which has no cross-boundary part.
    pub fn restrict(&self, first: usize, len: usize) -> Result<(Processor, Vec<usize>)> {
        if len == 0 || first + len > self.n_qubits {
            return Err(Error::arg(format!(
                "block {first}..{} is outside the {}-qubit register",
                first + len,
                self.n_qubits
            )));
        }
        if self.drift.max_abs() != 0.0 {
            return Err(Error::arg("restriction requires a zero drift Hamiltonian"));
        }
        let mut index = Vec::new();
        let mut terms = Vec::new();
        for (j, t) in self.terms.iter().enumerate() {
            if t.within(first, len) {
                index.push(j);
                terms.push((t.label.clone(), t.first_qubit - first, t.local.clone()));
            }
        }
        let local = Processor::new(len, ComplexMatrix::zeros(1 << len, 1 << len), terms, self.u_max)?;
        Ok((local, index))
    }
}

/// Spin chain with zero drift: `σx` and `σz` on every qubit plus an
/// `XX + YY` exchange coupler between neighbours, all bounded by `2π`.
pub fn build_spin_chain_processor(n_qubits: usize) -> Result<Processor> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::arg(format!(
            "spin chain supports 1..={MAX_QUBITS} qubits, got {n_qubits}"
        )));
    }
    let mut terms = Vec::with_capacity(3 * n_qubits);
    for k in 0..n_qubits {
        terms.push((format!("sx{k}"), k, ops::sigma_x()));
        terms.push((format!("sz{k}"), k, ops::sigma_z()));
    }
    for k in 0..n_qubits.saturating_sub(1) {
        terms.push((format!("xy{k}{}", k + 1), k, ops::xy_coupling()));
    }
    let dim = 1 << n_qubits;
    Processor::new(n_qubits, ComplexMatrix::zeros(dim, dim), terms, TAU)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_counts() {
        assert_eq!(build_spin_chain_processor(1).unwrap().n_controls(), 2);
        assert_eq!(build_spin_chain_processor(2).unwrap().n_controls(), 5);
        assert_eq!(build_spin_chain_processor(4).unwrap().n_controls(), 11);
    }

    #[test]
    fn out_of_range() {
        assert!(build_spin_chain_processor(0).is_err());
        assert!(build_spin_chain_processor(7).is_err());
    }

    #[test]
    fn all_hermitian_and_sized() {
        let p = build_spin_chain_processor(3).unwrap();
        assert_eq!(p.u_max(), TAU);
        assert!(p.drift().max_abs() == 0.0);
        for t in p.terms() {
            assert!(t.full.hermitian_deviation() < 1e-12);
            assert_eq!(t.full.rows(), 8);
        }
        assert_eq!(p.control_labels(), ["sx0", "sz0", "sx1", "sz1", "sx2", "sz2", "xy01", "xy12"]);
    }

    #[test]
    fn restriction_keeps_block_controls() {
        let p = build_spin_chain_processor(4).unwrap();
        let (local, index) = p.restrict(1, 2).unwrap();
        assert_eq!(local.n_qubits(), 2);
        // sx1 sz1 sx2 sz2 xy12
        assert_eq!(index, vec![2, 3, 4, 5, 9]);
        assert_eq!(local.control_labels(), ["sx1", "sz1", "sx2", "sz2", "xy12"]);
        assert!(p.restrict(3, 2).is_err());
    }
}
