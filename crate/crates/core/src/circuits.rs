//! Benchmark circuits: Deutsch-Jozsa with an XOR oracle and Grover search
//! with a CNOT-chain oracle.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use crate::error::{Error, Result};
use crate::pulse::{circuit_unitary, GateSpec};
use crate::qmath::{ops, ComplexMatrix, PureState};

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub name: String,
    pub n_qubits: usize,
    pub gates: Vec<GateSpec>,
}

impl Circuit {
    /// Checks that every gate fits in the register.
    pub fn new(name: impl Into<String>, n_qubits: usize, gates: Vec<GateSpec>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::arg("a circuit needs at least one qubit"));
        }
        for (i, g) in gates.iter().enumerate() {
            if g.acting_qubits.iter().any(|&q| q >= n_qubits) {
                return Err(Error::arg(format!(
                    "gate {i} ({}) acts outside the {n_qubits}-qubit register",
                    g.name
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            n_qubits,
            gates,
        })
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Product of the exact gate unitaries.
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        circuit_unitary(&self.gates, self.n_qubits)
    }

    /// Number of qubits touched by each gate's pulse (its contiguous span).
    pub fn gate_spans(&self) -> Vec<usize> {
        self.gates.iter().map(|g| g.span().1).collect()
    }

    /// Gate list as CSV lines `index,name,qubits`, qubits joined by `;`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "index,name,qubits")?;
        for (i, g) in self.gates.iter().enumerate() {
            let qubits: Vec<String> = g.acting_qubits.iter().map(|q| q.to_string()).collect();
            writeln!(f, "{i},{},{}", g.name, qubits.join(";"))?;
        }
        Ok(())
    }
}

fn x(q: usize) -> GateSpec {
    GateSpec::new("X", ops::sigma_x(), vec![q]).expect("valid X gate")
}

fn h(q: usize) -> GateSpec {
    GateSpec::new("H", ops::hadamard(), vec![q]).expect("valid H gate")
}

fn cnot(control: usize, target: usize) -> GateSpec {
    GateSpec::new("CNOT", ops::cnot(), vec![control, target]).expect("valid CNOT gate")
}

fn deutsch_jozsa(n_inputs: usize, balanced: bool) -> Result<Circuit> {
    if !(1..=3).contains(&n_inputs) {
        return Err(Error::arg(format!(
            "Deutsch-Jozsa supports 1..=3 input qubits, got {n_inputs}"
        )));
    }
    let n = n_inputs + 1;
    let ancilla = n_inputs;
    let mut gates = vec![x(ancilla)];
    gates.extend((0..n).map(h));
    if balanced {
        gates.extend((0..n_inputs).map(|q| cnot(q, ancilla)));
    }
    gates.extend((0..n_inputs).map(h));
    let name = if balanced { "deutsch-jozsa" } else { "deutsch-jozsa-constant" };
    Circuit::new(name, n, gates)
}

/// Deutsch-Jozsa on `n_inputs` inputs plus an ancilla (the last qubit),
/// with the balanced XOR oracle `f(x) = x₀ ⊕ x₁ ⊕ …`.
pub fn build_deutsch_jozsa(n_inputs: usize) -> Result<Circuit> {
    deutsch_jozsa(n_inputs, true)
}

/// Deutsch-Jozsa with a constant oracle (no oracle gates).
pub fn build_deutsch_jozsa_constant(n_inputs: usize) -> Result<Circuit> {
    deutsch_jozsa(n_inputs, false)
}

/// `⌊π/4·√(2ⁿ)⌋`
pub fn grover_iterations(n_qubits: usize) -> usize {
    (FRAC_PI_4 * ((1usize << n_qubits) as f64).sqrt()).floor() as usize
}

fn grover_oracle(n: usize, gates: &mut Vec<GateSpec>) {
    gates.extend((0..n).map(x));
    gates.extend((0..n - 1).map(|q| cnot(q, q + 1)));
    gates.extend((0..n).map(x));
}

/// Grover search whose oracle is the X-conjugated CNOT chain; the diffusion
/// step wraps the same block in Hadamards.
pub fn build_grover(n_qubits: usize) -> Result<Circuit> {
    if !(2..=4).contains(&n_qubits) {
        return Err(Error::arg(format!("Grover supports 2..=4 qubits, got {n_qubits}")));
    }
    let n = n_qubits;
    let mut gates: Vec<GateSpec> = (0..n).map(h).collect();
    for _ in 0..grover_iterations(n) {
        grover_oracle(n, &mut gates);
        gates.extend((0..n).map(h));
        grover_oracle(n, &mut gates);
        gates.extend((0..n).map(h));
    }
    Circuit::new("grover", n, gates)
}

/// Exact gate-by-gate evolution of `|0…0⟩`.
pub fn ideal_output_state(circuit: &Circuit) -> Result<PureState> {
    let mut psi = PureState::basis(1 << circuit.n_qubits, 0)?;
    for g in &circuit.gates {
        psi = psi.evolve(&g.full_unitary(circuit.n_qubits)?)?;
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{C64, ONE, ZERO};

    fn probability(psi: &PureState, k: usize) -> f64 {
        psi.amplitudes()[k].norm_sqr()
    }

    #[test]
    fn deutsch_jozsa_gate_counts() {
        assert_eq!(build_deutsch_jozsa(3).unwrap().len(), 11);
        assert_eq!(build_deutsch_jozsa(1).unwrap().len(), 5);
        assert!(build_deutsch_jozsa(0).is_err());
        assert!(build_deutsch_jozsa(4).is_err());
    }

    #[test]
    fn deutsch_jozsa_gate_order() {
        let c = build_deutsch_jozsa(2).unwrap();
        let names: Vec<&str> = c.gates.iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["X", "H", "H", "H", "CNOT", "CNOT", "H", "H"]);
        assert_eq!(c.gates[0].acting_qubits, [2]);
        assert_eq!(c.gates[4].acting_qubits, [0, 2]);
        assert_eq!(c.gates[5].acting_qubits, [1, 2]);
    }

    #[test]
    fn balanced_oracle_never_gives_all_zero_inputs() {
        for n in 1..=3 {
            let c = build_deutsch_jozsa(n).unwrap();
            let psi = ideal_output_state(&c).unwrap();
            // input register is the high bits; ancilla is the lowest bit
            let zero_inputs: f64 = (0..2).map(|a| probability(&psi, a)).sum();
            assert!(zero_inputs < 1e-12, "n={n}");
            let ones = ((1usize << n) - 1) << 1;
            let all_ones: f64 = (0..2).map(|a| probability(&psi, ones | a)).sum();
            assert!((all_ones - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_oracle_returns_inputs_to_zero() {
        for n in 1..=3 {
            let psi = ideal_output_state(&build_deutsch_jozsa_constant(n).unwrap()).unwrap();
            let zero_inputs: f64 = (0..2).map(|a| probability(&psi, a)).sum();
            assert!((zero_inputs - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grover_iteration_counts() {
        assert_eq!(grover_iterations(2), 1);
        assert_eq!(grover_iterations(3), 2);
        assert_eq!(grover_iterations(4), 3);
        assert!(build_grover(1).is_err());
        assert!(build_grover(5).is_err());
    }

    #[test]
    fn grover_structure() {
        let c = build_grover(4).unwrap();
        // 4 H, then per iteration 2 oracles (4 X + 3 CNOT + 4 X) and 2 H layers
        assert_eq!(c.len(), 4 + 3 * (2 * 11 + 8));
        let oracle_cnots: Vec<_> = c.gates[4..15].iter().filter(|g| g.name == "CNOT").collect();
        assert_eq!(oracle_cnots.len(), 3);
        assert!(c.gates.iter().filter(|g| g.name == "CNOT").all(|g| g.acting_qubits[1] == g.acting_qubits[0] + 1));
        assert_eq!(build_grover(2).unwrap().len(), 2 + 2 * 5 + 4);
    }

    #[test]
    fn empty_and_single_gate_states() {
        let empty = Circuit::new("empty", 2, vec![]).unwrap();
        let psi = ideal_output_state(&empty).unwrap();
        assert_eq!(psi.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
        let one = Circuit::new("h", 1, vec![h(0)]).unwrap();
        let psi = ideal_output_state(&one).unwrap();
        let r = 1.0 / 2f64.sqrt();
        for a in psi.amplitudes() {
            assert!((a - C64::new(r, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn textbook_grover_finds_marked_state() {
        let cz = GateSpec::new(
            "CZ",
            ComplexMatrix::from_diagonal(&[ONE, ONE, ONE, -ONE]),
            vec![0, 1],
        )
        .unwrap();
        let mut gates = vec![h(0), h(1), cz.clone()];
        gates.extend([h(0), h(1), x(0), x(1), cz, x(0), x(1), h(0), h(1)]);
        let c = Circuit::new("textbook", 2, gates).unwrap();
        let psi = ideal_output_state(&c).unwrap();
        let theta = (0.5f64).asin();
        assert!((probability(&psi, 3) - (3.0 * theta).sin().powi(2)).abs() < 1e-12);
        assert!((probability(&psi, 3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn states_are_normalized_and_products_unitary() {
        let circuits = [
            build_deutsch_jozsa(1).unwrap(),
            build_deutsch_jozsa(2).unwrap(),
            build_deutsch_jozsa(3).unwrap(),
            build_grover(2).unwrap(),
            build_grover(3).unwrap(),
            build_grover(4).unwrap(),
        ];
        for c in &circuits {
            let psi = ideal_output_state(c).unwrap();
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
            assert!(c.unitary().unwrap().unitarity_deviation() < 1e-10);
        }
    }

    #[test]
    fn rejects_out_of_range_gates() {
        assert!(Circuit::new("bad", 2, vec![h(2)]).is_err());
        assert!(Circuit::new("bad", 0, vec![]).is_err());
    }

    #[test]
    fn text_listing() {
        let text = build_deutsch_jozsa(1).unwrap().to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,name,qubits");
        assert_eq!(lines[1], "0,X,1");
        assert_eq!(lines[4], "3,CNOT,0;1");
    }
}
