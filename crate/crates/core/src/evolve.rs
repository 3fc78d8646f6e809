//! Lindblad evolution of a density matrix under a piecewise-constant
//! pulse schedule.
//!
//! Density matrices are vectorized by stacking columns, which is also
//! nalgebra's storage order, so `vec(ρ)` is just the matrix's slice.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::noise::CollapseOperator;
use crate::pulse::{Processor, PulseSchedule};
use crate::qmath::{
    exponential_action, matrix_exponential, unitary_propagator, ComplexMatrix, DensityMatrix, C64, I,
};

/// Final states are accepted when trace and positivity errors stay below
/// this bound.
pub const OUTPUT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Cap on generator applications per slice.
    pub max_substeps: usize,
    pub substep_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_substeps: 100_000,
            substep_tolerance: 1e-8,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_substeps == 0 {
            return Err(Error::arg("max_substeps must be at least 1"));
        }
        if !(self.substep_tolerance > 0.0) || !self.substep_tolerance.is_finite() {
            return Err(Error::arg("substep_tolerance must be positive and finite"));
        }
        Ok(())
    }
}

/// Generator `L` of `d vec(ρ)/dt = L·vec(ρ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Liouvillian {
    superoperator: ComplexMatrix,
}

impl Liouvillian {
    pub fn superoperator(&self) -> &ComplexMatrix {
        &self.superoperator
    }

    /// Hilbert-space dimension `d` (the superoperator is `d²×d²`).
    pub fn dim(&self) -> usize {
        (self.superoperator.rows() as f64).sqrt().round() as usize
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let out = self.superoperator.mul_vec(rho.as_slice());
        ComplexMatrix::from_inner(DMatrix::from_column_slice(d, d, &out))
    }

    /// `exp(L·t)` as a dense matrix.
    pub fn propagator(&self, t: f64) -> Result<ComplexMatrix> {
        matrix_exponential(&self.superoperator.scale_real(t))
    }

    fn dissipator(collapse: &[CollapseOperator], d: usize) -> Result<ComplexMatrix> {
        let id = ComplexMatrix::identity(d);
        let mut out = ComplexMatrix::zeros(d * d, d * d);
        for c in collapse {
            let op = &c.operator;
            if !op.is_square() || op.rows() != d {
                return Err(Error::arg(format!(
                    "collapse operator {} has dimension {}, expected {d}",
                    c.label(),
                    op.rows()
                )));
            }
            let cdc = &op.adjoint() * op;
            out = &out + &op.conj().kron(op);
            out = &out - &id.kron(&cdc).scale_real(0.5);
            out = &out - &cdc.transpose().kron(&id).scale_real(0.5);
        }
        Ok(out)
    }

    fn hamiltonian_part(h: &ComplexMatrix) -> ComplexMatrix {
        let id = ComplexMatrix::identity(h.rows());
        (&id.kron(h) - &h.transpose().kron(&id)).scale(-I)
    }
}

/// `L = −i(I⊗H − Hᵀ⊗I) + Σ [C̄⊗C − ½I⊗C†C − ½(C†C)ᵀ⊗I]`.
pub fn build_liouvillian(h: &ComplexMatrix, collapse: &[CollapseOperator]) -> Result<Liouvillian> {
    if !h.is_square() {
        return Err(Error::arg("Hamiltonian must be square"));
    }
    let dissipator = Liouvillian::dissipator(collapse, h.rows())?;
    Ok(Liouvillian {
        superoperator: &Liouvillian::hamiltonian_part(h) + &dissipator,
    })
}

fn check_dims(rho0: &DensityMatrix, schedule: &PulseSchedule, proc: &Processor) -> Result<()> {
    if rho0.dim() != proc.dim() {
        return Err(Error::arg(format!(
            "state dimension {} does not match the {}-dimensional processor",
            rho0.dim(),
            proc.dim()
        )));
    }
    if schedule.n_controls() != proc.n_controls() {
        return Err(Error::arg(format!(
            "schedule has {} controls, processor has {}",
            schedule.n_controls(),
            proc.n_controls()
        )));
    }
    Ok(())
}

type SliceKey = (Vec<u64>, u64);

fn slice_key(amplitudes: &[f64], duration: f64) -> SliceKey {
    (amplitudes.iter().map(|u| u.to_bits()).collect(), duration.to_bits())
}

/// Evolves `rho0` through every slice of `schedule`.
///
/// Without collapse operators the dynamics are unitary and each distinct
/// slice propagator is computed once. Otherwise each slice applies
/// `exp(L·Δt)` to `vec(ρ)` by a truncated Taylor series.
pub fn propagate(
    rho0: &DensityMatrix,
    schedule: &PulseSchedule,
    proc: &Processor,
    collapse: &[CollapseOperator],
    opts: &SolverOptions,
) -> Result<DensityMatrix> {
    check_dims(rho0, schedule, proc)?;
    opts.validate()?;
    if schedule.is_empty() {
        return Ok(rho0.clone());
    }
    let d = proc.dim();
    let rho = if collapse.is_empty() {
        let mut cache: HashMap<SliceKey, ComplexMatrix> = HashMap::new();
        let mut rho = rho0.matrix().clone();
        for s in schedule.slices() {
            let u = cache
                .entry(slice_key(&s.amplitudes, s.duration))
                .or_insert_with(|| unitary_propagator(&proc.hamiltonian(&s.amplitudes), s.duration));
            rho = &(&*u * &rho) * &u.adjoint();
        }
        rho
    } else {
        let dissipator = Liouvillian::dissipator(collapse, d)?;
        let mut v: Vec<C64> = rho0.matrix().as_slice().to_vec();
        for s in schedule.slices() {
            let l = &Liouvillian::hamiltonian_part(&proc.hamiltonian(&s.amplitudes)) + &dissipator;
            let generator = l.scale_real(s.duration);
            v = exponential_action(
                |x| generator.mul_vec(x),
                generator.norm_one(),
                &v,
                opts.substep_tolerance,
                opts.max_substeps,
            )?;
        }
        ComplexMatrix::from_inner(DMatrix::from_column_slice(d, d, &v))
    };
    DensityMatrix::regularize(&rho, OUTPUT_TOLERANCE)
}

/// Same evolution as [`propagate`], computed with a dense `exp(L·Δt)` per
/// slice. Slower; kept as an independent check.
pub fn propagate_dense(
    rho0: &DensityMatrix,
    schedule: &PulseSchedule,
    proc: &Processor,
    collapse: &[CollapseOperator],
) -> Result<DensityMatrix> {
    check_dims(rho0, schedule, proc)?;
    let d = proc.dim();
    let mut v: Vec<C64> = rho0.matrix().as_slice().to_vec();
    for s in schedule.slices() {
        let l = build_liouvillian(&proc.hamiltonian(&s.amplitudes), collapse)?;
        v = l.propagator(s.duration)?.mul_vec(&v);
    }
    DensityMatrix::regularize(&ComplexMatrix::from_inner(DMatrix::from_column_slice(d, d, &v)), OUTPUT_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{build_collapse_operators, Channel, NoiseParams};
    use crate::pulse::{build_spin_chain_processor, Slice};
    use crate::qmath::{ops, state_fidelity, PureState, ONE};
    use proptest::prelude::*;

    fn idle(proc: &Processor, t: f64) -> PulseSchedule {
        let mut s = PulseSchedule::new(proc.n_controls());
        s.push(Slice {
            gate_index: 0,
            duration: t,
            amplitudes: vec![0.0; proc.n_controls()],
        })
        .unwrap();
        s
    }

    fn single(channel: Channel, rate: f64, op: ComplexMatrix) -> CollapseOperator {
        CollapseOperator {
            operator: op.scale_real(rate.sqrt()),
            channel,
            qubit: 0,
            rate,
        }
    }

    fn plus() -> DensityMatrix {
        let h = 1.0 / 2f64.sqrt();
        PureState::new(vec![C64::new(h, 0.0), C64::new(h, 0.0)])
            .unwrap()
            .to_density()
    }

    #[test]
    fn empty_generator_is_zero() {
        let l = build_liouvillian(&ComplexMatrix::zeros(2, 2), &[]).unwrap();
        assert_eq!(l.superoperator().max_abs(), 0.0);
        assert_eq!(l.dim(), 2);
    }

    #[test]
    fn sigma_z_rotates_coherences() {
        let l = build_liouvillian(&ops::sigma_z(), &[]).unwrap();
        let rate = l.apply(plus().matrix());
        // −i[σz, ρ] on |+⟩⟨+|: diagonal zero, ρ01 → −i, ρ10 → +i
        assert!(rate.get(0, 0).norm() < 1e-15 && rate.get(1, 1).norm() < 1e-15);
        assert!((rate.get(0, 1) - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((rate.get(1, 0) - C64::new(0.0, 1.0)).norm() < 1e-15);
        // the rate on each coherence relative to its value is ∓2i
        assert!((rate.get(0, 1) / plus().matrix().get(0, 1) - C64::new(0.0, -2.0)).norm() < 1e-14);
    }

    #[test]
    fn relaxation_rate_at_excited_state() {
        let t1 = 50.0;
        let c = single(Channel::AmplitudeDamping, 1.0 / t1, ops::sigma_minus());
        let l = build_liouvillian(&ComplexMatrix::zeros(2, 2), &[c]).unwrap();
        let excited = DensityMatrix::basis(2, 1).unwrap();
        let rate = l.apply(excited.matrix());
        assert!((rate.get(1, 1).re + 1.0 / t1).abs() < 1e-15);
        assert!((rate.get(0, 0).re - 1.0 / t1).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let c = single(Channel::Dephasing, 0.1, ComplexMatrix::identity(4));
        assert!(build_liouvillian(&ops::sigma_z(), &[c]).is_err());
        let p1 = build_spin_chain_processor(1).unwrap();
        let p2 = build_spin_chain_processor(2).unwrap();
        let rho = DensityMatrix::basis(2, 0).unwrap();
        assert!(propagate(&rho, &idle(&p2, 1.0), &p1, &[], &SolverOptions::default()).is_err());
        assert!(propagate(&DensityMatrix::basis(4, 0).unwrap(), &idle(&p1, 1.0), &p1, &[], &SolverOptions::default()).is_err());
    }

    #[test]
    fn empty_schedule_returns_input() {
        let p = build_spin_chain_processor(1).unwrap();
        let rho = plus();
        let out = propagate(&rho, &PulseSchedule::new(2), &p, &[], &SolverOptions::default()).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn amplitude_damping_decay() {
        let p = build_spin_chain_processor(1).unwrap();
        let c = single(Channel::AmplitudeDamping, 1.0 / 50.0, ops::sigma_minus());
        let out = propagate(&DensityMatrix::basis(2, 1).unwrap(), &idle(&p, 25.0), &p, &[c], &SolverOptions::default()).unwrap();
        assert!((out.matrix().get(1, 1).re - (-0.5f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn dephasing_decay() {
        let p = build_spin_chain_processor(1).unwrap();
        let ops = build_collapse_operators(
            &NoiseParams {
                t1: f64::INFINITY,
                t2: 30.0,
                ..NoiseParams::noiseless()
            },
            1,
            30.0,
        )
        .unwrap();
        assert_eq!(ops.len(), 1);
        let out = propagate(&plus(), &idle(&p, 30.0), &p, &ops, &SolverOptions::default()).unwrap();
        assert!((2.0 * out.matrix().get(0, 1).norm() - (-1.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_options() {
        let p = build_spin_chain_processor(1).unwrap();
        let bad = SolverOptions {
            max_substeps: 0,
            ..Default::default()
        };
        assert!(propagate(&plus(), &idle(&p, 1.0), &p, &[], &bad).is_err());
    }

    #[test]
    fn substep_budget_enforced() {
        let p = build_spin_chain_processor(1).unwrap();
        let c = single(Channel::AmplitudeDamping, 1.0, ops::sigma_minus());
        let tight = SolverOptions {
            max_substeps: 3,
            ..Default::default()
        };
        let err = propagate(&plus(), &idle(&p, 100.0), &p, &[c], &tight).unwrap_err();
        assert!(matches!(err, Error::NumericalInstability(_)));
    }

    #[test]
    fn noise_lowers_fidelity_monotonically() {
        let p = build_spin_chain_processor(1).unwrap();
        let c = single(Channel::AmplitudeDamping, 1.0 / 50.0, ops::sigma_minus());
        let rho = plus();
        let mut last = 1.0;
        for k in 1..=10 {
            let t = 5.0 * k as f64;
            let ideal = propagate(&rho, &idle(&p, t), &p, &[], &SolverOptions::default()).unwrap();
            let noisy = propagate(&rho, &idle(&p, t), &p, &[c.clone()], &SolverOptions::default()).unwrap();
            let f = state_fidelity(&ideal, &noisy).unwrap();
            assert!(f <= last + 1e-12);
            last = f;
        }
    }

    fn random_schedule(n_controls: usize, rows: &[(f64, Vec<f64>)]) -> PulseSchedule {
        let mut s = PulseSchedule::new(n_controls);
        for (k, (d, a)) in rows.iter().enumerate() {
            s.push(Slice {
                gate_index: k / 2,
                duration: *d,
                amplitudes: a.clone(),
            })
            .unwrap();
        }
        s
    }

    fn noise_ops(n: usize, total: f64) -> Vec<CollapseOperator> {
        build_collapse_operators(
            &NoiseParams {
                p_bit_flip: 0.02,
                p_phase_flip: 0.02,
                ..NoiseParams::default()
            },
            n,
            total,
        )
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn trace_rate_vanishes(amps in proptest::collection::vec(-6.0f64..6.0, 5)) {
            let p = build_spin_chain_processor(2).unwrap();
            let l = build_liouvillian(&p.hamiltonian(&amps), &noise_ops(2, 3.0)).unwrap();
            let rho = DensityMatrix::maximally_mixed(4);
            let mixed = (&rho.matrix().scale_real(0.5) + &DensityMatrix::basis(4, 2).unwrap().matrix().scale_real(0.5)).hermitian_part();
            for m in [rho.matrix().clone(), mixed] {
                prop_assert!(l.apply(&m).trace().norm() < 1e-10);
            }
        }

        #[test]
        fn unitary_route_matches_oracle(rows in proptest::collection::vec(
            (0.05f64..0.6, proptest::collection::vec(-6.0f64..6.0, 5)), 1..6)) {
            let p = build_spin_chain_processor(2).unwrap();
            let s = random_schedule(5, &rows);
            let mut u = ComplexMatrix::identity(4);
            for sl in s.slices() {
                u = &matrix_exponential(&p.hamiltonian(&sl.amplitudes).scale(-I * sl.duration)).unwrap() * &u;
            }
            let psi = PureState::basis(4, 1).unwrap();
            let expected = psi.evolve(&u).unwrap().to_density();
            let out = propagate(&psi.to_density(), &s, &p, &[], &SolverOptions::default()).unwrap();
            prop_assert!(state_fidelity(&out, &expected).unwrap() >= 1.0 - 1e-9);
        }

        #[test]
        fn noisy_route_matches_dense(rows in proptest::collection::vec(
            (0.05f64..0.6, proptest::collection::vec(-6.0f64..6.0, 5)), 1..5)) {
            let p = build_spin_chain_processor(2).unwrap();
            let s = random_schedule(5, &rows);
            let c = noise_ops(2, s.total_time());
            let rho = DensityMatrix::basis(4, 0).unwrap();
            let a = propagate(&rho, &s, &p, &c, &SolverOptions::default()).unwrap();
            let b = propagate_dense(&rho, &s, &p, &c).unwrap();
            prop_assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-8);
            prop_assert!((a.matrix().trace() - ONE).norm() < 1e-8);
            let (values, _) = a.matrix().hermitian_eigen();
            prop_assert!(values[0] >= -1e-8);
        }

        #[test]
        fn composition(rows in proptest::collection::vec(
            (0.05f64..0.6, proptest::collection::vec(-6.0f64..6.0, 5)), 2..6), split in 1usize..5) {
            let p = build_spin_chain_processor(2).unwrap();
            let split = split.min(rows.len() - 1);
            let whole = random_schedule(5, &rows);
            let first = random_schedule(5, &rows[..split]);
            let second = random_schedule(5, &rows[split..]);
            let c = noise_ops(2, 3.0);
            let rho = DensityMatrix::basis(4, 3).unwrap();
            let opts = SolverOptions::default();
            let direct = propagate(&rho, &whole, &p, &c, &opts).unwrap();
            let mid = propagate(&rho, &first, &p, &c, &opts).unwrap();
            let staged = propagate(&mid, &second, &p, &c, &opts).unwrap();
            prop_assert!(direct.matrix().max_abs_diff(staged.matrix()) < 1e-9);
        }
    }
}
