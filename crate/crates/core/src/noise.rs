//! Physical noise parameters, their collapse operators, and the discrete
//! Kraus channels they correspond to.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{lift, ops, ComplexMatrix, DensityMatrix};

/// Completeness tolerance for `Σ E†E = I`.
pub const KRAUS_COMPLETENESS_TOLERANCE: f64 = 1e-10;

/// Missing fields take the [`Default`] values. An infinite `t1` or `t2`
/// (no relaxation or no dephasing) is written to JSON as `null`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    #[serde(deserialize_with = "time_or_infinite")]
    pub t1: f64,
    #[serde(deserialize_with = "time_or_infinite")]
    pub t2: f64,
    pub p_bit_flip: f64,
    pub p_phase_flip: f64,
    pub p_bit_phase_flip: f64,
    pub p_depolarizing: f64,
}

fn time_or_infinite<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl Default for NoiseParams {
    /// Short- and long-run experiment noise: T1 = 50, T2 = 30, bit and phase
    /// flips at 2%.
    fn default() -> Self {
        Self {
            t1: 50.0,
            t2: 30.0,
            p_bit_flip: 0.02,
            p_phase_flip: 0.02,
            p_bit_phase_flip: 0.0,
            p_depolarizing: 0.0,
        }
    }
}

impl NoiseParams {
    /// No relaxation, dephasing, or discrete errors.
    pub fn noiseless() -> Self {
        Self {
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            p_bit_flip: 0.0,
            p_phase_flip: 0.0,
            p_bit_phase_flip: 0.0,
            p_depolarizing: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0) || !(self.t2 > 0.0) {
            return Err(Error::arg(format!(
                "t1 and t2 must be positive (t1={}, t2={})",
                self.t1, self.t2
            )));
        }
        if self.t2 > 2.0 * self.t1 {
            return Err(Error::arg(format!(
                "t2 = {} exceeds 2·t1 = {}",
                self.t2,
                2.0 * self.t1
            )));
        }
        for (name, p) in self.probabilities() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::arg(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    fn probabilities(&self) -> [(&'static str, f64); 4] {
        [
            ("p_bit_flip", self.p_bit_flip),
            ("p_phase_flip", self.p_phase_flip),
            ("p_bit_phase_flip", self.p_bit_phase_flip),
            ("p_depolarizing", self.p_depolarizing),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    AmplitudeDamping,
    Dephasing,
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    DepolarizingX,
    DepolarizingY,
    DepolarizingZ,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::AmplitudeDamping => "amplitude_damping",
            Channel::Dephasing => "dephasing",
            Channel::BitFlip => "bit_flip",
            Channel::PhaseFlip => "phase_flip",
            Channel::BitPhaseFlip => "bit_phase_flip",
            Channel::DepolarizingX => "depolarizing_x",
            Channel::DepolarizingY => "depolarizing_y",
            Channel::DepolarizingZ => "depolarizing_z",
        }
    }
}

/// A Lindblad operator `C = √rate · A` lifted to the full register.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseOperator {
    pub operator: ComplexMatrix,
    pub channel: Channel,
    pub qubit: usize,
    pub rate: f64,
}

impl CollapseOperator {
    pub fn label(&self) -> String {
        format!("{}[q{}]", self.channel.name(), self.qubit)
    }
}

/// Continuous rate whose channel, acting alone for `total_time`, reaches
/// error probability `p`: `γ = −ln(1−p)/total_time`.
pub fn probability_to_rate(p: f64, total_time: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!("probability {p} is outside [0, 1]")));
    }
    if p >= 1.0 {
        return Err(Error::arg("probability 1 maps to an infinite rate"));
    }
    if !(total_time > 0.0) {
        return Err(Error::arg("total_time must be positive"));
    }
    Ok(-(1.0 - p).ln() / total_time)
}

/// Per qubit: amplitude damping at `1/t1`, dephasing `√(1/(2·t2))·σz`, and
/// one Pauli operator per nonzero discrete probability (depolarizing adds
/// σx, σy, σz, each carrying a third of the probability).
pub fn build_collapse_operators(
    params: &NoiseParams,
    n_qubits: usize,
    total_time: f64,
) -> Result<Vec<CollapseOperator>> {
    if n_qubits == 0 {
        return Err(Error::arg("n_qubits must be at least 1"));
    }
    if !(total_time > 0.0) {
        return Err(Error::arg("total_time must be positive"));
    }
    params.validate()?;

    let mut single: Vec<(Channel, f64, ComplexMatrix)> = Vec::new();
    if params.t1.is_finite() {
        single.push((Channel::AmplitudeDamping, 1.0 / params.t1, ops::sigma_minus()));
    }
    if params.t2.is_finite() {
        single.push((Channel::Dephasing, 1.0 / (2.0 * params.t2), ops::sigma_z()));
    }
    let discrete = [
        (Channel::BitFlip, params.p_bit_flip, ops::sigma_x()),
        (Channel::PhaseFlip, params.p_phase_flip, ops::sigma_z()),
        (Channel::BitPhaseFlip, params.p_bit_phase_flip, ops::sigma_y()),
    ];
    for (channel, p, op) in discrete {
        if p > 0.0 {
            single.push((channel, probability_to_rate(p, total_time)?, op));
        }
    }
    if params.p_depolarizing > 0.0 {
        if params.p_depolarizing >= 1.0 {
            return Err(Error::arg("p_depolarizing = 1 maps to an infinite rate"));
        }
        let rate = probability_to_rate(params.p_depolarizing / 3.0, total_time)?;
        single.push((Channel::DepolarizingX, rate, ops::sigma_x()));
        single.push((Channel::DepolarizingY, rate, ops::sigma_y()));
        single.push((Channel::DepolarizingZ, rate, ops::sigma_z()));
    }

    let mut out = Vec::with_capacity(single.len() * n_qubits);
    for qubit in 0..n_qubits {
        for (channel, rate, op) in &single {
            let local = op.scale_real(rate.sqrt());
            out.push(CollapseOperator {
                operator: lift(&local, qubit, n_qubits)?,
                channel: *channel,
                qubit,
                rate: *rate,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KrausKind {
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    Depolarizing,
    AmplitudeDamping,
    PhaseDamping,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Wraps a set of Kraus operators after checking `Σ E†E = I`.
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::arg("Kraus channel needs at least one operator"))?;
        let d = first.rows();
        if operators.iter().any(|e| !e.is_square() || e.rows() != d) {
            return Err(Error::arg("Kraus operators must share one square dimension"));
        }
        let channel = Self { operators };
        let dev = channel.completeness_deviation();
        if dev > KRAUS_COMPLETENESS_TOLERANCE {
            return Err(Error::arg(format!("Kraus operators incomplete by {dev:e}")));
        }
        Ok(channel)
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// `max |(Σ E†E − I)_ij|`.
    pub fn completeness_deviation(&self) -> f64 {
        let d = self.operators[0].rows();
        let sum = self
            .operators
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, e| &acc + &(&e.adjoint() * e));
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }

    /// Sequential composition: `other ∘ self`.
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if self.dim() != other.dim() {
            return Err(Error::arg("cannot compose channels of different dimension"));
        }
        let ops = other
            .operators
            .iter()
            .flat_map(|b| self.operators.iter().map(move |a| b * a))
            .collect();
        Ok(KrausChannel { operators: ops })
    }
}

/// The single-qubit channel of `kind` with strength `param`.
pub fn kraus_channel(kind: KrausKind, param: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&param) {
        return Err(Error::arg(format!("channel parameter {param} is outside [0, 1]")));
    }
    let id = ops::identity2();
    let keep = id.scale_real((1.0 - param).sqrt());
    let ops = match kind {
        KrausKind::BitFlip => vec![keep, ops::sigma_x().scale_real(param.sqrt())],
        KrausKind::PhaseFlip => vec![keep, ops::sigma_z().scale_real(param.sqrt())],
        KrausKind::BitPhaseFlip => vec![keep, ops::sigma_y().scale_real(param.sqrt())],
        KrausKind::Depolarizing => {
            let w = (param / 3.0).sqrt();
            vec![
                keep,
                ops::sigma_x().scale_real(w),
                ops::sigma_y().scale_real(w),
                ops::sigma_z().scale_real(w),
            ]
        }
        KrausKind::AmplitudeDamping => vec![
            ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - param).sqrt()]),
            ComplexMatrix::from_real(2, 2, &[0.0, param.sqrt(), 0.0, 0.0]),
        ],
        // {√(1−λ)I, √λ|0⟩⟨0|} alone is not trace preserving; √λ|1⟩⟨1| completes it.
        KrausKind::PhaseDamping => vec![
            keep,
            ComplexMatrix::from_real(2, 2, &[param.sqrt(), 0.0, 0.0, 0.0]),
            ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, param.sqrt()]),
        ],
    };
    KrausChannel::new(ops)
}

/// `ℰ(ρ) = Σ E ρ E†`.
pub fn apply_kraus(channel: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if channel.dim() != rho.dim() {
        return Err(Error::arg(format!(
            "channel dimension {} does not match state dimension {}",
            channel.dim(),
            rho.dim()
        )));
    }
    let d = rho.dim();
    let out = channel
        .operators
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, e| {
            &acc + &(&(e * rho.matrix()) * &e.adjoint())
        });
    DensityMatrix::regularize(&out, 1e-10)
}
