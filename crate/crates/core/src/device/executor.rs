//! Runs a circuit on the simulated device, one gate at a time.
//!
//! Between gates the chain is held as qubits. A two-qubit gate is replaced by
//! the propagator of its native schedule over the whole chain (the pair gets
//! its third level during a CZ), projected back onto the qubit block, so
//! leakage shows up as lost norm. Single-qubit gates are ideal rotations of
//! finite length. After every gate the trajectory accrues decoherence for
//! the gate's duration.

use std::sync::OnceLock;

use rand::Rng;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::gates::TwoQubitKind;
use crate::linalg::{CMatrix, SiteEmbedding};
use crate::qsim::{PureState, SubsystemLayout};

use super::hamiltonian::{evolve, DEFAULT_DT};
use super::native::{computational_block, cz_schedule, fit_z_compensation, native_gate, refine_cz_on_chain, CzPulse, NativeGate};
use super::noise::{apply_noise, NoiseModel, NoiseRealization};
use super::params::DeviceParams;
use super::schedule::FrequencySchedule;

/// A native gate lifted to the whole chain.
#[derive(Debug, Clone)]
pub struct ChainGate {
    pub native: NativeGate,
    /// Compensated operator on the qubit block of the chain.
    pub operator: CMatrix,
    /// Distance of `operator` from the ideal embedded gate.
    pub residual: f64,
    /// Z angles applied in software to every qubit of the chain.
    pub corrections: Vec<f64>,
    /// Full-chain schedule actually played; for a CZ the pulse is
    /// re-tuned with the spectators present.
    pub schedule: FrequencySchedule,
    pub cz_pulse: Option<CzPulse>,
}

const KINDS: [TwoQubitKind; 3] = [TwoQubitKind::Cz, TwoQubitKind::SqrtIswap, TwoQubitKind::Iswap];

pub struct DeviceExecutor {
    params: DeviceParams,
    slots: Vec<OnceLock<Result<ChainGate>>>,
}

impl DeviceExecutor {
    pub fn new(params: DeviceParams) -> Result<Self> {
        params.validate()?;
        let slots = (0..(params.n_qubits() - 1) * KINDS.len()).map(|_| OnceLock::new()).collect();
        Ok(Self { params, slots })
    }

    pub fn params(&self) -> &DeviceParams {
        &self.params
    }

    pub fn layout(&self) -> SubsystemLayout {
        SubsystemLayout::qubits(self.params.n_qubits())
    }

    /// Chain-level native gate for `kind` on the neighbours `a`, `b`,
    /// synthesised on first use.
    pub fn chain_gate(&self, kind: TwoQubitKind, a: usize, b: usize) -> Result<&ChainGate> {
        let lo = self.params.pair_index(a, b)?;
        let k = KINDS.iter().position(|&x| x == kind).unwrap_or(0);
        self.slots[lo * KINDS.len() + k]
            .get_or_init(|| self.build(kind, lo))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn build(&self, kind: TwoQubitKind, lo: usize) -> Result<ChainGate> {
        let native = native_gate(kind, lo, lo + 1, &self.params)?;
        let qubits = self.layout();
        let layout = match kind {
            TwoQubitKind::Cz => qubits.with_qutrits(&[lo, lo + 1]),
            _ => qubits.clone(),
        };
        let (schedule, cz_pulse) = match native.cz_pulse {
            Some(pulse) => {
                let refined = refine_cz_on_chain(&self.params, &pulse)?;
                (cz_schedule(&self.params, &refined)?, Some(refined))
            }
            None => (native.schedule.clone(), None),
        };
        let u = evolve(&schedule, &self.params, &layout, DEFAULT_DT)?;
        let block = computational_block(&u, &layout);
        let ideal = SiteEmbedding::new(qubits.dims(), &[lo, lo + 1])
            .embed(&crate::gates::two_qubit_matrix(kind), qubits.total_dim());
        let comp = fit_z_compensation(&block, &ideal);
        Ok(ChainGate {
            operator: comp.correction() * block,
            residual: comp.residual,
            corrections: comp.angles,
            schedule,
            cz_pulse,
            native,
        })
    }

    /// Synthesises every native gate `circuit` uses.
    pub fn prepare(&self, circuit: &Circuit) -> Result<()> {
        for g in circuit.gates() {
            if let Some(kind) = g.gate.two_qubit_kind() {
                self.chain_gate(kind, g.targets[0], g.targets[1])?;
            }
        }
        Ok(())
    }

    /// Applies `circuit` to `initial`. With `noise`, the trajectory draws
    /// its jumps from `rng`. Postselection markers are ignored here.
    pub fn run<R: Rng + ?Sized>(
        &self,
        circuit: &Circuit,
        initial: &PureState,
        noise: Option<(&NoiseModel, &NoiseRealization)>,
        rng: &mut R,
    ) -> Result<PureState> {
        let layout = self.layout();
        if circuit.sites().dims() != layout.dims() || initial.layout().dims() != layout.dims() {
            return Err(Error::InvalidLayout("device runs need one qubit per chain site".into()));
        }
        let mut state = initial.clone();
        for g in circuit.gates() {
            match g.gate.two_qubit_kind() {
                Some(kind) => {
                    let chain = self.chain_gate(kind, g.targets[0], g.targets[1])?;
                    state.apply_full(&chain.operator)?;
                }
                None => state.apply_operator(&g.gate.matrix(), &g.targets)?,
            }
            if let Some((model, realization)) = noise {
                if g.duration > 0.0 && !matches!(g.gate, Gate::VirtualZ(_)) {
                    apply_noise(&mut state, g.duration, model, realization, rng)?;
                }
            }
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::phase_invariant_distance;

    #[test]
    fn non_neighbour_gate_rejected() {
        let ex = DeviceExecutor::new(DeviceParams::default()).unwrap();
        assert!(matches!(ex.chain_gate(TwoQubitKind::Cz, 0, 2), Err(Error::Connectivity(0, 2))));
    }

    #[test]
    fn chain_exchange_close_to_ideal() {
        let ex = DeviceExecutor::new(DeviceParams::default()).unwrap();
        let g = ex.chain_gate(TwoQubitKind::SqrtIswap, 1, 2).unwrap();
        let ideal = SiteEmbedding::new(&[2, 2, 2, 2], &[1, 2])
            .embed(&crate::gates::two_qubit_matrix(TwoQubitKind::SqrtIswap), 16);
        assert!(phase_invariant_distance(&ideal, &g.operator) < 5e-3, "{}", g.residual);
    }
}
