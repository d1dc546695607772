//! Decoherence by quantum trajectories.
//!
//! Energy relaxation is an amplitude-damping jump process with
//! `γ = 1 − exp(−t/T1)` per step. Dephasing is quasi-static: every
//! trajectory draws one detuning per qubit from `N(0, √2/T2*)`, which
//! averages to the Gaussian envelope `exp(−(t/T2*)²)`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::linalg::c64;
use crate::qsim::{average_trajectories, DensityOperator, PureState, SubsystemLayout};
use crate::seeds::{self, Stream};

use super::params::DeviceParams;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseModel {
    pub amplitude_damping: bool,
    pub dephasing: bool,
    /// Seconds; `f64::INFINITY` disables the channel for that qubit.
    pub t1: Vec<f64>,
    pub t2_star: Vec<f64>,
    pub seed: u64,
}

impl NoiseModel {
    pub fn from_params(params: &DeviceParams, seed: u64) -> Self {
        let n = params.n_qubits();
        Self {
            amplitude_damping: true,
            dephasing: true,
            t1: (0..n).map(|q| params.t1(q)).collect(),
            t2_star: (0..n).map(|q| params.t2_star(q)).collect(),
            seed,
        }
    }

    pub fn disabled(n: usize) -> Self {
        Self {
            amplitude_damping: false,
            dephasing: false,
            t1: vec![f64::INFINITY; n],
            t2_star: vec![f64::INFINITY; n],
            seed: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.t1.len()
    }

    /// Restriction to a single qubit.
    pub fn single(&self, q: usize) -> Self {
        Self { t1: vec![self.t1[q]], t2_star: vec![self.t2_star[q]], ..self.clone() }
    }

    /// Excited-state survival `exp(−t/T1)`.
    pub fn decay_envelope(&self, q: usize, t: f64) -> f64 {
        if self.amplitude_damping { (-t / self.t1[q]).exp() } else { 1.0 }
    }

    /// Coherence envelope `exp(−(t/T2*)²)` from dephasing alone.
    pub fn dephasing_envelope(&self, q: usize, t: f64) -> f64 {
        if self.dephasing { (-(t / self.t2_star[q]).powi(2)).exp() } else { 1.0 }
    }

    pub fn detuning_std(&self, q: usize) -> f64 {
        2f64.sqrt() / self.t2_star[q]
    }

    /// Draws the static part of one trajectory.
    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> NoiseRealization {
        let detunings = (0..self.n_qubits())
            .map(|q| {
                let sigma = self.detuning_std(q);
                let z: f64 = Normal::new(0.0, 1.0).expect("unit normal").sample(rng);
                if self.dephasing && sigma > 0.0 { sigma * z } else { 0.0 }
            })
            .collect();
        NoiseRealization { detunings }
    }
}

/// Quasi-static detunings (rad/s) of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    pub detunings: Vec<f64>,
}

/// Advances one trajectory by `elapsed` seconds of idle decoherence.
///
/// The norm of `state` is preserved, so population already lost to leakage
/// stays lost.
pub fn apply_noise<R: Rng + ?Sized>(
    state: &mut PureState,
    elapsed: f64,
    noise: &NoiseModel,
    realization: &NoiseRealization,
    rng: &mut R,
) -> Result<()> {
    if elapsed < 0.0 {
        return Err(Error::InvalidParams(format!("elapsed time {elapsed}")));
    }
    let layout = state.layout().clone();
    let n = layout.len();
    if noise.n_qubits() != n || realization.detunings.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: noise.n_qubits() });
    }
    let digits: Vec<Vec<usize>> = (0..layout.total_dim()).map(|i| layout.digits(i)).collect();
    let norm = state.norm_sqr();
    let amps = state.amplitudes_mut();

    if noise.dephasing {
        for (i, d) in digits.iter().enumerate() {
            let phase: f64 = d.iter().zip(&realization.detunings).map(|(&l, &w)| l as f64 * w).sum();
            if phase != 0.0 {
                amps[i] *= c64(0.0, -phase * elapsed).exp();
            }
        }
    }

    for q in 0..n {
        let u: f64 = rng.random();
        if !noise.amplitude_damping {
            continue;
        }
        let keep = (-elapsed / noise.t1[q]).exp();
        if keep >= 1.0 || norm == 0.0 {
            continue;
        }
        let no_jump: f64 = digits
            .iter()
            .zip(amps.iter())
            .map(|(d, a)| a.norm_sqr() * keep.powi(d[q] as i32))
            .sum::<f64>()
            / norm;
        if u < 1.0 - no_jump {
            // lowering operator on qubit q
            let mut lowered = amps.clone();
            lowered.fill(c64(0.0, 0.0));
            for (i, d) in digits.iter().enumerate() {
                if d[q] > 0 {
                    let mut to = d.clone();
                    to[q] -= 1;
                    lowered[layout.index(&to)] += amps[i] * (d[q] as f64).sqrt();
                }
            }
            *amps = lowered;
        } else {
            for (i, d) in digits.iter().enumerate() {
                amps[i] *= keep.powf(d[q] as f64 / 2.0);
            }
        }
        let now: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if now > 0.0 {
            *amps *= c64((norm / now).sqrt(), 0.0);
        }
    }
    Ok(())
}

/// Equal-weight average of `count` trajectories produced by `run`, each fed
/// its own generator. Order of summation is fixed, so results do not depend
/// on thread scheduling.
pub fn ensemble_density<F>(layout: &SubsystemLayout, count: usize, seed: u64, salt: &[u64], run: F) -> Result<DensityOperator>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<PureState> + Sync,
{
    if count == 0 {
        return Err(Error::EmptyInput);
    }
    let states: Vec<PureState> = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let mut idx = salt.to_vec();
            idx.push(k);
            let mut rng = seeds::rng(seed, Stream::Trajectory, &idx);
            run(&mut rng)
        })
        .collect::<Result<_>>()?;
    if states.iter().any(|s| s.layout() != layout) {
        return Err(Error::InvalidLayout("trajectory layout differs from ensemble layout".into()));
    }
    average_trajectories(&states, &vec![1.0 / count as f64; count])
}

/// Average fidelity of a noisy `R_Y(π)` on `qubit` against the ideal gate,
/// over the six Pauli eigenstates and `trajectories` runs each.
pub fn pi_gate_fidelity(qubit: usize, duration: f64, noise: &NoiseModel, trajectories: usize) -> Result<f64> {
    if !(duration > 0.0) {
        return Err(Error::InvalidParams(format!("duration {duration}")));
    }
    if trajectories == 0 {
        return Err(Error::EmptyInput);
    }
    let local = noise.single(qubit);
    let layout = SubsystemLayout::qubits(1);
    let gate = Gate::Ry(std::f64::consts::PI).matrix();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let inputs = [
        [c64(1.0, 0.0), c64(0.0, 0.0)],
        [c64(0.0, 0.0), c64(1.0, 0.0)],
        [c64(h, 0.0), c64(h, 0.0)],
        [c64(h, 0.0), c64(-h, 0.0)],
        [c64(h, 0.0), c64(0.0, h)],
        [c64(h, 0.0), c64(0.0, -h)],
    ];
    let mut total = 0.0;
    for (s, amps) in inputs.iter().enumerate() {
        let mut ideal = PureState::from_amplitudes(layout.clone(), amps.to_vec())?;
        ideal.apply_unitary(&gate, &[0])?;
        let fids: Vec<f64> = (0..trajectories as u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = seeds::rng(local.seed, Stream::Trajectory, &[qubit as u64, s as u64, k]);
                let realization = local.realize(&mut rng);
                let mut psi = ideal.clone();
                apply_noise(&mut psi, duration, &local, &realization, &mut rng)?;
                Ok(ideal.overlap_sqr(&psi))
            })
            .collect::<Result<_>>()?;
        total += fids.iter().sum::<f64>() / trajectories as f64;
    }
    Ok(total / inputs.len() as f64)
}

/// Closed form of [`pi_gate_fidelity`] for this noise model.
pub fn pi_gate_fidelity_analytic(qubit: usize, duration: f64, noise: &NoiseModel) -> f64 {
    let gamma = 1.0 - noise.decay_envelope(qubit, duration);
    let coherence = (1.0 - gamma).sqrt() * noise.dephasing_envelope(qubit, duration);
    (4.0 - gamma + 2.0 * coherence) / 6.0
}
