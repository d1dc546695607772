//! Chain Hamiltonian with up to three levels per transmon and the
//! piecewise-constant propagator built from it.
//!
//! `H/ħ = Σ_j [ω_j n_j − (η/2) n_j(n_j − 1)] + Σ_j g_j (a_j† a_{j+1} + a_j a_{j+1}†)`
//!
//! which restricted to two levels is the rotating-wave transverse coupling
//! model up to a constant. Propagators are returned in the frame rotating
//! with the idle (dressed) frequencies of every qubit.

use crate::error::{Error, Result};
use crate::linalg::{c64, expm_hermitian, matrix_power, real, CMatrix};
use crate::qsim::SubsystemLayout;

use super::params::{DeviceParams, TWO_PI};
use super::schedule::FrequencySchedule;

/// Default propagation step, seconds.
pub const DEFAULT_DT: f64 = 1e-11;

fn check_layout(params: &DeviceParams, layout: &SubsystemLayout) -> Result<()> {
    if layout.len() != params.n_qubits() {
        return Err(Error::DimensionMismatch { expected: params.n_qubits(), actual: layout.len() });
    }
    Ok(())
}

/// Energy offset removed from every excitation; commutes with `H`.
fn reference_hz(params: &DeviceParams) -> f64 {
    params.idle_frequency_ghz.iter().sum::<f64>() * 1e9 / params.n_qubits() as f64
}

fn build(params: &DeviceParams, freqs_hz: &[f64], layout: &SubsystemLayout, reference: f64) -> CMatrix {
    let n = layout.total_dim();
    let dims = layout.dims();
    let eta = TWO_PI * params.anharmonicity_hz();
    let mut h = CMatrix::zeros(n, n);
    for i in 0..n {
        let levels = layout.digits(i);
        let mut e = 0.0;
        for (j, &l) in levels.iter().enumerate() {
            let l = l as f64;
            e += TWO_PI * (freqs_hz[j] - reference) * l - 0.5 * eta * l * (l - 1.0);
        }
        h[(i, i)] = real(e);
        // a_j† a_{j+1} and its conjugate
        for j in 0..levels.len().saturating_sub(1) {
            let (lj, lk) = (levels[j], levels[j + 1]);
            if lk >= 1 && lj + 1 < dims[j] {
                let mut to = levels.clone();
                to[j] += 1;
                to[j + 1] -= 1;
                let k = layout.index(&to);
                let amp = params.coupling_angular(j) * (((lj + 1) * lk) as f64).sqrt();
                h[(k, i)] += real(amp);
                h[(i, k)] += real(amp);
            }
        }
    }
    h
}

/// Lab-frame Hamiltonian (rad/s) for the given absolute qubit frequencies.
pub fn hamiltonian(params: &DeviceParams, freqs_hz: &[f64], layout: &SubsystemLayout) -> Result<CMatrix> {
    check_layout(params, layout)?;
    if freqs_hz.len() != layout.len() {
        return Err(Error::DimensionMismatch { expected: layout.len(), actual: freqs_hz.len() });
    }
    Ok(build(params, freqs_hz, layout, 0.0))
}

/// Total excitation number as a diagonal operator.
pub fn number_operator(layout: &SubsystemLayout) -> CMatrix {
    let n = layout.total_dim();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = real(layout.digits(i).iter().sum::<usize>() as f64);
    }
    m
}

/// Diagonal of the uncoupled idle Hamiltonian at dressed frequencies,
/// relative to `reference`.
fn frame_energies(params: &DeviceParams, layout: &SubsystemLayout, reference: f64) -> Vec<f64> {
    let dressed = params.dressed_frequencies_hz();
    let eta = TWO_PI * params.anharmonicity_hz();
    (0..layout.total_dim())
        .map(|i| {
            layout
                .digits(i)
                .iter()
                .enumerate()
                .map(|(j, &l)| {
                    let l = l as f64;
                    TWO_PI * (dressed[j] - reference) * l - 0.5 * eta * l * (l - 1.0)
                })
                .sum()
        })
        .collect()
}

/// Largest frequency (Hz) present in the rotating frame during `schedule`.
pub fn max_frequency_scale(schedule: &FrequencySchedule, params: &DeviceParams) -> f64 {
    let dressed = params.dressed_frequencies_hz();
    let dressed = &dressed;
    let detuning = schedule
        .tracks()
        .iter()
        .enumerate()
        .flat_map(|(q, track)| track.iter().map(move |s| (s.frequency - dressed[q]).abs()))
        .fold(0.0, f64::max);
    let g = (0..params.n_qubits().saturating_sub(1)).map(|j| params.coupling_hz(j).abs()).fold(0.0, f64::max);
    detuning + params.anharmonicity_hz().abs() + 2.0 * g
}

/// Time-ordered propagator of `schedule`, in the idle rotating frame.
///
/// Each constant stretch is split into equal steps no longer than `dt`;
/// the step propagator is exact, so `dt` only controls round-off growth.
pub fn evolve(
    schedule: &FrequencySchedule,
    params: &DeviceParams,
    layout: &SubsystemLayout,
    dt: f64,
) -> Result<CMatrix> {
    check_layout(params, layout)?;
    if schedule.n_qubits() != layout.len() {
        return Err(Error::DimensionMismatch { expected: layout.len(), actual: schedule.n_qubits() });
    }
    let bound = 1.0 / (50.0 * max_frequency_scale(schedule, params));
    if !(dt > 0.0 && dt <= bound) {
        return Err(Error::StepTooLarge { dt, bound });
    }
    propagate(schedule, params, layout, Some(dt))
}

/// Same propagator with each constant stretch exponentiated in one step.
/// Used inside calibration loops, where the round-off control of `evolve`
/// is not worth its cost.
pub(crate) fn evolve_unsplit(schedule: &FrequencySchedule, params: &DeviceParams, layout: &SubsystemLayout) -> Result<CMatrix> {
    check_layout(params, layout)?;
    if schedule.n_qubits() != layout.len() {
        return Err(Error::DimensionMismatch { expected: layout.len(), actual: schedule.n_qubits() });
    }
    propagate(schedule, params, layout, None)
}

fn propagate(schedule: &FrequencySchedule, params: &DeviceParams, layout: &SubsystemLayout, dt: Option<f64>) -> Result<CMatrix> {
    let reference = reference_hz(params);
    let n = layout.total_dim();
    let mut u = CMatrix::identity(n, n);
    let pts = schedule.breakpoints();
    for w in pts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let freqs = schedule.frequencies_at(0.5 * (w[0] + w[1]));
        let h = build(params, &freqs, layout, reference);
        let steps = dt.map_or(1, |dt| (len / dt).ceil().max(1.0) as usize);
        let step = expm_hermitian(&h, len / steps as f64);
        u = matrix_power(&step, steps) * u;
    }
    let t = schedule.duration();
    let energies = frame_energies(params, layout, reference);
    for (i, e) in energies.iter().enumerate() {
        let phase = c64(0.0, e * t).exp();
        for c in 0..n {
            u[(i, c)] *= phase;
        }
    }
    Ok(u)
}
