//! Native two-qubit gates synthesised from frequency schedules, and the
//! single-qubit Z compensation that strips their dynamical phases.
//!
//! Exchange gates bring the higher qubit of the pair onto the lower one's
//! idle frequency for `π/(4g)` or `π/(2g)`. The CZ moves the higher qubit
//! (the control) to `ω_target + η`, so that |11⟩ and |20⟩ are degenerate, and
//! holds it there for a total of `π/(√2·g)`. Halfway through, the target is
//! briefly parked two anharmonicities below its idle point; this refocuses
//! the off-resonant |01⟩↔|10⟩ exchange that a single square pulse leaves
//! behind. The five pulse parameters are then refined numerically.

use crate::error::{Error, Result};
use crate::gates::{rotation_matrix, two_qubit_matrix, Axis, TwoQubitKind};
use crate::linalg::{kron, phase_invariant_distance, CMatrix};
use crate::optimize::NelderMead;
use crate::qsim::SubsystemLayout;

use super::hamiltonian::{evolve, evolve_unsplit, DEFAULT_DT};
use super::params::DeviceParams;
use super::schedule::FrequencySchedule;

/// Residual above which compensation is reported as a miscalibration.
pub const MAX_COMPENSATION_RESIDUAL: f64 = 0.05;

/// Z angles such that `raw ≈ (⊗ R_Z(angle_k)) · ideal` up to global phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ZCompensation {
    pub angles: Vec<f64>,
    /// Operator distance between `ideal` and the compensated `raw`.
    pub residual: f64,
}

impl ZCompensation {
    /// The correcting layer `⊗ R_Z(−angle_k)`.
    pub fn correction(&self) -> CMatrix {
        z_layer(&self.angles.iter().map(|a| -a).collect::<Vec<_>>())
    }
}

/// `R_Z(a_0) ⊗ R_Z(a_1) ⊗ …` over qubits, first angle most significant.
pub fn z_layer(angles: &[f64]) -> CMatrix {
    angles
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, &a| kron(&acc, &rotation_matrix(Axis::Z, a)))
}

fn wrap(a: f64) -> f64 {
    let w = a.rem_euclid(std::f64::consts::TAU);
    if w > std::f64::consts::PI { w - std::f64::consts::TAU } else { w }
}

/// Fits per-qubit Z angles (and a free global phase) mapping `ideal` onto `raw`.
pub fn fit_z_compensation(raw: &CMatrix, ideal: &CMatrix) -> ZCompensation {
    let dim = raw.nrows();
    let n = dim.trailing_zeros() as usize;
    let m = raw * ideal.adjoint();
    let start: Vec<f64> = (0..n)
        .map(|k| {
            let e = 1usize << (n - 1 - k);
            (m[(e, e)] / m[(0, 0)]).arg()
        })
        .map(|a| if a.is_finite() { a } else { 0.0 })
        .collect();
    let cost = |x: &[f64]| {
        let neg: Vec<f64> = x.iter().map(|a| -a).collect();
        phase_invariant_distance(ideal, &(z_layer(&neg) * raw))
    };
    let nm = NelderMead { max_evaluations: 400 * (n + 1), x_tolerance: 1e-11, f_tolerance: 1e-16 };
    let best = nm.minimize(cost, &start, &vec![0.05; n]);
    let (angles, residual) = if best.value <= cost(&start) {
        (best.x, best.value)
    } else {
        let v = cost(&start);
        (start, v)
    };
    ZCompensation { angles: angles.into_iter().map(wrap).collect(), residual }
}

/// Z compensation of a raw two-qubit gate against its ideal matrix.
pub fn phase_compensation(raw: &CMatrix, kind: TwoQubitKind) -> Result<ZCompensation> {
    if raw.shape() != (4, 4) {
        return Err(Error::DimensionMismatch { expected: 4, actual: raw.nrows() });
    }
    let c = fit_z_compensation(raw, &two_qubit_matrix(kind));
    if c.residual > MAX_COMPENSATION_RESIDUAL {
        return Err(Error::Miscalibration(c.residual));
    }
    Ok(c)
}

/// Echoed CZ pulse on a pair, times in seconds and frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CzPulse {
    pub control: usize,
    pub target: usize,
    pub first: f64,
    pub park: f64,
    pub second: f64,
    pub control_frequency: f64,
    pub park_frequency: f64,
}

#[derive(Debug, Clone)]
pub struct NativeGate {
    pub kind: TwoQubitKind,
    /// Lower site first.
    pub pair: (usize, usize),
    /// Schedule over the whole chain; spectators stay at idle.
    pub schedule: FrequencySchedule,
    /// Computational block of the pair propagator.
    pub raw: CMatrix,
    /// `raw` after Z compensation.
    pub unitary: CMatrix,
    /// `raw ≈ (R_Z(c_0) ⊗ R_Z(c_1))·ideal`; the correction applies `−c`.
    pub corrections: [f64; 2],
    pub residual: f64,
    /// Largest population leaving the computational block.
    pub leakage: f64,
    pub duration: f64,
    /// Time the pair spends at its interaction point.
    pub interaction_time: f64,
    pub cz_pulse: Option<CzPulse>,
}

fn computational_indices(layout: &SubsystemLayout) -> Vec<usize> {
    (0..layout.total_dim()).filter(|&i| layout.digits(i).iter().all(|&l| l < 2)).collect()
}

/// Restriction of `u` to the all-levels-below-2 block.
pub fn computational_block(u: &CMatrix, layout: &SubsystemLayout) -> CMatrix {
    let idx = computational_indices(layout);
    CMatrix::from_fn(idx.len(), idx.len(), |r, c| u[(idx[r], idx[c])])
}

/// Largest probability any computational input loses from the block.
pub fn leakage_of(block: &CMatrix) -> f64 {
    (0..block.ncols())
        .map(|c| 1.0 - block.column(c).norm_squared())
        .fold(0.0, f64::max)
        .max(0.0)
}

fn pair_layout(kind: TwoQubitKind) -> SubsystemLayout {
    let base = SubsystemLayout::qubits(2);
    match kind {
        TwoQubitKind::Cz => base.with_qutrits(&[0, 1]),
        _ => base,
    }
}

/// Steps (duration, per-qubit frequencies) for the CZ pulse over `n` qubits.
fn cz_steps(pulse: &CzPulse, idle: &[f64]) -> Vec<(f64, Vec<f64>)> {
    let mut hold = idle.to_vec();
    hold[pulse.control] = pulse.control_frequency;
    let mut park = hold.clone();
    park[pulse.target] = pulse.park_frequency;
    vec![(pulse.first, hold.clone()), (pulse.park, park), (pulse.second, hold)]
}

fn idle_frequencies(params: &DeviceParams) -> Vec<f64> {
    (0..params.n_qubits()).map(|q| params.idle_frequency_hz(q)).collect()
}

/// Distance to CZ (after best diagonal phases) plus leakage, for a pair model.
fn cz_cost(pair: &DeviceParams, pulse: &CzPulse, layout: &SubsystemLayout) -> Result<(f64, f64, CMatrix)> {
    let schedule = FrequencySchedule::from_steps(&cz_steps(pulse, &idle_frequencies(pair)))?;
    let u = evolve(&schedule, pair, layout, DEFAULT_DT)?;
    let block = computational_block(&u, layout);
    let leak = leakage_of(&block);
    Ok((cz_distance(&block), leak, block))
}

/// Distance of a 4×4 block to CZ after the best local diagonal phases.
fn cz_distance(block: &CMatrix) -> f64 {
    let ph: Vec<f64> = (0..4).map(|k| block[(k, k)].arg()).collect();
    let correction = [ph[0], ph[1], ph[2], ph[1] + ph[2] - ph[0]];
    let fixed = CMatrix::from_fn(4, 4, |r, c| block[(r, c)] * crate::linalg::c64(0.0, -correction[r]).exp());
    phase_invariant_distance(&two_qubit_matrix(TwoQubitKind::Cz), &fixed)
}

/// Mean CZ distance over spectator sectors plus leakage, on the full chain.
fn chain_cz_cost(params: &DeviceParams, pulse: &CzPulse, lo: usize) -> Result<f64> {
    let layout = SubsystemLayout::qubits(params.n_qubits()).with_qutrits(&[lo, lo + 1]);
    let schedule = FrequencySchedule::from_steps(&cz_steps(pulse, &idle_frequencies(params)))?;
    let u = evolve_unsplit(&schedule, params, &layout)?;
    let block = computational_block(&u, &layout);
    let qubits = SubsystemLayout::qubits(params.n_qubits());
    let mut sectors: std::collections::BTreeMap<Vec<usize>, Vec<usize>> = Default::default();
    for i in 0..qubits.total_dim() {
        let mut d = qubits.digits(i);
        d.drain(lo..=lo + 1);
        sectors.entry(d).or_default().push(i);
    }
    let dist: f64 = sectors
        .values()
        .map(|idx| cz_distance(&CMatrix::from_fn(4, 4, |r, c| block[(idx[r], idx[c])])))
        .sum::<f64>()
        / sectors.len() as f64;
    Ok(dist + leakage_of(&block))
}

/// Re-tunes a pair-calibrated CZ pulse against the full chain, where the
/// spectators shift the pair's levels.
pub fn refine_cz_on_chain(params: &DeviceParams, pulse: &CzPulse) -> Result<CzPulse> {
    let lo = pulse.control.min(pulse.target);
    let to_pulse = |x: &[f64]| CzPulse {
        first: x[0] * 1e-9,
        park: x[1] * 1e-9,
        second: x[2] * 1e-9,
        control_frequency: x[3] * 1e9,
        park_frequency: x[4] * 1e9,
        ..*pulse
    };
    let x0 = [
        pulse.first * 1e9,
        pulse.park * 1e9,
        pulse.second * 1e9,
        pulse.control_frequency * 1e-9,
        pulse.park_frequency * 1e-9,
    ];
    let objective = |x: &[f64]| {
        if x[..3].iter().any(|&t| t < 0.0) {
            return f64::INFINITY;
        }
        chain_cz_cost(params, &to_pulse(x), lo).unwrap_or(f64::INFINITY)
    };
    let start = objective(&x0);
    let nm = NelderMead { max_evaluations: 1500, x_tolerance: 1e-9, f_tolerance: 1e-16 };
    let best = nm.minimize(objective, &x0, &[0.1, 0.05, 0.1, 5e-4, 2e-3]);
    Ok(if best.value < start { to_pulse(&best.x) } else { *pulse })
}

/// Full-chain schedule of a CZ pulse with spectators at idle.
pub fn cz_schedule(params: &DeviceParams, pulse: &CzPulse) -> Result<FrequencySchedule> {
    FrequencySchedule::from_steps(&cz_steps(pulse, &idle_frequencies(params)))
}

/// Calibrated echoed CZ pulse for the pair `(lo, lo+1)`, in pair-local indices.
pub fn calibrate_cz(params: &DeviceParams, lo: usize) -> Result<CzPulse> {
    let pair = params.subchain(lo, lo + 1)?;
    let layout = pair_layout(TwoQubitKind::Cz);
    let f = [pair.idle_frequency_hz(0), pair.idle_frequency_hz(1)];
    let (control, target) = if f[0] >= f[1] { (0, 1) } else { (1, 0) };
    let eta = pair.anharmonicity_hz();
    let half = pair.interaction_time(&crate::circuit::Gate::Cz, 0) / 2.0;
    let start = CzPulse {
        control,
        target,
        first: half,
        park: pair.cz_echo_time(),
        second: half,
        control_frequency: f[target] + eta,
        park_frequency: f[target] - 2.0 * eta,
    };
    // Optimise in ns and GHz so all coordinates are of order one.
    let to_pulse = |x: &[f64]| CzPulse {
        first: x[0] * 1e-9,
        park: x[1] * 1e-9,
        second: x[2] * 1e-9,
        control_frequency: x[3] * 1e9,
        park_frequency: x[4] * 1e9,
        ..start
    };
    let x0 = [
        start.first * 1e9,
        start.park * 1e9,
        start.second * 1e9,
        start.control_frequency * 1e-9,
        start.park_frequency * 1e-9,
    ];
    let objective = |x: &[f64]| {
        if x[..3].iter().any(|&t| t < 0.0) {
            return f64::INFINITY;
        }
        match cz_cost(&pair, &to_pulse(x), &layout) {
            Ok((d, l, _)) => d + l,
            Err(_) => f64::INFINITY,
        }
    };
    let nm = NelderMead { max_evaluations: 6000, x_tolerance: 1e-9, f_tolerance: 1e-16 };
    let best = nm.minimize(objective, &x0, &[0.5, 0.2, 0.5, 2e-3, 1e-2]);
    let pulse = if best.value <= objective(&x0) { to_pulse(&best.x) } else { start };
    Ok(CzPulse { control: control + lo, target: target + lo, ..pulse })
}

/// Synthesises a native gate on neighbouring qubits `a`, `b`.
///
/// The returned matrices are the pair model's computational block; the
/// schedule covers the full chain for use with spectators.
pub fn native_gate(kind: TwoQubitKind, a: usize, b: usize, params: &DeviceParams) -> Result<NativeGate> {
    params.validate()?;
    let lo = params.pair_index(a, b)?;
    let pair = params.subchain(lo, lo + 1)?;
    let layout = pair_layout(kind);
    let idle = idle_frequencies(params);
    let (steps, interaction_time, cz_pulse) = match kind {
        TwoQubitKind::SqrtIswap | TwoQubitKind::Iswap => {
            let gate = if kind == TwoQubitKind::Iswap { crate::circuit::Gate::Iswap } else { crate::circuit::Gate::SqrtIswap };
            let t = params.interaction_time(&gate, lo);
            let (hi_q, lo_q) = if idle[lo] >= idle[lo + 1] { (lo, lo + 1) } else { (lo + 1, lo) };
            let mut f = idle.clone();
            f[hi_q] = idle[lo_q];
            (vec![(t, f)], t, None)
        }
        TwoQubitKind::Cz => {
            let pulse = calibrate_cz(params, lo)?;
            (cz_steps(&pulse, &idle), pulse.first + pulse.second, Some(pulse))
        }
    };
    let schedule = FrequencySchedule::from_steps(&steps)?;
    let local: Vec<(f64, Vec<f64>)> = steps.iter().map(|(t, f)| (*t, f[lo..=lo + 1].to_vec())).collect();
    let u = evolve(&FrequencySchedule::from_steps(&local)?, &pair, &layout, DEFAULT_DT)?;
    let raw = computational_block(&u, &layout);
    let leakage = leakage_of(&raw);
    let comp = phase_compensation(&raw, kind)?;
    let unitary = comp.correction() * &raw;
    Ok(NativeGate {
        kind,
        pair: (lo, lo + 1),
        duration: schedule.duration(),
        schedule,
        corrections: [comp.angles[0], comp.angles[1]],
        residual: comp.residual,
        raw,
        unitary,
        leakage,
        interaction_time,
        cz_pulse,
    })
}
