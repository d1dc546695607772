//! Ramsey measurement of the conditional phase of a native CZ.
//!
//! The target gets `R_X(π/2)`, the CZ, then a second `π/2` pulse about an
//! equatorial axis at angle θ (frame shift, `R_X(π/2)`, frame shift back).
//! With the control in |0⟩ or |1⟩, `P(target = 1)` traces
//! `(1 + V·cos(θ + φ))/2` and the two offsets differ by the gate's
//! conditional phase.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};

use crate::circuit::{Circuit, Gate, GateSpec};
use crate::error::{Error, Result};
use crate::gates::TwoQubitKind;
use crate::qsim::{PureState, SubsystemLayout};

use super::executor::DeviceExecutor;
use super::native::{native_gate, NativeGate};
use super::noise::{ensemble_density, NoiseModel};
use super::params::DeviceParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RamseyVariant {
    /// CZ with its dynamical phases removed.
    Compensated,
    /// Raw CZ propagator, dynamical phases left in.
    Uncompensated,
    /// No gate between the pulses.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RamseyFit {
    /// φ in `(1 + V·cos(θ + φ))/2`.
    pub phase: f64,
    pub visibility: f64,
    pub offset: f64,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RamseyCalibration {
    pub thetas: Vec<f64>,
    /// `P(target = 1)` for control |0⟩ and |1⟩.
    pub curves: [Vec<f64>; 2],
    pub fits: [RamseyFit; 2],
    /// `φ₁ − φ₀` wrapped into `[−π/2, 3π/2)`.
    pub phase_difference: f64,
}

/// Wraps an angle into `[−π/2, 3π/2)`, which centres a conditional phase of π.
pub fn wrap_phase_difference(d: f64) -> f64 {
    (d + FRAC_PI_2).rem_euclid(2.0 * PI) - FRAC_PI_2
}

/// Least-squares fit of `A·cos θ + B·sin θ + C`.
pub fn fit_ramsey(thetas: &[f64], probs: &[f64]) -> Result<RamseyFit> {
    if thetas.len() != probs.len() {
        return Err(Error::DimensionMismatch { expected: thetas.len(), actual: probs.len() });
    }
    if thetas.len() < 3 {
        return Err(Error::Fit(format!("{} points cannot fix three parameters", thetas.len())));
    }
    let m = DMatrix::from_fn(thetas.len(), 3, |r, c| match c {
        0 => thetas[r].cos(),
        1 => thetas[r].sin(),
        _ => 1.0,
    });
    let y = DVector::from_column_slice(probs);
    let svd = m.clone().svd(true, true);
    let x = svd.solve(&y, 1e-12).map_err(|e| Error::Fit(e.to_string()))?;
    if svd.rank(1e-9 * svd.singular_values.max()) < 3 {
        return Err(Error::Fit("angles do not determine the curve".into()));
    }
    let (a, b, c) = (x[0], x[1], x[2]);
    let resid = &m * &x - y;
    Ok(RamseyFit {
        phase: (-b).atan2(a),
        visibility: 2.0 * a.hypot(b),
        offset: c,
        rms_residual: (resid.norm_squared() / thetas.len() as f64).sqrt(),
    })
}

fn curve(gate: &NativeGate, variant: RamseyVariant, control_state: usize, thetas: &[f64]) -> Result<Vec<f64>> {
    let pulse = gate.cz_pulse.ok_or_else(|| Error::UnsupportedGate("Ramsey needs a CZ".into()))?;
    let (lo, _) = gate.pair;
    let (c, t) = (pulse.control - lo, pulse.target - lo);
    let layout = SubsystemLayout::qubits(2);
    let matrix = match variant {
        RamseyVariant::Compensated => Some(&gate.unitary),
        RamseyVariant::Uncompensated => Some(&gate.raw),
        RamseyVariant::Identity => None,
    };
    let mut prepared = PureState::basis(layout, &[0, 0])?;
    if control_state == 1 {
        prepared.apply_unitary(&Gate::Ry(PI).matrix(), &[c])?;
    }
    prepared.apply_unitary(&Gate::Rx(FRAC_PI_2).matrix(), &[t])?;
    if let Some(m) = matrix {
        prepared.apply_full(m)?;
    }
    thetas
        .iter()
        .map(|&theta| {
            let mut s = prepared.clone();
            s.apply_unitary(&Gate::VirtualZ(-theta).matrix(), &[t])?;
            s.apply_unitary(&Gate::Rx(FRAC_PI_2).matrix(), &[t])?;
            s.apply_unitary(&Gate::VirtualZ(theta).matrix(), &[t])?;
            Ok(s.outcome_probability(t, 1)? / s.norm_sqr())
        })
        .collect()
}

/// Noiseless Ramsey curve for the CZ on `(lo, lo+1)` with the control
/// prepared in `control_state`.
pub fn ramsey_cz_calibration(
    params: &DeviceParams,
    lo: usize,
    control_state: usize,
    thetas: &[f64],
    variant: RamseyVariant,
) -> Result<Vec<f64>> {
    if control_state > 1 {
        return Err(Error::InvalidState(format!("control state {control_state}")));
    }
    let gate = native_gate(TwoQubitKind::Cz, lo, lo + 1, params)?;
    curve(&gate, variant, control_state, thetas)
}

/// Both Ramsey curves, their fits and the conditional phase.
pub fn ramsey_experiment(
    params: &DeviceParams,
    lo: usize,
    thetas: &[f64],
    variant: RamseyVariant,
) -> Result<RamseyCalibration> {
    let gate = native_gate(TwoQubitKind::Cz, lo, lo + 1, params)?;
    let c0 = curve(&gate, variant, 0, thetas)?;
    let c1 = curve(&gate, variant, 1, thetas)?;
    let f0 = fit_ramsey(thetas, &c0)?;
    let f1 = fit_ramsey(thetas, &c1)?;
    Ok(RamseyCalibration {
        thetas: thetas.to_vec(),
        curves: [c0, c1],
        fits: [f0, f1],
        phase_difference: wrap_phase_difference(f1.phase - f0.phase),
    })
}

/// Ramsey sequence on the full chain with the target `lo + 1`.
pub fn ramsey_circuit(params: &DeviceParams, lo: usize, control_state: usize, theta: f64) -> Result<Circuit> {
    let (c, t) = (lo, lo + 1);
    let mut circuit = Circuit::new(SubsystemLayout::qubits(params.n_qubits()));
    if control_state == 1 {
        circuit.push(GateSpec::timed(Gate::Ry(PI), vec![c], params)?)?;
    }
    circuit.push(GateSpec::timed(Gate::Rx(FRAC_PI_2), vec![t], params)?)?;
    circuit.push(GateSpec::timed(Gate::Cz, vec![c, t], params)?)?;
    circuit.push(GateSpec::virtual_z(-theta, t))?;
    circuit.push(GateSpec::timed(Gate::Rx(FRAC_PI_2), vec![t], params)?)?;
    circuit.push(GateSpec::virtual_z(theta, t))?;
    Ok(circuit)
}

/// Ramsey calibration run through the chain executor, with spectators and
/// optionally trajectory-averaged noise.
pub fn ramsey_on_chain(
    executor: &DeviceExecutor,
    noise: Option<(&NoiseModel, usize)>,
    lo: usize,
    thetas: &[f64],
) -> Result<RamseyCalibration> {
    let params = executor.params();
    let layout = executor.layout();
    let initial = PureState::basis(layout.clone(), &vec![0; layout.len()])?;
    let t = lo + 1;
    let mut curves: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (state, out) in curves.iter_mut().enumerate() {
        for (k, &theta) in thetas.iter().enumerate() {
            let circuit = ramsey_circuit(params, lo, state, theta)?;
            let rho = match noise {
                None => {
                    let mut rng = crate::seeds::rng(0, crate::seeds::Stream::Trajectory, &[]);
                    executor.run(&circuit, &initial, None, &mut rng)?.to_density()
                }
                Some((model, count)) => {
                    executor.prepare(&circuit)?;
                    ensemble_density(&layout, count, model.seed, &[state as u64, k as u64], |rng| {
                        let r = model.realize(rng);
                        executor.run(&circuit, &initial, Some((model, &r)), rng)
                    })?
                }
            };
            let (_, p) = rho.project(t, 1)?;
            out.push(p / rho.trace());
        }
    }
    let f0 = fit_ramsey(thetas, &curves[0])?;
    let f1 = fit_ramsey(thetas, &curves[1])?;
    Ok(RamseyCalibration {
        thetas: thetas.to_vec(),
        curves,
        fits: [f0, f1],
        phase_difference: wrap_phase_difference(f1.phase - f0.phase),
    })
}

/// `count` equally spaced angles over `[0, 2π)`.
pub fn default_thetas(count: usize) -> Vec<f64> {
    (0..count).map(|k| 2.0 * PI * k as f64 / count as f64).collect()
}
