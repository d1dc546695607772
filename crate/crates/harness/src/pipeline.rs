//! The 18-input experiment: simulate, read out, reconstruct, report.

use hhl_core::device::{ramsey, ramsey_on_chain, NoiseModel, RamseyCalibration, RamseyFit};
use hhl_core::hhl::{classical_solve, compile_with, success_probability, BackendKind, Simulator};
use hhl_core::qsim::DensityOperator;
use hhl_core::tomography::{
    bootstrap_errorbars, dataset_estimates, ideal_chi, process_fidelity, qpt_from_estimates, qst_from_estimates,
    state_fidelity, ChiJson, TomographyDataset,
};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::HarnessError;

/// Pair whose CZ is calibrated by the Ramsey experiment (Q3, Q4).
pub const RAMSEY_PAIR: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    /// Input number, from 1.
    pub index: usize,
    pub theta: f64,
    pub phi: f64,
    /// Postselected ⟨X⟩, ⟨Y⟩, ⟨Z⟩ of the memory before projection.
    pub expectations: [f64; 3],
    /// Bloch vector of the normalised solution.
    pub ideal: [f64; 3],
    pub fidelity: f64,
    pub fidelity_std: f64,
    pub success_probability: f64,
    pub ideal_success_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessReport {
    pub chi_exp: ChiJson,
    pub chi_id: ChiJson,
    pub fidelity: f64,
    pub fidelity_std: f64,
    /// Fidelity after projecting `chi_exp` onto PSD matrices.
    pub projected_fidelity: f64,
    pub trace: f64,
    pub ideal_trace: f64,
    /// Condition number of the reconstruction's design matrix.
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyReport {
    pub control: usize,
    pub target: usize,
    pub thetas: Vec<f64>,
    /// `P(target = 1)` with the control in |0⟩ and |1⟩.
    pub curves: [Vec<f64>; 2],
    pub fits: [RamseyFit; 2],
    pub phase_difference: f64,
}

impl RamseyReport {
    fn new(lo: usize, c: RamseyCalibration) -> Self {
        Self {
            control: lo,
            target: lo + 1,
            thetas: c.thetas,
            curves: c.curves,
            fits: c.fits,
            phase_difference: c.phase_difference,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub version: String,
    pub backend: BackendKind,
    pub seed: u64,
    pub shots: Option<u64>,
    pub trajectories: usize,
    pub resamples: usize,
    pub records: Vec<InputRecord>,
    pub process: ProcessReport,
    pub ramsey: Option<RamseyReport>,
}

/// Everything a run produces; the dataset is kept for export.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub bundle: ReportBundle,
    pub dataset: TomographyDataset,
    pub states: Vec<DensityOperator>,
}

fn bloch(m: &hhl_core::linalg::CMatrix) -> [f64; 3] {
    use hhl_core::qsim::Pauli;
    let e = |p: Pauli| hhl_core::linalg::trace(&(m * p.matrix())).re;
    [e(Pauli::X), e(Pauli::Y), e(Pauli::Z)]
}

fn simulator(config: &ExperimentConfig) -> Result<Simulator, HarnessError> {
    Ok(Simulator::new(config.backend, &config.device_params()?, config.trajectories, config.seed)?)
}

/// Final four-qubit states of every input on the configured backend.
pub fn simulate_inputs(config: &ExperimentConfig) -> Result<Vec<DensityOperator>, HarnessError> {
    simulate_with(config, &simulator(config)?)
}

fn simulate_with(config: &ExperimentConfig, sim: &Simulator) -> Result<Vec<DensityOperator>, HarnessError> {
    let params = config.device_params()?;
    let compiled = compile_with(&config.instance()?, &params)?;
    config
        .input_set()?
        .vectors()
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let (circuit, initial) = sim.input_circuit(&compiled, b, &params)?;
            Ok(sim.final_density(&circuit, &initial, j as u64)?)
        })
        .collect()
}

pub fn run_pipeline(config: &ExperimentConfig) -> Result<PipelineRun, HarnessError> {
    config.validate()?;
    let instance = config.instance()?;
    let inputs = config.input_set()?;
    let sim = simulator(config)?;
    let states = simulate_with(config, &sim)?;
    let dataset = TomographyDataset::from_states(&states, config.shots(), config.seed)?;
    let estimates = dataset_estimates(&dataset)?;

    let chi_id = ideal_chi(&instance)?;
    let fit = qpt_from_estimates(&inputs, &estimates)?;
    let fidelity = process_fidelity(&chi_id, &fit.chi)?;
    let projected = fit.chi.project()?;

    let targets: Vec<_> = inputs
        .vectors()
        .iter()
        .map(|b| classical_solve(instance.a(), b).map(|(x, _)| x))
        .collect::<Result<_, _>>()?;
    let boot = bootstrap_errorbars(&dataset, &inputs, &chi_id, &targets, config.resamples, config.seed)?;

    let mut records = Vec::with_capacity(inputs.len());
    for (j, ((&(theta, phi), e), x)) in inputs.angles().iter().zip(&estimates).zip(&targets).enumerate() {
        let qst = qst_from_estimates(e)?;
        let ideal = bloch(&(x * x.adjoint()));
        records.push(InputRecord {
            index: j + 1,
            theta,
            phi,
            expectations: e.expectations,
            ideal,
            fidelity: state_fidelity(qst.rho.matrix(), x, true)?.clamp(0.0, 1.0),
            fidelity_std: boot.state_fidelity_std[j],
            success_probability: e.success,
            ideal_success_probability: success_probability(&instance.with_b(inputs.vectors()[j].clone())?),
        });
    }

    let ramsey = match config.backend {
        BackendKind::Ideal => None,
        _ => Some(ramsey_with(config, &sim)?),
    };

    let bundle = ReportBundle {
        version: env!("CARGO_PKG_VERSION").to_string(),
        backend: config.backend,
        seed: config.seed,
        shots: config.shots(),
        trajectories: if config.backend == BackendKind::DeviceNoisy { config.trajectories } else { 1 },
        resamples: config.resamples,
        records,
        process: ProcessReport {
            chi_exp: fit.chi.to_json(),
            chi_id: chi_id.to_json(),
            fidelity,
            fidelity_std: boot.process_fidelity_std,
            projected_fidelity: process_fidelity(&chi_id, &projected)?,
            trace: fit.chi.trace(),
            ideal_trace: chi_id.trace(),
            condition: fit.condition,
        },
        ramsey,
    };
    Ok(PipelineRun { bundle, dataset, states })
}

/// Ramsey calibration of the Q3-Q4 CZ on the configured device backend.
pub fn ramsey_report(config: &ExperimentConfig) -> Result<RamseyReport, HarnessError> {
    config.validate()?;
    ramsey_with(config, &simulator(config)?)
}

fn ramsey_with(config: &ExperimentConfig, sim: &Simulator) -> Result<RamseyReport, HarnessError> {
    let params = config.device_params()?;
    let executor = sim
        .executor()
        .ok_or_else(|| HarnessError::Config("the Ramsey experiment needs a device backend".into()))?;
    let thetas = ramsey::default_thetas(config.ramsey_points);
    let noise = NoiseModel::from_params(&params, config.seed);
    let noise = (config.backend == BackendKind::DeviceNoisy).then_some((&noise, config.trajectories));
    let cal = ramsey_on_chain(executor, noise, RAMSEY_PAIR, &thetas)?;
    Ok(RamseyReport::new(RAMSEY_PAIR, cal))
}
