//! Transmon-chain device model: Hamiltonian, schedule evolution, native
//! gate synthesis, decoherence and CZ calibration.

pub mod executor;
pub mod hamiltonian;
pub mod native;
pub mod noise;
pub mod params;
pub mod ramsey;
pub mod schedule;

pub use executor::{ChainGate, DeviceExecutor};
pub use hamiltonian::{evolve, hamiltonian, DEFAULT_DT};
pub use native::{native_gate, phase_compensation, CzPulse, NativeGate, ZCompensation};
pub use noise::{apply_noise, pi_gate_fidelity, NoiseModel, NoiseRealization};
pub use params::DeviceParams;
pub use ramsey::{fit_ramsey, ramsey_circuit, ramsey_cz_calibration, ramsey_experiment, ramsey_on_chain, RamseyCalibration, RamseyFit, RamseyVariant};
pub use schedule::{FrequencySchedule, Segment};
