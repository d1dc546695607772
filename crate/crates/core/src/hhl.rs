//! The 2×2 linear-system instance, its compiled four-qubit circuit and
//! execution with ancilla postselection.
//!
//! Qubit roles: memory Q1 holds `b` and later the solution, register Q2Q3
//! stores the eigenvalue label (|01⟩ for the smaller eigenvalue λ₁, |10⟩ for
//! λ₂), and ancilla Q4 carries the `C/λ` rotation that is postselected on |1⟩.
//!
//! The eigenvalue register is loaded with a pre-compiled two-state trick
//! rather than phase estimation: after the memory is rotated into the
//! eigenbasis, a memory-controlled iSWAP decides whether the register
//! excitation moves from Q3 to Q2.

use std::f64::consts::PI;

use rand::Rng;

use crate::circuit::{Circuit, Gate, GateSpec, GateTiming, Role};
use crate::device::noise::ensemble_density;
use crate::device::{DeviceExecutor, DeviceParams, NoiseModel};
use crate::error::{Error, Result};
use crate::gates::{controlled_iswap_combo, controlled_ry_decomposition, hadamard};
use crate::linalg::{c64, eigh, hermiticity_deviation, phase_invariant_distance, real, CMatrix, CVector, C64};
use crate::qsim::{DensityOperator, PureState, SubsystemLayout};
use crate::seeds::{self, Stream};

pub const MEMORY: usize = 0;
pub const REGISTER: [usize; 2] = [1, 2];
pub const ANCILLA: usize = 3;

/// Register population outside |00⟩ that still counts as cleared.
pub const REGISTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystemInstance {
    a: CMatrix,
    b: CVector,
    c: f64,
}

impl LinearSystemInstance {
    pub fn new(a: CMatrix, b: CVector, c: f64) -> Result<Self> {
        if a.shape() != (2, 2) || b.len() != 2 {
            return Err(Error::InvalidInstance("A must be 2×2 and b a 2-vector".into()));
        }
        if hermiticity_deviation(&a) > 1e-12 {
            return Err(Error::InvalidInstance("A is not Hermitian".into()));
        }
        if (b.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInstance(format!("‖b‖ = {}", b.norm())));
        }
        let (ev, _) = eigh(&a);
        if ev[0] <= 0.0 {
            return Err(Error::InvalidInstance(format!("eigenvalue {} not positive", ev[0])));
        }
        if !(c >= 0.0) || c > ev[0] * (1.0 + 1e-12) {
            return Err(Error::UnphysicalRotation { c, lambda: ev[0] });
        }
        Ok(Self { a, b, c })
    }

    /// A = [[1.5, 0.5], [0.5, 1.5]], C = 1, with the given input.
    pub fn reference(b: CVector) -> Result<Self> {
        Self::new(reference_matrix(), b, 1.0)
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CVector {
        &self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn with_b(&self, b: CVector) -> Result<Self> {
        Self::new(self.a.clone(), b, self.c)
    }

    pub fn with_c(&self, c: f64) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), c)
    }

    pub fn eigen(&self) -> Eigendecomposition {
        let (values, vectors) = eigh(&self.a);
        // fix each eigenvector's phase: leading nonzero component real positive
        let canonical = |k: usize| {
            let v = vectors.column(k).into_owned();
            let lead = if v[0].norm() > 1e-12 { v[0] } else { v[1] };
            v * (lead.conj() / lead.norm())
        };
        let u = [canonical(0), canonical(1)];
        let betas = [u[0].dotc(&self.b), u[1].dotc(&self.b)];
        Eigendecomposition { lambdas: [values[0], values[1]], vectors: u, betas }
    }
}

pub fn reference_matrix() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[real(1.5), real(0.5), real(0.5), real(1.5)])
}

/// `(cos θ/2, e^{iφ} sin θ/2)`.
pub fn bloch_vector_state(theta: f64, phi: f64) -> CVector {
    CVector::from_vec(vec![real((theta / 2.0).cos()), C64::from_polar((theta / 2.0).sin(), phi)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigendecomposition {
    /// Ascending: λ₁ < λ₂.
    pub lambdas: [f64; 2],
    pub vectors: [CVector; 2],
    /// `β_j = ⟨u_j|b⟩`.
    pub betas: [C64; 2],
}

/// Normalised `A⁻¹b` and `‖A⁻¹b‖`.
pub fn classical_solve(a: &CMatrix, b: &CVector) -> Result<(CVector, f64)> {
    if a.shape() != (2, 2) || b.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: b.len() });
    }
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let scale = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if det.norm() <= 1e-14 * scale * scale {
        return Err(Error::Singular);
    }
    let inv = CMatrix::from_row_slice(2, 2, &[a[(1, 1)], -a[(0, 1)], -a[(1, 0)], a[(0, 0)]]) / det;
    let x = inv * b;
    let n = x.norm();
    Ok((x / real(n), n))
}

/// `θ = 2·arcsin(C/λ)`, so that `R_Y(θ)|0⟩` has |1⟩ amplitude `C/λ`.
pub fn rotation_angle(lambda: f64, c: f64) -> Result<f64> {
    if !(lambda > 0.0) || c < 0.0 || c > lambda {
        return Err(Error::UnphysicalRotation { c, lambda });
    }
    // the only rational ratios with arcsine a rational multiple of π; libm
    // rounds 2·asin(1/2) one ulp above π/3
    let r = c / lambda;
    Ok(match r {
        0.0 => 0.0,
        0.5 => PI / 3.0,
        1.0 => PI,
        _ => 2.0 * r.asin(),
    })
}

/// `Σ_j |C·β_j/λ_j|² = C²‖A⁻¹b‖²`.
pub fn success_probability(instance: &LinearSystemInstance) -> f64 {
    let e = instance.eigen();
    (0..2).map(|j| (instance.c * e.betas[j].norm() / e.lambdas[j]).powi(2)).sum()
}

/// Single-qubit gate sending `u₁ → |1⟩` and `u₂ → |0⟩`.
pub fn eigenbasis_matrix(e: &Eigendecomposition) -> CMatrix {
    let (u1, u2) = (&e.vectors[0], &e.vectors[1]);
    CMatrix::from_row_slice(2, 2, &[u2[0].conj(), u2[1].conj(), u1[0].conj(), u1[1].conj()])
}

/// Gates realising `w` up to global phase: `H` when it is one, otherwise
/// `R_Z(β)·R_Y(γ)·R_Z(δ)` with the Z factors as frame updates.
pub fn eigenbasis_gates(w: &CMatrix) -> Vec<Gate> {
    if phase_invariant_distance(&hadamard(), w) < 1e-12 {
        return vec![Gate::H];
    }
    let det = w[(0, 0)] * w[(1, 1)] - w[(0, 1)] * w[(1, 0)];
    let v = w / det.sqrt();
    let (a, b) = (v[(0, 0)], v[(1, 0)]);
    let gamma = 2.0 * b.norm().atan2(a.norm());
    let (pa, pb) = (if a.norm() > 0.0 { a.arg() } else { 0.0 }, if b.norm() > 0.0 { b.arg() } else { 0.0 });
    let (beta, delta) = (pb - pa, -pa - pb);
    let mut out = Vec::new();
    if delta != 0.0 {
        out.push(Gate::VirtualZ(delta));
    }
    out.push(Gate::Ry(gamma));
    if beta != 0.0 {
        out.push(Gate::VirtualZ(beta));
    }
    out
}

/// The three subroutines of the compiled solver.
#[derive(Debug, Clone)]
pub struct CompiledHhl {
    /// Eigenbasis change, register load, memory-controlled iSWAP.
    pub load: Circuit,
    /// Ancilla rotations conditioned on the register.
    pub rotation: Circuit,
    /// Exact reverse of `load`.
    pub unload: Circuit,
    /// All three, with the ancilla postselection marker.
    pub circuit: Circuit,
}

fn hhl_layout() -> Circuit {
    let mut c = Circuit::new(SubsystemLayout::qubits(4));
    c.set_role(Role::Memory, vec![MEMORY]).expect("sites exist");
    c.set_role(Role::Register, REGISTER.to_vec()).expect("sites exist");
    c.set_role(Role::Ancilla, vec![ANCILLA]).expect("sites exist");
    c
}

pub fn compile_with(instance: &LinearSystemInstance, timing: &dyn GateTiming) -> Result<CompiledHhl> {
    let e = instance.eigen();
    let gap = e.lambdas[1] - e.lambdas[0];
    if gap <= 1e-9 * e.lambdas[1] {
        return Err(Error::InvalidInstance("degenerate spectrum; eigenvalue register needs two levels".into()));
    }
    let base = hhl_layout();

    let mut load = base.empty_like();
    for g in eigenbasis_gates(&eigenbasis_matrix(&e)) {
        load.push(GateSpec::timed(g, vec![MEMORY], timing)?)?;
    }
    load.push(GateSpec::timed(Gate::Ry(PI), vec![REGISTER[1]], timing)?)?;
    load.append(&controlled_iswap_combo(&base, MEMORY, REGISTER[0], REGISTER[1], timing)?)?;

    let theta1 = rotation_angle(e.lambdas[0], instance.c)?;
    let theta2 = rotation_angle(e.lambdas[1], instance.c)?;
    let mut rotation = base.empty_like();
    rotation.push(GateSpec::timed(Gate::Ry(theta2), vec![ANCILLA], timing)?)?;
    rotation.append(&controlled_ry_decomposition(&base, theta1 - theta2, REGISTER[1], ANCILLA, timing)?)?;

    let unload = load.inverse();

    let mut circuit = base.empty_like();
    circuit.append(&load)?;
    circuit.append(&rotation)?;
    circuit.append(&unload)?;
    circuit.set_postselection(ANCILLA, 1)?;
    Ok(CompiledHhl { load, rotation, unload, circuit })
}

/// Compiles with the default device timing.
pub fn compile(instance: &LinearSystemInstance) -> Result<CompiledHhl> {
    compile_with(instance, &DeviceParams::default())
}

/// `R_Y(θ)` then a `φ` frame update on the memory: `|0⟩ → (cos θ/2, e^{iφ} sin θ/2)`
/// up to global phase.
pub fn preparation(theta: f64, phi: f64, timing: &dyn GateTiming) -> Result<Circuit> {
    let mut c = hhl_layout();
    if theta != 0.0 {
        c.push(GateSpec::timed(Gate::Ry(theta), vec![MEMORY], timing)?)?;
    }
    if phi != 0.0 {
        c.push(GateSpec::virtual_z(phi, MEMORY))?;
    }
    Ok(c)
}

/// Bloch angles `(θ, φ)` of a unit 2-vector.
pub fn bloch_angles(b: &CVector) -> (f64, f64) {
    let theta = 2.0 * b[1].norm().atan2(b[0].norm());
    let phi = if b[1].norm() > 1e-15 && b[0].norm() > 1e-15 { (b[1] / b[0]).arg() } else if b[1].norm() > 1e-15 { b[1].arg() } else { 0.0 };
    (theta, phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    /// Ideal gate matrices.
    Ideal,
    /// Hamiltonian-synthesised gates, no decoherence.
    Device,
    /// Device gates with T1 and dephasing trajectories.
    DeviceNoisy,
}

impl BackendKind {
    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Ideal => "ideal",
            BackendKind::Device => "device",
            BackendKind::DeviceNoisy => "device-noisy",
        }
    }
}

/// Executes circuits on one backend and returns final density operators.
pub struct Simulator {
    kind: BackendKind,
    executor: Option<DeviceExecutor>,
    noise: Option<NoiseModel>,
    trajectories: usize,
}

impl Simulator {
    pub fn ideal() -> Self {
        Self { kind: BackendKind::Ideal, executor: None, noise: None, trajectories: 1 }
    }

    pub fn new(kind: BackendKind, params: &DeviceParams, trajectories: usize, seed: u64) -> Result<Self> {
        Ok(match kind {
            BackendKind::Ideal => Self::ideal(),
            BackendKind::Device => Self {
                kind,
                executor: Some(DeviceExecutor::new(params.clone())?),
                noise: None,
                trajectories: 1,
            },
            BackendKind::DeviceNoisy => {
                if trajectories == 0 {
                    return Err(Error::InvalidParams("noisy backend needs at least one trajectory".into()));
                }
                Self {
                    kind,
                    executor: Some(DeviceExecutor::new(params.clone())?),
                    noise: Some(NoiseModel::from_params(params, seed)),
                    trajectories,
                }
            }
        })
    }

    pub fn kind(&self) -> BackendKind {
        self.kind
    }

    pub fn executor(&self) -> Option<&DeviceExecutor> {
        self.executor.as_ref()
    }

    pub fn trajectories(&self) -> usize {
        self.trajectories
    }

    /// Final (possibly subnormalised) state of `circuit` acting on
    /// `initial`; `salt` separates the random streams of different inputs.
    pub fn final_density(&self, circuit: &Circuit, initial: &PureState, salt: u64) -> Result<DensityOperator> {
        match (&self.executor, &self.noise) {
            (None, _) => {
                let mut s = initial.clone();
                for g in circuit.gates() {
                    s.apply_unitary(&g.gate.matrix(), &g.targets)?;
                }
                Ok(s.to_density())
            }
            (Some(ex), None) => {
                let mut rng = seeds::rng(0, Stream::Trajectory, &[salt]);
                Ok(ex.run(circuit, initial, None, &mut rng)?.to_density())
            }
            (Some(ex), Some(noise)) => {
                ex.prepare(circuit)?;
                ensemble_density(initial.layout(), self.trajectories, noise.seed, &[salt], |rng| {
                    let realization = noise.realize(rng);
                    ex.run(circuit, initial, Some((noise, &realization)), rng)
                })
            }
        }
    }

    /// Memory input as prepared on this backend: exact amplitudes on the
    /// ideal backend, a preparation pulse sequence on the device.
    pub fn input_circuit(&self, compiled: &CompiledHhl, b: &CVector, timing: &dyn GateTiming) -> Result<(Circuit, PureState)> {
        let layout = SubsystemLayout::qubits(4);
        let zero = vec![real(1.0), real(0.0)];
        match self.kind {
            BackendKind::Ideal => {
                let initial = PureState::product(layout, &[b.iter().copied().collect(), zero.clone(), zero.clone(), zero])?;
                Ok((compiled.circuit.without_postselection(), initial))
            }
            _ => {
                let (theta, phi) = bloch_angles(b);
                let mut c = preparation(theta, phi, timing)?;
                c.append(&compiled.circuit.without_postselection())?;
                Ok((c, PureState::basis(layout, &[0, 0, 0, 0])?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HHLOutcome {
    /// Normalised memory state after postselecting the ancilla on |1⟩.
    pub memory: DensityOperator,
    pub success_probability: f64,
    /// Register population outside |00⟩ within the postselected branch.
    pub register_residual: f64,
    pub register_cleared: bool,
    /// `⟨x|ρ|x⟩` against the normalised classical solution.
    pub fidelity: f64,
}

/// Postselects the ancilla of a final state and summarises the memory.
pub fn analyse(instance: &LinearSystemInstance, rho: &DensityOperator) -> Result<HHLOutcome> {
    let (post, p) = rho.project(ANCILLA, 1)?;
    if p <= crate::qsim::MIN_BRANCH_PROBABILITY {
        return Err(Error::ImpossibleOutcome(p));
    }
    let m = post.matrix();
    let layout = post.layout();
    let mut register_residual = 0.0;
    for i in 0..layout.total_dim() {
        let d = layout.digits(i);
        if d[REGISTER[0]] != 0 || d[REGISTER[1]] != 0 {
            register_residual += m[(i, i)].re;
        }
    }
    register_residual /= p;
    let memory = DensityOperator::new(SubsystemLayout::qubits(1), post.reduced(MEMORY)?.into_matrix() / real(p))?;
    let (x, _) = classical_solve(instance.a(), instance.b())?;
    let fidelity = (x.adjoint() * memory.matrix() * &x)[(0, 0)].re;
    Ok(HHLOutcome {
        memory,
        success_probability: p,
        register_residual,
        register_cleared: register_residual <= REGISTER_TOL,
        fidelity,
    })
}

/// Runs the solver for `instance` on `sim`. With `shots`, the success
/// probability is replaced by the fraction of `shots` ancilla readouts that
/// gave |1⟩.
pub fn run(instance: &LinearSystemInstance, sim: &Simulator, shots: Option<usize>, seed: u64) -> Result<HHLOutcome> {
    let timing = sim.executor().map(|e| e.params().clone()).unwrap_or_default();
    let compiled = compile_with(instance, &timing)?;
    let (circuit, initial) = sim.input_circuit(&compiled, instance.b(), &timing)?;
    let rho = sim.final_density(&circuit, &initial, 0)?;
    let mut out = analyse(instance, &rho)?;
    if let Some(n) = shots {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let mut rng = seeds::rng(seed, Stream::Shots, &[]);
        let hits = (0..n).filter(|_| rng.random::<f64>() < out.success_probability).count();
        out.success_probability = hits as f64 / n as f64;
    }
    Ok(out)
}

/// `C·A⁻¹` as the action of the postselected memory map, read off by
/// running the ideal circuit on basis inputs.
pub fn postselected_map(instance: &LinearSystemInstance) -> Result<CMatrix> {
    let compiled = compile(instance)?;
    let u = compiled.circuit.without_postselection().unitary()?;
    let layout = SubsystemLayout::qubits(4);
    let mut map = CMatrix::zeros(2, 2);
    for col in 0..2 {
        let input = layout.index(&[col, 0, 0, 0]);
        for row in 0..2 {
            map[(row, col)] = u[(layout.index(&[row, 0, 0, 1]), input)];
        }
    }
    Ok(map)
}

pub fn c64_vec(values: &[(f64, f64)]) -> CVector {
    CVector::from_iterator(values.len(), values.iter().map(|&(r, i)| c64(r, i)))
}
