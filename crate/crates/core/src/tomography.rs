//! Single-qubit state tomography with ancilla postselection, process
//! tomography of the resulting non-trace-preserving map, fidelities and
//! bootstrap error bars.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::hhl::{bloch_vector_state, LinearSystemInstance, ANCILLA, MEMORY};
use crate::linalg::{c64, hermitian_part, hermiticity_deviation, project_psd_with_trace, real, trace, CMatrix, CVector, SiteEmbedding};
use crate::qsim::{DensityOperator, Pauli, SubsystemLayout};
use crate::seeds::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    /// Rotation applied before a Z readout so that the readout measures
    /// this Pauli.
    pub fn pre_rotation(self) -> Option<Gate> {
        match self {
            Basis::X => Some(Gate::Ry(-FRAC_PI_2)),
            Basis::Y => Some(Gate::Rx(FRAC_PI_2)),
            Basis::Z => None,
        }
    }

    pub fn pauli(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Y => Pauli::Y,
            Basis::Z => Pauli::Z,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::X => "X",
            Basis::Y => "Y",
            Basis::Z => "Z",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "X" => Some(Basis::X),
            "Y" => Some(Basis::Y),
            "Z" => Some(Basis::Z),
            _ => None,
        }
    }
}

/// Joint (memory, ancilla) readout table: `table[q1][q4]`.
pub type JointTable = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InputData {
    pub settings: BTreeMap<Basis, JointTable>,
}

/// Readout records for every input state. With `shots = None` the tables
/// hold exact probabilities instead of counts.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyDataset {
    pub inputs: Vec<InputData>,
    pub shots: Option<u64>,
}

/// Joint readout probabilities of memory and ancilla for one setting.
pub fn joint_probabilities(rho: &DensityOperator, basis: Basis) -> Result<JointTable> {
    let layout = rho.layout();
    let mut m = rho.matrix().clone();
    if let Some(g) = basis.pre_rotation() {
        let u = SiteEmbedding::new(layout.dims(), &[MEMORY]).embed(&g.matrix(), layout.total_dim());
        m = &u * m * u.adjoint();
    }
    let total = trace(&m).re;
    if !(total > 0.0) {
        return Err(Error::InvalidState(format!("trace {total}")));
    }
    let mut table = [[0.0; 2]; 2];
    for i in 0..layout.total_dim() {
        let d = layout.digits(i);
        if d[MEMORY] < 2 && d[ANCILLA] < 2 {
            table[d[MEMORY]][d[ANCILLA]] += m[(i, i)].re / total;
        }
    }
    Ok(table)
}

/// Multinomial sample of `shots` readouts from a probability table.
pub fn sample_table<R: Rng + ?Sized>(probs: &JointTable, shots: u64, rng: &mut R) -> JointTable {
    let flat = [probs[0][0], probs[0][1], probs[1][0], probs[1][1]].map(|p| p.max(0.0));
    let mut remaining = shots;
    let mut mass: f64 = flat.iter().sum();
    let mut out = [0u64; 4];
    for k in 0..4 {
        if remaining == 0 || mass <= 0.0 {
            break;
        }
        let p = if k == 3 { 1.0 } else { (flat[k] / mass).clamp(0.0, 1.0) };
        let n = Binomial::new(remaining, p).expect("valid binomial").sample(rng);
        out[k] = n;
        remaining -= n;
        mass -= flat[k];
    }
    [[out[0] as f64, out[1] as f64], [out[2] as f64, out[3] as f64]]
}

impl TomographyDataset {
    /// Readout tables for every final state and setting, exact or sampled.
    pub fn from_states(states: &[DensityOperator], shots: Option<u64>, seed: u64) -> Result<Self> {
        let inputs = states
            .iter()
            .enumerate()
            .map(|(j, rho)| {
                let mut settings = BTreeMap::new();
                for (k, basis) in Basis::ALL.into_iter().enumerate() {
                    let p = joint_probabilities(rho, basis)?;
                    let table = match shots {
                        None => p,
                        Some(n) => sample_table(&p, n, &mut seeds::rng(seed, Stream::Shots, &[j as u64, k as u64])),
                    };
                    settings.insert(basis, table);
                }
                Ok(InputData { settings })
            })
            .collect::<Result<_>>()?;
        Ok(Self { inputs, shots })
    }

    /// `input_index,setting,q1_outcome,q4_outcome,count`, inputs numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("input_index,setting,q1_outcome,q4_outcome,count\n");
        for (j, input) in self.inputs.iter().enumerate() {
            for (basis, table) in &input.settings {
                for (q1, row) in table.iter().enumerate() {
                    for (q4, &v) in row.iter().enumerate() {
                        let value = match self.shots {
                            Some(_) => format!("{}", v.round() as u64),
                            None => format!("{v:?}"),
                        };
                        let _ = writeln!(out, "{},{},{},{},{}", j + 1, basis.name(), q1, q4, value);
                    }
                }
            }
        }
        out
    }

    /// Parses the CSV form. Values written with a decimal point or exponent
    /// are read as exact probabilities, integers as counts.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let mut inputs: BTreeMap<usize, InputData> = BTreeMap::new();
        let mut exact = None;
        for (k, record) in reader.records().enumerate() {
            let line = k + 2;
            let perr = |m: &str| Error::Parse { line, message: m.to_string() };
            let r = record.map_err(|e| perr(&e.to_string()))?;
            if r.len() != 5 {
                return Err(perr("expected 5 columns"));
            }
            let j: usize = r[0].trim().parse().map_err(|_| perr("bad input_index"))?;
            if j == 0 {
                return Err(perr("input_index starts at 1"));
            }
            let basis = Basis::parse(r[1].trim()).ok_or_else(|| perr("bad setting"))?;
            let q1: usize = r[2].trim().parse().map_err(|_| perr("bad q1_outcome"))?;
            let q4: usize = r[3].trim().parse().map_err(|_| perr("bad q4_outcome"))?;
            if q1 > 1 || q4 > 1 {
                return Err(perr("outcomes are 0 or 1"));
            }
            let token = r[4].trim();
            let is_exact = token.contains(['.', 'e', 'E']);
            if *exact.get_or_insert(is_exact) != is_exact {
                return Err(perr("mixed counts and probabilities"));
            }
            let v: f64 = token.parse().map_err(|_| perr("bad count"))?;
            if !(v >= 0.0) {
                return Err(perr("negative count"));
            }
            inputs.entry(j).or_default().settings.entry(basis).or_insert([[0.0; 2]; 2])[q1][q4] = v;
        }
        let n = inputs.keys().next_back().copied().unwrap_or(0);
        if inputs.len() != n {
            return Err(Error::MissingData("input indices are not contiguous".into()));
        }
        let inputs: Vec<InputData> = inputs.into_values().collect();
        let shots = if exact.unwrap_or(true) {
            None
        } else {
            let totals: Vec<f64> = inputs
                .iter()
                .flat_map(|i| i.settings.values().map(|t| t.iter().flatten().sum::<f64>()))
                .collect();
            let first = totals.first().copied().unwrap_or(0.0);
            if totals.iter().any(|&t| t != first) {
                return Err(Error::InvalidParams("settings have different shot totals".into()));
            }
            Some(first as u64)
        };
        Ok(Self { inputs, shots })
    }
}

/// Postselected expectation values and success statistics of one input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimates {
    /// ⟨X⟩, ⟨Y⟩, ⟨Z⟩ of the memory given ancilla = 1.
    pub expectations: [f64; 3],
    /// Postselected weight per setting (counts, or probabilities if exact).
    pub postselected: [f64; 3],
    /// Pooled fraction of ancilla = 1 readouts.
    pub success: f64,
    /// Pooled number of readouts, or `None` for exact data.
    pub total: Option<f64>,
}

pub fn estimates(input: &InputData, index: usize, shots: Option<u64>) -> Result<Estimates> {
    let mut expectations = [0.0; 3];
    let mut postselected = [0.0; 3];
    let (mut hits, mut total) = (0.0, 0.0);
    for (k, basis) in Basis::ALL.into_iter().enumerate() {
        let t = input
            .settings
            .get(&basis)
            .ok_or_else(|| Error::MissingData(format!("input {} lacks setting {}", index + 1, basis.name())))?;
        let post = t[0][1] + t[1][1];
        if !(post > 0.0) {
            return Err(Error::NoPostselectedCounts { input: index + 1, setting: basis.name().to_string() });
        }
        expectations[k] = (t[0][1] - t[1][1]) / post;
        postselected[k] = post;
        hits += post;
        total += t.iter().flatten().sum::<f64>();
    }
    Ok(Estimates { expectations, postselected, success: hits / total, total: shots.map(|_| total) })
}

/// `(I + r·σ)/2` without any positivity constraint.
pub fn linear_density(bloch: [f64; 3]) -> CMatrix {
    DensityOperator::from_bloch(bloch, 1.0).into_matrix()
}

/// Nearest PSD unit-trace matrix (eigenvalue clipping with renormalisation).
pub fn physical_density(m: &CMatrix) -> CMatrix {
    project_psd_with_trace(&hermitian_part(m), 1.0)
}

fn bloch_of(m: &CMatrix) -> [f64; 3] {
    let e = |p: Pauli| trace(&(m * p.matrix())).re;
    [e(Pauli::X), e(Pauli::Y), e(Pauli::Z)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct QstResult {
    /// Projected, unit-trace estimate.
    pub rho: DensityOperator,
    /// Bloch vector before projection.
    pub raw_bloch: [f64; 3],
    pub bloch: [f64; 3],
    pub success_probability: f64,
}

pub fn qst_from_estimates(e: &Estimates) -> Result<QstResult> {
    let projected = physical_density(&linear_density(e.expectations));
    Ok(QstResult {
        bloch: bloch_of(&projected),
        rho: DensityOperator::new(SubsystemLayout::qubits(1), projected)?,
        raw_bloch: e.expectations,
        success_probability: e.success,
    })
}

/// State tomography of the postselected memory for input `index`.
pub fn qst_single(dataset: &TomographyDataset, index: usize) -> Result<QstResult> {
    let input = dataset.inputs.get(index).ok_or_else(|| Error::MissingData(format!("input {}", index + 1)))?;
    qst_from_estimates(&estimates(input, index, dataset.shots)?)
}

/// `⟨ψ|ρ|ψ⟩`. In strict mode an unnormalised `ρ` is an error.
pub fn state_fidelity(rho: &CMatrix, psi: &CVector, strict: bool) -> Result<f64> {
    if rho.shape() != (2, 2) || psi.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: psi.len() });
    }
    let t = trace(rho).re;
    if strict && (t - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized(t));
    }
    let psi = psi / real(psi.norm());
    Ok((psi.adjoint() * rho * &psi)[(0, 0)].re)
}

/// Process matrix over the Pauli basis {I, X, Y, Z}.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiMatrix {
    pub matrix: CMatrix,
    pub projected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiJson {
    pub basis: Vec<String>,
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
    pub projected: bool,
    pub trace: f64,
}

impl ChiMatrix {
    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    /// Nearest PSD matrix with the same trace, capped at 1.
    pub fn project(&self) -> Result<ChiMatrix> {
        let t = self.trace();
        if !(t > 0.0) {
            return Err(Error::ZeroTrace);
        }
        Ok(ChiMatrix { matrix: project_psd_with_trace(&hermitian_part(&self.matrix), t.min(1.0)), projected: true })
    }

    pub fn to_json(&self) -> ChiJson {
        let grid = |f: fn(crate::linalg::C64) -> f64| {
            (0..4).map(|r| (0..4).map(|c| f(self.matrix[(r, c)])).collect()).collect()
        };
        ChiJson {
            basis: ["I", "X", "Y", "Z"].iter().map(|s| s.to_string()).collect(),
            real: grid(|z| z.re),
            imag: grid(|z| z.im),
            projected: self.projected,
            trace: self.trace(),
        }
    }

    pub fn from_json(j: &ChiJson) -> Result<Self> {
        if j.real.len() != 4 || j.imag.len() != 4 || j.real.iter().chain(&j.imag).any(|r| r.len() != 4) {
            return Err(Error::DimensionMismatch { expected: 4, actual: j.real.len() });
        }
        let matrix = CMatrix::from_fn(4, 4, |r, c| c64(j.real[r][c], j.imag[r][c]));
        if hermiticity_deviation(&matrix) > 1e-9 {
            return Err(Error::InvalidState("χ is not Hermitian".into()));
        }
        Ok(Self { matrix, projected: j.projected })
    }
}

/// Pauli coefficients of a 2×2 operator: `K = Σ c_m E_m`.
pub fn pauli_coefficients(k: &CMatrix) -> [crate::linalg::C64; 4] {
    Pauli::ALL.map(|p| trace(&(p.matrix() * k)) / real(2.0))
}

/// Rank-one χ of the postselected map `ρ ↦ K ρ K†` with `K = C·A⁻¹`.
pub fn ideal_chi(instance: &LinearSystemInstance) -> Result<ChiMatrix> {
    let a = instance.a();
    let inv = a.clone().try_inverse().ok_or(Error::Singular)?;
    let c = CVector::from_iterator(4, pauli_coefficients(&(inv * real(instance.c()))));
    Ok(ChiMatrix { matrix: &c * c.adjoint(), projected: false })
}

/// `Re Tr(χ_id χ_exp) / (Tr χ_id · Tr χ_exp)`.
pub fn process_fidelity(chi_id: &ChiMatrix, chi_exp: &ChiMatrix) -> Result<f64> {
    let (a, b) = (chi_id.trace(), chi_exp.trace());
    if a.abs() < 1e-15 || b.abs() < 1e-15 {
        return Err(Error::ZeroTrace);
    }
    Ok(trace(&(&chi_id.matrix * &chi_exp.matrix)).re / (a * b))
}

/// Relative singular-value cut-off for the QPT design matrix.
pub const QPT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QptFit {
    pub chi: ChiMatrix,
    pub singular_values: Vec<f64>,
    /// Ratio of largest to smallest singular value of the design matrix.
    pub condition: f64,
    /// Frobenius norm of the fit residual over all outputs.
    pub residual: f64,
}

/// Hermitian basis of χ: 4 diagonal, then real and imaginary parts of the
/// upper triangle.
fn chi_basis() -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(16);
    for m in 0..4 {
        let mut b = CMatrix::zeros(4, 4);
        b[(m, m)] = real(1.0);
        out.push(b);
    }
    for m in 0..4 {
        for n in m + 1..4 {
            let mut re = CMatrix::zeros(4, 4);
            re[(m, n)] = real(1.0);
            re[(n, m)] = real(1.0);
            out.push(re);
            let mut im = CMatrix::zeros(4, 4);
            im[(m, n)] = c64(0.0, 1.0);
            im[(n, m)] = c64(0.0, -1.0);
            out.push(im);
        }
    }
    out
}

fn apply_chi(chi: &CMatrix, rho: &CMatrix) -> CMatrix {
    let e = Pauli::ALL.map(|p| p.matrix());
    let mut out = CMatrix::zeros(2, 2);
    for m in 0..4 {
        for n in 0..4 {
            if chi[(m, n)] != c64(0.0, 0.0) {
                out += &e[m] * rho * e[n].adjoint() * chi[(m, n)];
            }
        }
    }
    out
}

/// Least-squares χ with `ρ_out = Σ χ_mn E_m ρ_in E_n†`, outputs unnormalised.
pub fn qpt_fit(inputs: &[CMatrix], outputs: &[CMatrix]) -> Result<QptFit> {
    if inputs.len() != outputs.len() {
        return Err(Error::DimensionMismatch { expected: inputs.len(), actual: outputs.len() });
    }
    if inputs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let basis = chi_basis();
    let rows = 8 * inputs.len();
    let mut design = nalgebra::DMatrix::<f64>::zeros(rows, 16);
    let mut target = nalgebra::DVector::<f64>::zeros(rows);
    for (k, (rin, rout)) in inputs.iter().zip(outputs).enumerate() {
        for (p, b) in basis.iter().enumerate() {
            let img = apply_chi(b, rin);
            for e in 0..4 {
                design[(8 * k + 2 * e, p)] = img[(e / 2, e % 2)].re;
                design[(8 * k + 2 * e + 1, p)] = img[(e / 2, e % 2)].im;
            }
        }
        for e in 0..4 {
            target[8 * k + 2 * e] = rout[(e / 2, e % 2)].re;
            target[8 * k + 2 * e + 1] = rout[(e / 2, e % 2)].im;
        }
    }
    let svd = design.clone().svd(true, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > QPT_RANK_TOL * max).count();
    if rank < 16 {
        return Err(Error::RankDeficient { rank, needed: 16 });
    }
    let x = svd.solve(&target, QPT_RANK_TOL * max).map_err(|e| Error::Fit(e.to_string()))?;
    let mut chi = CMatrix::zeros(4, 4);
    for (p, b) in basis.iter().enumerate() {
        chi += b * real(x[p]);
    }
    let residual = (&design * &x - target).norm();
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(QptFit { chi: ChiMatrix { matrix: chi, projected: false }, singular_values: sv, condition: max / min, residual })
}

/// Input Bloch angles `(θ_j, φ_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputStateSet {
    angles: Vec<(f64, f64)>,
}

impl InputStateSet {
    pub fn new(angles: Vec<(f64, f64)>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::EmptyInput);
        }
        let vecs: Vec<CVector> = angles.iter().map(|&(t, p)| bloch_vector_state(t, p)).collect();
        for i in 0..vecs.len() {
            for j in 0..i {
                if (vecs[i].dotc(&vecs[j]).norm() - 1.0).abs() < 1e-12 {
                    return Err(Error::InvalidParams(format!("input states {} and {} coincide", j + 1, i + 1)));
                }
            }
        }
        Ok(Self { angles })
    }

    /// |0⟩, two rings of eight at θ = π/3 and 2π/3, and |1⟩.
    pub fn default_18() -> Self {
        let mut angles = vec![(0.0, 0.0)];
        for theta in [PI / 3.0, 2.0 * PI / 3.0] {
            for k in 0..8 {
                angles.push((theta, k as f64 * PI / 4.0));
            }
        }
        angles.push((PI, 0.0));
        Self { angles }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[(f64, f64)] {
        &self.angles
    }

    pub fn vectors(&self) -> Vec<CVector> {
        self.angles.iter().map(|&(t, p)| bloch_vector_state(t, p)).collect()
    }

    pub fn densities(&self) -> Vec<CMatrix> {
        self.vectors().iter().map(|v| v * v.adjoint()).collect()
    }

    pub fn subset(&self, count: usize) -> Result<Self> {
        Self::new(self.angles[..count.min(self.angles.len())].to_vec())
    }
}

/// QPT from a dataset with nominal input states; outputs are the raw
/// linear-inversion states scaled by their success probabilities.
pub fn qpt_from_estimates(inputs: &InputStateSet, est: &[Estimates]) -> Result<QptFit> {
    let outputs: Vec<CMatrix> = est.iter().map(|e| linear_density(e.expectations) * real(e.success)).collect();
    qpt_fit(&inputs.densities(), &outputs)
}

pub fn dataset_estimates(dataset: &TomographyDataset) -> Result<Vec<Estimates>> {
    dataset.inputs.iter().enumerate().map(|(j, i)| estimates(i, j, dataset.shots)).collect()
}

/// Perturbs estimates by their sampling standard errors.
fn perturb<R: Rng + ?Sized>(e: &Estimates, rng: &mut R) -> Estimates {
    let mut out = *e;
    let Some(total) = e.total else { return out };
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    for k in 0..3 {
        let se = ((1.0 - e.expectations[k].powi(2)).max(0.0) / e.postselected[k]).sqrt();
        out.expectations[k] = (e.expectations[k] + se * normal.sample(rng)).clamp(-1.0, 1.0);
    }
    let se = (e.success * (1.0 - e.success) / total).max(0.0).sqrt();
    out.success = (e.success + se * normal.sample(rng)).clamp(0.0, 1.0);
    out
}

pub const MIN_RESAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub process_fidelity_std: f64,
    pub state_fidelity_std: Vec<f64>,
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt()
}

/// Standard deviations of the process fidelity and of every output-state
/// fidelity under Gaussian resampling of the tomography data.
pub fn bootstrap_errorbars(
    dataset: &TomographyDataset,
    inputs: &InputStateSet,
    chi_id: &ChiMatrix,
    targets: &[CVector],
    n_resamples: usize,
    seed: u64,
) -> Result<Bootstrap> {
    if n_resamples < MIN_RESAMPLES {
        return Err(Error::InvalidParams(format!("{n_resamples} resamples, need at least {MIN_RESAMPLES}")));
    }
    if targets.len() != dataset.inputs.len() {
        return Err(Error::DimensionMismatch { expected: dataset.inputs.len(), actual: targets.len() });
    }
    let est = dataset_estimates(dataset)?;
    let samples: Vec<(f64, Vec<f64>)> = (0..n_resamples as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeds::rng(seed, Stream::Resample, &[r]);
            let e: Vec<Estimates> = est.iter().map(|x| perturb(x, &mut rng)).collect();
            let fit = qpt_from_estimates(inputs, &e)?;
            let f = process_fidelity(chi_id, &fit.chi)?;
            let states = e
                .iter()
                .zip(targets)
                .map(|(x, t)| state_fidelity(qst_from_estimates(x)?.rho.matrix(), t, false))
                .collect::<Result<Vec<f64>>>()?;
            Ok((f, states))
        })
        .collect::<Result<_>>()?;
    let pf: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let state_fidelity_std = (0..targets.len())
        .map(|j| std_dev(&samples.iter().map(|s| s.1[j]).collect::<Vec<_>>()))
        .collect();
    Ok(Bootstrap { process_fidelity_std: std_dev(&pf), state_fidelity_std })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_deviation};

    #[test]
    fn pre_rotations_map_paulis_to_z() {
        for b in Basis::ALL {
            let u = b.pre_rotation().map(|g| g.matrix()).unwrap_or_else(|| CMatrix::identity(2, 2));
            assert!(unitarity_deviation(&u) < 1e-15);
            let z = u.adjoint() * Pauli::Z.matrix() * &u;
            assert!(max_abs_diff(&z, &b.pauli().matrix()) < 1e-15, "{b:?}");
        }
    }

    #[test]
    fn ideal_chi_examples() {
        let b = bloch_vector_state(0.0, 0.0);
        let inst = LinearSystemInstance::reference(b).unwrap();
        let chi = ideal_chi(&inst).unwrap();
        let v = [0.75, -0.25, 0.0, 0.0];
        for r in 0..4 {
            for c in 0..4 {
                assert!((chi.matrix[(r, c)] - real(v[r] * v[c])).norm() < 1e-14);
            }
        }
        assert!((chi.trace() - 0.625).abs() < 1e-14);
        let half = ideal_chi(&inst.with_c(0.5).unwrap()).unwrap();
        assert!((half.trace() - 0.15625).abs() < 1e-14);
        let id = LinearSystemInstance::new(
            CMatrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real(1.0 + 1e-3)]),
            bloch_vector_state(0.0, 0.0),
            1.0,
        )
        .unwrap();
        assert!((ideal_chi(&id).unwrap().matrix[(0, 0)].re - 1.0).abs() < 1e-3);
    }

    #[test]
    fn process_fidelity_examples() {
        let inst = LinearSystemInstance::reference(bloch_vector_state(0.0, 0.0)).unwrap();
        let chi = ideal_chi(&inst).unwrap();
        assert!((process_fidelity(&chi, &chi).unwrap() - 1.0).abs() < 1e-14);
        let scaled = ChiMatrix { matrix: &chi.matrix * real(0.7946), projected: false };
        assert!((process_fidelity(&chi, &scaled).unwrap() - 1.0).abs() < 1e-14);
        let mut identity = CMatrix::zeros(4, 4);
        identity[(0, 0)] = real(1.0);
        let f = process_fidelity(&chi, &ChiMatrix { matrix: identity, projected: false }).unwrap();
        // Tr(χ_id χ_I) / (Tr χ_id · 1) = 0.5625 / 0.625
        assert!((f - 0.9).abs() < 1e-14);
        let zero = ChiMatrix { matrix: CMatrix::zeros(4, 4), projected: false };
        assert!(matches!(process_fidelity(&chi, &zero), Err(Error::ZeroTrace)));
    }

    #[test]
    fn identity_process_and_rank_deficiency() {
        let set = InputStateSet::default_18();
        let rho = set.densities();
        let fit = qpt_fit(&rho, &rho).unwrap();
        assert!((fit.chi.matrix[(0, 0)].re - 1.0).abs() < 1e-9);
        for r in 0..4 {
            for c in 0..4 {
                if (r, c) != (0, 0) {
                    assert!(fit.chi.matrix[(r, c)].norm() < 1e-9);
                }
            }
        }
        let three = set.subset(3).unwrap().densities();
        assert!(matches!(qpt_fit(&three, &three), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn state_fidelity_examples() {
        let psi = bloch_vector_state(1.0, 0.4);
        let rho = &psi * psi.adjoint();
        assert!((state_fidelity(&rho, &psi, true).unwrap() - 1.0).abs() < 1e-14);
        let mixed = CMatrix::identity(2, 2) * real(0.5);
        assert!((state_fidelity(&mixed, &psi, true).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(state_fidelity(&(mixed * real(0.5)), &psi, true), Err(Error::Unnormalized(_))));
    }

    #[test]
    fn default_set_layout() {
        let s = InputStateSet::default_18();
        assert_eq!(s.len(), 18);
        assert_eq!(s.angles()[0], (0.0, 0.0));
        assert!(InputStateSet::new(s.angles().to_vec()).is_ok());
        assert!(InputStateSet::new(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        // mean Bloch vector vanishes
        let mean = s.densities().iter().fold(CMatrix::zeros(2, 2), |a, r| a + r) / real(18.0);
        assert!(max_abs_diff(&mean, &(CMatrix::identity(2, 2) * real(0.5))) < 1e-14);
    }

    #[test]
    fn csv_round_trip_exact_and_counts() {
        let layout = SubsystemLayout::qubits(4);
        let psi = crate::qsim::PureState::basis(layout, &[0, 0, 0, 1]).unwrap();
        let ds = TomographyDataset::from_states(&[psi.to_density()], None, 0).unwrap();
        let back = TomographyDataset::from_csv(&ds.to_csv()).unwrap();
        assert_eq!(back, ds);
        let ds = TomographyDataset::from_states(&[psi.to_density()], Some(100), 5).unwrap();
        let back = TomographyDataset::from_csv(&ds.to_csv()).unwrap();
        assert_eq!(back, ds);
        assert!(TomographyDataset::from_csv("input_index,setting,q1_outcome,q4_outcome,count\n1,W,0,0,1\n").is_err());
    }

    #[test]
    fn missing_postselection_reported() {
        let layout = SubsystemLayout::qubits(4);
        let psi = crate::qsim::PureState::basis(layout, &[0, 0, 0, 0]).unwrap();
        let ds = TomographyDataset::from_states(&[psi.to_density()], None, 0).unwrap();
        assert!(matches!(qst_single(&ds, 0), Err(Error::NoPostselectedCounts { .. })));
    }
}
