//! Dense state-vector and density-operator engine over chains of 2- and
//! 3-level sites.
//!
//! Amplitude ordering: site 0 is the most significant digit, so the basis
//! state `|Q1 Q2 Q3 Q4⟩` reads left to right.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg::{c64, hermiticity_deviation, real, trace, unitarity_deviation, CMatrix, CVector, SiteEmbedding, C64};

pub const UNITARY_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-12;
pub const STRICT_LEAKAGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl SubsystemLayout {
    pub fn new<S: Into<String>>(dims: Vec<usize>, labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if dims.is_empty() {
            return Err(Error::InvalidLayout("no sites".into()));
        }
        if dims.len() != labels.len() {
            return Err(Error::InvalidLayout(format!(
                "{} dims but {} labels",
                dims.len(),
                labels.len()
            )));
        }
        if let Some(d) = dims.iter().find(|&&d| d != 2 && d != 3) {
            return Err(Error::InvalidLayout(format!("site dimension {d} not in {{2,3}}")));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidLayout(format!("duplicate label {l}")));
            }
        }
        Ok(Self { dims, labels })
    }

    /// `n` qubits labelled `Q1..Qn`.
    pub fn qubits(n: usize) -> Self {
        let labels = (1..=n).map(|k| format!("Q{k}")).collect();
        Self { dims: vec![2; n], labels }
    }

    /// The same labels with the listed sites promoted to qutrits.
    pub fn with_qutrits(&self, sites: &[usize]) -> Self {
        let mut dims = self.dims.clone();
        for &s in sites {
            dims[s] = 3;
        }
        Self { dims, labels: self.labels.clone() }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, site: usize) -> usize {
        self.dims[site]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Per-site levels of a full-register basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        out
    }

    pub fn index(&self, levels: &[usize]) -> usize {
        levels
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&l, &d)| acc * d + l)
    }

    fn check_targets(&self, targets: &[usize]) -> Result<usize> {
        let mut seen = HashSet::new();
        for &t in targets {
            if t >= self.dims.len() {
                return Err(Error::SiteOutOfRange(t));
            }
            if !seen.insert(t) {
                return Err(Error::DuplicateTargets(t));
            }
        }
        Ok(targets.iter().map(|&t| self.dims[t]).product())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        let o = real(0.0);
        let l = real(1.0);
        let rows = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, c64(0.0, -1.0), c64(0.0, 1.0), o],
            Pauli::Z => [l, o, o, real(-1.0)],
        };
        CMatrix::from_row_slice(2, 2, &rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    layout: SubsystemLayout,
}

impl PureState {
    pub fn from_amplitudes(layout: SubsystemLayout, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                actual: amplitudes.len(),
            });
        }
        let state = Self { amplitudes: CVector::from_vec(amplitudes), layout };
        let n = state.norm_sqr();
        if !(n > 0.0 && n <= 1.0 + NORM_TOL) {
            return Err(Error::InvalidState(format!("squared norm {n} outside (0, 1]")));
        }
        Ok(state)
    }

    pub fn basis(layout: SubsystemLayout, levels: &[usize]) -> Result<Self> {
        if levels.len() != layout.len() {
            return Err(Error::DimensionMismatch { expected: layout.len(), actual: levels.len() });
        }
        for (k, (&l, &d)) in levels.iter().zip(layout.dims()).enumerate() {
            if l >= d {
                return Err(Error::InvalidState(format!("level {l} on site {k} of dimension {d}")));
            }
        }
        let mut amps = CVector::zeros(layout.total_dim());
        amps[layout.index(levels)] = real(1.0);
        Ok(Self { amplitudes: amps, layout })
    }

    /// Product state from per-site amplitude vectors.
    pub fn product(layout: SubsystemLayout, sites: &[Vec<C64>]) -> Result<Self> {
        if sites.len() != layout.len() {
            return Err(Error::DimensionMismatch { expected: layout.len(), actual: sites.len() });
        }
        let mut amps = vec![real(1.0)];
        for (k, local) in sites.iter().enumerate() {
            if local.len() != layout.dim(k) {
                return Err(Error::DimensionMismatch { expected: layout.dim(k), actual: local.len() });
            }
            amps = amps
                .iter()
                .flat_map(|a| local.iter().map(move |b| a * b))
                .collect();
        }
        Self::from_amplitudes(layout, amps)
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut CVector {
        &mut self.amplitudes
    }

    pub fn amplitude(&self, levels: &[usize]) -> C64 {
        self.amplitudes[self.layout.index(levels)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amplitudes /= real(n);
        }
    }

    /// Applies a unitary on `targets`, checking unitarity and dimensions.
    pub fn apply_unitary(&mut self, u: &CMatrix, targets: &[usize]) -> Result<()> {
        let dev = unitarity_deviation(u);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        self.apply_operator(u, targets)
    }

    /// Applies an arbitrary operator on `targets` (no unitarity check).
    pub fn apply_operator(&mut self, op: &CMatrix, targets: &[usize]) -> Result<()> {
        let local = self.layout.check_targets(targets)?;
        if op.nrows() != local || op.ncols() != local {
            return Err(Error::DimensionMismatch { expected: local, actual: op.nrows() });
        }
        let emb = SiteEmbedding::new(self.layout.dims(), targets);
        emb.apply(op, self.amplitudes.as_mut_slice());
        Ok(())
    }

    /// Applies a full-register operator.
    pub fn apply_full(&mut self, op: &CMatrix) -> Result<()> {
        let n = self.layout.total_dim();
        if op.nrows() != n || op.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: op.nrows() });
        }
        self.amplitudes = op * &self.amplitudes;
        Ok(())
    }

    /// Probability (squared norm) of the branch where `site` reads `outcome`.
    pub fn outcome_probability(&self, site: usize, outcome: usize) -> Result<f64> {
        if site >= self.layout.len() {
            return Err(Error::SiteOutOfRange(site));
        }
        if outcome >= self.layout.dim(site) {
            return Err(Error::InvalidState(format!("outcome {outcome} on site {site}")));
        }
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.layout.digits(*i)[site] == outcome)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projects `site` onto `outcome` and renormalises; returns the branch
    /// probability alongside the conditional state.
    pub fn postselect(&self, site: usize, outcome: usize) -> Result<(PureState, f64)> {
        let p = self.outcome_probability(site, outcome)?;
        if p < MIN_BRANCH_PROBABILITY {
            return Err(Error::ImpossibleOutcome(p));
        }
        let mut amps = self.amplitudes.clone();
        for (i, a) in amps.iter_mut().enumerate() {
            if self.layout.digits(i)[site] != outcome {
                *a = real(0.0);
            }
        }
        amps /= real(p.sqrt());
        Ok((Self { amplitudes: amps, layout: self.layout.clone() }, p))
    }

    pub fn reduced_density(&self, site: usize) -> Result<DensityOperator> {
        self.to_density().reduced(site)
    }

    pub fn to_density(&self) -> DensityOperator {
        let v = &self.amplitudes;
        DensityOperator { matrix: v * v.adjoint(), layout: self.layout.clone() }
    }

    pub fn expectation(&self, observable: Pauli, site: usize, strict: bool) -> Result<f64> {
        self.reduced_density(site)?.expectation(observable, 0, strict)
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap_sqr(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }
}

/// Possibly subnormalised density operator over a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    layout: SubsystemLayout,
}

impl DensityOperator {
    pub fn new(layout: SubsystemLayout, matrix: CMatrix) -> Result<Self> {
        let n = layout.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: matrix.nrows() });
        }
        Ok(Self { matrix, layout })
    }

    /// Single-qubit operator from a Bloch vector scaled by `weight`:
    /// `weight · (I + r·σ)/2`.
    pub fn from_bloch(bloch: [f64; 3], weight: f64) -> Self {
        let m = (Pauli::I.matrix()
            + Pauli::X.matrix() * real(bloch[0])
            + Pauli::Y.matrix() * real(bloch[1])
            + Pauli::Z.matrix() * real(bloch[2]))
            * real(0.5 * weight);
        Self { matrix: m, layout: SubsystemLayout::qubits(1) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    /// Checks Hermiticity, positivity and the subnormalised trace bound.
    pub fn validate(&self) -> Result<()> {
        let h = hermiticity_deviation(&self.matrix);
        if h > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {h:.2e})")));
        }
        let (values, _) = crate::linalg::eigh(&self.matrix);
        if values.first().is_some_and(|&v| v < -1e-9) {
            return Err(Error::InvalidState(format!("negative eigenvalue {}", values[0])));
        }
        let t = self.trace();
        if !(t > 0.0 && t <= 1.0 + 1e-9) {
            return Err(Error::InvalidState(format!("trace {t} outside (0, 1]")));
        }
        Ok(())
    }

    /// Partial trace onto one site.
    pub fn reduced(&self, site: usize) -> Result<DensityOperator> {
        if site >= self.layout.len() {
            return Err(Error::SiteOutOfRange(site));
        }
        let d = self.layout.dim(site);
        let emb = SiteEmbedding::new(self.layout.dims(), &[site]);
        let mut out = CMatrix::zeros(d, d);
        for &base in &emb.bases {
            for (r, &ro) in emb.offsets.iter().enumerate() {
                for (c, &co) in emb.offsets.iter().enumerate() {
                    out[(r, c)] += self.matrix[(base + ro, base + co)];
                }
            }
        }
        let layout = SubsystemLayout {
            dims: vec![d],
            labels: vec![self.layout.labels()[site].clone()],
        };
        Ok(DensityOperator { matrix: out, layout })
    }

    /// Population outside the computational {0,1} levels of `site`.
    pub fn leakage(&self, site: usize) -> Result<f64> {
        let r = self.reduced(site)?;
        Ok((2..r.matrix.nrows()).map(|k| r.matrix[(k, k)].re).sum())
    }

    /// `Tr(ρ P)` on the {0,1} levels of `site`.
    pub fn expectation(&self, observable: Pauli, site: usize, strict: bool) -> Result<f64> {
        let r = self.reduced(site)?;
        if r.matrix.nrows() > 2 {
            let leak = self.leakage(site)?;
            if strict && leak > STRICT_LEAKAGE {
                return Err(Error::Leakage(leak));
            }
        }
        let block = r.matrix.view((0, 0), (2, 2)).into_owned();
        Ok(trace(&(block * observable.matrix())).re)
    }

    /// Unnormalised projection of `site` onto `outcome`; returns the
    /// projected operator and its trace.
    pub fn project(&self, site: usize, outcome: usize) -> Result<(DensityOperator, f64)> {
        if site >= self.layout.len() {
            return Err(Error::SiteOutOfRange(site));
        }
        let n = self.layout.total_dim();
        let keep: Vec<bool> = (0..n).map(|i| self.layout.digits(i)[site] == outcome).collect();
        let m = CMatrix::from_fn(n, n, |r, c| {
            if keep[r] && keep[c] {
                self.matrix[(r, c)]
            } else {
                real(0.0)
            }
        });
        let out = DensityOperator { matrix: m, layout: self.layout.clone() };
        let p = out.trace();
        Ok((out, p))
    }
}

/// Convex mixture `Σ w_k |ψ_k⟩⟨ψ_k|`, reduced in index order.
pub fn average_trajectories(runs: &[PureState], weights: &[f64]) -> Result<DensityOperator> {
    let first = runs.first().ok_or(Error::EmptyInput)?;
    if runs.len() != weights.len() {
        return Err(Error::InvalidWeights(format!("{} runs, {} weights", runs.len(), weights.len())));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 || weights.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    let n = first.layout.total_dim();
    let mut acc = CMatrix::zeros(n, n);
    for (run, &w) in runs.iter().zip(weights) {
        if run.layout != first.layout {
            return Err(Error::InvalidLayout("trajectory layouts differ".into()));
        }
        let v = &run.amplitudes;
        acc += (v * v.adjoint()) * real(w);
    }
    Ok(DensityOperator { matrix: acc, layout: first.layout.clone() })
}
