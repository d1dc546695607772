//! Device parameters of the transmon chain.
//!
//! File units follow the usual lab conventions: frequencies in GHz,
//! anharmonicity and couplings in MHz, coherence times in μs and pulse
//! lengths in ns. Accessors return SI values (Hz, s) or angular
//! frequencies (rad/s) as named.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateTiming};
use crate::error::{Error, Result};
use crate::linalg::{eigh, real, CMatrix};

pub const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceParams {
    /// Idle frequencies ω_j/2π, GHz.
    pub idle_frequency_ghz: Vec<f64>,
    /// Anharmonicity η/2π, MHz; level |2⟩ sits at 2ω − η.
    pub anharmonicity_mhz: f64,
    /// Nearest-neighbour couplings g_{j,j+1}/2π, MHz.
    pub coupling_mhz: Vec<f64>,
    pub t1_us: Vec<f64>,
    pub t2_star_us: Vec<f64>,
    /// XY drive crosstalk suppression factors; carried, not simulated.
    pub xy_crosstalk: Vec<f64>,
    /// Length of a π rotation per qubit, ns. Other angles scale linearly.
    pub pi_pulse_ns: Vec<f64>,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            idle_frequency_ghz: vec![5.073, 4.074, 4.948, 4.547],
            anharmonicity_mhz: 250.0,
            coupling_mhz: vec![13.0, 9.8, 14.1],
            t1_us: vec![15.9, 7.4, 7.8, 14.1],
            t2_star_us: vec![8.7, 2.3, 5.2, 3.4],
            xy_crosstalk: vec![11.7, 6.7],
            pi_pulse_ns: vec![30.0, 300.0, 300.0, 30.0],
        }
    }
}

impl DeviceParams {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let p: DeviceParams =
            toml::from_str(text).map_err(|e| Error::InvalidParams(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("device parameters serialise")
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.idle_frequency_ghz.len();
        let bad = |m: String| Err(Error::InvalidParams(m));
        if n == 0 {
            return bad("no qubits".into());
        }
        if self.coupling_mhz.len() + 1 != n {
            return bad(format!("{} couplings for {} qubits", self.coupling_mhz.len(), n));
        }
        for (name, v) in [("t1_us", &self.t1_us), ("t2_star_us", &self.t2_star_us), ("pi_pulse_ns", &self.pi_pulse_ns)] {
            if v.len() != n {
                return bad(format!("{name} has {} entries, expected {n}", v.len()));
            }
        }
        let positive = |x: &f64| *x > 0.0 && !x.is_nan();
        if !self.idle_frequency_ghz.iter().all(|f| positive(f) && f.is_finite()) {
            return bad("frequencies must be positive".into());
        }
        if !self.t1_us.iter().chain(&self.t2_star_us).all(positive) {
            return bad("T1 and T2* must be positive".into());
        }
        if !self.pi_pulse_ns.iter().all(|x| positive(x) && x.is_finite()) {
            return bad("pulse lengths must be positive".into());
        }
        if !self.coupling_mhz.iter().all(|g| g.is_finite()) || !self.anharmonicity_mhz.is_finite() {
            return bad("couplings and anharmonicity must be finite".into());
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.idle_frequency_ghz.len()
    }

    pub fn idle_frequency_hz(&self, q: usize) -> f64 {
        self.idle_frequency_ghz[q] * 1e9
    }

    pub fn anharmonicity_hz(&self) -> f64 {
        self.anharmonicity_mhz * 1e6
    }

    /// Coupling between `j` and `j+1`, Hz.
    pub fn coupling_hz(&self, j: usize) -> f64 {
        self.coupling_mhz[j] * 1e6
    }

    pub fn coupling_angular(&self, j: usize) -> f64 {
        TWO_PI * self.coupling_hz(j)
    }

    pub fn t1(&self, q: usize) -> f64 {
        self.t1_us[q] * 1e-6
    }

    pub fn t2_star(&self, q: usize) -> f64 {
        self.t2_star_us[q] * 1e-6
    }

    pub fn pi_pulse(&self, q: usize) -> f64 {
        self.pi_pulse_ns[q] * 1e-9
    }

    /// Index of the coupler joining `a` and `b`.
    pub fn pair_index(&self, a: usize, b: usize) -> Result<usize> {
        if a.abs_diff(b) != 1 || a.max(b) >= self.n_qubits() {
            return Err(Error::Connectivity(a, b));
        }
        Ok(a.min(b))
    }

    /// Parameters of the contiguous sub-chain `first..=last`.
    pub fn subchain(&self, first: usize, last: usize) -> Result<Self> {
        if first > last || last >= self.n_qubits() {
            return Err(Error::InvalidParams(format!("sub-chain {first}..={last}")));
        }
        let sl = |v: &Vec<f64>| v[first..=last].to_vec();
        Ok(Self {
            idle_frequency_ghz: sl(&self.idle_frequency_ghz),
            anharmonicity_mhz: self.anharmonicity_mhz,
            coupling_mhz: self.coupling_mhz[first..last].to_vec(),
            t1_us: sl(&self.t1_us),
            t2_star_us: sl(&self.t2_star_us),
            xy_crosstalk: self.xy_crosstalk.clone(),
            pi_pulse_ns: sl(&self.pi_pulse_ns),
        })
    }

    /// Idle frequencies of the coupled chain, Hz: eigenvalues of the
    /// single-excitation block, each assigned to the qubit it mostly lives on.
    pub fn dressed_frequencies_hz(&self) -> Vec<f64> {
        let n = self.n_qubits();
        let mut h = CMatrix::zeros(n, n);
        for j in 0..n {
            h[(j, j)] = real(self.idle_frequency_hz(j));
        }
        for j in 0..n.saturating_sub(1) {
            h[(j, j + 1)] = real(self.coupling_hz(j));
            h[(j + 1, j)] = real(self.coupling_hz(j));
        }
        let (values, vectors) = eigh(&h);
        let mut out = vec![0.0; n];
        for (k, &e) in values.iter().enumerate() {
            let q = (0..n)
                .max_by(|&a, &b| vectors[(a, k)].norm_sqr().total_cmp(&vectors[(b, k)].norm_sqr()))
                .unwrap_or(0);
            out[q] = e;
        }
        out
    }

    /// Nominal interaction time of an exchange or CZ gate on the coupler `j`.
    pub fn interaction_time(&self, gate: &Gate, j: usize) -> f64 {
        let g = self.coupling_angular(j);
        match gate {
            Gate::SqrtIswap => PI / (4.0 * g),
            Gate::Iswap => PI / (2.0 * g),
            Gate::Cz => PI / (2f64.sqrt() * g),
            _ => 0.0,
        }
    }

    /// Length of the target park inserted halfway through a CZ.
    pub fn cz_echo_time(&self) -> f64 {
        1.0 / (2.0 * self.anharmonicity_hz())
    }
}

impl GateTiming for DeviceParams {
    fn duration(&self, gate: &Gate, targets: &[usize]) -> f64 {
        match gate {
            Gate::VirtualZ(_) => 0.0,
            Gate::Cz | Gate::SqrtIswap | Gate::Iswap => {
                let Ok(j) = targets
                    .get(1)
                    .ok_or(Error::EmptyInput)
                    .and_then(|&b| self.pair_index(targets[0], b))
                else {
                    return f64::NAN;
                };
                let extra = if matches!(gate, Gate::Cz) { self.cz_echo_time() } else { 0.0 };
                self.interaction_time(gate, j) + extra
            }
            g => match targets.first() {
                Some(&q) if q < self.n_qubits() => self.pi_pulse(q) * g.pulse_angle() / PI,
                _ => f64::NAN,
            },
        }
    }
}
