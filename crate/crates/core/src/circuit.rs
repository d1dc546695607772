//! Circuit intermediate representation and its line-oriented text format.
//!
//! Text grammar (one statement per line, `#` starts a comment):
//!
//! ```text
//! SITES <label>...                      # must come first
//! ROLE memory|register|ancilla <label>...
//! RX|RY|RZ|VIRTUAL_Z <angle> <label> <duration>
//! H <label> <duration>
//! CZ|SQRT_ISWAP|ISWAP <label> <label> <duration>
//! POSTSELECT <label> <level>
//! ```
//!
//! Angles are radians and durations are seconds, both written with the
//! shortest representation that round-trips an `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gates::{hadamard, rotation_matrix, two_qubit_matrix, Axis, TwoQubitKind};
use crate::linalg::{CMatrix, SiteEmbedding};
use crate::qsim::SubsystemLayout;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Gate {
    Rx(f64),
    Ry(f64),
    Rz(f64),
    H,
    Cz,
    SqrtIswap,
    Iswap,
    /// Frame update; identical to `Rz` but takes no time.
    VirtualZ(f64),
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Cz | Gate::SqrtIswap | Gate::Iswap => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::Rx(_) => "RX",
            Gate::Ry(_) => "RY",
            Gate::Rz(_) => "RZ",
            Gate::H => "H",
            Gate::Cz => "CZ",
            Gate::SqrtIswap => "SQRT_ISWAP",
            Gate::Iswap => "ISWAP",
            Gate::VirtualZ(_) => "VIRTUAL_Z",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(a) | Gate::Ry(a) | Gate::Rz(a) | Gate::VirtualZ(a) => Some(a),
            _ => None,
        }
    }

    pub fn two_qubit_kind(&self) -> Option<TwoQubitKind> {
        match self {
            Gate::Cz => Some(TwoQubitKind::Cz),
            Gate::SqrtIswap => Some(TwoQubitKind::SqrtIswap),
            Gate::Iswap => Some(TwoQubitKind::Iswap),
            _ => None,
        }
    }

    pub fn matrix(&self) -> CMatrix {
        match *self {
            Gate::Rx(a) => rotation_matrix(Axis::X, a),
            Gate::Ry(a) => rotation_matrix(Axis::Y, a),
            Gate::Rz(a) | Gate::VirtualZ(a) => rotation_matrix(Axis::Z, a),
            Gate::H => hadamard(),
            Gate::Cz => two_qubit_matrix(TwoQubitKind::Cz),
            Gate::SqrtIswap => two_qubit_matrix(TwoQubitKind::SqrtIswap),
            Gate::Iswap => two_qubit_matrix(TwoQubitKind::Iswap),
        }
    }

    /// Rotation angle a microwave pulse has to realise (H counts as π/2).
    pub fn pulse_angle(&self) -> f64 {
        match *self {
            Gate::Rx(a) | Gate::Ry(a) | Gate::Rz(a) => a.abs(),
            Gate::H => PI / 2.0,
            _ => 0.0,
        }
    }
}

/// Supplies physical durations for gates.
pub trait GateTiming {
    fn duration(&self, gate: &Gate, targets: &[usize]) -> f64;
}

/// Device-independent default timing: 30 ns per single-qubit π pulse
/// (scaled with angle) and 20 ns per two-qubit gate.
#[derive(Debug, Clone, Copy, Default)]
pub struct NominalTiming;

impl GateTiming for NominalTiming {
    fn duration(&self, gate: &Gate, _targets: &[usize]) -> f64 {
        match gate {
            Gate::VirtualZ(_) => 0.0,
            g if g.arity() == 2 => 20e-9,
            g => 30e-9 * g.pulse_angle() / PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GateSpec {
    pub gate: Gate,
    pub targets: Vec<usize>,
    /// Seconds.
    pub duration: f64,
}

impl GateSpec {
    pub fn new(gate: Gate, targets: Vec<usize>, duration: f64) -> Result<Self> {
        if targets.len() != gate.arity() {
            return Err(Error::InvalidGate(format!(
                "{} expects {} target(s), got {}",
                gate.name(),
                gate.arity(),
                targets.len()
            )));
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::DuplicateTargets(targets[0]));
        }
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::InvalidGate(format!("duration {duration}")));
        }
        if duration == 0.0 && !matches!(gate, Gate::VirtualZ(_)) && gate.pulse_angle() != 0.0 {
            return Err(Error::InvalidGate(format!("{} with zero duration", gate.name())));
        }
        if let Some(a) = gate.angle() {
            if !a.is_finite() {
                return Err(Error::InvalidGate("non-finite angle".into()));
            }
        }
        Ok(Self { gate, targets, duration })
    }

    pub fn timed(gate: Gate, targets: Vec<usize>, timing: &dyn GateTiming) -> Result<Self> {
        let d = timing.duration(&gate, &targets);
        Self::new(gate, targets, d)
    }

    pub fn virtual_z(angle: f64, site: usize) -> Self {
        Self { gate: Gate::VirtualZ(angle), targets: vec![site], duration: 0.0 }
    }

    /// Gates whose product is the adjoint of this gate. Exchange gates are
    /// conjugated by `Z` on their first target (`Z·√iSWAP·Z = √iSWAP†`),
    /// written as a pair of virtual-Z frame updates.
    pub fn inverse(&self) -> Vec<GateSpec> {
        let with = |gate| GateSpec { gate, targets: self.targets.clone(), duration: self.duration };
        match self.gate {
            Gate::Rx(a) => vec![with(Gate::Rx(-a))],
            Gate::Ry(a) => vec![with(Gate::Ry(-a))],
            Gate::Rz(a) => vec![with(Gate::Rz(-a))],
            Gate::VirtualZ(a) => vec![with(Gate::VirtualZ(-a))],
            Gate::H | Gate::Cz => vec![with(self.gate)],
            Gate::SqrtIswap | Gate::Iswap => {
                let a = self.targets[0];
                vec![GateSpec::virtual_z(-PI, a), with(self.gate), GateSpec::virtual_z(PI, a)]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum Role {
    Memory,
    Register,
    Ancilla,
}

impl Role {
    fn keyword(self) -> &'static str {
        match self {
            Role::Memory => "memory",
            Role::Register => "register",
            Role::Ancilla => "ancilla",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "memory" => Some(Role::Memory),
            "register" => Some(Role::Register),
            "ancilla" => Some(Role::Ancilla),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Postselection {
    pub site: usize,
    pub outcome: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    sites: SubsystemLayout,
    gates: Vec<GateSpec>,
    postselection: Option<Postselection>,
    roles: BTreeMap<Role, Vec<usize>>,
}

impl Circuit {
    pub fn new(sites: SubsystemLayout) -> Self {
        Self { sites, gates: Vec::new(), postselection: None, roles: BTreeMap::new() }
    }

    /// Same sites and roles, no gates or postselection.
    pub fn empty_like(&self) -> Self {
        Self { sites: self.sites.clone(), gates: Vec::new(), postselection: None, roles: self.roles.clone() }
    }

    pub fn sites(&self) -> &SubsystemLayout {
        &self.sites
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn postselection(&self) -> Option<Postselection> {
        self.postselection
    }

    pub fn roles(&self) -> &BTreeMap<Role, Vec<usize>> {
        &self.roles
    }

    pub fn role(&self, role: Role) -> Option<&[usize]> {
        self.roles.get(&role).map(Vec::as_slice)
    }

    pub fn set_role(&mut self, role: Role, sites: Vec<usize>) -> Result<()> {
        if let Some(&s) = sites.iter().find(|&&s| s >= self.sites.len()) {
            return Err(Error::SiteOutOfRange(s));
        }
        self.roles.insert(role, sites);
        Ok(())
    }

    pub fn push(&mut self, gate: GateSpec) -> Result<()> {
        if let Some(&t) = gate.targets.iter().find(|&&t| t >= self.sites.len()) {
            return Err(Error::SiteOutOfRange(t));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.sites != self.sites {
            return Err(Error::InvalidLayout("appending circuit over different sites".into()));
        }
        if let Some(p) = other.postselection {
            self.set_postselection(p.site, p.outcome)?;
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    pub fn set_postselection(&mut self, site: usize, outcome: usize) -> Result<()> {
        if site >= self.sites.len() {
            return Err(Error::SiteOutOfRange(site));
        }
        if outcome >= self.sites.dim(site) {
            return Err(Error::InvalidGate(format!("postselection level {outcome}")));
        }
        if self.postselection.is_some() {
            return Err(Error::InvalidGate("circuit already has a postselection marker".into()));
        }
        self.postselection = Some(Postselection { site, outcome });
        Ok(())
    }

    pub fn without_postselection(&self) -> Self {
        let mut c = self.clone();
        c.postselection = None;
        c
    }

    /// Reverse order with every gate replaced by its adjoint sequence.
    pub fn inverse(&self) -> Self {
        let mut c = self.empty_like();
        c.gates = self.gates.iter().rev().flat_map(GateSpec::inverse).collect();
        c
    }

    /// Total time when gates run back to back.
    pub fn duration(&self) -> f64 {
        self.gates.iter().map(|g| g.duration).sum()
    }

    /// Gates other than virtual-Z frame updates.
    pub fn physical_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| !matches!(g.gate, Gate::VirtualZ(_))).count()
    }

    /// Product of embedded ideal gate matrices, in order.
    pub fn unitary(&self) -> Result<CMatrix> {
        if self.postselection.is_some() {
            return Err(Error::PostselectionPresent);
        }
        let n = self.sites.total_dim();
        let mut u = CMatrix::identity(n, n);
        for g in &self.gates {
            let emb = SiteEmbedding::new(self.sites.dims(), &g.targets);
            u = emb.embed(&g.gate.matrix(), n) * u;
        }
        Ok(u)
    }

    pub fn to_text(&self) -> String {
        let label = |s: usize| self.sites.labels()[s].as_str();
        let mut out = String::new();
        let _ = writeln!(out, "SITES {}", self.sites.labels().join(" "));
        for (role, sites) in &self.roles {
            let names: Vec<&str> = sites.iter().map(|&s| label(s)).collect();
            let _ = writeln!(out, "ROLE {} {}", role.keyword(), names.join(" "));
        }
        for g in &self.gates {
            let mut line = g.gate.name().to_string();
            if let Some(a) = g.gate.angle() {
                let _ = write!(line, " {a:?}");
            }
            for &t in &g.targets {
                let _ = write!(line, " {}", label(t));
            }
            let _ = write!(line, " {:?}", g.duration);
            out.push_str(&line);
            out.push('\n');
        }
        if let Some(p) = self.postselection {
            let _ = writeln!(out, "POSTSELECT {} {}", label(p.site), p.outcome);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut circuit: Option<Circuit> = None;
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let err = |message: String| Error::Parse { line: line_no, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let keyword = tokens[0];
            if keyword == "SITES" {
                if circuit.is_some() {
                    return Err(err("SITES given twice".into()));
                }
                let layout = SubsystemLayout::new(vec![2; tokens.len() - 1], tokens[1..].to_vec())
                    .map_err(|e| err(e.to_string()))?;
                circuit = Some(Circuit::new(layout));
                continue;
            }
            let c = circuit.as_mut().ok_or_else(|| err("SITES must come first".into()))?;
            let site = |name: &str| {
                c.sites.index_of(name).ok_or_else(|| err(format!("unknown site {name}")))
            };
            let number = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number {s}")));
            match keyword {
                "ROLE" => {
                    let role = tokens
                        .get(1)
                        .and_then(|r| Role::parse(r))
                        .ok_or_else(|| err("unknown role".into()))?;
                    let sites = tokens[2..].iter().map(|t| site(t)).collect::<Result<Vec<_>>>()?;
                    c.set_role(role, sites).map_err(|e| err(e.to_string()))?;
                }
                "POSTSELECT" => {
                    if tokens.len() != 3 {
                        return Err(err("POSTSELECT <site> <level>".into()));
                    }
                    let s = site(tokens[1])?;
                    let level = tokens[2].parse::<usize>().map_err(|_| err("bad level".into()))?;
                    c.set_postselection(s, level).map_err(|e| err(e.to_string()))?;
                }
                _ => {
                    let (gate, rest) = match keyword {
                        "RX" | "RY" | "RZ" | "VIRTUAL_Z" => {
                            let a = number(tokens.get(1).ok_or_else(|| err("missing angle".into()))?)?;
                            let g = match keyword {
                                "RX" => Gate::Rx(a),
                                "RY" => Gate::Ry(a),
                                "RZ" => Gate::Rz(a),
                                _ => Gate::VirtualZ(a),
                            };
                            (g, &tokens[2..])
                        }
                        "H" => (Gate::H, &tokens[1..]),
                        "CZ" => (Gate::Cz, &tokens[1..]),
                        "SQRT_ISWAP" => (Gate::SqrtIswap, &tokens[1..]),
                        "ISWAP" => (Gate::Iswap, &tokens[1..]),
                        other => return Err(err(format!("unknown statement {other}"))),
                    };
                    if rest.len() != gate.arity() + 1 {
                        return Err(err(format!("{} expects {} site(s) and a duration", keyword, gate.arity())));
                    }
                    let targets = rest[..gate.arity()].iter().map(|t| site(t)).collect::<Result<Vec<_>>>()?;
                    let duration = number(rest[gate.arity()])?;
                    let spec = GateSpec::new(gate, targets, duration).map_err(|e| err(e.to_string()))?;
                    c.push(spec).map_err(|e| err(e.to_string()))?;
                }
            }
        }
        circuit.ok_or(Error::Parse { line: 0, message: "empty circuit text".into() })
    }
}
