//! Ideal gate matrices and the gate-identity constructions used by the
//! compiled solver.
//!
//! Exchange gates follow `exp(−i·g·t·(σ⁺σ⁻ + σ⁻σ⁺))`: √iSWAP at `g·t = π/4`
//! and iSWAP at `g·t = π/2`, which is where their `−i` factors come from.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::circuit::{Circuit, Gate, GateSpec, GateTiming};
use crate::error::{Error, Result};
use crate::linalg::{c64, real, CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum TwoQubitKind {
    Cz,
    SqrtIswap,
    Iswap,
}

impl TwoQubitKind {
    pub fn name(self) -> &'static str {
        match self {
            TwoQubitKind::Cz => "CZ",
            TwoQubitKind::SqrtIswap => "SQRT_ISWAP",
            TwoQubitKind::Iswap => "ISWAP",
        }
    }
}

/// `R_axis(θ) = exp(−iθσ_axis/2)`.
pub fn rotation_matrix(axis: Axis, angle: f64) -> CMatrix {
    let (s, c) = (angle / 2.0).sin_cos();
    let rows = match axis {
        Axis::X => [real(c), c64(0.0, -s), c64(0.0, -s), real(c)],
        Axis::Y => [real(c), real(-s), real(s), real(c)],
        Axis::Z => [c64(c, -s), real(0.0), real(0.0), c64(c, s)],
    };
    CMatrix::from_row_slice(2, 2, &rows)
}

pub fn hadamard() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[real(h), real(h), real(h), real(-h)])
}

pub fn two_qubit_matrix(kind: TwoQubitKind) -> CMatrix {
    let o = real(0.0);
    let l = real(1.0);
    match kind {
        TwoQubitKind::Cz => {
            CMatrix::from_diagonal(&CVector::from_vec(vec![l, l, l, real(-1.0)]))
        }
        TwoQubitKind::SqrtIswap => {
            let h = real(FRAC_1_SQRT_2);
            let m = c64(0.0, -FRAC_1_SQRT_2);
            CMatrix::from_row_slice(4, 4, &[l, o, o, o, o, h, m, o, o, m, h, o, o, o, o, l])
        }
        TwoQubitKind::Iswap => {
            let m = c64(0.0, -1.0);
            CMatrix::from_row_slice(4, 4, &[l, o, o, o, o, o, m, o, o, m, o, o, o, o, o, l])
        }
    }
}

fn require_neighbours(a: usize, b: usize) -> Result<()> {
    if a.abs_diff(b) != 1 {
        return Err(Error::Connectivity(a, b));
    }
    Ok(())
}

/// √iSWAP(a,b) · CZ(control,a) · √iSWAP(a,b): swaps `a` and `b` with a
/// factor `−i` when the control reads |0⟩ and applies `Z` on `a` otherwise.
pub fn controlled_iswap_combo(
    base: &Circuit,
    control: usize,
    a: usize,
    b: usize,
    timing: &dyn GateTiming,
) -> Result<Circuit> {
    require_neighbours(control, a)?;
    require_neighbours(a, b)?;
    let mut c = base.empty_like();
    c.push(GateSpec::timed(Gate::SqrtIswap, vec![a, b], timing)?)?;
    c.push(GateSpec::timed(Gate::Cz, vec![control, a], timing)?)?;
    c.push(GateSpec::timed(Gate::SqrtIswap, vec![a, b], timing)?)?;
    Ok(c)
}

/// Controlled-R_Y(θ) from two CZs: `R_Y(θ/2)·CZ·R_Y(−θ/2)·CZ` on the target,
/// using `Z·R_Y(α)·Z = R_Y(−α)`. Exact, no global phase.
pub fn controlled_ry_decomposition(
    base: &Circuit,
    theta: f64,
    control: usize,
    target: usize,
    timing: &dyn GateTiming,
) -> Result<Circuit> {
    require_neighbours(control, target)?;
    let mut c = base.empty_like();
    c.push(GateSpec::timed(Gate::Cz, vec![control, target], timing)?)?;
    c.push(GateSpec::timed(Gate::Ry(-theta / 2.0), vec![target], timing)?)?;
    c.push(GateSpec::timed(Gate::Cz, vec![control, target], timing)?)?;
    c.push(GateSpec::timed(Gate::Ry(theta / 2.0), vec![target], timing)?)?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::NominalTiming;
    use crate::linalg::{expm_general, kron, max_abs_diff, unitarity_deviation, C64};
    use crate::qsim::SubsystemLayout;
    use std::f64::consts::PI;

    fn apply(m: &CMatrix, v: &[C64]) -> Vec<C64> {
        (m * CVector::from_vec(v.to_vec())).iter().copied().collect()
    }

    fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn ry_examples() {
        let v = apply(&rotation_matrix(Axis::Y, PI), &[real(1.0), real(0.0)]);
        assert!(close(&v, &[real(0.0), real(1.0)], 1e-15));
        let v = apply(&rotation_matrix(Axis::Y, PI / 3.0), &[real(1.0), real(0.0)]);
        assert!(close(&v, &[real(3f64.sqrt() / 2.0), real(0.5)], 1e-15));
        let id = rotation_matrix(Axis::Z, 0.7) * rotation_matrix(Axis::Z, -0.7);
        assert!(max_abs_diff(&id, &CMatrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn all_generated_matrices_unitary() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for k in 0..16 {
                let u = rotation_matrix(axis, -3.0 + 0.41 * k as f64);
                assert!(unitarity_deviation(&u) < 1e-10);
            }
        }
        for kind in [TwoQubitKind::Cz, TwoQubitKind::SqrtIswap, TwoQubitKind::Iswap] {
            assert!(unitarity_deviation(&two_qubit_matrix(kind)) < 1e-10);
        }
        assert!(unitarity_deviation(&hadamard()) < 1e-10);
    }

    #[test]
    fn exchange_gates_match_coupling_exponential() {
        // g(σ⁺σ⁻ + σ⁻σ⁺) in the two-qubit basis with g = 1.
        let mut hc = CMatrix::zeros(4, 4);
        hc[(1, 2)] = real(1.0);
        hc[(2, 1)] = real(1.0);
        let sqrt = expm_general(&(&hc * c64(0.0, -PI / 4.0)));
        let full = expm_general(&(&hc * c64(0.0, -PI / 2.0)));
        assert!(max_abs_diff(&sqrt, &two_qubit_matrix(TwoQubitKind::SqrtIswap)) < 1e-13);
        assert!(max_abs_diff(&full, &two_qubit_matrix(TwoQubitKind::Iswap)) < 1e-13);

        // √iSWAP|01⟩ = (|01⟩ − i|10⟩)/√2
        let v = apply(&sqrt, &[real(0.0), real(1.0), real(0.0), real(0.0)]);
        let h = FRAC_1_SQRT_2;
        assert!(close(&v, &[real(0.0), real(h), c64(0.0, -h), real(0.0)], 1e-13));
    }

    #[test]
    fn exchange_composition_and_cz_spectrum() {
        let s = two_qubit_matrix(TwoQubitKind::SqrtIswap);
        assert!(max_abs_diff(&(&s * &s), &two_qubit_matrix(TwoQubitKind::Iswap)) < 1e-15);
        let v = apply(&two_qubit_matrix(TwoQubitKind::Iswap), &[real(0.0), real(1.0), real(0.0), real(0.0)]);
        assert!(close(&v, &[real(0.0), real(0.0), c64(0.0, -1.0), real(0.0)], 1e-15));
        let (mut ev, _) = crate::linalg::eigh(&two_qubit_matrix(TwoQubitKind::Cz));
        ev.sort_by(f64::total_cmp);
        assert_eq!(ev, vec![-1.0, 1.0, 1.0, 1.0]);
    }

    fn combo_unitary() -> CMatrix {
        let base = Circuit::new(SubsystemLayout::qubits(3));
        let c = controlled_iswap_combo(&base, 0, 1, 2, &NominalTiming).unwrap();
        c.unitary().unwrap()
    }

    #[test]
    fn controlled_iswap_examples() {
        let u = combo_unitary();
        // |0⟩_c|01⟩ → −i|0⟩_c|10⟩
        assert!((u[(2, 1)] - c64(0.0, -1.0)).norm() < 1e-14);
        // |1⟩_c|01⟩ → phase·|1⟩_c|01⟩; brute-force product of the three 8×8 factors
        let cz = two_qubit_matrix(TwoQubitKind::Cz);
        let s = two_qubit_matrix(TwoQubitKind::SqrtIswap);
        let i2 = CMatrix::identity(2, 2);
        let oracle = kron(&i2, &s) * kron(&cz, &i2) * kron(&i2, &s);
        assert!(max_abs_diff(&u, &oracle) < 1e-14);
        assert!(oracle[(6, 5)].norm() < 1e-15);
        assert!((oracle[(5, 5)] - real(1.0)).norm() < 1e-14);
        // |0⟩_c|00⟩ unchanged
        assert!((u[(0, 0)] - real(1.0)).norm() < 1e-14);
    }

    #[test]
    fn controlled_iswap_rejects_non_neighbours() {
        let base = Circuit::new(SubsystemLayout::qubits(4));
        assert!(matches!(
            controlled_iswap_combo(&base, 0, 2, 3, &NominalTiming),
            Err(Error::Connectivity(0, 2))
        ));
    }

    fn controlled_ry(theta: f64) -> CMatrix {
        let mut m = CMatrix::identity(4, 4);
        let r = rotation_matrix(Axis::Y, theta);
        for i in 0..2 {
            for j in 0..2 {
                m[(2 + i, 2 + j)] = r[(i, j)];
            }
        }
        m
    }

    #[test]
    fn controlled_ry_matches_exact_matrix() {
        let base = Circuit::new(SubsystemLayout::qubits(2));
        for theta in [0.0, 2.0 * PI / 3.0, 1.234, -2.5] {
            let c = controlled_ry_decomposition(&base, theta, 0, 1, &NominalTiming).unwrap();
            assert!(c.gates().iter().all(|g| matches!(g.gate, Gate::Cz | Gate::H | Gate::Ry(_))));
            let u = c.unitary().unwrap();
            assert!(crate::linalg::phase_invariant_distance(&u, &controlled_ry(theta)) < 1e-12);
        }
        let c = controlled_ry_decomposition(&base, 2.0 * PI / 3.0, 0, 1, &NominalTiming).unwrap();
        let v = apply(&c.unitary().unwrap(), &[real(0.0), real(0.0), real(1.0), real(0.0)]);
        let (s, co) = (PI / 3.0).sin_cos();
        assert!(close(&v, &[real(0.0), real(0.0), real(co), real(s)], 1e-14));
        let base4 = Circuit::new(SubsystemLayout::qubits(4));
        assert!(controlled_ry_decomposition(&base4, 1.0, 1, 3, &NominalTiming).is_err());
    }

    #[test]
    fn controlled_ry_inverse_pair_is_identity() {
        let base = Circuit::new(SubsystemLayout::qubits(2));
        let mut c = controlled_ry_decomposition(&base, 0.9, 0, 1, &NominalTiming).unwrap();
        c.append(&controlled_ry_decomposition(&base, -0.9, 0, 1, &NominalTiming).unwrap()).unwrap();
        let u = c.unitary().unwrap();
        assert!(crate::linalg::phase_invariant_distance(&u, &CMatrix::identity(4, 4)) < 1e-12);
    }
}
