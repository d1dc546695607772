use std::f64::consts::FRAC_1_SQRT_2;

use hhl_core::circuit::{Circuit, Gate, GateSpec, NominalTiming};
use hhl_core::gates::{controlled_iswap_combo, controlled_ry_decomposition, hadamard, rotation_matrix, two_qubit_matrix, Axis, TwoQubitKind};
use hhl_core::linalg::{c64, phase_invariant_distance, unitarity_deviation, CMatrix, CVector};
use hhl_core::qsim::SubsystemLayout;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn qubits(n: usize) -> Circuit {
    Circuit::new(SubsystemLayout::qubits(n))
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> CVector {
    let v = CVector::from_fn(n, |_, _| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let norm = v.norm();
    v / c64(norm, 0.0)
}

/// |ψ_ab⟩ with the control (site 0) fixed to `control`.
fn with_control(control: usize, ab: &CVector) -> CVector {
    let mut v = CVector::zeros(8);
    for k in 0..4 {
        v[control * 4 + k] = ab[k];
    }
    v
}

#[test]
fn combo_swaps_with_minus_i_on_control_zero() {
    let combo = controlled_iswap_combo(&qubits(3), 0, 1, 2, &NominalTiming).unwrap().unitary().unwrap();
    // −i on the exchanged single-excitation states, identity elsewhere
    let i = c64(0.0, 1.0);
    let mut target = CMatrix::identity(4, 4);
    target[(1, 1)] = c64(0.0, 0.0);
    target[(2, 2)] = c64(0.0, 0.0);
    target[(1, 2)] = -i;
    target[(2, 1)] = -i;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let ab = random_vector(4, &mut rng);
        let out = &combo * with_control(0, &ab);
        let expected = with_control(0, &(&target * &ab));
        let overlap = expected.dotc(&out).norm();
        assert!((overlap - 1.0).abs() < 1e-9, "{overlap}");
    }
}

#[test]
fn combo_keeps_populations_on_control_one() {
    let combo = controlled_iswap_combo(&qubits(3), 0, 1, 2, &NominalTiming).unwrap().unitary().unwrap();
    let (s01, s10) = (0b101, 0b110);
    assert!(combo[(s10, s01)].norm_sqr() <= 1e-18);
    assert!(combo[(s01, s10)].norm_sqr() <= 1e-18);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let ab = random_vector(4, &mut rng);
        let input = with_control(1, &ab);
        let out = &combo * &input;
        // weight moved from |01⟩ into |10⟩ and back
        let moved = (combo[(s10, s01)] * input[s01]).norm_sqr() + (combo[(s01, s10)] * input[s10]).norm_sqr();
        assert!(moved <= 1e-18);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn combo_needs_a_chain() {
    assert!(controlled_iswap_combo(&qubits(4), 0, 1, 3, &NominalTiming).is_err());
}

fn gate_strategy() -> impl Strategy<Value = (u8, f64)> {
    (0u8..8, -7.0f64..7.0)
}

fn build(kind: u8, angle: f64) -> Gate {
    match kind {
        0 => Gate::Rx(angle),
        1 => Gate::Ry(angle),
        2 => Gate::Rz(angle),
        3 => Gate::H,
        4 => Gate::Cz,
        5 => Gate::SqrtIswap,
        6 => Gate::Iswap,
        _ => Gate::VirtualZ(angle),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_matrices_are_unitary(angle in -20.0f64..20.0) {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            prop_assert!(unitarity_deviation(&rotation_matrix(axis, angle)) < 1e-10);
        }
        prop_assert!(unitarity_deviation(&hadamard()) < 1e-10);
        for kind in [TwoQubitKind::Cz, TwoQubitKind::SqrtIswap, TwoQubitKind::Iswap] {
            prop_assert!(unitarity_deviation(&two_qubit_matrix(kind)) < 1e-10);
        }
        let cry = controlled_ry_decomposition(&qubits(2), angle, 0, 1, &NominalTiming).unwrap();
        prop_assert!(unitarity_deviation(&cry.unitary().unwrap()) < 1e-10);
    }

    #[test]
    fn controlled_ry_cancels_its_negative(theta in -7.0f64..7.0) {
        let mut c = controlled_ry_decomposition(&qubits(2), theta, 0, 1, &NominalTiming).unwrap();
        c.append(&controlled_ry_decomposition(&qubits(2), -theta, 0, 1, &NominalTiming).unwrap()).unwrap();
        let d = phase_invariant_distance(&c.unitary().unwrap(), &CMatrix::identity(4, 4));
        prop_assert!(d < 1e-12);
    }

    #[test]
    fn controlled_ry_acts_only_on_control_one(theta in -7.0f64..7.0) {
        let u = controlled_ry_decomposition(&qubits(2), theta, 0, 1, &NominalTiming).unwrap().unitary().unwrap();
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let r = |x: f64| c64(x, 0.0);
        let expected = CMatrix::from_row_slice(4, 4, &[
            r(1.0), r(0.0), r(0.0), r(0.0),
            r(0.0), r(1.0), r(0.0), r(0.0),
            r(0.0), r(0.0), r(c), r(-s),
            r(0.0), r(0.0), r(s), r(c),
        ]);
        prop_assert!((u - expected).camax() < 1e-12);
    }

    #[test]
    fn reversed_circuit_is_the_adjoint(gates in prop::collection::vec((gate_strategy(), 0usize..3), 0..16)) {
        let mut c = qubits(4);
        for ((kind, angle), site) in gates {
            let g = build(kind, angle);
            let targets = if g.arity() == 2 { vec![site, site + 1] } else { vec![site] };
            c.push(GateSpec::timed(g, targets, &NominalTiming).unwrap()).unwrap();
        }
        let u = c.unitary().unwrap();
        let v = c.inverse().unitary().unwrap();
        prop_assert!((v - u.adjoint()).camax() < 1e-12);
    }
}

#[test]
fn hadamard_is_z_then_ry_up_to_phase() {
    let h = CMatrix::from_row_slice(2, 2, &[c64(FRAC_1_SQRT_2, 0.0), c64(FRAC_1_SQRT_2, 0.0), c64(FRAC_1_SQRT_2, 0.0), c64(-FRAC_1_SQRT_2, 0.0)]);
    assert!((hadamard() - &h).camax() < 1e-15);
    let composed = rotation_matrix(Axis::Y, std::f64::consts::FRAC_PI_2) * rotation_matrix(Axis::Z, std::f64::consts::PI);
    assert!(phase_invariant_distance(&composed, &h) < 1e-14);
}
