use proptest::prelude::*;
use qss_core::lattice::{build_ledger, predict_outcome, realize, step, walk, LatticePoint, PlayerMove};
use qss_core::qudit::{JointState, Op, QuditState, C64};

fn random_state(d: usize, raw: &[(f64, f64)]) -> QuditState {
    let norm: f64 = raw.iter().take(d).map(|(r, i)| r * r + i * i).sum::<f64>().sqrt();
    let amps = raw.iter().take(d).map(|(r, i)| C64::new(r / norm, i / norm)).collect();
    QuditState::from_amplitudes(amps).unwrap()
}

fn arb_state() -> impl Strategy<Value = QuditState> {
    (2usize..=64).prop_flat_map(|d| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d)
            .prop_filter("nonzero", |v| v.iter().any(|(r, i)| r.abs() + i.abs() > 1e-3))
            .prop_map(move |raw| random_state(d, &raw))
    })
}

fn arb_moves() -> impl Strategy<Value = (usize, Vec<PlayerMove>)> {
    (2usize..=12, 2usize..=10).prop_flat_map(|(d, n)| {
        prop::collection::vec((0..d, 0..d, 0u8..=1), n).prop_map(move |v| {
            (d, v.into_iter().map(|(a, b, c)| PlayerMove { a, b, c }).collect())
        })
    })
}

fn vector_final(moves: &[PlayerMove], d: usize) -> QuditState {
    moves.iter().fold(QuditState::basis_state(d, 0).unwrap(), |s, m| {
        let s = if m.c == 1 { s.apply(Op::F) } else { s };
        s.apply_z_pow(m.b).apply_x_pow(m.a)
    })
}

proptest! {
    #[test]
    fn operators_preserve_norm(s in arb_state(), a in 0usize..100, b in 0usize..100) {
        for out in [s.apply_x_pow(a), s.apply_z_pow(b), s.apply_f(), s.apply_f_inv()] {
            prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn f_has_order_four(s in arb_state()) {
        let back = s.apply_f().apply_f().apply_f().apply_f();
        for (x, y) in back.amplitudes().iter().zip(s.amplitudes()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn subsystem_ops_preserve_norm(s in arb_state(), b in 0usize..64) {
        let d = s.dim();
        prop_assume!(d <= 16);
        let j = JointState::embed_with_ancilla(&QuditState::plus(d).unwrap(), &s)
            .unwrap()
            .apply_cnot()
            .unwrap();
        for op in [Op::XPow(b), Op::ZPow(b), Op::F] {
            let out = j.apply_on_subsystem(1, op).unwrap();
            prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn walker_matches_state_vector((d, moves) in arb_moves()) {
        let numeric = vector_final(&moves, d);
        let symbolic = realize(walk(&moves, d), d).unwrap();
        prop_assert!(numeric.equals_up_to_phase(&symbolic, 1e-9));
    }

    #[test]
    fn validity_iff_deterministic_outcome((d, moves) in arb_moves()) {
        let numeric = vector_final(&moves, d);
        let label = numeric.as_basis_label(1e-9);
        match predict_outcome(&moves, d) {
            Some(m) => prop_assert_eq!(label, Some(m)),
            None => {
                prop_assert_eq!(label, None);
                for p in numeric.probabilities() {
                    prop_assert!((p - 1.0 / d as f64).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn ledger_identity((d, moves) in arb_moves()) {
        let c: Vec<u8> = moves.iter().map(|m| m.c).collect();
        if let Some(m) = predict_outcome(&moves, d) {
            let ledger = build_ledger(&c).unwrap();
            let sum = ledger.partial_sum(0..moves.len(), &moves, d);
            prop_assert_eq!((sum + d - m) % d, 0);
        }
    }

    #[test]
    fn four_hops_restore_row(row in 0u8..4, pos in 0usize..9) {
        let p = LatticePoint { row, pos };
        let hop = PlayerMove { a: 0, b: 0, c: 1 };
        let q = (0..4).fold(p, |p, _| step(p, &hop, 9));
        prop_assert_eq!(q, p);
    }
}
