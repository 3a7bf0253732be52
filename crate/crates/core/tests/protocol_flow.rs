use proptest::prelude::*;
use qss_core::harness::{execute, Execution};
use qss_core::lattice::Source;
use qss_core::protocol::{assemble_keys, run_round, share_secret_withholding, sift};
use qss_core::{
    build_ledger, chi_square_uniformity, AttackDescriptor, BasisPolicy, LinkAction, PlayerMove,
    ProtocolConfig,
};

fn forced(d: usize, moves: Vec<PlayerMove>) -> ProtocolConfig {
    let mut c = ProtocolConfig::new(d, moves.len(), 1, 0);
    c.forced_moves = Some(moves);
    c
}

#[test]
fn six_player_two_round_example() {
    let d = 7;
    let honest = [LinkAction::Honest; 5];
    let hops = |f: [usize; 2]| -> Vec<PlayerMove> {
        (0..6)
            .map(|i| PlayerMove {
                a: (2 * i + 1) % d,
                b: (3 * i + 2) % d,
                c: u8::from(f.contains(&i)),
            })
            .collect()
    };
    let r1 = run_round(&forced(d, hops([2, 5])), 0, &honest).unwrap();
    let r2 = run_round(&forced(d, hops([1, 4])), 1, &honest).unwrap();
    assert!(r1.valid && r2.valid);

    use Source::*;
    let sources = |c: &[u8]| -> Vec<Source> {
        build_ledger(c).unwrap().entries.iter().map(|e| e.source).collect()
    };
    assert_eq!(sources(&r1.announced_c), vec![A, A, B, B, B, A]);
    assert_eq!(sources(&r2.announced_c), vec![A, B, B, B, A, A]);

    // a0 + a1 + b2 + b3 + b4 − a5 ≡ ±m
    let m = &r1.moves;
    let rel = (m[0].a + m[1].a + m[2].b + m[3].b + m[4].b + d - m[5].a) % d;
    assert_eq!((rel + r1.outcome) % d, 0);
    let m = &r2.moves;
    let rel = (m[0].a + m[1].b + m[2].b + m[3].b + 2 * d - m[4].a - m[5].a) % d;
    assert_eq!((rel + r2.outcome) % d, 0);

    let keys = assemble_keys(&[&r1, &r2], d).unwrap();
    assert_eq!(keys.len(), 2);
    assert!(keys.zero_sum_holds(0) && keys.zero_sum_holds(1));
    // K_1 = (a_1, b'_1) up to the global sign
    assert_eq!(keys.keys[1].symbols, vec![(d - r1.moves[1].a) % d, (d - r2.moves[1].b) % d]);
}

#[test]
fn honest_invalid_rounds_are_uniform() {
    let run = execute(&ProtocolConfig::new(5, 3, 6000, 17), Execution::Parallel).unwrap();
    let chi = chi_square_uniformity(&run.report.invalid_outcomes.histogram, 0.001).unwrap();
    assert!(chi.pass, "{chi:?}");
}

#[test]
fn keys_survive_verification_with_zero_sum() {
    let run = execute(&ProtocolConfig::new(4, 5, 3000, 2), Execution::Parallel).unwrap();
    let r = &run.report;
    assert_eq!(r.verification.errors, 0);
    assert!(!r.verification.detected);
    assert_eq!(r.key_yield.after_verification as usize, run.keys.len());
    assert_eq!(r.key_yield.sifted - r.verification.opened, r.key_yield.after_verification);
    assert!((0..run.keys.len()).all(|p| run.keys.zero_sum_holds(p)));
}

#[test]
fn proper_subsets_learn_nothing() {
    // withholding two keys still gives 1/d per dit
    let d = 3;
    let run = execute(&ProtocolConfig::new(d, 5, 4000, 44), Execution::Parallel).unwrap();
    let n = run.keys.len();
    let message: Vec<usize> = (0..n).map(|i| i % d).collect();
    let out = share_secret_withholding(&message, &run.keys, 0, 4, &[1, 2]).unwrap();
    let hits = out.iter().zip(&message).filter(|(a, b)| a == b).count() as f64;
    let p = 1.0 / d as f64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    assert!((hits / n as f64 - p).abs() <= 3.0 * sigma);
}

#[test]
fn report_is_deterministic_and_mode_independent() {
    let config = ProtocolConfig::new(6, 4, 3000, 123)
        .with_attack(AttackDescriptor::intercept_resend(vec![0, 2], BasisPolicy::AlwaysFourier));
    let a = execute(&config, Execution::Parallel).unwrap().report;
    let b = execute(&config, Execution::Parallel).unwrap().report;
    let c = execute(&config, Execution::Serial).unwrap().report;
    assert_eq!(a.canonical_json(), b.canonical_json());
    assert_eq!(a.canonical_json(), c.canonical_json());
    assert!(!a.canonical_json().contains("wall_time_ms"));
    assert!(a.to_json().contains("wall_time_ms"));
}

#[test]
fn efficiency_concentrates() {
    let rounds = 8000u64;
    let run = execute(&ProtocolConfig::new(8, 7, rounds, 8), Execution::Parallel).unwrap();
    let eff = run.report.totals.efficiency.rate.unwrap();
    assert!((eff - 0.5).abs() <= 3.0 * (0.25 / rounds as f64).sqrt());
    assert_eq!(sift(&run.records).valid.len() as u64, run.report.totals.valid);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn config_json_roundtrip(
        d in 2usize..20, n in 2usize..8, rounds in 1u64..10_000, seed: u64,
        frac in 0.0f64..0.99, kind in 0u8..3,
    ) {
        let attack = match kind {
            0 => AttackDescriptor::none(),
            1 => AttackDescriptor::intercept_resend(vec![0], BasisPolicy::AlwaysComputational),
            _ => AttackDescriptor::cnot_ancilla(vec![1]),
        };
        let mut c = ProtocolConfig::new(d, n, rounds, seed).with_attack(attack);
        c.check_fraction = frac;
        let text = serde_json::to_string(&c).unwrap();
        prop_assert_eq!(ProtocolConfig::from_json_str(&text).unwrap(), c);
    }
}
