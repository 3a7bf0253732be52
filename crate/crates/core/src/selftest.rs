//! Quick algebra and engine-equivalence checks run by `qss selftest`.

use rand::Rng;
use serde::Serialize;

use crate::harness::{execute, Execution};
use crate::lattice::{realize, walk, PlayerMove};
use crate::protocol::ProtocolConfig;
use crate::qudit::{omega_pow, Op, QuditState, C64};
use crate::rng::{substream, Purpose};

pub const ALGEBRA_DIMS: [usize; 9] = [2, 3, 4, 5, 6, 8, 12, 16, 64];
const ALGEBRA_TOL: f64 = 1e-12;
const ENGINE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest amplitude deviation of each operator identity over all basis states of `d`.
pub fn algebra_deviations(d: usize) -> [(&'static str, f64); 5] {
    let mut worst = [0.0f64; 5];
    let omega = omega_pow(d, 1);
    for k in 0..d {
        let ket = QuditState::basis_state(d, k).expect("valid label");
        let f4 = ket.apply_f().apply_f().apply_f().apply_f();
        worst[0] = worst[0].max(max_diff(f4.amplitudes(), ket.amplitudes()));

        let f2 = ket.apply_f().apply_f();
        let neg = QuditState::basis_state(d, (d - k) % d).expect("valid label");
        worst[1] = worst[1].max(max_diff(f2.amplitudes(), neg.amplitudes()));

        let zx = ket.apply_x_pow(1).apply_z_pow(1);
        let xz: Vec<C64> = ket
            .apply_z_pow(1)
            .apply_x_pow(1)
            .amplitudes()
            .iter()
            .map(|a| a * omega)
            .collect();
        worst[2] = worst[2].max(max_diff(zx.amplitudes(), &xz));

        let fxf = ket.apply(Op::FInv).apply_x_pow(1).apply_f();
        worst[3] = worst[3].max(max_diff(fxf.amplitudes(), ket.apply_z_pow(1).amplitudes()));

        for j in 0..d {
            let xi = QuditState::fourier_basis_state(d, j).expect("valid label");
            let overlap = ket.inner(&xi).expect("same dim").norm_sqr();
            worst[4] = worst[4].max((overlap - 1.0 / d as f64).abs());
        }
    }
    [
        ("F^4 = I", worst[0]),
        ("F^2 = index negation", worst[1]),
        ("ZX = wXZ", worst[2]),
        ("F X F^-1 = Z", worst[3]),
        ("|<k|xi_j>|^2 = 1/d", worst[4]),
    ]
}

/// Compares the walker against the state-vector engine on `cases` random move lists.
/// Returns the number of disagreements.
pub fn engine_mismatches(cases: u64, seed: u64) -> u64 {
    let mut rng = substream(seed, Purpose::Auxiliary(1), 0);
    let mut bad = 0;
    for _ in 0..cases {
        let d = rng.random_range(2..=12);
        let n = rng.random_range(2..=10);
        let moves: Vec<PlayerMove> = (0..n).map(|_| PlayerMove::random(d, &mut rng)).collect();
        let numeric = moves.iter().fold(
            QuditState::basis_state(d, 0).expect("d >= 2"),
            |s, m| {
                let s = if m.c == 1 { s.apply_f() } else { s };
                s.apply_z_pow(m.b).apply_x_pow(m.a)
            },
        );
        let symbolic = realize(walk(&moves, d), d).expect("valid point");
        if !numeric.equals_up_to_phase(&symbolic, ENGINE_TOL) {
            bad += 1;
        }
    }
    bad
}

pub fn run() -> Vec<Check> {
    let mut checks = Vec::new();
    for d in ALGEBRA_DIMS {
        for (name, dev) in algebra_deviations(d) {
            checks.push(Check {
                name: format!("{name} (d={d})"),
                passed: dev <= ALGEBRA_TOL,
                detail: format!("max deviation {dev:.3e}"),
            });
        }
    }

    let cases = 2000;
    let bad = engine_mismatches(cases, 1);
    checks.push(Check {
        name: "walker vs state vector".into(),
        passed: bad == 0,
        detail: format!("{bad} of {cases} cases disagree"),
    });

    match execute(&ProtocolConfig::new(5, 5, 2000, 3), Execution::Parallel) {
        Ok(run) => {
            let r = &run.report;
            checks.push(Check {
                name: "honest correlation and zero-sum".into(),
                passed: r.correlation.rate == Some(1.0) && r.key_yield.zero_sum.rate == Some(1.0),
                detail: format!(
                    "match {}/{}, zero-sum {}/{}",
                    r.correlation.count, r.correlation.n, r.key_yield.zero_sum.count, r.key_yield.zero_sum.n
                ),
            });
        }
        Err(e) => checks.push(Check {
            name: "honest correlation and zero-sum".into(),
            passed: false,
            detail: e.to_string(),
        }),
    }
    checks
}
