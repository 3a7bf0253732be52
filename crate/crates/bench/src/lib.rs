//! Fixtures shared by the criterion benches.

use qss_core::{PlayerMove, QuditState};

/// Deterministic move list of `n` players alternating F-hops.
pub fn moves(n: usize, d: usize) -> Vec<PlayerMove> {
    (0..n)
        .map(|i| PlayerMove {
            a: (3 * i + 1) % d,
            b: (5 * i + 2) % d,
            c: (i % 2) as u8,
        })
        .collect()
}

pub fn fourier_state(d: usize) -> QuditState {
    QuditState::fourier_basis_state(d, 1).expect("d >= 2")
}
