//! Symbolic engine: the protocol state as a point on the 4×d torus of basis states.
//!
//! Row interpretation is fixed:
//!
//! | row | state        |
//! |-----|--------------|
//! | 0   | `|pos⟩`      |
//! | 1   | `|ξ_pos⟩`    |
//! | 2   | `|−pos⟩`     |
//! | 3   | `|ξ_{−pos}⟩` |
//!
//! `F` hops one row down (wrapping), `X` shifts along rows 0 and 2, `Z` along
//! rows 1 and 3, with negative orientation on the negated rows. On the other
//! rows each of them only contributes a global phase, which this engine drops.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QssError, Result};
use crate::qudit::{Basis, QuditState};

/// One player's secret triple: the state is acted on by `X^a Z^b F^c`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlayerMove {
    pub a: usize,
    pub b: usize,
    pub c: u8,
}

impl PlayerMove {
    pub fn new(a: usize, b: usize, c: u8, d: usize) -> Result<Self> {
        let mv = Self { a, b, c };
        mv.validate(d)?;
        Ok(mv)
    }

    pub fn identity() -> Self {
        Self { a: 0, b: 0, c: 0 }
    }

    /// Uniform `a, b ∈ Z_d` and `c ∈ {0, 1}`.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        Self {
            a: rng.random_range(0..d),
            b: rng.random_range(0..d),
            c: u8::from(rng.random_bool(0.5)),
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.a >= d {
            return Err(QssError::LabelOutOfRange { label: self.a, dim: d });
        }
        if self.b >= d {
            return Err(QssError::LabelOutOfRange { label: self.b, dim: d });
        }
        if self.c > 1 {
            return Err(QssError::LabelOutOfRange {
                label: self.c as usize,
                dim: 2,
            });
        }
        Ok(())
    }
}

/// Position of the protocol state on the 4×d torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub row: u8,
    pub pos: usize,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { row: 0, pos: 0 };

    pub fn basis(&self) -> Basis {
        if self.row.is_multiple_of(2) {
            Basis::Computational
        } else {
            Basis::Fourier
        }
    }

    /// +1 on rows 0 and 1, −1 on rows 2 and 3.
    pub fn orientation(&self) -> i8 {
        if self.row < 2 {
            1
        } else {
            -1
        }
    }

    /// The label `k` of the named state `|k⟩` or `|ξ_k⟩`.
    pub fn label(&self, d: usize) -> usize {
        signed_mod(self.orientation(), self.pos, d)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(row {}, pos {})", self.row, self.pos)
    }
}

fn signed_mod(sign: i8, value: usize, d: usize) -> usize {
    let v = value % d;
    if sign >= 0 {
        v
    } else {
        (d - v) % d
    }
}

/// Applies one player's move: F-hop first, then Z, then X.
pub fn step(point: LatticePoint, mv: &PlayerMove, d: usize) -> LatticePoint {
    let row = (point.row + mv.c) % 4;
    let shift = match row {
        0 => mv.a % d,
        1 => mv.b % d,
        2 => d - mv.a % d,
        _ => d - mv.b % d,
    };
    LatticePoint {
        row,
        pos: (point.pos + shift) % d,
    }
}

/// The state named by a lattice point, exact up to global phase.
pub fn realize(point: LatticePoint, d: usize) -> Result<QuditState> {
    let label = point.label(d);
    match point.basis() {
        Basis::Computational => QuditState::basis_state(d, label),
        Basis::Fourier => QuditState::fourier_basis_state(d, label),
    }
}

/// Folds [`step`] over the moves of `R_0 … R_N`, starting from `|0⟩`.
pub fn walk(moves: &[PlayerMove], d: usize) -> LatticePoint {
    moves
        .iter()
        .fold(LatticePoint::ORIGIN, |p, mv| step(p, mv, d))
}

/// Every intermediate point: entry `i` is the point after player `i` acted.
pub fn trace(moves: &[PlayerMove], d: usize) -> Vec<LatticePoint> {
    moves
        .iter()
        .scan(LatticePoint::ORIGIN, |p, mv| {
            *p = step(*p, mv, d);
            Some(*p)
        })
        .collect()
}

pub fn parity_is_even(c_list: &[u8]) -> bool {
    c_list.iter().map(|c| u32::from(*c)).sum::<u32>() % 2 == 0
}

/// Sifting rule: a round is valid iff the announced `c` bits sum to an even number.
pub fn is_valid(moves: &[PlayerMove]) -> bool {
    moves.iter().map(|m| u32::from(m.c)).sum::<u32>() % 2 == 0
}

/// The deterministic computational outcome of a valid round.
pub fn predict_outcome(moves: &[PlayerMove], d: usize) -> Option<usize> {
    let end = walk(moves, d);
    (end.basis() == Basis::Computational).then(|| end.label(d))
}

/// Which of a player's secrets enters the correlation sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    /// Orientation of the row the player acted on: +1 on rows 0, 1 and −1 on rows 2, 3.
    pub sign: i8,
    pub source: Source,
}

impl LedgerEntry {
    fn value(&self, mv: &PlayerMove) -> usize {
        match self.source {
            Source::A => mv.a,
            Source::B => mv.b,
        }
    }
}

/// Per-player signed contributions to the final lattice position of a valid round.
///
/// `Σ sign_i·v_i` is the walker's final `pos`. The measured label is `pos`
/// when the walk ends on row 0 and `−pos` on row 2; `orientation` records
/// which, so that `orientation · Σ sign_i·v_i ≡ m (mod d)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContributionLedger {
    pub entries: Vec<LedgerEntry>,
    pub orientation: i8,
}

impl ContributionLedger {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Player `i`'s key symbol: `orientation · sign_i · v_i mod d`.
    pub fn key_symbol(&self, player: usize, mv: &PlayerMove, d: usize) -> usize {
        let entry = &self.entries[player];
        signed_mod(entry.sign * self.orientation, entry.value(mv), d)
    }

    /// Sum of key symbols over players `range`; `0..len` gives the predicted outcome.
    pub fn partial_sum(
        &self,
        range: std::ops::Range<usize>,
        moves: &[PlayerMove],
        d: usize,
    ) -> usize {
        range.fold(0, |acc, i| (acc + self.key_symbol(i, &moves[i], d)) % d)
    }

    /// Partial sum of the entries whose source is `source`, in walker orientation.
    /// With `Source::A` over a run of computational-row players this is the
    /// familiar `A_{r,s}` block (with its row sign applied).
    pub fn block_sum(
        &self,
        source: Source,
        range: std::ops::Range<usize>,
        moves: &[PlayerMove],
        d: usize,
    ) -> usize {
        range
            .filter(|i| self.entries[*i].source == source)
            .fold(0, |acc, i| {
                let e = &self.entries[i];
                (acc + signed_mod(e.sign, e.value(&moves[i]), d)) % d
            })
    }
}

/// Derives each player's (sign, source) from the announced `c` bits alone.
pub fn build_ledger(c_list: &[u8]) -> Result<ContributionLedger> {
    if !parity_is_even(c_list) {
        return Err(QssError::InvalidRound(0));
    }
    let mut row = 0u8;
    let entries = c_list
        .iter()
        .map(|c| {
            row = (row + c) % 4;
            LedgerEntry {
                sign: if row < 2 { 1 } else { -1 },
                source: if row.is_multiple_of(2) { Source::A } else { Source::B },
            }
        })
        .collect();
    Ok(ContributionLedger {
        entries,
        orientation: if row == 0 { 1 } else { -1 },
    })
}
