//! Simulation of sequential single-qudit quantum secret sharing.
//!
//! `N + 1` players pass one d-level system down a chain, each applying a
//! secret `X^a Z^b F^c`. The last player measures in the computational
//! basis; rounds whose announced `c` bits have even parity carry a perfect
//! linear correlation between the measured value and the players' secrets.
//!
//! Two independent engines model a round:
//!
//! * [`qudit`]: exact complex state vectors, including attacker ancillas.
//! * [`lattice`]: a symbolic walker on the 4×d torus of basis states, which
//!   predicts valid-round outcomes and arranges each player's key symbol.
//!
//! [`protocol`] runs rounds end to end, [`adversary`] plugs attacks into the
//! chain, and [`harness`] aggregates seeded Monte Carlo experiments.

pub mod adversary;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod protocol;
pub mod qudit;
pub mod rng;
pub mod selftest;

pub use adversary::{AttackDescriptor, AttackKind, BasisPolicy, LinkAction};
pub use error::{QssError, Result};
pub use harness::{
    attack_sweep, chi_square_uniformity, execute, run_experiment, ExperimentReport, Execution,
    Rate,
};
pub use lattice::{
    build_ledger, is_valid, predict_outcome, realize, step, walk, ContributionLedger,
    LatticePoint, PlayerMove, Source,
};
pub use protocol::{
    assemble_keys, run_round, share_secret, sift, verify_subsequence, CheckSize, KeyString,
    ProtocolConfig, RoundRecord, SharedKeys,
};
pub use qudit::{Basis, JointState, MeasurementOutcome, Op, QuditState, C64};
