//! Full protocol rounds: move generation, hand-off along the chain,
//! announcement and sifting, key assembly, verification and secret sharing.
//!
//! Every round draws from its own random substreams keyed by
//! `(seed, round_id)`, so a round can be replayed in isolation and rounds
//! may run in any order or concurrently.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{
    attach_cnot_ancilla, coalition_guess, intercept_resend, AncillaRegister, AttackDescriptor,
    AttackKind, LinkAction, RegisterGuess,
};
use crate::error::{QssError, Result};
use crate::lattice::{build_ledger, parity_is_even, predict_outcome, trace, LatticePoint, PlayerMove};
use crate::qudit::{Basis, JointState, Op, QuditState};
use crate::rng::{substream, Purpose};

/// Largest joint state (in amplitudes) a configuration may ask for.
pub const JOINT_AMPLITUDE_CAP: u128 = 1_000_000;

pub const DEFAULT_CHECK_FRACTION: f64 = 0.2;

fn default_check_fraction() -> f64 {
    DEFAULT_CHECK_FRACTION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub d: usize,
    /// Number of players `N + 1`.
    pub n_players: usize,
    pub rounds: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_check_fraction")]
    pub check_fraction: f64,
    /// Detected when the opened error rate exceeds this; 0 means any mismatch.
    #[serde(default)]
    pub detection_threshold: f64,
    /// The player who asks for announcements and drives message sharing.
    #[serde(default)]
    pub controller: usize,
    #[serde(default)]
    pub attack: AttackDescriptor,
    /// Replaces the random moves of every round, for constructed experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced_moves: Option<Vec<PlayerMove>>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            d: 3,
            n_players: 3,
            rounds: 1000,
            seed: 0,
            check_fraction: DEFAULT_CHECK_FRACTION,
            detection_threshold: 0.0,
            controller: 0,
            attack: AttackDescriptor::none(),
            forced_moves: None,
        }
    }
}

impl ProtocolConfig {
    pub fn new(d: usize, n_players: usize, rounds: u64, seed: u64) -> Self {
        Self {
            d,
            n_players,
            rounds,
            seed,
            ..Self::default()
        }
    }

    pub fn with_attack(mut self, attack: AttackDescriptor) -> Self {
        self.attack = attack;
        self
    }

    pub fn links(&self) -> usize {
        self.n_players - 1
    }

    /// Amplitudes in the largest joint state a round will hold.
    pub fn joint_amplitudes(&self) -> u128 {
        (self.d as u128).saturating_pow(1 + self.attack.ancilla_count() as u32)
    }

    /// Checks every field. Cap violations are reported as [`QssError::DimensionCap`].
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(QssError::Config(format!("d must be at least 2, got {}", self.d)));
        }
        if self.n_players < 2 {
            return Err(QssError::Config(format!(
                "need at least 2 players, got {}",
                self.n_players
            )));
        }
        if self.rounds < 1 {
            return Err(QssError::Config("rounds must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.check_fraction) {
            return Err(QssError::Config(format!(
                "check_fraction must be in [0, 1), got {}",
                self.check_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.detection_threshold) {
            return Err(QssError::Config(format!(
                "detection_threshold must be in [0, 1], got {}",
                self.detection_threshold
            )));
        }
        if self.controller >= self.n_players {
            return Err(QssError::Config(format!(
                "controller {} is not a player",
                self.controller
            )));
        }
        if let Some(moves) = &self.forced_moves {
            if moves.len() != self.n_players {
                return Err(QssError::Config(format!(
                    "forced_moves has {} entries for {} players",
                    moves.len(),
                    self.n_players
                )));
            }
            for mv in moves {
                mv.validate(self.d)
                    .map_err(|e| QssError::Config(format!("forced move: {e}")))?;
            }
        }
        self.attack.validate(self.n_players)?;
        let requested = self.joint_amplitudes();
        if requested > JOINT_AMPLITUDE_CAP {
            return Err(QssError::DimensionCap {
                requested,
                cap: JOINT_AMPLITUDE_CAP,
            });
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| QssError::Config(e.to_string()))
    }
}

/// What happened on one link of a round, with ground truth from the honest walk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkAnnotation {
    pub link: usize,
    pub action: LinkAction,
    /// Honest lattice point of the state on this link.
    pub honest_point: LatticePoint,
    /// Basis an intercept-resend attacker measured in.
    pub measured_basis: Option<Basis>,
    pub guess: Option<usize>,
    /// Whether the attack on this link disturbs the carried state.
    pub disturbing: bool,
    /// No earlier link in the round was disturbed.
    pub undisturbed_upstream: bool,
}

impl LinkAnnotation {
    pub fn honest_basis(&self) -> Basis {
        self.honest_point.basis()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackAnnotations {
    pub links: Vec<LinkAnnotation>,
    pub coalition: Vec<RegisterGuess>,
}

impl AttackAnnotations {
    pub fn any_disturbing(&self) -> bool {
        self.links.iter().any(|l| l.disturbing)
    }
}

/// Full audit of one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_id: u64,
    /// Secret moves; only the `c` bits are ever published.
    pub moves: Vec<PlayerMove>,
    pub announced_c: Vec<u8>,
    /// Order in which players announced; audit only.
    pub announcement_order: Vec<usize>,
    pub valid: bool,
    /// `R_N`'s computational-basis measurement. Recorded for invalid rounds too.
    pub outcome: usize,
    pub attack: Option<AttackAnnotations>,
}

impl RoundRecord {
    pub fn parity(&self) -> u8 {
        (self.announced_c.iter().map(|c| u32::from(*c)).sum::<u32>() % 2) as u8
    }

    /// Honest-walk prediction, present for valid rounds.
    pub fn predicted(&self, d: usize) -> Option<usize> {
        predict_outcome(&self.moves, d)
    }

    /// Whether the measured value equals the prediction (valid rounds only).
    pub fn matches(&self, d: usize) -> Option<bool> {
        self.predicted(d).map(|p| p == self.outcome)
    }
}

fn apply_move(state: JointState, mv: &PlayerMove) -> Result<JointState> {
    let carried = state.subsystem_count() - 1;
    let state = if mv.c == 1 {
        state.apply_on_subsystem(carried, Op::F)?
    } else {
        state
    };
    state
        .apply_on_subsystem(carried, Op::ZPow(mv.b))?
        .apply_on_subsystem(carried, Op::XPow(mv.a))
}

/// Runs one round. `interceptors[i]` acts on the qudit between player `i` and `i + 1`.
pub fn run_round(
    config: &ProtocolConfig,
    round_id: u64,
    interceptors: &[LinkAction],
) -> Result<RoundRecord> {
    let d = config.d;
    let n = config.n_players;
    if interceptors.len() != n - 1 {
        return Err(QssError::LengthMismatch {
            expected: n - 1,
            found: interceptors.len(),
        });
    }

    let moves: Vec<PlayerMove> = match &config.forced_moves {
        Some(forced) => forced.clone(),
        None => {
            let mut rng = substream(config.seed, Purpose::Moves, round_id);
            (0..n).map(|_| PlayerMove::random(d, &mut rng)).collect()
        }
    };

    // Quantum phase: nothing is public yet.
    let mut qrng = substream(config.seed, Purpose::Quantum, round_id);
    let honest = trace(&moves, d);
    let mut state: JointState = QuditState::basis_state(d, 0)?.into();
    let mut registers: Vec<AncillaRegister> = Vec::new();
    let mut links = Vec::new();
    let mut disturbed = false;
    for (i, mv) in moves.iter().enumerate() {
        if i > 0 {
            let link = i - 1;
            let honest_point = honest[link];
            let mut note = LinkAnnotation {
                link,
                action: interceptors[link],
                honest_point,
                measured_basis: None,
                guess: None,
                disturbing: false,
                undisturbed_upstream: !disturbed,
            };
            match interceptors[link] {
                LinkAction::Honest => {}
                LinkAction::InterceptResend(policy) => {
                    let (resent, seen) = intercept_resend(&state, policy, &mut qrng)?;
                    state = resent;
                    note.measured_basis = Some(seen.basis);
                    note.guess = Some(seen.guess);
                    note.disturbing = seen.basis != honest_point.basis();
                }
                LinkAction::CnotAncilla { owner } => {
                    let (joint, reg) = attach_cnot_ancilla(&state, owner)?;
                    state = joint;
                    registers.push(reg);
                    note.disturbing = honest_point.basis() == Basis::Computational;
                }
            }
            disturbed |= note.disturbing;
            if interceptors[link] != LinkAction::Honest {
                links.push(note);
            }
        }
        state = apply_move(state, mv)?;
    }
    let carried = state.subsystem_count() - 1;
    let measured = state.measure_subsystem(carried, Basis::Computational, &mut qrng)?;

    // Announcement phase.
    let announced_c: Vec<u8> = moves.iter().map(|m| m.c).collect();
    let mut announcement_order: Vec<usize> = (0..n).collect();
    announcement_order.shuffle(&mut substream(config.seed, Purpose::Announcement, round_id));
    let valid = parity_is_even(&announced_c);

    // Attackers interpret their ancillas only after the announcements.
    let coalition = if registers.is_empty() {
        Vec::new()
    } else {
        let own: Vec<PlayerMove> = registers.iter().map(|r| moves[r.owner]).collect();
        coalition_guess(
            &measured.post_state,
            &mut registers,
            &announced_c,
            &own,
            d,
            &mut qrng,
        )?
    };

    let attack = (config.attack.kind != AttackKind::None)
        .then_some(AttackAnnotations { links, coalition });
    Ok(RoundRecord {
        round_id,
        moves,
        announced_c,
        announcement_order,
        valid,
        outcome: measured.value,
        attack,
    })
}

/// Valid rounds plus the efficiency estimate.
#[derive(Debug, Clone)]
pub struct Sifted<'a> {
    pub valid: Vec<&'a RoundRecord>,
    pub total: usize,
}

impl Sifted<'_> {
    /// Valid fraction; `None` for an empty input.
    pub fn efficiency(&self) -> Option<f64> {
        (self.total > 0).then(|| self.valid.len() as f64 / self.total as f64)
    }
}

/// Keeps the rounds whose announced `c` bits have even parity.
pub fn sift(records: &[RoundRecord]) -> Sifted<'_> {
    Sifted {
        valid: records
            .iter()
            .filter(|r| parity_is_even(&r.announced_c))
            .collect(),
        total: records.len(),
    }
}

/// One player's key. The last player's string already absorbs `−m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyString {
    pub owner: usize,
    pub symbols: Vec<usize>,
}

/// Aligned keys of all players; position `j` came from round `round_ids[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedKeys {
    pub d: usize,
    pub round_ids: Vec<u64>,
    pub keys: Vec<KeyString>,
}

impl SharedKeys {
    pub fn len(&self) -> usize {
        self.round_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.round_ids.is_empty()
    }

    /// Dit-wise sum over all players at `position`.
    pub fn position_sum(&self, position: usize) -> usize {
        self.keys
            .iter()
            .fold(0, |acc, k| (acc + k.symbols[position]) % self.d)
    }

    pub fn zero_sum_holds(&self, position: usize) -> bool {
        self.position_sum(position) == 0
    }

    /// Keys restricted to positions `range`.
    pub fn window(&self, range: std::ops::Range<usize>) -> SharedKeys {
        SharedKeys {
            d: self.d,
            round_ids: self.round_ids[range.clone()].to_vec(),
            keys: self
                .keys
                .iter()
                .map(|k| KeyString {
                    owner: k.owner,
                    symbols: k.symbols[range.clone()].to_vec(),
                })
                .collect(),
        }
    }

    fn without_positions(&self, drop: &[usize]) -> SharedKeys {
        let mut keep = vec![true; self.len()];
        for p in drop {
            keep[*p] = false;
        }
        let pick = |v: &[usize]| -> Vec<usize> {
            v.iter()
                .zip(&keep)
                .filter_map(|(x, k)| k.then_some(*x))
                .collect()
        };
        SharedKeys {
            d: self.d,
            round_ids: self
                .round_ids
                .iter()
                .zip(&keep)
                .filter_map(|(x, k)| k.then_some(*x))
                .collect(),
            keys: self
                .keys
                .iter()
                .map(|k| KeyString {
                    owner: k.owner,
                    symbols: pick(&k.symbols),
                })
                .collect(),
        }
    }
}

/// Arranges each player's key symbol per valid round from the public `c` bits.
pub fn assemble_keys(valid_records: &[&RoundRecord], d: usize) -> Result<SharedKeys> {
    let n = valid_records.first().map_or(0, |r| r.moves.len());
    let mut keys: Vec<KeyString> = (0..n)
        .map(|owner| KeyString {
            owner,
            symbols: Vec::with_capacity(valid_records.len()),
        })
        .collect();
    let mut round_ids = Vec::with_capacity(valid_records.len());
    for record in valid_records {
        if record.moves.len() != n {
            return Err(QssError::LengthMismatch {
                expected: n,
                found: record.moves.len(),
            });
        }
        let ledger =
            build_ledger(&record.announced_c).map_err(|_| QssError::InvalidRound(record.round_id))?;
        for (i, key) in keys.iter_mut().enumerate() {
            let mut symbol = ledger.key_symbol(i, &record.moves[i], d);
            if i == n - 1 {
                symbol = (symbol + d - record.outcome % d) % d;
            }
            key.symbols.push(symbol);
        }
        round_ids.push(record.round_id);
    }
    Ok(SharedKeys { d, round_ids, keys })
}

/// How many valid positions to open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CheckSize {
    Fraction(f64),
    Count(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// Round ids of the publicly opened positions, ascending.
    pub opened: Vec<u64>,
    pub errors: usize,
    /// `None` when nothing was opened.
    pub error_rate: Option<f64>,
    pub detected: bool,
    pub remaining: SharedKeys,
}

/// Publicly opens a uniformly chosen subset of positions, checks the zero-sum
/// identity there and removes them from every key.
pub fn verify_subsequence<R: Rng + ?Sized>(
    keys: &SharedKeys,
    check: CheckSize,
    detection_threshold: f64,
    rng: &mut R,
) -> Result<Verification> {
    let n = keys.len();
    let t = match check {
        CheckSize::Fraction(f) => {
            if !(0.0..1.0).contains(&f) {
                return Err(QssError::Config(format!(
                    "check fraction must be in [0, 1), got {f}"
                )));
            }
            ((n as f64) * f).round() as usize
        }
        CheckSize::Count(t) => {
            if t > n {
                return Err(QssError::LengthMismatch {
                    expected: n,
                    found: t,
                });
            }
            t
        }
    };
    let mut positions = index::sample(rng, n, t).into_vec();
    positions.sort_unstable();
    let errors = positions
        .iter()
        .filter(|p| !keys.zero_sum_holds(**p))
        .count();
    let error_rate = (t > 0).then(|| errors as f64 / t as f64);
    let detected = error_rate.is_some_and(|e| errors > 0 && e > detection_threshold);
    Ok(Verification {
        opened: positions.iter().map(|p| keys.round_ids[*p]).collect(),
        errors,
        error_rate,
        detected,
        remaining: keys.without_positions(&positions),
    })
}

fn check_message(message: &[usize], keys: &[KeyString], d: usize) -> Result<()> {
    for key in keys {
        if key.symbols.len() < message.len() {
            return Err(QssError::LengthMismatch {
                expected: key.symbols.len(),
                found: message.len(),
            });
        }
    }
    if let Some(bad) = message.iter().find(|m| **m >= d) {
        return Err(QssError::LabelOutOfRange { label: *bad, dim: d });
    }
    Ok(())
}

/// `message ⊕ K_sender`, dit-wise mod d.
pub fn encrypt(message: &[usize], key: &KeyString, d: usize) -> Result<Vec<usize>> {
    check_message(message, std::slice::from_ref(key), d)?;
    Ok(message
        .iter()
        .zip(&key.symbols)
        .map(|(m, k)| (m + k) % d)
        .collect())
}

/// Receiver side: adds every contributed key except the sender's.
pub fn recover(
    ciphertext: &[usize],
    keys: &[KeyString],
    sender: usize,
    withheld: &[usize],
    d: usize,
) -> Result<Vec<usize>> {
    check_message(ciphertext, keys, d)?;
    Ok(ciphertext
        .iter()
        .enumerate()
        .map(|(j, c)| {
            keys.iter()
                .filter(|k| k.owner != sender && !withheld.contains(&k.owner))
                .fold(*c, |acc, k| (acc + k.symbols[j]) % d)
        })
        .collect())
}

/// Sender encrypts with its own key; every other player hands its key to the
/// receiver, who recovers the message from the zero-sum identity.
pub fn share_secret(
    message: &[usize],
    keys: &SharedKeys,
    sender: usize,
    receiver: usize,
) -> Result<Vec<usize>> {
    share_secret_withholding(message, keys, sender, receiver, &[])
}

/// As [`share_secret`], but the players in `withheld` keep their keys to themselves.
pub fn share_secret_withholding(
    message: &[usize],
    keys: &SharedKeys,
    sender: usize,
    receiver: usize,
    withheld: &[usize],
) -> Result<Vec<usize>> {
    let n = keys.keys.len();
    if sender == receiver {
        return Err(QssError::Config("sender and receiver must differ".into()));
    }
    if sender >= n || receiver >= n {
        return Err(QssError::Config(format!(
            "sender {sender} / receiver {receiver} out of range for {n} players"
        )));
    }
    let ciphertext = encrypt(message, &keys.keys[sender], keys.d)?;
    recover(&ciphertext, &keys.keys, sender, withheld, keys.d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::BasisPolicy;
    use crate::rng::substream;

    fn honest(config: &ProtocolConfig) -> Vec<RoundRecord> {
        let actions = config.attack.link_actions(config.n_players);
        (0..config.rounds)
            .map(|r| run_round(config, r, &actions).unwrap())
            .collect()
    }

    #[test]
    fn honest_valid_rounds_match_prediction() {
        let config = ProtocolConfig::new(5, 4, 400, 11);
        let records = honest(&config);
        let mut valid = 0;
        for r in &records {
            assert_eq!(r.valid, r.parity() == 0);
            if let Some(ok) = r.matches(config.d) {
                assert!(ok, "round {} mismatched", r.round_id);
                valid += 1;
            }
        }
        assert!(valid > 100);
    }

    #[test]
    fn forced_zero_moves_give_zero_outcome() {
        let mut config = ProtocolConfig::new(2, 2, 1, 0);
        config.forced_moves = Some(vec![PlayerMove::identity(); 2]);
        let r = run_round(&config, 0, &[LinkAction::Honest]).unwrap();
        assert!(r.valid);
        assert_eq!(r.outcome, 0);
        let keys = assemble_keys(&[&r], 2).unwrap();
        assert!(keys.keys.iter().all(|k| k.symbols == vec![0]));
    }

    #[test]
    fn rounds_replay_identically() {
        let config = ProtocolConfig::new(4, 5, 10, 99)
            .with_attack(AttackDescriptor::intercept_resend(vec![2], BasisPolicy::UniformRandom));
        let actions = config.attack.link_actions(5);
        let a = run_round(&config, 7, &actions).unwrap();
        let b = run_round(&config, 7, &actions).unwrap();
        assert_eq!(a, b);
        // moves do not depend on the attack
        let h = run_round(&ProtocolConfig::new(4, 5, 10, 99), 7, &[LinkAction::Honest; 4]).unwrap();
        assert_eq!(a.moves, h.moves);
    }

    #[test]
    fn run_round_checks_interceptor_count() {
        let config = ProtocolConfig::new(3, 3, 1, 0);
        assert!(run_round(&config, 0, &[LinkAction::Honest]).is_err());
    }

    #[test]
    fn sift_examples() {
        let config = ProtocolConfig::new(3, 3, 50, 1);
        let mut records = honest(&config);
        for r in &mut records {
            r.announced_c = vec![0; 3];
        }
        assert_eq!(sift(&records).efficiency(), Some(1.0));
        let empty = sift(&[]);
        assert!(empty.valid.is_empty());
        assert_eq!(empty.efficiency(), None);
    }

    #[test]
    fn all_zero_hops_key_symbols() {
        let mut config = ProtocolConfig::new(7, 4, 1, 0);
        config.forced_moves = Some(vec![
            PlayerMove { a: 3, b: 1, c: 0 },
            PlayerMove { a: 5, b: 6, c: 0 },
            PlayerMove { a: 6, b: 2, c: 0 },
            PlayerMove { a: 2, b: 0, c: 0 },
        ]);
        let r = run_round(&config, 0, &[LinkAction::Honest; 3]).unwrap();
        assert_eq!(r.outcome, (3 + 5 + 6 + 2) % 7);
        let keys = assemble_keys(&[&r], 7).unwrap();
        let symbols: Vec<usize> = keys.keys.iter().map(|k| k.symbols[0]).collect();
        assert_eq!(symbols, vec![3, 5, 6, (2 + 7 - r.outcome) % 7]);
        assert!(keys.zero_sum_holds(0));
    }

    #[test]
    fn assemble_rejects_invalid_records() {
        let config = ProtocolConfig::new(3, 3, 40, 2);
        let records = honest(&config);
        let bad = records.iter().find(|r| !r.valid).unwrap();
        assert_eq!(
            assemble_keys(&[bad], 3),
            Err(QssError::InvalidRound(bad.round_id))
        );
    }

    #[test]
    fn zero_sum_holds_over_many_rounds() {
        let config = ProtocolConfig::new(6, 5, 1000, 3);
        let records = honest(&config);
        let sifted = sift(&records);
        let keys = assemble_keys(&sifted.valid, 6).unwrap();
        assert!((0..keys.len()).all(|p| keys.zero_sum_holds(p)));
    }

    #[test]
    fn verification_of_honest_keys() {
        let config = ProtocolConfig::new(4, 3, 500, 5);
        let records = honest(&config);
        let keys = assemble_keys(&sift(&records).valid, 4).unwrap();
        let mut rng = substream(5, Purpose::Verification, 0);
        let v = verify_subsequence(&keys, CheckSize::Fraction(0.2), 0.0, &mut rng).unwrap();
        assert_eq!(v.errors, 0);
        assert!(!v.detected);
        assert_eq!(v.opened.len(), (keys.len() as f64 * 0.2).round() as usize);
        assert_eq!(v.remaining.len(), keys.len() - v.opened.len());
        assert!(v.opened.iter().all(|id| !v.remaining.round_ids.contains(id)));

        let v = verify_subsequence(&keys, CheckSize::Fraction(0.0), 0.0, &mut rng).unwrap();
        assert!(v.opened.is_empty());
        assert!(!v.detected);
        assert_eq!(v.error_rate, None);
        assert_eq!(v.remaining, keys);
        assert!(verify_subsequence(&keys, CheckSize::Fraction(1.0), 0.0, &mut rng).is_err());
    }

    #[test]
    fn secret_sharing_roundtrip_and_withholding() {
        let config = ProtocolConfig::new(5, 4, 400, 8);
        let records = honest(&config);
        let keys = assemble_keys(&sift(&records).valid, 5).unwrap();
        let message: Vec<usize> = (0..40).map(|i| (i * 3) % 5).collect();
        assert_eq!(share_secret(&message, &keys, 0, 3).unwrap(), message);
        assert_eq!(share_secret(&message, &keys, 2, 1).unwrap(), message);

        let zero = vec![0; 10];
        assert_eq!(encrypt(&zero, &keys.keys[1], 5).unwrap(), keys.keys[1].symbols[..10]);

        let broken = share_secret_withholding(&message, &keys, 0, 3, &[1]).unwrap();
        assert_ne!(broken, message);

        assert!(share_secret(&message, &keys, 1, 1).is_err());
        let too_long = vec![0; keys.len() + 1];
        assert!(matches!(
            share_secret(&too_long, &keys, 0, 1),
            Err(QssError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(ProtocolConfig::new(3, 3, 10, 0).validate().is_ok());
        assert!(ProtocolConfig::new(1, 3, 10, 0).validate().is_err());
        assert!(ProtocolConfig::new(3, 1, 10, 0).validate().is_err());
        assert!(ProtocolConfig::new(3, 3, 0, 0).validate().is_err());
        let mut c = ProtocolConfig::new(3, 3, 10, 0);
        c.check_fraction = 1.0;
        assert!(c.validate().is_err());
        let c = ProtocolConfig::new(32, 6, 10, 0)
            .with_attack(AttackDescriptor::cnot_ancilla(vec![1, 2, 3]));
        assert!(matches!(c.validate(), Err(QssError::DimensionCap { .. })));
        let c = ProtocolConfig::new(10, 6, 10, 0)
            .with_attack(AttackDescriptor::cnot_ancilla(vec![1, 2, 3, 4, 5]));
        assert_eq!(c.joint_amplitudes(), 1_000_000);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn config_json_defaults() {
        let c = ProtocolConfig::from_json_str(r#"{"d": 4, "n_players": 3, "rounds": 10}"#).unwrap();
        assert_eq!(c.check_fraction, DEFAULT_CHECK_FRACTION);
        assert_eq!(c.attack, AttackDescriptor::none());
        let c = ProtocolConfig::from_json_str(
            r#"{"d": 4, "n_players": 3, "rounds": 10, "seed": 5,
                "attack": {"kind": "intercept_resend", "links": [1], "basis_policy": "always_fourier"}}"#,
        )
        .unwrap();
        assert_eq!(
            c.attack,
            AttackDescriptor::intercept_resend(vec![1], BasisPolicy::AlwaysFourier)
        );
        assert!(ProtocolConfig::from_json_str(r#"{"d": "x"}"#).is_err());
    }
}
