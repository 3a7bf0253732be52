//! Attack strategies applied on the links of the player chain.
//!
//! Link `i` carries the qudit from player `i` to player `i + 1`. An
//! intercept-resend attacker measures the carried qudit in a basis chosen by
//! its policy and forwards the collapsed state. A coalition member running
//! the CNOT attack entangles the qudit it receives with a fresh `|+⟩`
//! ancilla; the ancilla stays inside the round's joint state until the
//! announcements are public, and only then is it read out.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QssError, Result};
use crate::lattice::{step, LatticePoint, PlayerMove};
use crate::qudit::{Basis, JointState, QuditState};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    #[default]
    None,
    InterceptResend,
    CnotAncilla,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisPolicy {
    AlwaysComputational,
    AlwaysFourier,
    #[default]
    UniformRandom,
}

impl BasisPolicy {
    pub fn choose<R: Rng + ?Sized>(self, rng: &mut R) -> Basis {
        match self {
            BasisPolicy::AlwaysComputational => Basis::Computational,
            BasisPolicy::AlwaysFourier => Basis::Fourier,
            BasisPolicy::UniformRandom => {
                if rng.random_bool(0.5) {
                    Basis::Fourier
                } else {
                    Basis::Computational
                }
            }
        }
    }
}

impl FromStr for BasisPolicy {
    type Err = QssError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "always_computational" | "computational" => Ok(BasisPolicy::AlwaysComputational),
            "always_fourier" | "fourier" => Ok(BasisPolicy::AlwaysFourier),
            "uniform_random" | "uniform" | "random" => Ok(BasisPolicy::UniformRandom),
            other => Err(QssError::Config(format!("unknown basis policy `{other}`"))),
        }
    }
}

/// Which attack runs, and where.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackDescriptor {
    pub kind: AttackKind,
    /// Links attacked by intercept-resend.
    pub links: Vec<usize>,
    pub basis_policy: BasisPolicy,
    /// Players running the CNOT-ancilla attack on the qudit they receive.
    pub coalition: Vec<usize>,
}

impl AttackDescriptor {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn intercept_resend(links: Vec<usize>, basis_policy: BasisPolicy) -> Self {
        Self {
            kind: AttackKind::InterceptResend,
            links,
            basis_policy,
            coalition: Vec::new(),
        }
    }

    pub fn cnot_ancilla(coalition: Vec<usize>) -> Self {
        Self {
            kind: AttackKind::CnotAncilla,
            coalition,
            ..Self::default()
        }
    }

    pub fn validate(&self, n_players: usize) -> Result<()> {
        let links = n_players.saturating_sub(1);
        match self.kind {
            AttackKind::None => Ok(()),
            AttackKind::InterceptResend => {
                if self.links.is_empty() {
                    return Err(QssError::Config(
                        "intercept_resend needs at least one link".into(),
                    ));
                }
                if let Some(l) = self.links.iter().find(|l| **l >= links) {
                    return Err(QssError::Config(format!(
                        "link {l} out of range: {n_players} players have {links} links"
                    )));
                }
                Ok(())
            }
            AttackKind::CnotAncilla => {
                if self.coalition.is_empty() {
                    return Err(QssError::Config(
                        "cnot_ancilla needs a nonempty coalition".into(),
                    ));
                }
                if let Some(p) = self
                    .coalition
                    .iter()
                    .find(|p| **p == 0 || **p >= n_players)
                {
                    return Err(QssError::Config(format!(
                        "coalition member {p} must be in 1..{n_players} (player 0 receives no qudit)"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Number of ancillas the attack adds to each round's joint state.
    pub fn ancilla_count(&self) -> usize {
        match self.kind {
            AttackKind::CnotAncilla => self.coalition.iter().collect::<BTreeSet<_>>().len(),
            _ => 0,
        }
    }

    /// One action per link, in link order.
    pub fn link_actions(&self, n_players: usize) -> Vec<LinkAction> {
        let mut actions = vec![LinkAction::Honest; n_players.saturating_sub(1)];
        match self.kind {
            AttackKind::None => {}
            AttackKind::InterceptResend => {
                for l in &self.links {
                    if let Some(slot) = actions.get_mut(*l) {
                        *slot = LinkAction::InterceptResend(self.basis_policy);
                    }
                }
            }
            AttackKind::CnotAncilla => {
                for p in &self.coalition {
                    if let Some(slot) = p.checked_sub(1).and_then(|l| actions.get_mut(l)) {
                        *slot = LinkAction::CnotAncilla { owner: *p };
                    }
                }
            }
        }
        actions
    }
}

impl fmt::Display for AttackDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self.kind {
            AttackKind::None => write!(f, "none"),
            AttackKind::InterceptResend => {
                let policy = match self.basis_policy {
                    BasisPolicy::AlwaysComputational => "always_computational",
                    BasisPolicy::AlwaysFourier => "always_fourier",
                    BasisPolicy::UniformRandom => "uniform_random",
                };
                write!(f, "intercept_resend:{policy}:{}", list(&self.links))
            }
            AttackKind::CnotAncilla => write!(f, "cnot_ancilla:{}", list(&self.coalition)),
        }
    }
}

fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| QssError::Config(format!("bad index `{t}`")))
        })
        .collect()
}

/// Parses `none`, `intercept_resend[:POLICY[:LINKS]]` or `cnot_ancilla[:PLAYERS]`,
/// where lists are comma separated. Defaults: uniform policy on link 0, coalition {1}.
impl FromStr for AttackDescriptor {
    type Err = QssError;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        match head {
            "none" | "" => Ok(Self::none()),
            "intercept_resend" | "intercept" => {
                let policy = match parts.next() {
                    Some(p) if !p.is_empty() => p.parse()?,
                    _ => BasisPolicy::UniformRandom,
                };
                let links = match parts.next() {
                    Some(l) => parse_index_list(l)?,
                    None => vec![0],
                };
                Ok(Self::intercept_resend(links, policy))
            }
            "cnot_ancilla" | "cnot" => {
                let coalition = match parts.next() {
                    Some(l) => parse_index_list(l)?,
                    None => vec![1],
                };
                Ok(Self::cnot_ancilla(coalition))
            }
            other => Err(QssError::Config(format!("unknown attack `{other}`"))),
        }
    }
}

/// What happens to the qudit on one link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkAction {
    Honest,
    InterceptResend(BasisPolicy),
    CnotAncilla { owner: usize },
}

/// What an intercept-resend attacker saw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interception {
    pub basis: Basis,
    pub guess: usize,
}

/// Measures the carried qudit (the last subsystem) in the policy's basis and
/// resends the collapsed state.
pub fn intercept_resend<R: Rng + ?Sized>(
    state: &JointState,
    policy: BasisPolicy,
    rng: &mut R,
) -> Result<(JointState, Interception)> {
    let basis = policy.choose(rng);
    let carried = state.subsystem_count() - 1;
    let out = state.measure_subsystem(carried, basis, rng)?;
    Ok((
        out.post_state,
        Interception {
            basis,
            guess: out.value,
        },
    ))
}

/// A coalition member's ancilla inside the round's joint state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncillaRegister {
    pub owner: usize,
    /// Subsystem index of the ancilla; ancillas are never reordered once attached.
    pub subsystem: usize,
    pub measured_value: Option<usize>,
}

impl AncillaRegister {
    /// The link this register was attached on.
    pub fn link(&self) -> usize {
        self.owner - 1
    }
}

/// Prepares a `|+⟩` ancilla just before the carried qudit and applies the
/// generalized CNOT with the ancilla as control.
pub fn attach_cnot_ancilla(state: &JointState, owner: usize) -> Result<(JointState, AncillaRegister)> {
    let carried = state.subsystem_count() - 1;
    let plus = QuditState::plus(state.local_dim())?;
    let joint = state
        .insert_subsystem(carried, &plus)?
        .apply_cnot_between(carried, carried + 1)?;
    Ok((
        joint,
        AncillaRegister {
            owner,
            subsystem: carried,
            measured_value: None,
        },
    ))
}

/// What one coalition member extracts from its ancilla after the announcements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterGuess {
    pub owner: usize,
    pub link: usize,
    /// Basis of the link state, known from the announced `c` bits.
    pub link_basis: Basis,
    /// True only for Fourier-basis links, where the ancilla holds `|ξ_{−q}⟩`.
    pub usable: bool,
    pub ancilla_value: usize,
    /// Lattice point of the link state implied by the ancilla readout.
    pub recovered_point: Option<LatticePoint>,
    /// Point after the owner's own move is applied.
    pub point_after_own_move: Option<LatticePoint>,
    /// Sum of the key symbols of players `0..owner`, available for valid rounds.
    pub upstream_key_sum: Option<usize>,
}

/// Reads out every register in the Fourier basis and interprets the values
/// using the public `c` bits. `own_moves[i]` is the move of `registers[i].owner`.
pub fn coalition_guess<R: Rng + ?Sized>(
    state: &JointState,
    registers: &mut [AncillaRegister],
    announced_c: &[u8],
    own_moves: &[PlayerMove],
    d: usize,
    rng: &mut R,
) -> Result<Vec<RegisterGuess>> {
    if own_moves.len() != registers.len() {
        return Err(QssError::LengthMismatch {
            expected: registers.len(),
            found: own_moves.len(),
        });
    }
    let total_hops: u32 = announced_c.iter().map(|c| u32::from(*c)).sum();
    let final_row = (total_hops % 4) as u8;
    let mut current = state.clone();
    let mut guesses = Vec::with_capacity(registers.len());
    for (reg, own) in registers.iter_mut().zip(own_moves) {
        let out = current.measure_subsystem(reg.subsystem, Basis::Fourier, rng)?;
        current = out.post_state;
        reg.measured_value = Some(out.value);

        let hops: u32 = announced_c[..reg.owner].iter().map(|c| u32::from(*c)).sum();
        let row = (hops % 4) as u8;
        let usable = row % 2 == 1;
        let (recovered_point, point_after_own_move, upstream_key_sum) = if usable {
            // ancilla |ξ_{−q}⟩ for link state |ξ_q⟩
            let q = (d - out.value) % d;
            let pos = if row == 1 { q } else { (d - q) % d };
            let point = LatticePoint { row, pos };
            let upstream = match final_row {
                0 => Some(pos),
                2 => Some((d - pos) % d),
                _ => None,
            };
            (Some(point), Some(step(point, own, d)), upstream)
        } else {
            (None, None, None)
        };
        guesses.push(RegisterGuess {
            owner: reg.owner,
            link: reg.link(),
            link_basis: if usable { Basis::Fourier } else { Basis::Computational },
            usable,
            ancilla_value: out.value,
            recovered_point,
            point_after_own_move,
            upstream_key_sum,
        });
    }
    Ok(guesses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::Op;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn intercept_in_right_basis_is_transparent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = 5;
        let q = 3;
        let state: JointState = QuditState::basis_state(d, q).unwrap().into();
        let (resent, seen) =
            intercept_resend(&state, BasisPolicy::AlwaysComputational, &mut rng).unwrap();
        assert_eq!(seen.guess, q);
        assert_eq!(seen.basis, Basis::Computational);
        assert!(resent.equals_up_to_phase(&state, 1e-12));

        let xi: JointState = QuditState::fourier_basis_state(d, q).unwrap().into();
        let (resent, seen) = intercept_resend(&xi, BasisPolicy::AlwaysFourier, &mut rng).unwrap();
        assert_eq!(seen.guess, q);
        assert!(resent.equals_up_to_phase(&xi, 1e-12));
    }

    #[test]
    fn intercept_in_wrong_basis_randomizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = 4;
        let xi: JointState = QuditState::fourier_basis_state(d, 1).unwrap().into();
        let mut counts = vec![0usize; d];
        let n = 8000;
        for _ in 0..n {
            let (resent, seen) =
                intercept_resend(&xi, BasisPolicy::AlwaysComputational, &mut rng).unwrap();
            counts[seen.guess] += 1;
            let fourier = resent.apply_on_subsystem(0, Op::FInv).unwrap();
            // The resent basis state is unbiased in the Fourier basis.
            for p in fourier.subsystem_probabilities(0).unwrap() {
                assert!((p - 0.25).abs() < 1e-12);
            }
        }
        let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn cnot_ancilla_on_fourier_state_leaves_no_trace() {
        let d = 6;
        for q in 0..d {
            let carried: JointState = QuditState::fourier_basis_state(d, q).unwrap().into();
            let (joint, reg) = attach_cnot_ancilla(&carried, 1).unwrap();
            assert_eq!(reg.subsystem, 0);
            let expected = JointState::embed_with_ancilla(
                &QuditState::fourier_basis_state(d, (d - q) % d).unwrap(),
                &QuditState::fourier_basis_state(d, q).unwrap(),
            )
            .unwrap();
            assert!(joint.equals_up_to_phase(&expected, 1e-12));
        }
        let plus: JointState = QuditState::plus(3).unwrap().into();
        let (joint, _) = attach_cnot_ancilla(&plus, 2).unwrap();
        let pp = JointState::embed_with_ancilla(
            &QuditState::plus(3).unwrap(),
            &QuditState::plus(3).unwrap(),
        )
        .unwrap();
        assert!(joint.equals_up_to_phase(&pp, 1e-12));
    }

    #[test]
    fn cnot_ancilla_on_computational_state_decoheres_it() {
        let d = 5;
        let carried: JointState = QuditState::basis_state(d, 2).unwrap().into();
        let (joint, _) = attach_cnot_ancilla(&carried, 1).unwrap();
        for p in joint.subsystem_probabilities(1).unwrap() {
            assert!((p - 0.2).abs() < 1e-12);
        }
        // In the Fourier basis the carried marginal is not a basis state either.
        let rotated = joint.apply_on_subsystem(1, Op::FInv).unwrap();
        assert!(rotated
            .subsystem_probabilities(1)
            .unwrap()
            .iter()
            .all(|p| *p < 0.999));
    }

    #[test]
    fn second_ancilla_goes_before_the_carried_qudit() {
        let d = 3;
        let carried: JointState = QuditState::fourier_basis_state(d, 1).unwrap().into();
        let (j1, r1) = attach_cnot_ancilla(&carried, 1).unwrap();
        let j1 = j1.apply_on_subsystem(1, Op::ZPow(1)).unwrap();
        let (j2, r2) = attach_cnot_ancilla(&j1, 2).unwrap();
        assert_eq!((r1.subsystem, r2.subsystem), (0, 1));
        assert_eq!(j2.subsystem_count(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = j2.measure_subsystem(0, Basis::Fourier, &mut rng).unwrap();
        assert_eq!(out.value, 2);
        let out = out.post_state.measure_subsystem(1, Basis::Fourier, &mut rng).unwrap();
        assert_eq!(out.value, 1);
    }

    #[test]
    fn coalition_recovers_fourier_link_position() {
        let d = 7;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // player 0 hops to row 1 and shifts by b = 3; player 1 attacks link 0.
        let moves = [
            PlayerMove { a: 5, b: 3, c: 1 },
            PlayerMove { a: 2, b: 4, c: 1 },
        ];
        let carried: JointState = QuditState::fourier_basis_state(d, 3).unwrap().into();
        let (joint, reg) = attach_cnot_ancilla(&carried, 1).unwrap();
        let mut regs = [reg];
        let guesses = coalition_guess(&joint, &mut regs, &[1, 1], &[moves[1]], d, &mut rng).unwrap();
        let g = guesses[0];
        assert!(g.usable);
        assert_eq!(g.ancilla_value, 4);
        assert_eq!(g.recovered_point, Some(LatticePoint { row: 1, pos: 3 }));
        assert_eq!(g.point_after_own_move, Some(LatticePoint { row: 2, pos: 1 }));
        // Final row 2: upstream key sum is −pos.
        assert_eq!(g.upstream_key_sum, Some(4));
        assert_eq!(regs[0].measured_value, Some(4));
    }

    #[test]
    fn coalition_marks_computational_links_unusable() {
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let carried: JointState = QuditState::basis_state(d, 1).unwrap().into();
        let (joint, reg) = attach_cnot_ancilla(&carried, 1).unwrap();
        let mut regs = [reg];
        let g = coalition_guess(&joint, &mut regs, &[0, 0], &[PlayerMove::identity()], d, &mut rng)
            .unwrap();
        assert!(!g[0].usable);
        assert_eq!(g[0].recovered_point, None);
    }

    #[test]
    fn descriptor_parsing_and_validation() {
        let a: AttackDescriptor = "intercept_resend:always_fourier:1,2".parse().unwrap();
        assert_eq!(a, AttackDescriptor::intercept_resend(vec![1, 2], BasisPolicy::AlwaysFourier));
        assert_eq!(a.to_string().parse::<AttackDescriptor>().unwrap(), a);
        let c: AttackDescriptor = "cnot:1,3".parse().unwrap();
        assert_eq!(c, AttackDescriptor::cnot_ancilla(vec![1, 3]));
        assert_eq!("none".parse::<AttackDescriptor>().unwrap(), AttackDescriptor::none());
        assert!("teleport".parse::<AttackDescriptor>().is_err());

        assert!(a.validate(4).is_ok());
        assert!(a.validate(3).is_err());
        assert!(AttackDescriptor::cnot_ancilla(vec![0]).validate(3).is_err());
        assert!(AttackDescriptor::cnot_ancilla(vec![]).validate(3).is_err());
        assert_eq!(c.ancilla_count(), 2);

        let actions = c.link_actions(4);
        assert_eq!(
            actions,
            vec![
                LinkAction::CnotAncilla { owner: 1 },
                LinkAction::Honest,
                LinkAction::CnotAncilla { owner: 3 },
            ]
        );
    }
}
