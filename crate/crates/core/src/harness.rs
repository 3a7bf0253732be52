//! Seeded Monte Carlo experiments and their machine-readable reports.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::adversary::{AttackDescriptor, AttackKind, BasisPolicy, LinkAction};
use crate::error::{QssError, Result};
use crate::lattice::build_ledger;
use crate::protocol::{
    assemble_keys, run_round, sift, verify_subsequence, CheckSize, ProtocolConfig, RoundRecord,
    SharedKeys,
};
use crate::rng::{substream, Purpose};

/// Significance used for the invalid-round uniformity check.
pub const UNIFORMITY_SIGNIFICANCE: f64 = 0.001;

/// A rate together with the sample it was measured on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub count: u64,
    pub n: u64,
    pub rate: Option<f64>,
}

impl Rate {
    pub fn new(count: u64, n: u64) -> Self {
        Self {
            count,
            n,
            rate: (n > 0).then(|| count as f64 / n as f64),
        }
    }

    pub fn from_flags(flags: impl IntoIterator<Item = bool>) -> Self {
        let (count, n) = flags
            .into_iter()
            .fold((0, 0), |(c, n), f| (c + u64::from(f), n + 1));
        Self::new(count, n)
    }

    /// Binomial standard deviation of a rate `p` measured on this sample size.
    pub fn sigma_for(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.n.max(1) as f64).sqrt()
    }

    /// True when the measured rate lies within `k` binomial sigmas of `p`.
    pub fn within_sigmas(&self, p: f64, k: f64) -> bool {
        self.rate
            .is_some_and(|r| (r - p).abs() <= k * self.sigma_for(p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub significance: f64,
    pub samples: u64,
    pub pass: bool,
}

/// Pearson chi-square of `histogram` against the uniform distribution.
pub fn chi_square_uniformity(histogram: &[u64], significance: f64) -> Result<ChiSquare> {
    let d = histogram.len();
    if d < 2 {
        return Err(QssError::InvalidDimension(d));
    }
    let total: u64 = histogram.iter().sum();
    let needed = 10 * d as u64;
    if total < needed {
        return Err(QssError::InsufficientSamples {
            needed,
            found: total,
        });
    }
    let expected = total as f64 / d as f64;
    let statistic = histogram
        .iter()
        .map(|o| {
            let diff = *o as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let dof = d - 1;
    let critical = ChiSquared::new(dof as f64)
        .map_err(|e| QssError::Config(e.to_string()))?
        .inverse_cdf(1.0 - significance);
    Ok(ChiSquare {
        statistic,
        dof,
        critical,
        significance,
        samples: total,
        pass: statistic < critical,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub rounds: u64,
    pub valid: u64,
    pub efficiency: Rate,
    /// `efficiency ± 3σ`
    pub efficiency_interval: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvalidOutcomes {
    pub histogram: Vec<u64>,
    pub uniformity: Option<ChiSquare>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniformity_skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterceptLinkStats {
    pub link: usize,
    /// Rounds where the attacker's basis differed from the link state's basis.
    pub wrong_basis: Rate,
    /// Right-basis rounds where the attacker's readout named the honest state.
    pub right_basis_guess_correct: Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionLinkStats {
    pub owner: usize,
    pub link: usize,
    /// Rounds whose link state was a Fourier-basis state.
    pub usable: Rate,
    /// Usable links with undisturbed upstream where the readout recovered the lattice point.
    pub position_recovery: Rate,
    /// Valid usable rounds where the upstream key sum was recovered.
    pub upstream_key_recovery: Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackStats {
    /// Mismatches between measurement and honest prediction on valid rounds.
    pub valid_error: Rate,
    /// Same, restricted to rounds where some attacked link disturbed the state.
    pub disturbed_error: Rate,
    pub undisturbed_error: Rate,
    pub intercept: Vec<InterceptLinkStats>,
    pub coalition: Vec<CoalitionLinkStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationStats {
    pub opened: u64,
    pub errors: u64,
    pub error_rate: Rate,
    pub detected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyYield {
    pub sifted: u64,
    pub after_verification: u64,
    pub zero_sum: Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ProtocolConfig,
    pub seed: u64,
    pub totals: Totals,
    /// Valid rounds whose outcome equals the walker prediction.
    pub correlation: Rate,
    pub invalid_outcomes: InvalidOutcomes,
    pub attack: Option<AttackStats>,
    pub verification: VerificationStats,
    pub key_yield: KeyYield,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl ExperimentReport {
    /// JSON body without timing, identical across reruns of the same config.
    pub fn canonical_json(&self) -> String {
        let mut body = self.clone();
        body.wall_time_ms = None;
        serde_json::to_string_pretty(&body).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

/// Records, surviving keys and the aggregated report of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub records: Vec<RoundRecord>,
    pub keys: SharedKeys,
    pub report: ExperimentReport,
}

/// Runs every round of `config`; the result does not depend on `mode`.
pub fn run_rounds(config: &ProtocolConfig, mode: Execution) -> Result<Vec<RoundRecord>> {
    config.validate()?;
    let actions = config.attack.link_actions(config.n_players);
    let round = |r| run_round(config, r, &actions);
    match mode {
        Execution::Serial => (0..config.rounds).map(round).collect(),
        Execution::Parallel => (0..config.rounds).into_par_iter().map(round).collect(),
    }
}

pub fn run_experiment(config: &ProtocolConfig) -> Result<ExperimentReport> {
    execute(config, Execution::Parallel).map(|run| run.report)
}

pub fn execute(config: &ProtocolConfig, mode: Execution) -> Result<ExperimentRun> {
    let started = Instant::now();
    let records = run_rounds(config, mode)?;
    let d = config.d;

    let sifted = sift(&records);
    let valid = sifted.valid.len() as u64;
    let efficiency = Rate::new(valid, records.len() as u64);
    let p = efficiency.rate.unwrap_or(0.0);
    let half_width = 3.0 * efficiency.sigma_for(p);

    let correlation = Rate::from_flags(
        sifted
            .valid
            .iter()
            .map(|r| r.matches(d) == Some(true)),
    );

    let mut histogram = vec![0u64; d];
    for r in records.iter().filter(|r| !r.valid) {
        histogram[r.outcome] += 1;
    }
    let (uniformity, uniformity_skipped) =
        match chi_square_uniformity(&histogram, UNIFORMITY_SIGNIFICANCE) {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e.to_string())),
        };

    let keys = assemble_keys(&sifted.valid, d)?;
    let zero_sum = Rate::from_flags((0..keys.len()).map(|p| keys.zero_sum_holds(p)));
    let mut vrng = substream(config.seed, Purpose::Verification, 0);
    let verification = verify_subsequence(
        &keys,
        CheckSize::Fraction(config.check_fraction),
        config.detection_threshold,
        &mut vrng,
    )?;

    let attack = (config.attack.kind != AttackKind::None).then(|| attack_stats(config, &records));

    let report = ExperimentReport {
        config: config.clone(),
        seed: config.seed,
        totals: Totals {
            rounds: records.len() as u64,
            valid,
            efficiency,
            efficiency_interval: [p - half_width, p + half_width],
        },
        correlation,
        invalid_outcomes: InvalidOutcomes {
            histogram,
            uniformity,
            uniformity_skipped,
        },
        attack,
        verification: VerificationStats {
            opened: verification.opened.len() as u64,
            errors: verification.errors as u64,
            error_rate: Rate::new(verification.errors as u64, verification.opened.len() as u64),
            detected: verification.detected,
        },
        key_yield: KeyYield {
            sifted: keys.len() as u64,
            after_verification: verification.remaining.len() as u64,
            zero_sum,
        },
        wall_time_ms: Some(started.elapsed().as_secs_f64() * 1e3),
    };
    Ok(ExperimentRun {
        records,
        keys: verification.remaining,
        report,
    })
}

fn attack_stats(config: &ProtocolConfig, records: &[RoundRecord]) -> AttackStats {
    let d = config.d;
    let annotated = || records.iter().filter_map(|r| r.attack.as_ref().map(|a| (r, a)));
    let valid = || annotated().filter(|(r, _)| r.valid);
    let mismatch = |r: &RoundRecord| r.matches(d) == Some(false);

    let valid_error = Rate::from_flags(valid().map(|(r, _)| mismatch(r)));
    let disturbed_error = Rate::from_flags(
        valid()
            .filter(|(_, a)| a.any_disturbing())
            .map(|(r, _)| mismatch(r)),
    );
    let undisturbed_error = Rate::from_flags(
        valid()
            .filter(|(_, a)| !a.any_disturbing())
            .map(|(r, _)| mismatch(r)),
    );

    let mut intercept = Vec::new();
    let mut coalition = Vec::new();
    let actions = config.attack.link_actions(config.n_players);
    for (link, action) in actions.iter().enumerate() {
        let notes = || {
            annotated().filter_map(move |(r, a)| {
                a.links.iter().find(|l| l.link == link).map(|l| (r, a, l))
            })
        };
        match action {
            LinkAction::Honest => {}
            LinkAction::InterceptResend(_) => {
                let wrong_basis = Rate::from_flags(notes().map(|(_, _, l)| l.disturbing));
                let right_basis_guess_correct = Rate::from_flags(
                    notes()
                        .filter(|(_, _, l)| !l.disturbing && l.undisturbed_upstream)
                        .map(|(_, _, l)| l.guess == Some(l.honest_point.label(d))),
                );
                intercept.push(InterceptLinkStats {
                    link,
                    wrong_basis,
                    right_basis_guess_correct,
                });
            }
            LinkAction::CnotAncilla { owner } => {
                let owner = *owner;
                let guesses = || {
                    notes().filter_map(move |(r, a, l)| {
                        a.coalition
                            .iter()
                            .find(|g| g.owner == owner)
                            .map(|g| (r, l, g))
                    })
                };
                let usable = Rate::from_flags(guesses().map(|(_, _, g)| g.usable));
                let position_recovery = Rate::from_flags(
                    guesses()
                        .filter(|(_, l, g)| g.usable && l.undisturbed_upstream)
                        .map(|(_, l, g)| g.recovered_point == Some(l.honest_point)),
                );
                let upstream_key_recovery = Rate::from_flags(
                    guesses()
                        .filter(|(r, l, g)| r.valid && g.usable && l.undisturbed_upstream)
                        .map(|(r, _, g)| {
                            let ledger = build_ledger(&r.announced_c).expect("valid round");
                            g.upstream_key_sum == Some(ledger.partial_sum(0..owner, &r.moves, d))
                        }),
                );
                coalition.push(CoalitionLinkStats {
                    owner,
                    link,
                    usable,
                    position_recovery,
                    upstream_key_recovery,
                });
            }
        }
    }

    AttackStats {
        valid_error,
        disturbed_error,
        undisturbed_error,
        intercept,
        coalition,
    }
}

/// Writes one CSV row per round.
pub fn write_round_csv<W: Write>(records: &[RoundRecord], d: usize, out: W) -> Result<()> {
    let io = |e: csv::Error| QssError::Config(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "round_id",
        "c-parity",
        "valid",
        "predicted",
        "measured",
        "match",
        "attacked_link",
        "attack_flags",
    ])
    .map_err(io)?;
    for r in records {
        let predicted = r.predicted(d);
        let (links, flags) = match &r.attack {
            None => (String::new(), String::new()),
            Some(a) => {
                let links = a
                    .links
                    .iter()
                    .map(|l| l.link.to_string())
                    .collect::<Vec<_>>()
                    .join(";");
                let flags = a
                    .links
                    .iter()
                    .map(|l| {
                        let what = match l.action {
                            LinkAction::Honest => "honest".to_string(),
                            LinkAction::InterceptResend(_) => format!(
                                "intercept:{}",
                                match l.measured_basis {
                                    Some(crate::qudit::Basis::Fourier) => "fourier",
                                    _ => "computational",
                                }
                            ),
                            LinkAction::CnotAncilla { owner } => format!("cnot:{owner}"),
                        };
                        let state = if l.disturbing { "disturbing" } else { "clean" };
                        format!("{what}:{state}")
                    })
                    .collect::<Vec<_>>()
                    .join(";");
                (links, flags)
            }
        };
        w.write_record([
            r.round_id.to_string(),
            r.parity().to_string(),
            r.valid.to_string(),
            predicted.map(|p| p.to_string()).unwrap_or_default(),
            r.outcome.to_string(),
            predicted
                .map(|p| (p == r.outcome).to_string())
                .unwrap_or_default(),
            links,
            flags,
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| QssError::Config(format!("csv: {e}")))?;
    Ok(())
}

/// One row of an attack sweep over dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: usize,
    pub attack: String,
    pub valid_error: Rate,
    pub disturbed_error: Rate,
    /// `(d − 1)/d`, the error rate after a disturbing attack.
    pub expected_disturbed: f64,
    /// `(d − 1)/(2d)`, for a single attacked link.
    pub expected_overall: Option<f64>,
    pub detected: bool,
}

/// Reruns `base` for every `d`. Without a configured attack, intercept-resend
/// with a uniform basis on link 0 is used.
pub fn attack_sweep(base: &ProtocolConfig, ds: &[usize]) -> Result<Vec<SweepRow>> {
    let attack = if base.attack.kind == AttackKind::None {
        AttackDescriptor::intercept_resend(vec![0], BasisPolicy::UniformRandom)
    } else {
        base.attack.clone()
    };
    let single_site = match attack.kind {
        AttackKind::InterceptResend => attack.links.len() == 1,
        AttackKind::CnotAncilla => attack.ancilla_count() == 1,
        AttackKind::None => false,
    };
    ds.iter()
        .map(|&d| {
            let config = ProtocolConfig {
                d,
                attack: attack.clone(),
                forced_moves: None,
                ..base.clone()
            };
            let report = run_experiment(&config)?;
            let stats = report.attack.expect("attack configured");
            let df = d as f64;
            Ok(SweepRow {
                d,
                attack: attack.to_string(),
                valid_error: stats.valid_error,
                disturbed_error: stats.disturbed_error,
                expected_disturbed: (df - 1.0) / df,
                expected_overall: single_site.then(|| (df - 1.0) / (2.0 * df)),
                detected: report.verification.detected,
            })
        })
        .collect()
}
