//! `qss`: run secret-sharing experiments from the command line.
//!
//! Exit codes: 0 success, 1 configuration error, 2 self-test failure,
//! 3 joint-dimension cap exceeded.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qss_core::harness::{attack_sweep, execute, write_round_csv, Execution};
use qss_core::lattice::{build_ledger, predict_outcome, trace};
use qss_core::{run_round, AttackDescriptor, Basis, ProtocolConfig, QssError};

#[derive(Parser)]
#[command(name = "qss", version, about = "Sequential single-qudit secret sharing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full experiment and emit a JSON report.
    Run(Common),
    /// Run a single round and print the lattice walk.
    Round {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        round_id: u64,
    },
    /// Sweep the configured attack over several dimensions.
    Attack {
        #[command(flatten)]
        common: Common,
        /// Comma-separated dimensions.
        #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 3, 4, 5, 8])]
        dims: Vec<usize>,
    },
    /// Operator algebra and engine-equivalence checks.
    Selftest,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    players: Option<usize>,
    #[arg(long)]
    rounds: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// none | intercept_resend[:POLICY[:LINKS]] | cnot_ancilla[:PLAYERS]
    #[arg(long)]
    attack: Option<String>,
    #[arg(long)]
    check_fraction: Option<f64>,
    /// Write the JSON output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    per_round_csv: Option<PathBuf>,
    /// Run rounds on one thread. Results are identical either way.
    #[arg(long)]
    serial: bool,
}

enum Failure {
    Config(String),
    SelfTest,
    Cap(String),
}

impl From<QssError> for Failure {
    fn from(e: QssError) -> Self {
        match e {
            QssError::DimensionCap { .. } => Failure::Cap(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl Common {
    fn load(&self) -> Result<ProtocolConfig, Failure> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                ProtocolConfig::from_json_str(&text)?
            }
            None => ProtocolConfig::default(),
        };
        if let Some(d) = self.d {
            config.d = d;
        }
        if let Some(p) = self.players {
            config.n_players = p;
        }
        if let Some(r) = self.rounds {
            config.rounds = r;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(a) = &self.attack {
            config.attack = a.parse::<AttackDescriptor>()?;
        }
        if let Some(f) = self.check_fraction {
            config.check_fraction = f;
        }
        config.validate()?;
        Ok(config)
    }

    fn mode(&self) -> Execution {
        if self.serial {
            Execution::Serial
        } else {
            Execution::Parallel
        }
    }

    fn emit(&self, json: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => fs::write(path, format!("{json}\n"))?,
            None => println!("{json}"),
        }
        Ok(())
    }
}

fn run(common: &Common) -> Result<(), Failure> {
    let config = common.load()?;
    let result = execute(&config, common.mode())?;
    if let Some(path) = &common.per_round_csv {
        write_round_csv(&result.records, config.d, BufWriter::new(File::create(path)?))?;
    }
    common.emit(&result.report.to_json())
}

fn state_name(point: qss_core::LatticePoint, d: usize) -> String {
    match point.basis() {
        Basis::Computational => format!("|{}>", point.label(d)),
        Basis::Fourier => format!("|xi_{}>", point.label(d)),
    }
}

fn round(common: &Common, round_id: u64) -> Result<(), Failure> {
    let config = common.load()?;
    let d = config.d;
    let actions = config.attack.link_actions(config.n_players);
    let record = run_round(&config, round_id, &actions)?;
    let points = trace(&record.moves, d);

    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "round {round_id}: d={d}, players={}, attack={}", config.n_players, config.attack)?;
    writeln!(out, "start (row 0, pos 0) |0>")?;
    for (i, (mv, point)) in record.moves.iter().zip(&points).enumerate() {
        if i > 0 && actions[i - 1] != qss_core::LinkAction::Honest {
            writeln!(out, "  link {}: {:?}", i - 1, actions[i - 1])?;
        }
        writeln!(
            out,
            "R{i}: a={} b={} c={} -> {point} {}",
            mv.a,
            mv.b,
            mv.c,
            state_name(*point, d)
        )?;
    }
    writeln!(out, "announced c = {:?} (order {:?})", record.announced_c, record.announcement_order)?;
    writeln!(out, "valid = {}", record.valid)?;
    match predict_outcome(&record.moves, d) {
        Some(p) => writeln!(out, "predicted = {p}, measured = {}", record.outcome)?,
        None => writeln!(out, "predicted = (none, Fourier row), measured = {}", record.outcome)?,
    }
    if let Ok(ledger) = build_ledger(&record.announced_c) {
        writeln!(out, "ledger (orientation {:+}):", ledger.orientation)?;
        let n = record.moves.len();
        for (i, entry) in ledger.entries.iter().enumerate() {
            let mut symbol = ledger.key_symbol(i, &record.moves[i], d);
            if i == n - 1 {
                symbol = (symbol + d - record.outcome) % d;
            }
            writeln!(out, "  R{i}: sign {:+} source {:?} key symbol {symbol}", entry.sign, entry.source)?;
        }
    }
    if let Some(attack) = &record.attack {
        for note in &attack.links {
            writeln!(
                out,
                "  link {}: honest {} disturbing={} guess={:?}",
                note.link, note.honest_point, note.disturbing, note.guess
            )?;
        }
        for g in &attack.coalition {
            writeln!(
                out,
                "  coalition R{}: usable={} ancilla={} recovered={:?}",
                g.owner, g.usable, g.ancilla_value, g.recovered_point
            )?;
        }
    }
    Ok(())
}

fn attack(common: &Common, dims: &[usize]) -> Result<(), Failure> {
    let base = common.load()?;
    for &d in dims {
        ProtocolConfig { d, ..base.clone() }.validate()?;
    }
    let rows = attack_sweep(&base, dims)?;
    if common.out.is_some() {
        common.emit(&serde_json::to_string_pretty(&rows).expect("rows serialize"))?;
    }
    println!("{:>4}  {:<32} {:>10} {:>10} {:>12} {:>10}", "d", "attack", "error", "expected", "disturbed", "(d-1)/d");
    for r in &rows {
        println!(
            "{:>4}  {:<32} {:>10.4} {:>10} {:>12.4} {:>10.4}",
            r.d,
            r.attack,
            r.valid_error.rate.unwrap_or(f64::NAN),
            r.expected_overall.map(|e| format!("{e:.4}")).unwrap_or_else(|| "-".into()),
            r.disturbed_error.rate.unwrap_or(f64::NAN),
            r.expected_disturbed
        );
    }
    Ok(())
}

fn selftest() -> Result<(), Failure> {
    let checks = qss_core::selftest::run();
    let mut ok = true;
    for c in &checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::SelfTest)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(common) => run(common),
        Command::Round { common, round_id } => round(common, *round_id),
        Command::Attack { common, dims } => attack(common, dims),
        Command::Selftest => selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::SelfTest) => {
            eprintln!("selftest failed");
            ExitCode::from(2)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
