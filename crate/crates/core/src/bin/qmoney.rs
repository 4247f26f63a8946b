use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qmoney::clique::forge_high_eps;
use qmoney::harness::files::{format_note, format_scheme};
use qmoney::harness::{
    load_note, load_scheme, run_experiment, run_trials, summarize, write_results, ExperimentConfig, ExperimentKind,
    NoteFile, OutputFormat, ResultRecord, SchemeFile,
};
use qmoney::money::expected_q;
use qmoney::phase::LowEpsForger;
use qmoney::postselect::{
    build_verifier, component_analysis, make_label_scheme, mint, verify_money, verify_money_sampled, LabeledMoney,
};
use qmoney::{gen_scheme, verify, Error, MoneyState, Result, SchemeParams};

#[derive(Parser)]
#[command(name = "qmoney", version, about = "Stabilizer and postselection quantum money experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed; trial t uses a counter-derived seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Trial count; file-based commands default to 1, experiments to their own default.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output file (results, scheme or note); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Result format: csv or jsonl.
    #[arg(long, global = true, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args, Clone, Copy)]
struct SchemeArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
}

impl SchemeArgs {
    fn resolve(self, base: SchemeParams) -> Result<SchemeParams> {
        SchemeParams::new(
            self.n.unwrap_or(base.n),
            self.m.unwrap_or(base.m),
            self.l.unwrap_or(base.l),
            self.epsilon.unwrap_or(base.epsilon),
        )
    }
}

#[derive(Args, Clone, Copy)]
struct LabelArgs {
    /// String length.
    #[arg(long)]
    n: Option<usize>,
    /// Number of hashed subsets.
    #[arg(long)]
    s: Option<usize>,
    /// Subsets per bit.
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MoneyKind {
    Honest,
    Mixed,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a stabilizer money scheme and write it as a scheme file.
    GenScheme {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Leave the secret section out of the file.
        #[arg(long)]
        no_secret: bool,
    },
    /// Verify honest or fully mixed money against a scheme file.
    Verify {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long, value_enum, default_value = "honest")]
        money: MoneyKind,
    },
    /// Forge by planted-clique recovery and verify the forgery.
    AttackClique {
        #[command(flatten)]
        params: SchemeArgs,
        /// Attack this scheme file instead of fresh per-trial schemes.
        #[arg(long)]
        scheme: Option<PathBuf>,
    },
    /// Forge by phase estimation of the register Hamiltonian and verify.
    AttackLowEps {
        #[command(flatten)]
        params: SchemeArgs,
        #[arg(long)]
        scheme: Option<PathBuf>,
    },
    /// Largest eigenvalue of random measurement-sign matrices.
    EigCheck {
        #[command(flatten)]
        params: SchemeArgs,
    },
    /// Mint a postselection note and write it as a note file.
    Mint {
        #[command(flatten)]
        label: LabelArgs,
    },
    /// Verify the honest state of a note file with the Markov-chain verifier.
    VerifyNote {
        #[arg(long)]
        note: PathBuf,
        /// Verifier iterations; derived from the spectral gap when absent.
        #[arg(long)]
        r: Option<usize>,
        /// Sample every verifier measurement instead of using the exact probability.
        #[arg(long)]
        sampled: bool,
    },
    /// Mixing diagnostics of the β-chain on label costs.
    BetaMix {
        #[command(flatten)]
        label: LabelArgs,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long)]
        steps: Option<usize>,
        /// Start from a string no verifier rule can move.
        #[arg(long)]
        frozen_start: bool,
    },
    /// Run experiments at their default sizes and print summaries with timings.
    Bench {
        /// One experiment kind; all kinds when absent.
        #[arg(long)]
        experiment: Option<ExperimentKind>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli.common, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit(common: &Common, records: &[ResultRecord]) -> Result<()> {
    match &common.out {
        Some(p) => write_results(records, common.format, io::BufWriter::new(std::fs::File::create(p)?))?,
        None => write_results(records, common.format, io::stdout().lock())?,
    }
    let s = summarize(records)?;
    eprintln!("{}: {}/{} trials passed", s.experiment, s.passes, s.trials);
    Ok(())
}

fn experiment(common: &Common, kind: ExperimentKind, adjust: impl FnOnce(&mut ExperimentConfig) -> Result<()>) -> Result<()> {
    let mut config = ExperimentConfig::new(kind);
    config.master_seed = common.seed;
    if let Some(t) = common.trials {
        config.trials = t;
    }
    adjust(&mut config)?;
    emit(common, &run_experiment(&config)?)
}

fn run(common: &Common, command: &Command) -> Result<()> {
    let trials = common.trials.unwrap_or(1);
    match command {
        Command::GenScheme { scheme, no_secret } => {
            let params = scheme.resolve(ExperimentConfig::new(ExperimentKind::HonestAcceptance).scheme)?;
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            let (secret, scheme) = gen_scheme(params, &mut rng)?;
            let file = SchemeFile { scheme, secret: (!no_secret).then_some(secret), seed: Some(common.seed) };
            write_text(common.out.as_deref(), &format_scheme(&file))
        }
        Command::Verify { scheme, money } => {
            let file = load_scheme(scheme)?;
            let p = file.scheme.params;
            let state = match money {
                MoneyKind::Honest => MoneyState::honest(
                    file.secret.as_ref().ok_or_else(|| Error::Config("honest money needs a secret section".into()))?,
                ),
                MoneyKind::Mixed => MoneyState::fully_mixed(p.n, p.l)?,
            };
            let expected = expected_q(&file.scheme, &state)?;
            let records = run_trials("verify", common.seed, trials, |_, rng, rec| {
                let v = verify(&file.scheme, &state, rng)?;
                rec.set("q_value", v.q_value).set("expected_q", expected);
                rec.pass = v.accepted;
                Ok(())
            })?;
            emit(common, &records)
        }
        Command::AttackClique { params, scheme: Some(path) } | Command::AttackLowEps { params, scheme: Some(path) } => {
            let _ = params;
            let file = load_scheme(path)?;
            let clique = matches!(command, Command::AttackClique { .. });
            let forger = if clique { None } else { Some(LowEpsForger::new(&file.scheme)?) };
            let name = if clique { "clique-attack" } else { "low-eps-attack" };
            let records = run_trials(name, common.seed, trials, |_, rng, rec| {
                let money = match &forger {
                    None => {
                        let mut f = forge_high_eps(&file.scheme, rng)?;
                        if let Some(secret) = &file.secret {
                            f.evaluate_against(&file.scheme, secret);
                        }
                        rec.set("failures", f.failures());
                        f.money
                    }
                    Some(forger) => forger.forge(rng)?.0,
                };
                let v = verify(&file.scheme, &money, rng)?;
                rec.set("q_value", v.q_value).set("expected_q", expected_q(&file.scheme, &money)?);
                rec.pass = v.accepted;
                Ok(())
            })?;
            emit(common, &records)
        }
        Command::AttackClique { params, scheme: None } => experiment(common, ExperimentKind::CliqueAttack, |c| {
            c.scheme = params.resolve(c.scheme)?;
            Ok(())
        }),
        Command::AttackLowEps { params, scheme: None } => experiment(common, ExperimentKind::LowEpsAttack, |c| {
            c.scheme = params.resolve(c.scheme)?;
            Ok(())
        }),
        Command::EigCheck { params } => experiment(common, ExperimentKind::EigenvalueCheck, |c| {
            c.scheme = params.resolve(c.scheme)?;
            Ok(())
        }),
        Command::Mint { label } => {
            let base = ExperimentConfig::new(ExperimentKind::PostselectSuite).label;
            let (n, s, d) = (label.n.unwrap_or(base.n), label.s.unwrap_or(base.s), label.d.unwrap_or(base.d));
            let scheme = make_label_scheme(n, s, d, common.seed)?;
            let note = mint(&scheme, &mut ChaCha8Rng::seed_from_u64(common.seed))?;
            eprintln!("label {:#b} with support {}", note.label, note.support_size);
            write_text(common.out.as_deref(), &format_note(&NoteFile { n, s, d, seed: common.seed, label: note.label }))
        }
        Command::VerifyNote { note, r, sampled } => {
            let file = load_note(note)?;
            let scheme = file.scheme()?;
            let verifier = build_verifier(&scheme, 1)?;
            let money = LabeledMoney::for_label(verifier.labels(), file.label)?;
            let r = match r {
                Some(r) => *r,
                None => component_analysis(&verifier, file.label)?.default_iterations().unwrap_or(200),
            };
            let verifier = verifier.with_iterations(r)?;
            let records = run_trials("verify-note", common.seed, trials, |_, rng, rec| {
                let v = verify_money(&verifier, &money, rng)?;
                rec.set("iterations", r).set("acceptance_probability", v.acceptance_probability);
                rec.pass = if *sampled { verify_money_sampled(&verifier, money.label, &money.state, rng)? } else { v.accepted };
                Ok(())
            })?;
            emit(common, &records)
        }
        Command::BetaMix { label, beta, steps, frozen_start } => experiment(common, ExperimentKind::BetaMixing, |c| {
            c.label.n = label.n.unwrap_or(c.label.n);
            c.label.s = label.s.unwrap_or(c.label.s);
            c.label.d = label.d.unwrap_or(c.label.d);
            c.chain.beta = *beta;
            c.chain.steps = *steps;
            c.chain.frozen_start = *frozen_start;
            Ok(())
        }),
        Command::Bench { experiment } => {
            let kinds = experiment.map(|k| vec![k]).unwrap_or_else(|| ExperimentKind::ALL.to_vec());
            let mut all = Vec::new();
            for kind in kinds {
                let mut config = ExperimentConfig::new(kind);
                config.master_seed = common.seed;
                config.trials = trials;
                let start = Instant::now();
                let records = run_experiment(&config)?;
                let s = summarize(&records)?;
                println!("{}", serde_json::to_string(&s).map_err(|e| Error::Io(e.to_string()))?);
                eprintln!("{kind}: {} trial(s) in {:.2?}", records.len(), start.elapsed());
                all.extend(records);
            }
            if let Some(p) = &common.out {
                write_results(&all, common.format, io::BufWriter::new(std::fs::File::create(p)?))?;
            }
            Ok(())
        }
    }
}
