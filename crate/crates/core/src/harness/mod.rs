//! Seeded experiment orchestration.
//!
//! Trial `t` of a run draws all randomness from a ChaCha stream seeded with
//! [`trial_seed`]`(master, t)`, so records do not depend on scheduling.

pub mod files;
pub mod results;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::clique::{forge_high_eps, max_eigenvalue_check, signed_matrix};
use crate::error::{Error, Result};
use crate::money::{gen_scheme, verify, MoneyState, SchemeParams};
use crate::pauli::PauliOp;
use crate::phase::LowEpsForger;
use crate::postselect::{
    beta_chain_mixing, build_verifier, component_analysis, kraus_equivalence_check, make_label_scheme, mint_from_table,
    MarkovVerifier, KRAUS_LIMIT,
};

pub use files::{load_note, load_scheme, save_note, save_scheme, NoteFile, SchemeFile};
pub use results::{emit_results, summarize, write_results, Metric, OutputFormat, ResultRecord, Summary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    HonestAcceptance,
    CliqueAttack,
    LowEpsAttack,
    EigenvalueCheck,
    PostselectSuite,
    BetaMixing,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::HonestAcceptance,
        ExperimentKind::CliqueAttack,
        ExperimentKind::LowEpsAttack,
        ExperimentKind::EigenvalueCheck,
        ExperimentKind::PostselectSuite,
        ExperimentKind::BetaMixing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::HonestAcceptance => "honest-acceptance",
            ExperimentKind::CliqueAttack => "clique-attack",
            ExperimentKind::LowEpsAttack => "low-eps-attack",
            ExperimentKind::EigenvalueCheck => "eigenvalue-check",
            ExperimentKind::PostselectSuite => "postselect-suite",
            ExperimentKind::BetaMixing => "beta-mixing",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

/// Label-scheme parameters for the postselection experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabelParams {
    pub n: usize,
    pub s: usize,
    pub d: usize,
    /// Verifier iterations; `None` derives them from the spectral gap.
    pub r: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainParams {
    pub beta: f64,
    /// `None` means `⌈10·n·ln 2ⁿ⌉`.
    pub steps: Option<usize>,
    /// Start from a string no verifier rule can move.
    pub frozen_start: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub scheme: SchemeParams,
    pub label: LabelParams,
    pub chain: ChainParams,
    pub trials: usize,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Desk-scale defaults for each experiment.
    pub fn new(kind: ExperimentKind) -> Self {
        let scheme = match kind {
            ExperimentKind::HonestAcceptance => SchemeParams { n: 8, m: 64, l: 1024, epsilon: 0.25 },
            ExperimentKind::CliqueAttack => SchemeParams { n: 50, m: 400, l: 256, epsilon: 0.5 },
            ExperimentKind::LowEpsAttack => SchemeParams { n: 6, m: 64, l: 512, epsilon: 1.0 / 128.0 },
            ExperimentKind::EigenvalueCheck => SchemeParams { n: 64, m: 1000, l: 1, epsilon: 0.0 },
            _ => SchemeParams { n: 8, m: 64, l: 64, epsilon: 0.25 },
        };
        let label = match kind {
            ExperimentKind::BetaMixing => LabelParams { n: 10, s: 4, d: 2, r: None },
            _ => LabelParams { n: 12, s: 4, d: 2, r: None },
        };
        ExperimentConfig {
            kind,
            scheme,
            label,
            chain: ChainParams { beta: 0.0, steps: None, frozen_start: false },
            trials: 20,
            master_seed: 0,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trial count must be at least 1".into()));
        }
        self.scheme.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based per-trial seed.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    splitmix64(master.wrapping_add((trial as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Runs every trial (in parallel) and returns records ordered by trial.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let records =
        run_trials(config.kind.name(), config.master_seed, config.trials, |seed, rng, rec| run_trial(config, seed, rng, rec))?;
    if let Some(path) = &config.output {
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => OutputFormat::JsonLines,
            _ => OutputFormat::Csv,
        };
        emit_results(&records, format, path)?;
    }
    Ok(records)
}

/// Runs `trial(seed, rng, record)` for `trials` counter-derived seeds in
/// parallel; records come back in trial order and errors carry the trial index.
pub fn run_trials<F>(experiment: &str, master_seed: u64, trials: usize, trial: F) -> Result<Vec<ResultRecord>>
where
    F: Fn(u64, &mut ChaCha8Rng, &mut ResultRecord) -> Result<()> + Sync,
{
    if trials == 0 {
        return Err(Error::Config("trial count must be at least 1".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(master_seed, t);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rec = ResultRecord::new(experiment, t, seed);
            trial(seed, &mut rng, &mut rec).map_err(|e| Error::Trial { trial: t, source: Box::new(e) })?;
            Ok(rec)
        })
        .collect()
}

fn run_trial(config: &ExperimentConfig, seed: u64, rng: &mut ChaCha8Rng, rec: &mut ResultRecord) -> Result<()> {
    match config.kind {
        ExperimentKind::HonestAcceptance => honest_trial(config.scheme, rng, rec),
        ExperimentKind::CliqueAttack => clique_trial(config.scheme, rng, rec),
        ExperimentKind::LowEpsAttack => low_eps_trial(config.scheme, rng, rec),
        ExperimentKind::EigenvalueCheck => eigenvalue_trial(config.scheme, rng, rec),
        ExperimentKind::PostselectSuite => postselect_trial(config.label, seed, rng, rec),
        ExperimentKind::BetaMixing => beta_trial(config.label, config.chain, seed, rng, rec),
    }
}

fn honest_trial(params: SchemeParams, rng: &mut ChaCha8Rng, rec: &mut ResultRecord) -> Result<()> {
    let (secret, scheme) = gen_scheme(params, rng)?;
    let honest = verify(&scheme, &MoneyState::honest(&secret), rng)?;
    let mixed = verify(&scheme, &MoneyState::fully_mixed(params.n, params.l)?, rng)?;
    rec.set("honest_q", honest.q_value)
        .set("honest_accepted", honest.accepted)
        .set("mixed_q", mixed.q_value)
        .set("mixed_accepted", mixed.accepted);
    rec.pass = honest.accepted && !mixed.accepted;
    Ok(())
}

fn clique_trial(params: SchemeParams, rng: &mut ChaCha8Rng, rec: &mut ResultRecord) -> Result<()> {
    let (secret, scheme) = gen_scheme(params, rng)?;
    let mut forgery = forge_high_eps(&scheme, rng)?;
    forgery.evaluate_against(&scheme, &secret);
    let outcome = verify(&scheme, &forgery.money, rng)?;
    let l = forgery.reports.len() as f64;
    let mean = |f: &dyn Fn(&crate::clique::RegisterReport) -> f64| forgery.reports.iter().map(f).sum::<f64>() / l;
    rec.set("failures", forgery.failures())
        .set("mean_clique_size", mean(&|r| r.clique_size as f64))
        .set("mean_acceptance_estimate", mean(&|r| r.acceptance_estimate))
        .set("mean_planted_overlap", mean(&|r| r.planted_overlap.unwrap_or(0.0)))
        .set("q_value", outcome.q_value)
        .set("accepted", outcome.accepted);
    rec.pass = outcome.accepted;
    Ok(())
}

fn low_eps_trial(params: SchemeParams, rng: &mut ChaCha8Rng, rec: &mut ResultRecord) -> Result<()> {
    let (_, scheme) = gen_scheme(params, rng)?;
    let forger = LowEpsForger::new(&scheme)?;
    let (money, samples) = forger.forge(rng)?;
    let outcome = verify(&scheme, &money, rng)?;
    let analysis = forger.analyze()?;
    let l = analysis.len() as f64;
    let mean_tr = analysis.iter().map(|(a, _)| a.tr_h_rho).sum::<f64>() / l;
    let fully_mixed = samples.iter().filter(|s| s.eigen_index.is_none()).count();
    rec.set("q_value", outcome.q_value)
        .set("accepted", outcome.accepted)
        .set("mean_tr_h_rho", mean_tr)
        .set("mean_p_plus", 0.5 + 0.5 * mean_tr)
        .set("fully_mixed_registers", fully_mixed);
    rec.pass = outcome.accepted;
    Ok(())
}

fn eigenvalue_trial(params: SchemeParams, rng: &mut ChaCha8Rng, rec: &mut ResultRecord) -> Result<()> {
    let ops: Vec<PauliOp> = (0..params.m).map(|_| PauliOp::random(params.n, false, rng)).collect();
    let lambda = max_eigenvalue_check(&ops)?;
    let b = signed_matrix(&ops)?;
    let bound = 10.0 * (params.m as f64).sqrt();
    rec.set("lambda_max", lambda).set("bound", bound).set("trace_b2", b.norm_squared());
    rec.pass = lambda <= bound;
    Ok(())
}

fn verifier_for(label: LabelParams, seed: u64) -> Result<MarkovVerifier> {
    let scheme = make_label_scheme(label.n, label.s, label.d, seed)?;
    build_verifier(&scheme, label.r.unwrap_or(1))
}

fn postselect_trial(label: LabelParams, seed: u64, rng: &mut ChaCha8Rng, rec: &mut ResultRecord) -> Result<()> {
    let mut verifier = verifier_for(label, seed)?;
    let note = mint_from_table(verifier.labels(), rng)?;
    let analysis = component_analysis(&verifier, note.label)?;
    let r = label.r.or_else(|| analysis.default_iterations()).unwrap_or(200);
    verifier = verifier.with_iterations(r)?;
    let mv = verifier.apply_m(&note.state)?;
    let residual = mv.iter().zip(&note.state).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let p = verifier.acceptance_probability(note.label, &note.state)?;
    rec.set("label", note.label as i64)
        .set("support_size", note.support_size)
        .set("iterations", r)
        .set("eigen_residual", residual)
        .set("acceptance_probability", p)
        .set("components", analysis.components.len())
        .set("unit_eigenspace_dim", analysis.unit_eigenspace_dim)
        .set("second_eigenvalue", analysis.second_eigenvalue.unwrap_or(f64::NAN));
    let mut pass = residual <= 1e-10 && (p - 1.0).abs() <= 1e-9 && analysis.unit_eigenspace_dim == analysis.components.len();
    if label.n <= KRAUS_LIMIT {
        let dev = kraus_equivalence_check(&verifier)?;
        rec.set("kraus_deviation", dev);
        pass &= dev <= 1e-10;
    }
    rec.pass = pass;
    Ok(())
}

fn beta_trial(label: LabelParams, chain: ChainParams, seed: u64, rng: &mut ChaCha8Rng, rec: &mut ResultRecord) -> Result<()> {
    let scheme = make_label_scheme(label.n, label.s, label.d, seed)?;
    let n = label.n;
    let start: u128 = if chain.frozen_start {
        let verifier = build_verifier(&scheme, 1)?;
        let frozen = verifier.frozen_strings();
        if frozen.is_empty() {
            return Err(Error::AttackFailure("scheme has no frozen strings".into()));
        }
        frozen[rng.gen_range(0..frozen.len())] as u128
    } else {
        rng.gen::<u128>() & ((1u128 << n) - 1)
    };
    let target = scheme.label(start)?;
    let steps = chain.steps.unwrap_or_else(|| default_chain_steps(n));
    let report = beta_chain_mixing(&scheme, target, chain.beta, steps, start, rng)?;
    rec.set("beta", chain.beta)
        .set("steps", steps)
        .set("acceptance_rate", report.acceptance_rate)
        .set("autocorrelation_time", report.autocorrelation_time)
        .set("stalled", report.stalled)
        .set("final_cost", report.final_cost as i64);
    if let Some(tv) = report.tv_distance {
        rec.set("tv_distance", tv);
    }
    rec.pass = !report.stalled;
    Ok(())
}

/// `⌈10·n·ln 2ⁿ⌉`.
pub fn default_chain_steps(n: usize) -> usize {
    (10.0 * n as f64 * (n as f64 * std::f64::consts::LN_2)).ceil() as usize
}
