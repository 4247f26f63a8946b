//! Seeded experiment runs, summaries and scheme files.

use qmoney::harness::{load_scheme, run_experiment, save_scheme, summarize, ExperimentConfig, ExperimentKind, SchemeFile};
use qmoney::{gen_scheme, SchemeParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qmoney::Result<()> {
    let mut config = ExperimentConfig::new(ExperimentKind::HonestAcceptance);
    config.trials = 10;
    config.master_seed = 2024;
    let records = run_experiment(&config)?;
    let again = run_experiment(&config)?;
    println!("rerun identical: {}", records == again);
    let summary = summarize(&records)?;
    println!("{}: pass fraction {}", summary.experiment, summary.pass_fraction);
    for (name, m) in &summary.metrics {
        println!("  {name:>16}: mean {:.4}, std {:.4}, range [{}, {}]", m.mean, m.std, m.min, m.max);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (secret, scheme) = gen_scheme(SchemeParams::new(16, 32, 8, 0.5)?, &mut rng)?;
    let file = SchemeFile { scheme, secret: Some(secret), seed: Some(5) };
    let path = std::env::temp_dir().join("qmoney-example-scheme.txt");
    save_scheme(&path, &file)?;
    println!("scheme file round trip exact: {}", load_scheme(&path)? == file);
    std::fs::remove_file(&path)?;
    Ok(())
}
