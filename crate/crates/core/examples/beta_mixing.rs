//! Mixing diagnostics of the β-weighted chain over label costs.

use qmoney::postselect::{beta_chain_mixing, build_verifier, make_label_scheme};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qmoney::Result<()> {
    let scheme = make_label_scheme(10, 6, 3, 9)?;
    let frozen = build_verifier(&scheme, 1)?.frozen_strings();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let start = frozen.first().map(|&x| x as u128).unwrap_or(0);
    let target = scheme.label(start)?;
    println!("{} frozen strings; starting at {start:010b} with target label {target:b}", frozen.len());
    for beta in [0.0, 1.0, 5.0, 20.0] {
        let report = beta_chain_mixing(&scheme, target, beta, 2000, start, &mut rng)?;
        println!(
            "β = {beta:>4}: acceptance {:.3}, τ = {:>8.2}, stalled = {}, TV = {:.2e}",
            report.acceptance_rate,
            report.autocorrelation_time,
            report.stalled,
            report.tv_distance.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
