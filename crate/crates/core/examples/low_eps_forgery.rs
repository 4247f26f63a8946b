//! Forges low-ε stabilizer money by phase estimation of each register's
//! Hamiltonian.

use qmoney::money::expected_q;
use qmoney::phase::LowEpsForger;
use qmoney::{gen_scheme, verify, SchemeParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qmoney::Result<()> {
    let params = SchemeParams::new(6, 64, 128, 1.0 / 128.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (_, scheme) = gen_scheme(params, &mut rng)?;

    let forger = LowEpsForger::new(&scheme)?;
    let analysis = forger.analyze()?;
    for (_, r) in analysis.iter().take(4) {
        println!(
            "register {}: f = {:.3}, g = {:.3}, Tr[Hρ] = {:.4}, per-iteration acceptance {:.3}",
            r.register, r.f, r.g, r.tr_h_rho, r.p_iteration
        );
    }
    let mean_tr = analysis.iter().map(|(a, _)| a.tr_h_rho).sum::<f64>() / analysis.len() as f64;
    println!("mean Pr(+1) in analysis mode: {:.4}", 0.5 + 0.5 * mean_tr);

    let (money, samples) = forger.forge(&mut rng)?;
    let gave_up = samples.iter().filter(|s| s.eigen_index.is_none()).count();
    println!("sampled forgery: {gave_up} registers fell back to the fully mixed state");
    println!("expected Q {:.4} against threshold ε/2 = {}", expected_q(&scheme, &money)?, params.epsilon / 2.0);
    let accepted = (0..20).filter(|_| verify(&scheme, &money, &mut rng).map(|o| o.accepted).unwrap_or(false)).count();
    println!("forgery accepted in {accepted}/20 verifications");
    Ok(())
}
