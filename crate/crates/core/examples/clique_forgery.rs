//! Forges high-ε stabilizer money by recovering each register's planted
//! commuting set.

use qmoney::clique::forge_high_eps;
use qmoney::money::expected_q;
use qmoney::{gen_scheme, verify, SchemeParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qmoney::Result<()> {
    let params = SchemeParams::new(50, 400, 64, 0.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (secret, scheme) = gen_scheme(params, &mut rng)?;

    let mut forgery = forge_high_eps(&scheme, &mut rng)?;
    forgery.evaluate_against(&scheme, &secret);
    for r in forgery.reports.iter().take(5) {
        println!(
            "register {:>2}: {:?} clique of {} ops, {} dropped, overlap with planted {:.3}, estimated acceptance {:.3}",
            r.register,
            r.method,
            r.clique_size,
            r.dropped,
            r.planted_overlap.unwrap_or(0.0),
            r.acceptance_estimate
        );
    }
    println!("failed registers: {}/{}", forgery.failures(), params.l);
    println!("expected Q of the forgery: {:.4} (threshold ε/2 = {})", expected_q(&scheme, &forgery.money)?, params.epsilon / 2.0);
    let accepted = (0..20).filter(|_| verify(&scheme, &forgery.money, &mut rng).map(|o| o.accepted).unwrap_or(false)).count();
    println!("forgery accepted in {accepted}/20 verifications");
    Ok(())
}
