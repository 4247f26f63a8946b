//! Generates a scheme and verifies honest and fully mixed money.

use qmoney::money::expected_q;
use qmoney::{gen_scheme, verify, MoneyState, SchemeParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qmoney::Result<()> {
    let params = SchemeParams::new(8, 64, 1024, 0.25)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (secret, scheme) = gen_scheme(params, &mut rng)?;
    println!("scheme n={} m={} l={} ε={} (planted per register ≈ {})", params.n, params.m, params.l, params.epsilon, params.expected_planted());

    let honest = MoneyState::honest(&secret);
    let mixed = MoneyState::fully_mixed(params.n, params.l)?;
    println!("expected Q: honest {:.4}, fully mixed {:.4}", expected_q(&scheme, &honest)?, expected_q(&scheme, &mixed)?);

    let trials = 50;
    let mut accepted = [0; 2];
    for _ in 0..trials {
        accepted[0] += verify(&scheme, &honest, &mut rng)?.accepted as usize;
        accepted[1] += verify(&scheme, &mixed, &mut rng)?.accepted as usize;
    }
    println!("accepted over {trials} verifications: honest {}, fully mixed {}", accepted[0], accepted[1]);
    Ok(())
}
