//! Exact phase-estimation outcome distribution and its sampler.

use qmoney::phase::{pe_probability, pe_sample, window_probability, PhaseEstimationParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qmoney::Result<()> {
    let params = PhaseEstimationParams::new(4, 0.125)?;
    let phi = 0.3207;
    println!("r = {}, δ = {}, q = {} ancillas, {} outcomes", params.r, params.delta, params.q, params.outcomes());

    let n = params.outcomes();
    let peak = (phi * n as f64).round() as u64;
    for z in peak - 3..=peak + 3 {
        println!("P(z = {z:>3}) = {:.6}", pe_probability(phi, params.q, z));
    }
    let tol = 0.5f64.powi(params.r as i32);
    let inside = window_probability(phi, &params, phi - tol, phi + tol);
    println!("P(|φ - z/2^q| ≤ 2^-r) = {inside:.6} (bound 1 - δ = {})", 1.0 - params.delta);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let samples = 10_000;
    let hits = (0..samples)
        .filter(|_| {
            let est = pe_sample(phi, &params, &mut rng) as f64 / n as f64;
            let d = (est - phi).abs();
            d.min(1.0 - d) <= tol
        })
        .count();
    println!("sampled: {hits}/{samples} estimates within 2^-r");
    Ok(())
}
