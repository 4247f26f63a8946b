//! Largest eigenvalue of the signed commutation matrix of random Pauli
//! operators against 10√m.

use qmoney::clique::{max_eigenvalue_check, signed_matrix};
use qmoney::PauliOp;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qmoney::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 64;
    for m in [100, 400, 1000] {
        let ops: Vec<PauliOp> = (0..m).map(|_| PauliOp::random(n, false, &mut rng)).collect();
        let lambda = max_eigenvalue_check(&ops)?;
        let b = signed_matrix(&ops)?;
        println!(
            "m = {m:>4}: λ_max = {lambda:>7.2}, 2√m = {:>6.2}, 10√m = {:>6.1}, Tr[B²] = {}",
            2.0 * (m as f64).sqrt(),
            10.0 * (m as f64).sqrt(),
            b.norm_squared()
        );
    }
    Ok(())
}
