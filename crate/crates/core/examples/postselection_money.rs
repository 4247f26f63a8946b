//! Mints postselection money and verifies it with the Markov-chain verifier.

use qmoney::postselect::{build_verifier, component_analysis, make_label_scheme, mint, verify_money, LabeledMoney};
use qmoney::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qmoney::Result<()> {
    let scheme = make_label_scheme(12, 4, 2, 42)?;
    println!("subsets: {:?}", scheme.subsets());
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let note = mint(&scheme, &mut rng)?;
    println!("minted label {:04b} with {} strings in its class", note.label, note.support_size);

    let verifier = build_verifier(&scheme, 1)?;
    let analysis = component_analysis(&verifier, note.label)?;
    let r = analysis.default_iterations().unwrap_or(200);
    println!(
        "class splits into {} components; second eigenvalue {:?}; r = {r}",
        analysis.components.len(),
        analysis.second_eigenvalue
    );
    let verifier = verifier.with_iterations(r)?;
    let honest = verify_money(&verifier, &note, &mut rng)?;
    println!("honest note: acceptance probability {:.12}", honest.acceptance_probability);

    // A forgery concentrated on one string of the largest component accepts
    // with probability about 1/|component|; isolated strings accept with 1.
    let largest = analysis.components.iter().max_by_key(|c| c.len()).unwrap();
    let isolated = analysis.components.iter().filter(|c| c.len() == 1).count();
    let mut state = vec![Complex64::new(0.0, 0.0); note.state.len()];
    state[largest[0]] = Complex64::new(1.0, 0.0);
    let basis = LabeledMoney { label: note.label, state, support_size: 1 };
    let p = verify_money(&verifier, &basis, &mut rng)?.acceptance_probability;
    println!("basis-state forgery in a component of {}: acceptance probability {p:.6}", largest.len());
    println!("{isolated} isolated strings in the class would be accepted with certainty");
    Ok(())
}
