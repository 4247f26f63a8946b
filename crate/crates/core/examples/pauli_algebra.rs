//! Pauli products, commutation and stabilizer expectations.

use qmoney::{PauliOp, StabilizerState};

fn main() -> qmoney::Result<()> {
    let xz: PauliOp = "+XZ".parse().expect("valid operator");
    let zx: PauliOp = "+ZX".parse().expect("valid operator");
    let yy: PauliOp = "+YY".parse().expect("valid operator");

    println!("{xz} * {zx} = {}", xz.mul(&zx)?);
    println!("{xz} commutes with {zx}: {}", xz.commutes(&zx)?);
    println!("{xz} commutes with {yy}: {}", xz.commutes(&yy)?);

    // The Bell state is stabilized by XX and ZZ.
    let bell = StabilizerState::from_generators(vec!["+XX".parse().unwrap(), "+ZZ".parse().unwrap()])?;
    for op in ["+XX", "+ZZ", "-YY", "+ZI", "+XI"] {
        let p: PauliOp = op.parse().unwrap();
        println!("<bell|{op}|bell> = {}", bell.expectation(&p)?);
    }

    let mut rng = rand::thread_rng();
    let state = StabilizerState::random(4, &mut rng);
    let gens: Vec<String> = state.generators().iter().map(|g| g.to_string()).collect();
    println!("random 4-qubit stabilizer state: [{}]", gens.join(", "));
    let element = state.random_element(&mut rng);
    println!("random group element {element} has expectation {}", state.expectation(&element)?);
    Ok(())
}
