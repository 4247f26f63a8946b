//! Classical simulation of stabilizer quantum money, the two attacks that
//! forge it, and a postselection money scheme verified by a Markov chain.
//!
//! Module map:
//! - [`pauli`] and [`stabilizer`]: Pauli operators and stabilizer states.
//! - [`money`]: the stabilizer money scheme and its verifier.
//! - [`clique`]: the high-ε forgery through planted-clique recovery.
//! - [`phase`]: the low-ε forgery through phase estimation and rejection.
//! - [`postselect`]: label-postselected money and its Markov-chain verifier.
//! - [`harness`]: seeded experiments, scheme files and result output.

pub mod clique;
pub mod eigen;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod money;
pub mod pauli;
pub mod phase;
pub mod postselect;
pub mod stabilizer;

pub use nalgebra::Complex;
pub type Complex64 = Complex<f64>;

pub use error::{Error, Result};
pub use money::{gen_scheme, honest_money, verify, MoneyScheme, MoneyState, Register, SchemeParams, SecretKey};
pub use pauli::{Pauli1, PauliOp};
pub use stabilizer::StabilizerState;
