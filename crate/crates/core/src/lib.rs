pub mod error;
pub mod fermion;
pub mod io;
pub mod ir;
pub mod linalg;
pub mod pauli;
pub mod qpe;
pub mod report;
pub mod resources;
pub mod sim;
pub mod spin;
pub mod trotter;

pub use error::{Error, ErrorClass, Result};
pub use pauli::{commutator, Pauli, PauliString, PauliSum, PauliTerm, Phase};
