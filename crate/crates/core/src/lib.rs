//! Generation, inspection and verification of classical, post-quantum,
//! Catalyst hybrid, composite and chameleon X.509 certificates.

pub mod alg;
pub mod catalyst;
pub mod chameleon;
pub mod cli;
pub mod composite;
pub mod der;
pub mod error;
pub mod pem;
pub mod x509;

pub use error::{Error, Result};
