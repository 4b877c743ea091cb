use std::io;

use crate::der::{DerError, ObjectIdentifier};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Der(#[from] DerError),

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("invalid parameter `{param}` for {family}")]
    InvalidParameter { family: String, param: String },
    #[error("malformed algorithm spec `{0}`")]
    MalformedSpec(String),
    #[error("no signing backend available for {0}")]
    UnsupportedAlgorithm(String),
    #[error("key does not match {0}")]
    KeyMismatch(String),
    #[error("malformed key: {0}")]
    MalformedKey(String),

    #[error("unknown name attribute `{0}`")]
    UnknownAttributeKey(String),
    #[error("empty value for name attribute {0}")]
    EmptyValue(String),
    #[error("malformed name: {0}")]
    MalformedName(String),

    #[error("duplicate extension {0}")]
    DuplicateExtension(ObjectIdentifier),
    #[error("invalid validity window: notBefore must precede notAfter")]
    InvalidValidity,
    #[error("algorithm mismatch: {0}")]
    AlgorithmMismatch(String),
    #[error("not a certificate: {0}")]
    NotACertificate(String),
    #[error("not a certification request: {0}")]
    NotACsr(String),

    #[error("malformed alternative-signature extensions: {0}")]
    MalformedAltExtension(String),

    #[error("composite components may not themselves be composite")]
    NestedComposite,
    #[error("composite keys need at least 2 components, got {0}")]
    TooFewComponents(usize),
    #[error("composite keys allow at most {max} components, got {got}")]
    TooManyComponents { got: usize, max: usize },
    #[error("composite component {0} has no private key")]
    MissingPrivateKey(usize),

    #[error("certificate carries no delta certificate descriptor")]
    NoDescriptor,
    #[error("reconstructed delta certificate is inconsistent: {0}")]
    ReconstructionMismatch(String),
    #[error("conflicting delta certificate field: {0}")]
    FieldConflict(String),

    #[error("malformed PEM: {0}")]
    MalformedPem(String),
    #[error("OID table line {line}: {message}")]
    OidTable { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
