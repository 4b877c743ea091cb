use sha2::{Digest, Sha256};

use crate::der::{oid, DerError, DerValue, ObjectIdentifier};
use crate::error::{Error, Result};

pub const SUBJECT_KEY_IDENTIFIER: &str = "2.5.29.14";
pub const KEY_USAGE: &str = "2.5.29.15";
pub const SUBJECT_ALT_NAME: &str = "2.5.29.17";
pub const BASIC_CONSTRAINTS: &str = "2.5.29.19";
pub const AUTHORITY_KEY_IDENTIFIER: &str = "2.5.29.35";
pub const EXTENDED_KEY_USAGE: &str = "2.5.29.37";
pub const SUBJECT_ALT_PUBLIC_KEY_INFO: &str = "2.5.29.72";
pub const ALT_SIGNATURE_ALGORITHM: &str = "2.5.29.73";
pub const ALT_SIGNATURE_VALUE: &str = "2.5.29.74";
pub const DELTA_CERTIFICATE_DESCRIPTOR: &str = "2.16.840.1.114027.80.6.1";

const KNOWN: &[(&str, &str)] = &[
    (SUBJECT_KEY_IDENTIFIER, "subjectKeyIdentifier"),
    (KEY_USAGE, "keyUsage"),
    (SUBJECT_ALT_NAME, "subjectAltName"),
    (BASIC_CONSTRAINTS, "basicConstraints"),
    (AUTHORITY_KEY_IDENTIFIER, "authorityKeyIdentifier"),
    (EXTENDED_KEY_USAGE, "extKeyUsage"),
    (SUBJECT_ALT_PUBLIC_KEY_INFO, "subjectAltPublicKeyInfo"),
    (ALT_SIGNATURE_ALGORITHM, "altSignatureAlgorithm"),
    (ALT_SIGNATURE_VALUE, "altSignatureValue"),
    (DELTA_CERTIFICATE_DESCRIPTOR, "deltaCertificateDescriptor"),
];

/// Display name of a well-known extension.
pub fn extension_name(id: &ObjectIdentifier) -> Option<&'static str> {
    KNOWN.iter().find(|(o, _)| oid(o) == *id).map(|(_, n)| *n)
}

/// One X.509 v3 extension. `value` is the DER carried in `extnValue`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Extension {
    pub oid: ObjectIdentifier,
    pub critical: bool,
    pub value: Vec<u8>,
}

impl Extension {
    /// Builds an extension from a structured value.
    pub fn new(oid: ObjectIdentifier, critical: bool, value: &DerValue) -> Self {
        Self {
            oid,
            critical,
            value: value.encode(),
        }
    }

    /// Builds an extension from pre-encoded bytes, which must be one DER
    /// value.
    pub fn from_encoded(oid: ObjectIdentifier, critical: bool, value: Vec<u8>) -> Result<Self> {
        DerValue::decode(&value)?;
        Ok(Self {
            oid,
            critical,
            value,
        })
    }

    pub fn to_der(&self) -> DerValue {
        let mut fields = vec![DerValue::oid(&self.oid)];
        if self.critical {
            fields.push(DerValue::boolean(true));
        }
        fields.push(DerValue::octet_string(self.value.clone()));
        DerValue::sequence(fields)
    }

    pub fn from_der(value: &DerValue) -> Result<Self, DerError> {
        let bad = || DerError::Malformed("Extension".into());
        let (id, critical, body) = match value.as_sequence()? {
            [id, body] => (id, false, body),
            [id, crit, body] => (id, crit.as_bool()?, body),
            _ => return Err(bad()),
        };
        Ok(Self {
            oid: id.as_oid()?,
            critical,
            value: body.as_octet_string()?.to_vec(),
        })
    }

    pub fn parsed_value(&self) -> Result<DerValue, DerError> {
        DerValue::decode(&self.value)
    }

    pub fn is(&self, dotted: &str) -> bool {
        self.oid == oid(dotted)
    }
}

pub fn extensions_to_der(extensions: &[Extension]) -> DerValue {
    DerValue::sequence(extensions.iter().map(Extension::to_der).collect())
}

pub fn extensions_from_der(value: &DerValue) -> Result<Vec<Extension>, DerError> {
    value.as_sequence()?.iter().map(Extension::from_der).collect()
}

/// Fails on the first repeated OID.
pub fn check_unique(extensions: &[Extension]) -> Result<()> {
    for (i, e) in extensions.iter().enumerate() {
        if extensions[..i].iter().any(|p| p.oid == e.oid) {
            return Err(Error::DuplicateExtension(e.oid.clone()));
        }
    }
    Ok(())
}

/// `basicConstraints`; `cA` is omitted (DEFAULT FALSE) for end entities.
pub fn basic_constraints(ca: bool) -> Extension {
    let fields = if ca { vec![DerValue::boolean(true)] } else { Vec::new() };
    Extension::new(oid(BASIC_CONSTRAINTS), false, &DerValue::sequence(fields))
}

/// Key identifier: SHA-256 of the subjectPublicKey bits truncated to 160
/// bits (RFC 7093 method 1).
pub fn key_identifier(subject_public_key: &[u8]) -> Vec<u8> {
    Sha256::digest(subject_public_key)[..20].to_vec()
}

pub fn subject_key_identifier(subject_public_key: &[u8]) -> Extension {
    Extension::new(
        oid(SUBJECT_KEY_IDENTIFIER),
        false,
        &DerValue::octet_string(key_identifier(subject_public_key)),
    )
}
