use chrono::{DateTime, Utc};

use super::AlgorithmSpec;
use crate::der::{DerError, DerValue, ObjectIdentifier};
use crate::error::{Error, Result};

/// `AlgorithmIdentifier ::= SEQUENCE { algorithm OID, parameters ANY OPTIONAL }`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgorithmIdentifier {
    pub oid: ObjectIdentifier,
    pub parameters: Option<DerValue>,
}

impl AlgorithmIdentifier {
    pub fn new(oid: ObjectIdentifier) -> Self {
        Self {
            oid,
            parameters: None,
        }
    }

    pub fn with_parameters(oid: ObjectIdentifier, parameters: DerValue) -> Self {
        Self {
            oid,
            parameters: Some(parameters),
        }
    }

    pub fn to_der(&self) -> DerValue {
        let mut children = vec![DerValue::oid(&self.oid)];
        children.extend(self.parameters.clone());
        DerValue::sequence(children)
    }

    pub fn from_der(value: &DerValue) -> Result<Self, DerError> {
        match value.as_sequence()? {
            [oid] => Ok(Self::new(oid.as_oid()?)),
            [oid, params] => Ok(Self::with_parameters(oid.as_oid()?, params.clone())),
            _ => Err(DerError::Malformed("AlgorithmIdentifier".into())),
        }
    }
}

/// `SubjectPublicKeyInfo ::= SEQUENCE { algorithm, subjectPublicKey BIT STRING }`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubjectPublicKeyInfo {
    pub algorithm: AlgorithmIdentifier,
    pub subject_public_key: Vec<u8>,
}

impl SubjectPublicKeyInfo {
    pub fn to_der(&self) -> DerValue {
        DerValue::sequence(vec![
            self.algorithm.to_der(),
            DerValue::bit_string(&self.subject_public_key),
        ])
    }

    pub fn from_der(value: &DerValue) -> Result<Self, DerError> {
        match value.as_sequence()? {
            [alg, key] => Ok(Self {
                algorithm: AlgorithmIdentifier::from_der(alg)?,
                subject_public_key: key.as_bit_string()?.to_vec(),
            }),
            _ => Err(DerError::Malformed("SubjectPublicKeyInfo".into())),
        }
    }

    pub fn to_der_bytes(&self) -> Vec<u8> {
        self.to_der().encode()
    }

    pub fn from_der_bytes(bytes: &[u8]) -> Result<Self, DerError> {
        Self::from_der(&DerValue::decode(bytes)?)
    }
}

/// A generated or loaded key pair.
///
/// `public` holds the subjectPublicKey bit-string payload and `private` the
/// complete DER `OneAsymmetricKey` (PKCS#8) structure.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyPairRecord {
    pub spec: AlgorithmSpec,
    pub public: Vec<u8>,
    pub private: Vec<u8>,
    pub created_at: DateTime<Utc>,
}

impl std::fmt::Debug for KeyPairRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyPairRecord")
            .field("spec", &self.spec.to_string())
            .field("public_len", &self.public.len())
            .field("created_at", &self.created_at)
            .finish_non_exhaustive()
    }
}

/// `OneAsymmetricKey` without the optional attributes and public key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct PrivateKeyInfo {
    pub algorithm: AlgorithmIdentifier,
    pub private_key: Vec<u8>,
}

impl PrivateKeyInfo {
    pub fn to_der(&self) -> DerValue {
        DerValue::sequence(vec![
            DerValue::integer_u64(0),
            self.algorithm.to_der(),
            DerValue::octet_string(self.private_key.clone()),
        ])
    }

    pub fn encode(&self) -> Vec<u8> {
        self.to_der().encode()
    }

    pub fn from_der(value: &DerValue) -> Result<Self> {
        let bad = |m: &str| Error::MalformedKey(format!("PKCS#8: {m}"));
        let fields = value.as_sequence().map_err(|_| bad("not a SEQUENCE"))?;
        if fields.len() < 3 {
            return Err(bad("missing fields"));
        }
        let version = fields[0].as_u64().map_err(|_| bad("version"))?;
        if version > 1 {
            return Err(bad("unsupported version"));
        }
        Ok(Self {
            algorithm: AlgorithmIdentifier::from_der(&fields[1])?,
            private_key: fields[2]
                .as_octet_string()
                .map_err(|_| bad("privateKey"))?
                .to_vec(),
        })
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let value =
            DerValue::decode(bytes).map_err(|e| Error::MalformedKey(format!("PKCS#8: {e}")))?;
        Self::from_der(&value)
    }
}
