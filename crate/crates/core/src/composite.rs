//! Composite keys and signatures: several algorithms under one OID, checked
//! with AND logic.
//!
//! The public key is a `SEQUENCE OF SubjectPublicKeyInfo` carried in the
//! subjectPublicKey bit string of an outer SPKI, and the signature is a
//! `SEQUENCE OF BIT STRING`, both in component order. Every component signs
//! the same message bytes with no per-component prefix.

use chrono::Utc;

use crate::alg::{
    AlgorithmIdentifier, AlgorithmSpec, CompositeSpec, KeyPairRecord, PrivateKeyInfo,
    RandomSource, Registry, SubjectPublicKeyInfo, Verdict,
};
use crate::der::{DerError, DerValue, Tag};
use crate::error::{Error, Result};

/// One component of a composite key. `private` is the component's own
/// PKCS#8 encoding when the private half is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeComponent {
    pub spec: AlgorithmSpec,
    pub spki: SubjectPublicKeyInfo,
    pub private: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeKeyMaterial {
    spec: AlgorithmSpec,
    components: Vec<CompositeComponent>,
}

impl CompositeKeyMaterial {
    pub fn new(components: Vec<CompositeComponent>) -> Result<Self> {
        let spec = AlgorithmSpec::Composite(CompositeSpec::new(
            components.iter().map(|c| c.spec.clone()).collect(),
        )?);
        Ok(Self { spec, components })
    }

    pub fn spec(&self) -> AlgorithmSpec {
        self.spec.clone()
    }

    pub fn components(&self) -> &[CompositeComponent] {
        &self.components
    }

    pub fn has_private_keys(&self) -> bool {
        self.components.iter().all(|c| c.private.is_some())
    }

    /// Payload of the outer subjectPublicKey bit string.
    pub fn public_bytes(&self) -> Vec<u8> {
        DerValue::sequence(self.components.iter().map(|c| c.spki.to_der()).collect()).encode()
    }

    pub fn from_public_bytes(registry: &Registry, bytes: &[u8]) -> Result<Self> {
        let value = DerValue::decode(bytes)?;
        let components = value
            .as_sequence()?
            .iter()
            .map(|child| {
                let spki = SubjectPublicKeyInfo::from_der(child)?;
                let spec = registry.spec_from_spki(&spki)?;
                Ok(CompositeComponent {
                    spec,
                    spki,
                    private: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn spki(&self, registry: &Registry) -> Result<SubjectPublicKeyInfo> {
        Ok(SubjectPublicKeyInfo {
            algorithm: registry.public_key_algorithm(&self.spec)?,
            subject_public_key: self.public_bytes(),
        })
    }

    pub fn from_spki(registry: &Registry, spki: &SubjectPublicKeyInfo) -> Result<Self> {
        if spki.algorithm != registry.public_key_algorithm(&self_spec_placeholder())? {
            return Err(Error::AlgorithmMismatch(format!(
                "{} is not the composite key OID",
                spki.algorithm.oid
            )));
        }
        Self::from_public_bytes(registry, &spki.subject_public_key)
    }

    /// PKCS#8 wrapper under the composite OID whose privateKey octets hold
    /// `SEQUENCE OF OneAsymmetricKey`, one per component.
    pub fn private_der(&self, registry: &Registry) -> Result<Vec<u8>> {
        let mut inner = Vec::with_capacity(self.components.len());
        for (i, c) in self.components.iter().enumerate() {
            let der = c.private.as_deref().ok_or(Error::MissingPrivateKey(i))?;
            inner.push(DerValue::decode(der)?);
        }
        Ok(PrivateKeyInfo {
            algorithm: registry.public_key_algorithm(&self.spec)?,
            private_key: DerValue::sequence(inner).encode(),
        }
        .encode())
    }

    /// Accepts the PKCS#8 wrapper written by [`Self::private_der`] as well as
    /// a bare `SEQUENCE OF OneAsymmetricKey`.
    pub fn from_private_der(registry: &Registry, der: &[u8]) -> Result<Self> {
        let value = DerValue::decode(der)?;
        let fields = value.as_sequence()?;
        let list = if fields.first().map(DerValue::tag) == Some(Tag::SEQUENCE) {
            value.clone()
        } else {
            let info = PrivateKeyInfo::from_der(&value)?;
            if registry.algorithm_name(&info.algorithm.oid) != Some("composite") {
                return Err(Error::KeyMismatch("composite".into()));
            }
            DerValue::decode(&info.private_key)?
        };
        let components = list
            .as_sequence()?
            .iter()
            .map(|child| {
                let key = registry.keypair_from_private(&child.encode())?;
                if key.spec.family() == crate::alg::Family::Composite {
                    return Err(Error::NestedComposite);
                }
                Ok(CompositeComponent {
                    spki: registry.spki_for(&key)?,
                    spec: key.spec,
                    private: Some(key.private),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn to_keypair(&self, registry: &Registry) -> Result<KeyPairRecord> {
        Ok(KeyPairRecord {
            spec: self.spec(),
            public: self.public_bytes(),
            private: self.private_der(registry)?,
            created_at: Utc::now(),
        })
    }

    pub fn from_keypair(registry: &Registry, key: &KeyPairRecord) -> Result<Self> {
        let material = Self::from_private_der(registry, &key.private)?;
        if material.spec != key.spec || material.public_bytes() != key.public {
            return Err(Error::KeyMismatch(key.spec.to_string()));
        }
        Ok(material)
    }
}

fn self_spec_placeholder() -> AlgorithmSpec {
    // Any composite spec yields the shared composite key algorithm.
    AlgorithmSpec::composite(vec![
        AlgorithmSpec::Ecdsa(crate::alg::EcCurve::P256),
        AlgorithmSpec::Ecdsa(crate::alg::EcCurve::P256),
    ])
    .expect("two components")
}

/// `SEQUENCE OF BIT STRING`, one part per key component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeSignatureValue {
    pub parts: Vec<Vec<u8>>,
}

impl CompositeSignatureValue {
    pub fn to_der(&self) -> DerValue {
        DerValue::sequence(self.parts.iter().map(|p| DerValue::bit_string(p)).collect())
    }

    pub fn to_der_bytes(&self) -> Vec<u8> {
        self.to_der().encode()
    }

    pub fn from_der(value: &DerValue) -> Result<Self, DerError> {
        let parts = value
            .as_sequence()?
            .iter()
            .map(|p| p.as_bit_string().map(<[u8]>::to_vec))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { parts })
    }

    pub fn from_der_bytes(bytes: &[u8]) -> Result<Self, DerError> {
        Self::from_der(&DerValue::decode(bytes)?)
    }
}

/// Per-component verdicts plus the AND-combined result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeVerification {
    /// One verdict per key component; positions without a matching
    /// signature part are `Invalid`.
    pub components: Vec<Verdict>,
    /// `false` when the part count differs from the component count.
    pub structure_ok: bool,
    pub overall: bool,
}

pub fn composite_keygen(
    registry: &Registry,
    specs: &[AlgorithmSpec],
    rng: &mut dyn RandomSource,
) -> Result<CompositeKeyMaterial> {
    CompositeSpec::new(specs.to_vec())?;
    let components = specs
        .iter()
        .map(|spec| {
            let key = registry.generate_keypair(spec, rng)?;
            Ok(CompositeComponent {
                spki: registry.spki_for(&key)?,
                spec: key.spec,
                private: Some(key.private),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CompositeKeyMaterial::new(components)
}

pub fn composite_sign(
    registry: &Registry,
    key: &CompositeKeyMaterial,
    message: &[u8],
) -> Result<CompositeSignatureValue> {
    let parts = key
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let private = c.private.as_deref().ok_or(Error::MissingPrivateKey(i))?;
            registry.sign(&c.spec, private, message)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompositeSignatureValue { parts })
}

pub fn composite_verify(
    registry: &Registry,
    key: &CompositeKeyMaterial,
    message: &[u8],
    signature: &CompositeSignatureValue,
) -> CompositeVerification {
    let structure_ok = signature.parts.len() == key.components.len();
    let components: Vec<Verdict> = key
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| match signature.parts.get(i) {
            Some(part) => {
                registry.verdict(&c.spec, &c.spki.subject_public_key, message, part)
            }
            None => Verdict::Invalid,
        })
        .collect();
    let overall = structure_ok && components.iter().all(|v| v.is_valid());
    CompositeVerification {
        components,
        structure_ok,
        overall,
    }
}

/// Composite verification against a raw signature field. Undecodable
/// signatures count as invalid in every position.
pub fn composite_verify_bytes(
    registry: &Registry,
    key: &CompositeKeyMaterial,
    message: &[u8],
    signature: &[u8],
) -> CompositeVerification {
    match CompositeSignatureValue::from_der_bytes(signature) {
        Ok(sig) => composite_verify(registry, key, message, &sig),
        Err(_) => CompositeVerification {
            components: vec![Verdict::Invalid; key.components.len()],
            structure_ok: false,
            overall: false,
        },
    }
}

/// The outer AlgorithmIdentifier used on composite public keys and
/// signatures.
pub fn composite_algorithm(registry: &Registry) -> Result<AlgorithmIdentifier> {
    registry.signature_algorithm(&self_spec_placeholder())
}
