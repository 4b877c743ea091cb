use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use chrono::Utc;

use super::backend::{
    EcdsaBackend, MlDsaBackend, RandomSource, RsaBackend, SignatureBackend, SlhDsaBackend,
};
use super::keys::{AlgorithmIdentifier, KeyPairRecord, PrivateKeyInfo, SubjectPublicKeyInfo};
use super::oids::OidTable;
use super::spec::{AlgorithmSpec, EcCurve, Family, MlDsaLevel, SlhDsaParams, SlhHash};
use crate::composite::{self, CompositeKeyMaterial, CompositeSignatureValue};
use crate::der::{DerValue, ObjectIdentifier};
use crate::error::{Error, Result};

/// Outcome of one signature check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Valid,
    Invalid,
    /// The algorithm is not registered or has no backend; nothing was checked.
    Unsupported,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Valid
        } else {
            Verdict::Invalid
        }
    }

    pub fn is_valid(self) -> bool {
        self == Verdict::Valid
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Valid => "valid",
            Verdict::Invalid => "invalid",
            Verdict::Unsupported => "unsupported",
        })
    }
}

/// Algorithm registry: OID mapping plus one signing backend per family.
///
/// Immutable once built, so a single instance can be shared between
/// threads.
#[derive(Clone)]
pub struct Registry {
    oids: OidTable,
    backends: BTreeMap<Family, Arc<dyn SignatureBackend>>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("oids", &self.oids)
            .field("backends", &self.backends.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Registry {
    /// Built-in OID table and the default backends.
    pub fn new() -> Self {
        Self::with_oid_table(OidTable::builtin())
    }

    pub fn with_oid_table(oids: OidTable) -> Self {
        let mut backends: BTreeMap<Family, Arc<dyn SignatureBackend>> = BTreeMap::new();
        backends.insert(Family::Rsa, Arc::new(RsaBackend));
        backends.insert(Family::Ecdsa, Arc::new(EcdsaBackend));
        backends.insert(Family::MlDsa, Arc::new(MlDsaBackend));
        backends.insert(Family::SlhDsa, Arc::new(SlhDsaBackend));
        Self { oids, backends }
    }

    /// A registry with no backends at all; useful for view-only tooling and
    /// for exercising the unsupported paths.
    pub fn without_backends(oids: OidTable) -> Self {
        Self {
            oids,
            backends: BTreeMap::new(),
        }
    }

    pub fn oid_table(&self) -> &OidTable {
        &self.oids
    }

    /// Installs or replaces the backend for `family`. Composite is built
    /// from the component backends and cannot be overridden.
    pub fn register_backend(&mut self, family: Family, backend: Arc<dyn SignatureBackend>) {
        if family != Family::Composite {
            self.backends.insert(family, backend);
        }
    }

    fn backend(&self, spec: &AlgorithmSpec) -> Result<&dyn SignatureBackend> {
        self.backends
            .get(&spec.family())
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnsupportedAlgorithm(spec.to_string()))
    }

    fn lookup(&self, name: &str) -> Result<ObjectIdentifier> {
        self.oids
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownAlgorithm(name.to_string()))
    }

    /// Signature-algorithm OID for `spec`. Every composite shares one OID.
    pub fn oid_for(&self, spec: &AlgorithmSpec) -> Result<ObjectIdentifier> {
        self.lookup(&spec.signature_oid_name())
    }

    /// The `signatureAlgorithm` value used in certificates and CSRs.
    pub fn signature_algorithm(&self, spec: &AlgorithmSpec) -> Result<AlgorithmIdentifier> {
        let oid = self.oid_for(spec)?;
        Ok(match spec {
            AlgorithmSpec::Rsa { .. } => AlgorithmIdentifier::with_parameters(oid, DerValue::null()),
            _ => AlgorithmIdentifier::new(oid),
        })
    }

    /// The `algorithm` field of the SPKI and of the PKCS#8 wrapper.
    pub fn public_key_algorithm(&self, spec: &AlgorithmSpec) -> Result<AlgorithmIdentifier> {
        Ok(match spec {
            AlgorithmSpec::Rsa { .. } => {
                AlgorithmIdentifier::with_parameters(self.lookup("rsa-encryption")?, DerValue::null())
            }
            AlgorithmSpec::Ecdsa(EcCurve::P256) => AlgorithmIdentifier::with_parameters(
                self.lookup("ec-public-key")?,
                DerValue::oid(&self.lookup("secp256r1")?),
            ),
            _ => AlgorithmIdentifier::new(self.oid_for(spec)?),
        })
    }

    pub fn spki_for(&self, key: &KeyPairRecord) -> Result<SubjectPublicKeyInfo> {
        Ok(SubjectPublicKeyInfo {
            algorithm: self.public_key_algorithm(&key.spec)?,
            subject_public_key: key.public.clone(),
        })
    }

    /// Registry name of `oid`, if it has one.
    pub fn algorithm_name(&self, oid: &ObjectIdentifier) -> Option<&str> {
        self.oids.name_of(oid)
    }

    /// Whether `alg` is the signature algorithm that keys of `spec` produce.
    pub fn signature_algorithm_matches(&self, spec: &AlgorithmSpec, alg: &AlgorithmIdentifier) -> bool {
        let Ok(oid) = self.oid_for(spec) else {
            return false;
        };
        if alg.oid != oid {
            return false;
        }
        match spec {
            AlgorithmSpec::Rsa { .. } => alg.parameters.as_ref().is_none_or(|p| *p == DerValue::null()),
            _ => alg.parameters.is_none(),
        }
    }

    /// Recovers the algorithm spec from a public key.
    pub fn spec_from_spki(&self, spki: &SubjectPublicKeyInfo) -> Result<AlgorithmSpec> {
        let oid = &spki.algorithm.oid;
        let name = self
            .algorithm_name(oid)
            .ok_or_else(|| Error::UnknownAlgorithm(oid.to_string()))?;
        match name {
            "rsa-encryption" => Ok(AlgorithmSpec::Rsa {
                bits: rsa_modulus_bits(&spki.subject_public_key)?,
            }),
            "ec-public-key" => {
                let curve = spki
                    .algorithm
                    .parameters
                    .as_ref()
                    .and_then(|p| p.as_oid().ok());
                match curve {
                    Some(c) if Some(&c) == self.oids.get("secp256r1") => {
                        Ok(AlgorithmSpec::Ecdsa(EcCurve::P256))
                    }
                    Some(c) => Err(Error::UnsupportedAlgorithm(format!("elliptic curve {c}"))),
                    None => Err(Error::MalformedKey("EC key without named curve".into())),
                }
            }
            "composite" => {
                CompositeKeyMaterial::from_public_bytes(self, &spki.subject_public_key)
                    .map(|m| m.spec())
            }
            other => spec_from_signature_name(other)
                .ok_or_else(|| Error::UnknownAlgorithm(oid.to_string())),
        }
    }

    /// Spec implied by a signature AlgorithmIdentifier alone. RSA specs
    /// carry the default modulus size since the OID does not fix it.
    pub fn spec_from_signature_algorithm(&self, alg: &AlgorithmIdentifier) -> Option<AlgorithmSpec> {
        spec_from_signature_name(self.algorithm_name(&alg.oid)?)
    }

    /// Whether `alg` names a registered signature algorithm, composite
    /// included.
    pub fn is_signature_algorithm(&self, alg: &AlgorithmIdentifier) -> bool {
        self.algorithm_name(&alg.oid) == Some("composite")
            || self.spec_from_signature_algorithm(alg).is_some()
    }

    pub fn generate_keypair(
        &self,
        spec: &AlgorithmSpec,
        rng: &mut dyn RandomSource,
    ) -> Result<KeyPairRecord> {
        if let AlgorithmSpec::Composite(c) = spec {
            return composite::composite_keygen(self, c.components(), rng)?.to_keypair(self);
        }
        let generated = self.backend(spec)?.generate(spec, rng)?;
        let private = PrivateKeyInfo {
            algorithm: self.public_key_algorithm(spec)?,
            private_key: generated.private,
        }
        .encode();
        Ok(KeyPairRecord {
            spec: spec.clone(),
            public: generated.public,
            private,
            created_at: Utc::now(),
        })
    }

    /// Loads a key pair from its PKCS#8 encoding, deriving the public key.
    pub fn keypair_from_private(&self, pkcs8: &[u8]) -> Result<KeyPairRecord> {
        let info = PrivateKeyInfo::decode(pkcs8)?;
        if self.algorithm_name(&info.algorithm.oid) == Some("composite") {
            return CompositeKeyMaterial::from_private_der(self, pkcs8)?.to_keypair(self);
        }
        let spec = match self.algorithm_name(&info.algorithm.oid) {
            Some("rsa-encryption") => {
                let public = RsaBackend.public_from_private(
                    &AlgorithmSpec::Rsa { bits: 0 },
                    &info.private_key,
                )?;
                AlgorithmSpec::Rsa {
                    bits: rsa_modulus_bits(&public)?,
                }
            }
            _ => self.spec_from_spki(&SubjectPublicKeyInfo {
                algorithm: info.algorithm.clone(),
                subject_public_key: Vec::new(),
            })?,
        };
        let public = self.backend(&spec)?.public_from_private(&spec, &info.private_key)?;
        Ok(KeyPairRecord {
            spec,
            public,
            private: pkcs8.to_vec(),
            created_at: Utc::now(),
        })
    }

    /// Signs `message` with a PKCS#8-encoded private key.
    pub fn sign(&self, spec: &AlgorithmSpec, private: &[u8], message: &[u8]) -> Result<Vec<u8>> {
        if let AlgorithmSpec::Composite(_) = spec {
            let key = CompositeKeyMaterial::from_private_der(self, private)?;
            if key.spec() != *spec {
                return Err(Error::KeyMismatch(spec.to_string()));
            }
            return Ok(composite::composite_sign(self, &key, message)?.to_der_bytes());
        }
        let info = PrivateKeyInfo::decode(private)?;
        if info.algorithm != self.public_key_algorithm(spec)? {
            return Err(Error::KeyMismatch(spec.to_string()));
        }
        self.backend(spec)?.sign(spec, &info.private_key, message)
    }

    /// `Ok(false)` for any malformed input; errors only when no backend can
    /// check `spec`.
    pub fn verify(
        &self,
        spec: &AlgorithmSpec,
        public: &[u8],
        message: &[u8],
        signature: &[u8],
    ) -> Result<bool> {
        if let AlgorithmSpec::Composite(c) = spec {
            for component in c.components() {
                self.backend(component)?;
            }
            let Ok(key) = CompositeKeyMaterial::from_public_bytes(self, public) else {
                return Ok(false);
            };
            if key.spec() != *spec {
                return Ok(false);
            }
            let Ok(sig) = CompositeSignatureValue::from_der_bytes(signature) else {
                return Ok(false);
            };
            return Ok(composite::composite_verify(self, &key, message, &sig).overall);
        }
        Ok(self.backend(spec)?.verify(spec, public, message, signature))
    }

    /// Like [`Registry::verify`] but folds "no backend" into a verdict.
    pub fn verdict(&self, spec: &AlgorithmSpec, public: &[u8], message: &[u8], signature: &[u8]) -> Verdict {
        match self.verify(spec, public, message, signature) {
            Ok(ok) => Verdict::from_bool(ok),
            Err(_) => Verdict::Unsupported,
        }
    }
}

fn spec_from_signature_name(name: &str) -> Option<AlgorithmSpec> {
    if name == "rsa-sha256" {
        return Some(AlgorithmSpec::Rsa {
            bits: super::spec::RSA_DEFAULT_BITS,
        });
    }
    if name == "ecdsa-sha256" {
        return Some(AlgorithmSpec::Ecdsa(EcCurve::P256));
    }
    if let Some(set) = name.strip_prefix("ml-dsa-") {
        let level = match set {
            "44" => MlDsaLevel::L2,
            "65" => MlDsaLevel::L3,
            "87" => MlDsaLevel::L5,
            _ => return None,
        };
        return Some(AlgorithmSpec::MlDsa(level));
    }
    let rest = name.strip_prefix("slh-dsa-")?;
    let (hash, rest) = if let Some(r) = rest.strip_prefix("sha2-") {
        (SlhHash::Sha2, r)
    } else {
        (SlhHash::Shake, rest.strip_prefix("shake-")?)
    };
    let (digits, variant) = rest.split_at(rest.len().checked_sub(1)?);
    Some(AlgorithmSpec::SlhDsa(SlhDsaParams {
        hash,
        security_bits: digits.parse().ok().filter(|b| [128, 192, 256].contains(b))?,
        fast: match variant {
            "f" => true,
            "s" => false,
            _ => return None,
        },
    }))
}

/// Bit length of the modulus in a PKCS#1 `RSAPublicKey`.
fn rsa_modulus_bits(public: &[u8]) -> Result<u32> {
    let bad = || Error::MalformedKey("RSA public key".into());
    let value = DerValue::decode(public).map_err(|_| bad())?;
    let fields = value.as_sequence().map_err(|_| bad())?;
    let n = fields.first().and_then(|f| f.as_integer_bytes().ok()).ok_or_else(bad)?;
    let start = n.iter().position(|&b| b != 0).ok_or_else(bad)?;
    let n = &n[start..];
    Ok((n.len() as u32 - 1) * 8 + (8 - n[0].leading_zeros()))
}
