//! Signing primitives behind a pluggable interface.
//!
//! The registry only ever talks to [`SignatureBackend`]; the RustCrypto
//! implementations below are the defaults.

use std::convert::Infallible;

use rand_core::{TryCryptoRng, TryRng};
use signature::{SignatureEncoding, Signer, Verifier};

use super::{AlgorithmSpec, EcCurve, MlDsaLevel, SlhDsaParams, SlhHash};
use crate::der::{DerValue, Tag};
use crate::error::{Error, Result};

/// Source of key-generation randomness. Implemented for every
/// [`rand_core::CryptoRng`].
pub trait RandomSource {
    fn fill_bytes(&mut self, dst: &mut [u8]);
}

impl<R: rand_core::CryptoRng + ?Sized> RandomSource for R {
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        rand_core::Rng::fill_bytes(self, dst)
    }
}

/// Operating-system randomness.
pub fn system_rng() -> impl RandomSource {
    rand_core::UnwrapErr(getrandom::SysRng)
}

/// Seeded ChaCha20 stream for reproducible key generation in tests.
pub fn seeded_rng(seed: u64) -> rand_chacha::ChaCha20Rng {
    <rand_chacha::ChaCha20Rng as rand_core::SeedableRng>::seed_from_u64(seed)
}

/// Adapts a `dyn RandomSource` to the `rand_core` traits the primitive
/// crates expect.
struct RngAdapter<'a>(&'a mut dyn RandomSource);

impl TryRng for RngAdapter<'_> {
    type Error = Infallible;

    fn try_next_u32(&mut self) -> Result<u32, Infallible> {
        let mut b = [0u8; 4];
        self.0.fill_bytes(&mut b);
        Ok(u32::from_le_bytes(b))
    }

    fn try_next_u64(&mut self) -> Result<u64, Infallible> {
        let mut b = [0u8; 8];
        self.0.fill_bytes(&mut b);
        Ok(u64::from_le_bytes(b))
    }

    fn try_fill_bytes(&mut self, dst: &mut [u8]) -> Result<(), Infallible> {
        self.0.fill_bytes(dst);
        Ok(())
    }
}

impl TryCryptoRng for RngAdapter<'_> {}

/// Raw key material from a backend: the subjectPublicKey payload and the
/// `privateKey` OCTET STRING payload of the PKCS#8 wrapper.
#[derive(Clone)]
pub struct GeneratedKey {
    pub public: Vec<u8>,
    pub private: Vec<u8>,
}

/// Key generation, signing and verification for one algorithm family.
pub trait SignatureBackend: Send + Sync {
    fn generate(&self, spec: &AlgorithmSpec, rng: &mut dyn RandomSource) -> Result<GeneratedKey>;

    fn public_from_private(&self, spec: &AlgorithmSpec, private: &[u8]) -> Result<Vec<u8>>;

    fn sign(&self, spec: &AlgorithmSpec, private: &[u8], message: &[u8]) -> Result<Vec<u8>>;

    /// `false` for any malformed key or signature input.
    fn verify(&self, spec: &AlgorithmSpec, public: &[u8], message: &[u8], signature: &[u8]) -> bool;
}

fn wrong_spec(backend: &str, spec: &AlgorithmSpec) -> Error {
    Error::UnsupportedAlgorithm(format!("{spec} (handed to {backend} backend)"))
}

fn bad_key(what: &str) -> Error {
    Error::KeyMismatch(what.to_string())
}

// RSA PKCS#1 v1.5 with SHA-256.
pub struct RsaBackend;

impl SignatureBackend for RsaBackend {
    fn generate(&self, spec: &AlgorithmSpec, rng: &mut dyn RandomSource) -> Result<GeneratedKey> {
        use rsa::pkcs1::{EncodeRsaPrivateKey, EncodeRsaPublicKey};
        let AlgorithmSpec::Rsa { bits } = spec else {
            return Err(wrong_spec("RSA", spec));
        };
        let key = rsa::RsaPrivateKey::new(&mut RngAdapter(rng), *bits as usize)
            .map_err(|e| Error::UnsupportedAlgorithm(format!("RSA key generation: {e}")))?;
        let private = key
            .to_pkcs1_der()
            .map_err(|e| Error::MalformedKey(e.to_string()))?
            .as_bytes()
            .to_vec();
        let public = key
            .to_public_key()
            .to_pkcs1_der()
            .map_err(|e| Error::MalformedKey(e.to_string()))?
            .into_vec();
        Ok(GeneratedKey { public, private })
    }

    fn public_from_private(&self, _spec: &AlgorithmSpec, private: &[u8]) -> Result<Vec<u8>> {
        use rsa::pkcs1::{DecodeRsaPrivateKey, EncodeRsaPublicKey};
        let key = rsa::RsaPrivateKey::from_pkcs1_der(private).map_err(|_| bad_key("RSA"))?;
        Ok(key
            .to_public_key()
            .to_pkcs1_der()
            .map_err(|e| Error::MalformedKey(e.to_string()))?
            .into_vec())
    }

    fn sign(&self, _spec: &AlgorithmSpec, private: &[u8], message: &[u8]) -> Result<Vec<u8>> {
        use rsa::pkcs1::DecodeRsaPrivateKey;
        let key = rsa::RsaPrivateKey::from_pkcs1_der(private).map_err(|_| bad_key("RSA"))?;
        let signer = rsa::pkcs1v15::SigningKey::<sha2::Sha256>::new(key);
        Ok(signer.sign(message).to_vec())
    }

    fn verify(&self, _spec: &AlgorithmSpec, public: &[u8], message: &[u8], signature: &[u8]) -> bool {
        use rsa::pkcs1::DecodeRsaPublicKey;
        let Ok(key) = rsa::RsaPublicKey::from_pkcs1_der(public) else {
            return false;
        };
        let Ok(sig) = rsa::pkcs1v15::Signature::try_from(signature) else {
            return false;
        };
        rsa::pkcs1v15::VerifyingKey::<sha2::Sha256>::new(key)
            .verify(message, &sig)
            .is_ok()
    }
}

// ECDSA over P-256 with SHA-256; private keys are SEC1 ECPrivateKey.
pub struct EcdsaBackend;

impl EcdsaBackend {
    fn signing_key(private: &[u8]) -> Result<p256::ecdsa::SigningKey> {
        let value = DerValue::decode(private).map_err(|_| bad_key("ECDSA"))?;
        let fields = value.as_sequence().map_err(|_| bad_key("ECDSA"))?;
        let scalar = fields
            .get(1)
            .and_then(|f| f.as_octet_string().ok())
            .ok_or_else(|| bad_key("ECDSA"))?;
        p256::ecdsa::SigningKey::from_slice(scalar).map_err(|_| bad_key("ECDSA"))
    }

    fn public_bytes(key: &p256::ecdsa::SigningKey) -> Vec<u8> {
        key.verifying_key().to_sec1_point(false).as_bytes().to_vec()
    }
}

impl SignatureBackend for EcdsaBackend {
    fn generate(&self, spec: &AlgorithmSpec, rng: &mut dyn RandomSource) -> Result<GeneratedKey> {
        if *spec != AlgorithmSpec::Ecdsa(EcCurve::P256) {
            return Err(wrong_spec("ECDSA", spec));
        }
        let key = loop {
            let mut scalar = [0u8; 32];
            rng.fill_bytes(&mut scalar);
            if let Ok(k) = p256::ecdsa::SigningKey::from_slice(&scalar) {
                break k;
            }
        };
        let public = Self::public_bytes(&key);
        let private = DerValue::sequence(vec![
            DerValue::integer_u64(1),
            DerValue::octet_string(key.to_bytes().to_vec()),
            DerValue::explicit(1, DerValue::bit_string(&public)),
        ])
        .encode();
        Ok(GeneratedKey { public, private })
    }

    fn public_from_private(&self, _spec: &AlgorithmSpec, private: &[u8]) -> Result<Vec<u8>> {
        Ok(Self::public_bytes(&Self::signing_key(private)?))
    }

    fn sign(&self, _spec: &AlgorithmSpec, private: &[u8], message: &[u8]) -> Result<Vec<u8>> {
        let key = Self::signing_key(private)?;
        let sig: p256::ecdsa::Signature = key.sign(message);
        Ok(sig.to_der().as_bytes().to_vec())
    }

    fn verify(&self, _spec: &AlgorithmSpec, public: &[u8], message: &[u8], signature: &[u8]) -> bool {
        let Ok(key) = p256::ecdsa::VerifyingKey::from_sec1_bytes(public) else {
            return false;
        };
        let Ok(sig) = p256::ecdsa::Signature::from_der(signature) else {
            return false;
        };
        key.verify(message, &sig).is_ok()
    }
}

// ML-DSA (pure, empty context). Private keys use the 32-byte seed form
// `[0] IMPLICIT OCTET STRING`.
pub struct MlDsaBackend;

const ML_DSA_SEED_TAG: Tag = Tag::context(0);

fn ml_dsa_seed(private: &[u8]) -> Result<[u8; 32]> {
    let value = DerValue::decode(private).map_err(|_| bad_key("ML-DSA"))?;
    if value.tag() != ML_DSA_SEED_TAG {
        return Err(Error::MalformedKey(
            "only seed-form ML-DSA private keys are supported".into(),
        ));
    }
    value
        .bytes()
        .and_then(|b| <[u8; 32]>::try_from(b).ok())
        .ok_or_else(|| bad_key("ML-DSA seed"))
}

mod mldsa_impl {
    use ml_dsa::{EncodedVerifyingKey, KeyExport, MlDsaParams, Signature, SigningKey, VerifyingKey};
    use signature::{Keypair, Signer, Verifier};

    pub fn public<P: MlDsaParams>(seed: &[u8; 32]) -> Vec<u8> {
        let sk = SigningKey::<P>::from_seed(&(*seed).into());
        sk.verifying_key().encode().to_vec()
    }

    pub fn sign<P: MlDsaParams>(seed: &[u8; 32], msg: &[u8]) -> Vec<u8> {
        let sk = SigningKey::<P>::from_seed(&(*seed).into());
        let sig: Signature<P> = sk.sign(msg);
        sig.encode().to_vec()
    }

    pub fn verify<P: MlDsaParams>(public: &[u8], msg: &[u8], sig: &[u8]) -> bool {
        let Ok(enc) = EncodedVerifyingKey::<P>::try_from(public) else {
            return false;
        };
        let vk = VerifyingKey::<P>::decode(&enc);
        // Reject non-canonical public key encodings.
        if vk.to_bytes().as_slice() != public {
            return false;
        }
        let Ok(sig) = Signature::<P>::try_from(sig) else {
            return false;
        };
        vk.verify(msg, &sig).is_ok()
    }
}

macro_rules! ml_dsa_dispatch {
    ($level:expr, $f:ident ( $($arg:expr),* )) => {
        match $level {
            MlDsaLevel::L2 => mldsa_impl::$f::<ml_dsa::MlDsa44>($($arg),*),
            MlDsaLevel::L3 => mldsa_impl::$f::<ml_dsa::MlDsa65>($($arg),*),
            MlDsaLevel::L5 => mldsa_impl::$f::<ml_dsa::MlDsa87>($($arg),*),
        }
    };
}

impl SignatureBackend for MlDsaBackend {
    fn generate(&self, spec: &AlgorithmSpec, rng: &mut dyn RandomSource) -> Result<GeneratedKey> {
        let AlgorithmSpec::MlDsa(level) = spec else {
            return Err(wrong_spec("ML-DSA", spec));
        };
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        let public = ml_dsa_dispatch!(level, public(&seed));
        let private = DerValue::primitive(ML_DSA_SEED_TAG, seed.to_vec()).encode();
        Ok(GeneratedKey { public, private })
    }

    fn public_from_private(&self, spec: &AlgorithmSpec, private: &[u8]) -> Result<Vec<u8>> {
        let AlgorithmSpec::MlDsa(level) = spec else {
            return Err(wrong_spec("ML-DSA", spec));
        };
        let seed = ml_dsa_seed(private)?;
        Ok(ml_dsa_dispatch!(level, public(&seed)))
    }

    fn sign(&self, spec: &AlgorithmSpec, private: &[u8], message: &[u8]) -> Result<Vec<u8>> {
        let AlgorithmSpec::MlDsa(level) = spec else {
            return Err(wrong_spec("ML-DSA", spec));
        };
        let seed = ml_dsa_seed(private)?;
        Ok(ml_dsa_dispatch!(level, sign(&seed, message)))
    }

    fn verify(&self, spec: &AlgorithmSpec, public: &[u8], message: &[u8], signature: &[u8]) -> bool {
        match spec {
            AlgorithmSpec::MlDsa(level) => ml_dsa_dispatch!(level, verify(public, message, signature)),
            _ => false,
        }
    }
}

// SLH-DSA (pure, empty context, deterministic signing). Private keys are
// the raw 4n-byte FIPS 205 encoding.
pub struct SlhDsaBackend;

mod slhdsa_impl {
    use slh_dsa::{ParameterSet, Signature, SigningKey, VerifyingKey};
    use signature::{Signer, Verifier};

    use super::{RandomSource, RngAdapter};

    pub fn generate<P: ParameterSet>(rng: &mut dyn RandomSource) -> (Vec<u8>, Vec<u8>) {
        let sk = SigningKey::<P>::new(&mut RngAdapter(rng));
        let vk: &VerifyingKey<P> = sk.as_ref();
        (vk.to_vec(), sk.to_vec())
    }

    pub fn public<P: ParameterSet>(private: &[u8]) -> Option<Vec<u8>> {
        let sk = SigningKey::<P>::try_from(private).ok()?;
        let vk: &VerifyingKey<P> = sk.as_ref();
        Some(vk.to_vec())
    }

    pub fn sign<P: ParameterSet>(private: &[u8], msg: &[u8]) -> Option<Vec<u8>> {
        let sk = SigningKey::<P>::try_from(private).ok()?;
        let sig: Signature<P> = sk.sign(msg);
        Some(sig.to_vec())
    }

    pub fn verify<P: ParameterSet>(public: &[u8], msg: &[u8], sig: &[u8]) -> bool {
        let Ok(vk) = VerifyingKey::<P>::try_from(public) else {
            return false;
        };
        let Ok(sig) = Signature::<P>::try_from(sig) else {
            return false;
        };
        vk.verify(msg, &sig).is_ok()
    }
}

macro_rules! slh_dispatch {
    ($params:expr, $f:ident ( $($arg:expr),* )) => {{
        let p: &SlhDsaParams = $params;
        match (p.hash, p.security_bits, p.fast) {
            (SlhHash::Sha2, 128, false) => Some(slhdsa_impl::$f::<slh_dsa::Sha2_128s>($($arg),*)),
            (SlhHash::Sha2, 128, true) => Some(slhdsa_impl::$f::<slh_dsa::Sha2_128f>($($arg),*)),
            (SlhHash::Sha2, 192, false) => Some(slhdsa_impl::$f::<slh_dsa::Sha2_192s>($($arg),*)),
            (SlhHash::Sha2, 192, true) => Some(slhdsa_impl::$f::<slh_dsa::Sha2_192f>($($arg),*)),
            (SlhHash::Sha2, 256, false) => Some(slhdsa_impl::$f::<slh_dsa::Sha2_256s>($($arg),*)),
            (SlhHash::Sha2, 256, true) => Some(slhdsa_impl::$f::<slh_dsa::Sha2_256f>($($arg),*)),
            (SlhHash::Shake, 128, false) => Some(slhdsa_impl::$f::<slh_dsa::Shake128s>($($arg),*)),
            (SlhHash::Shake, 128, true) => Some(slhdsa_impl::$f::<slh_dsa::Shake128f>($($arg),*)),
            (SlhHash::Shake, 192, false) => Some(slhdsa_impl::$f::<slh_dsa::Shake192s>($($arg),*)),
            (SlhHash::Shake, 192, true) => Some(slhdsa_impl::$f::<slh_dsa::Shake192f>($($arg),*)),
            (SlhHash::Shake, 256, false) => Some(slhdsa_impl::$f::<slh_dsa::Shake256s>($($arg),*)),
            (SlhHash::Shake, 256, true) => Some(slhdsa_impl::$f::<slh_dsa::Shake256f>($($arg),*)),
            _ => None,
        }
    }};
}

impl SignatureBackend for SlhDsaBackend {
    fn generate(&self, spec: &AlgorithmSpec, rng: &mut dyn RandomSource) -> Result<GeneratedKey> {
        let AlgorithmSpec::SlhDsa(params) = spec else {
            return Err(wrong_spec("SLH-DSA", spec));
        };
        let (public, private) =
            slh_dispatch!(params, generate(rng)).ok_or_else(|| wrong_spec("SLH-DSA", spec))?;
        Ok(GeneratedKey { public, private })
    }

    fn public_from_private(&self, spec: &AlgorithmSpec, private: &[u8]) -> Result<Vec<u8>> {
        let AlgorithmSpec::SlhDsa(params) = spec else {
            return Err(wrong_spec("SLH-DSA", spec));
        };
        slh_dispatch!(params, public(private))
            .flatten()
            .ok_or_else(|| bad_key("SLH-DSA"))
    }

    fn sign(&self, spec: &AlgorithmSpec, private: &[u8], message: &[u8]) -> Result<Vec<u8>> {
        let AlgorithmSpec::SlhDsa(params) = spec else {
            return Err(wrong_spec("SLH-DSA", spec));
        };
        slh_dispatch!(params, sign(private, message))
            .flatten()
            .ok_or_else(|| bad_key("SLH-DSA"))
    }

    fn verify(&self, spec: &AlgorithmSpec, public: &[u8], message: &[u8], signature: &[u8]) -> bool {
        match spec {
            AlgorithmSpec::SlhDsa(params) => {
                slh_dispatch!(params, verify(public, message, signature)).unwrap_or(false)
            }
            _ => false,
        }
    }
}
