//! Signature algorithm registry: spec grammar, OIDs, key encodings and the
//! uniform keygen/sign/verify entry points.

mod backend;
mod keys;
mod oids;
mod registry;
mod spec;

pub use backend::{
    seeded_rng, system_rng, EcdsaBackend, GeneratedKey, MlDsaBackend, RandomSource, RsaBackend,
    SignatureBackend, SlhDsaBackend,
};
pub use keys::{AlgorithmIdentifier, KeyPairRecord, SubjectPublicKeyInfo};
pub(crate) use keys::PrivateKeyInfo;
pub use oids::{OidTable, BUILTIN_OID_TABLE};
pub use registry::{Registry, Verdict};
pub use spec::{
    parse_alg_spec, AlgorithmSpec, CompositeSpec, EcCurve, Family, MlDsaLevel, SlhDsaParams,
    SlhHash, MAX_COMPOSITE_COMPONENTS, RSA_ALLOWED_BITS, RSA_DEFAULT_BITS,
};
