//! X.509 v3 certificates: building, signing, parsing and verification.

mod csr;
mod ext;
mod render;

use chrono::{DateTime, Duration, Utc};

pub use csr::{build_csr, parse_csr, verify_csr, CertificationRequest};
pub use ext::{
    basic_constraints, check_unique, extension_name, extensions_from_der, extensions_to_der,
    key_identifier, subject_key_identifier, Extension, ALT_SIGNATURE_ALGORITHM,
    ALT_SIGNATURE_VALUE, AUTHORITY_KEY_IDENTIFIER, BASIC_CONSTRAINTS, DELTA_CERTIFICATE_DESCRIPTOR,
    EXTENDED_KEY_USAGE, KEY_USAGE, SUBJECT_ALT_NAME, SUBJECT_ALT_PUBLIC_KEY_INFO,
    SUBJECT_KEY_IDENTIFIER,
};
pub use render::{render_csr_text, render_text};

use crate::alg::{
    AlgorithmIdentifier, AlgorithmSpec, KeyPairRecord, RandomSource, Registry,
    SubjectPublicKeyInfo, Verdict,
};
use crate::composite::{self, CompositeKeyMaterial, CompositeVerification};
use crate::der::{parse_name, DerError, DerValue, DistinguishedName, Tag, Time};
use crate::error::{Error, Result};
use crate::{catalyst, chameleon, pem};

pub const DEFAULT_SUBJECT: &str = "CN=pqcli self-signed";
pub const DEFAULT_VALIDITY_DAYS: i64 = 365;
/// Bits of randomness in generated serial numbers.
pub const SERIAL_BITS: usize = 120;
const MAX_SERIAL_OCTETS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Validity {
    pub not_before: Time,
    pub not_after: Time,
}

impl Validity {
    pub fn new(not_before: DateTime<Utc>, not_after: DateTime<Utc>) -> Result<Self> {
        let v = Self {
            not_before: Time::new(not_before),
            not_after: Time::new(not_after),
        };
        if v.not_before.instant() >= v.not_after.instant() {
            return Err(Error::InvalidValidity);
        }
        Ok(v)
    }

    pub fn contains(&self, at: DateTime<Utc>) -> bool {
        self.not_before.instant() <= at && at <= self.not_after.instant()
    }

    pub fn to_der(&self) -> DerValue {
        DerValue::sequence(vec![self.not_before.to_der(), self.not_after.to_der()])
    }

    pub fn from_der(value: &DerValue) -> Result<Self, DerError> {
        match value.as_sequence()? {
            [nb, na] => Ok(Self {
                not_before: Time::from_der(nb)?,
                not_after: Time::from_der(na)?,
            }),
            _ => Err(DerError::Malformed("Validity".into())),
        }
    }
}

/// The signed body of a certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TbsCertificate {
    /// Encoded version number: 0 for v1, 2 for v3.
    pub version: u64,
    /// Two's-complement INTEGER content octets, as encoded.
    pub serial: Vec<u8>,
    pub signature: AlgorithmIdentifier,
    pub issuer: DistinguishedName,
    pub validity: Validity,
    pub subject: DistinguishedName,
    pub spki: SubjectPublicKeyInfo,
    pub issuer_unique_id: Option<DerValue>,
    pub subject_unique_id: Option<DerValue>,
    pub extensions: Vec<Extension>,
}

impl TbsCertificate {
    pub fn to_der(&self) -> DerValue {
        let mut fields = Vec::with_capacity(10);
        if self.version != 0 {
            fields.push(DerValue::explicit(0, DerValue::integer_u64(self.version)));
        }
        fields.push(DerValue::primitive(Tag::INTEGER, self.serial.clone()));
        fields.push(self.signature.to_der());
        fields.push(self.issuer.to_der());
        fields.push(self.validity.to_der());
        fields.push(self.subject.to_der());
        fields.push(self.spki.to_der());
        fields.extend(self.issuer_unique_id.clone());
        fields.extend(self.subject_unique_id.clone());
        if !self.extensions.is_empty() {
            fields.push(DerValue::explicit(3, extensions_to_der(&self.extensions)));
        }
        DerValue::sequence(fields)
    }

    pub fn encode(&self) -> Vec<u8> {
        self.to_der().encode()
    }

    pub fn from_der(value: &DerValue) -> Result<Self, DerError> {
        let fields = value.as_sequence()?;
        let mut it = fields.iter().peekable();
        let mut next = |what: &str| {
            it.next()
                .ok_or_else(|| DerError::Malformed(format!("TBSCertificate missing {what}")))
        };
        let first = next("serialNumber")?;
        let (version, serial) = if first.tag() == Tag::context(0) {
            let v = first.as_explicit(0)?.as_u64()?;
            if v == 0 {
                return Err(DerError::NonCanonicalValue("explicit DEFAULT version"));
            }
            (v, next("serialNumber")?)
        } else {
            (0, first)
        };
        let serial = serial.as_integer_bytes()?.to_vec();
        let signature = AlgorithmIdentifier::from_der(next("signature")?)?;
        let issuer = DistinguishedName::from_der(next("issuer")?)?;
        let validity = Validity::from_der(next("validity")?)?;
        let subject = DistinguishedName::from_der(next("subject")?)?;
        let spki = SubjectPublicKeyInfo::from_der(next("subjectPublicKeyInfo")?)?;
        let mut tbs = Self {
            version,
            serial,
            signature,
            issuer,
            validity,
            subject,
            spki,
            issuer_unique_id: None,
            subject_unique_id: None,
            extensions: Vec::new(),
        };
        for field in it {
            let tag = field.tag();
            if tag == Tag::context(1) && tbs.issuer_unique_id.is_none() && tbs.subject_unique_id.is_none() && tbs.extensions.is_empty() {
                tbs.issuer_unique_id = Some(field.clone());
            } else if tag == Tag::context(2) && tbs.subject_unique_id.is_none() && tbs.extensions.is_empty() {
                tbs.subject_unique_id = Some(field.clone());
            } else if tag == Tag::context(3) && tbs.extensions.is_empty() {
                tbs.extensions = extensions_from_der(field.as_explicit(3)?)?;
                if tbs.extensions.is_empty() {
                    return Err(DerError::Malformed("empty extensions".into()));
                }
            } else {
                return Err(DerError::Malformed(format!("unexpected TBSCertificate field {tag}")));
            }
        }
        Ok(tbs)
    }

    pub fn extension(&self, dotted: &str) -> Option<&Extension> {
        self.extensions.iter().find(|e| e.is(dotted))
    }

    pub fn serial_hex(&self) -> String {
        hex_colon(&self.serial)
    }

    pub fn is_self_issued(&self) -> bool {
        self.issuer == self.subject
    }
}

pub(crate) fn hex_colon(bytes: &[u8]) -> String {
    bytes
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<Vec<_>>()
        .join(":")
}

/// A certificate together with the exact TBS bytes its signature covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateDocument {
    pub tbs: TbsCertificate,
    /// The TBS exactly as signed or as read; verification only uses these.
    pub tbs_der: Vec<u8>,
    pub signature_algorithm: AlgorithmIdentifier,
    pub signature: Vec<u8>,
}

impl CertificateDocument {
    /// Complete DER encoding of the certificate.
    pub fn to_der(&self) -> Vec<u8> {
        crate::der::sequence_of_encoded(&[
            &self.tbs_der,
            &self.signature_algorithm.to_der().encode(),
            &DerValue::bit_string(&self.signature).encode(),
        ])
    }

    pub fn to_pem(&self) -> String {
        pem::encode_pem(pem::CERTIFICATE, &self.to_der())
    }

    pub fn signature_algorithms_agree(&self) -> bool {
        self.tbs.signature == self.signature_algorithm
    }
}

/// Field values for a new certificate. `issuer` defaults to `subject`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateParams {
    pub subject: DistinguishedName,
    pub issuer: Option<DistinguishedName>,
    pub not_before: DateTime<Utc>,
    pub not_after: DateTime<Utc>,
    /// Unsigned big-endian magnitude; random when absent.
    pub serial: Option<Vec<u8>>,
    pub extensions: Vec<Extension>,
    /// Add basicConstraints and subjectKeyIdentifier unless the caller
    /// supplied them.
    pub default_extensions: bool,
    /// `cA` flag of the default basicConstraints.
    pub ca: bool,
}

impl CertificateParams {
    /// Valid from now for [`DEFAULT_VALIDITY_DAYS`].
    pub fn new(subject: DistinguishedName) -> Self {
        let now = Utc::now();
        Self {
            subject,
            issuer: None,
            not_before: now,
            not_after: now + Duration::days(DEFAULT_VALIDITY_DAYS),
            serial: None,
            extensions: Vec::new(),
            default_extensions: true,
            ca: true,
        }
    }

    pub fn with_days(mut self, days: i64) -> Self {
        self.not_after = self.not_before + Duration::days(days);
        self
    }
}

impl Default for CertificateParams {
    fn default() -> Self {
        Self::new(parse_name(DEFAULT_SUBJECT).expect("default subject parses"))
    }
}

/// Random positive serial of [`SERIAL_BITS`] bits.
pub fn random_serial(rng: &mut dyn RandomSource) -> Vec<u8> {
    let mut bytes = vec![0u8; SERIAL_BITS / 8];
    rng.fill_bytes(&mut bytes);
    if bytes.iter().all(|&b| b == 0) {
        bytes[SERIAL_BITS / 8 - 1] = 1;
    }
    bytes
}

pub fn build_tbs(
    params: &CertificateParams,
    spki: &SubjectPublicKeyInfo,
    signature: AlgorithmIdentifier,
    rng: &mut dyn RandomSource,
) -> Result<TbsCertificate> {
    let validity = Validity::new(params.not_before, params.not_after)?;
    let serial = match &params.serial {
        Some(magnitude) => {
            let encoded = DerValue::integer_unsigned(magnitude);
            let bytes = encoded.bytes().expect("primitive").to_vec();
            if bytes == [0] || bytes.len() > MAX_SERIAL_OCTETS {
                return Err(Error::Der(DerError::Malformed(
                    "serial must be positive and at most 20 octets".into(),
                )));
            }
            bytes
        }
        None => DerValue::integer_unsigned(&random_serial(rng))
            .bytes()
            .expect("primitive")
            .to_vec(),
    };
    check_unique(&params.extensions)?;
    let mut extensions = Vec::new();
    if params.default_extensions {
        let supplied = |id: &str| params.extensions.iter().any(|e| e.is(id));
        if !supplied(BASIC_CONSTRAINTS) {
            extensions.push(basic_constraints(params.ca));
        }
        if !supplied(SUBJECT_KEY_IDENTIFIER) {
            extensions.push(subject_key_identifier(&spki.subject_public_key));
        }
    }
    extensions.extend(params.extensions.iter().cloned());
    Ok(TbsCertificate {
        version: 2,
        serial,
        signature,
        issuer: params.issuer.clone().unwrap_or_else(|| params.subject.clone()),
        validity,
        subject: params.subject.clone(),
        spki: spki.clone(),
        issuer_unique_id: None,
        subject_unique_id: None,
        extensions,
    })
}

pub fn sign_certificate(
    registry: &Registry,
    tbs: TbsCertificate,
    issuer_key: &KeyPairRecord,
) -> Result<CertificateDocument> {
    if !registry.signature_algorithm_matches(&issuer_key.spec, &tbs.signature) {
        return Err(Error::AlgorithmMismatch(format!(
            "TBS signature algorithm {} does not belong to a {} key",
            tbs.signature.oid, issuer_key.spec
        )));
    }
    check_unique(&tbs.extensions)?;
    let tbs_der = tbs.encode();
    let signature = registry.sign(&issuer_key.spec, &issuer_key.private, &tbs_der)?;
    Ok(CertificateDocument {
        signature_algorithm: tbs.signature.clone(),
        tbs,
        tbs_der,
        signature,
    })
}

/// Builds and signs in one step. The subject key defaults to the issuer
/// key (self-signed).
pub fn issue_certificate(
    registry: &Registry,
    params: &CertificateParams,
    subject_spki: Option<&SubjectPublicKeyInfo>,
    issuer_key: &KeyPairRecord,
    rng: &mut dyn RandomSource,
) -> Result<CertificateDocument> {
    let own;
    let spki = match subject_spki {
        Some(s) => s,
        None => {
            own = registry.spki_for(issuer_key)?;
            &own
        }
    };
    let tbs = build_tbs(params, spki, registry.signature_algorithm(&issuer_key.spec)?, rng)?;
    sign_certificate(registry, tbs, issuer_key)
}

/// Parses DER or PEM. With PEM input the first `CERTIFICATE` block is used.
pub fn parse_certificate(input: &[u8]) -> Result<CertificateDocument> {
    let blocks = pem::decode_any(input)?;
    let der = blocks
        .iter()
        .find(|b| b.label.is_empty() || b.label == pem::CERTIFICATE)
        .map(|b| b.der.as_slice())
        .ok_or_else(|| Error::NotACertificate("no CERTIFICATE block".into()))?;
    parse_certificate_der(der)
}

pub fn parse_certificate_der(der: &[u8]) -> Result<CertificateDocument> {
    let not_cert = |m: String| Error::NotACertificate(m);
    let outer = DerValue::decode(der).map_err(|e| not_cert(e.to_string()))?;
    let [tbs_value, alg, sig] = outer
        .as_sequence()
        .map_err(|e| not_cert(e.to_string()))?
    else {
        return Err(not_cert("expected SEQUENCE of 3 elements".into()));
    };
    // The TBS is the first element of the outer content; slice it out of
    // the input rather than re-encoding it.
    let body_len: usize = outer.children().unwrap_or(&[]).iter().map(|c| c.encode().len()).sum();
    let body = &der[der.len() - body_len..];
    let (_, rest) = DerValue::decode_prefix(body)?;
    let tbs_der = body[..body.len() - rest.len()].to_vec();

    let tbs = TbsCertificate::from_der(tbs_value)?;
    Ok(CertificateDocument {
        tbs,
        tbs_der,
        signature_algorithm: AlgorithmIdentifier::from_der(alg)?,
        signature: sig.as_bit_string()?.to_vec(),
    })
}

/// Public keys that may have signed a certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssuerKeys {
    pub spki: SubjectPublicKeyInfo,
    /// Issuer's alternative (subjectAltPublicKeyInfo) key, if any.
    pub alt_spki: Option<SubjectPublicKeyInfo>,
}

impl IssuerKeys {
    pub fn from_spki(spki: SubjectPublicKeyInfo) -> Self {
        Self {
            spki,
            alt_spki: None,
        }
    }

    /// Keys of an issuer certificate, including its alt key if it has one.
    pub fn from_certificate(cert: &CertificateDocument) -> Self {
        Self {
            spki: cert.tbs.spki.clone(),
            alt_spki: catalyst::alt_subject_spki(cert),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    /// Native signature verdict; absent for composite certificates.
    pub native: Option<Verdict>,
    /// Catalyst alternative signature verdict, if the certificate has one.
    pub alt: Option<Verdict>,
    pub composite: Option<CompositeVerification>,
    /// Validity window, self-issued flag and other observations.
    pub chain_notes: Vec<String>,
}

impl VerificationReport {
    /// True when every signature path that is present verified.
    pub fn all_valid(&self) -> bool {
        self.native.is_none_or(Verdict::is_valid)
            && self.alt.is_none_or(Verdict::is_valid)
            && self.composite.as_ref().is_none_or(|c| c.overall)
    }

    pub fn has_note(&self, needle: &str) -> bool {
        self.chain_notes.iter().any(|n| n.contains(needle))
    }
}

pub const NOTE_EXPIRED: &str = "expired";
pub const NOTE_NOT_YET_VALID: &str = "not yet valid";
pub const NOTE_SELF_SIGNED: &str = "self-signed";

/// Checks every signature the certificate carries. Never fails: problems
/// become verdicts or notes.
pub fn verify_certificate(
    registry: &Registry,
    cert: &CertificateDocument,
    issuer: &IssuerKeys,
    at_time: DateTime<Utc>,
) -> VerificationReport {
    let mut notes = Vec::new();
    if at_time > cert.tbs.validity.not_after.instant() {
        notes.push(NOTE_EXPIRED.to_string());
    } else if at_time < cert.tbs.validity.not_before.instant() {
        notes.push(NOTE_NOT_YET_VALID.to_string());
    }
    if cert.tbs.is_self_issued() {
        notes.push(NOTE_SELF_SIGNED.to_string());
    }
    if !cert.signature_algorithms_agree() {
        notes.push("signature algorithm in TBS differs from the outer signature algorithm".into());
    }

    let (native, composite) = native_verdict(registry, cert, &issuer.spki, &mut notes);

    let alt = match catalyst::alt_verdict(registry, cert, issuer.alt_spki.as_ref()) {
        Ok(v) => v,
        Err(e) => {
            notes.push(e.to_string());
            Some(Verdict::Invalid)
        }
    };

    if cert.tbs.extension(DELTA_CERTIFICATE_DESCRIPTOR).is_some() {
        match chameleon::reconstruct_delta(registry, cert, None) {
            Ok(delta) => notes.push(format!(
                "delta certificate reconstructed (serial {})",
                delta.tbs.serial_hex()
            )),
            Err(e) => notes.push(format!("delta certificate: {e}")),
        }
    }

    VerificationReport {
        native,
        alt,
        composite,
        chain_notes: notes,
    }
}

/// Self-signed check: the certificate's own keys act as issuer keys.
pub fn verify_self_signed(
    registry: &Registry,
    cert: &CertificateDocument,
    at_time: DateTime<Utc>,
) -> VerificationReport {
    verify_certificate(registry, cert, &IssuerKeys::from_certificate(cert), at_time)
}

fn native_verdict(
    registry: &Registry,
    cert: &CertificateDocument,
    issuer_spki: &SubjectPublicKeyInfo,
    notes: &mut Vec<String>,
) -> (Option<Verdict>, Option<CompositeVerification>) {
    let spec = match registry.spec_from_spki(issuer_spki) {
        Ok(spec) => spec,
        Err(e) => {
            notes.push(format!("issuer key not usable: {e}"));
            return (Some(Verdict::Unsupported), None);
        }
    };
    let alg_ok = cert.signature_algorithms_agree()
        && registry.signature_algorithm_matches(&spec, &cert.signature_algorithm);
    if let AlgorithmSpec::Composite(_) = spec {
        let material = match CompositeKeyMaterial::from_spki(registry, issuer_spki) {
            Ok(m) => m,
            Err(e) => {
                notes.push(format!("composite issuer key: {e}"));
                return (Some(Verdict::Unsupported), None);
            }
        };
        let mut result =
            composite::composite_verify_bytes(registry, &material, &cert.tbs_der, &cert.signature);
        if !alg_ok {
            notes.push("signature algorithm does not match the composite issuer key".into());
            result.overall = false;
        }
        return (None, Some(result));
    }
    if !registry.is_signature_algorithm(&cert.signature_algorithm) {
        notes.push(format!(
            "signature algorithm {} is not registered (view-only)",
            cert.signature_algorithm.oid
        ));
        return (Some(Verdict::Unsupported), None);
    }
    if !alg_ok {
        notes.push(format!("signature algorithm does not match the {spec} issuer key"));
        return (Some(Verdict::Invalid), None);
    }
    let verdict = registry.verdict(
        &spec,
        &issuer_spki.subject_public_key,
        &cert.tbs_der,
        &cert.signature,
    );
    (Some(verdict), None)
}

/// Composite-signed certificate; the issuer key must be composite.
pub fn issue_composite_certificate(
    registry: &Registry,
    params: &CertificateParams,
    subject_spki: Option<&SubjectPublicKeyInfo>,
    issuer_key: &KeyPairRecord,
    rng: &mut dyn RandomSource,
) -> Result<CertificateDocument> {
    if !matches!(issuer_key.spec, AlgorithmSpec::Composite(_)) {
        return Err(Error::AlgorithmMismatch(format!(
            "{} is not a composite key",
            issuer_key.spec
        )));
    }
    issue_certificate(registry, params, subject_spki, issuer_key, rng)
}
