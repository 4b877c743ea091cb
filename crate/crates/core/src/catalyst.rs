//! Catalyst hybrid certificates: a second key and signature carried in the
//! subjectAltPublicKeyInfo, altSignatureAlgorithm and altSignatureValue
//! extensions.
//!
//! The alternative signature covers the PreTBSCertificate: the TBS without
//! its `signature` field and without the altSignatureValue extension. The
//! native signature then covers the complete TBS, alt extensions included.

use crate::alg::{AlgorithmIdentifier, KeyPairRecord, Registry, SubjectPublicKeyInfo, Verdict};
use crate::der::{oid, DerValue, Tag};
use crate::error::{Error, Result};
use crate::x509::{
    self, CertificateDocument, Extension, IssuerKeys, TbsCertificate, VerificationReport,
    ALT_SIGNATURE_ALGORITHM, ALT_SIGNATURE_VALUE, SUBJECT_ALT_PUBLIC_KEY_INFO,
};

const TRIPLE: [&str; 3] = [
    SUBJECT_ALT_PUBLIC_KEY_INFO,
    ALT_SIGNATURE_ALGORITHM,
    ALT_SIGNATURE_VALUE,
];

/// Decoded contents of the three alternative extensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalystExtensions {
    pub alt_spki: SubjectPublicKeyInfo,
    pub alt_signature_algorithm: AlgorithmIdentifier,
    pub alt_signature_value: Vec<u8>,
}

/// `Ok(None)` when none of the three extensions is present, an error when
/// only some are or when one does not decode.
pub fn alt_extensions(tbs: &TbsCertificate) -> Result<Option<CatalystExtensions>> {
    let found: Vec<Option<&Extension>> = TRIPLE.iter().map(|id| tbs.extension(id)).collect();
    let present = found.iter().filter(|e| e.is_some()).count();
    if present == 0 {
        return Ok(None);
    }
    if present < 3 {
        let missing: Vec<&str> = TRIPLE
            .iter()
            .zip(&found)
            .filter(|(_, e)| e.is_none())
            .map(|(id, _)| x509::extension_name(&oid(id)).unwrap_or(id))
            .collect();
        return Err(Error::MalformedAltExtension(format!(
            "missing {}",
            missing.join(", ")
        )));
    }
    let bad = |what: &str, e: crate::der::DerError| {
        Error::MalformedAltExtension(format!("{what}: {e}"))
    };
    let value = |i: usize| found[i].expect("all present").parsed_value();
    let alt_spki = value(0)
        .and_then(|v| SubjectPublicKeyInfo::from_der(&v))
        .map_err(|e| bad("subjectAltPublicKeyInfo", e))?;
    let alt_signature_algorithm = value(1)
        .and_then(|v| AlgorithmIdentifier::from_der(&v))
        .map_err(|e| bad("altSignatureAlgorithm", e))?;
    let alt_signature_value = value(2)
        .and_then(|v| v.as_bit_string().map(<[u8]>::to_vec))
        .map_err(|e| bad("altSignatureValue", e))?;
    Ok(Some(CatalystExtensions {
        alt_spki,
        alt_signature_algorithm,
        alt_signature_value,
    }))
}

/// The subject's alternative public key, if the certificate has a
/// well-formed one.
pub fn alt_subject_spki(cert: &CertificateDocument) -> Option<SubjectPublicKeyInfo> {
    let ext = cert.tbs.extension(SUBJECT_ALT_PUBLIC_KEY_INFO)?;
    SubjectPublicKeyInfo::from_der(&ext.parsed_value().ok()?).ok()
}

/// PreTBSCertificate bytes for a TBS encoding: drops the `signature`
/// AlgorithmIdentifier and the altSignatureValue extension, then
/// re-encodes. Works on the value tree so every other byte is kept as is.
pub fn alt_pre_image(tbs_der: &[u8]) -> Result<Vec<u8>> {
    let malformed = |m: &str| Error::MalformedAltExtension(m.to_string());
    let mut tbs = DerValue::decode(tbs_der)?;
    if tbs.tag() != Tag::SEQUENCE {
        return Err(malformed("TBS is not a SEQUENCE"));
    }
    let fields = tbs.children_mut().ok_or_else(|| malformed("primitive TBS"))?;
    let sig_index = if fields.first().map(DerValue::tag) == Some(Tag::context(0)) {
        2
    } else {
        1
    };
    if fields.len() <= sig_index {
        return Err(malformed("TBS too short"));
    }
    fields.remove(sig_index);

    let value_oid = oid(ALT_SIGNATURE_VALUE);
    let exts = fields
        .iter_mut()
        .find(|f| f.tag() == Tag::context(3))
        .and_then(|f| f.children_mut())
        .and_then(|c| c.first_mut())
        .and_then(|seq| seq.children_mut())
        .ok_or_else(|| malformed("TBS has no extensions"))?;
    let before = exts.len();
    exts.retain(|e| {
        e.children()
            .and_then(|c| c.first())
            .and_then(|id| id.as_oid().ok())
            != Some(value_oid.clone())
    });
    if exts.len() + 1 != before {
        return Err(malformed("expected exactly one altSignatureValue extension"));
    }
    Ok(tbs.encode())
}

/// Warning text for native and alt keys of the same family.
pub fn same_family_warning(native: &KeyPairRecord, alt: &KeyPairRecord) -> Option<String> {
    (native.spec.family() == alt.spec.family()).then(|| {
        format!(
            "native and alternative keys are both {}; the hybrid adds no algorithm diversity",
            native.spec.family()
        )
    })
}

/// Adds the alternative extensions to `tbs_base` and signs with both keys.
///
/// `tbs_base.signature` must belong to `native_issuer_key`. The alt
/// extensions are appended non-critical after the caller's extensions in
/// the order subjectAltPublicKeyInfo, altSignatureAlgorithm,
/// altSignatureValue.
pub fn issue_catalyst(
    registry: &Registry,
    mut tbs_base: TbsCertificate,
    native_issuer_key: &KeyPairRecord,
    alt_issuer_key: &KeyPairRecord,
    alt_subject_spki: &SubjectPublicKeyInfo,
) -> Result<CertificateDocument> {
    if !registry.signature_algorithm_matches(&native_issuer_key.spec, &tbs_base.signature) {
        return Err(Error::AlgorithmMismatch(format!(
            "TBS signature algorithm {} does not belong to the native {} key",
            tbs_base.signature.oid, native_issuer_key.spec
        )));
    }
    for id in TRIPLE {
        if let Some(e) = tbs_base.extension(id) {
            return Err(Error::DuplicateExtension(e.oid.clone()));
        }
    }
    let alt_alg = registry.signature_algorithm(&alt_issuer_key.spec)?;
    tbs_base.extensions.push(Extension::new(
        oid(SUBJECT_ALT_PUBLIC_KEY_INFO),
        false,
        &alt_subject_spki.to_der(),
    ));
    tbs_base.extensions.push(Extension::new(
        oid(ALT_SIGNATURE_ALGORITHM),
        false,
        &alt_alg.to_der(),
    ));
    // Placeholder so the pre-image is computed by the same routine the
    // verifier uses.
    tbs_base.extensions.push(Extension::new(
        oid(ALT_SIGNATURE_VALUE),
        false,
        &DerValue::bit_string(&[]),
    ));
    let pre_image = alt_pre_image(&tbs_base.encode())?;
    let alt_signature = registry.sign(&alt_issuer_key.spec, &alt_issuer_key.private, &pre_image)?;
    let last = tbs_base.extensions.len() - 1;
    tbs_base.extensions[last] = Extension::new(
        oid(ALT_SIGNATURE_VALUE),
        false,
        &DerValue::bit_string(&alt_signature),
    );
    x509::sign_certificate(registry, tbs_base, native_issuer_key)
}

/// Verdict for the alternative signature, `None` for certificates without
/// the alt extensions.
pub fn alt_verdict(
    registry: &Registry,
    cert: &CertificateDocument,
    alt_issuer_spki: Option<&SubjectPublicKeyInfo>,
) -> Result<Option<Verdict>> {
    let Some(alt) = alt_extensions(&cert.tbs)? else {
        return Ok(None);
    };
    let Some(issuer_spki) = alt_issuer_spki else {
        return Ok(Some(Verdict::Unsupported));
    };
    let Ok(spec) = registry.spec_from_spki(issuer_spki) else {
        return Ok(Some(Verdict::Unsupported));
    };
    if !registry.is_signature_algorithm(&alt.alt_signature_algorithm) {
        return Ok(Some(Verdict::Unsupported));
    }
    if !registry.signature_algorithm_matches(&spec, &alt.alt_signature_algorithm) {
        return Ok(Some(Verdict::Invalid));
    }
    let pre_image = alt_pre_image(&cert.tbs_der)?;
    Ok(Some(registry.verdict(
        &spec,
        &issuer_spki.subject_public_key,
        &pre_image,
        &alt.alt_signature_value,
    )))
}

/// Native and alternative verdicts against explicit issuer keys. Fails only
/// when the alt extension triple is incomplete or undecodable.
pub fn verify_catalyst(
    registry: &Registry,
    cert: &CertificateDocument,
    native_issuer_spki: &SubjectPublicKeyInfo,
    alt_issuer_spki: &SubjectPublicKeyInfo,
) -> Result<VerificationReport> {
    alt_extensions(&cert.tbs)?;
    let issuer = IssuerKeys {
        spki: native_issuer_spki.clone(),
        alt_spki: Some(alt_issuer_spki.clone()),
    };
    Ok(x509::verify_certificate(registry, cert, &issuer, chrono::Utc::now()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alg::{parse_alg_spec, seeded_rng};
    use crate::der::parse_name;
    use crate::x509::{build_tbs, parse_certificate, verify_self_signed, CertificateParams};

    fn hybrid(seed: u64) -> (Registry, CertificateDocument) {
        let r = Registry::new();
        let mut rng = seeded_rng(seed);
        let native = r.generate_keypair(&parse_alg_spec("ECDSA").unwrap(), &mut rng).unwrap();
        let alt = r.generate_keypair(&parse_alg_spec("ML-DSA:2").unwrap(), &mut rng).unwrap();
        let tbs = build_tbs(
            &CertificateParams::new(parse_name("CN=hybrid").unwrap()),
            &r.spki_for(&native).unwrap(),
            r.signature_algorithm(&native.spec).unwrap(),
            &mut rng,
        )
        .unwrap();
        let cert = issue_catalyst(&r, tbs, &native, &alt, &r.spki_for(&alt).unwrap()).unwrap();
        (r, cert)
    }

    #[test]
    fn issue_and_verify() {
        let (r, cert) = hybrid(1);
        let n = cert.tbs.extensions.len();
        let ids: Vec<String> = cert.tbs.extensions[n - 3..].iter().map(|e| e.oid.to_string()).collect();
        assert_eq!(ids, TRIPLE);
        assert!(cert.tbs.extensions.iter().all(|e| !e.critical));
        let parsed = parse_certificate(&cert.to_der()).unwrap();
        let report = verify_self_signed(&r, &parsed, chrono::Utc::now());
        assert_eq!(report.native, Some(Verdict::Valid));
        assert_eq!(report.alt, Some(Verdict::Valid));
    }

    #[test]
    fn pre_image_drops_signature_field_and_value() {
        let (_, cert) = hybrid(2);
        let pre = DerValue::decode(&alt_pre_image(&cert.tbs_der).unwrap()).unwrap();
        let full = DerValue::decode(&cert.tbs_der).unwrap();
        assert_eq!(pre.children().unwrap().len() + 1, full.children().unwrap().len());
        let mut expected = cert.tbs.clone();
        expected.extensions.pop();
        let mut expected = expected.to_der();
        expected.children_mut().unwrap().remove(2);
        assert_eq!(pre, expected);
    }

    #[test]
    fn stripping_alt_extensions_breaks_native_signature() {
        let (r, cert) = hybrid(3);
        let mut stripped = cert.clone();
        stripped.tbs.extensions.truncate(stripped.tbs.extensions.len() - 3);
        stripped.tbs_der = stripped.tbs.encode();
        let report = verify_self_signed(&r, &stripped, chrono::Utc::now());
        assert_eq!(report.native, Some(Verdict::Invalid));
        assert_eq!(report.alt, None);
    }

    #[test]
    fn partial_triple_is_malformed() {
        let (r, cert) = hybrid(4);
        let mut partial = cert.clone();
        partial.tbs.extensions.retain(|e| !e.is(SUBJECT_ALT_PUBLIC_KEY_INFO));
        partial.tbs_der = partial.tbs.encode();
        assert!(matches!(alt_extensions(&partial.tbs), Err(Error::MalformedAltExtension(_))));
        let spki = cert.tbs.spki.clone();
        assert!(matches!(
            verify_catalyst(&r, &partial, &spki, &spki),
            Err(Error::MalformedAltExtension(_))
        ));
        let report = verify_self_signed(&r, &partial, chrono::Utc::now());
        assert_eq!(report.alt, Some(Verdict::Invalid));
    }

    #[test]
    fn duplicate_alt_extension_rejected() {
        let r = Registry::new();
        let mut rng = seeded_rng(5);
        let native = r.generate_keypair(&parse_alg_spec("ECDSA").unwrap(), &mut rng).unwrap();
        let alt = r.generate_keypair(&parse_alg_spec("ML-DSA:2").unwrap(), &mut rng).unwrap();
        let mut params = CertificateParams::default();
        params.extensions.push(Extension::new(
            oid(SUBJECT_ALT_PUBLIC_KEY_INFO),
            false,
            &r.spki_for(&alt).unwrap().to_der(),
        ));
        let tbs = build_tbs(
            &params,
            &r.spki_for(&native).unwrap(),
            r.signature_algorithm(&native.spec).unwrap(),
            &mut rng,
        )
        .unwrap();
        assert!(matches!(
            issue_catalyst(&r, tbs, &native, &alt, &r.spki_for(&alt).unwrap()),
            Err(Error::DuplicateExtension(_))
        ));
        assert!(same_family_warning(&native, &alt).is_none());
        assert!(same_family_warning(&native, &native).is_some());
    }
}
