//! PKCS#10 certification requests.

use crate::alg::{AlgorithmIdentifier, KeyPairRecord, Registry, SubjectPublicKeyInfo, Verdict};
use crate::der::{oid, sequence_of_encoded, DerValue, DistinguishedName, Tag};
use crate::error::{Error, Result};
use crate::pem;

use super::ext::{check_unique, extensions_from_der, extensions_to_der, Extension};

const EXTENSION_REQUEST: &str = "1.2.840.113549.1.9.14";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificationRequest {
    pub subject: DistinguishedName,
    pub spki: SubjectPublicKeyInfo,
    /// Raw `Attribute` values in encoded order.
    pub attributes: Vec<DerValue>,
    /// CertificationRequestInfo exactly as signed or read.
    pub info_der: Vec<u8>,
    pub signature_algorithm: AlgorithmIdentifier,
    pub signature: Vec<u8>,
}

impl CertificationRequest {
    pub fn to_der(&self) -> Vec<u8> {
        sequence_of_encoded(&[
            &self.info_der,
            &self.signature_algorithm.to_der().encode(),
            &DerValue::bit_string(&self.signature).encode(),
        ])
    }

    pub fn to_pem(&self) -> String {
        pem::encode_pem(pem::CERTIFICATE_REQUEST, &self.to_der())
    }

    /// Extensions from the extensionRequest attribute, if present.
    pub fn requested_extensions(&self) -> Result<Vec<Extension>> {
        let id = oid(EXTENSION_REQUEST);
        for attr in &self.attributes {
            if let [ty, values] = attr.as_sequence()? {
                if ty.as_oid()? == id {
                    return match values.as_set()? {
                        [exts] => Ok(extensions_from_der(exts)?),
                        _ => Err(Error::NotACsr("extensionRequest must have one value".into())),
                    };
                }
            }
        }
        Ok(Vec::new())
    }
}

fn info_to_der(
    subject: &DistinguishedName,
    spki: &SubjectPublicKeyInfo,
    attributes: &[DerValue],
) -> DerValue {
    DerValue::sequence(vec![
        DerValue::integer_u64(0),
        subject.to_der(),
        spki.to_der(),
        DerValue::constructed(Tag::context(0), attributes.to_vec()),
    ])
}

/// Builds and self-signs a request, then checks the signature.
pub fn build_csr(
    registry: &Registry,
    subject: &DistinguishedName,
    keypair: &KeyPairRecord,
    extensions: &[Extension],
) -> Result<CertificationRequest> {
    check_unique(extensions)?;
    let spki = registry.spki_for(keypair)?;
    let mut attributes = Vec::new();
    if !extensions.is_empty() {
        attributes.push(DerValue::sequence(vec![
            DerValue::oid(&oid(EXTENSION_REQUEST)),
            DerValue::set(vec![extensions_to_der(extensions)]),
        ]));
    }
    let info_der = info_to_der(subject, &spki, &attributes).encode();
    let signature = registry.sign(&keypair.spec, &keypair.private, &info_der)?;
    let csr = CertificationRequest {
        subject: subject.clone(),
        spki,
        attributes,
        info_der,
        signature_algorithm: registry.signature_algorithm(&keypair.spec)?,
        signature,
    };
    if verify_csr(registry, &csr) != Verdict::Valid {
        return Err(Error::AlgorithmMismatch(format!(
            "request signature does not verify under the {} key",
            keypair.spec
        )));
    }
    Ok(csr)
}

/// Parses DER or PEM (`CERTIFICATE REQUEST` or `NEW CERTIFICATE REQUEST`).
pub fn parse_csr(input: &[u8]) -> Result<CertificationRequest> {
    let blocks = pem::decode_any(input)?;
    let der = blocks
        .iter()
        .find(|b| {
            b.label.is_empty()
                || b.label == pem::CERTIFICATE_REQUEST
                || b.label == "NEW CERTIFICATE REQUEST"
        })
        .map(|b| b.der.as_slice())
        .ok_or_else(|| Error::NotACsr("no CERTIFICATE REQUEST block".into()))?;
    let not_csr = |m: String| Error::NotACsr(m);
    let outer = DerValue::decode(der).map_err(|e| not_csr(e.to_string()))?;
    let [info, alg, sig] = outer.as_sequence().map_err(|e| not_csr(e.to_string()))? else {
        return Err(not_csr("expected SEQUENCE of 3 elements".into()));
    };
    let fields = info.as_sequence().map_err(|e| not_csr(e.to_string()))?;
    let [version, subject, spki, attrs] = fields else {
        return Err(not_csr("CertificationRequestInfo must have 4 fields".into()));
    };
    if version.as_u64()? != 0 {
        return Err(not_csr("unsupported version".into()));
    }
    if attrs.tag() != Tag::context(0) {
        return Err(not_csr("missing attributes".into()));
    }
    Ok(CertificationRequest {
        subject: DistinguishedName::from_der(subject)?,
        spki: SubjectPublicKeyInfo::from_der(spki)?,
        attributes: attrs.children().unwrap_or_default().to_vec(),
        // Strict DER guarantees the re-encoding equals the input bytes.
        info_der: info.encode(),
        signature_algorithm: AlgorithmIdentifier::from_der(alg)?,
        signature: sig.as_bit_string()?.to_vec(),
    })
}

pub fn verify_csr(registry: &Registry, csr: &CertificationRequest) -> Verdict {
    let Ok(spec) = registry.spec_from_spki(&csr.spki) else {
        return Verdict::Unsupported;
    };
    if !registry.is_signature_algorithm(&csr.signature_algorithm) {
        return Verdict::Unsupported;
    }
    if !registry.signature_algorithm_matches(&spec, &csr.signature_algorithm) {
        return Verdict::Invalid;
    }
    registry.verdict(&spec, &csr.spki.subject_public_key, &csr.info_der, &csr.signature)
}
