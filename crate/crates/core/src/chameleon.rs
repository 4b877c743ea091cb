//! Chameleon certificate pairs: a base certificate carrying a Delta
//! Certificate Descriptor from which a second certificate is rebuilt
//! byte for byte.
//!
//! ```text
//! DeltaCertificateDescriptor ::= SEQUENCE {
//!   serialNumber          CertificateSerialNumber,
//!   signature             [0] EXPLICIT AlgorithmIdentifier OPTIONAL,
//!   issuer                [1] EXPLICIT Name OPTIONAL,
//!   validity              [2] EXPLICIT Validity OPTIONAL,
//!   subject               [3] EXPLICIT Name OPTIONAL,
//!   subjectPublicKeyInfo  SubjectPublicKeyInfo,
//!   extensions            [4] EXPLICIT Extensions OPTIONAL,
//!   signatureValue        BIT STRING }
//! ```
//!
//! When any extension differs, `extensions` holds the delta's complete
//! extension list rather than per-extension patches.

use crate::alg::{
    AlgorithmIdentifier, KeyPairRecord, RandomSource, Registry, SubjectPublicKeyInfo, Verdict,
};
use crate::der::{oid, DerError, DerValue, DistinguishedName, Tag};
use crate::error::{Error, Result};
use crate::x509::{
    self, extensions_from_der, extensions_to_der, CertificateDocument, CertificateParams,
    Extension, TbsCertificate, Validity, DELTA_CERTIFICATE_DESCRIPTOR,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaCertificateDescriptor {
    /// INTEGER content octets of the delta serial number.
    pub serial: Vec<u8>,
    pub signature: Option<AlgorithmIdentifier>,
    pub issuer: Option<DistinguishedName>,
    pub validity: Option<Validity>,
    pub subject: Option<DistinguishedName>,
    pub spki: SubjectPublicKeyInfo,
    pub extensions: Option<Vec<Extension>>,
    pub signature_value: Vec<u8>,
}

impl DeltaCertificateDescriptor {
    pub fn to_der(&self) -> DerValue {
        let mut fields = vec![DerValue::primitive(Tag::INTEGER, self.serial.clone())];
        if let Some(s) = &self.signature {
            fields.push(DerValue::explicit(0, s.to_der()));
        }
        if let Some(n) = &self.issuer {
            fields.push(DerValue::explicit(1, n.to_der()));
        }
        if let Some(v) = &self.validity {
            fields.push(DerValue::explicit(2, v.to_der()));
        }
        if let Some(n) = &self.subject {
            fields.push(DerValue::explicit(3, n.to_der()));
        }
        fields.push(self.spki.to_der());
        if let Some(e) = &self.extensions {
            fields.push(DerValue::explicit(4, extensions_to_der(e)));
        }
        fields.push(DerValue::bit_string(&self.signature_value));
        DerValue::sequence(fields)
    }

    pub fn from_der(value: &DerValue) -> Result<Self, DerError> {
        let fields = value.as_sequence()?;
        let malformed = |m: &str| DerError::Malformed(format!("DeltaCertificateDescriptor: {m}"));
        let mut it = fields.iter().peekable();
        let serial = it
            .next()
            .ok_or_else(|| malformed("missing serialNumber"))?
            .as_integer_bytes()?
            .to_vec();
        let mut tagged = |n: u32| it.next_if(|f| f.tag() == Tag::context(n));
        let signature = tagged(0)
            .map(|f| f.as_explicit(0).and_then(AlgorithmIdentifier::from_der))
            .transpose()?;
        let issuer = tagged(1)
            .map(|f| f.as_explicit(1).and_then(DistinguishedName::from_der))
            .transpose()?;
        let validity = tagged(2)
            .map(|f| f.as_explicit(2).and_then(Validity::from_der))
            .transpose()?;
        let subject = tagged(3)
            .map(|f| f.as_explicit(3).and_then(DistinguishedName::from_der))
            .transpose()?;
        let spki = SubjectPublicKeyInfo::from_der(
            it.next().ok_or_else(|| malformed("missing subjectPublicKeyInfo"))?,
        )?;
        let extensions = it
            .next_if(|f| f.tag() == Tag::context(4))
            .map(|f| f.as_explicit(4).and_then(extensions_from_der))
            .transpose()?;
        let signature_value = it
            .next()
            .ok_or_else(|| malformed("missing signatureValue"))?
            .as_bit_string()?
            .to_vec();
        if it.next().is_some() {
            return Err(malformed("trailing fields"));
        }
        Ok(Self {
            serial,
            signature,
            issuer,
            validity,
            subject,
            spki,
            extensions,
            signature_value,
        })
    }

    pub fn to_extension(&self) -> Extension {
        Extension::new(oid(DELTA_CERTIFICATE_DESCRIPTOR), false, &self.to_der())
    }

    /// Describes `delta` relative to `base`, which must not yet carry a
    /// descriptor. Fields equal in both are left out.
    pub fn diff(base: &TbsCertificate, delta: &CertificateDocument) -> Self {
        let d = &delta.tbs;
        Self {
            serial: d.serial.clone(),
            signature: (base.signature != d.signature).then(|| d.signature.clone()),
            issuer: (base.issuer != d.issuer).then(|| d.issuer.clone()),
            validity: (base.validity != d.validity).then_some(d.validity),
            subject: (base.subject != d.subject).then(|| d.subject.clone()),
            spki: d.spki.clone(),
            extensions: (base.extensions != d.extensions).then(|| d.extensions.clone()),
            signature_value: delta.signature.clone(),
        }
    }
}

/// The descriptor carried by `tbs`, if any.
pub fn descriptor_of(tbs: &TbsCertificate) -> Result<Option<DeltaCertificateDescriptor>> {
    tbs.extension(DELTA_CERTIFICATE_DESCRIPTOR)
        .map(|e| {
            let value = e.parsed_value()?;
            Ok(DeltaCertificateDescriptor::from_der(&value)?)
        })
        .transpose()
}

/// Inputs for [`issue_paired`]. Each certificate is self-signed when its
/// subject key is the issuer key.
#[derive(Debug, Clone, Copy)]
pub struct PairedIssuance<'a> {
    pub base: &'a CertificateParams,
    pub delta: &'a CertificateParams,
    pub base_spki: &'a SubjectPublicKeyInfo,
    pub delta_spki: &'a SubjectPublicKeyInfo,
    pub base_issuer_key: &'a KeyPairRecord,
    pub delta_issuer_key: &'a KeyPairRecord,
}

/// Issues the delta certificate, then the base certificate embedding its
/// descriptor. Returns `(base, delta)`.
pub fn issue_paired(
    registry: &Registry,
    req: PairedIssuance<'_>,
    rng: &mut dyn RandomSource,
) -> Result<(CertificateDocument, CertificateDocument)> {
    for (which, params) in [("base", req.base), ("delta", req.delta)] {
        if params.extensions.iter().any(|e| e.is(DELTA_CERTIFICATE_DESCRIPTOR)) {
            return Err(Error::FieldConflict(format!(
                "{which} parameters already contain a delta certificate descriptor"
            )));
        }
    }
    let delta_tbs = x509::build_tbs(
        req.delta,
        req.delta_spki,
        registry.signature_algorithm(&req.delta_issuer_key.spec)?,
        rng,
    )?;
    let delta = x509::sign_certificate(registry, delta_tbs, req.delta_issuer_key)?;

    let mut base_tbs = x509::build_tbs(
        req.base,
        req.base_spki,
        registry.signature_algorithm(&req.base_issuer_key.spec)?,
        rng,
    )?;
    let descriptor = DeltaCertificateDescriptor::diff(&base_tbs, &delta);
    base_tbs.extensions.push(descriptor.to_extension());
    let base = x509::sign_certificate(registry, base_tbs, req.base_issuer_key)?;
    Ok((base, delta))
}

/// Rebuilds the delta certificate from `base`.
///
/// The delta signature is checked against `delta_issuer`, or against the
/// delta's own key when it is self-issued. With neither available the
/// certificate is returned unchecked.
pub fn reconstruct_delta(
    registry: &Registry,
    base: &CertificateDocument,
    delta_issuer: Option<&SubjectPublicKeyInfo>,
) -> Result<CertificateDocument> {
    let descriptor = descriptor_of(&base.tbs)?.ok_or(Error::NoDescriptor)?;
    let mismatch = |m: &str| Error::ReconstructionMismatch(m.to_string());

    let mut tree = DerValue::decode(&base.tbs_der)?;
    let fields = tree.children_mut().ok_or_else(|| mismatch("primitive TBS"))?;
    let s = usize::from(fields.first().map(DerValue::tag) == Some(Tag::context(0)));
    if fields.len() < s + 6 {
        return Err(mismatch("base TBS too short"));
    }
    fields[s] = DerValue::primitive(Tag::INTEGER, descriptor.serial.clone());
    if let Some(sig) = &descriptor.signature {
        fields[s + 1] = sig.to_der();
    }
    if let Some(issuer) = &descriptor.issuer {
        fields[s + 2] = issuer.to_der();
    }
    if let Some(validity) = &descriptor.validity {
        fields[s + 3] = validity.to_der();
    }
    if let Some(subject) = &descriptor.subject {
        fields[s + 4] = subject.to_der();
    }
    fields[s + 5] = descriptor.spki.to_der();

    let ext_index = fields
        .iter()
        .position(|f| f.tag() == Tag::context(3))
        .ok_or_else(|| mismatch("base has no extensions"))?;
    let new_list = match &descriptor.extensions {
        Some(list) => list.iter().map(Extension::to_der).collect(),
        None => {
            let dcd = oid(DELTA_CERTIFICATE_DESCRIPTOR);
            let list = fields[ext_index]
                .children()
                .and_then(|c| c.first())
                .and_then(DerValue::children)
                .ok_or_else(|| mismatch("malformed extensions"))?;
            list.iter()
                .filter(|e| {
                    e.children().and_then(|c| c.first()).and_then(|i| i.as_oid().ok())
                        != Some(dcd.clone())
                })
                .cloned()
                .collect::<Vec<_>>()
        }
    };
    if new_list.is_empty() {
        fields.remove(ext_index);
    } else {
        fields[ext_index] = DerValue::explicit(3, DerValue::sequence(new_list));
    }

    let tbs = TbsCertificate::from_der(&tree)?;
    let delta = CertificateDocument {
        signature_algorithm: tbs.signature.clone(),
        tbs,
        tbs_der: tree.encode(),
        signature: descriptor.signature_value,
    };

    let issuer_spki = match delta_issuer {
        Some(spki) => Some(spki),
        None if delta.tbs.is_self_issued() => Some(&delta.tbs.spki),
        None => None,
    };
    if let Some(spki) = issuer_spki {
        let report = x509::verify_certificate(
            registry,
            &delta,
            &x509::IssuerKeys::from_spki(spki.clone()),
            chrono::Utc::now(),
        );
        let failed = report.native == Some(Verdict::Invalid)
            || report.composite.as_ref().is_some_and(|c| !c.overall);
        if failed {
            return Err(mismatch("delta signature does not verify"));
        }
    }
    Ok(delta)
}
