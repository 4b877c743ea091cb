use std::fmt::Write;

use crate::alg::{AlgorithmIdentifier, Registry, SubjectPublicKeyInfo};
use crate::catalyst;
use crate::chameleon;
use crate::composite::{CompositeKeyMaterial, CompositeSignatureValue};
use crate::der::Time;

use super::csr::{verify_csr, CertificationRequest};
use super::ext::extension_name;
use super::{hex_colon, CertificateDocument};

fn algorithm_label(registry: &Registry, alg: &AlgorithmIdentifier) -> String {
    match registry.algorithm_name(&alg.oid) {
        Some(name) => format!("{name} ({})", alg.oid),
        None => format!("{} (unknown, view-only)", alg.oid),
    }
}

fn time_label(t: &Time) -> String {
    t.instant().format("%Y-%m-%d %H:%M:%S UTC").to_string()
}

fn write_key(out: &mut String, registry: &Registry, spki: &SubjectPublicKeyInfo, indent: &str) {
    let _ = writeln!(out, "{indent}Algorithm: {}", algorithm_label(registry, &spki.algorithm));
    match registry.spec_from_spki(spki) {
        Ok(spec) => {
            let _ = writeln!(
                out,
                "{indent}Key: {spec}, {} bytes",
                spki.subject_public_key.len()
            );
        }
        Err(_) => {
            let _ = writeln!(out, "{indent}Key: {} bytes", spki.subject_public_key.len());
        }
    }
    if let Ok(material) = CompositeKeyMaterial::from_spki(registry, spki) {
        let _ = writeln!(out, "{indent}Composite Components:");
        for (i, c) in material.components().iter().enumerate() {
            let _ = writeln!(
                out,
                "{indent}    [{i}] {} - {}, {} bytes",
                c.spec,
                algorithm_label(registry, &c.spki.algorithm),
                c.spki.subject_public_key.len()
            );
        }
    }
}

/// Human-readable dump in the spirit of `openssl x509 -text`.
pub fn render_text(registry: &Registry, cert: &CertificateDocument) -> String {
    let tbs = &cert.tbs;
    let mut out = String::new();
    let _ = writeln!(out, "Certificate:");
    let _ = writeln!(out, "    Version: {} (0x{:x})", tbs.version + 1, tbs.version);
    let _ = writeln!(out, "    Serial Number: {}", tbs.serial_hex());
    let _ = writeln!(
        out,
        "    Signature Algorithm: {}",
        algorithm_label(registry, &tbs.signature)
    );
    let _ = writeln!(out, "    Issuer: {}", tbs.issuer);
    let _ = writeln!(out, "    Validity:");
    let _ = writeln!(out, "        Not Before: {}", time_label(&tbs.validity.not_before));
    let _ = writeln!(out, "        Not After : {}", time_label(&tbs.validity.not_after));
    let _ = writeln!(out, "    Subject: {}", tbs.subject);
    let _ = writeln!(out, "    Subject Public Key Info:");
    write_key(&mut out, registry, &tbs.spki, "        ");

    if !tbs.extensions.is_empty() {
        let _ = writeln!(out, "    X509v3 Extensions:");
        for e in &tbs.extensions {
            let name = extension_name(&e.oid).unwrap_or("unknown");
            let _ = writeln!(
                out,
                "        {name} ({}){}: {} bytes",
                e.oid,
                if e.critical { ", critical" } else { "" },
                e.value.len()
            );
        }
    }

    match catalyst::alt_extensions(tbs) {
        Ok(Some(alt)) => {
            let _ = writeln!(out, "    Alt Public Key Info:");
            write_key(&mut out, registry, &alt.alt_spki, "        ");
            let _ = writeln!(out, "    Alt Signature:");
            let _ = writeln!(
                out,
                "        Algorithm: {}",
                algorithm_label(registry, &alt.alt_signature_algorithm)
            );
            let _ = writeln!(out, "        Value: {} bytes", alt.alt_signature_value.len());
        }
        Ok(None) => {}
        Err(e) => {
            let _ = writeln!(out, "    Alt Extensions: {e}");
        }
    }

    match chameleon::descriptor_of(tbs) {
        Ok(Some(d)) => {
            let _ = writeln!(out, "    Delta Certificate Descriptor:");
            let _ = writeln!(out, "        Serial Number: {}", hex_colon(&d.serial));
            if let Some(sig) = &d.signature {
                let _ = writeln!(out, "        Signature Algorithm: {}", algorithm_label(registry, sig));
            }
            if let Some(issuer) = &d.issuer {
                let _ = writeln!(out, "        Issuer: {issuer}");
            }
            if let Some(v) = &d.validity {
                let _ = writeln!(
                    out,
                    "        Validity: {} to {}",
                    time_label(&v.not_before),
                    time_label(&v.not_after)
                );
            }
            if let Some(subject) = &d.subject {
                let _ = writeln!(out, "        Subject: {subject}");
            }
            let _ = writeln!(out, "        Subject Public Key Info:");
            write_key(&mut out, registry, &d.spki, "            ");
            if let Some(exts) = &d.extensions {
                let _ = writeln!(out, "        Extensions: {} replaced", exts.len());
            }
            let _ = writeln!(out, "        Signature Value: {} bytes", d.signature_value.len());
        }
        Ok(None) => {}
        Err(e) => {
            let _ = writeln!(out, "    Delta Certificate Descriptor: {e}");
        }
    }

    let _ = writeln!(out, "    Signature:");
    let _ = writeln!(
        out,
        "        Algorithm: {}",
        algorithm_label(registry, &cert.signature_algorithm)
    );
    if !cert.signature_algorithms_agree() {
        let _ = writeln!(out, "        Warning: differs from the TBS signature algorithm");
    }
    let composite_sig = (registry.algorithm_name(&cert.signature_algorithm.oid) == Some("composite"))
        .then(|| CompositeSignatureValue::from_der_bytes(&cert.signature).ok())
        .flatten();
    match composite_sig {
        Some(sig) => {
            for (i, part) in sig.parts.iter().enumerate() {
                let _ = writeln!(out, "        Component [{i}]: {} bytes", part.len());
            }
        }
        None => {
            let _ = writeln!(out, "        Value: {} bytes", cert.signature.len());
        }
    }
    out
}

/// Dump of a certification request, in the same layout as [`render_text`].
pub fn render_csr_text(registry: &Registry, csr: &CertificationRequest) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Certificate Request:");
    let _ = writeln!(out, "    Subject: {}", csr.subject);
    let _ = writeln!(out, "    Subject Public Key Info:");
    write_key(&mut out, registry, &csr.spki, "        ");
    match csr.requested_extensions() {
        Ok(exts) if !exts.is_empty() => {
            let _ = writeln!(out, "    Requested Extensions:");
            for e in &exts {
                let name = extension_name(&e.oid).unwrap_or("unknown");
                let _ = writeln!(
                    out,
                    "        {name} ({}){}: {} bytes",
                    e.oid,
                    if e.critical { ", critical" } else { "" },
                    e.value.len()
                );
            }
        }
        Ok(_) => {}
        Err(e) => {
            let _ = writeln!(out, "    Requested Extensions: {e}");
        }
    }
    let _ = writeln!(out, "    Signature:");
    let _ = writeln!(
        out,
        "        Algorithm: {}",
        algorithm_label(registry, &csr.signature_algorithm)
    );
    let _ = writeln!(out, "        Value: {} bytes", csr.signature.len());
    let _ = writeln!(out, "        Self-signature: {}", verify_csr(registry, csr));
    out
}
