//! PEM armor (RFC 7468 style) and file persistence.

use std::fs;
use std::io::Write;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;

use crate::alg::{KeyPairRecord, SubjectPublicKeyInfo};
use crate::error::{Error, Result};

pub const CERTIFICATE: &str = "CERTIFICATE";
pub const PRIVATE_KEY: &str = "PRIVATE KEY";
pub const PUBLIC_KEY: &str = "PUBLIC KEY";
pub const CERTIFICATE_REQUEST: &str = "CERTIFICATE REQUEST";

const LINE_WIDTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PemBlock {
    pub label: String,
    pub der: Vec<u8>,
}

impl PemBlock {
    pub fn new(label: &str, der: Vec<u8>) -> Self {
        Self {
            label: label.to_string(),
            der,
        }
    }
}

/// Armors `der` with 64-column base64 and LF line endings.
pub fn encode_pem(label: &str, der: &[u8]) -> String {
    let body = STANDARD.encode(der);
    let mut out = format!("-----BEGIN {label}-----\n");
    for chunk in body.as_bytes().chunks(LINE_WIDTH) {
        out.push_str(std::str::from_utf8(chunk).expect("base64 is ASCII"));
        out.push('\n');
    }
    out.push_str(&format!("-----END {label}-----\n"));
    out
}

pub fn encode_blocks(blocks: &[PemBlock]) -> String {
    blocks.iter().map(|b| encode_pem(&b.label, &b.der)).collect()
}

/// True when `bytes` looks like PEM text rather than raw DER.
pub fn is_pem(bytes: &[u8]) -> bool {
    let start = bytes
        .iter()
        .position(|b| !b.is_ascii_whitespace())
        .unwrap_or(bytes.len());
    bytes[start..].starts_with(b"-----BEGIN ")
}

/// Every block in `text`, in order. Text between blocks is ignored; CRLF
/// and LF line endings are both accepted.
pub fn decode_pem(text: &str) -> Result<Vec<PemBlock>> {
    let mut blocks = Vec::new();
    let mut current: Option<(String, String)> = None;
    for raw in text.lines() {
        let line = raw.trim();
        if let Some(label) = armor_label(line, "-----BEGIN ") {
            if current.is_some() {
                return Err(Error::MalformedPem(format!("nested BEGIN {label}")));
            }
            current = Some((label.to_string(), String::new()));
        } else if let Some(label) = armor_label(line, "-----END ") {
            let (begin, body) = current
                .take()
                .ok_or_else(|| Error::MalformedPem(format!("END {label} without BEGIN")))?;
            if begin != label {
                return Err(Error::MalformedPem(format!(
                    "BEGIN {begin} closed by END {label}"
                )));
            }
            let der = STANDARD
                .decode(body.as_bytes())
                .map_err(|e| Error::MalformedPem(format!("{begin}: {e}")))?;
            blocks.push(PemBlock { label: begin, der });
        } else if let Some((_, body)) = current.as_mut() {
            body.push_str(line);
        }
    }
    if let Some((label, _)) = current {
        return Err(Error::MalformedPem(format!("BEGIN {label} without END")));
    }
    if blocks.is_empty() {
        return Err(Error::MalformedPem("no PEM blocks found".into()));
    }
    Ok(blocks)
}

fn armor_label<'a>(line: &'a str, prefix: &str) -> Option<&'a str> {
    line.strip_prefix(prefix)?.strip_suffix("-----")
}

/// DER payloads of `bytes`, which may be PEM or a single raw DER value.
/// Raw DER is reported with an empty label.
pub fn decode_any(bytes: &[u8]) -> Result<Vec<PemBlock>> {
    if is_pem(bytes) {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| Error::MalformedPem("PEM text is not UTF-8".into()))?;
        decode_pem(text)
    } else {
        Ok(vec![PemBlock::new("", bytes.to_vec())])
    }
}

pub fn write_pem(path: &Path, label: &str, der: &[u8]) -> Result<()> {
    fs::write(path, encode_pem(label, der))?;
    Ok(())
}

pub fn read_pem(path: &Path) -> Result<Vec<PemBlock>> {
    let text = fs::read_to_string(path)?;
    decode_pem(&text)
}

/// Writes one `PRIVATE KEY` block per key, readable and writable by the
/// owner only where the platform has permission bits. Composite keys are a
/// single block holding the composite container.
pub fn write_private_keys(path: &Path, keys: &[&KeyPairRecord]) -> Result<()> {
    let text: String = keys
        .iter()
        .map(|k| encode_pem(PRIVATE_KEY, &k.private))
        .collect();
    write_owner_only(path, text.as_bytes())
}

pub fn write_private_key(path: &Path, key: &KeyPairRecord) -> Result<()> {
    write_private_keys(path, &[key])
}

pub fn write_public_key(path: &Path, spki: &SubjectPublicKeyInfo) -> Result<()> {
    write_pem(path, PUBLIC_KEY, &spki.to_der_bytes())
}

/// Writes `contents` with owner-only permissions where supported.
#[cfg(unix)]
pub fn write_owner_only(path: &Path, contents: &[u8]) -> Result<()> {
    use std::os::unix::fs::{OpenOptionsExt, PermissionsExt};
    let mut file = fs::OpenOptions::new()
        .write(true)
        .create(true)
        .truncate(true)
        .mode(0o600)
        .open(path)?;
    // `mode` only applies to newly created files.
    file.set_permissions(fs::Permissions::from_mode(0o600))?;
    file.write_all(contents)?;
    Ok(())
}

#[cfg(not(unix))]
pub fn write_owner_only(path: &Path, contents: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wraps_at_64_columns() {
        let pem = encode_pem(CERTIFICATE, &[0xab; 100]);
        let lines: Vec<&str> = pem.lines().collect();
        assert_eq!(lines[0], "-----BEGIN CERTIFICATE-----");
        assert_eq!(lines[1].len(), 64);
        assert_eq!(lines.last(), Some(&"-----END CERTIFICATE-----"));
    }

    #[test]
    fn crlf_and_multiple_blocks() {
        let text = encode_pem(CERTIFICATE, b"one") + "junk between\n" + &encode_pem("X-UNKNOWN", b"two");
        let crlf = text.replace('\n', "\r\n");
        let blocks = decode_pem(&crlf).unwrap();
        assert_eq!(blocks, decode_pem(&text).unwrap());
        assert_eq!(blocks[0], PemBlock::new(CERTIFICATE, b"one".to_vec()));
        assert_eq!(blocks[1], PemBlock::new("X-UNKNOWN", b"two".to_vec()));
    }

    #[test]
    fn malformed() {
        let mismatched = encode_pem(CERTIFICATE, b"x").replace("END CERTIFICATE", "END PRIVATE KEY");
        assert!(matches!(decode_pem(&mismatched), Err(Error::MalformedPem(_))));
        let bad64 = "-----BEGIN CERTIFICATE-----\n!!!!\n-----END CERTIFICATE-----\n";
        assert!(matches!(decode_pem(bad64), Err(Error::MalformedPem(_))));
        assert!(decode_pem("-----BEGIN CERTIFICATE-----\nAAAA\n").is_err());
        assert!(decode_pem("nothing here").is_err());
    }

    #[cfg(unix)]
    #[test]
    fn private_key_permissions() {
        use std::os::unix::fs::PermissionsExt;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.pem");
        fs::write(&path, "old").unwrap();
        fs::set_permissions(&path, fs::Permissions::from_mode(0o644)).unwrap();
        let key = KeyPairRecord {
            spec: crate::alg::AlgorithmSpec::Rsa { bits: 2048 },
            public: vec![1],
            private: vec![0x30, 0x00],
            created_at: chrono::Utc::now(),
        };
        write_private_key(&path, &key).unwrap();
        let mode = fs::metadata(&path).unwrap().permissions().mode() & 0o777;
        assert_eq!(mode, 0o600);
        assert_eq!(read_pem(&path).unwrap()[0].der, vec![0x30, 0x00]);
    }

    proptest! {
        #[test]
        fn round_trip(der in proptest::collection::vec(any::<u8>(), 0..600)) {
            let blocks = decode_pem(&encode_pem(CERTIFICATE, &der)).unwrap();
            prop_assert_eq!(&blocks[0].der, &der);
        }
    }
}
