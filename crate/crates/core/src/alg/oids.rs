use std::collections::BTreeMap;
use std::path::Path;

use crate::der::ObjectIdentifier;
use crate::error::{Error, Result};

/// Built-in `name = dotted.oid` table. Composite and the PQC signature
/// suites are the entries most likely to move once registrations settle;
/// override them with [`OidTable::apply_overrides`].
pub const BUILTIN_OID_TABLE: &str = "\
# PKCS#1 / SEC
rsa-encryption      = 1.2.840.113549.1.1.1
rsa-sha256          = 1.2.840.113549.1.1.11
ec-public-key       = 1.2.840.10045.2.1
secp256r1           = 1.2.840.10045.3.1.7
ecdsa-sha256        = 1.2.840.10045.4.3.2

# FIPS 204 (NIST CSOR sigAlgs arc)
ml-dsa-44           = 2.16.840.1.101.3.4.3.17
ml-dsa-65           = 2.16.840.1.101.3.4.3.18
ml-dsa-87           = 2.16.840.1.101.3.4.3.19

# FIPS 205
slh-dsa-sha2-128s   = 2.16.840.1.101.3.4.3.20
slh-dsa-sha2-128f   = 2.16.840.1.101.3.4.3.21
slh-dsa-sha2-192s   = 2.16.840.1.101.3.4.3.22
slh-dsa-sha2-192f   = 2.16.840.1.101.3.4.3.23
slh-dsa-sha2-256s   = 2.16.840.1.101.3.4.3.24
slh-dsa-sha2-256f   = 2.16.840.1.101.3.4.3.25
slh-dsa-shake-128s  = 2.16.840.1.101.3.4.3.26
slh-dsa-shake-128f  = 2.16.840.1.101.3.4.3.27
slh-dsa-shake-192s  = 2.16.840.1.101.3.4.3.28
slh-dsa-shake-192f  = 2.16.840.1.101.3.4.3.29
slh-dsa-shake-256s  = 2.16.840.1.101.3.4.3.30
slh-dsa-shake-256f  = 2.16.840.1.101.3.4.3.31

# Interim composite OID (Bouncy Castle 1.80), one for every combination
composite           = 1.3.6.1.4.1.18227.2.1
";

/// Mapping from registry names to OIDs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OidTable {
    entries: BTreeMap<String, ObjectIdentifier>,
}

impl Default for OidTable {
    fn default() -> Self {
        Self::builtin()
    }
}

impl OidTable {
    pub fn builtin() -> Self {
        let entries = parse_lines(BUILTIN_OID_TABLE)
            .expect("built-in OID table is valid")
            .into_iter()
            .collect();
        Self { entries }
    }

    /// Replaces entries named in `text`. Names not already in the table are
    /// rejected so that typos do not pass silently.
    pub fn apply_overrides(&mut self, text: &str) -> Result<()> {
        let parsed = parse_lines(text)?;
        for (line, (name, _)) in numbered(text).zip(parsed.iter()) {
            if !self.entries.contains_key(name) {
                return Err(Error::OidTable {
                    line,
                    message: format!("unknown registry name `{name}`"),
                });
            }
        }
        self.entries.extend(parsed);
        Ok(())
    }

    /// Built-in table with overrides read from `path`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut table = Self::builtin();
        table.apply_overrides(&text)?;
        Ok(table)
    }

    pub fn get(&self, name: &str) -> Option<&ObjectIdentifier> {
        self.entries.get(name)
    }

    pub fn name_of(&self, oid: &ObjectIdentifier) -> Option<&str> {
        self.entries
            .iter()
            .find(|(_, v)| *v == oid)
            .map(|(k, _)| k.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ObjectIdentifier)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Renders the table in the same text format it is loaded from.
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Line numbers (1-based) of the non-blank, non-comment lines.
fn numbered(text: &str) -> impl Iterator<Item = usize> + '_ {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let l = strip_comment(l).trim();
            !l.is_empty()
        })
        .map(|(i, _)| i + 1)
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(before, _)| before)
}

fn parse_lines(text: &str) -> Result<Vec<(String, ObjectIdentifier)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::OidTable { line: i + 1, message };
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected `name = dotted.oid`".into()))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(err("empty name".into()));
        }
        let oid = value
            .trim()
            .parse::<ObjectIdentifier>()
            .map_err(|e| err(e.to_string()))?;
        out.push((name.to_ascii_lowercase(), oid));
    }
    Ok(out)
}
