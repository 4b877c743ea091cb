use std::fmt;
use std::str::FromStr;

use super::DerError;

/// An ASN.1 OBJECT IDENTIFIER held as its arcs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectIdentifier {
    arcs: Vec<u64>,
}

impl ObjectIdentifier {
    pub fn new(arcs: &[u64]) -> Result<Self, DerError> {
        if arcs.len() < 2 {
            return Err(DerError::InvalidOid("fewer than two arcs".into()));
        }
        if arcs[0] > 2 {
            return Err(DerError::InvalidOid(format!("first arc {} > 2", arcs[0])));
        }
        if arcs[0] < 2 && arcs[1] >= 40 {
            return Err(DerError::InvalidOid(format!(
                "second arc {} >= 40 under first arc {}",
                arcs[1], arcs[0]
            )));
        }
        if arcs[1].checked_add(arcs[0] * 40).is_none() {
            return Err(DerError::InvalidOid("arc overflow".into()));
        }
        Ok(Self {
            arcs: arcs.to_vec(),
        })
    }

    pub fn arcs(&self) -> &[u64] {
        &self.arcs
    }

    /// Content octets of the DER encoding (without tag and length).
    pub fn to_content_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.arcs.len() * 2);
        push_base128(&mut out, self.arcs[0] * 40 + self.arcs[1]);
        for &arc in &self.arcs[2..] {
            push_base128(&mut out, arc);
        }
        out
    }

    /// Parses canonical content octets; rejects padding `0x80` bytes and
    /// unterminated sub-identifiers.
    pub fn from_content_bytes(bytes: &[u8]) -> Result<Self, DerError> {
        if bytes.is_empty() {
            return Err(DerError::InvalidOid("empty".into()));
        }
        let mut subids = Vec::new();
        let mut acc: u64 = 0;
        let mut start = true;
        for &b in bytes {
            if start && b == 0x80 {
                return Err(DerError::InvalidOid("non-minimal sub-identifier".into()));
            }
            if acc > (u64::MAX >> 7) {
                return Err(DerError::InvalidOid("sub-identifier overflow".into()));
            }
            acc = (acc << 7) | u64::from(b & 0x7f);
            if b & 0x80 == 0 {
                subids.push(acc);
                acc = 0;
                start = true;
            } else {
                start = false;
            }
        }
        if !start {
            return Err(DerError::InvalidOid("truncated sub-identifier".into()));
        }
        let first = subids[0];
        let mut arcs = Vec::with_capacity(subids.len() + 1);
        match first {
            0..=39 => arcs.extend([0, first]),
            40..=79 => arcs.extend([1, first - 40]),
            _ => arcs.extend([2, first - 80]),
        }
        arcs.extend_from_slice(&subids[1..]);
        Ok(Self { arcs })
    }
}

fn push_base128(out: &mut Vec<u8>, mut value: u64) {
    let mut tmp = [0u8; 10];
    let mut i = tmp.len();
    loop {
        i -= 1;
        tmp[i] = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            break;
        }
    }
    let last = tmp.len() - 1;
    for (j, b) in tmp[i..].iter().enumerate() {
        if i + j == last {
            out.push(*b);
        } else {
            out.push(*b | 0x80);
        }
    }
}

impl fmt::Display for ObjectIdentifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, arc) in self.arcs.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{arc}")?;
        }
        Ok(())
    }
}

impl FromStr for ObjectIdentifier {
    type Err = DerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let arcs = s
            .trim()
            .split('.')
            .map(|part| {
                if part.is_empty() || (part.len() > 1 && part.starts_with('0')) {
                    return Err(DerError::InvalidOid(format!("bad arc `{part}` in `{s}`")));
                }
                part.parse::<u64>()
                    .map_err(|_| DerError::InvalidOid(format!("bad arc `{part}` in `{s}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(&arcs)
    }
}

/// Builds an [`ObjectIdentifier`] from a dotted literal known to be valid.
pub fn oid(dotted: &str) -> ObjectIdentifier {
    dotted.parse().expect("static OID literal")
}
