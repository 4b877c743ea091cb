use std::fmt;

use super::{oid, DerError, DerValue, ObjectIdentifier, Tag};
use crate::error::Error;

/// Attribute keys accepted by [`parse_name`].
#[derive(Debug, Clone, Copy)]
pub struct NameAttribute {
    pub key: &'static str,
    pub oid: &'static str,
    pub string_tag: Tag,
}

pub const NAME_ATTRIBUTES: &[NameAttribute] = &[
    NameAttribute { key: "CN", oid: "2.5.4.3", string_tag: Tag::UTF8_STRING },
    NameAttribute { key: "SERIALNUMBER", oid: "2.5.4.5", string_tag: Tag::PRINTABLE_STRING },
    NameAttribute { key: "C", oid: "2.5.4.6", string_tag: Tag::PRINTABLE_STRING },
    NameAttribute { key: "L", oid: "2.5.4.7", string_tag: Tag::UTF8_STRING },
    NameAttribute { key: "ST", oid: "2.5.4.8", string_tag: Tag::UTF8_STRING },
    NameAttribute { key: "STREET", oid: "2.5.4.9", string_tag: Tag::UTF8_STRING },
    NameAttribute { key: "O", oid: "2.5.4.10", string_tag: Tag::UTF8_STRING },
    NameAttribute { key: "OU", oid: "2.5.4.11", string_tag: Tag::UTF8_STRING },
    NameAttribute { key: "DC", oid: "0.9.2342.19200300.100.1.25", string_tag: Tag::IA5_STRING },
];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AttributeTypeAndValue {
    pub oid: ObjectIdentifier,
    /// The attribute value exactly as encoded (usually a string type).
    pub value: DerValue,
}

impl AttributeTypeAndValue {
    pub fn text(&self) -> String {
        let Some(bytes) = self.value.bytes() else {
            return format!("<{}>", self.value.tag());
        };
        match self.value.tag() {
            Tag::BMP_STRING => {
                let units: Vec<u16> = bytes
                    .chunks(2)
                    .map(|c| u16::from_be_bytes([c[0], *c.get(1).unwrap_or(&0)]))
                    .collect();
                String::from_utf16_lossy(&units)
            }
            _ => String::from_utf8_lossy(bytes).into_owned(),
        }
    }

    pub fn short_key(&self) -> String {
        NAME_ATTRIBUTES
            .iter()
            .find(|a| oid(a.oid) == self.oid)
            .map(|a| a.key.to_string())
            .unwrap_or_else(|| self.oid.to_string())
    }
}

/// An X.501 Name: a sequence of RDN sets, kept in encoding order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DistinguishedName {
    pub rdns: Vec<Vec<AttributeTypeAndValue>>,
}

impl DistinguishedName {
    pub fn common_name(&self) -> Option<String> {
        let cn = oid("2.5.4.3");
        self.rdns
            .iter()
            .flatten()
            .find(|atv| atv.oid == cn)
            .map(AttributeTypeAndValue::text)
    }

    pub fn to_der(&self) -> DerValue {
        DerValue::sequence(
            self.rdns
                .iter()
                .map(|rdn| {
                    DerValue::set(
                        rdn.iter()
                            .map(|atv| {
                                DerValue::sequence(vec![DerValue::oid(&atv.oid), atv.value.clone()])
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn from_der(value: &DerValue) -> Result<Self, DerError> {
        let mut rdns = Vec::new();
        for set in value.as_sequence()? {
            let mut rdn = Vec::new();
            for atv in set.as_set()? {
                match atv.as_sequence()? {
                    [ty, val] => rdn.push(AttributeTypeAndValue {
                        oid: ty.as_oid()?,
                        value: val.clone(),
                    }),
                    _ => return Err(DerError::Malformed("AttributeTypeAndValue".into())),
                }
            }
            if rdn.is_empty() {
                return Err(DerError::Malformed("empty RDN".into()));
            }
            rdns.push(rdn);
        }
        Ok(Self { rdns })
    }
}

impl fmt::Display for DistinguishedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for atv in self.rdns.iter().flatten() {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{}={}", atv.short_key(), atv.text())?;
        }
        Ok(())
    }
}

/// Parses `KEY=VALUE(,KEY=VALUE)*`, one RDN per attribute, in written
/// order. The OpenSSL `/KEY=VALUE/...` form is also accepted. A backslash
/// escapes the next character.
pub fn parse_name(text: &str) -> Result<DistinguishedName, Error> {
    let text = text.trim();
    let (sep, body) = match text.strip_prefix('/') {
        Some(rest) => ('/', rest),
        None => (',', text),
    };
    if body.is_empty() {
        return Err(Error::MalformedName("empty name".into()));
    }
    let mut rdns = Vec::new();
    for part in split_unescaped(body, sep) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::MalformedName(format!("`{part}` is not KEY=VALUE")))?;
        let key = key.trim();
        let value = unescape(value.trim());
        let attr = NAME_ATTRIBUTES
            .iter()
            .find(|a| a.key.eq_ignore_ascii_case(key))
            .ok_or_else(|| Error::UnknownAttributeKey(key.to_string()))?;
        if value.is_empty() {
            return Err(Error::EmptyValue(attr.key.to_string()));
        }
        if attr.string_tag == Tag::PRINTABLE_STRING && !value.chars().all(is_printable) {
            return Err(Error::MalformedName(format!(
                "{} value `{value}` is not a PrintableString",
                attr.key
            )));
        }
        if attr.string_tag == Tag::IA5_STRING && !value.is_ascii() {
            return Err(Error::MalformedName(format!("{} value must be ASCII", attr.key)));
        }
        rdns.push(vec![AttributeTypeAndValue {
            oid: oid(attr.oid),
            value: DerValue::primitive(attr.string_tag, value.into_bytes()),
        }]);
    }
    Ok(DistinguishedName { rdns })
}

fn is_printable(c: char) -> bool {
    c.is_ascii_alphanumeric() || " '()+,-./:=?".contains(c)
}

fn split_unescaped(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut start = 0;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if escaped {
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == sep {
            parts.push(&s[start..i]);
            start = i + c.len_utf8();
        }
    }
    parts.push(&s[start..]);
    parts
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(c);
        }
    }
    out
}
