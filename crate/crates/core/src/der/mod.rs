//! Strict DER encoder and decoder.
//!
//! Only the definite, minimal-length form is accepted. Universal types used
//! by certificates are checked for their canonical content encoding as well,
//! so every accepted input re-encodes to exactly the bytes it came from.

mod name;
mod oid;
mod time;

use std::fmt;

pub use name::{parse_name, AttributeTypeAndValue, DistinguishedName, NameAttribute, NAME_ATTRIBUTES};
pub use oid::{oid, ObjectIdentifier};
pub use time::Time;

/// Nesting limit for constructed values.
pub const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DerError {
    #[error("truncated DER input")]
    Truncated,
    #[error("non-canonical length encoding")]
    NonCanonicalLength,
    #[error("indefinite length is not allowed in DER")]
    IndefiniteLength,
    #[error("length does not fit in memory")]
    LengthTooLarge,
    #[error("trailing bytes after DER value")]
    TrailingBytes,
    #[error("bad tag: {0}")]
    BadTag(&'static str),
    #[error("non-canonical {0} encoding")]
    NonCanonicalValue(&'static str),
    #[error("nesting deeper than {MAX_DEPTH}")]
    DepthExceeded,
    #[error("invalid object identifier: {0}")]
    InvalidOid(String),
    #[error("invalid time: {0}")]
    InvalidTime(String),
    #[error("expected {expected}, found {found}")]
    UnexpectedTag { expected: String, found: Tag },
    #[error("malformed structure: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Universal,
    Application,
    ContextSpecific,
    Private,
}

/// Tag class and number. Whether the value is constructed is a property of
/// the [`DerValue`] content, not of the tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag {
    pub class: Class,
    pub number: u32,
}

impl Tag {
    pub const BOOLEAN: Tag = Tag::universal(1);
    pub const INTEGER: Tag = Tag::universal(2);
    pub const BIT_STRING: Tag = Tag::universal(3);
    pub const OCTET_STRING: Tag = Tag::universal(4);
    pub const NULL: Tag = Tag::universal(5);
    pub const OID: Tag = Tag::universal(6);
    pub const ENUMERATED: Tag = Tag::universal(10);
    pub const UTF8_STRING: Tag = Tag::universal(12);
    pub const SEQUENCE: Tag = Tag::universal(16);
    pub const SET: Tag = Tag::universal(17);
    pub const PRINTABLE_STRING: Tag = Tag::universal(19);
    pub const TELETEX_STRING: Tag = Tag::universal(20);
    pub const IA5_STRING: Tag = Tag::universal(22);
    pub const UTC_TIME: Tag = Tag::universal(23);
    pub const GENERALIZED_TIME: Tag = Tag::universal(24);
    pub const UNIVERSAL_STRING: Tag = Tag::universal(28);
    pub const BMP_STRING: Tag = Tag::universal(30);

    pub const fn universal(number: u32) -> Tag {
        Tag {
            class: Class::Universal,
            number,
        }
    }

    pub const fn context(number: u32) -> Tag {
        Tag {
            class: Class::ContextSpecific,
            number,
        }
    }

    fn write(&self, constructed: bool, out: &mut Vec<u8>) {
        let class_bits = match self.class {
            Class::Universal => 0x00,
            Class::Application => 0x40,
            Class::ContextSpecific => 0x80,
            Class::Private => 0xc0,
        };
        let cons = if constructed { 0x20 } else { 0x00 };
        if self.number < 31 {
            out.push(class_bits | cons | self.number as u8);
        } else {
            out.push(class_bits | cons | 0x1f);
            let mut tmp = Vec::new();
            let mut n = self.number;
            loop {
                tmp.push((n & 0x7f) as u8);
                n >>= 7;
                if n == 0 {
                    break;
                }
            }
            for (i, b) in tmp.iter().rev().enumerate() {
                let more = if i + 1 < tmp.len() { 0x80 } else { 0 };
                out.push(b | more);
            }
        }
    }

    /// Universal types whose DER form is always primitive.
    fn must_be_primitive(&self) -> bool {
        self.class == Class::Universal
            && matches!(
                self.number,
                1..=6 | 9 | 10 | 12 | 13 | 18..=30
            )
    }

    fn must_be_constructed(&self) -> bool {
        self.class == Class::Universal && matches!(self.number, 16 | 17)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.class {
            Class::Universal => {
                let name = match self.number {
                    1 => "BOOLEAN",
                    2 => "INTEGER",
                    3 => "BIT STRING",
                    4 => "OCTET STRING",
                    5 => "NULL",
                    6 => "OBJECT IDENTIFIER",
                    10 => "ENUMERATED",
                    12 => "UTF8String",
                    16 => "SEQUENCE",
                    17 => "SET",
                    19 => "PrintableString",
                    20 => "TeletexString",
                    22 => "IA5String",
                    23 => "UTCTime",
                    24 => "GeneralizedTime",
                    30 => "BMPString",
                    _ => return write!(f, "UNIVERSAL {}", self.number),
                };
                f.write_str(name)
            }
            Class::Application => write!(f, "[APPLICATION {}]", self.number),
            Class::ContextSpecific => write!(f, "[{}]", self.number),
            Class::Private => write!(f, "[PRIVATE {}]", self.number),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Content {
    Primitive(Vec<u8>),
    Constructed(Vec<DerValue>),
}

/// One decoded (or to-be-encoded) TLV.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DerValue {
    tag: Tag,
    content: Content,
}

impl DerValue {
    pub fn primitive(tag: Tag, bytes: Vec<u8>) -> Self {
        Self {
            tag,
            content: Content::Primitive(bytes),
        }
    }

    pub fn constructed(tag: Tag, children: Vec<DerValue>) -> Self {
        Self {
            tag,
            content: Content::Constructed(children),
        }
    }

    pub fn sequence(children: Vec<DerValue>) -> Self {
        Self::constructed(Tag::SEQUENCE, children)
    }

    pub fn set(children: Vec<DerValue>) -> Self {
        Self::constructed(Tag::SET, children)
    }

    /// `[n] EXPLICIT` wrapper around one value.
    pub fn explicit(number: u32, inner: DerValue) -> Self {
        Self::constructed(Tag::context(number), vec![inner])
    }

    pub fn boolean(value: bool) -> Self {
        Self::primitive(Tag::BOOLEAN, vec![if value { 0xff } else { 0x00 }])
    }

    pub fn null() -> Self {
        Self::primitive(Tag::NULL, Vec::new())
    }

    pub fn integer_u64(value: u64) -> Self {
        Self::integer_unsigned(&value.to_be_bytes())
    }

    /// INTEGER from an unsigned big-endian magnitude.
    pub fn integer_unsigned(magnitude: &[u8]) -> Self {
        let first = magnitude.iter().position(|&b| b != 0);
        let mut bytes = match first {
            None => vec![0],
            Some(i) => magnitude[i..].to_vec(),
        };
        if bytes[0] & 0x80 != 0 {
            bytes.insert(0, 0);
        }
        Self::primitive(Tag::INTEGER, bytes)
    }

    pub fn oid(oid: &ObjectIdentifier) -> Self {
        Self::primitive(Tag::OID, oid.to_content_bytes())
    }

    /// BIT STRING with zero unused bits.
    pub fn bit_string(bits: &[u8]) -> Self {
        let mut bytes = Vec::with_capacity(bits.len() + 1);
        bytes.push(0);
        bytes.extend_from_slice(bits);
        Self::primitive(Tag::BIT_STRING, bytes)
    }

    pub fn octet_string(bytes: Vec<u8>) -> Self {
        Self::primitive(Tag::OCTET_STRING, bytes)
    }

    pub fn utf8_string(s: &str) -> Self {
        Self::primitive(Tag::UTF8_STRING, s.as_bytes().to_vec())
    }

    pub fn printable_string(s: &str) -> Self {
        Self::primitive(Tag::PRINTABLE_STRING, s.as_bytes().to_vec())
    }

    pub fn tag(&self) -> Tag {
        self.tag
    }

    pub fn content(&self) -> &Content {
        &self.content
    }

    pub fn is_constructed(&self) -> bool {
        matches!(self.content, Content::Constructed(_))
    }

    /// Primitive content octets.
    pub fn bytes(&self) -> Option<&[u8]> {
        match &self.content {
            Content::Primitive(b) => Some(b),
            Content::Constructed(_) => None,
        }
    }

    pub fn children(&self) -> Option<&[DerValue]> {
        match &self.content {
            Content::Primitive(_) => None,
            Content::Constructed(c) => Some(c),
        }
    }

    pub fn children_mut(&mut self) -> Option<&mut Vec<DerValue>> {
        match &mut self.content {
            Content::Primitive(_) => None,
            Content::Constructed(c) => Some(c),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode_into(&mut out);
        out
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        self.tag.write(self.is_constructed(), out);
        match &self.content {
            Content::Primitive(bytes) => {
                write_length(bytes.len(), out);
                out.extend_from_slice(bytes);
            }
            Content::Constructed(children) => {
                let mut body = Vec::new();
                for child in children {
                    child.encode_into(&mut body);
                }
                write_length(body.len(), out);
                out.extend_from_slice(&body);
            }
        }
    }

    /// Decodes exactly one value spanning all of `input`.
    pub fn decode(input: &[u8]) -> Result<Self, DerError> {
        let (value, rest) = Self::decode_prefix(input)?;
        if !rest.is_empty() {
            return Err(DerError::TrailingBytes);
        }
        Ok(value)
    }

    /// Decodes one value from the front of `input`, returning the remainder.
    pub fn decode_prefix(input: &[u8]) -> Result<(Self, &[u8]), DerError> {
        decode_at_depth(input, 0)
    }

    fn expect_tag(&self, tag: Tag) -> Result<(), DerError> {
        if self.tag == tag {
            Ok(())
        } else {
            Err(DerError::UnexpectedTag {
                expected: tag.to_string(),
                found: self.tag,
            })
        }
    }

    fn primitive_of(&self, tag: Tag) -> Result<&[u8], DerError> {
        self.expect_tag(tag)?;
        self.bytes()
            .ok_or(DerError::BadTag("constructed form of primitive type"))
    }

    pub fn as_sequence(&self) -> Result<&[DerValue], DerError> {
        self.expect_tag(Tag::SEQUENCE)?;
        self.children()
            .ok_or(DerError::BadTag("primitive SEQUENCE"))
    }

    pub fn as_set(&self) -> Result<&[DerValue], DerError> {
        self.expect_tag(Tag::SET)?;
        self.children().ok_or(DerError::BadTag("primitive SET"))
    }

    /// Inner value of an `[n] EXPLICIT` wrapper.
    pub fn as_explicit(&self, number: u32) -> Result<&DerValue, DerError> {
        self.expect_tag(Tag::context(number))?;
        match self.children() {
            Some([inner]) => Ok(inner),
            _ => Err(DerError::Malformed(format!(
                "[{number}] EXPLICIT must hold exactly one value"
            ))),
        }
    }

    pub fn as_oid(&self) -> Result<ObjectIdentifier, DerError> {
        ObjectIdentifier::from_content_bytes(self.primitive_of(Tag::OID)?)
    }

    pub fn as_bool(&self) -> Result<bool, DerError> {
        Ok(self.primitive_of(Tag::BOOLEAN)? == [0xff])
    }

    /// Two's-complement INTEGER content octets.
    pub fn as_integer_bytes(&self) -> Result<&[u8], DerError> {
        self.primitive_of(Tag::INTEGER)
    }

    pub fn as_u64(&self) -> Result<u64, DerError> {
        let bytes = self.as_integer_bytes()?;
        if bytes[0] & 0x80 != 0 {
            return Err(DerError::Malformed("negative INTEGER".into()));
        }
        let bytes = if bytes[0] == 0 { &bytes[1..] } else { bytes };
        if bytes.len() > 8 {
            return Err(DerError::Malformed("INTEGER too large".into()));
        }
        Ok(bytes.iter().fold(0u64, |acc, &b| (acc << 8) | u64::from(b)))
    }

    /// BIT STRING payload; only whole-octet strings are accepted.
    pub fn as_bit_string(&self) -> Result<&[u8], DerError> {
        let bytes = self.primitive_of(Tag::BIT_STRING)?;
        if bytes[0] != 0 {
            return Err(DerError::Malformed("BIT STRING with unused bits".into()));
        }
        Ok(&bytes[1..])
    }

    pub fn as_octet_string(&self) -> Result<&[u8], DerError> {
        self.primitive_of(Tag::OCTET_STRING)
    }
}

/// SEQUENCE whose content is the concatenation of already-encoded values,
/// copied verbatim.
pub fn sequence_of_encoded(parts: &[&[u8]]) -> Vec<u8> {
    let len = parts.iter().map(|p| p.len()).sum();
    let mut out = Vec::with_capacity(len + 6);
    Tag::SEQUENCE.write(true, &mut out);
    write_length(len, &mut out);
    for p in parts {
        out.extend_from_slice(p);
    }
    out
}

fn write_length(len: usize, out: &mut Vec<u8>) {
    if len < 0x80 {
        out.push(len as u8);
    } else {
        let bytes = len.to_be_bytes();
        let skip = bytes.iter().take_while(|&&b| b == 0).count();
        out.push(0x80 | (bytes.len() - skip) as u8);
        out.extend_from_slice(&bytes[skip..]);
    }
}

struct Header {
    tag: Tag,
    constructed: bool,
    len: usize,
    header_len: usize,
}

fn read_header(input: &[u8]) -> Result<Header, DerError> {
    let first = *input.first().ok_or(DerError::Truncated)?;
    let class = match first >> 6 {
        0 => Class::Universal,
        1 => Class::Application,
        2 => Class::ContextSpecific,
        _ => Class::Private,
    };
    let constructed = first & 0x20 != 0;
    let mut pos = 1;
    let mut number = u32::from(first & 0x1f);
    if number == 0x1f {
        number = 0;
        loop {
            let b = *input.get(pos).ok_or(DerError::Truncated)?;
            if pos == 1 && b == 0x80 {
                return Err(DerError::BadTag("non-minimal tag number"));
            }
            if number > (u32::MAX >> 7) {
                return Err(DerError::BadTag("tag number overflow"));
            }
            number = (number << 7) | u32::from(b & 0x7f);
            pos += 1;
            if b & 0x80 == 0 {
                break;
            }
        }
        if number < 31 {
            return Err(DerError::BadTag("high-tag form for low tag number"));
        }
    }
    if class == Class::Universal && number == 0 {
        return Err(DerError::BadTag("end-of-contents"));
    }

    let lb = *input.get(pos).ok_or(DerError::Truncated)?;
    pos += 1;
    let len = if lb < 0x80 {
        usize::from(lb)
    } else if lb == 0x80 {
        return Err(DerError::IndefiniteLength);
    } else {
        let n = usize::from(lb & 0x7f);
        if n == 0x7f || n > std::mem::size_of::<usize>() {
            return Err(DerError::LengthTooLarge);
        }
        let bytes = input.get(pos..pos + n).ok_or(DerError::Truncated)?;
        if bytes[0] == 0 {
            return Err(DerError::NonCanonicalLength);
        }
        pos += n;
        let len = bytes.iter().fold(0usize, |acc, &b| (acc << 8) | usize::from(b));
        if len < 0x80 {
            return Err(DerError::NonCanonicalLength);
        }
        len
    };
    Ok(Header {
        tag: Tag { class, number },
        constructed,
        len,
        header_len: pos,
    })
}

fn decode_at_depth(input: &[u8], depth: usize) -> Result<(DerValue, &[u8]), DerError> {
    if depth > MAX_DEPTH {
        return Err(DerError::DepthExceeded);
    }
    let header = read_header(input)?;
    let end = header
        .header_len
        .checked_add(header.len)
        .ok_or(DerError::LengthTooLarge)?;
    if end > input.len() {
        return Err(DerError::Truncated);
    }
    let body = &input[header.header_len..end];
    let rest = &input[end..];
    let tag = header.tag;

    if header.constructed {
        if tag.must_be_primitive() {
            return Err(DerError::BadTag("constructed form of primitive type"));
        }
        let mut children = Vec::new();
        let mut remaining = body;
        while !remaining.is_empty() {
            let (child, next) = decode_at_depth(remaining, depth + 1)?;
            children.push(child);
            remaining = next;
        }
        Ok((DerValue::constructed(tag, children), rest))
    } else {
        if tag.must_be_constructed() {
            return Err(DerError::BadTag("primitive form of SEQUENCE/SET"));
        }
        if tag.class == Class::Universal {
            check_universal_content(tag.number, body)?;
        }
        Ok((DerValue::primitive(tag, body.to_vec()), rest))
    }
}

fn check_universal_content(number: u32, body: &[u8]) -> Result<(), DerError> {
    match number {
        1 => {
            if body != [0x00] && body != [0xff] {
                return Err(DerError::NonCanonicalValue("BOOLEAN"));
            }
        }
        2 | 10 => match body {
            [] => return Err(DerError::NonCanonicalValue("INTEGER")),
            [0x00, next, ..] if next & 0x80 == 0 => {
                return Err(DerError::NonCanonicalValue("INTEGER"))
            }
            [0xff, next, ..] if next & 0x80 != 0 => {
                return Err(DerError::NonCanonicalValue("INTEGER"))
            }
            _ => {}
        },
        3 => match body {
            [] => return Err(DerError::NonCanonicalValue("BIT STRING")),
            [unused] if *unused != 0 => return Err(DerError::NonCanonicalValue("BIT STRING")),
            [unused, .., last] if *unused > 7 || last & ((1u8 << unused) - 1) != 0 => {
                return Err(DerError::NonCanonicalValue("BIT STRING"));
            }
            _ => {}
        },
        5 => {
            if !body.is_empty() {
                return Err(DerError::NonCanonicalValue("NULL"));
            }
        }
        6 => {
            ObjectIdentifier::from_content_bytes(body)?;
        }
        _ => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sequence() {
        assert_eq!(DerValue::sequence(vec![]).encode(), [0x30, 0x00]);
        assert_eq!(
            DerValue::decode(&[0x30, 0x00]).unwrap(),
            DerValue::sequence(vec![])
        );
    }

    #[test]
    fn boolean_true() {
        assert_eq!(DerValue::boolean(true).encode(), [0x01, 0x01, 0xff]);
        assert_eq!(
            DerValue::decode(&[0x01, 0x01, 0x01]),
            Err(DerError::NonCanonicalValue("BOOLEAN"))
        );
    }

    #[test]
    fn composite_oid_vector() {
        let v = DerValue::oid(&oid("1.3.6.1.4.1.18227.2.1"));
        assert_eq!(
            v.encode(),
            [0x06, 0x0A, 0x2B, 0x06, 0x01, 0x04, 0x01, 0x81, 0x8E, 0x33, 0x02, 0x01]
        );
    }

    #[test]
    fn long_form_for_short_length_rejected() {
        let input = [0x30, 0x81, 0x05, 0x05, 0x00, 0x05, 0x00, 0x05];
        assert_eq!(DerValue::decode(&input), Err(DerError::NonCanonicalLength));
        let padded = [0x04, 0x82, 0x00, 0x80];
        assert_eq!(DerValue::decode(&padded), Err(DerError::NonCanonicalLength));
    }

    #[test]
    fn long_lengths_round_trip() {
        let v = DerValue::octet_string(vec![7; 300]);
        let enc = v.encode();
        assert_eq!(&enc[..4], &[0x04, 0x82, 0x01, 0x2c]);
        assert_eq!(DerValue::decode(&enc).unwrap(), v);
    }

    #[test]
    fn errors() {
        assert_eq!(DerValue::decode(&[]), Err(DerError::Truncated));
        assert_eq!(DerValue::decode(&[0x30, 0x02, 0x05]), Err(DerError::Truncated));
        assert_eq!(DerValue::decode(&[0x05, 0x00, 0x00]), Err(DerError::TrailingBytes));
        assert_eq!(DerValue::decode(&[0x30, 0x80, 0x00, 0x00]), Err(DerError::IndefiniteLength));
        assert!(matches!(DerValue::decode(&[0x00, 0x00]), Err(DerError::BadTag(_))));
        assert!(matches!(DerValue::decode(&[0x1f, 0x05, 0x00]), Err(DerError::BadTag(_))));
        assert!(matches!(DerValue::decode(&[0x10, 0x00]), Err(DerError::BadTag(_))));
        assert!(matches!(DerValue::decode(&[0x24, 0x00]), Err(DerError::BadTag(_))));
    }

    #[test]
    fn integer_canonical_forms() {
        assert_eq!(DerValue::integer_u64(0).encode(), [0x02, 0x01, 0x00]);
        assert_eq!(DerValue::integer_u64(128).encode(), [0x02, 0x02, 0x00, 0x80]);
        assert_eq!(DerValue::integer_unsigned(&[0, 0, 1]).encode(), [0x02, 0x01, 0x01]);
        assert!(DerValue::decode(&[0x02, 0x02, 0x00, 0x7f]).is_err());
        assert!(DerValue::decode(&[0x02, 0x02, 0xff, 0x80]).is_err());
        assert!(DerValue::decode(&[0x02, 0x00]).is_err());
        assert!(DerValue::decode(&[0x02, 0x02, 0xff, 0x7f]).is_ok());
    }

    #[test]
    fn bit_string_padding() {
        assert!(DerValue::decode(&[0x03, 0x02, 0x01, 0x01]).is_err());
        assert!(DerValue::decode(&[0x03, 0x02, 0x01, 0x02]).is_ok());
        assert!(DerValue::decode(&[0x03, 0x01, 0x01]).is_err());
        assert!(DerValue::decode(&[0x03, 0x02, 0x08, 0x00]).is_err());
    }

    #[test]
    fn high_tag_numbers() {
        let v = DerValue::primitive(Tag::context(200), vec![1, 2]);
        let enc = v.encode();
        assert_eq!(enc, [0x9f, 0x81, 0x48, 0x02, 0x01, 0x02]);
        assert_eq!(DerValue::decode(&enc).unwrap(), v);
        assert!(DerValue::decode(&[0x9f, 0x80, 0x48, 0x00]).is_err());
    }

    #[test]
    fn depth_limit() {
        let mut v = DerValue::null();
        for _ in 0..MAX_DEPTH + 2 {
            v = DerValue::sequence(vec![v]);
        }
        assert_eq!(DerValue::decode(&v.encode()), Err(DerError::DepthExceeded));
    }
}
