use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Upper bound on composite component count.
pub const MAX_COMPOSITE_COMPONENTS: usize = 4;

pub const RSA_DEFAULT_BITS: u32 = 2048;
pub const RSA_ALLOWED_BITS: &[u32] = &[2048, 3072, 4096];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Rsa,
    Ecdsa,
    MlDsa,
    SlhDsa,
    Composite,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Rsa => "RSA",
            Family::Ecdsa => "ECDSA",
            Family::MlDsa => "ML-DSA",
            Family::SlhDsa => "SLH-DSA",
            Family::Composite => "COMPOSITE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EcCurve {
    P256,
}

/// ML-DSA parameter set, named by NIST security category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MlDsaLevel {
    /// ML-DSA-44
    L2,
    /// ML-DSA-65
    L3,
    /// ML-DSA-87
    L5,
}

impl MlDsaLevel {
    pub fn level(self) -> u8 {
        match self {
            MlDsaLevel::L2 => 2,
            MlDsaLevel::L3 => 3,
            MlDsaLevel::L5 => 5,
        }
    }

    /// The FIPS 204 parameter-set suffix (44, 65 or 87).
    pub fn set_name(self) -> u8 {
        match self {
            MlDsaLevel::L2 => 44,
            MlDsaLevel::L3 => 65,
            MlDsaLevel::L5 => 87,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlhHash {
    Sha2,
    Shake,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlhDsaParams {
    pub hash: SlhHash,
    /// 128, 192 or 256
    pub security_bits: u16,
    /// `f` (fast signing) rather than `s` (small signatures)
    pub fast: bool,
}

impl SlhDsaParams {
    /// e.g. `sha2-192f`
    pub fn set_name(&self) -> String {
        format!(
            "{}-{}{}",
            match self.hash {
                SlhHash::Sha2 => "sha2",
                SlhHash::Shake => "shake",
            },
            self.security_bits,
            if self.fast { 'f' } else { 's' }
        )
    }

    pub fn public_key_len(&self) -> usize {
        usize::from(self.security_bits / 4)
    }
}

/// Ordered components of a composite algorithm. Always 2..=4 entries, none
/// of them composite.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompositeSpec(Vec<AlgorithmSpec>);

impl CompositeSpec {
    pub fn new(components: Vec<AlgorithmSpec>) -> Result<Self> {
        if components.iter().any(|c| c.family() == Family::Composite) {
            return Err(Error::NestedComposite);
        }
        if components.len() < 2 {
            return Err(Error::TooFewComponents(components.len()));
        }
        if components.len() > MAX_COMPOSITE_COMPONENTS {
            return Err(Error::TooManyComponents {
                got: components.len(),
                max: MAX_COMPOSITE_COMPONENTS,
            });
        }
        Ok(Self(components))
    }

    pub fn components(&self) -> &[AlgorithmSpec] {
        &self.0
    }
}

/// One signature suite, as selected on the command line.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AlgorithmSpec {
    Rsa { bits: u32 },
    Ecdsa(EcCurve),
    MlDsa(MlDsaLevel),
    SlhDsa(SlhDsaParams),
    Composite(CompositeSpec),
}

impl AlgorithmSpec {
    pub fn family(&self) -> Family {
        match self {
            AlgorithmSpec::Rsa { .. } => Family::Rsa,
            AlgorithmSpec::Ecdsa(_) => Family::Ecdsa,
            AlgorithmSpec::MlDsa(_) => Family::MlDsa,
            AlgorithmSpec::SlhDsa(_) => Family::SlhDsa,
            AlgorithmSpec::Composite(_) => Family::Composite,
        }
    }

    pub fn is_composite(&self) -> bool {
        matches!(self, AlgorithmSpec::Composite(_))
    }

    /// Components of a composite spec; empty for single algorithms.
    pub fn components(&self) -> &[AlgorithmSpec] {
        match self {
            AlgorithmSpec::Composite(c) => c.components(),
            _ => &[],
        }
    }

    pub fn composite(components: Vec<AlgorithmSpec>) -> Result<Self> {
        CompositeSpec::new(components).map(AlgorithmSpec::Composite)
    }

    /// Key of this spec's signature algorithm in the OID table.
    pub fn signature_oid_name(&self) -> String {
        match self {
            AlgorithmSpec::Rsa { .. } => "rsa-sha256".into(),
            AlgorithmSpec::Ecdsa(EcCurve::P256) => "ecdsa-sha256".into(),
            AlgorithmSpec::MlDsa(level) => format!("ml-dsa-{}", level.set_name()),
            AlgorithmSpec::SlhDsa(p) => format!("slh-dsa-{}", p.set_name()),
            AlgorithmSpec::Composite(_) => "composite".into(),
        }
    }

    /// Every signature scheme the registry knows, one representative per
    /// OID-table entry (RSA modulus sizes share one scheme).
    pub fn all_schemes() -> Vec<AlgorithmSpec> {
        let mut out = vec![
            AlgorithmSpec::Rsa {
                bits: RSA_DEFAULT_BITS,
            },
            AlgorithmSpec::Ecdsa(EcCurve::P256),
            AlgorithmSpec::MlDsa(MlDsaLevel::L2),
            AlgorithmSpec::MlDsa(MlDsaLevel::L3),
            AlgorithmSpec::MlDsa(MlDsaLevel::L5),
        ];
        for hash in [SlhHash::Sha2, SlhHash::Shake] {
            for security_bits in [128, 192, 256] {
                for fast in [false, true] {
                    out.push(AlgorithmSpec::SlhDsa(SlhDsaParams {
                        hash,
                        security_bits,
                        fast,
                    }));
                }
            }
        }
        out
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmSpec::Rsa { bits } => write!(f, "RSA:{bits}"),
            AlgorithmSpec::Ecdsa(EcCurve::P256) => f.write_str("ECDSA:P256"),
            AlgorithmSpec::MlDsa(level) => write!(f, "ML-DSA:{}", level.level()),
            AlgorithmSpec::SlhDsa(p) => match p.hash {
                SlhHash::Sha2 => write!(
                    f,
                    "SLH-DSA:{}{}",
                    p.security_bits,
                    if p.fast { 'f' } else { 's' }
                ),
                SlhHash::Shake => write!(f, "SLH-DSA:{}", p.set_name()),
            },
            AlgorithmSpec::Composite(c) => {
                for (i, comp) in c.components().iter().enumerate() {
                    if i > 0 {
                        f.write_str("_")?;
                    }
                    write!(f, "{comp}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for AlgorithmSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_alg_spec(s)
    }
}

/// Parses `NAME[:PARAM]`, or several of those joined by `_` for a
/// composite. Names are case-insensitive.
pub fn parse_alg_spec(text: &str) -> Result<AlgorithmSpec> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::MalformedSpec(text.to_string()));
    }
    if !text.contains('_') {
        return parse_single(text);
    }
    let parts: Vec<&str> = text.split('_').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::MalformedSpec(text.to_string()));
    }
    let components = parts
        .into_iter()
        .map(parse_single)
        .collect::<Result<Vec<_>>>()?;
    AlgorithmSpec::composite(components)
}

fn parse_single(text: &str) -> Result<AlgorithmSpec> {
    let (name, param) = match text.split_once(':') {
        Some((n, p)) => (n.trim(), Some(p.trim())),
        None => (text, None),
    };
    if name.is_empty() || param == Some("") {
        return Err(Error::MalformedSpec(text.to_string()));
    }
    let upper = name.to_ascii_uppercase();
    let invalid = |family: &str, p: &str| Error::InvalidParameter {
        family: family.to_string(),
        param: p.to_string(),
    };
    match upper.as_str() {
        "RSA" => {
            let bits = match param {
                None => RSA_DEFAULT_BITS,
                Some(p) => p
                    .parse::<u32>()
                    .ok()
                    .filter(|b| RSA_ALLOWED_BITS.contains(b))
                    .ok_or_else(|| invalid("RSA", p))?,
            };
            Ok(AlgorithmSpec::Rsa { bits })
        }
        "ECDSA" | "EC" => match param.map(str::to_ascii_uppercase).as_deref() {
            None | Some("P256" | "P-256" | "256" | "PRIME256V1" | "SECP256R1") => {
                Ok(AlgorithmSpec::Ecdsa(EcCurve::P256))
            }
            Some(_) => Err(invalid("ECDSA", param.unwrap_or_default())),
        },
        "ML-DSA" | "MLDSA" | "DILITHIUM" => {
            let level = match param {
                None | Some("2" | "44") => MlDsaLevel::L2,
                Some("3" | "65") => MlDsaLevel::L3,
                Some("5" | "87") => MlDsaLevel::L5,
                Some(p) => return Err(invalid("ML-DSA", p)),
            };
            Ok(AlgorithmSpec::MlDsa(level))
        }
        "SLH-DSA" | "SLHDSA" | "SPHINCS+" | "SPHINCSPLUS" => {
            let p = param.ok_or_else(|| invalid("SLH-DSA", "<missing>"))?;
            parse_slh_params(p)
                .map(AlgorithmSpec::SlhDsa)
                .ok_or_else(|| invalid("SLH-DSA", p))
        }
        _ => Err(Error::UnknownAlgorithm(name.to_string())),
    }
}

fn parse_slh_params(p: &str) -> Option<SlhDsaParams> {
    let lower = p.to_ascii_lowercase();
    let (hash, rest) = if let Some(r) = lower.strip_prefix("sha2-") {
        (SlhHash::Sha2, r)
    } else if let Some(r) = lower.strip_prefix("shake-") {
        (SlhHash::Shake, r)
    } else {
        (SlhHash::Sha2, lower.as_str())
    };
    let (digits, variant) = rest.split_at(rest.len().checked_sub(1)?);
    let security_bits = match digits {
        "128" => 128,
        "192" => 192,
        "256" => 256,
        _ => return None,
    };
    let fast = match variant {
        "f" => true,
        "s" => false,
        _ => return None,
    };
    Some(SlhDsaParams {
        hash,
        security_bits,
        fast,
    })
}
