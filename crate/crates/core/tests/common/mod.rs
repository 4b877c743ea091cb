#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

use chrono::{TimeZone, Utc};
use pqcli::der::{Class, DerValue, ObjectIdentifier, Tag, Time};
use proptest::prelude::*;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the built `pqcli` binary in `dir`.
pub fn pqcli(dir: &Path, args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pqcli"));
    cmd.current_dir(dir).args(args).env_remove("PQCLI_OID_TABLE");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("pqcli runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn oid_strategy() -> impl Strategy<Value = ObjectIdentifier> {
    (0u64..3, 0u64..40, prop::collection::vec(any::<u64>(), 0..8)).prop_map(|(a, b, rest)| {
        let mut arcs = vec![a, if a == 2 { b * 1000 } else { b }];
        arcs.extend(rest.into_iter().map(|x| x >> (x % 64)));
        ObjectIdentifier::new(&arcs).expect("valid arcs")
    })
}

fn free_tag() -> impl Strategy<Value = Tag> {
    (
        prop_oneof![
            Just(Class::Application),
            Just(Class::ContextSpecific),
            Just(Class::Private)
        ],
        prop_oneof![0u32..31, 31u32..200_000],
    )
        .prop_map(|(class, number)| Tag { class, number })
}

fn leaf() -> impl Strategy<Value = DerValue> {
    let bytes = || prop::collection::vec(any::<u8>(), 0..48);
    prop_oneof![
        any::<bool>().prop_map(DerValue::boolean),
        any::<u64>().prop_map(DerValue::integer_u64),
        bytes().prop_map(|b| DerValue::integer_unsigned(&b)),
        bytes().prop_map(|b| DerValue::bit_string(&b)),
        bytes().prop_map(DerValue::octet_string),
        Just(DerValue::null()),
        oid_strategy().prop_map(|o| DerValue::oid(&o)),
        "\\PC{0,24}".prop_map(|s| DerValue::utf8_string(&s)),
        "[A-Za-z0-9 '()+,./:=?-]{0,24}".prop_map(|s| DerValue::printable_string(&s)),
        (-2_000_000_000i64..7_000_000_000).prop_map(|secs| {
            Time::new(Utc.timestamp_opt(secs, 0).unwrap()).to_der()
        }),
        (free_tag(), bytes()).prop_map(|(t, b)| DerValue::primitive(t, b)),
    ]
}

/// Structured random values: every generated value is valid DER.
pub fn der_value() -> impl Strategy<Value = DerValue> {
    leaf().prop_recursive(5, 96, 6, |inner| {
        let kids = prop::collection::vec(inner, 0..6);
        prop_oneof![
            kids.clone().prop_map(DerValue::sequence),
            kids.clone().prop_map(DerValue::set),
            (free_tag(), kids).prop_map(|(t, k)| DerValue::constructed(t, k)),
        ]
    })
}

/// Byte strings for decoder fuzzing: pure noise, and valid encodings with
/// random bytes overwritten, inserted or cut off.
pub fn fuzz_input() -> impl Strategy<Value = Vec<u8>> {
    let noise = prop::collection::vec(any::<u8>(), 0..256);
    let mutated = (
        der_value(),
        prop::collection::vec((any::<prop::sample::Index>(), any::<u8>(), 0u8..3), 1..6),
        any::<prop::sample::Index>(),
    )
        .prop_map(|(v, edits, cut)| {
            let mut bytes = v.encode();
            for (at, byte, kind) in edits {
                if bytes.is_empty() {
                    bytes.push(byte);
                    continue;
                }
                let i = at.index(bytes.len());
                match kind {
                    0 => bytes[i] = byte,
                    1 => bytes.insert(i, byte),
                    _ => {
                        bytes.remove(i);
                    }
                }
            }
            if !bytes.is_empty() && cut.index(4) == 0 {
                bytes.truncate(cut.index(bytes.len()));
            }
            bytes
        });
    prop_oneof![noise, mutated]
}
