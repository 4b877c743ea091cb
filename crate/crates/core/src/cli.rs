//! OpenSSL-style front-end: `pqcli <command> [-flag value ...] [path]`.
//!
//! Flags use a single dash as in the `openssl` tools. Unknown flags are
//! rejected rather than ignored.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, TimeZone, Utc};

use crate::alg::{parse_alg_spec, system_rng, AlgorithmSpec, KeyPairRecord, OidTable, Registry, Verdict};
use crate::catalyst;
use crate::chameleon::{self, PairedIssuance};
use crate::der::parse_name;
use crate::error::Error;
use crate::pem;
use crate::x509::{self, CertificateDocument, CertificateParams, IssuerKeys, VerificationReport};

/// Environment variable naming an OID override table.
pub const OID_TABLE_ENV: &str = "PQCLI_OID_TABLE";

pub const DEFAULT_CERT_OUT: &str = "certificate.pem";
pub const DEFAULT_KEY_OUT: &str = "private_key.pem";
pub const DEFAULT_CSR_OUT: &str = "request.pem";
pub const DEFAULT_DELTA_OUT: &str = "delta_certificate.pem";

/// Process exit codes. Stable: scripts and tests rely on them.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const PARSE: i32 = 4;
    pub const NATIVE_FAIL: i32 = 5;
    pub const ALT_FAIL: i32 = 6;
    pub const COMPOSITE_FAIL: i32 = 7;
}

const USAGE: &str = "\
usage: pqcli <command> [options]

commands:
  cert   -newkey SPEC [-subj NAME] [-days N] [-out PATH] [-keyout PATH] [-der]
         [-delta SPEC] [-deltaout PATH]
         SPEC is one algorithm (ML-DSA:3), a Catalyst pair joined by a comma
         (RSA,ML-DSA:3) or a composite joined by underscores (ML-DSA_RSA)
  key    -t SPEC [-out PATH] [-der]
  csr    (-newkey SPEC | -key PATH) -subj NAME [-out PATH] [-keyout PATH] [-der]
  view   PATH
  verify PATH [-CAfile PATH] [-attime SECONDS|RFC3339]
";

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: exit::USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => exit::IO,
        Error::Der(_)
        | Error::NotACertificate(_)
        | Error::NotACsr(_)
        | Error::MalformedPem(_)
        | Error::MalformedKey(_)
        | Error::MalformedAltExtension(_)
        | Error::NoDescriptor => exit::PARSE,
        _ => exit::USAGE,
    }
}

type CliResult<T = i32> = Result<T, CliError>;

/// Parsed command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub command: String,
    pub options: BTreeMap<String, Option<String>>,
    pub positional: Vec<String>,
}

impl Invocation {
    fn value(&self, flag: &str) -> Option<&str> {
        self.options.get(flag).and_then(|v| v.as_deref())
    }

    fn flag(&self, flag: &str) -> bool {
        self.options.contains_key(flag)
    }

    fn path_or(&self, flag: &str, default: &str) -> PathBuf {
        PathBuf::from(self.value(flag).unwrap_or(default))
    }
}

/// `(flag, takes_value)` for each command.
fn flags_for(command: &str) -> Option<&'static [(&'static str, bool)]> {
    Some(match command {
        "cert" => &[
            ("newkey", true),
            ("subj", true),
            ("days", true),
            ("out", true),
            ("keyout", true),
            ("der", false),
            ("delta", true),
            ("deltaout", true),
        ],
        "key" => &[("t", true), ("out", true), ("der", false)],
        "csr" => &[
            ("newkey", true),
            ("key", true),
            ("subj", true),
            ("out", true),
            ("keyout", true),
            ("der", false),
        ],
        "view" => &[],
        "verify" => &[("CAfile", true), ("attime", true)],
        _ => return None,
    })
}

/// Splits `args` (without the program name) into command, flags and
/// positional arguments.
pub fn parse_invocation(args: &[String]) -> CliResult<Invocation> {
    let (command, rest) = args
        .split_first()
        .ok_or_else(|| CliError::usage("missing command"))?;
    let known = flags_for(command)
        .ok_or_else(|| CliError::usage(format!("unknown command `{command}`")))?;
    let mut options = BTreeMap::new();
    let mut positional = Vec::new();
    let mut iter = rest.iter();
    while let Some(arg) = iter.next() {
        let Some(name) = arg.strip_prefix('-').filter(|n| !n.is_empty()) else {
            positional.push(arg.clone());
            continue;
        };
        let name = name.strip_prefix('-').unwrap_or(name);
        let &(flag, takes_value) = known
            .iter()
            .find(|(f, _)| *f == name)
            .ok_or_else(|| CliError::usage(format!("unknown option `{arg}` for {command}")))?;
        let value = if takes_value {
            Some(
                iter.next()
                    .ok_or_else(|| CliError::usage(format!("option `-{flag}` needs a value")))?
                    .clone(),
            )
        } else {
            None
        };
        if options.insert(flag.to_string(), value).is_some() {
            return Err(CliError::usage(format!("option `-{flag}` given twice")));
        }
    }
    let max_positional = usize::from(matches!(command.as_str(), "view" | "verify"));
    if positional.len() > max_positional {
        return Err(CliError::usage(format!(
            "unexpected argument `{}`",
            positional[max_positional]
        )));
    }
    Ok(Invocation {
        command: command.clone(),
        options,
        positional,
    })
}

/// Registry with the OID table named by [`OID_TABLE_ENV`], if set.
pub fn registry_from_env() -> Result<Registry, Error> {
    match std::env::var_os(OID_TABLE_ENV) {
        Some(path) if !path.is_empty() => Ok(Registry::with_oid_table(OidTable::load(Path::new(&path))?)),
        _ => Ok(Registry::new()),
    }
}

/// Entry point used by the binary. Returns the process exit code.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match registry_from_env() {
        Ok(registry) => run_with_registry(&registry, args, stdout, stderr),
        Err(e) => {
            let _ = writeln!(stderr, "pqcli: {OID_TABLE_ENV}: {e}");
            exit_code(&e)
        }
    }
}

pub fn run_with_registry(
    registry: &Registry,
    args: &[String],
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    if matches!(args.first().map(String::as_str), Some("-h" | "-help" | "--help" | "help")) {
        let _ = write!(stdout, "{USAGE}");
        return exit::OK;
    }
    let result = parse_invocation(args).and_then(|inv| {
        let mut cmd = Command {
            registry,
            inv: &inv,
            out: stdout,
            err: stderr,
        };
        match inv.command.as_str() {
            "cert" => cmd.cert(),
            "key" => cmd.key(),
            "csr" => cmd.csr(),
            "view" => cmd.view(),
            "verify" => cmd.verify(),
            _ => unreachable!("checked by parse_invocation"),
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "pqcli: {}", e.message);
            if e.code == exit::USAGE && args.is_empty() {
                let _ = write!(stderr, "{USAGE}");
            }
            e.code
        }
    }
}

/// What `-newkey` asked for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyRequest {
    /// One algorithm, composite included.
    Single(AlgorithmSpec),
    /// Catalyst pair: native first, alternative second.
    Catalyst(AlgorithmSpec, AlgorithmSpec),
}

/// Comma joins a Catalyst pair; underscores (handled by the spec parser)
/// join a composite.
pub fn parse_key_request(text: &str) -> Result<KeyRequest, Error> {
    match text.split_once(',') {
        None => Ok(KeyRequest::Single(parse_alg_spec(text)?)),
        Some((native, alt)) => {
            if alt.contains(',') {
                return Err(Error::MalformedSpec(format!(
                    "{text}: a Catalyst certificate takes exactly two algorithms"
                )));
            }
            Ok(KeyRequest::Catalyst(parse_alg_spec(native)?, parse_alg_spec(alt)?))
        }
    }
}

fn parse_time(text: &str) -> CliResult<DateTime<Utc>> {
    if let Ok(secs) = text.parse::<i64>() {
        return Utc
            .timestamp_opt(secs, 0)
            .single()
            .ok_or_else(|| CliError::usage(format!("time `{text}` out of range")));
    }
    DateTime::parse_from_rfc3339(text)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| CliError::usage(format!("cannot read time `{text}`: expected seconds or RFC 3339")))
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError {
        code: exit::IO,
        message: format!("{}: {e}", path.display()),
    })
}

/// Attaches the path to IO failures.
fn at_path<T>(path: &Path, r: Result<T, Error>) -> CliResult<T> {
    r.map_err(|e| {
        let mut c = CliError::from(e);
        c.message = format!("{}: {}", path.display(), c.message);
        c
    })
}

fn write_document(path: &Path, label: &str, der: &[u8], raw: bool) -> CliResult<()> {
    if raw {
        at_path(path, std::fs::write(path, der).map_err(Error::from))
    } else {
        at_path(path, pem::write_pem(path, label, der))
    }
}

/// `private_key.pem` -> `private_key.pub`.
pub fn public_key_path(private: &Path) -> PathBuf {
    private.with_extension("pub")
}

struct Command<'a> {
    registry: &'a Registry,
    inv: &'a Invocation,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Command<'_> {
    fn say(&mut self, line: impl std::fmt::Display) {
        let _ = writeln!(self.out, "{line}");
    }

    fn warn(&mut self, line: impl std::fmt::Display) {
        let _ = writeln!(self.err, "pqcli: warning: {line}");
    }

    fn generate(&self, spec: &AlgorithmSpec) -> CliResult<KeyPairRecord> {
        Ok(self.registry.generate_keypair(spec, &mut system_rng())?)
    }

    fn params(&self, default_subject: bool) -> CliResult<CertificateParams> {
        let subject = match self.inv.value("subj") {
            Some(s) => parse_name(s)?,
            None if default_subject => parse_name(x509::DEFAULT_SUBJECT)?,
            None => return Err(CliError::usage("missing -subj")),
        };
        let mut params = CertificateParams::new(subject);
        if let Some(days) = self.inv.value("days") {
            let days: i64 = days
                .parse()
                .ok()
                .filter(|d| (1..=36_500).contains(d))
                .ok_or_else(|| CliError::usage(format!("-days `{days}`: expected 1 to 36500")))?;
            params = params.with_days(days);
        }
        Ok(params)
    }

    fn cert(&mut self) -> CliResult {
        let spec_text = self
            .inv
            .value("newkey")
            .ok_or_else(|| CliError::usage("cert needs -newkey SPEC"))?;
        let request = parse_key_request(spec_text)?;
        let params = self.params(true)?;
        let out = self.inv.path_or("out", DEFAULT_CERT_OUT);
        let keyout = self.inv.path_or("keyout", DEFAULT_KEY_OUT);
        let raw = self.inv.flag("der");
        let delta_spec = self.inv.value("delta").map(parse_alg_spec).transpose()?;
        if delta_spec.is_none() && self.inv.flag("deltaout") {
            return Err(CliError::usage("-deltaout needs -delta"));
        }
        let mut rng = system_rng();

        match (request, delta_spec) {
            (KeyRequest::Single(spec), None) => {
                let key = self.generate(&spec)?;
                let cert = x509::issue_certificate(self.registry, &params, None, &key, &mut rng)?;
                write_document(&out, pem::CERTIFICATE, &cert.to_der(), raw)?;
                at_path(&keyout, pem::write_private_key(&keyout, &key))?;
                let kind = if spec.is_composite() { "composite" } else { "self-signed" };
                self.say(format!(
                    "{kind} {spec} certificate for {} written to {} (key: {})",
                    cert.tbs.subject,
                    out.display(),
                    keyout.display()
                ));
            }
            (KeyRequest::Catalyst(native_spec, alt_spec), None) => {
                let native = self.generate(&native_spec)?;
                let alt = self.generate(&alt_spec)?;
                if let Some(w) = catalyst::same_family_warning(&native, &alt) {
                    self.warn(w);
                }
                let tbs = x509::build_tbs(
                    &params,
                    &self.registry.spki_for(&native)?,
                    self.registry.signature_algorithm(&native_spec)?,
                    &mut rng,
                )?;
                let alt_spki = self.registry.spki_for(&alt)?;
                let cert = catalyst::issue_catalyst(self.registry, tbs, &native, &alt, &alt_spki)?;
                write_document(&out, pem::CERTIFICATE, &cert.to_der(), raw)?;
                at_path(&keyout, pem::write_private_keys(&keyout, &[&native, &alt]))?;
                self.say(format!(
                    "Catalyst {native_spec} + {alt_spec} certificate for {} written to {} (keys: {})",
                    cert.tbs.subject,
                    out.display(),
                    keyout.display()
                ));
            }
            (KeyRequest::Single(base_spec), Some(delta_spec)) => {
                let deltaout = self.inv.path_or("deltaout", DEFAULT_DELTA_OUT);
                let base_key = self.generate(&base_spec)?;
                let delta_key = self.generate(&delta_spec)?;
                let base_spki = self.registry.spki_for(&base_key)?;
                let delta_spki = self.registry.spki_for(&delta_key)?;
                let (base, delta) = chameleon::issue_paired(
                    self.registry,
                    PairedIssuance {
                        base: &params,
                        delta: &params,
                        base_spki: &base_spki,
                        delta_spki: &delta_spki,
                        base_issuer_key: &base_key,
                        delta_issuer_key: &delta_key,
                    },
                    &mut rng,
                )?;
                write_document(&out, pem::CERTIFICATE, &base.to_der(), raw)?;
                write_document(&deltaout, pem::CERTIFICATE, &delta.to_der(), raw)?;
                at_path(&keyout, pem::write_private_keys(&keyout, &[&base_key, &delta_key]))?;
                self.say(format!(
                    "chameleon {base_spec} certificate for {} written to {} with {delta_spec} delta {} (keys: {})",
                    base.tbs.subject,
                    out.display(),
                    deltaout.display(),
                    keyout.display()
                ));
            }
            (KeyRequest::Catalyst(..), Some(_)) => {
                return Err(CliError::usage("-delta cannot be combined with a Catalyst pair"));
            }
        }
        Ok(exit::OK)
    }

    fn key(&mut self) -> CliResult {
        let spec_text = self
            .inv
            .value("t")
            .ok_or_else(|| CliError::usage("key needs -t SPEC"))?;
        if spec_text.contains(',') {
            return Err(CliError::usage(
                "a Catalyst pair is two keys; generate them separately",
            ));
        }
        let spec = parse_alg_spec(spec_text)?;
        let key = self.generate(&spec)?;
        let out = self.inv.path_or("out", DEFAULT_KEY_OUT);
        let pub_out = public_key_path(&out);
        let spki = self.registry.spki_for(&key)?;
        if self.inv.flag("der") {
            at_path(&out, pem::write_owner_only(&out, &key.private))?;
            at_path(&pub_out, std::fs::write(&pub_out, spki.to_der_bytes()).map_err(Error::from))?;
        } else {
            at_path(&out, pem::write_private_key(&out, &key))?;
            at_path(&pub_out, pem::write_public_key(&pub_out, &spki))?;
        }
        self.say(format!(
            "{spec} key pair written to {} (public key: {})",
            out.display(),
            pub_out.display()
        ));
        Ok(exit::OK)
    }

    fn load_key(&self, path: &Path) -> CliResult<KeyPairRecord> {
        let bytes = read_file(path)?;
        let blocks = at_path(path, pem::decode_any(&bytes))?;
        let block = blocks
            .iter()
            .find(|b| b.label.is_empty() || b.label == pem::PRIVATE_KEY)
            .ok_or_else(|| CliError {
                code: exit::PARSE,
                message: format!("{}: no PRIVATE KEY block", path.display()),
            })?;
        at_path(path, self.registry.keypair_from_private(&block.der))
    }

    fn csr(&mut self) -> CliResult {
        let subject = match self.inv.value("subj") {
            Some(s) => parse_name(s)?,
            None => return Err(CliError::usage("csr needs -subj NAME")),
        };
        let (key, fresh) = match (self.inv.value("newkey"), self.inv.value("key")) {
            (Some(spec), None) => match parse_key_request(spec)? {
                KeyRequest::Single(spec) => (self.generate(&spec)?, true),
                KeyRequest::Catalyst(..) => {
                    return Err(CliError::usage("requests cannot carry a Catalyst key pair"));
                }
            },
            (None, Some(path)) => (self.load_key(Path::new(path))?, false),
            _ => return Err(CliError::usage("csr needs exactly one of -newkey or -key")),
        };
        if !fresh && self.inv.flag("keyout") {
            return Err(CliError::usage("-keyout only applies with -newkey"));
        }
        let csr = x509::build_csr(self.registry, &subject, &key, &[])?;
        let out = self.inv.path_or("out", DEFAULT_CSR_OUT);
        write_document(&out, pem::CERTIFICATE_REQUEST, &csr.to_der(), self.inv.flag("der"))?;
        let mut line = format!(
            "{} certification request for {subject} written to {}",
            key.spec,
            out.display()
        );
        if fresh {
            let keyout = self.inv.path_or("keyout", DEFAULT_KEY_OUT);
            at_path(&keyout, pem::write_private_key(&keyout, &key))?;
            line.push_str(&format!(" (key: {})", keyout.display()));
        }
        self.say(line);
        Ok(exit::OK)
    }

    fn input_path(&self) -> CliResult<PathBuf> {
        self.inv
            .positional
            .first()
            .map(PathBuf::from)
            .ok_or_else(|| CliError::usage(format!("{} needs a file path", self.inv.command)))
    }

    fn load_cert(&self, path: &Path) -> CliResult<CertificateDocument> {
        let bytes = read_file(path)?;
        at_path(path, x509::parse_certificate(&bytes))
    }

    fn view(&mut self) -> CliResult {
        let path = self.input_path()?;
        let bytes = read_file(&path)?;
        match x509::parse_certificate(&bytes) {
            Ok(cert) => {
                let text = x509::render_text(self.registry, &cert);
                let _ = self.out.write_all(text.as_bytes());
            }
            Err(cert_err) => match x509::parse_csr(&bytes) {
                Ok(csr) => {
                    let text = x509::render_csr_text(self.registry, &csr);
                    let _ = self.out.write_all(text.as_bytes());
                }
                Err(_) => return at_path(&path, Err(cert_err)),
            },
        }
        Ok(exit::OK)
    }

    fn verify(&mut self) -> CliResult {
        let path = self.input_path()?;
        let at_time = self.inv.value("attime").map(parse_time).transpose()?.unwrap_or_else(Utc::now);
        let cert = self.load_cert(&path)?;
        let issuer = match self.inv.value("CAfile") {
            Some(ca) => IssuerKeys::from_certificate(&self.load_cert(Path::new(ca))?),
            None => IssuerKeys::from_certificate(&cert),
        };
        let report = x509::verify_certificate(self.registry, &cert, &issuer, at_time);
        self.print_report(&report);
        let code = report_exit_code(&report);
        for note in &report.chain_notes {
            if note == x509::NOTE_EXPIRED || note == x509::NOTE_NOT_YET_VALID {
                self.warn(format!("certificate is {note} at {}", at_time.to_rfc3339()));
            }
        }
        self.say(if code == exit::OK {
            format!("{}: OK", path.display())
        } else {
            format!("{}: verification failed", path.display())
        });
        Ok(code)
    }

    fn print_report(&mut self, report: &VerificationReport) {
        if let Some(v) = report.native {
            self.say(format!("native signature: {v}"));
        }
        if let Some(c) = &report.composite {
            for (i, v) in c.components.iter().enumerate() {
                self.say(format!("composite component [{i}]: {v}"));
            }
            if !c.structure_ok {
                self.say("composite signature: malformed");
            }
        }
        if let Some(v) = report.alt {
            self.say(format!("alt signature: {v}"));
        }
        for note in &report.chain_notes {
            self.say(format!("note: {note}"));
        }
    }
}

/// 0 when every present signature path verified; otherwise the code of the
/// first failing path in native, alt, composite order.
pub fn report_exit_code(report: &VerificationReport) -> i32 {
    if report.native.is_some_and(|v| v != Verdict::Valid) {
        exit::NATIVE_FAIL
    } else if report.alt.is_some_and(|v| v != Verdict::Valid) {
        exit::ALT_FAIL
    } else if report.composite.as_ref().is_some_and(|c| !c.overall) {
        exit::COMPOSITE_FAIL
    } else {
        exit::OK
    }
}
