//! C ABI over the pqcli library.
//!
//! Keys and certificates are opaque heap handles released with their
//! `_free` function. Every fallible call returns a [`PqStatus`]; on failure
//! [`pq_last_error`] describes what went wrong on the calling thread.
//! Strings and byte buffers handed out by this library must be released
//! with [`pq_string_free`] and [`pq_bytes_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use chrono::{DateTime, TimeZone, Utc};
use pqcli::alg::{parse_alg_spec, system_rng, KeyPairRecord, Registry};
use pqcli::cli::{self, exit};
use pqcli::der::parse_name;
use pqcli::x509::{self, CertificateDocument, CertificateParams, IssuerKeys};
use pqcli::{catalyst, pem, Error};

/// Status codes. The numeric values match the `pqcli` exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PqStatus {
    Ok = 0,
    /// Bad algorithm spec, subject or other caller input.
    Usage = 2,
    Io = 3,
    /// Input is not a well-formed certificate, key or PEM document.
    Parse = 4,
    NativeSignatureInvalid = 5,
    AltSignatureInvalid = 6,
    CompositeSignatureInvalid = 7,
    /// A required pointer argument was NULL or a string was not UTF-8.
    InvalidArgument = 8,
    /// Internal failure; the library caught a panic.
    Internal = 9,
}

impl PqStatus {
    fn from_exit(code: i32) -> Self {
        match code {
            exit::OK => PqStatus::Ok,
            exit::IO => PqStatus::Io,
            exit::PARSE => PqStatus::Parse,
            exit::NATIVE_FAIL => PqStatus::NativeSignatureInvalid,
            exit::ALT_FAIL => PqStatus::AltSignatureInvalid,
            exit::COMPOSITE_FAIL => PqStatus::CompositeSignatureInvalid,
            _ => PqStatus::Usage,
        }
    }
}

/// Opaque key pair handle.
pub struct PqKeyPair(KeyPairRecord);

/// Opaque certificate handle.
pub struct PqCertificate(CertificateDocument);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(PqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(PqStatus::from_exit(cli::exit_code(&e)), e.to_string())
    }
}

fn invalid(what: &str) -> Failure {
    Failure(PqStatus::InvalidArgument, what.to_string())
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, recording failures and converting panics.
fn guard(f: impl FnOnce() -> Result<PqStatus, Failure>) -> PqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal error".into());
            PqStatus::Internal
        }
    }
}

fn registry() -> Result<&'static Registry, Failure> {
    static REGISTRY: OnceLock<Result<Registry, String>> = OnceLock::new();
    REGISTRY
        .get_or_init(|| cli::registry_from_env().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|m| Failure(PqStatus::Usage, format!("{}: {m}", cli::OID_TABLE_ENV)))
}

/// # Safety
/// `s` is NULL or a NUL-terminated string valid for the call.
unsafe fn opt_str<'a>(s: *const c_char) -> Result<Option<&'a str>, Failure> {
    if s.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(s)
        .to_str()
        .map(Some)
        .map_err(|_| invalid("string argument is not UTF-8"))
}

/// # Safety
/// `data` is NULL only when `len` is zero, otherwise valid for `len` bytes.
unsafe fn bytes<'a>(data: *const u8, len: usize) -> Result<&'a [u8], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(invalid("data is NULL"));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

/// # Safety
/// `out` is NULL or valid for a write.
unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<PqStatus, Failure> {
    if out.is_null() {
        return Err(invalid("output pointer is NULL"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(PqStatus::Ok)
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

fn params(subject: Option<&str>, days: u32) -> Result<CertificateParams, Failure> {
    let subject = parse_name(subject.unwrap_or(x509::DEFAULT_SUBJECT))?;
    let params = CertificateParams::new(subject);
    Ok(if days == 0 {
        params
    } else {
        params.with_days(i64::from(days))
    })
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pq_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Generates a key pair for `spec` (for example `"ML-DSA:3"` or
/// `"ML-DSA_RSA"`).
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pq_keypair_generate(spec: *const c_char, out: *mut *mut PqKeyPair) -> PqStatus {
    guard(|| {
        let spec = opt_str(spec)?.ok_or_else(|| invalid("spec is NULL"))?;
        let spec = parse_alg_spec(spec)?;
        let key = registry()?.generate_keypair(&spec, &mut system_rng())?;
        put(out, PqKeyPair(key))
    })
}

/// Loads the first private key from PEM or PKCS#8 DER.
///
/// # Safety
/// `data` must be valid for `len` bytes; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pq_keypair_from_bytes(
    data: *const u8,
    len: usize,
    out: *mut *mut PqKeyPair,
) -> PqStatus {
    guard(|| {
        let blocks = pem::decode_any(bytes(data, len)?)?;
        let der = blocks
            .iter()
            .find(|b| b.label.is_empty() || b.label == pem::PRIVATE_KEY)
            .ok_or_else(|| Failure(PqStatus::Parse, "no PRIVATE KEY block".into()))?;
        let key = registry()?.keypair_from_private(&der.der)?;
        put(out, PqKeyPair(key))
    })
}

/// PKCS#8 `PRIVATE KEY` PEM of `key`; release with [`pq_string_free`].
///
/// # Safety
/// `key` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pq_keypair_private_pem(key: *const PqKeyPair, out: *mut *mut c_char) -> PqStatus {
    guard(|| {
        let key = key.as_ref().ok_or_else(|| invalid("key is NULL"))?;
        if out.is_null() {
            return Err(invalid("output pointer is NULL"));
        }
        *out = c_string(pem::encode_pem(pem::PRIVATE_KEY, &key.0.private));
        Ok(PqStatus::Ok)
    })
}

/// Algorithm spec of `key` in canonical form; release with
/// [`pq_string_free`]. NULL for a NULL handle.
///
/// # Safety
/// `key` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_keypair_spec(key: *const PqKeyPair) -> *mut c_char {
    key.as_ref().map_or(ptr::null_mut(), |k| c_string(k.0.spec.to_string()))
}

/// # Safety
/// `key` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pq_keypair_free(key: *mut PqKeyPair) {
    if !key.is_null() {
        drop(Box::from_raw(key));
    }
}

/// Self-signed certificate for `key`. Composite keys yield composite
/// certificates. `subject` may be NULL for the default subject and `days`
/// zero for the default validity.
///
/// # Safety
/// `key` must be a live handle, `subject` NULL or a NUL-terminated string,
/// `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pq_certificate_self_signed(
    key: *const PqKeyPair,
    subject: *const c_char,
    days: u32,
    out: *mut *mut PqCertificate,
) -> PqStatus {
    guard(|| {
        let key = key.as_ref().ok_or_else(|| invalid("key is NULL"))?;
        let params = params(opt_str(subject)?, days)?;
        let cert = x509::issue_certificate(registry()?, &params, None, &key.0, &mut system_rng())?;
        put(out, PqCertificate(cert))
    })
}

/// Self-signed Catalyst certificate: `native` signs the certificate and
/// `alt` the alternative signature.
///
/// # Safety
/// As for [`pq_certificate_self_signed`], with two key handles.
#[no_mangle]
pub unsafe extern "C" fn pq_certificate_catalyst(
    native: *const PqKeyPair,
    alt: *const PqKeyPair,
    subject: *const c_char,
    days: u32,
    out: *mut *mut PqCertificate,
) -> PqStatus {
    guard(|| {
        let native = native.as_ref().ok_or_else(|| invalid("native key is NULL"))?;
        let alt = alt.as_ref().ok_or_else(|| invalid("alt key is NULL"))?;
        let registry = registry()?;
        let params = params(opt_str(subject)?, days)?;
        let tbs = x509::build_tbs(
            &params,
            &registry.spki_for(&native.0)?,
            registry.signature_algorithm(&native.0.spec)?,
            &mut system_rng(),
        )?;
        let alt_spki = registry.spki_for(&alt.0)?;
        let cert = catalyst::issue_catalyst(registry, tbs, &native.0, &alt.0, &alt_spki)?;
        put(out, PqCertificate(cert))
    })
}

/// Parses a PEM or DER certificate.
///
/// # Safety
/// `data` must be valid for `len` bytes; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pq_certificate_parse(
    data: *const u8,
    len: usize,
    out: *mut *mut PqCertificate,
) -> PqStatus {
    guard(|| {
        let cert = x509::parse_certificate(bytes(data, len)?)?;
        put(out, PqCertificate(cert))
    })
}

/// DER encoding of `cert`; release with [`pq_bytes_free`].
///
/// # Safety
/// `cert` must be a live handle; `out` and `out_len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pq_certificate_to_der(
    cert: *const PqCertificate,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> PqStatus {
    guard(|| {
        let cert = cert.as_ref().ok_or_else(|| invalid("certificate is NULL"))?;
        if out.is_null() || out_len.is_null() {
            return Err(invalid("output pointer is NULL"));
        }
        let der = cert.0.to_der().into_boxed_slice();
        *out_len = der.len();
        *out = Box::into_raw(der).cast::<u8>();
        Ok(PqStatus::Ok)
    })
}

/// PEM encoding of `cert`; release with [`pq_string_free`]. NULL for a
/// NULL handle.
///
/// # Safety
/// `cert` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_certificate_to_pem(cert: *const PqCertificate) -> *mut c_char {
    cert.as_ref().map_or(ptr::null_mut(), |c| c_string(c.0.to_pem()))
}

/// Text dump of `cert`; release with [`pq_string_free`]. NULL for a NULL
/// handle or an unusable OID table.
///
/// # Safety
/// `cert` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_certificate_render(cert: *const PqCertificate) -> *mut c_char {
    let Some(cert) = cert.as_ref() else {
        return ptr::null_mut();
    };
    match registry() {
        Ok(r) => c_string(x509::render_text(r, &cert.0)),
        Err(Failure(_, m)) => {
            set_last_error(m);
            ptr::null_mut()
        }
    }
}

/// Checks every signature on `cert`.
///
/// `issuer` is the issuing certificate, or NULL for a self-signed check.
/// `at_unix` is the check time in Unix seconds, or NULL for now. Returns
/// `PQ_STATUS_OK` when every signature present verifies, otherwise the code
/// of the first failing path. Validity-window problems do not fail the
/// check.
///
/// # Safety
/// `cert` must be a live handle; `issuer` and `at_unix` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn pq_certificate_verify(
    cert: *const PqCertificate,
    issuer: *const PqCertificate,
    at_unix: *const i64,
) -> PqStatus {
    guard(|| {
        let cert = cert.as_ref().ok_or_else(|| invalid("certificate is NULL"))?;
        let issuer_keys = IssuerKeys::from_certificate(issuer.as_ref().map_or(&cert.0, |i| &i.0));
        let at: DateTime<Utc> = match at_unix.as_ref() {
            None => Utc::now(),
            Some(&secs) => Utc
                .timestamp_opt(secs, 0)
                .single()
                .ok_or_else(|| invalid("time out of range"))?,
        };
        let report = x509::verify_certificate(registry()?, &cert.0, &issuer_keys, at);
        let status = PqStatus::from_exit(cli::report_exit_code(&report));
        if status != PqStatus::Ok {
            set_last_error(format!("{report:?}"));
        }
        Ok(status)
    })
}

/// # Safety
/// `cert` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pq_certificate_free(cert: *mut PqCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `data` and `len` must come from [`pq_certificate_to_der`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pq_bytes_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}
