use std::ffi::{CStr, CString};
use std::ptr;

use pqcli_ffi::*;

fn generate(spec: &str) -> *mut PqKeyPair {
    let spec = CString::new(spec).unwrap();
    let mut key = ptr::null_mut();
    assert_eq!(unsafe { pq_keypair_generate(spec.as_ptr(), &mut key) }, PqStatus::Ok);
    assert!(!key.is_null());
    key
}

fn last_error() -> String {
    let p = pq_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { pq_string_free(p) };
    s
}

#[test]
fn self_signed_round_trip() {
    unsafe {
        let key = generate("ML-DSA:2");
        assert_eq!(take_string(pq_keypair_spec(key)), "ML-DSA:2");
        let subject = CString::new("CN=ffi").unwrap();
        let mut cert = ptr::null_mut();
        assert_eq!(pq_certificate_self_signed(key, subject.as_ptr(), 30, &mut cert), PqStatus::Ok);
        assert_eq!(pq_certificate_verify(cert, ptr::null(), ptr::null()), PqStatus::Ok);

        let (mut der, mut len) = (ptr::null_mut(), 0usize);
        assert_eq!(pq_certificate_to_der(cert, &mut der, &mut len), PqStatus::Ok);
        let mut parsed = ptr::null_mut();
        assert_eq!(pq_certificate_parse(der, len, &mut parsed), PqStatus::Ok);
        let pem = take_string(pq_certificate_to_pem(parsed));
        assert!(pem.starts_with("-----BEGIN CERTIFICATE-----"));
        assert!(take_string(pq_certificate_render(parsed)).contains("Subject: CN=ffi"));

        // Flip a byte inside the signature.
        let bytes = std::slice::from_raw_parts_mut(der, len);
        bytes[len - 5] ^= 1;
        let mut tampered = ptr::null_mut();
        assert_eq!(pq_certificate_parse(der, len, &mut tampered), PqStatus::Ok);
        assert_eq!(
            pq_certificate_verify(tampered, ptr::null(), ptr::null()),
            PqStatus::NativeSignatureInvalid
        );

        pq_bytes_free(der, len);
        pq_certificate_free(tampered);
        pq_certificate_free(parsed);
        pq_certificate_free(cert);
        pq_keypair_free(key);
    }
}

#[test]
fn catalyst_and_composite() {
    unsafe {
        let native = generate("ECDSA");
        let alt = generate("ML-DSA:2");
        let mut cert = ptr::null_mut();
        assert_eq!(pq_certificate_catalyst(native, alt, ptr::null(), 0, &mut cert), PqStatus::Ok);
        assert_eq!(pq_certificate_verify(cert, ptr::null(), ptr::null()), PqStatus::Ok);
        assert!(take_string(pq_certificate_render(cert)).contains("Alt Signature"));
        pq_certificate_free(cert);

        let comp = generate("ML-DSA_ECDSA");
        let mut cert = ptr::null_mut();
        assert_eq!(pq_certificate_self_signed(comp, ptr::null(), 0, &mut cert), PqStatus::Ok);
        assert_eq!(pq_certificate_verify(cert, ptr::null(), ptr::null()), PqStatus::Ok);
        // Checked against an unrelated composite issuer.
        let other = generate("ML-DSA_ECDSA");
        let mut other_cert = ptr::null_mut();
        assert_eq!(pq_certificate_self_signed(other, ptr::null(), 0, &mut other_cert), PqStatus::Ok);
        assert_eq!(
            pq_certificate_verify(cert, other_cert, ptr::null()),
            PqStatus::CompositeSignatureInvalid
        );
        pq_certificate_free(other_cert);
        pq_certificate_free(cert);
        pq_keypair_free(other);
        pq_keypair_free(comp);
        pq_keypair_free(alt);
        pq_keypair_free(native);
    }
}

#[test]
fn key_pem_reload() {
    unsafe {
        let key = generate("ECDSA");
        let mut pem = ptr::null_mut();
        assert_eq!(pq_keypair_private_pem(key, &mut pem), PqStatus::Ok);
        let text = take_string(pem);
        let mut reloaded = ptr::null_mut();
        assert_eq!(pq_keypair_from_bytes(text.as_ptr(), text.len(), &mut reloaded), PqStatus::Ok);
        assert_eq!(take_string(pq_keypair_spec(reloaded)), "ECDSA:P256");
        pq_keypair_free(reloaded);
        pq_keypair_free(key);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let bad = CString::new("ml-dsa:7").unwrap();
        let mut key = ptr::null_mut();
        assert_eq!(pq_keypair_generate(bad.as_ptr(), &mut key), PqStatus::Usage);
        assert!(key.is_null());
        assert!(last_error().contains("invalid parameter"));

        assert_eq!(pq_keypair_generate(ptr::null(), &mut key), PqStatus::InvalidArgument);
        let spec = CString::new("ECDSA").unwrap();
        assert_eq!(pq_keypair_generate(spec.as_ptr(), ptr::null_mut()), PqStatus::InvalidArgument);

        let junk = b"not a certificate";
        let mut cert = ptr::null_mut();
        assert_eq!(pq_certificate_parse(junk.as_ptr(), junk.len(), &mut cert), PqStatus::Parse);
        assert_eq!(pq_certificate_verify(ptr::null(), ptr::null(), ptr::null()), PqStatus::InvalidArgument);
        assert!(pq_certificate_to_pem(ptr::null()).is_null());

        pq_keypair_free(ptr::null_mut());
        pq_certificate_free(ptr::null_mut());
        pq_string_free(ptr::null_mut());
    }
}

#[test]
fn status_values_match_exit_codes() {
    use pqcli::cli::exit;
    assert_eq!(PqStatus::Ok as i32, exit::OK);
    assert_eq!(PqStatus::Usage as i32, exit::USAGE);
    assert_eq!(PqStatus::Io as i32, exit::IO);
    assert_eq!(PqStatus::Parse as i32, exit::PARSE);
    assert_eq!(PqStatus::NativeSignatureInvalid as i32, exit::NATIVE_FAIL);
    assert_eq!(PqStatus::AltSignatureInvalid as i32, exit::ALT_FAIL);
    assert_eq!(PqStatus::CompositeSignatureInvalid as i32, exit::COMPOSITE_FAIL);
}

#[test]
fn generated_header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/pqcli.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["pq_keypair_generate", "pq_certificate_verify", "PQ_STATUS_ALT_SIGNATURE_INVALID", "typedef struct PqCertificate PqCertificate"] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, "#include \"pqcli.h\"\nint main(void) { return pq_last_error() == 0 ? 0 : 1; }\n").unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "header does not compile"),
        Err(e) => eprintln!("skipping C compile check: {e}"),
    }
}
