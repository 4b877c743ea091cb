#ifndef PQCLI_H
#define PQCLI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. The numeric values match the `pqcli` exit codes.
 */
typedef enum PqStatus {
  PQ_STATUS_OK = 0,
  /**
   * Bad algorithm spec, subject or other caller input.
   */
  PQ_STATUS_USAGE = 2,
  PQ_STATUS_IO = 3,
  /**
   * Input is not a well-formed certificate, key or PEM document.
   */
  PQ_STATUS_PARSE = 4,
  PQ_STATUS_NATIVE_SIGNATURE_INVALID = 5,
  PQ_STATUS_ALT_SIGNATURE_INVALID = 6,
  PQ_STATUS_COMPOSITE_SIGNATURE_INVALID = 7,
  /**
   * A required pointer argument was NULL or a string was not UTF-8.
   */
  PQ_STATUS_INVALID_ARGUMENT = 8,
  /**
   * Internal failure; the library caught a panic.
   */
  PQ_STATUS_INTERNAL = 9,
} PqStatus;

/**
 * Opaque certificate handle.
 */
typedef struct PqCertificate PqCertificate;

/**
 * Opaque key pair handle.
 */
typedef struct PqKeyPair PqKeyPair;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *pq_last_error(void);

/**
 * Generates a key pair for `spec` (for example `"ML-DSA:3"` or
 * `"ML-DSA_RSA"`).
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be valid for a write.
 */
enum PqStatus pq_keypair_generate(const char *spec, struct PqKeyPair **out);

/**
 * Loads the first private key from PEM or PKCS#8 DER.
 *
 * # Safety
 * `data` must be valid for `len` bytes; `out` must be valid for a write.
 */
enum PqStatus pq_keypair_from_bytes(const uint8_t *data, size_t len, struct PqKeyPair **out);

/**
 * PKCS#8 `PRIVATE KEY` PEM of `key`; release with [`pq_string_free`].
 *
 * # Safety
 * `key` must be a live handle; `out` must be valid for a write.
 */
enum PqStatus pq_keypair_private_pem(const struct PqKeyPair *key, char **out);

/**
 * Algorithm spec of `key` in canonical form; release with
 * [`pq_string_free`]. NULL for a NULL handle.
 *
 * # Safety
 * `key` must be NULL or a live handle.
 */
char *pq_keypair_spec(const struct PqKeyPair *key);

/**
 * # Safety
 * `key` must be NULL or a handle not yet freed.
 */
void pq_keypair_free(struct PqKeyPair *key);

/**
 * Self-signed certificate for `key`. Composite keys yield composite
 * certificates. `subject` may be NULL for the default subject and `days`
 * zero for the default validity.
 *
 * # Safety
 * `key` must be a live handle, `subject` NULL or a NUL-terminated string,
 * `out` valid for a write.
 */
enum PqStatus pq_certificate_self_signed(const struct PqKeyPair *key,
                                         const char *subject,
                                         uint32_t days,
                                         struct PqCertificate **out);

/**
 * Self-signed Catalyst certificate: `native` signs the certificate and
 * `alt` the alternative signature.
 *
 * # Safety
 * As for [`pq_certificate_self_signed`], with two key handles.
 */
enum PqStatus pq_certificate_catalyst(const struct PqKeyPair *native,
                                      const struct PqKeyPair *alt,
                                      const char *subject,
                                      uint32_t days,
                                      struct PqCertificate **out);

/**
 * Parses a PEM or DER certificate.
 *
 * # Safety
 * `data` must be valid for `len` bytes; `out` must be valid for a write.
 */
enum PqStatus pq_certificate_parse(const uint8_t *data, size_t len, struct PqCertificate **out);

/**
 * DER encoding of `cert`; release with [`pq_bytes_free`].
 *
 * # Safety
 * `cert` must be a live handle; `out` and `out_len` valid for writes.
 */
enum PqStatus pq_certificate_to_der(const struct PqCertificate *cert,
                                    uint8_t **out,
                                    size_t *out_len);

/**
 * PEM encoding of `cert`; release with [`pq_string_free`]. NULL for a
 * NULL handle.
 *
 * # Safety
 * `cert` must be NULL or a live handle.
 */
char *pq_certificate_to_pem(const struct PqCertificate *cert);

/**
 * Text dump of `cert`; release with [`pq_string_free`]. NULL for a NULL
 * handle or an unusable OID table.
 *
 * # Safety
 * `cert` must be NULL or a live handle.
 */
char *pq_certificate_render(const struct PqCertificate *cert);

/**
 * Checks every signature on `cert`.
 *
 * `issuer` is the issuing certificate, or NULL for a self-signed check.
 * `at_unix` is the check time in Unix seconds, or NULL for now. Returns
 * `PQ_STATUS_OK` when every signature present verifies, otherwise the code
 * of the first failing path. Validity-window problems do not fail the
 * check.
 *
 * # Safety
 * `cert` must be a live handle; `issuer` and `at_unix` NULL or valid.
 */
enum PqStatus pq_certificate_verify(const struct PqCertificate *cert,
                                    const struct PqCertificate *issuer,
                                    const int64_t *at_unix);

/**
 * # Safety
 * `cert` must be NULL or a handle not yet freed.
 */
void pq_certificate_free(struct PqCertificate *cert);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void pq_string_free(char *s);

/**
 * # Safety
 * `data` and `len` must come from [`pq_certificate_to_der`], not yet freed.
 */
void pq_bytes_free(uint8_t *data, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PQCLI_H */
