#include "rasp/envelope.h"

#include <sodium.h>

#include "rasp/error.h"

namespace rasp {

namespace {

void ensure_sodium() {
  static const bool ready = [] { return sodium_init() >= 0; }();
  enforce(ready, ErrorCode::kCrypto, "libsodium failed to initialize");
}

}  // namespace

EnvelopeKey EnvelopeKey::random() {
  ensure_sodium();
  EnvelopeKey key;
  crypto_secretbox_keygen(key.bytes.data());
  return key;
}

Bytes SecretBoxCipher::seal(const EnvelopeKey& key,
                            std::span<const std::uint8_t> plaintext) const {
  ensure_sodium();
  static_assert(sizeof(key.bytes) == crypto_secretbox_KEYBYTES);
  Bytes out(crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES + plaintext.size());
  randombytes_buf(out.data(), crypto_secretbox_NONCEBYTES);
  crypto_secretbox_easy(out.data() + crypto_secretbox_NONCEBYTES, plaintext.data(),
                        plaintext.size(), out.data(), key.bytes.data());
  return out;
}

Bytes SecretBoxCipher::open(const EnvelopeKey& key, std::span<const std::uint8_t> sealed) const {
  ensure_sodium();
  enforce(sealed.size() >= crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES,
          ErrorCode::kCrypto, "envelope too short");
  const std::size_t body = sealed.size() - crypto_secretbox_NONCEBYTES;
  Bytes out(body - crypto_secretbox_MACBYTES);
  const int rc = crypto_secretbox_open_easy(out.data(), sealed.data() + crypto_secretbox_NONCEBYTES,
                                            body, sealed.data(), key.bytes.data());
  enforce(rc == 0, ErrorCode::kCrypto, "envelope authentication failed");
  return out;
}

const EnvelopeCipher& default_cipher() {
  static const SecretBoxCipher cipher;
  return cipher;
}

}  // namespace rasp
