#pragma once

// Record envelopes: the encrypted original record stored next to each
// perturbed vector. The cipher is opaque to the rest of the system.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace rasp {

using Bytes = std::vector<std::uint8_t>;

struct EnvelopeKey {
  std::array<std::uint8_t, 32> bytes{};

  static EnvelopeKey random();
  friend bool operator==(const EnvelopeKey&, const EnvelopeKey&) = default;
};

class EnvelopeCipher {
 public:
  virtual ~EnvelopeCipher() = default;
  virtual Bytes seal(const EnvelopeKey& key, std::span<const std::uint8_t> plaintext) const = 0;
  // Throws Error(kCrypto) on authentication failure.
  virtual Bytes open(const EnvelopeKey& key, std::span<const std::uint8_t> sealed) const = 0;
};

// XSalsa20-Poly1305 (libsodium secretbox) with a random nonce prefix.
class SecretBoxCipher final : public EnvelopeCipher {
 public:
  Bytes seal(const EnvelopeKey& key, std::span<const std::uint8_t> plaintext) const override;
  Bytes open(const EnvelopeKey& key, std::span<const std::uint8_t> sealed) const override;
};

const EnvelopeCipher& default_cipher();

}  // namespace rasp
