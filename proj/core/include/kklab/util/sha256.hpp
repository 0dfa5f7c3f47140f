#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace kklab {

// Minimal SHA-256, used for config/artifact hashing. Verified against the
// FIPS 180-4 test vectors in the unit tests.
class Sha256 {
  public:
    Sha256();
    void update(const void* data, std::size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::array<std::uint8_t, 32> digest();

  private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buffer_;
    std::uint64_t bit_count_ = 0;
    std::size_t buffer_len_ = 0;
    bool finalized_ = false;
};

std::string sha256_hex(std::string_view data);

}  // namespace kklab
