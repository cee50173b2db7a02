#pragma once

#include <cstdint>
#include <vector>

namespace lclab {

// Smallest w with 2^w >= x (so x ids fit in w bits); 0 for x <= 1.
int ceil_log2(std::uint64_t x);

// A message is a canonical bit string; bit_count is the exact size charged by
// the bandwidth audit, bytes its padded storage.
struct Message {
  std::vector<std::uint8_t> bytes;
  std::uint64_t bit_count = 0;
};

// LSB-first bit appender; message size is exactly the bits written.
class BitWriter {
 public:
  void bits(std::uint64_t value, int width);
  void u8(std::uint8_t v) { bits(v, 8); }
  void u16(std::uint16_t v) { bits(v, 16); }
  void u32(std::uint32_t v) { bits(v, 32); }
  void u64(std::uint64_t v) { bits(v, 64); }
  std::uint64_t bit_count() const { return count_; }
  Message message() &&;

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t count_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const Message& m) : msg_(&m) {}
  std::uint64_t bits(int width);
  std::uint8_t u8() { return static_cast<std::uint8_t>(bits(8)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(bits(16)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(bits(32)); }
  std::uint64_t u64() { return bits(64); }
  std::uint64_t remaining() const { return msg_->bit_count - pos_; }

 private:
  const Message* msg_;
  std::uint64_t pos_ = 0;
};

inline Message message_bits(std::uint64_t value, int width) {
  BitWriter w;
  w.bits(value, width);
  return std::move(w).message();
}

}  // namespace lclab
