#include "lclab/bits.hpp"

#include <bit>
#include <stdexcept>

namespace lclab {

int ceil_log2(std::uint64_t x) {
  if (x <= 1) return 0;
  return std::bit_width(x - 1);
}

void BitWriter::bits(std::uint64_t value, int width) {
  if (width < 0 || width > 64) throw std::invalid_argument("bit width out of range");
  if (width < 64 && (value >> width) != 0) throw std::invalid_argument("value exceeds bit width");
  for (int i = 0; i < width; ++i) {
    if (count_ % 8 == 0) bytes_.push_back(0);
    if ((value >> i) & 1) bytes_.back() |= static_cast<std::uint8_t>(1u << (count_ % 8));
    ++count_;
  }
}

Message BitWriter::message() && { return Message{std::move(bytes_), count_}; }

std::uint64_t BitReader::bits(int width) {
  if (width < 0 || width > 64) throw std::invalid_argument("bit width out of range");
  if (pos_ + width > msg_->bit_count) throw std::out_of_range("message exhausted");
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i, ++pos_)
    if ((msg_->bytes[pos_ / 8] >> (pos_ % 8)) & 1) v |= std::uint64_t{1} << i;
  return v;
}

}  // namespace lclab
