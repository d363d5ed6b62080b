#include "mil/numerics/binary_io.hpp"

#include <bit>
#include <stdexcept>

namespace mil::binio {
namespace {

template <typename U>
void put_le(std::ostream& os, U v) {
  unsigned char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), sizeof(U));
}

template <typename U>
U load_le(const unsigned char* p) noexcept {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

template <typename U>
U get_le(std::istream& is) {
  unsigned char buf[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(U))) throw std::runtime_error("unexpected end of binary stream");
  return load_le<U>(buf);
}

}  // namespace

void write_u8(std::ostream& os, std::uint8_t v) { put_le(os, v); }
void write_u32(std::ostream& os, std::uint32_t v) { put_le(os, v); }
void write_u64(std::ostream& os, std::uint64_t v) { put_le(os, v); }
void write_f32(std::ostream& os, float v) { put_le(os, std::bit_cast<std::uint32_t>(v)); }
void write_f64(std::ostream& os, double v) { put_le(os, std::bit_cast<std::uint64_t>(v)); }
void write_bytes(std::ostream& os, std::string_view bytes) {
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}
void write_string(std::ostream& os, std::string_view s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  write_bytes(os, s);
}

std::uint8_t read_u8(std::istream& is) { return get_le<std::uint8_t>(is); }
std::uint32_t read_u32(std::istream& is) { return get_le<std::uint32_t>(is); }
std::uint64_t read_u64(std::istream& is) { return get_le<std::uint64_t>(is); }
float read_f32(std::istream& is) { return std::bit_cast<float>(get_le<std::uint32_t>(is)); }
double read_f64(std::istream& is) { return std::bit_cast<double>(get_le<std::uint64_t>(is)); }

std::string read_bytes(std::istream& is, std::size_t n) {
  std::string s(n, '\0');
  if (n && !is.read(s.data(), static_cast<std::streamsize>(n))) throw std::runtime_error("unexpected end of binary stream");
  return s;
}

std::string read_string(std::istream& is, std::size_t max_len) {
  const std::uint32_t n = read_u32(is);
  if (n > max_len) throw std::runtime_error("string length " + std::to_string(n) + " exceeds limit");
  return read_bytes(is, n);
}

std::uint32_t load_u32(const unsigned char* p) noexcept { return load_le<std::uint32_t>(p); }
std::uint64_t load_u64(const unsigned char* p) noexcept { return load_le<std::uint64_t>(p); }
float load_f32(const unsigned char* p) noexcept { return std::bit_cast<float>(load_le<std::uint32_t>(p)); }

}  // namespace mil::binio
