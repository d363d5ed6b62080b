#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

// Little-endian primitive encoding shared by the checkpoint and shard formats.
namespace mil::binio {

void write_u8(std::ostream& os, std::uint8_t v);
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f32(std::ostream& os, float v);
void write_f64(std::ostream& os, double v);
void write_bytes(std::ostream& os, std::string_view bytes);
// u32 length prefix followed by the bytes
void write_string(std::ostream& os, std::string_view s);

// Readers throw std::runtime_error on a short read.
std::uint8_t read_u8(std::istream& is);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
float read_f32(std::istream& is);
double read_f64(std::istream& is);
std::string read_bytes(std::istream& is, std::size_t n);
std::string read_string(std::istream& is, std::size_t max_len = 1u << 24);

std::uint32_t load_u32(const unsigned char* p) noexcept;
std::uint64_t load_u64(const unsigned char* p) noexcept;
float load_f32(const unsigned char* p) noexcept;

}  // namespace mil::binio
