#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Little-endian byte encoding shared by the dataset and checkpoint formats.
namespace sass::io {

class ByteWriter {
 public:
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> v);
  void raw(std::string_view bytes);
  // u32 length followed by the bytes
  void str(std::string_view s);

  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  std::vector<std::uint8_t>& bytes() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked reader; running past the end throws FormatError naming
// `what` (the format being decoded).
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string what)
      : data_(data), what_(std::move(what)) {}

  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void f64s(std::span<double> out);
  std::string raw(std::size_t n);
  std::string str();

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const;

  std::span<const std::uint8_t> data_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32(std::span<const std::uint8_t> data);

// Appends a little-endian CRC32 of everything before it.
void append_crc(std::vector<std::uint8_t>& bytes);
// Splits off and verifies the trailing CRC32; returns the covered bytes.
// Throws FormatError if there is no room for it, IntegrityError on mismatch.
std::span<const std::uint8_t> verify_crc(std::span<const std::uint8_t> bytes,
                                         const std::string& what);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace sass::io
