#pragma once

// Binary netpbm codecs: P5 (grayscale) in/out, P6 (RGB) in/out.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smear/error.hpp"
#include "smear/raster.hpp"

namespace smear {

using Bytes = std::vector<std::uint8_t>;

namespace detail {

class HeaderReader {
public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  // First byte of the most recently read decimal field.
  std::size_t field_offset() const noexcept { return field_; }

  void expect_magic(std::string_view magic) {
    if (bytes_.size() < 2 || bytes_[0] != magic[0] || bytes_[1] != magic[1])
      throw ParseError("expected magic \"" + std::string(magic) + "\"", 0);
    pos_ = 2;
  }

  // Skips whitespace and '#' comments, then reads a decimal field.
  int read_int(const char* field) {
    skip_space_and_comments();
    const std::size_t start = field_ = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) throw ParseError(std::string(field) + " is too large", start);
      ++pos_;
    }
    if (pos_ == start) {
      if (pos_ >= bytes_.size()) throw ParseError(std::string("truncated header before ") + field, pos_);
      throw ParseError(std::string("expected decimal ") + field, pos_);
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_separator() {
    if (pos_ >= bytes_.size()) throw ParseError("truncated header after maxval", pos_);
    if (!is_space(bytes_[pos_])) throw ParseError("expected whitespace after maxval", pos_);
    ++pos_;
  }

private:
  static bool is_space(std::uint8_t c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  }
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::size_t field_ = 0;
};

struct NetpbmHeader {
  int width, height, maxval;
  std::size_t payload;
};

inline NetpbmHeader read_header(std::span<const std::uint8_t> bytes, std::string_view magic, int channels) {
  HeaderReader in(bytes);
  in.expect_magic(magic);
  NetpbmHeader h{};
  h.width = in.read_int("width");
  if (h.width < 1) throw ParseError("width must be positive", in.field_offset());
  h.height = in.read_int("height");
  if (h.height < 1) throw ParseError("height must be positive", in.field_offset());
  h.maxval = in.read_int("maxval");
  if (h.maxval < 1 || h.maxval > 255)
    throw ParseError("unsupported maxval " + std::to_string(h.maxval) + " (need 1..255)", in.field_offset());
  in.single_separator();
  h.payload = in.offset();
  const std::size_t need = static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height) * channels;
  if (bytes.size() - h.payload < need)
    throw ParseError("truncated payload: need " + std::to_string(need) + " bytes, have " +
                         std::to_string(bytes.size() - h.payload),
                     bytes.size());
  return h;
}

inline void append_header(Bytes& out, std::string_view magic, int width, int height) {
  const std::string head = std::string(magic) + "\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.insert(out.end(), head.begin(), head.end());
}

}  // namespace detail

/// Parses binary PGM; intensities become raw / maxval.
inline GrayImage load_pgm(std::span<const std::uint8_t> bytes) {
  const auto h = detail::read_header(bytes, "P5", 1);
  GrayImage img(h.width, h.height);
  const double maxval = h.maxval;
  for (std::size_t i = 0; i < img.size(); ++i) {
    const int raw = bytes[h.payload + i];
    if (raw > h.maxval) throw ParseError("sample exceeds maxval", h.payload + i);
    img[i] = raw / maxval;
  }
  return img;
}

/// Writes P5 with maxval 255; intensities are clamped and rounded.
inline Bytes save_pgm(const GrayImage& img) {
  Bytes out;
  detail::append_header(out, "P5", img.width(), img.height());
  out.reserve(out.size() + img.size());
  for (double v : img.pixels()) out.push_back(static_cast<std::uint8_t>(quantize(v)));
  return out;
}

inline Bytes save_pgm(const BinaryMask& mask) { return save_pgm(mask_to_gray(mask)); }

inline RgbImage load_ppm(std::span<const std::uint8_t> bytes) {
  const auto h = detail::read_header(bytes, "P6", 3);
  if (h.maxval != 255) throw ParseError("only maxval 255 is supported for P6", h.payload - 1);
  RgbImage img(h.width, h.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const std::size_t at = h.payload + 3 * i;
    img[i] = {bytes[at], bytes[at + 1], bytes[at + 2]};
  }
  return img;
}

inline Bytes save_ppm(const RgbImage& img) {
  Bytes out;
  detail::append_header(out, "P6", img.width(), img.height());
  out.reserve(out.size() + 3 * img.size());
  for (const Rgb& p : img.pixels()) {
    out.push_back(p.r);
    out.push_back(p.g);
    out.push_back(p.b);
  }
  return out;
}

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

inline void write_file(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace smear
