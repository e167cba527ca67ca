#include "vstep/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <string_view>

#include "vstep/errors.hpp"

namespace vstep {
namespace {

constexpr int kMaxval = 255;

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }

  // Skips whitespace and '#' comments (to end of line).
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      const auto ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(ch)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_integer(std::string_view field) {
    skip_separators();
    const std::size_t start = pos_;
    if (pos_ >= bytes_.size()) {
      throw ParseError("unexpected end of data while reading " + std::string(field), start);
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) throw ParseError(std::string(field) + " is too large", start);
      ++pos_;
    }
    if (pos_ == start) {
      throw ParseError("expected a decimal integer for " + std::string(field), start);
    }
    if (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
      throw ParseError("invalid character in " + std::string(field), pos_);
    }
    return value;
  }

  void advance(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageGrid load_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
    throw ParseError("magic number: expected P5 or P2", 0);
  }
  const bool binary = bytes[1] == '5';
  HeaderReader reader(bytes);
  reader.advance(2);

  const std::size_t width_at = reader.offset();
  const long width = reader.read_integer("width");
  const long height = reader.read_integer("height");
  if (width <= 0 || height <= 0) {
    throw ParseError("width and height must be positive", width_at);
  }
  const std::size_t maxval_at = reader.offset();
  const long maxval = reader.read_integer("maxval");
  if (maxval != kMaxval) {
    throw ParseError("maxval must be 255, got " + std::to_string(maxval), maxval_at);
  }

  const auto h = static_cast<std::size_t>(height);
  const auto w = static_cast<std::size_t>(width);
  std::vector<double> pixels(h * w);

  if (binary) {
    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t pos = reader.offset();
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
      throw ParseError("missing whitespace after maxval", pos);
    }
    ++pos;
    const std::size_t available = bytes.size() - pos;
    if (available < pixels.size()) {
      throw ParseError("truncated payload: expected " + std::to_string(pixels.size()) +
                           " bytes, found " + std::to_string(available),
                       bytes.size());
    }
    std::transform(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                   bytes.begin() + static_cast<std::ptrdiff_t>(pos + pixels.size()), pixels.begin(),
                   [](std::uint8_t b) { return static_cast<double>(b); });
  } else {
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      const std::size_t at = reader.offset();
      reader.skip_separators();
      if (reader.offset() >= bytes.size()) {
        throw ParseError("truncated payload: expected " + std::to_string(pixels.size()) +
                             " values, found " + std::to_string(i),
                         at);
      }
      const std::size_t value_at = reader.offset();
      const long v = reader.read_integer("pixel value");
      if (v > kMaxval) {
        throw ParseError("pixel value " + std::to_string(v) + " exceeds maxval", value_at);
      }
      pixels[i] = static_cast<double>(v);
    }
  }
  return ImageGrid(h, w, std::move(pixels));
}

std::vector<std::uint8_t> save_pgm(const ImageGrid& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.size());
  for (double v : img.pixels()) {
    out.push_back(static_cast<std::uint8_t>(round_level(std::clamp(v, 0.0, 255.0))));
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("read failed for " + path.string());
  }
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ImageGrid read_pgm_file(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return load_pgm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.offset());
  }
}

void write_pgm_file(const std::filesystem::path& path, const ImageGrid& img) {
  write_file_atomic(path, save_pgm(img));
}

}  // namespace vstep
