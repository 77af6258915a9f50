#include "towscan/netpbm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "towscan/error.hpp"

namespace towscan {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  bool read_uint(unsigned long& value) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
      if (value > 0xFFFFFFFFul) return false;
      ++pos_;
    }
    return pos_ > start;
  }

  std::size_t pos() const noexcept { return pos_; }
  void advance(std::size_t n) noexcept { pos_ += n; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

DepthMap load_pgm(const std::filesystem::path& path, DepthState as) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    fail(ErrorCode::BadMagic, path.string() + ": not a binary PGM (expected P5)");
  }
  HeaderReader header(bytes);
  header.advance(2);
  unsigned long width = 0, height = 0, maxval = 0;
  if (!header.read_uint(width) || !header.read_uint(height) || width == 0 || height == 0) {
    fail(ErrorCode::DimensionMismatch, path.string() + ": invalid PGM dimensions");
  }
  if (!header.read_uint(maxval) || (maxval != 255 && maxval != 65535)) {
    fail(ErrorCode::Format, path.string() + ": unsupported PGM maxval (need 255 or 65535)");
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (header.pos() >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[header.pos()]))) {
    fail(ErrorCode::TruncatedPayload, path.string() + ": missing raster");
  }
  header.advance(1);

  const std::size_t count = static_cast<std::size_t>(width) * height;
  const std::size_t sample_bytes = maxval == 65535 ? 2 : 1;
  const std::size_t available = bytes.size() - header.pos();
  if (available < count * sample_bytes) {
    fail(ErrorCode::TruncatedPayload,
         path.string() + ": raster holds " + std::to_string(available / sample_bytes) +
             " samples, header declares " + std::to_string(count));
  }

  const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + header.pos());
  std::vector<double> pixels(count);
  const double scale = as == DepthState::Normalized ? 1.0 / static_cast<double>(maxval) : 1.0;
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned sample = sample_bytes == 2
                                ? (static_cast<unsigned>(raster[2 * i]) << 8) | raster[2 * i + 1]
                                : raster[i];
    pixels[i] = sample * scale;
  }
  return DepthMap(width, height, std::move(pixels), as);
}

void save_pgm(const DepthMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << "P5\n" << map.width() << ' ' << map.height() << "\n65535\n";
  const double scale = map.state() == DepthState::Normalized ? 65535.0 : 1.0;
  std::string raster(map.size() * 2, '\0');
  for (std::size_t i = 0; i < map.size(); ++i) {
    const double v = std::clamp(std::round(map.pixels()[i] * scale), 0.0, 65535.0);
    const auto sample = static_cast<unsigned>(v);
    raster[2 * i] = static_cast<char>(sample >> 8);
    raster[2 * i + 1] = static_cast<char>(sample & 0xFF);
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

RgbImage::RgbImage(std::size_t width, std::size_t height, Rgb fill)
    : width_(width), height_(height), pixels_(width * height, fill) {}

void RgbImage::put(long x, long y, Rgb color) noexcept {
  if (x < 0 || y < 0 || x >= static_cast<long>(width_) || y >= static_cast<long>(height_)) return;
  pixels_[static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x)] = color;
}

void save_ppm(const RgbImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      const Rgb& p = image(x, y);
      const char px[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
      out.write(px, 3);
    }
  }
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace towscan
