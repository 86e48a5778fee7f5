#include "dspn/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace dspn {

namespace {

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::CorruptFile, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::CorruptFile, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::CorruptFile, "short write to " + path.string());
}

std::uint32_t load_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

constexpr char kGrdMagic[4] = {'G', 'R', 'D', '1'};

}  // namespace

Grid read_grd(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kGrdMagic, 4) != 0) {
    throw Error(Errc::CorruptFile, path.string() + ": missing GRD1 header");
  }
  const std::uint32_t w = load_u32le(bytes.data() + 4);
  const std::uint32_t h = load_u32le(bytes.data() + 8);
  const std::uint32_t c = load_u32le(bytes.data() + 12);
  const std::uint64_t count = static_cast<std::uint64_t>(w) * h * c;
  if (w == 0 || h == 0 || c == 0 || w > (1u << 30) || h > (1u << 30) || c > (1u << 20) ||
      bytes.size() - 16 != count * 4) {
    throw Error(Errc::CorruptFile, path.string() + ": payload length does not match header");
  }
  std::vector<double> data(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t bits = load_u32le(bytes.data() + 16 + 4 * i);
    data[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return Grid(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c), std::move(data));
}

void write_grd(const Grid& grid, const std::filesystem::path& path) {
  if (grid.empty()) throw Error(Errc::InvalidGrid, "cannot write an empty grid");
  if (!grid.all_finite()) throw Error(Errc::InvalidGrid, "cannot write non-finite values");
  std::vector<unsigned char> out;
  out.reserve(16 + grid.size() * 4);
  out.insert(out.end(), kGrdMagic, kGrdMagic + 4);
  store_u32le(out, static_cast<std::uint32_t>(grid.width()));
  store_u32le(out, static_cast<std::uint32_t>(grid.height()));
  store_u32le(out, static_cast<std::uint32_t>(grid.channels()));
  for (double v : grid.values()) store_u32le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  dump(path, out);
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(const std::vector<unsigned char>& b, std::size_t& pos) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') tok.push_back(static_cast<char>(b[pos++]));
  return tok;
}

long parse_header_int(const std::string& tok, const std::filesystem::path& path) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char ch) { return std::isdigit(ch); })) {
    throw Error(Errc::CorruptFile, path.string() + ": malformed PGM header");
  }
  return std::stol(tok);
}

}  // namespace

DepthImage read_pgm16(const std::filesystem::path& path, double scale) {
  if (!(scale > 0.0)) throw Error(Errc::InvalidConfig, "PGM depth scale must be > 0");
  const auto bytes = slurp(path);
  std::size_t pos = 0;
  if (header_token(bytes, pos) != "P5") throw Error(Errc::UnsupportedFormat, path.string() + ": not a binary P5 PGM");
  const long w = parse_header_int(header_token(bytes, pos), path);
  const long h = parse_header_int(header_token(bytes, pos), path);
  const long maxval = parse_header_int(header_token(bytes, pos), path);
  if (maxval != 65535) throw Error(Errc::UnsupportedFormat, path.string() + ": only maxval 65535 is supported");
  if (w <= 0 || h <= 0 || pos >= bytes.size()) throw Error(Errc::CorruptFile, path.string() + ": bad PGM header");
  ++pos;  // single whitespace byte before the raster
  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - pos != count * 2) throw Error(Errc::CorruptFile, path.string() + ": truncated PGM raster");
  DepthImage img{Grid(static_cast<int>(w), static_cast<int>(h), 1), Grid(static_cast<int>(w), static_cast<int>(h), 1)};
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned raw = (static_cast<unsigned>(bytes[pos + 2 * i]) << 8) | bytes[pos + 2 * i + 1];
    if (raw == 0) continue;
    img.depth.values()[i] = raw / scale;
    img.mask.values()[i] = 1.0;
  }
  return img;
}

void write_pgm16(const Grid& depth, const std::filesystem::path& path, double scale) {
  require_single_channel(depth, "write_pgm16");
  if (!(scale > 0.0)) throw Error(Errc::InvalidConfig, "PGM depth scale must be > 0");
  const std::string header =
      "P5\n" + std::to_string(depth.width()) + " " + std::to_string(depth.height()) + "\n65535\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(header.size() + depth.size() * 2);
  for (double v : depth.values()) {
    const double raw = std::clamp(std::round(v * scale), 0.0, 65535.0);
    const auto r = static_cast<unsigned>(std::isfinite(raw) ? raw : 0.0);
    out.push_back(static_cast<unsigned char>(r >> 8));
    out.push_back(static_cast<unsigned char>(r & 0xff));
  }
  dump(path, out);
}

}  // namespace dspn
