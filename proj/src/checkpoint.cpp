#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "ave/data_io.hpp"
#include "ave/errors.hpp"
#include "byte_io.hpp"

namespace ave {
namespace {

constexpr std::array<char, 4> kMagic{'A', 'V', 'E', 'C'};

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, data, static_cast<uInt>(n)));
}

class Cursor {
 public:
  Cursor(const std::vector<std::uint8_t>& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  std::uint64_t uint(int n, const char* what) {
    need(static_cast<std::size_t>(n), what);
    const auto v = detail::load_le(&bytes_[pos_], n);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  double f64() {
    need(8, "parameter value");
    const double v = detail::load_f64(&bytes_[pos_]);
    pos_ += 8;
    return v;
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (pos_ + n > end_) {
      throw ParseError(ParseErrorKind::kTruncated, pos_,
                       std::string("checkpoint ends inside ") + what + ": need " + std::to_string(n) +
                           " bytes, " + std::to_string(end_ - pos_) + " remain");
    }
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::string& config_json, const ParameterList& params) {
  detail::ByteWriter w;
  w.raw(std::string(kMagic.begin(), kMagic.end()));
  w.u16(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(config_json.size()));
  w.raw(config_json);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.u16(static_cast<std::uint16_t>(p.name.size()));
    w.raw(p.name);
    const auto& shape = p.tensor.shape();
    w.u8(static_cast<std::uint8_t>(shape.size()));
    for (auto e : shape) w.u32(static_cast<std::uint32_t>(e));
    for (double v : p.tensor.data()) w.f64(v);
  }
  w.u32(crc_of(w.bytes().data(), w.bytes().size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(ParseErrorKind::kIo, 0, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw ParseError(ParseErrorKind::kIo, 0, "write to " + path.string() + " failed");
}

CheckpointContents read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseErrorKind::kIo, 0, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  for (std::size_t i = 0; i < std::min<std::size_t>(bytes.size(), 4); ++i) {
    if (bytes[i] != static_cast<std::uint8_t>(kMagic[i])) {
      throw ParseError(ParseErrorKind::kBadMagic, 0, "not a checkpoint (magic mismatch)");
    }
  }
  if (bytes.size() < 10) {
    throw ParseError(ParseErrorKind::kTruncated, bytes.size(),
                     "checkpoint needs at least 10 bytes, file has " + std::to_string(bytes.size()));
  }
  const auto version = detail::load_le(&bytes[4], 2);
  if (version != kCheckpointVersion) {
    throw ParseError(ParseErrorKind::kBadVersion, 4, "unsupported checkpoint version " + std::to_string(version));
  }
  const std::size_t body = bytes.size() - 4;
  const auto stored = static_cast<std::uint32_t>(detail::load_le(&bytes[body], 4));
  if (stored != crc_of(bytes.data(), body)) {
    throw ParseError(ParseErrorKind::kBadChecksum, body, "checkpoint checksum mismatch");
  }

  Cursor cur(bytes, body);
  cur.uint(4, "magic");
  cur.uint(2, "version");
  CheckpointContents c;
  const auto config_len = cur.uint(4, "config length");
  c.config_json = cur.str(config_len, "config");
  const auto blocks = cur.uint(4, "block count");
  for (std::uint64_t b = 0; b < blocks; ++b) {
    const auto name_len = cur.uint(2, "block name length");
    std::string name = cur.str(name_len, "block name");
    const auto rank = cur.uint(1, "block rank");
    Shape shape;
    for (std::uint64_t r = 0; r < rank; ++r) {
      const std::size_t at = cur.pos();
      const auto e = cur.uint(4, "block extent");
      if (e == 0) throw ParseError(ParseErrorKind::kMalformed, at, "zero extent in block " + name);
      shape.push_back(e);
    }
    std::vector<double> values(numel(shape));
    for (auto& v : values) v = cur.f64();
    c.blocks.emplace_back(std::move(name), Tensor::from(std::move(shape), std::move(values)));
  }
  if (cur.pos() != body) {
    throw ParseError(ParseErrorKind::kMalformed, cur.pos(), "unexpected bytes after last block");
  }
  return c;
}

void load_checkpoint_into(const CheckpointContents& contents, const ParameterList& params) {
  if (contents.blocks.size() != params.size()) {
    throw ConfigError("checkpoint has " + std::to_string(contents.blocks.size()) + " blocks, model expects " +
                      std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, tensor] = contents.blocks[i];
    if (name != params[i].name || tensor.shape() != params[i].tensor.shape()) {
      throw ConfigError("checkpoint block " + name + " " + to_string(tensor.shape()) + " does not match model block " +
                        params[i].name + " " + to_string(params[i].tensor.shape()));
    }
    Tensor dst = params[i].tensor;
    std::copy(tensor.data().begin(), tensor.data().end(), dst.mutable_data().begin());
  }
}

}  // namespace ave
