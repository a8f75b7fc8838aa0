#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <random>

#include <zlib.h>

#include "ave/data_io.hpp"
#include "ave/errors.hpp"
#include "byte_io.hpp"

namespace ave {
namespace {

constexpr std::array<char, 4> kMagic{'A', 'V', 'E', 'F'};

std::uint64_t sequence_bytes(const DatasetDims& d) {
  const std::uint64_t n = d.segments;
  return n * d.audio_dim * 4 + n * d.visual_positions * d.visual_channels * 4 + n;
}

void check_u16(std::size_t v, const char* name) {
  if (v == 0 || v > 0xFFFF) {
    throw ConfigError(std::string(name) + " = " + std::to_string(v) + " does not fit the feature header");
  }
}

}  // namespace

void write_feature_file(const std::filesystem::path& path, const Dataset& dataset) {
  const auto& d = dataset.dims;
  check_u16(d.segments, "N");
  check_u16(d.audio_dim, "audio_dim");
  check_u16(d.visual_positions, "visual_positions");
  check_u16(d.visual_channels, "visual_channels");
  if (dataset.sequences.size() > 0xFFFFFFFFull) throw ConfigError("too many sequences for the feature header");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(ParseErrorKind::kIo, 0, "cannot open " + path.string() + " for writing");

  detail::ByteWriter w;
  w.raw(std::string(kMagic.begin(), kMagic.end()));
  w.u16(kFeatureFileVersion);
  w.u32(static_cast<std::uint32_t>(dataset.sequences.size()));
  w.u16(static_cast<std::uint16_t>(d.segments));
  w.u16(static_cast<std::uint16_t>(d.audio_dim));
  w.u16(static_cast<std::uint16_t>(d.visual_positions));
  w.u16(static_cast<std::uint16_t>(d.visual_channels));
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));

  const std::size_t audio_n = d.segments * d.audio_dim;
  const std::size_t visual_n = d.segments * d.visual_positions * d.visual_channels;
  for (std::size_t s = 0; s < dataset.sequences.size(); ++s) {
    const auto& seq = dataset.sequences[s];
    if (seq.audio.size() != audio_n || seq.visual.size() != visual_n || seq.labels.size() != d.segments) {
      throw DimensionError("write_feature_file: sequence " + std::to_string(s) + " does not match dims");
    }
    w.clear();
    for (float v : seq.audio) w.f32(v);
    for (float v : seq.visual) w.f32(v);
    for (auto l : seq.labels) w.u8(l);
    out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
  }
  if (!out) throw ParseError(ParseErrorKind::kIo, 0, "write to " + path.string() + " failed");
}

Dataset read_feature_file(const std::filesystem::path& path, std::optional<std::size_t> class_count) {
  std::error_code ec;
  const std::uint64_t file_size = std::filesystem::file_size(path, ec);
  std::ifstream in(path, std::ios::binary);
  if (ec || !in) throw ParseError(ParseErrorKind::kIo, 0, "cannot open " + path.string());

  std::array<std::uint8_t, kFeatureHeaderBytes> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  const auto got = static_cast<std::size_t>(in.gcount());
  for (std::size_t i = 0; i < std::min<std::size_t>(got, 4); ++i) {
    if (header[i] != static_cast<std::uint8_t>(kMagic[i])) {
      throw ParseError(ParseErrorKind::kBadMagic, 0, "not a feature file (magic mismatch)");
    }
  }
  if (got < header.size()) {
    throw ParseError(ParseErrorKind::kTruncated, got,
                     "header needs " + std::to_string(header.size()) + " bytes, file has " + std::to_string(got));
  }
  const auto version = static_cast<std::uint16_t>(detail::load_le(&header[4], 2));
  if (version != kFeatureFileVersion) {
    throw ParseError(ParseErrorKind::kBadVersion, 4, "unsupported version " + std::to_string(version));
  }
  const auto count = static_cast<std::uint32_t>(detail::load_le(&header[6], 4));
  Dataset ds;
  ds.dims.segments = detail::load_le(&header[10], 2);
  ds.dims.audio_dim = detail::load_le(&header[12], 2);
  ds.dims.visual_positions = detail::load_le(&header[14], 2);
  ds.dims.visual_channels = detail::load_le(&header[16], 2);
  const std::array<std::size_t, 4> extents{ds.dims.segments, ds.dims.audio_dim, ds.dims.visual_positions,
                                           ds.dims.visual_channels};
  for (std::size_t i = 0; i < extents.size(); ++i) {
    if (extents[i] == 0) throw ParseError(ParseErrorKind::kMalformed, 10 + 2 * i, "zero extent in header");
  }

  const std::uint64_t per_seq = sequence_bytes(ds.dims);
  const std::uint64_t expected = kFeatureHeaderBytes + per_seq * count;
  if (file_size < expected) {
    throw ParseError(ParseErrorKind::kTruncated, file_size,
                     "header declares " + std::to_string(count) + " sequences needing " + std::to_string(expected) +
                         " bytes, file has " + std::to_string(file_size));
  }
  if (file_size > expected) {
    throw ParseError(ParseErrorKind::kMalformed, expected,
                     std::to_string(file_size - expected) + " trailing bytes after declared payload");
  }

  const std::size_t audio_n = ds.dims.segments * ds.dims.audio_dim;
  const std::size_t visual_n = ds.dims.segments * ds.dims.visual_positions * ds.dims.visual_channels;
  std::vector<std::uint8_t> buf(per_seq);
  ds.sequences.reserve(count);
  std::uint64_t offset = kFeatureHeaderBytes;
  for (std::uint32_t s = 0; s < count; ++s) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::uint64_t>(in.gcount()) != per_seq) {
      throw ParseError(ParseErrorKind::kTruncated, offset + static_cast<std::uint64_t>(in.gcount()),
                       "sequence " + std::to_string(s) + " cut short");
    }
    Sequence seq;
    seq.audio.resize(audio_n);
    seq.visual.resize(visual_n);
    const std::uint8_t* p = buf.data();
    for (auto& v : seq.audio) {
      v = detail::load_f32(p);
      p += 4;
    }
    for (auto& v : seq.visual) {
      v = detail::load_f32(p);
      p += 4;
    }
    seq.labels.assign(p, p + ds.dims.segments);
    for (std::size_t t = 0; t < seq.labels.size(); ++t) {
      const auto label = seq.labels[t];
      if (label == kInvalidLabel || (class_count && label >= *class_count)) {
        throw ParseError(ParseErrorKind::kLabelOutOfRange, offset + (p - buf.data()) + t,
                         "label " + std::to_string(label) + " of sequence " + std::to_string(s) + " segment " +
                             std::to_string(t) + " out of range");
      }
    }
    ds.sequences.push_back(std::move(seq));
    offset += per_seq;
  }
  return ds;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t sequence_count, std::size_t batch_size,
                                                   std::uint64_t shuffle_seed, bool shuffle) {
  if (batch_size == 0) throw ContractError("make_batches: batch size must be at least 1");
  if (sequence_count == 0) throw ContractError("make_batches: empty dataset");
  std::vector<std::size_t> order(sequence_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    // Fisher-Yates with an explicit generator so the order does not depend on
    // the standard library's shuffle implementation.
    std::mt19937_64 rng(shuffle_seed);
    for (std::size_t i = sequence_count - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
      std::swap(order[i], order[j]);
    }
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < sequence_count; start += batch_size) {
    const std::size_t end = std::min(sequence_count, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

Batch make_batch(const Dataset& dataset, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ContractError("make_batch: no sequences selected");
  const auto& d = dataset.dims;
  const std::size_t b = indices.size();
  const std::size_t audio_n = d.segments * d.audio_dim;
  const std::size_t visual_n = d.segments * d.visual_positions * d.visual_channels;
  std::vector<double> audio(b * audio_n);
  std::vector<double> visual(b * visual_n);
  Batch batch;
  batch.labels.reserve(b * d.segments);
  for (std::size_t i = 0; i < b; ++i) {
    const auto& seq = dataset.sequences.at(indices[i]);
    std::copy(seq.audio.begin(), seq.audio.end(), audio.begin() + static_cast<std::ptrdiff_t>(i * audio_n));
    std::copy(seq.visual.begin(), seq.visual.end(), visual.begin() + static_cast<std::ptrdiff_t>(i * visual_n));
    batch.labels.insert(batch.labels.end(), seq.labels.begin(), seq.labels.end());
  }
  batch.input.audio = Tensor::from({b, d.segments, d.audio_dim}, std::move(audio));
  batch.input.visual = Tensor::from({b, d.segments, d.visual_positions, d.visual_channels}, std::move(visual));
  return batch;
}

std::uint32_t file_crc32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseErrorKind::kIo, 0, "cannot open " + path.string());
  uLong crc = crc32(0L, Z_NULL, 0);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto n = in.gcount();
    if (n > 0) crc = crc32(crc, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace ave
