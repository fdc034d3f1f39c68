#pragma once

// Segment manifests, transcripts, video-level splits and the SEMB
// embedding-table format.
//
// SEMB layout (all integers and floats little-endian):
//   bytes 0..3   "SEMB"
//   byte  4      version, 0x01
//   bytes 5..8   u32 row count n
//   bytes 9..12  u32 dimension d
//   then n*d float32 values, row-major.
// A sidecar `<path>.idx.jsonl` holds one {"video_id","segment_id","frame_index"}
// object per row; frame_index -1 marks an annotation-text row.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "semaug/error.hpp"
#include "semaug/linalg.hpp"

namespace semaug {

struct SegmentRecord {
  std::string video_id;
  std::string segment_id;
  double start_sec = 0;
  double end_sec = 0;
  std::string annotation;
  int frame_count = 0;

  bool operator==(const SegmentRecord&) const = default;
};

struct VideoTranscript {
  std::string video_id;
  std::string transcript;
};

inline constexpr std::int64_t kTextFrame = -1;

struct RowDescriptor {
  std::string video_id;
  std::string segment_id;
  std::int64_t frame_index = kTextFrame;

  bool is_text() const { return frame_index == kTextFrame; }
  bool operator==(const RowDescriptor&) const = default;
};

struct EmbeddingTable {
  std::size_t dim = 0;
  Matrix<float> rows;
  std::vector<RowDescriptor> index;

  std::size_t size() const { return index.size(); }

  // Throws ValidationError when the table breaks its invariants.
  void validate() const {
    if (dim == 0) throw ValidationError("embedding table dimension must be positive");
    if (static_cast<std::size_t>(rows.cols()) != dim && rows.rows() > 0)
      throw ValidationError("embedding rows have dimension " + std::to_string(rows.cols()) +
                            ", expected " + std::to_string(dim));
    if (static_cast<std::size_t>(rows.rows()) != index.size())
      throw ValidationError("index has " + std::to_string(index.size()) + " entries for " +
                            std::to_string(rows.rows()) + " rows");
    for (Eigen::Index r = 0; r < rows.rows(); ++r)
      if (!rows.row(r).allFinite())
        throw NumericError("non-finite value in embedding row " + std::to_string(r));
    for (std::size_t i = 0; i < index.size(); ++i)
      if (index[i].frame_index < kTextFrame)
        throw ValidationError("row " + std::to_string(i) + " has negative frame_index " +
                              std::to_string(index[i].frame_index));
  }

  bool operator==(const EmbeddingTable& other) const {
    if (dim != other.dim || index != other.index) return false;
    if (rows.rows() != other.rows.rows() || rows.cols() != other.rows.cols()) return false;
    // Bitwise comparison so -0.0f and 0.0f differ.
    for (Eigen::Index i = 0; i < rows.size(); ++i)
      if (std::bit_cast<std::uint32_t>(rows.data()[i]) !=
          std::bit_cast<std::uint32_t>(other.rows.data()[i]))
        return false;
    return true;
  }
};

struct SplitSpec {
  double train_frac = 0.67;
  double val_frac = 0.08;
  double test_frac = 0.25;
  std::uint64_t seed = 0;

  void validate() const {
    if (train_frac < 0 || val_frac < 0 || test_frac < 0)
      throw ValidationError("split fractions must be non-negative");
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
      throw ValidationError("split fractions must sum to 1");
  }
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::vector<std::string> warnings;

  const std::vector<std::string>& subset(std::string_view name) const {
    if (name == "train") return train;
    if (name == "val") return val;
    if (name == "test") return test;
    throw ValidationError("unknown split '" + std::string(name) + "'");
  }
};

namespace detail {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

// Calls fn(line_number, json) for each non-blank line.
template <class Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object())
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected a JSON object");
    fn(line_no, j);
  }
}

template <class V>
V required_field(const nlohmann::json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing field \"" + key + "\"");
  try {
    return it->get<V>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(where + ": field \"" + key + "\" has the wrong type");
  }
}

inline void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

}  // namespace detail

inline std::vector<SegmentRecord> load_manifest(const std::filesystem::path& path) {
  std::vector<SegmentRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  detail::for_each_json_line(path, [&](std::size_t line_no, const nlohmann::json& j) {
    const std::string where = path.string() + ":" + std::to_string(line_no);
    SegmentRecord r;
    r.video_id = detail::required_field<std::string>(j, "video_id", where);
    r.segment_id = detail::required_field<std::string>(j, "segment_id", where);
    r.start_sec = detail::required_field<double>(j, "start_sec", where);
    r.end_sec = detail::required_field<double>(j, "end_sec", where);
    r.annotation = detail::required_field<std::string>(j, "annotation", where);
    r.frame_count = detail::required_field<int>(j, "frame_count", where);
    const std::string seg = r.video_id + "/" + r.segment_id;
    if (r.start_sec < 0) throw ValidationError(where + ": segment " + seg + " has negative start_sec");
    if (!(r.end_sec > r.start_sec))
      throw ValidationError(where + ": segment " + seg + " has end_sec <= start_sec");
    if (r.frame_count < 3)
      throw ValidationError(where + ": segment " + seg + " has frame_count " +
                            std::to_string(r.frame_count) + " (< 3)");
    if (!seen.emplace(r.video_id, r.segment_id).second)
      throw ValidationError(where + ": duplicate segment " + seg);
    records.push_back(std::move(r));
  });
  return records;
}

inline std::vector<VideoTranscript> load_transcripts(const std::filesystem::path& path) {
  std::vector<VideoTranscript> out;
  std::set<std::string> seen;
  detail::for_each_json_line(path, [&](std::size_t line_no, const nlohmann::json& j) {
    const std::string where = path.string() + ":" + std::to_string(line_no);
    VideoTranscript t;
    t.video_id = detail::required_field<std::string>(j, "video_id", where);
    t.transcript = detail::required_field<std::string>(j, "transcript", where);
    if (!seen.insert(t.video_id).second)
      throw ValidationError(where + ": duplicate transcript for video " + t.video_id);
    out.push_back(std::move(t));
  });
  return out;
}

inline void write_manifest(const std::vector<SegmentRecord>& records,
                           const std::filesystem::path& path) {
  std::string text;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["video_id"] = r.video_id;
    j["segment_id"] = r.segment_id;
    j["start_sec"] = r.start_sec;
    j["end_sec"] = r.end_sec;
    j["annotation"] = r.annotation;
    j["frame_count"] = r.frame_count;
    text += j.dump() + "\n";
  }
  detail::write_file(path, text);
}

inline void write_transcripts(const std::vector<VideoTranscript>& transcripts,
                              const std::filesystem::path& path) {
  std::string text;
  for (const auto& t : transcripts) {
    nlohmann::ordered_json j;
    j["video_id"] = t.video_id;
    j["transcript"] = t.transcript;
    text += j.dump() + "\n";
  }
  detail::write_file(path, text);
}

// Distinct video ids in first-appearance order.
inline std::vector<std::string> video_ids(const std::vector<SegmentRecord>& records) {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& r : records)
    if (seen.insert(r.video_id).second) ids.push_back(r.video_id);
  return ids;
}

// Splits by video so every segment of a video lands in the same subset.
// Sizes: train = round(train_frac*V), val = round(val_frac*V), rest to test
// (round half up); with V >= 4 an empty val or test borrows one video from
// train. Each subset is returned sorted.
inline DatasetSplit split_dataset(const std::vector<SegmentRecord>& records, const SplitSpec& spec) {
  spec.validate();
  std::vector<std::string> videos = video_ids(records);
  if (videos.empty()) throw DomainError("split_dataset needs at least one video");
  std::sort(videos.begin(), videos.end());
  std::mt19937_64 rng(spec.seed);
  std::shuffle(videos.begin(), videos.end(), rng);

  const std::size_t v = videos.size();
  std::size_t n_train = std::min(v, detail::round_half_up(spec.train_frac * static_cast<double>(v)));
  std::size_t n_val = std::min(v - n_train, detail::round_half_up(spec.val_frac * static_cast<double>(v)));
  if (v >= 4) {
    if (n_val == 0 && spec.val_frac > 0) { --n_train; ++n_val; }
    if (n_train + n_val == v && spec.test_frac > 0) --n_train;
  }

  DatasetSplit split;
  split.train.assign(videos.begin(), videos.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(videos.begin() + static_cast<std::ptrdiff_t>(n_train),
                   videos.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(videos.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), videos.end());
  for (auto* s : {&split.train, &split.val, &split.test}) std::sort(s->begin(), s->end());
  if (split.val.empty()) split.warnings.push_back("validation split is empty");
  if (split.test.empty()) split.warnings.push_back("test split is empty");
  return split;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".idx.jsonl");
}

inline std::string encode_embedding_table(const EmbeddingTable& table) {
  table.validate();
  std::string bytes = "SEMB";
  bytes.push_back(static_cast<char>(0x01));
  detail::put_u32_le(bytes, static_cast<std::uint32_t>(table.size()));
  detail::put_u32_le(bytes, static_cast<std::uint32_t>(table.dim));
  bytes.reserve(bytes.size() + 4 * table.size() * table.dim);
  for (Eigen::Index i = 0; i < table.rows.size(); ++i)
    detail::put_u32_le(bytes, std::bit_cast<std::uint32_t>(table.rows.data()[i]));
  return bytes;
}

inline void write_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path) {
  const std::string bytes = encode_embedding_table(table);
  std::string idx;
  for (const auto& d : table.index) {
    nlohmann::ordered_json j;
    j["video_id"] = d.video_id;
    j["segment_id"] = d.segment_id;
    j["frame_index"] = d.frame_index;
    idx += j.dump() + "\n";
  }
  detail::write_file(path, bytes);
  detail::write_file(sidecar_path(path), idx);
}

// Parses the binary part only; the returned table has an empty index.
inline EmbeddingTable decode_embedding_rows(const std::string& bytes, const std::string& name) {
  constexpr std::size_t kHeader = 13;
  if (bytes.size() < 5 || bytes.compare(0, 4, "SEMB") != 0)
    throw FormatError(name + ": bad magic bytes (expected \"SEMB\")");
  if (static_cast<unsigned char>(bytes[4]) != 0x01)
    throw FormatError(name + ": unsupported version " +
                      std::to_string(static_cast<unsigned char>(bytes[4])));
  if (bytes.size() < kHeader) throw FormatError(name + ": truncated header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t n = detail::get_u32_le(p + 5);
  const std::uint32_t d = detail::get_u32_le(p + 9);
  if (d == 0) throw FormatError(name + ": dimension is zero");
  const std::uint64_t expected = kHeader + 4ull * n * d;
  if (bytes.size() < expected)
    throw FormatError(name + ": truncated payload: declared " + std::to_string(n) + "x" +
                      std::to_string(d) + " floats need " + std::to_string(expected) +
                      " bytes, file has " + std::to_string(bytes.size()));
  if (bytes.size() > expected)
    throw FormatError(name + ": " + std::to_string(bytes.size() - expected) +
                      " trailing bytes after payload");
  EmbeddingTable table;
  table.dim = d;
  table.rows.resize(n, d);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n) * d; ++i)
    table.rows.data()[i] = std::bit_cast<float>(detail::get_u32_le(p + kHeader + 4 * i));
  return table;
}

inline EmbeddingTable read_embedding_table(const std::filesystem::path& path) {
  EmbeddingTable table = decode_embedding_rows(detail::read_text_file(path), path.string());
  const auto idx_path = sidecar_path(path);
  if (!std::filesystem::exists(idx_path)) throw IoError("missing index sidecar " + idx_path.string());
  detail::for_each_json_line(idx_path, [&](std::size_t line_no, const nlohmann::json& j) {
    const std::string where = idx_path.string() + ":" + std::to_string(line_no);
    RowDescriptor d;
    d.video_id = detail::required_field<std::string>(j, "video_id", where);
    d.segment_id = detail::required_field<std::string>(j, "segment_id", where);
    d.frame_index = detail::required_field<std::int64_t>(j, "frame_index", where);
    table.index.push_back(std::move(d));
  });
  if (table.index.size() != static_cast<std::size_t>(table.rows.rows()))
    throw FormatError(path.string() + ": index has " + std::to_string(table.index.size()) +
                      " rows, payload has " + std::to_string(table.rows.rows()));
  table.validate();
  return table;
}

}  // namespace semaug
