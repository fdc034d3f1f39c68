#pragma once

// Model checkpoint file:
//   bytes 0..3  "SRCK"
//   byte  4     version, 0x01
//   bytes 5..8  u32 LE length L of the JSON header
//   L bytes     UTF-8 JSON header:
//                 {"format":"semaug-checkpoint","seed":..,"step":..,
//                  "log_scale":..,"scale_learnable":..,
//                  "image":{head config},"text":{head config},
//                  "blocks":[{"name":..,"rows":..,"cols":..},...]}
//   then every block of "blocks" in order, row-major float32 LE.
// Blocks are the image head's then the text head's, each in declaration
// order (latents, w_q, w_k, w_v, w_o | score, proj). log_scale is stored
// in the header as a JSON number.

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "semaug/contrastive.hpp"
#include "semaug/dataset.hpp"

namespace semaug {

struct Checkpoint {
  ContrastiveModel<double> model;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

inline nlohmann::ordered_json head_config_json(const HeadConfig& c) {
  nlohmann::ordered_json j;
  j["mode"] = std::string(to_string(c.mode));
  j["input_dim"] = c.input_dim;
  j["latents"] = c.latents;
  j["head_dim"] = c.head_dim;
  j["embed_dim"] = c.embed_dim;
  return j;
}

inline HeadConfig head_config_from_json(const nlohmann::json& j) {
  HeadConfig c;
  try {
    c.mode = parse_head_mode(j.at("mode").get<std::string>());
    c.input_dim = j.at("input_dim").get<std::size_t>();
    c.latents = j.at("latents").get<std::size_t>();
    c.head_dim = j.at("head_dim").get<std::size_t>();
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad head config in checkpoint: ") + e.what());
  }
  c.validate();
  return c;
}

inline std::string encode_checkpoint(const Checkpoint& ck) {
  const auto& m = ck.model;
  nlohmann::ordered_json h;
  h["format"] = "semaug-checkpoint";
  h["seed"] = ck.seed;
  h["step"] = ck.step;
  h["log_scale"] = m.log_scale;
  h["scale_learnable"] = m.scale_learnable;
  h["image"] = head_config_json(m.image.config);
  h["text"] = head_config_json(m.text.config);
  h["blocks"] = nlohmann::ordered_json::array();
  std::string payload;
  auto add_head = [&](const HeadParams<double>& head, const char* prefix) {
    head.for_each_block([&](std::string_view name, const Matrix<double>& b) {
      h["blocks"].push_back({{"name", std::string(prefix) + "." + std::string(name)}, {"rows", b.rows()}, {"cols", b.cols()}});
      for (Eigen::Index i = 0; i < b.size(); ++i)
        detail::put_u32_le(payload, std::bit_cast<std::uint32_t>(static_cast<float>(b.data()[i])));
    });
  };
  add_head(m.image, "image");
  add_head(m.text, "text");
  const std::string header = h.dump();
  std::string bytes = "SRCK";
  bytes.push_back(static_cast<char>(0x01));
  detail::put_u32_le(bytes, static_cast<std::uint32_t>(header.size()));
  return bytes + header + payload;
}

inline void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  detail::write_file(path, encode_checkpoint(ck));
}

inline Checkpoint decode_checkpoint(const std::string& bytes, const std::string& name) {
  if (bytes.size() < 9 || bytes.compare(0, 4, "SRCK") != 0) throw FormatError(name + ": not a checkpoint file");
  if (static_cast<unsigned char>(bytes[4]) != 0x01) throw FormatError(name + ": unsupported checkpoint version");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t len = detail::get_u32_le(p + 5);
  if (bytes.size() < 9ull + len) throw FormatError(name + ": truncated checkpoint header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(9, len));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(name + ": bad checkpoint header: " + e.what());
  }
  Checkpoint ck;
  try {
    ck.seed = h.at("seed").get<std::uint64_t>();
    ck.step = h.at("step").get<std::uint64_t>();
    ck.model.log_scale = h.at("log_scale").get<double>();
    ck.model.scale_learnable = h.at("scale_learnable").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(name + ": bad checkpoint header: " + e.what());
  }
  ck.model.image.config = head_config_from_json(h.at("image"));
  ck.model.text.config = head_config_from_json(h.at("text"));

  std::size_t offset = 9 + len;
  std::size_t block = 0;
  const auto& blocks = h.at("blocks");
  auto load_head = [&](HeadParams<double>& head, const char* prefix) {
    const auto shapes = block_shapes(head.config);
    std::size_t i = 0;
    head.for_each_block([&](std::string_view bname, Matrix<double>& m) {
      if (block >= blocks.size()) throw FormatError(name + ": checkpoint lists too few blocks");
      const auto& entry = blocks[block++];
      const auto [rows, cols] = shapes[i++];
      if (entry.at("name").get<std::string>() != std::string(prefix) + "." + std::string(bname) ||
          entry.at("rows").get<std::size_t>() != rows || entry.at("cols").get<std::size_t>() != cols)
        throw FormatError(name + ": checkpoint block " + std::string(prefix) + "." + std::string(bname) +
                          " does not match its config");
      if (bytes.size() < offset + 4 * rows * cols) throw FormatError(name + ": truncated checkpoint payload");
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
      for (std::size_t k = 0; k < rows * cols; ++k)
        m.data()[k] = std::bit_cast<float>(detail::get_u32_le(p + offset + 4 * k));
      offset += 4 * rows * cols;
    });
  };
  load_head(ck.model.image, "image");
  load_head(ck.model.text, "text");
  if (block != blocks.size() || offset != bytes.size()) throw FormatError(name + ": unexpected data after checkpoint blocks");
  return ck;
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_text_file(path), path.string());
}

}  // namespace semaug
