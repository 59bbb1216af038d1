#pragma once

// Checkpoint file: one JSON manifest line (version, config, step, validation
// history, array directory) terminated by '\n', followed by a raw
// little-endian float32 payload. Array entries give rows, cols and the byte
// offset into the payload; data is stored column-major. Adam moments are
// saved under adam_m/ and adam_v/ prefixes.

#include <cstring>
#include <fstream>

#include "charblock/io/atomic_file.hpp"
#include "charblock/serialize.hpp"

namespace charblock {

struct Checkpoint {
  int version = 1;
  ModelConfig config;
  ParamStore<float> params;  // values + optimizer moments
  long step = 0;
  std::vector<double> val_history;
};

namespace detail {

inline void append_array(Json& arrays, std::string& payload, const std::string& name,
                         const MatF& m) {
  Json entry{{"name", name},
             {"rows", m.rows()},
             {"cols", m.cols()},
             {"dtype", "f32"},
             {"order", "col_major"},
             {"offset", payload.size()}};
  arrays.push_back(entry);
  const size_t bytes = sizeof(float) * static_cast<size_t>(m.size());
  payload.append(reinterpret_cast<const char*>(m.data()), bytes);
}

inline MatF read_array(const Json& entry, const std::string& payload) {
  const long rows = entry.at("rows").get<long>();
  const long cols = entry.at("cols").get<long>();
  check(entry.at("dtype").get<std::string>() == "f32", "checkpoint: unsupported dtype");
  const size_t offset = entry.at("offset").get<size_t>();
  const size_t bytes = sizeof(float) * static_cast<size_t>(rows * cols);
  check(offset + bytes <= payload.size(), "checkpoint: array out of payload bounds");
  MatF m(rows, cols);
  std::memcpy(m.data(), payload.data() + offset, bytes);
  return m;
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  Json arrays = Json::array();
  std::string payload;
  for (const auto& [name, slot] : ckpt.params.slots) {
    detail::append_array(arrays, payload, "param/" + name, slot.value);
    detail::append_array(arrays, payload, "adam_m/" + name, slot.m);
    detail::append_array(arrays, payload, "adam_v/" + name, slot.v);
  }
  Json manifest{{"version", ckpt.version},
                {"config", to_json(ckpt.config)},
                {"step", ckpt.step},
                {"val_history", ckpt.val_history},
                {"payload_bytes", payload.size()},
                {"arrays", arrays}};
  atomic_write(path, manifest.dump() + "\n" + payload);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  const std::string content = read_file(path);
  const size_t newline = content.find('\n');
  check(newline != std::string::npos, "checkpoint: missing manifest line");
  const Json manifest = Json::parse(content.substr(0, newline));
  const std::string payload = content.substr(newline + 1);

  Checkpoint ckpt;
  ckpt.version = manifest.at("version").get<int>();
  check(ckpt.version == 1, "checkpoint: unsupported version");
  ckpt.config = model_from_json(manifest.at("config"));
  ckpt.step = manifest.at("step").get<long>();
  ckpt.val_history = manifest.at("val_history").get<std::vector<double>>();
  check(manifest.at("payload_bytes").get<size_t>() == payload.size(),
        "checkpoint: payload size mismatch");

  std::map<std::string, MatF> values, ms, vs;
  for (const Json& entry : manifest.at("arrays")) {
    const std::string name = entry.at("name").get<std::string>();
    if (name.rfind("param/", 0) == 0) {
      values[name.substr(6)] = detail::read_array(entry, payload);
    } else if (name.rfind("adam_m/", 0) == 0) {
      ms[name.substr(7)] = detail::read_array(entry, payload);
    } else if (name.rfind("adam_v/", 0) == 0) {
      vs[name.substr(7)] = detail::read_array(entry, payload);
    } else {
      throw std::invalid_argument("checkpoint: unknown array kind " + name);
    }
  }
  for (auto& [name, value] : values) {
    ckpt.params.add(name, std::move(value));
    auto& slot = ckpt.params.slots.at(name);
    const auto mit = ms.find(name);
    const auto vit = vs.find(name);
    check(mit != ms.end() && vit != vs.end(), "checkpoint: missing moments for " + name);
    slot.m = mit->second;
    slot.v = vit->second;
  }
  return ckpt;
}

}  // namespace charblock
