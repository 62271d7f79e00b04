/*
 * Copyright 2026 The memprog Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "memprog/dataset.hpp"
#include "memprog/nn.hpp"

namespace memprog {

using nlohmann::json;

// ---------------------------------------------------------------------------
// hashing (FNV-1a 64) for manifests and provenance
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::span<const char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hash_string(std::span<const char> bytes) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline std::string file_hash(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  return hash_string(std::span<const char>(bytes.data(), bytes.size()));
}

// ---------------------------------------------------------------------------
// deterministic text formatting
// ---------------------------------------------------------------------------

/// Shortest decimal form that is still deterministic across runs.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

/// Line-oriented CSV writer with fixed numeric formatting.
class CsvWriter {
public:
  explicit CsvWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) {
      throw std::runtime_error("cannot open file for writing: " + path.string());
    }
  }

  void header(const std::string& line) { out_ << line << '\n'; }

  CsvWriter& field(const std::string& v) {
    sep();
    out_ << v;
    return *this;
  }
  CsvWriter& field(double v) { return field(format_number(v)); }
  CsvWriter& field(std::int64_t v) { return field(std::to_string(v)); }
  CsvWriter& field(int v) { return field(std::to_string(v)); }

  void end_row() {
    out_ << '\n';
    first_ = true;
  }

private:
  void sep() {
    if (!first_) {
      out_ << ',';
    }
    first_ = false;
  }

  std::ofstream out_;
  bool first_ = true;
};

// ---------------------------------------------------------------------------
// JSON converters
// ---------------------------------------------------------------------------

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!j.is_object()) {
    throw std::invalid_argument(where + ": expected a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
  }
}

inline json device_to_json(const DeviceParams& p) {
  return json{{"g_min_nominal", p.g_min_nominal}, {"g_max_nominal", p.g_max_nominal},
              {"k_set", p.k_set},                 {"k_reset", p.k_reset},
              {"eps_floor", p.eps_floor},         {"sigma_rate", p.sigma_rate},
              {"sigma_bound", p.sigma_bound},     {"dt", p.dt},
              {"v_set", p.v_set},                 {"v_reset", p.v_reset},
              {"rho_band", p.rho_band},           {"bound_band", p.bound_band}};
}

inline DeviceParams device_from_json(const json& j) {
  check_keys(j,
             {"g_min_nominal", "g_max_nominal", "k_set", "k_reset", "eps_floor", "sigma_rate",
              "sigma_bound", "dt", "v_set", "v_reset", "rho_band", "bound_band"},
             "device");
  DeviceParams p;
  p.g_min_nominal = j.value("g_min_nominal", p.g_min_nominal);
  p.g_max_nominal = j.value("g_max_nominal", p.g_max_nominal);
  p.k_set = j.value("k_set", p.k_set);
  p.k_reset = j.value("k_reset", p.k_reset);
  p.eps_floor = j.value("eps_floor", p.eps_floor);
  p.sigma_rate = j.value("sigma_rate", p.sigma_rate);
  p.sigma_bound = j.value("sigma_bound", p.sigma_bound);
  p.dt = j.value("dt", p.dt);
  p.v_set = j.value("v_set", p.v_set);
  p.v_reset = j.value("v_reset", p.v_reset);
  p.rho_band = j.value("rho_band", p.rho_band);
  p.bound_band = j.value("bound_band", p.bound_band);
  p.validate();
  return p;
}

inline json norm_to_json(const NormConstants& n) {
  return json{{"g_ref", n.g_ref}, {"t_ref", n.t_ref}};
}

inline NormConstants norm_from_json(const json& j) {
  check_keys(j, {"g_ref", "t_ref"}, "norm");
  NormConstants n;
  n.g_ref = j.at("g_ref").get<double>();
  n.t_ref = j.at("t_ref").get<double>();
  if (!(n.g_ref > 0.0) || !(n.t_ref > 0.0)) {
    throw std::invalid_argument("norm: constants must be positive");
  }
  return n;
}

// ---------------------------------------------------------------------------
// dataset container: <name>.meta.json + <name>.samples.bin
// ---------------------------------------------------------------------------

namespace detail {

constexpr char kDatasetMagic[8] = {'M', 'P', 'R', 'O', 'G', 'D', 'S', '1'};

template <class T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void read_pod(std::istream& in, T& v, const std::string& file) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) {
    throw std::runtime_error("dataset: truncated or corrupt samples file: " + file);
  }
}

}  // namespace detail

/// Write `<prefix>.meta.json` and `<prefix>.samples.bin`. Rewriting the same
/// dataset produces byte-identical files.
inline void save_dataset(const Dataset& ds, const std::filesystem::path& prefix) {
  const std::filesystem::path bin_path = prefix.string() + ".samples.bin";
  const std::filesystem::path meta_path = prefix.string() + ".meta.json";

  {
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) {
      throw std::runtime_error("cannot open file for writing: " + bin_path.string());
    }
    out.write(detail::kDatasetMagic, sizeof(detail::kDatasetMagic));
    detail::write_pod(out, static_cast<std::uint64_t>(ds.samples.size()));
    for (const Sample& s : ds.samples) {
      detail::write_pod(out, s.g_start);
      detail::write_pod(out, s.g_target);
      detail::write_pod(out, s.g_end);
      detail::write_pod(out, s.t_steps);
      detail::write_pod(out, static_cast<std::uint64_t>(s.history_g.size()));
      out.write(reinterpret_cast<const char*>(s.history_g.data()),
                static_cast<std::streamsize>(s.history_g.size() * sizeof(float)));
    }
  }

  json meta;
  meta["format"] = "memprog-dataset-1";
  meta["n"] = ds.samples.size();
  meta["seed"] = ds.seed;
  meta["rejected"] = ds.rejected;
  meta["device"] = device_to_json(ds.device);
  meta["norm"] = norm_to_json(ds.norm);
  meta["counts"] = {{"train", ds.split.train.size()},
                    {"val", ds.split.val.size()},
                    {"test", ds.split.test.size()}};
  meta["split"] = {{"train", ds.split.train}, {"val", ds.split.val}, {"test", ds.split.test}};
  std::ofstream out(meta_path);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + meta_path.string());
  }
  out << meta.dump(2) << '\n';
}

inline Dataset load_dataset(const std::filesystem::path& prefix) {
  const std::filesystem::path bin_path = prefix.string() + ".samples.bin";
  const std::filesystem::path meta_path = prefix.string() + ".meta.json";

  json meta;
  {
    std::ifstream in(meta_path);
    if (!in) {
      throw std::runtime_error("dataset: cannot open meta file: " + meta_path.string());
    }
    try {
      in >> meta;
    } catch (const json::exception& e) {
      throw std::runtime_error("dataset: corrupt meta file " + meta_path.string() + ": " +
                               e.what());
    }
  }
  if (meta.value("format", "") != "memprog-dataset-1") {
    throw std::runtime_error("dataset: unrecognized format in " + meta_path.string());
  }

  Dataset ds;
  ds.device = device_from_json(meta.at("device"));
  ds.norm = norm_from_json(meta.at("norm"));
  ds.seed = meta.at("seed").get<std::uint64_t>();
  ds.rejected = meta.at("rejected").get<std::uint64_t>();
  ds.split.train = meta.at("split").at("train").get<std::vector<std::uint32_t>>();
  ds.split.val = meta.at("split").at("val").get<std::vector<std::uint32_t>>();
  ds.split.test = meta.at("split").at("test").get<std::vector<std::uint32_t>>();

  std::ifstream in(bin_path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("dataset: cannot open samples file: " + bin_path.string());
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, detail::kDatasetMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("dataset: bad magic in samples file: " + bin_path.string());
  }
  std::uint64_t n = 0;
  detail::read_pod(in, n, bin_path.string());
  if (n != meta.at("n").get<std::uint64_t>()) {
    throw std::runtime_error("dataset: sample count mismatch between meta and samples file: " +
                             bin_path.string());
  }
  ds.samples.resize(n);
  for (Sample& s : ds.samples) {
    detail::read_pod(in, s.g_start, bin_path.string());
    detail::read_pod(in, s.g_target, bin_path.string());
    detail::read_pod(in, s.g_end, bin_path.string());
    detail::read_pod(in, s.t_steps, bin_path.string());
    std::uint64_t len = 0;
    detail::read_pod(in, len, bin_path.string());
    if (len != static_cast<std::uint64_t>(2 * std::llabs(s.t_steps) + 1)) {
      throw std::runtime_error("dataset: inconsistent history length in samples file: " +
                               bin_path.string());
    }
    s.history_g.resize(len);
    in.read(reinterpret_cast<char*>(s.history_g.data()),
            static_cast<std::streamsize>(len * sizeof(float)));
    if (!in) {
      throw std::runtime_error("dataset: truncated or corrupt samples file: " +
                               bin_path.string());
    }
  }
  for (const auto* part : {&ds.split.train, &ds.split.val, &ds.split.test}) {
    for (const std::uint32_t idx : *part) {
      if (idx >= ds.samples.size()) {
        throw std::runtime_error("dataset: split index out of range in " + meta_path.string());
      }
    }
  }
  return ds;
}

/// Inspection export, one row per sample, histories elided.
inline void export_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header("index,g_start_uS,g_target_uS,g_end_uS,t_pulse_ns,history_len");
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const Sample& s = ds.samples[i];
    csv.field(static_cast<std::int64_t>(i))
        .field(s.g_start)
        .field(s.g_target)
        .field(s.g_end)
        .field(s.t_pulse_ns(ds.device.dt))
        .field(static_cast<std::int64_t>(s.history_g.size()));
    csv.end_row();
  }
}

/// In-memory hash of the full dataset content (used for model provenance).
inline std::string dataset_hash(const Dataset& ds) {
  std::string buf;
  buf.reserve(ds.samples.size() * 64);
  const auto append = [&buf](const void* p, std::size_t n) {
    buf.append(static_cast<const char*>(p), n);
  };
  const std::uint64_t n = ds.samples.size();
  append(&n, sizeof(n));
  append(&ds.seed, sizeof(ds.seed));
  for (const Sample& s : ds.samples) {
    append(&s.g_start, sizeof(s.g_start));
    append(&s.g_target, sizeof(s.g_target));
    append(&s.g_end, sizeof(s.g_end));
    append(&s.t_steps, sizeof(s.t_steps));
    append(s.history_g.data(), s.history_g.size() * sizeof(float));
  }
  return hash_string(std::span<const char>(buf.data(), buf.size()));
}

// ---------------------------------------------------------------------------
// model checkpoints
// ---------------------------------------------------------------------------

inline json mlp_to_json(const Mlp& m, const NormConstants& norm, const json& provenance) {
  json j;
  j["format"] = "memprog-mlp-1";
  j["layer_sizes"] = m.layer_sizes;
  j["activation"] = m.activation;
  j["weights"] = m.weights;
  j["biases"] = m.biases;
  j["norm"] = norm_to_json(norm);
  j["provenance"] = provenance;
  return j;
}

struct LoadedModel {
  Mlp model;
  NormConstants norm;
  json provenance;
};

inline LoadedModel mlp_from_json(const json& j, const std::string& where) {
  if (j.value("format", "") != "memprog-mlp-1") {
    throw std::runtime_error(where + ": unrecognized model format");
  }
  LoadedModel loaded;
  loaded.model.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  Mlp::check_sizes(loaded.model.layer_sizes);
  loaded.model.activation = j.at("activation").get<std::string>();
  if (loaded.model.activation != "relu") {
    throw std::runtime_error(where + ": unsupported activation tag");
  }
  loaded.model.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  loaded.model.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  const auto layers = loaded.model.layer_sizes.size() - 1;
  if (loaded.model.weights.size() != layers || loaded.model.biases.size() != layers) {
    throw std::runtime_error(where + ": layer count mismatch");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<std::size_t>(loaded.model.layer_sizes[l]);
    const auto out = static_cast<std::size_t>(loaded.model.layer_sizes[l + 1]);
    if (loaded.model.weights[l].size() != in * out || loaded.model.biases[l].size() != out) {
      throw std::runtime_error(where + ": weight shape mismatch at layer " + std::to_string(l));
    }
  }
  loaded.norm = norm_from_json(j.at("norm"));
  loaded.provenance = j.value("provenance", json::object());
  return loaded;
}

inline void save_model(const Mlp& m, const NormConstants& norm, const json& provenance,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path.string());
  }
  out << mlp_to_json(m, norm, provenance).dump(2) << '\n';
}

inline LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("model: cannot open checkpoint: " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("model: corrupt checkpoint " + path.string() + ": " + e.what());
  }
  return mlp_from_json(j, "model " + path.string());
}

}  // namespace memprog
