#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "weakmatch/tensor.hpp"

namespace weakmatch::nn {

/// Versioned container of named float64 tensors plus an architecture
/// descriptor, the path of the trigram vocab and the run's config hash.
///
/// Layout (all integers little-endian):
///   "WMCKPT01"  u32 version  u64 meta_len  meta (JSON)  u64 n_tensors
///   per tensor: u32 name_len  name  u32 ndim  u64 dims[ndim]  f64 values[]
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  nlohmann::json architecture = nlohmann::json::object();
  std::string vocab_path;
  std::string config_hash;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const;
  bool operator==(const Checkpoint&) const = default;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies every parameter value into a checkpoint entry.
void export_parameters(const std::vector<Parameter*>& params, Checkpoint& ckpt);
/// Restores parameter values by name; shapes must match exactly.
void import_parameters(const Checkpoint& ckpt, const std::vector<Parameter*>& params);

}  // namespace weakmatch::nn
