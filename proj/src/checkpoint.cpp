#include "weakmatch/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <map>

#include "weakmatch/error.hpp"
#include "binary_io.hpp"

namespace weakmatch::nn {

namespace {

using binio::get_le;
using binio::put_le;

constexpr char kMagic[8] = {'W', 'M', 'C', 'K', 'P', 'T', '0', '1'};

std::string get_bytes(std::istream& in, std::size_t n, const std::filesystem::path& path) {
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw FormatError(path.string() + ": truncated checkpoint");
  }
  return s;
}

}  // namespace

const Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw FormatError("checkpoint has no tensor '" + name + "'");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, Checkpoint::kVersion);
  const nlohmann::json meta = {{"architecture", ckpt.architecture},
                               {"vocab_path", ckpt.vocab_path},
                               {"config_hash", ckpt.config_hash}};
  const std::string m = meta.dump();
  put_le<std::uint64_t>(out, m.size());
  out.write(m.data(), static_cast<std::streamsize>(m.size()));
  put_le<std::uint64_t>(out, ckpt.tensors.size());
  for (const auto& [name, t] : ckpt.tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape().size()));
    for (auto d : t.shape()) put_le<std::uint64_t>(out, d);
    for (double v : t.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw RuntimeError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  if (get_bytes(in, sizeof(kMagic), path) != std::string(kMagic, sizeof(kMagic))) {
    throw FormatError(path.string() + ": not a weakmatch checkpoint");
  }
  const auto version = get_le<std::uint32_t>(in, path);
  if (version != Checkpoint::kVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const auto meta_len = get_le<std::uint64_t>(in, path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(get_bytes(in, meta_len, path));
    ckpt.architecture = meta.at("architecture");
    ckpt.vocab_path = meta.at("vocab_path").get<std::string>();
    ckpt.config_hash = meta.at("config_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad checkpoint metadata: " + e.what());
  }
  const auto n = get_le<std::uint64_t>(in, path);
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto name_len = get_le<std::uint32_t>(in, path);
    std::string name = get_bytes(in, name_len, path);
    const auto ndim = get_le<std::uint32_t>(in, path);
    std::vector<std::size_t> shape(ndim);
    std::size_t count = 1;
    for (auto& d : shape) {
      d = get_le<std::uint64_t>(in, path);
      count *= d;
    }
    std::vector<double> values(count);
    for (auto& v : values) v = std::bit_cast<double>(get_le<std::uint64_t>(in, path));
    ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return ckpt;
}

void export_parameters(const std::vector<Parameter*>& params, Checkpoint& ckpt) {
  for (const auto* p : params) ckpt.tensors.emplace_back(p->name, p->value);
}

void import_parameters(const Checkpoint& ckpt, const std::vector<Parameter*>& params) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [n, t] : ckpt.tensors) by_name[n] = &t;
  for (auto* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw FormatError("checkpoint is missing tensor '" + p->name + "'");
    if (!it->second->same_shape(p->value)) {
      throw FormatError("checkpoint tensor '" + p->name + "' has shape " +
                        it->second->shape_string() + ", expected " + p->value.shape_string());
    }
    p->value = *it->second;
  }
}

}  // namespace weakmatch::nn
