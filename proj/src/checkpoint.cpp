#include "gaca/checkpoint.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>

namespace gaca {

namespace {

constexpr const char* kMagic = "gaca-checkpoint 1";

std::string shape_token(const Shape& shape) {
  if (shape.empty()) return "scalar";
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "x" : "") + std::to_string(shape[i]);
  return s;
}

Shape parse_shape(const std::string& tok) {
  if (tok == "scalar") return {};
  Shape shape;
  std::stringstream ss(tok);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    long long v = 0;
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || p != part.data() + part.size() || v <= 0) {
      throw ParseError("checkpoint: bad shape '" + tok + "'");
    }
    shape.push_back(static_cast<Index>(v));
  }
  return shape;
}

}  // namespace

const Checkpoint::Record& Checkpoint::find(const std::string& name) const {
  for (const auto& r : tensors) {
    if (r.name == name) return r;
  }
  throw ParseError("checkpoint: missing tensor '" + name + "'");
}

std::filesystem::path manifest_path(const std::filesystem::path& prefix) {
  return prefix.string() + ".manifest";
}

std::filesystem::path blob_path(const std::filesystem::path& prefix) { return prefix.string() + ".bin"; }

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& prefix) {
  std::ofstream manifest(manifest_path(prefix), std::ios::binary);
  std::ofstream blob(blob_path(prefix), std::ios::binary);
  if (!manifest || !blob) throw IoError("cannot write checkpoint at '" + prefix.string() + "'");
  manifest << kMagic << '\n';
  for (const auto& [k, v] : ckpt.config) manifest << "config " << k << '=' << v << '\n';
  std::uint64_t offset = 0;
  for (const auto& r : ckpt.tensors) {
    manifest << "tensor " << r.name << ' ' << shape_token(r.shape) << ' ' << offset << '\n';
    for (Index i = 0; i < r.values.size(); ++i) {
      const auto bits = std::bit_cast<std::uint64_t>(r.values[i]);
      std::array<char, 8> bytes{};
      for (int b = 0; b < 8; ++b) bytes[static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xff);
      blob.write(bytes.data(), 8);
    }
    offset += static_cast<std::uint64_t>(r.values.size()) * 8;
  }
  if (!manifest || !blob) throw IoError("failed writing checkpoint at '" + prefix.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& prefix) {
  std::ifstream manifest(manifest_path(prefix));
  std::ifstream blob(blob_path(prefix), std::ios::binary);
  if (!manifest || !blob) throw IoError("cannot open checkpoint at '" + prefix.string() + "'");
  const std::vector<char> bytes((std::istreambuf_iterator<char>(blob)), std::istreambuf_iterator<char>());

  Checkpoint ckpt;
  std::string line;
  if (!std::getline(manifest, line) || line != kMagic) {
    throw ParseError("checkpoint: '" + manifest_path(prefix).string() + "' has no version header");
  }
  int number = 1;
  while (std::getline(manifest, line)) {
    ++number;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string kind;
    ss >> kind;
    if (kind == "config") {
      std::string kv;
      ss >> kv;
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("checkpoint line " + std::to_string(number) + ": bad config");
      ckpt.config.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    } else if (kind == "tensor") {
      std::string name, shape_tok;
      std::uint64_t offset = 0;
      if (!(ss >> name >> shape_tok >> offset)) {
        throw ParseError("checkpoint line " + std::to_string(number) + ": bad tensor record");
      }
      Checkpoint::Record r{name, parse_shape(shape_tok), {}};
      const Index n = shape_size(r.shape);
      if (offset + static_cast<std::uint64_t>(n) * 8 > bytes.size()) {
        throw ParseError("checkpoint: tensor '" + name + "' runs past the end of the blob");
      }
      r.values.resize(n);
      for (Index i = 0; i < n; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) {
          bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + 8 * i + b])) << (8 * b);
        }
        r.values[i] = std::bit_cast<double>(bits);
      }
      ckpt.tensors.push_back(std::move(r));
    } else {
      throw ParseError("checkpoint line " + std::to_string(number) + ": unknown record '" + kind + "'");
    }
  }
  return ckpt;
}

Checkpoint make_checkpoint(const GacaModel& model, const RunConfig& config) {
  Checkpoint ckpt;
  ckpt.config = config_entries(config);
  const ParamSet params = model.all_params();
  for (const auto& e : params.entries()) {
    ckpt.tensors.push_back({e.name, e.tensor.shape(), e.tensor.value()});
  }
  for (std::size_t s = 0; s < model.bank.kernels.size(); ++s) {
    const Array& k = model.bank.kernels[s];
    ckpt.tensors.push_back({"bank.kernel" + std::to_string(s), {k.size()}, k});
  }
  return ckpt;
}

LoadedModel restore_model(const Checkpoint& ckpt) {
  RunConfig config;
  for (const auto& [k, v] : ckpt.config) set_config_value(config, k, v);
  validate(config);
  LoadedModel out{config, init_model(config.model_config(), config.seed)};
  const ParamSet params = out.model.all_params();
  for (const auto& e : params.entries()) {
    const auto& r = ckpt.find(e.name);
    if (r.shape != e.tensor.shape()) {
      throw ParseError("checkpoint: tensor '" + e.name + "' has shape " + shape_string(r.shape) +
                       ", model expects " + shape_string(e.tensor.shape()));
    }
    Tensor t = e.tensor;
    t.mutable_value() = r.values;
  }
  for (std::size_t s = 0; s < out.model.bank.kernels.size(); ++s) {
    const auto& r = ckpt.find("bank.kernel" + std::to_string(s));
    if (r.values.size() != out.model.bank.kernels[s].size()) {
      throw ParseError("checkpoint: wavelet kernel " + std::to_string(s) + " length differs from config");
    }
    out.model.bank.kernels[s] = r.values;
  }
  return out;
}

void save_model(const GacaModel& model, const RunConfig& config, const std::filesystem::path& prefix) {
  save_checkpoint(make_checkpoint(model, config), prefix);
}

LoadedModel load_model(const std::filesystem::path& prefix) { return restore_model(load_checkpoint(prefix)); }

}  // namespace gaca
