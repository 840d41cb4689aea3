#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gaca/config.hpp"
#include "gaca/model.hpp"

namespace gaca {

/// Named arrays plus a key=value config echo.
///
/// On disk: `<prefix>.manifest` (UTF-8; a version line, `config key=value`
/// lines, then one `tensor <name> <shape> <byte offset>` line per array) and
/// `<prefix>.bin` (little-endian IEEE-754 doubles in manifest order).
struct Checkpoint {
  struct Record {
    std::string name;
    Shape shape;
    Array values;
  };

  std::vector<std::pair<std::string, std::string>> config;
  std::vector<Record> tensors;

  const Record& find(const std::string& name) const;
};

std::filesystem::path manifest_path(const std::filesystem::path& prefix);
std::filesystem::path blob_path(const std::filesystem::path& prefix);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& prefix);
Checkpoint load_checkpoint(const std::filesystem::path& prefix);

/// Every parameter group, the wavelet kernels and the config echo.
Checkpoint make_checkpoint(const GacaModel& model, const RunConfig& config);

struct LoadedModel {
  RunConfig config;
  GacaModel model;
};

/// Rebuilds the model described by the config echo and restores every tensor bit-exactly.
LoadedModel restore_model(const Checkpoint& ckpt);

void save_model(const GacaModel& model, const RunConfig& config, const std::filesystem::path& prefix);
LoadedModel load_model(const std::filesystem::path& prefix);

}  // namespace gaca
