#pragma once

#include "hyperrnn/config.hpp"
#include "hyperrnn/networks/networks.hpp"

#include <stdexcept>
#include <string>

// Checkpoint container, little-endian:
//   "HRNNCKPT" | u32 version (=1) | u32 variant (0 hyperrnn, 1 baseline)
//   u64 config length | config JSON (UTF-8)
//   u64 tensor count
//   per tensor: u32 name length | name | u32 ndim | ndim x u64 dims
//               | prod(dims) x f64, row-major
// Tensors appear in for_each_parameter order; loading matches by name.

namespace hyperrnn::networks {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class IncompatibleCheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  Model model;
  ExperimentConfig config;
};

void save_checkpoint(const std::string& path, const Model& model, const ExperimentConfig& cfg);
Checkpoint load_checkpoint(const std::string& path);

/// Throws IncompatibleCheckpointError when `cfg` implies different
/// parameter shapes than the checkpoint holds.
void require_compatible(const Checkpoint& ckpt, const ExperimentConfig& cfg);

}  // namespace hyperrnn::networks
