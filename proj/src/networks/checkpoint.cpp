#include "hyperrnn/networks/checkpoint.hpp"

#include "hyperrnn/binary_io.hpp"
#include "hyperrnn/numerics/tensor.hpp"

#include <fstream>
#include <map>

namespace hyperrnn::networks {

namespace {

constexpr std::string_view kMagic = "HRNNCKPT";

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, const ExperimentConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  binio::put_bytes(out, kMagic);
  binio::put_u32(out, kCheckpointVersion);
  binio::put_u32(out, model.variant == Variant::kHyperRnn ? 0u : 1u);
  const std::string json = to_json(cfg);
  binio::put_u64(out, json.size());
  binio::put_bytes(out, json);

  std::uint64_t count = 0;
  for_each_parameter(model, [&count](const std::string&, const Matrix&) { ++count; });
  binio::put_u64(out, count);
  for_each_parameter(model, [&out](const std::string& name, const Matrix& m) {
    binio::put_u32(out, static_cast<std::uint32_t>(name.size()));
    binio::put_bytes(out, name);
    binio::put_u32(out, 2);
    binio::put_u64(out, static_cast<std::uint64_t>(m.rows()));
    binio::put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) binio::put_f64(out, m(r, c));
  });
  if (!out) throw std::runtime_error("write failed for checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  binio::expect_magic(in, kMagic);
  const std::uint32_t version = binio::get_u32(in);
  if (version != kCheckpointVersion)
    throw binio::FormatError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t variant = binio::get_u32(in);
  if (variant > 1) throw binio::FormatError("unknown model variant tag");
  const std::uint64_t json_len = binio::get_u64(in);
  Checkpoint ckpt;
  ckpt.config = config_from_json(binio::get_bytes(in, json_len));

  std::map<std::string, Matrix> tensors;
  const std::uint64_t count = binio::get_u64(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = binio::get_bytes(in, binio::get_u32(in));
    const std::uint32_t ndim = binio::get_u32(in);
    std::vector<std::size_t> shape(ndim);
    for (auto& d : shape) d = binio::get_u64(in);
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    std::vector<double> data(n);
    for (auto& v : data) v = binio::get_f64(in);
    tensors.emplace(std::move(name), RealTensor(std::move(shape), std::move(data)).to_matrix());
  }

  // Build a correctly shaped model from the stored config, then overwrite.
  ckpt.model = init_model(ckpt.config, variant == 0 ? Variant::kHyperRnn : Variant::kBaseline, 0);
  for_each_parameter(ckpt.model, [&tensors](const std::string& name, Matrix& m) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw binio::FormatError("checkpoint is missing tensor " + name);
    if (it->second.rows() != m.rows() || it->second.cols() != m.cols())
      throw binio::FormatError("checkpoint tensor " + name + " has the wrong shape");
    m = std::move(it->second);
    tensors.erase(it);
  });
  if (!tensors.empty()) throw binio::FormatError("checkpoint has unexpected tensor " + tensors.begin()->first);
  return ckpt;
}

void require_compatible(const Checkpoint& ckpt, const ExperimentConfig& cfg) {
  try {
    check_shapes(ckpt.model, cfg);
  } catch (const DimensionError& e) {
    throw IncompatibleCheckpointError(std::string("checkpoint does not match config: ") + e.what());
  }
}

}  // namespace hyperrnn::networks
