#include "molpack/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <utility>

#include <json.hpp>

#include "molpack/rng.hpp"

namespace molpack {

using nlohmann::json;

RbfGrid SchnetConfig::rbf_grid() const {
  RbfGrid grid;
  grid.size = n_rbf;
  grid.spacing = rbf_spacing > 0.0 ? rbf_spacing : r_cut / n_rbf;
  grid.gamma = rbf_gamma > 0.0 ? rbf_gamma : 1.0 / (2.0 * grid.spacing * grid.spacing);
  return grid;
}

void SchnetConfig::validate() const {
  if (n_species < 2) throw ConfigError("n_species must be at least 2 (0 is the padding row)");
  if (hidden_dim < 2 || hidden_dim % 2 != 0) {
    throw ConfigError("hidden_dim must be even and at least 2, got " +
                      std::to_string(hidden_dim));
  }
  if (n_blocks < 0) throw ConfigError("n_blocks must be non-negative");
  if (n_rbf < 1) throw ConfigError("n_rbf must be positive");
  if (r_cut <= 0.0) throw ConfigError("r_cut must be positive");
  if (rbf_spacing < 0.0 || rbf_gamma < 0.0) {
    throw ConfigError("rbf_spacing and rbf_gamma must be positive (or 0 to derive them)");
  }
  if (rbf_spacing > 0.0) {
    // The grid must tile [0, r_cut): n_rbf and the spacing have to agree.
    const double implied = r_cut / rbf_spacing;
    if (std::llround(implied) != n_rbf) {
      throw ConfigError("rbf_spacing " + std::to_string(rbf_spacing) + " implies " +
                        std::to_string(implied) + " basis functions, config says " +
                        std::to_string(n_rbf));
    }
  }
  if (softplus_beta <= 0.0 || softplus_tau <= 0.0) {
    throw ConfigError("softplus_beta and softplus_tau must be positive");
  }
}

namespace {

struct TensorRef {
  std::string name;
  Matrix<float>* matrix = nullptr;     // exactly one of matrix/vector is set
  std::vector<float>* vector = nullptr;
  std::size_t rows = 0, cols = 0;      // declared shape
};

// The canonical tensor enumeration: initialization draws, the blob layout and
// the sidecar listing all follow this order.
std::vector<TensorRef> enumerate_tensors(ModelParams& p) {
  std::vector<TensorRef> refs;
  const auto f = static_cast<std::size_t>(p.config.hidden_dim);
  const auto half = f / 2;
  const auto rbf = static_cast<std::size_t>(p.config.n_rbf);
  refs.push_back({"embedding", &p.embedding, nullptr,
                  static_cast<std::size_t>(p.config.n_species), f});
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const std::string prefix = "block" + std::to_string(b) + ".";
    BlockParams& blk = p.blocks[b];
    refs.push_back({prefix + "filter1.weight", &blk.filter1.weight, nullptr, rbf, f});
    refs.push_back({prefix + "filter1.bias", nullptr, &blk.filter1.bias, 1, f});
    refs.push_back({prefix + "filter2.weight", &blk.filter2.weight, nullptr, f, f});
    refs.push_back({prefix + "filter2.bias", nullptr, &blk.filter2.bias, 1, f});
    refs.push_back({prefix + "pre.weight", &blk.pre.weight, nullptr, f, f});
    refs.push_back({prefix + "post1.weight", &blk.post1.weight, nullptr, f, f});
    refs.push_back({prefix + "post1.bias", nullptr, &blk.post1.bias, 1, f});
    refs.push_back({prefix + "post2.weight", &blk.post2.weight, nullptr, f, f});
    refs.push_back({prefix + "post2.bias", nullptr, &blk.post2.bias, 1, f});
  }
  refs.push_back({"readout1.weight", &p.readout1.weight, nullptr, f, half});
  refs.push_back({"readout1.bias", nullptr, &p.readout1.bias, 1, half});
  refs.push_back({"readout2.weight", &p.readout2.weight, nullptr, half, 1});
  refs.push_back({"readout2.bias", nullptr, &p.readout2.bias, 1, 1});
  return refs;
}

void fill_uniform(UniformRng& rng, float* data, std::size_t count, double bound) {
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = static_cast<float>(rng.range(-bound, bound));
  }
}

}  // namespace

ModelParams random_model(const SchnetConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams p;
  p.config = config;
  p.blocks.resize(static_cast<std::size_t>(config.n_blocks));
  UniformRng rng(seed);
  // Weights and their biases draw from uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  // Every bias directly follows its weight in the enumeration, so the running
  // fan is always the right one.
  double fan_in = 1.0;
  for (TensorRef& ref : enumerate_tensors(p)) {
    if (ref.matrix) {
      fan_in = static_cast<double>(ref.rows);
      *ref.matrix = Matrix<float>(ref.rows, ref.cols);
      fill_uniform(rng, ref.matrix->data(), ref.rows * ref.cols, 1.0 / std::sqrt(fan_in));
    } else {
      ref.vector->assign(ref.cols, 0.0f);
      fill_uniform(rng, ref.vector->data(), ref.cols, 1.0 / std::sqrt(fan_in));
    }
  }
  // Species 0 marks padding slots; its embedding must stay zero so padding
  // nodes carry no signal.
  for (std::size_t c = 0; c < p.embedding.cols(); ++c) p.embedding(0, c) = 0.0f;
  return p;
}

void save_model(const ModelParams& params, const std::filesystem::path& blob_path,
                const std::filesystem::path& sidecar_path) {
  params.config.validate();
  for (const auto& p : {blob_path, sidecar_path}) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  }
  auto& mutable_params = const_cast<ModelParams&>(params);
  std::vector<TensorRef> refs = enumerate_tensors(mutable_params);

  json tensors = json::array();
  std::vector<float> blob;
  for (const TensorRef& ref : refs) {
    const float* data = ref.matrix ? ref.matrix->data() : ref.vector->data();
    const std::size_t count =
        ref.matrix ? ref.matrix->size() : ref.vector->size();
    if (count != ref.rows * ref.cols) {
      throw ConsistencyError("tensor '" + ref.name + "' has " + std::to_string(count) +
                             " values, expected " + std::to_string(ref.rows * ref.cols));
    }
    tensors.push_back({{"name", ref.name},
                       {"shape", {ref.rows, ref.cols}},
                       {"offset", blob.size()}});
    blob.insert(blob.end(), data, data + count);
  }

  const RbfGrid grid = params.config.rbf_grid();
  json sidecar = {
      {"format", "molpack-model-v1"},
      {"dtype", "f32"},
      {"hyperparams",
       {{"n_species", params.config.n_species},
        {"hidden_dim", params.config.hidden_dim},
        {"n_blocks", params.config.n_blocks},
        {"n_rbf", params.config.n_rbf},
        {"r_cut", params.config.r_cut},
        {"rbf_spacing", grid.spacing},
        {"rbf_gamma", grid.gamma},
        {"softplus_beta", params.config.softplus_beta},
        {"softplus_tau", params.config.softplus_tau}}},
      {"tensors", tensors},
  };

  std::ofstream side(sidecar_path, std::ios::trunc);
  if (!side) throw Error("cannot open '" + sidecar_path.string() + "' for writing");
  side << sidecar.dump(2) << '\n';

  std::ofstream out(blob_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + blob_path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size() * sizeof(float)));
  if (!out) throw Error("short write to '" + blob_path.string() + "'");
}

ModelParams load_model(const std::filesystem::path& blob_path,
                       const std::filesystem::path& sidecar_path) {
  std::ifstream side(sidecar_path);
  if (!side) throw NotFoundError("no model sidecar at '" + sidecar_path.string() + "'");
  json sidecar;
  try {
    side >> sidecar;
  } catch (const json::exception& e) {
    throw ParseError("model sidecar '" + sidecar_path.string() + "': " + e.what());
  }
  if (sidecar.value("format", "") != "molpack-model-v1") {
    throw ParseError("model sidecar '" + sidecar_path.string() + "' has an unknown format");
  }

  ModelParams p;
  try {
    const json& hp = sidecar.at("hyperparams");
    p.config.n_species = hp.at("n_species").get<int>();
    p.config.hidden_dim = hp.at("hidden_dim").get<int>();
    p.config.n_blocks = hp.at("n_blocks").get<int>();
    p.config.n_rbf = hp.at("n_rbf").get<int>();
    p.config.r_cut = hp.at("r_cut").get<double>();
    p.config.rbf_spacing = hp.at("rbf_spacing").get<double>();
    p.config.rbf_gamma = hp.at("rbf_gamma").get<double>();
    p.config.softplus_beta = hp.at("softplus_beta").get<double>();
    p.config.softplus_tau = hp.at("softplus_tau").get<double>();
  } catch (const json::exception& e) {
    throw ParseError("model sidecar '" + sidecar_path.string() + "': " + e.what());
  }
  p.config.validate();
  p.blocks.resize(static_cast<std::size_t>(p.config.n_blocks));

  std::ifstream in(blob_path, std::ios::binary | std::ios::ate);
  if (!in) throw NotFoundError("no model blob at '" + blob_path.string() + "'");
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  if (bytes % sizeof(float) != 0) {
    throw IntegrityError("model blob '" + blob_path.string() + "' is not a whole number of f32");
  }
  std::vector<float> blob(bytes / sizeof(float));
  in.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw Error("short read from '" + blob_path.string() + "'");

  const json& tensors = sidecar.at("tensors");
  std::vector<TensorRef> refs = enumerate_tensors(p);
  if (tensors.size() != refs.size()) {
    throw ConsistencyError("model sidecar lists " + std::to_string(tensors.size()) +
                           " tensors, the hyperparameters imply " +
                           std::to_string(refs.size()));
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const json& t = tensors[i];
    const auto name = t.at("name").get<std::string>();
    if (name != refs[i].name) {
      throw ConsistencyError("model sidecar tensor " + std::to_string(i) + " is '" + name +
                             "', expected '" + refs[i].name + "'");
    }
    const auto rows = t.at("shape").at(0).get<std::size_t>();
    const auto cols = t.at("shape").at(1).get<std::size_t>();
    const auto offset = t.at("offset").get<std::size_t>();
    if (rows != refs[i].rows || cols != refs[i].cols) {
      throw ConsistencyError("model tensor '" + name + "' has shape " + std::to_string(rows) +
                             "x" + std::to_string(cols) + ", expected " +
                             std::to_string(refs[i].rows) + "x" +
                             std::to_string(refs[i].cols));
    }
    const std::size_t count = rows * cols;
    if (offset + count > blob.size()) {
      throw IntegrityError("model tensor '" + name + "' overruns the blob");
    }
    if (refs[i].matrix) {
      *refs[i].matrix = Matrix<float>(rows, cols);
      std::memcpy(refs[i].matrix->data(), blob.data() + offset, count * sizeof(float));
    } else {
      refs[i].vector->assign(blob.begin() + static_cast<std::ptrdiff_t>(offset),
                             blob.begin() + static_cast<std::ptrdiff_t>(offset + count));
    }
  }
  return p;
}

}  // namespace molpack
