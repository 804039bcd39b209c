#include "pgdetect/network.hpp"

#include <cmath>
#include <stdexcept>

#include "pgdetect/container.hpp"

namespace pgd {

using nlohmann::json;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

json layer_to_json(const Layer& layer) {
  json j{{"type", layer.kind()}};
  if (const auto* c = dynamic_cast<const Conv1d*>(&layer)) {
    j["in"] = c->in_channels();
    j["out"] = c->out_channels();
    j["kernel"] = c->kernel_size();
    j["stride"] = c->stride();
  } else if (const auto* bn = dynamic_cast<const BatchNorm1d*>(&layer)) {
    j["channels"] = bn->channels();
    j["eps"] = bn->eps();
    j["momentum"] = bn->momentum();
  } else if (const auto* a = dynamic_cast<const Activation*>(&layer)) {
    j["activation"] = to_string(a->activation());
    j["alpha"] = a->alpha();
  } else if (const auto* d = dynamic_cast<const Dense*>(&layer)) {
    j["in"] = d->in_features();
    j["out"] = d->out_features();
  } else if (const auto* dr = dynamic_cast<const Dropout*>(&layer)) {
    j["rate"] = dr->rate();
    j["rng_state"] = dr->rng().state();
    j["rng_seed"] = dr->rng().seed();
  }
  return j;
}

std::unique_ptr<Layer> layer_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "conv1d") {
    return std::make_unique<Conv1d>(j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>(),
                                    j.at("kernel").get<std::size_t>(),
                                    j.at("stride").get<std::size_t>());
  }
  if (type == "batchnorm1d") {
    return std::make_unique<BatchNorm1d>(j.at("channels").get<std::size_t>(),
                                         j.at("eps").get<double>(), j.at("momentum").get<double>());
  }
  if (type == "activation") {
    return std::make_unique<Activation>(activation_from_string(j.at("activation")),
                                        j.at("alpha").get<double>());
  }
  if (type == "flatten") return std::make_unique<Flatten>();
  if (type == "dense") {
    return std::make_unique<Dense>(j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>());
  }
  if (type == "dropout") {
    auto d = std::make_unique<Dropout>(j.at("rate").get<double>(),
                                       j.at("rng_seed").get<std::uint64_t>());
    d->rng().set_state(j.at("rng_state").get<std::array<std::uint64_t, 4>>());
    return d;
  }
  throw ContainerError("unknown layer type '" + type + "' in model file");
}

json arch_to_json(const Architecture& a) {
  return json{{"kind", a.kind},
              {"input_length", a.input_length},
              {"activation", to_string(a.activation)},
              {"leaky_alpha", a.leaky_alpha},
              {"dropout_rate", a.dropout_rate},
              {"hidden_units", a.hidden_units}};
}

Architecture arch_from_json(const json& j) {
  Architecture a;
  a.kind = j.at("kind").get<std::string>();
  a.input_length = j.at("input_length").get<std::size_t>();
  a.activation = activation_from_string(j.at("activation"));
  a.leaky_alpha = j.at("leaky_alpha").get<double>();
  a.dropout_rate = j.at("dropout_rate").get<double>();
  a.hidden_units = j.at("hidden_units").get<std::size_t>();
  return a;
}

}  // namespace

std::size_t pgn4_flatten_width(std::size_t input_length) {
  std::size_t len = input_length;
  for (const auto& block : kPgn4Blocks) len = same_output_length(len, block.stride);
  return kPgn4Blocks[3].channels * len;
}

Network::Network(Architecture arch, std::vector<std::unique_ptr<Layer>> layers)
    : arch_(std::move(arch)), layers_(std::move(layers)) {}

Network::Network(const Network& other) : arch_(other.arch_), mode_(other.mode_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

std::vector<double> Network::forward_logits(const Tensor3& x) {
  if (x.channels() != 1 || x.length() != arch_.input_length) {
    throw std::invalid_argument("Network: input " + x.shape_string() + " does not match (B x 1 x " +
                                std::to_string(arch_.input_length) + ")");
  }
  Tensor3 h = x;
  for (auto& layer : layers_) h = layer->forward(h, mode_);
  if (h.channels() != 1 || h.length() != 1) {
    throw std::logic_error("Network: final layer must emit one logit per sample, got " +
                           h.shape_string());
  }
  std::vector<double> logits(h.data().begin(), h.data().end());
  cached_logits_ = logits;
  return logits;
}

std::vector<double> Network::forward(const Tensor3& x) {
  auto p = forward_logits(x);
  for (double& v : p) v = sigmoid(v);
  return p;
}

std::vector<double> Network::predict(const Tensor3& x) {
  const Mode saved = mode_;
  mode_ = Mode::Inference;
  auto p = forward(x);
  mode_ = saved;
  return p;
}

double Network::backward(const std::vector<int>& labels) {
  if (!cached_logits_) throw std::logic_error("Network::backward called without a cached forward");
  const auto& z = *cached_logits_;
  if (labels.size() != z.size()) {
    throw std::invalid_argument("Network::backward: " + std::to_string(labels.size()) +
                                " labels for batch of " + std::to_string(z.size()));
  }
  const double n = static_cast<double>(z.size());
  Tensor3 grad(z.size(), 1, 1);
  double loss = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    // BCE through the sigmoid: d/dz = p - y.
    loss += softplus(z[i]) - labels[i] * z[i];
    grad(i, 0, 0) = (sigmoid(z[i]) - labels[i]) / n;
  }
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) grad = (*it)->backward(grad);
  return loss / n;
}

double Network::loss(const Tensor3& x, const std::vector<int>& labels) {
  const auto z = forward_logits(x);
  if (labels.size() != z.size()) throw std::invalid_argument("Network::loss: label count mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) loss += softplus(z[i]) - labels[i] * z[i];
  return loss / static_cast<double>(z.size());
}

std::vector<Param*> Network::params() {
  std::vector<Param*> out;
  for (auto& l : layers_)
    for (auto* p : l->params()) out.push_back(p);
  return out;
}

std::vector<Buffer*> Network::buffers() {
  std::vector<Buffer*> out;
  for (auto& l : layers_)
    for (auto* b : l->buffers()) out.push_back(b);
  return out;
}

std::size_t Network::parameter_count() {
  std::size_t n = 0;
  for (auto* p : params()) n += p->size();
  return n;
}

Container Network::to_container() const {
  Network& self = const_cast<Network&>(*this);
  Container c;
  c.header["method"] = arch_.kind == "mlp" ? "nn" : arch_.kind;
  c.header["architecture"] = arch_to_json(arch_);
  json layers = json::array();
  for (const auto& l : layers_) layers.push_back(layer_to_json(*l));
  c.header["layers"] = layers;
  json tensors = json::array();
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    for (auto* p : self.layers_[li]->params()) {
      tensors.push_back({{"layer", li}, {"name", p->name}, {"size", p->size()}});
      c.payload.insert(c.payload.end(), p->value.begin(), p->value.end());
    }
    for (auto* b : self.layers_[li]->buffers()) {
      tensors.push_back({{"layer", li}, {"name", b->name}, {"size", b->value.size()}});
      c.payload.insert(c.payload.end(), b->value.begin(), b->value.end());
    }
  }
  c.header["tensors"] = tensors;
  return c;
}

void Network::save(const std::filesystem::path& path) const { save_container(to_container(), path); }

Network Network::load(const std::filesystem::path& path) { return from_container(load_container(path)); }

Network Network::from_container(const Container& c) {
  try {
    std::vector<std::unique_ptr<Layer>> layers;
    for (const auto& lj : c.header.at("layers")) layers.push_back(layer_from_json(lj));
    Network net(arch_from_json(c.header.at("architecture")), std::move(layers));
    std::size_t offset = 0;
    auto fill = [&](std::vector<double>& dst) {
      if (offset + dst.size() > c.payload.size()) throw ContainerError("model payload too short");
      std::copy_n(c.payload.begin() + static_cast<std::ptrdiff_t>(offset), dst.size(), dst.begin());
      offset += dst.size();
    };
    for (auto& l : net.layers_) {
      for (auto* p : l->params()) fill(p->value);
      for (auto* b : l->buffers()) fill(b->value);
    }
    if (offset != c.payload.size()) throw ContainerError("model payload has unexpected length");
    net.mode_ = Mode::Inference;
    return net;
  } catch (const json::exception& e) {
    throw ContainerError(std::string("model header is malformed: ") + e.what());
  }
}

Network build_network(const Architecture& arch, Rng& rng) {
  if (arch.kind == "pgn4") return pgn4_init(arch, rng);
  if (arch.kind == "mlp") {
    return mlp_init(arch.input_length, rng, arch.hidden_units, arch.activation);
  }
  throw std::invalid_argument("build_network: unknown architecture kind '" + arch.kind + "'");
}

Network pgn4_init(const Architecture& arch, Rng& rng) {
  if (arch.input_length < 4) {
    throw std::invalid_argument("pgn4_init: input_length must be >= 4 (got " +
                                std::to_string(arch.input_length) + ")");
  }
  std::vector<std::unique_ptr<Layer>> layers;
  std::size_t in_channels = 1;
  for (const auto& block : kPgn4Blocks) {
    auto conv = std::make_unique<Conv1d>(in_channels, block.channels, kPgn4Kernel, block.stride);
    he_init(conv->weight, in_channels * kPgn4Kernel, rng);
    layers.push_back(std::move(conv));
    layers.push_back(std::make_unique<BatchNorm1d>(block.channels));
    layers.push_back(std::make_unique<Activation>(arch.activation, arch.leaky_alpha));
    in_channels = block.channels;
  }
  layers.push_back(std::make_unique<Flatten>());
  const std::size_t width = pgn4_flatten_width(arch.input_length);
  auto dense = std::make_unique<Dense>(width, kPgn4DenseUnits);
  he_init(dense->weight, width, rng);
  layers.push_back(std::move(dense));
  layers.push_back(std::make_unique<Activation>(arch.activation, arch.leaky_alpha));
  if (arch.dropout_rate > 0.0) {
    layers.push_back(std::make_unique<Dropout>(arch.dropout_rate, rng.next_u64()));
  }
  auto head = std::make_unique<Dense>(kPgn4DenseUnits, 1);
  he_init(head->weight, kPgn4DenseUnits, rng);
  layers.push_back(std::move(head));
  Architecture a = arch;
  a.kind = "pgn4";
  a.hidden_units = kPgn4DenseUnits;
  return Network(a, std::move(layers));
}

Network pgn4_init(std::size_t input_length, Rng& rng, ActivationKind activation,
                  double dropout_rate) {
  Architecture arch;
  arch.input_length = input_length;
  arch.activation = activation;
  arch.dropout_rate = dropout_rate;
  return pgn4_init(arch, rng);
}

Network mlp_init(std::size_t input_length, Rng& rng, std::size_t hidden_units,
                 ActivationKind activation) {
  if (input_length == 0) throw std::invalid_argument("mlp_init: input_length must be positive");
  std::vector<std::unique_ptr<Layer>> layers;
  layers.push_back(std::make_unique<Flatten>());
  auto hidden = std::make_unique<Dense>(input_length, hidden_units);
  he_init(hidden->weight, input_length, rng);
  layers.push_back(std::move(hidden));
  layers.push_back(std::make_unique<Activation>(activation));
  auto head = std::make_unique<Dense>(hidden_units, 1);
  he_init(head->weight, hidden_units, rng);
  layers.push_back(std::move(head));
  Architecture arch;
  arch.kind = "mlp";
  arch.input_length = input_length;
  arch.activation = activation;
  arch.hidden_units = hidden_units;
  return Network(arch, std::move(layers));
}

}  // namespace pgd
