#include "wslab/nn/mlp.hpp"

namespace wslab::nn {

Mlp::Mlp(const MlpSpec& spec, Rng& rng) {
  if (spec.input_dim <= 0 || spec.output_dim <= 0) throw InvalidInput("mlp: dimensions must be positive");
  Index width = spec.input_dim;
  for (const Index h : spec.hidden) {
    layers_.push_back(std::make_unique<Dense>(width, h, rng));
    if (spec.batchnorm) layers_.push_back(std::make_unique<BatchNorm>(h));
    layers_.push_back(std::make_unique<Relu>(h));
    if (spec.dropout > 0.0) layers_.push_back(std::make_unique<Dropout>(h, spec.dropout));
    width = h;
  }
  layers_.push_back(std::make_unique<Dense>(width, spec.output_dim, rng));
}

Mlp::Mlp(std::vector<std::unique_ptr<Layer>> layers) : layers_(std::move(layers)) {
  validate_chain();
}

Mlp::Mlp(const Mlp& other) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Mlp& Mlp::operator=(const Mlp& other) {
  if (this != &other) {
    Mlp copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Mlp::validate_chain() const {
  if (layers_.empty()) throw InvalidInput("mlp: needs at least one layer");
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i - 1]->spec().out != layers_[i]->spec().in) {
      throw InvalidInput("mlp: layer " + std::to_string(i) + " expects width " +
                         std::to_string(layers_[i]->spec().in) + " but previous layer emits " +
                         std::to_string(layers_[i - 1]->spec().out));
    }
  }
}

Matrix Mlp::forward(const Matrix& input, Mode mode, Rng& rng) {
  Matrix h = input;
  for (auto& l : layers_) h = l->forward(h, mode, rng);
  return h;
}

Matrix Mlp::predict(const Matrix& input) {
  Rng unused(0);
  return forward(input, Mode::Eval, unused);
}

Matrix Mlp::backward(const Matrix& grad_output) {
  Matrix g = grad_output;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

void Mlp::zero_grad() {
  for (Parameter* p : parameters()) p->grad.setZero();
}

std::vector<Parameter*> Mlp::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_)
    for (Parameter* p : l->parameters()) out.push_back(p);
  return out;
}

std::vector<Matrix*> Mlp::buffers() {
  std::vector<Matrix*> out;
  for (auto& l : layers_)
    for (Matrix* b : l->buffers()) out.push_back(b);
  return out;
}

Index Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front()->spec().in; }
Index Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back()->spec().out; }

std::vector<double> Mlp::state() const {
  std::vector<double> flat;
  for (const auto& l : layers_) {
    for (Parameter* p : l->parameters()) flat.insert(flat.end(), p->value.data(), p->value.data() + p->value.size());
    for (Matrix* b : l->buffers()) flat.insert(flat.end(), b->data(), b->data() + b->size());
  }
  return flat;
}

void Mlp::load_state(const std::vector<double>& flat) {
  std::size_t offset = 0;
  auto take = [&](Matrix& m) {
    const auto count = static_cast<std::size_t>(m.size());
    if (offset + count > flat.size()) throw InvalidInput("mlp: state vector too short");
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(offset),
              flat.begin() + static_cast<std::ptrdiff_t>(offset + count), m.data());
    offset += count;
  };
  for (auto& l : layers_) {
    for (Parameter* p : l->parameters()) take(p->value);
    for (Matrix* b : l->buffers()) take(*b);
  }
  if (offset != flat.size()) throw InvalidInput("mlp: state vector too long");
}

nlohmann::json to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    const LayerSpec s = net.layer(i).spec();
    layers.push_back({{"kind", to_string(s.kind)}, {"in", s.in}, {"out", s.out}, {"rate", s.rate}});
  }
  return {{"layers", layers}, {"state", net.state()}};
}

Mlp mlp_from_json(const nlohmann::json& doc) {
  std::vector<std::unique_ptr<Layer>> layers;
  for (const auto& item : doc.at("layers")) {
    const LayerKind kind = layer_kind_from_string(item.at("kind").get<std::string>());
    const auto in = item.at("in").get<Index>();
    const auto out = item.at("out").get<Index>();
    switch (kind) {
      case LayerKind::Dense: layers.push_back(std::make_unique<Dense>(in, out)); break;
      case LayerKind::Relu: layers.push_back(std::make_unique<Relu>(in)); break;
      case LayerKind::BatchNorm: layers.push_back(std::make_unique<BatchNorm>(in)); break;
      case LayerKind::Dropout:
        layers.push_back(std::make_unique<Dropout>(in, item.at("rate").get<double>()));
        break;
    }
  }
  Mlp net(std::move(layers));
  net.load_state(doc.at("state").get<std::vector<double>>());
  return net;
}

}  // namespace wslab::nn
