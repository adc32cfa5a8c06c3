#pragma once

// Feed-forward ReLU networks: definition, validation, loading and evaluation.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyex/errors.hpp"

namespace polyex {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  double width() const { return hi - lo; }
};

using Box = std::vector<Interval>;

enum class OutputActivation { kIdentity, kSoftmax };

inline std::string to_string(OutputActivation a) {
  return a == OutputActivation::kIdentity ? "identity" : "softmax";
}

struct Layer {
  Matrix weights;  // n_out x n_in
  Vector bias;     // n_out

  std::size_t in_width() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t out_width() const { return static_cast<std::size_t>(weights.rows()); }
};

/// Per-layer ReLU on/off pattern. Stored flat (layer-major, neuron order
/// within a layer) together with the layer widths.
class ActivationSignature {
 public:
  ActivationSignature() = default;
  ActivationSignature(std::vector<std::size_t> widths, std::vector<std::uint8_t> bits)
      : widths_(std::move(widths)), bits_(std::move(bits)) {
    std::size_t total = 0;
    for (auto w : widths_) total += w;
    if (total != bits_.size()) {
      throw ShapeError("signature has " + std::to_string(bits_.size()) +
                       " bits but layer widths sum to " + std::to_string(total));
    }
    for (auto b : bits_) {
      if (b > 1) throw ShapeError("signature bits must be 0 or 1");
    }
  }

  /// All-zero signature with the given layer widths.
  static ActivationSignature zeros(std::vector<std::size_t> widths) {
    std::size_t total = 0;
    for (auto w : widths) total += w;
    return ActivationSignature(std::move(widths), std::vector<std::uint8_t>(total, 0));
  }

  std::size_t size() const { return bits_.size(); }
  std::size_t num_layers() const { return widths_.size(); }
  const std::vector<std::size_t>& widths() const { return widths_; }
  std::span<const std::uint8_t> flat() const { return bits_; }

  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }

  /// Offset of layer `layer` in the flat view.
  std::size_t layer_offset(std::size_t layer) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < layer; ++k) off += widths_[k];
    return off;
  }

  std::span<const std::uint8_t> layer(std::size_t layer) const {
    return std::span<const std::uint8_t>(bits_).subspan(layer_offset(layer), widths_[layer]);
  }

  /// Maps a flat position to (layer, neuron).
  std::pair<std::size_t, std::size_t> locate(std::size_t flat_index) const {
    std::size_t layer = 0;
    while (flat_index >= widths_[layer]) {
      flat_index -= widths_[layer];
      ++layer;
    }
    return {layer, flat_index};
  }

  ActivationSignature flipped(std::span<const std::size_t> positions) const {
    ActivationSignature out = *this;
    for (auto p : positions) out.bits_[p] ^= 1u;
    return out;
  }

  std::size_t hamming(const ActivationSignature& other) const {
    std::size_t d = 0;
    for (std::size_t i = 0; i < bits_.size(); ++i) d += bits_[i] != other.bits_[i];
    return d;
  }

  std::string str() const {
    std::string s;
    s.reserve(bits_.size() + widths_.size());
    std::size_t k = 0;
    for (std::size_t l = 0; l < widths_.size(); ++l) {
      if (l > 0) s.push_back('|');
      for (std::size_t j = 0; j < widths_[l]; ++j) s.push_back(bits_[k++] ? '1' : '0');
    }
    return s;
  }

  friend bool operator==(const ActivationSignature&, const ActivationSignature&) = default;
  friend auto operator<=>(const ActivationSignature& a, const ActivationSignature& b) {
    return a.bits_ <=> b.bits_;
  }

 private:
  std::vector<std::size_t> widths_;
  std::vector<std::uint8_t> bits_;
};

/// A fully connected network with ReLU hidden layers. The last layer is the
/// output layer; its post-map is `output_activation`, which must preserve
/// argmax, so decisions are taken on the raw logits.
class Network {
 public:
  Network() = default;
  Network(std::vector<Layer> layers, OutputActivation output_activation, Box input_bounds,
          std::vector<std::string> class_names = {})
      : layers_(std::move(layers)),
        output_activation_(output_activation),
        input_bounds_(std::move(input_bounds)),
        class_names_(std::move(class_names)) {
    validate();
  }

  const std::vector<Layer>& layers() const { return layers_; }
  OutputActivation output_activation() const { return output_activation_; }
  const Box& input_bounds() const { return input_bounds_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

  std::size_t input_dim() const { return layers_.front().in_width(); }
  std::size_t num_hidden_layers() const { return layers_.size() - 1; }
  std::size_t num_classes() const { return layers_.back().out_width(); }

  std::vector<std::size_t> hidden_widths() const {
    std::vector<std::size_t> w;
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) w.push_back(layers_[i].out_width());
    return w;
  }

  std::size_t total_hidden_neurons() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) n += layers_[i].out_width();
    return n;
  }

  std::vector<std::size_t> layer_widths() const {
    std::vector<std::size_t> w{input_dim()};
    for (const auto& l : layers_) w.push_back(l.out_width());
    return w;
  }

  std::optional<std::string> class_name(std::size_t c) const {
    if (c < class_names_.size()) return class_names_[c];
    return std::nullopt;
  }

  bool inside_bounds(const Vector& x) const {
    for (std::size_t d = 0; d < input_bounds_.size(); ++d) {
      if (!input_bounds_[d].contains(x[static_cast<Eigen::Index>(d)])) return false;
    }
    return true;
  }

  void check_class(std::size_t c) const {
    if (c >= num_classes()) {
      throw InvalidClassError("class index " + std::to_string(c) + " out of range [0, " +
                              std::to_string(num_classes()) + ")");
    }
  }

  void check_signature(const ActivationSignature& s) const {
    if (s.widths() != hidden_widths()) throw ShapeError("signature shape does not match network");
  }

 private:
  void validate() const {
    if (layers_.size() < 2) {
      throw ShapeError("network needs at least one hidden layer and an output layer");
    }
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      const auto& l = layers_[k];
      if (l.weights.rows() == 0 || l.weights.cols() == 0) {
        throw ShapeError("layer " + std::to_string(k) + " has an empty weight matrix");
      }
      if (l.bias.size() != l.weights.rows()) {
        throw ShapeError("layer " + std::to_string(k) + " bias length " +
                         std::to_string(l.bias.size()) + " != output width " +
                         std::to_string(l.weights.rows()));
      }
      if (k > 0 && l.in_width() != layers_[k - 1].out_width()) {
        throw ShapeError("layer " + std::to_string(k) + " expects " + std::to_string(l.in_width()) +
                         " inputs but layer " + std::to_string(k - 1) + " produces " +
                         std::to_string(layers_[k - 1].out_width()));
      }
      if (!l.weights.allFinite() || !l.bias.allFinite()) {
        throw ParseError("layer " + std::to_string(k) + " contains non-finite values");
      }
    }
    if (input_bounds_.size() != input_dim()) {
      throw ShapeError("input_bounds has " + std::to_string(input_bounds_.size()) +
                       " entries but input_dim is " + std::to_string(input_dim()));
    }
    for (std::size_t d = 0; d < input_bounds_.size(); ++d) {
      const auto& b = input_bounds_[d];
      if (!(b.lo < b.hi)) {
        throw DomainError("input bound " + std::to_string(d) + " is degenerate: [" +
                          std::to_string(b.lo) + ", " + std::to_string(b.hi) + "]");
      }
    }
    if (!class_names_.empty() && class_names_.size() != num_classes()) {
      throw ShapeError("class_names has " + std::to_string(class_names_.size()) +
                       " entries but the output layer has " + std::to_string(num_classes()));
    }
  }

  std::vector<Layer> layers_;
  OutputActivation output_activation_ = OutputActivation::kIdentity;
  Box input_bounds_;
  std::vector<std::string> class_names_;
};

// ---------------------------------------------------------------------------
// Model file format.

inline Network network_from_json(const nlohmann::json& doc) {
  using nlohmann::json;
  try {
    if (!doc.is_object()) throw ParseError("model document must be an object");
    if (!doc.contains("layers") || !doc.at("layers").is_array()) {
      throw ParseError("model document needs a `layers` array");
    }
    std::vector<Layer> layers;
    for (const auto& jl : doc.at("layers")) {
      const auto& jw = jl.at("weights");
      const auto& jb = jl.at("bias");
      if (!jw.is_array() || jw.empty() || !jw.front().is_array()) {
        throw ParseError("`weights` must be a non-empty array of rows");
      }
      const auto rows = static_cast<Eigen::Index>(jw.size());
      const auto cols = static_cast<Eigen::Index>(jw.front().size());
      Layer layer{Matrix(rows, cols), Vector(static_cast<Eigen::Index>(jb.size()))};
      for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = jw.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
          throw ShapeError("ragged weight matrix");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
          layer.weights(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
      }
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
        layer.bias[i] = jb.at(static_cast<std::size_t>(i)).get<double>();
      }
      layers.push_back(std::move(layer));
    }

    OutputActivation act = OutputActivation::kIdentity;
    const std::string tag = doc.value("output_activation", std::string("identity"));
    if (tag == "identity") {
      act = OutputActivation::kIdentity;
    } else if (tag == "softmax") {
      act = OutputActivation::kSoftmax;
    } else {
      throw UnsupportedError("unsupported output_activation `" + tag + "`");
    }

    if (!doc.contains("input_bounds")) throw ParseError("model document needs `input_bounds`");
    Box bounds;
    for (const auto& jb : doc.at("input_bounds")) {
      if (!jb.is_array() || jb.size() != 2) throw ParseError("each input bound must be [lo, hi]");
      bounds.push_back({jb.at(0).get<double>(), jb.at(1).get<double>()});
    }

    std::vector<std::string> names;
    if (doc.contains("class_names")) names = doc.at("class_names").get<std::vector<std::string>>();

    return Network(std::move(layers), act, std::move(bounds), std::move(names));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  }
}

inline nlohmann::json network_to_json(const Network& net) {
  nlohmann::json doc;
  doc["layers"] = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    nlohmann::json jl;
    jl["weights"] = nlohmann::json::array();
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) row.push_back(l.weights(r, c));
      jl["weights"].push_back(row);
    }
    jl["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
    doc["layers"].push_back(jl);
  }
  doc["output_activation"] = to_string(net.output_activation());
  doc["input_bounds"] = nlohmann::json::array();
  for (const auto& b : net.input_bounds()) doc["input_bounds"].push_back({b.lo, b.hi});
  if (!net.class_names().empty()) doc["class_names"] = net.class_names();
  return doc;
}

inline Network parse_network(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model is not valid JSON: ") + e.what());
  }
  return network_from_json(doc);
}

inline Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file `" + path + "`");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str());
}

// ---------------------------------------------------------------------------
// Evaluation.

/// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax_class(const Vector& logits) {
  if (logits.size() == 0) throw DimensionError("argmax of an empty vector");
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

inline Vector softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp();
  return e / e.sum();
}

struct ForwardResult {
  Vector logits;
  std::size_t class_index = 0;
  ActivationSignature signature;
  bool inside_bounds = true;
  /// Some hidden pre-activation is exactly zero.
  bool on_boundary = false;
};

inline void check_input(const Network& net, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != net.input_dim()) {
    throw DimensionError("input has " + std::to_string(x.size()) + " coordinates, model expects " +
                         std::to_string(net.input_dim()));
  }
}

inline ForwardResult forward(const Network& net, const Vector& x) {
  check_input(net, x);
  ForwardResult out;
  std::vector<std::uint8_t> bits;
  bits.reserve(net.total_hidden_neurons());
  Vector h = x;
  const auto& layers = net.layers();
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
    Vector pre = layers[k].weights * h + layers[k].bias;
    for (Eigen::Index j = 0; j < pre.size(); ++j) {
      const bool active = pre[j] > 0.0;
      bits.push_back(active ? 1 : 0);
      if (pre[j] == 0.0) out.on_boundary = true;
      if (!active) pre[j] = 0.0;
    }
    h = std::move(pre);
  }
  out.logits = layers.back().weights * h + layers.back().bias;
  out.class_index = argmax_class(out.logits);
  out.signature = ActivationSignature(net.hidden_widths(), std::move(bits));
  out.inside_bounds = net.inside_bounds(x);
  return out;
}

}  // namespace polyex
