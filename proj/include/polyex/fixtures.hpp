#pragma once

// Built-in networks and a seeded generator for random ones.

#include <cstdint>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "polyex/errors.hpp"
#include "polyex/model.hpp"

namespace polyex::fixtures {

/// Two inputs, two identity hidden neurons, identity output, box [-2, 2]^2.
/// Its four regions are the coordinate quadrants.
inline Network toy_a() {
  Layer hidden{Matrix::Identity(2, 2), Vector::Zero(2)};
  Layer output{Matrix::Identity(2, 2), Vector::Zero(2)};
  return Network({hidden, output}, OutputActivation::kIdentity, {{-2.0, 2.0}, {-2.0, 2.0}});
}

/// Uniform double in [lo, hi) from the top 53 bits of a mt19937_64 draw.
/// std::mt19937_64 output is fixed by the standard, so fixtures are identical
/// on every platform.
inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

struct RandomNetworkOptions {
  double weight_scale = 1.0;
  double bias_scale = 0.5;
  double bound = 2.0;
};

/// `widths` lists every layer width: input, hidden..., output.
inline Network random_network(const std::vector<std::size_t>& widths, std::uint64_t seed,
                              const RandomNetworkOptions& opts = {}) {
  if (widths.size() < 3) throw ShapeError("need input, at least one hidden, and output widths");
  for (auto w : widths) {
    if (w == 0) throw ShapeError("layer widths must be positive");
  }
  std::mt19937_64 gen(seed);
  std::vector<Layer> layers;
  for (std::size_t k = 1; k < widths.size(); ++k) {
    const auto rows = static_cast<Eigen::Index>(widths[k]);
    const auto cols = static_cast<Eigen::Index>(widths[k - 1]);
    Layer l{Matrix(rows, cols), Vector(rows)};
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) l.weights(r, c) = uniform(gen, -opts.weight_scale, opts.weight_scale);
      l.bias[r] = uniform(gen, -opts.bias_scale, opts.bias_scale);
    }
    layers.push_back(std::move(l));
  }
  Box box(widths.front(), Interval{-opts.bound, opts.bound});
  std::vector<std::string> names;
  for (std::size_t c = 0; c < widths.back(); ++c) names.push_back("class" + std::to_string(c));
  return Network(std::move(layers), OutputActivation::kIdentity, std::move(box), std::move(names));
}

inline std::vector<std::size_t> parse_widths(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, csv.find('_') != std::string::npos ? '_' : ',')) {
    if (tok.empty()) throw ParseError("empty layer width in `" + csv + "`");
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(tok, &pos);
    } catch (const std::exception&) {
      throw ParseError("bad layer width `" + tok + "`");
    }
    if (pos != tok.size()) throw ParseError("bad layer width `" + tok + "`");
    out.push_back(v);
  }
  return out;
}

/// A model file path, or one of the built-in names `toy_a` and
/// `fixture_<w0>_<w1>_..._<wk>` (random, seeded with `seed`).
inline Network resolve_model(const std::string& name, std::uint64_t seed) {
  if (std::filesystem::exists(name)) return load_network(name);
  if (name == "toy_a") return toy_a();
  const std::string prefix = "fixture_";
  if (name.rfind(prefix, 0) == 0) return random_network(parse_widths(name.substr(prefix.size())), seed);
  throw ParseError("cannot open model file `" + name + "`");
}

}  // namespace polyex::fixtures
