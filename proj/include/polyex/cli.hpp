#pragma once

// Command-line front end. `run` is the whole program; main() only forwards
// argv and the standard streams.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polyex/errors.hpp"
#include "polyex/explain.hpp"
#include "polyex/fixtures.hpp"
#include "polyex/model.hpp"
#include "polyex/oracle.hpp"
#include "polyex/render.hpp"
#include "polyex/serialize.hpp"
#include "polyex/service.hpp"

namespace polyex::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitUnreachable = 3;

struct CliConfig {
  std::string command;
  std::string model_path;
  std::string input;
  std::optional<std::int64_t> counterfactual_class;
  bool vrep = false;
  std::string style = "hrep";
  std::string format = "text";
  std::optional<std::size_t> max_distance;
  std::uint64_t budget = kDefaultMarchBudget;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::uint64_t seed = 0;
  std::string widths;
  std::string out_path;
  std::string static_dir;
  unsigned threads = 1;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

inline Vector parse_point(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      throw UsageError("bad coordinate `" + tok + "` in --input");
    }
    if (pos != tok.size()) throw UsageError("bad coordinate `" + tok + "` in --input");
    vals.push_back(v);
  }
  if (vals.empty()) throw UsageError("--input is empty");
  return Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

namespace detail {

inline Vector input_for(const Network& net, const CliConfig& cfg, std::ostream& err) {
  if (cfg.input.empty()) throw UsageError("--input is required");
  const Vector x = parse_point(cfg.input);
  if (static_cast<std::size_t>(x.size()) != net.input_dim()) {
    throw UsageError("--input has " + std::to_string(x.size()) + " coordinates, model expects " +
                     std::to_string(net.input_dim()));
  }
  if (!net.inside_bounds(x)) err << "warning: input lies outside the model's input_bounds\n";
  return x;
}

inline int cmd_predict(const Network& net, const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const ForwardResult fr = forward(net, input_for(net, cfg, err));
  if (cfg.format == "json") {
    out << serial::predict(net, fr).dump(2) << "\n";
    return kExitOk;
  }
  out << fmt_class(fr.class_index, net.class_name(fr.class_index)) << "\n";
  out << "logits " << fmt_point(fr.logits) << "\n";
  out << "signature " << fr.signature.str() << "\n";
  if (fr.on_boundary) out << "note: boundary point (a hidden pre-activation is exactly 0)\n";
  return kExitOk;
}

inline int cmd_why(const Network& net, const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const Style style = parse_style(cfg.style);
  WhyOptions opts;
  opts.want_vrep = cfg.vrep || style == Style::kVrep;
  const auto e = explain_why(net, input_for(net, cfg, err), opts);
  if (cfg.format == "json") {
    out << serial::why(e).dump(2) << "\n";
  } else {
    out << render(e, style);
  }
  return kExitOk;
}

inline int cmd_whynot(const Network& net, const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const Style style = parse_style(cfg.style);
  if (!cfg.counterfactual_class) throw UsageError("--class is required");
  if (*cfg.counterfactual_class < 0) throw UsageError("--class must be non-negative");
  const Vector x = input_for(net, cfg, err);
  WhyNotOptions opts;
  opts.want_vrep = cfg.vrep || style == Style::kVrep;
  opts.march.budget = cfg.budget;
  opts.march.max_distance = cfg.max_distance;
  opts.march.threads = cfg.threads;
  const auto e = explain_why_not(net, x, static_cast<std::size_t>(*cfg.counterfactual_class), opts);
  if (cfg.format == "json") {
    out << serial::why_not(e).dump(2) << "\n";
  } else {
    out << render(e, style);
  }
  return std::holds_alternative<ClassUnreachable>(e.outcome) ? kExitUnreachable : kExitOk;
}

inline int cmd_decompose(const Network& net, const CliConfig& cfg, std::ostream& out) {
  const auto d = oracle::full_decompose(net, cfg.threads);
  if (cfg.format == "json") {
    out << serial::decomposition(d).dump(2) << "\n";
    return kExitOk;
  }
  out << "feasible regions: " << d.regions.size() << " of " << d.examined << " signatures\n";
  for (const auto& r : d.regions) {
    const auto cls = forward(net, r.witness).class_index;
    out << "  " << r.signature.str() << "  witness " << fmt_point(r.witness) << "  class " << cls << "\n";
  }
  return kExitOk;
}

inline int cmd_genfixture(const CliConfig& cfg, std::ostream& out) {
  if (cfg.widths.empty()) throw UsageError("--widths is required");
  const Network net = fixtures::random_network(fixtures::parse_widths(cfg.widths), cfg.seed);
  const std::string text = network_to_json(net).dump(2) + "\n";
  if (cfg.out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(cfg.out_path);
    if (!f) throw ParseError("cannot write `" + cfg.out_path + "`");
    f << text;
  }
  return kExitOk;
}

inline int cmd_serve(Network net, const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  std::optional<std::string> static_dir;
  if (!cfg.static_dir.empty()) static_dir = cfg.static_dir;
  service::HttpService svc(std::move(net), static_dir);
  const int port = svc.bind(cfg.host, cfg.port);
  if (port < 0) {
    err << "error: cannot bind " << cfg.host << ":" << cfg.port << "\n";
    return kExitFailure;
  }
  out << "listening on http://" << cfg.host << ":" << port << std::endl;
  return svc.listen() ? kExitOk : kExitFailure;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"Exact why / why-not explanations for ReLU network decisions", "polyex"};
  app.require_subcommand(1, 1);

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model_path, "Model file, `toy_a`, or `fixture_<widths>`")->required();
    sub->add_option("--seed", cfg.seed, "Seed for built-in fixture models");
  };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  };
  auto add_explain = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input, "Comma-separated input point")->required();
    sub->add_flag("--vrep", cfg.vrep, "Also compute vertex representations");
    sub->add_option("--style", cfg.style, "Rendering style")->check(CLI::IsMember({"hrep", "vrep", "text"}));
  };

  auto* predict = app.add_subcommand("predict", "Classify a point and print its activation signature");
  add_model(predict);
  add_format(predict);
  predict->add_option("--input", cfg.input, "Comma-separated input point")->required();

  auto* why = app.add_subcommand("why", "Minimal constraints explaining the decision at a point");
  add_model(why);
  add_format(why);
  add_explain(why);

  auto* whynot = app.add_subcommand("whynot", "Why the network did not choose --class at a point");
  add_model(whynot);
  add_format(whynot);
  add_explain(whynot);
  whynot->add_option("--class", cfg.counterfactual_class, "Counterfactual class index")->required();
  whynot->add_option("--max-distance", cfg.max_distance, "Largest Hamming distance to search");
  whynot->add_option("--budget", cfg.budget, "Maximum number of signatures examined");
  whynot->add_option("--threads", cfg.threads, "Worker threads per distance ring");

  auto* decompose = app.add_subcommand("decompose", "Enumerate every feasible linear region (small models)");
  add_model(decompose);
  add_format(decompose);
  decompose->add_option("--threads", cfg.threads, "Worker threads");

  auto* gen = app.add_subcommand("genfixture", "Write a seeded random model file");
  gen->add_option("--widths", cfg.widths, "Layer widths, input first, e.g. 2,8,2")->required();
  gen->add_option("--seed", cfg.seed, "Generator seed");
  gen->add_option("--out", cfg.out_path, "Output path (default: stdout)");

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API for one model");
  add_model(serve);
  serve->add_option("--port", cfg.port, "Port (0 picks a free one)");
  serve->add_option("--host", cfg.host, "Bind address");
  serve->add_option("--static", cfg.static_dir, "Directory served under /ui");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return detail::cmd_genfixture(cfg, out);
    Network net = fixtures::resolve_model(cfg.model_path, cfg.seed);
    if (predict->parsed()) return detail::cmd_predict(net, cfg, out, err);
    if (why->parsed()) return detail::cmd_why(net, cfg, out, err);
    if (whynot->parsed()) return detail::cmd_whynot(net, cfg, out, err);
    if (decompose->parsed()) return detail::cmd_decompose(net, cfg, out);
    if (serve->parsed()) return detail::cmd_serve(std::move(net), cfg, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace polyex::cli
