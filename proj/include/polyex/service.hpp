#pragma once

// HTTP/JSON API over one immutable network.
//
// `Api` maps (method, path, body) to (status, body) with no state between
// calls; `HttpService` binds it to cpp-httplib.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "polyex/errors.hpp"
#include "polyex/explain.hpp"
#include "polyex/marching.hpp"
#include "polyex/model.hpp"
#include "polyex/serialize.hpp"

namespace polyex::service {

using nlohmann::json;

inline constexpr std::size_t kDefaultMaxRegions = 64;

struct ApiResponse {
  int status = 200;
  json body;
};

class Api {
 public:
  explicit Api(Network net) : net_(std::move(net)) {}

  const Network& network() const { return net_; }

  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body,
                     const std::optional<std::string>& request_id_header = std::nullopt) const {
    json req = json::object();
    std::optional<json> request_id;
    if (request_id_header) request_id = *request_id_header;

    ApiResponse resp;
    try {
      if (method == "POST") {
        try {
          req = body.empty() ? json::object() : json::parse(body);
        } catch (const json::parse_error& e) {
          throw ParseError(std::string("body is not valid JSON: ") + e.what());
        }
        if (!req.is_object()) throw ParseError("body must be a JSON object");
        if (req.contains("request_id")) request_id = req.at("request_id");
      }
      resp = route(method, path, req);
    } catch (const FactualClassError& e) {
      resp = error(422, "counterfactual_is_factual", e.what());
    } catch (const json::exception& e) {
      resp = error(400, "bad_request", e.what());
    } catch (const Error& e) {
      resp = error(400, "bad_request", e.what());
    }
    if (request_id) resp.body["request_id"] = *request_id;
    return resp;
  }

 private:
  static ApiResponse error(int status, const std::string& code, const std::string& message) {
    return {status, json{{"code", code}, {"message", message}}};
  }

  Vector point(const json& req, const char* key) const {
    if (!req.contains(key) || !req.at(key).is_array()) {
      throw ParseError(std::string("`") + key + "` must be an array of numbers");
    }
    const auto values = req.at(key).get<std::vector<double>>();
    Vector x = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    check_input(net_, x);
    return x;
  }

  ApiResponse route(const std::string& method, const std::string& path, const json& req) const {
    if (method == "GET" && path == "/model") return {200, serial::model_info(net_)};
    if (method != "POST") return error(404, "not_found", "no route for " + method + " " + path);

    if (path == "/predict") return {200, serial::predict(net_, forward(net_, point(req, "input")))};

    if (path == "/explain/why") {
      WhyOptions opts;
      opts.want_vrep = req.value("vrep", false);
      return {200, serial::why(explain_why(net_, point(req, "input"), opts))};
    }

    if (path == "/explain/whynot") {
      const Vector x = point(req, "input");
      if (!req.contains("counterfactual_class")) throw ParseError("`counterfactual_class` is required");
      const auto target = req.at("counterfactual_class").get<std::int64_t>();
      if (target < 0) throw InvalidClassError("counterfactual_class must be non-negative");
      WhyNotOptions opts;
      opts.want_vrep = req.value("vrep", false);
      if (req.contains("budget") && !req.at("budget").is_null()) opts.march.budget = req.at("budget").get<std::uint64_t>();
      if (req.contains("max_distance") && !req.at("max_distance").is_null()) {
        opts.march.max_distance = req.at("max_distance").get<std::size_t>();
      }
      const auto e = explain_why_not(net_, x, static_cast<std::size_t>(target), opts);
      json body = serial::why_not(e);
      if (const auto* u = std::get_if<ClassUnreachable>(&e.outcome); u && !u->exhaustive) {
        json err = {{"code", "budget_exhausted"},
                    {"message", "search budget exhausted before the class was found"},
                    {"explanation", body}};
        return {503, err};
      }
      return {200, body};
    }

    if (path == "/regions") {
      if (net_.input_dim() != 2) return error(400, "unsupported", "/regions is only available for 2-D models");
      const Vector centre = point(req, "center");
      const std::size_t max_regions = req.value("max_regions", kDefaultMaxRegions);
      const auto regions = collect_regions(net_, forward(net_, centre).signature, max_regions);
      return {200, json{{"regions", serial::regions(regions)}}};
    }

    return error(404, "not_found", "no route for " + method + " " + path);
  }

  Network net_;
};

/// cpp-httplib front end for `Api`, with permissive CORS for a local UI.
class HttpService {
 public:
  explicit HttpService(Network net, std::optional<std::string> static_dir = std::nullopt)
      : api_(std::move(net)) {
    server_.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                 {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                 {"Access-Control-Allow-Headers", "Content-Type, X-Request-Id"}});
    if (static_dir) server_.set_mount_point("/ui", *static_dir);
    server_.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      std::optional<std::string> rid;
      if (req.has_header("X-Request-Id")) rid = req.get_header_value("X-Request-Id");
      const ApiResponse r = api_.handle(req.method, req.path, req.body, rid);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server_.Get(".*", handler);
    server_.Post(".*", handler);
  }

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port) {
    if (port == 0) return server_.bind_to_any_port(host);
    return server_.bind_to_port(host, port) ? port : -1;
  }

  bool listen() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  Api api_;
  httplib::Server server_;
};

}  // namespace polyex::service
