// Copyright 2026 The Spanner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spanner/service.hpp"

#include <chrono>
#include <mutex>

#include "httplib.h"
#include "json.hpp"
#include "spanner/span_model.hpp"

namespace spanner {
namespace {

using nlohmann::json;

Service::Response ErrorResponse(int status, const std::string &code,
                                const std::string &message) {
  return {status, json{{"error", {{"code", code}, {"message", message}}}}.dump()};
}

template <typename F>
Service::Response Guard(F &&f) {
  try {
    return f();
  } catch (const RequestError &e) {
    return ErrorResponse(e.status(), e.code(), e.what());
  } catch (const json::exception &e) {
    return ErrorResponse(400, "bad_request", e.what());
  } catch (const Error &e) {
    return ErrorResponse(400, "invalid", e.what());
  } catch (const std::exception &e) {
    return ErrorResponse(500, "internal", e.what());
  }
}

void Reply(httplib::Response &res, const Service::Response &r) {
  res.status = r.status;
  res.set_header("Access-Control-Allow-Origin", "*");
  res.set_content(r.body, "application/json");
}

}  // namespace

Service::Service(Registry registry)
    : registry_(std::move(registry)), server_(std::make_unique<httplib::Server>()) {
  InstallRoutes();
}

Service::~Service() = default;

Service::Response Service::Health() const {
  std::shared_lock lock(mu_);
  return {200, json{{"status", "ok"},
                    {"name", "spanner"},
                    {"version", kVersion},
                    {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                  std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)},
                    {"model_loaded", registry_.model() != nullptr},
                    {"systems", registry_.systems().size()}}
                   .dump()};
}

Service::Response Service::ListSystems() const {
  return Guard([&] {
    std::shared_lock lock(mu_);
    json systems = json::array();
    for (const auto &e : registry_.systems()) systems.push_back(e.ToJson());
    return Response{200, json{{"systems", std::move(systems)},
                              {"eval_split", registry_.eval_split()},
                              {"weight_split", registry_.weight_split()}}
                             .dump()};
  });
}

Service::Response Service::AddSystem(
    const std::string &name, const std::map<std::string, std::string> &outputs) {
  return Guard([&] {
    std::unique_lock lock(mu_);
    const auto &entry = registry_.Register(name, outputs);
    return Response{201, entry.ToJson().dump()};
  });
}

Service::Response Service::Combine(const std::string &request_body) const {
  return Guard([&] {
    const auto start = std::chrono::steady_clock::now();
    const auto request = CombineRequest::FromJson(json::parse(request_body));
    std::string report;
    {
      std::shared_lock lock(mu_);
      report = registry_.CombineReport(request).dump();
    }
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    return Response{200, "{\"report\":" + report +
                             ",\"elapsed_ms\":" + json(ms).dump() + "}"};
  });
}

Service::Response Service::HeatmapQuery(const std::string &attribute,
                                        const std::string &a,
                                        const std::string &b) const {
  return Guard([&] {
    if (a.empty() || b.empty())
      throw RequestError("bad_request", "parameters a and b are required");
    std::optional<AttributeKind> kind;
    if (!attribute.empty()) {
      try {
        kind = ParseAttribute(attribute);
      } catch (const Error &e) {
        throw RequestError("unknown_attribute", e.what());
      }
    }
    std::shared_lock lock(mu_);
    json out = HeatmapToJson(registry_.Buckets(a, b, kind));
    out["a"] = a;
    out["b"] = b;
    return Response{200, out.dump()};
  });
}

void Service::InstallRoutes() {
  auto &srv = *server_;
  srv.Get("/health", [this](const httplib::Request &, httplib::Response &res) {
    Reply(res, Health());
  });
  srv.Get("/systems", [this](const httplib::Request &, httplib::Response &res) {
    Reply(res, ListSystems());
  });
  srv.Post("/systems", [this](const httplib::Request &req, httplib::Response &res) {
    if (!req.is_multipart_form_data()) {
      Reply(res, ErrorResponse(400, "bad_request", "expected multipart/form-data"));
      return;
    }
    std::string name;
    std::map<std::string, std::string> outputs;
    for (const auto &[field, part] : req.files) {
      if (field == "name") name = part.content;
      else if (field == "file") outputs[registry_.eval_split()] = part.content;
      else outputs[field] = part.content;
    }
    Reply(res, AddSystem(name, outputs));
  });
  srv.Post("/combine", [this](const httplib::Request &req, httplib::Response &res) {
    Reply(res, Combine(req.body));
  });
  srv.Get("/buckets", [this](const httplib::Request &req, httplib::Response &res) {
    Reply(res, HeatmapQuery(req.get_param_value("attr"), req.get_param_value("a"),
                            req.get_param_value("b")));
  });
  srv.Options(R"(.*)", [](const httplib::Request &, httplib::Response &res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

bool Service::Listen(const std::string &host, int port) {
  return server_->listen(host, port);
}

int Service::BindToAnyPort(const std::string &host) {
  return server_->bind_to_any_port(host);
}

bool Service::ListenAfterBind() { return server_->listen_after_bind(); }

void Service::Stop() { server_->stop(); }

}  // namespace spanner
