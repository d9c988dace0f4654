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

#ifndef SPANNER_SERVICE_HPP_
#define SPANNER_SERVICE_HPP_

#include <map>
#include <memory>
#include <shared_mutex>
#include <string>

#include "spanner/registry.hpp"

namespace httplib {
class Server;
}

namespace spanner {

inline constexpr const char *kVersion = "0.1.0";

// HTTP front end over a Registry. Reads run concurrently; registrations take
// the registry exclusively. Handlers are callable without a socket.
class Service {
 public:
  struct Response {
    int status = 200;
    std::string body;  // JSON document
  };

  explicit Service(Registry registry);
  ~Service();

  Response Health() const;
  Response ListSystems() const;
  Response AddSystem(const std::string &name,
                     const std::map<std::string, std::string> &outputs);
  Response Combine(const std::string &request_body) const;
  Response HeatmapQuery(const std::string &attribute, const std::string &a,
                        const std::string &b) const;

  // Blocks until Stop(). Returns false if the port could not be bound.
  bool Listen(const std::string &host, int port);
  // Binds to an ephemeral port and returns it; serve with ListenAfterBind().
  int BindToAnyPort(const std::string &host);
  bool ListenAfterBind();
  void Stop();

 private:
  void InstallRoutes();

  mutable std::shared_mutex mu_;
  Registry registry_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace spanner

#endif  // SPANNER_SERVICE_HPP_
