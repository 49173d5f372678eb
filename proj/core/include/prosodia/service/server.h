// Copyright (c) 2026 The Prosodia Authors
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

#ifndef PROSODIA_SERVICE_SERVER_H_
#define PROSODIA_SERVICE_SERVER_H_

#include <functional>
#include <memory>
#include <string>

#include "prosodia/service/api.h"

namespace prosodia::service {

inline constexpr int kDefaultPort = 8787;

// HTTP/1.1 front for Api: GET /health, GET /model-info, POST /synthesize,
// with permissive CORS headers.
class Server {
 public:
  explicit Server(std::shared_ptr<Api> api);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds; port 0 picks a free port. Returns the bound port.
  int Bind(const std::string& host, int port);
  // Blocks until Stop().
  void Listen();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace prosodia::service

#endif  // PROSODIA_SERVICE_SERVER_H_
