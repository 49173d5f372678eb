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

#include "prosodia/service/server.h"

#include "httplib.h"
#include "prosodia/common/error.h"

namespace prosodia::service {

struct Server::Impl {
  std::shared_ptr<Api> api;
  httplib::Server http;
};

namespace {

void Reply(httplib::Response& res, const HttpReply& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

}  // namespace

Server::Server(std::shared_ptr<Api> api) : impl_(std::make_unique<Impl>()) {
  if (!api) throw Error("server needs an api");
  impl_->api = std::move(api);
  httplib::Server& http = impl_->http;
  http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                            {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                            {"Access-Control-Allow-Headers", "Content-Type"}});
  Api* api_ptr = impl_->api.get();
  http.Get("/health", [api_ptr](const httplib::Request&, httplib::Response& res) {
    Reply(res, api_ptr->Health());
  });
  http.Get("/model-info",
           [api_ptr](const httplib::Request&, httplib::Response& res) {
             Reply(res, api_ptr->ModelInfo());
           });
  http.Post("/synthesize",
            [api_ptr](const httplib::Request& req, httplib::Response& res) {
              Reply(res, api_ptr->Synthesize(req.body));
            });
  http.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(ErrorBody("path", "no such route"), "application/json");
    }
  });
}

Server::~Server() { Stop(); }

int Server::Bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->http.bind_to_any_port(host)
                        : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void Server::Listen() { impl_->http.listen_after_bind(); }

void Server::Stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace prosodia::service
