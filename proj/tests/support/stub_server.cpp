#include "stub_server.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace compsim::testing {

struct StubServer::Impl {
  httplib::Server server;
};

std::array<double, 3> StubServer::echo_vector(const std::string& text) {
  double sum = 0.0;
  for (unsigned char c : text) sum += c;
  return {static_cast<double>(text.size()), text.empty() ? 0.0 : static_cast<double>(static_cast<unsigned char>(text[0])),
          sum};
}

StubServer::StubServer(StubMode mode, std::chrono::milliseconds delay)
    : impl_(std::make_unique<Impl>()), mode_(mode), delay_(delay) {
  impl_->server.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
    const int n = ++requests_;
    {
      std::lock_guard lock(mutex_);
      authorization_ = req.get_header_value("Authorization");
    }
    if (mode_ == StubMode::Slow) std::this_thread::sleep_for(delay_);
    if (mode_ == StubMode::AlwaysFail || (mode_ == StubMode::FailOnce && n == 1)) {
      res.status = mode_ == StubMode::FailOnce ? 503 : 500;
      res.set_content("{\"error\": \"unavailable\"}", "application/json");
      return;
    }
    if (mode_ == StubMode::Malformed) {
      res.set_content("embeddings: none", "text/plain");
      return;
    }
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json embeddings = nlohmann::json::array();
    for (const auto& t : body.at("texts")) {
      const auto v = echo_vector(t.get<std::string>());
      embeddings.push_back({v[0], v[1], v[2]});
    }
    if (mode_ == StubMode::CountMismatch && !embeddings.empty()) embeddings.erase(embeddings.size() - 1);
    if (mode_ == StubMode::RaggedDimensions && embeddings.size() > 1) embeddings[1].erase(2);
    res.set_content(nlohmann::json{{"dimension", 3}, {"embeddings", embeddings}}.dump(), "application/json");
  });
  port_ = impl_->server.bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

StubServer::~StubServer() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::string StubServer::endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

std::string StubServer::last_authorization() const {
  std::lock_guard lock(mutex_);
  return authorization_;
}

} // namespace compsim::testing
