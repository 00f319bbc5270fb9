#pragma once

// Local HTTP server speaking the remote embedding protocol, with switchable
// failure modes for client tests.

#include <array>
#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace compsim::testing {

enum class StubMode {
  Echo,               // one 3-vector per text, derived from the text
  CountMismatch,      // drops the last embedding
  FailOnce,           // 503 on the first request, then Echo
  AlwaysFail,         // 500 every time
  Slow,               // sleeps `delay` before answering
  Malformed,          // body is not JSON
  RaggedDimensions,   // second vector one entry short
};

class StubServer {
public:
  explicit StubServer(StubMode mode, std::chrono::milliseconds delay = std::chrono::milliseconds(0));
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  std::string endpoint() const;
  int requests() const { return requests_; }
  std::string last_authorization() const;

  /// The vector Echo mode returns for `text`.
  static std::array<double, 3> echo_vector(const std::string& text);

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  StubMode mode_;
  std::chrono::milliseconds delay_;
  std::atomic<int> requests_{0};
  mutable std::mutex mutex_;
  std::string authorization_;
  int port_ = 0;
  std::thread thread_;
};

} // namespace compsim::testing
