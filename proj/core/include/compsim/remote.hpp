#pragma once

// Client for the vendor-neutral remote embedding protocol:
//
//   POST {endpoint}/embed
//   request : {"provider_id": string, "texts": [string, ...]}
//   response: {"dimension": int, "embeddings": [[number, ...], ...]}
//
// Any status other than 200 is a failure. Transport errors, timeouts and
// non-200 statuses are retried with exponential backoff; protocol errors
// (malformed body, count or dimension mismatch) are not.

#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "compsim/embed.hpp"

namespace compsim {

enum class RemoteErrorKind { Transport, Timeout, Status, CountMismatch, DimensionMismatch, MalformedBody };

std::string_view to_string(RemoteErrorKind kind);

class RemoteError : public std::runtime_error {
public:
  RemoteError(RemoteErrorKind kind, const std::string& what, int attempts = 1)
      : std::runtime_error(what), kind_(kind), attempts_(attempts) {}
  RemoteErrorKind kind() const { return kind_; }
  int attempts() const { return attempts_; }

private:
  RemoteErrorKind kind_;
  int attempts_;
};

struct RemoteOptions {
  std::string endpoint;  // "http://host:port" with an optional base path
  std::string provider_id;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;  // extra attempts after the first
  std::chrono::milliseconds backoff{200};  // doubled after every failed attempt
  /// Name of the environment variable holding a bearer token; empty = no auth.
  /// The token value is never logged or included in error messages.
  std::string auth_env;
  /// 0 = take the dimension from the first response.
  std::size_t expected_dimension = 0;
};

struct RemoteResult {
  std::vector<Eigen::VectorXd> embeddings;
  std::size_t dimension = 0;
  int retries_used = 0;
};

RemoteResult remote_embed(const RemoteOptions& options, const std::vector<std::string>& texts);

class RemoteProvider final : public EmbeddingProvider {
public:
  RemoteProvider(RemoteOptions options, std::size_t dimension, std::size_t batch_size = 32);
  const std::string& id() const override { return options_.provider_id; }
  std::size_t dimension() const override { return dimension_; }
  Eigen::VectorXd embed_chunk(const TokenSequence& chunk) const override;
  std::vector<Eigen::VectorXd> embed_chunks(std::span<const TokenSequence> chunks) const override;

private:
  RemoteOptions options_;
  std::size_t dimension_;
  std::size_t batch_size_;
};

} // namespace compsim
