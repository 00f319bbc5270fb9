#include "compsim/remote.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "compsim/error.hpp"

namespace compsim {

std::string_view to_string(RemoteErrorKind kind) {
  switch (kind) {
    case RemoteErrorKind::Transport: return "transport";
    case RemoteErrorKind::Timeout: return "timeout";
    case RemoteErrorKind::Status: return "status";
    case RemoteErrorKind::CountMismatch: return "count mismatch";
    case RemoteErrorKind::DimensionMismatch: return "dimension mismatch";
    case RemoteErrorKind::MalformedBody: return "malformed body";
  }
  return "?";
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string base_path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ArgumentError("remote endpoint needs a scheme: " + url);
  auto path = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, path);
  e.base_path = path == std::string::npos ? "" : url.substr(path);
  while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
  return e;
}

bool retryable(RemoteErrorKind kind) {
  return kind == RemoteErrorKind::Transport || kind == RemoteErrorKind::Timeout ||
         kind == RemoteErrorKind::Status;
}

RemoteResult parse_response(const std::string& body, std::size_t n_texts, std::size_t expected_dim) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw RemoteError(RemoteErrorKind::MalformedBody, std::string("response is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("embeddings") || !j.at("embeddings").is_array()) {
    throw RemoteError(RemoteErrorKind::MalformedBody, "response lacks an 'embeddings' array");
  }
  const auto& rows = j.at("embeddings");
  if (rows.size() != n_texts) {
    throw RemoteError(RemoteErrorKind::CountMismatch,
                      "count mismatch: " + std::to_string(rows.size()) + " embeddings for " +
                          std::to_string(n_texts) + " texts");
  }
  std::size_t dim = expected_dim;
  if (j.contains("dimension")) {
    if (!j.at("dimension").is_number_unsigned()) {
      throw RemoteError(RemoteErrorKind::MalformedBody, "'dimension' is not a non-negative integer");
    }
    const auto declared = j.at("dimension").get<std::size_t>();
    if (dim != 0 && declared != dim) {
      throw RemoteError(RemoteErrorKind::DimensionMismatch,
                        "declared dimension " + std::to_string(declared) + " != expected " +
                            std::to_string(dim));
    }
    dim = declared;
  }
  RemoteResult out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row.is_array()) throw RemoteError(RemoteErrorKind::MalformedBody, "embedding " + std::to_string(i) + " is not an array");
    if (dim == 0) dim = row.size();
    if (row.size() != dim) {
      throw RemoteError(RemoteErrorKind::DimensionMismatch,
                        "embedding " + std::to_string(i) + " has dimension " +
                            std::to_string(row.size()) + ", expected " + std::to_string(dim));
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (std::size_t c = 0; c < dim; ++c) {
      if (!row[c].is_number()) {
        throw RemoteError(RemoteErrorKind::MalformedBody, "non-numeric entry in embedding " + std::to_string(i));
      }
      v[static_cast<Eigen::Index>(c)] = row[c].get<double>();
    }
    if (!v.allFinite()) throw RemoteError(RemoteErrorKind::MalformedBody, "non-finite entry in embedding " + std::to_string(i));
    out.embeddings.push_back(std::move(v));
  }
  out.dimension = dim;
  return out;
}

RemoteResult attempt(const RemoteOptions& options, const Endpoint& endpoint, const std::string& body,
                     std::size_t n_texts) {
  httplib::Client client(endpoint.origin);
  const auto secs = options.timeout.count() / 1000;
  const auto usecs = (options.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(static_cast<time_t>(secs), static_cast<time_t>(usecs));
  client.set_read_timeout(static_cast<time_t>(secs), static_cast<time_t>(usecs));
  client.set_write_timeout(static_cast<time_t>(secs), static_cast<time_t>(usecs));

  httplib::Headers headers;
  if (!options.auth_env.empty()) {
    if (const char* token = std::getenv(options.auth_env.c_str()); token && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(endpoint.base_path + "/embed", headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    const auto elapsed = std::chrono::steady_clock::now() - started;
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           (err == httplib::Error::Read && elapsed >= options.timeout * 9 / 10);
    throw RemoteError(timed_out ? RemoteErrorKind::Timeout : RemoteErrorKind::Transport,
                      "request to " + endpoint.origin + " failed: " + httplib::to_string(err));
  }
  if (res->status != 200) {
    throw RemoteError(RemoteErrorKind::Status, "server returned HTTP " + std::to_string(res->status));
  }
  return parse_response(res->body, n_texts, options.expected_dimension);
}

} // namespace

RemoteResult remote_embed(const RemoteOptions& options, const std::vector<std::string>& texts) {
  if (texts.empty()) throw ArgumentError("remote_embed: no texts");
  if (options.retries < 0) throw ArgumentError("remote_embed: negative retry count");
  const auto endpoint = split_endpoint(options.endpoint);
  const std::string body =
      nlohmann::json{{"provider_id", options.provider_id}, {"texts", texts}}.dump();

  auto delay = options.backoff;
  for (int attempt_no = 0;; ++attempt_no) {
    try {
      auto result = attempt(options, endpoint, body, texts.size());
      result.retries_used = attempt_no;
      return result;
    } catch (const RemoteError& e) {
      if (!retryable(e.kind()) || attempt_no >= options.retries) {
        throw RemoteError(e.kind(), e.what(), attempt_no + 1);
      }
    }
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

RemoteProvider::RemoteProvider(RemoteOptions options, std::size_t dimension, std::size_t batch_size)
    : options_(std::move(options)), dimension_(dimension), batch_size_(batch_size) {
  if (dimension_ == 0) throw ArgumentError("remote provider needs a declared dimension");
  if (batch_size_ == 0) throw ArgumentError("remote provider batch size must be >= 1");
  options_.expected_dimension = dimension_;
}

Eigen::VectorXd RemoteProvider::embed_chunk(const TokenSequence& chunk) const {
  return remote_embed(options_, {join_tokens(chunk)}).embeddings.front();
}

std::vector<Eigen::VectorXd> RemoteProvider::embed_chunks(std::span<const TokenSequence> chunks) const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(chunks.size());
  for (std::size_t start = 0; start < chunks.size(); start += batch_size_) {
    const auto end = std::min(chunks.size(), start + batch_size_);
    std::vector<std::string> texts;
    for (std::size_t i = start; i < end; ++i) texts.push_back(join_tokens(chunks[i]));
    try {
      auto result = remote_embed(options_, texts);
      for (auto& v : result.embeddings) out.push_back(std::move(v));
    } catch (const RemoteError& e) {
      throw ProviderError(start, e.what());
    }
  }
  return out;
}

} // namespace compsim
