#include <gtest/gtest.h>

#include <cstdlib>

#include "compsim/remote.hpp"
#include "stub_server.hpp"

using namespace compsim;
using compsim::testing::StubMode;
using compsim::testing::StubServer;

namespace {

RemoteOptions options_for(const StubServer& server) {
  RemoteOptions o;
  o.endpoint = server.endpoint();
  o.provider_id = "stub";
  o.timeout = std::chrono::milliseconds(2000);
  o.retries = 2;
  o.backoff = std::chrono::milliseconds(1);
  return o;
}

RemoteErrorKind kind_of(const RemoteOptions& o, const std::vector<std::string>& texts) {
  try {
    remote_embed(o, texts);
  } catch (const RemoteError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return RemoteErrorKind::Transport;
}

} // namespace

TEST(Remote, EchoPreservesOrder) {
  StubServer server(StubMode::Echo);
  const std::vector<std::string> texts = {"alpha", "b", "zeta zeta", "middle"};
  const auto result = remote_embed(options_for(server), texts);
  ASSERT_EQ(result.embeddings.size(), texts.size());
  EXPECT_EQ(result.dimension, 3u);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto want = StubServer::echo_vector(texts[i]);
    for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(result.embeddings[i][c], want[static_cast<std::size_t>(c)]);
  }
  EXPECT_EQ(server.requests(), 1);
}

TEST(Remote, CountMismatchIsNotRetried) {
  StubServer server(StubMode::CountMismatch);
  EXPECT_EQ(kind_of(options_for(server), {"a", "b", "c"}), RemoteErrorKind::CountMismatch);
  EXPECT_EQ(server.requests(), 1);
}

TEST(Remote, TransientFailureIsRetried) {
  StubServer server(StubMode::FailOnce);
  const auto result = remote_embed(options_for(server), {"a", "b"});
  EXPECT_EQ(result.embeddings.size(), 2u);
  EXPECT_EQ(result.retries_used, 1);
  EXPECT_EQ(server.requests(), 2);
}

TEST(Remote, PersistentFailureExhaustsRetries) {
  StubServer server(StubMode::AlwaysFail);
  try {
    remote_embed(options_for(server), {"a"});
    FAIL();
  } catch (const RemoteError& e) {
    EXPECT_EQ(e.kind(), RemoteErrorKind::Status);
    EXPECT_EQ(e.attempts(), 3);
  }
  EXPECT_EQ(server.requests(), 3);
}

TEST(Remote, TimeoutIsReported) {
  StubServer server(StubMode::Slow, std::chrono::milliseconds(1500));
  auto o = options_for(server);
  o.timeout = std::chrono::milliseconds(200);
  o.retries = 0;
  EXPECT_EQ(kind_of(o, {"a"}), RemoteErrorKind::Timeout);
}

TEST(Remote, MalformedBody) {
  StubServer server(StubMode::Malformed);
  EXPECT_EQ(kind_of(options_for(server), {"a"}), RemoteErrorKind::MalformedBody);
}

TEST(Remote, RaggedDimensions) {
  StubServer server(StubMode::RaggedDimensions);
  EXPECT_EQ(kind_of(options_for(server), {"a", "b", "c"}), RemoteErrorKind::DimensionMismatch);
}

TEST(Remote, ExpectedDimensionEnforced) {
  StubServer server(StubMode::Echo);
  auto o = options_for(server);
  o.expected_dimension = 4;
  EXPECT_EQ(kind_of(o, {"a"}), RemoteErrorKind::DimensionMismatch);
}

TEST(Remote, UnreachableEndpointIsTransport) {
  RemoteOptions o;
  o.endpoint = "http://127.0.0.1:1";
  o.provider_id = "stub";
  o.retries = 0;
  o.timeout = std::chrono::milliseconds(500);
  EXPECT_EQ(kind_of(o, {"a"}), RemoteErrorKind::Transport);
}

TEST(Remote, BearerTokenFromEnvironmentNotLeaked) {
  StubServer server(StubMode::AlwaysFail);
  ::setenv("COMPSIM_TEST_TOKEN", "s3cret-token", 1);
  auto o = options_for(server);
  o.auth_env = "COMPSIM_TEST_TOKEN";
  o.retries = 0;
  try {
    remote_embed(o, {"a"});
    FAIL();
  } catch (const RemoteError& e) {
    EXPECT_EQ(std::string(e.what()).find("s3cret"), std::string::npos);
  }
  EXPECT_EQ(server.last_authorization(), "Bearer s3cret-token");
}

TEST(Remote, ProviderBatchesChunks) {
  StubServer server(StubMode::Echo);
  const RemoteProvider provider(options_for(server), 3, 2);
  std::vector<TokenSequence> chunks = {{{"one", "two"}, ""}, {{"three"}, ""}, {{"four"}, ""}};
  const auto v = provider.embed_chunks(chunks);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(server.requests(), 2);
  const auto want = StubServer::echo_vector("one two");
  EXPECT_DOUBLE_EQ(v[0][0], want[0]);
  const auto pooled = embed_document(provider, chunks);
  EXPECT_NEAR(pooled[0], (want[0] + StubServer::echo_vector("three")[0] + StubServer::echo_vector("four")[0]) / 3, 1e-12);
}
