#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <thread>

#include "asb/error.h"
#include "asb/lexembed.h"

namespace asb {
namespace {

EmbeddingTable sample_table() {
  EmbeddingTable t;
  t.model_name = "mbert";
  t.dim = 3;
  t.pooling = "mean";
  t.rows["b"] = {0.1, -2.5e-7, 3.0};
  t.rows["a"] = {1.0 / 3.0, 0.0, -1e300};
  return t;
}

TEST(Table, BitExactFormatAndRoundTrip) {
  std::ostringstream out;
  write_table(sample_table(), out);
  const std::string text = out.str();
  EXPECT_EQ(text,
            "#emb v1 model=mbert dim=3 pooling=mean\n"
            "a\t0.3333333333333333,0,-1e+300\n"
            "b\t0.1,-2.5e-07,3\n");
  std::istringstream in(text);
  EXPECT_EQ(parse_table(in), sample_table());
}

TEST(Table, RejectsMalformedInput) {
  const char* bad[] = {
      "",
      "#emb v2 model=x dim=1\n",
      "#emb v1 model=x\n",
      "#emb v1 model=x dim=2\na\t1\n",
      "#emb v1 model=x dim=1\na\tnan\n",
      "#emb v1 model=x dim=1\na\t1\na\t2\n",
      "#emb v1 model=x dim=1 pooling=max\n",
      "#emb v1 model=x dim=1\na 1\n",
  };
  for (const char* text : bad) {
    std::istringstream in(text);
    EXPECT_THROW(parse_table(in), DataError) << text;
  }
  EXPECT_THROW(load_table("/nonexistent/table.emb"), UsageError);
}

TEST(Table, CoverageAndDefaults) {
  const auto t = sample_table();
  const std::vector<TaskInstance> inst{{"a", Task::kAbd, "abusive"}, {"c", Task::kAbd, "abusive"}};
  const auto r = validate_coverage(t, inst);
  EXPECT_EQ(r.covered, 1u);
  EXPECT_EQ(r.missing, std::vector<std::string>{"c"});
  EXPECT_EQ(r.extra, 1u);
  EXPECT_DOUBLE_EQ(r.ratio(), 0.5);
  EXPECT_THROW(require_full_coverage(t, inst), DataError);
  EXPECT_EQ(default_lexical_dim("gemini004"), 1024);
  EXPECT_EQ(default_lexical_dim("camembert"), 768);
}

// Local provider: the first `fail_first` requests get HTTP 503.
class StubProvider {
 public:
  explicit StubProvider(int fail_first, int dim = 4) : fail_first_(fail_first), dim_(dim) {
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      if (req.get_header_value("Authorization") != "Bearer secret") {
        res.status = 401;
        return;
      }
      if (fail_first_-- > 0) {
        res.status = 503;
        return;
      }
      const auto body = nlohmann::json::parse(req.body);
      nlohmann::json reply;
      reply["vectors"] = nlohmann::json::array();
      for (const auto& t : body["texts"]) {
        std::vector<double> v(static_cast<size_t>(dim_), static_cast<double>(t.get<std::string>().size()));
        reply["vectors"].push_back(v);
      }
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubProvider() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/embed"; }
  int hits() const { return hits_; }

 private:
  httplib::Server server_;
  std::atomic<int> fail_first_;
  int dim_;
  std::atomic<int> hits_{0};
  int port_ = 0;
  std::thread thread_;
};

std::vector<Message> messages(int n) {
  std::vector<Message> out;
  for (int i = 0; i < n; ++i) {
    Message m;
    m.message_id = "m" + std::to_string(100 + i);
    m.text = std::string(static_cast<size_t>(i + 1), 'x');
    out.push_back(m);
  }
  return out;
}

ProviderConfig config_for(const StubProvider& stub) {
  ProviderConfig c;
  c.endpoint = stub.endpoint();
  c.model = "stub";
  c.token_env = "ASB_TEST_PROVIDER_TOKEN";
  c.batch_size = 3;
  c.backoff = std::chrono::milliseconds(1);
  c.timeout = std::chrono::milliseconds(2000);
  return c;
}

TEST(Provider, BatchesRetriesAndCaches) {
  setenv("ASB_TEST_PROVIDER_TOKEN", "secret", 1);
  StubProvider stub(2);
  auto cfg = config_for(stub);
  cfg.max_in_flight = 1;
  const auto dir = std::filesystem::temp_directory_path() / "asb-provider-cache-test";
  std::filesystem::remove_all(dir);
  cfg.cache_dir = dir;
  ProviderStats st;
  const auto t = fetch_from_provider(messages(7), cfg, &st);
  EXPECT_EQ(t.dim, 4);
  EXPECT_EQ(t.rows.size(), 7u);
  EXPECT_EQ(t.row("m104"), std::vector<double>(4, 5.0));
  EXPECT_EQ(st.retries, 2u);
  EXPECT_EQ(st.requests, 5u);  // 3 batches + 2 retries
  const int before = stub.hits();
  const auto again = fetch_from_provider(messages(7), cfg, &st);
  EXPECT_TRUE(st.cache_hit);
  EXPECT_EQ(stub.hits(), before);
  EXPECT_EQ(again, t);
  std::filesystem::remove_all(dir);
}

TEST(Provider, ExhaustedRetriesIsProviderError) {
  setenv("ASB_TEST_PROVIDER_TOKEN", "secret", 1);
  StubProvider stub(100);
  auto cfg = config_for(stub);
  cfg.max_attempts = 2;
  EXPECT_THROW(fetch_from_provider(messages(2), cfg), ProviderError);
}

TEST(Provider, DimMismatchIsDataError) {
  setenv("ASB_TEST_PROVIDER_TOKEN", "secret", 1);
  StubProvider stub(0, 5);
  auto cfg = config_for(stub);
  cfg.expected_dim = 768;
  EXPECT_THROW(fetch_from_provider(messages(2), cfg), DataError);
}

TEST(Provider, MissingTokenIsProviderError) {
  StubProvider stub(0);
  auto cfg = config_for(stub);
  cfg.token_env = "ASB_TEST_TOKEN_THAT_IS_NOT_SET";
  unsetenv(cfg.token_env.c_str());
  EXPECT_THROW(fetch_from_provider(messages(1), cfg), ProviderError);
}

}  // namespace
}  // namespace asb
