#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <future>
#include <regex>
#include <thread>

#include "asb/error.h"
#include "asb/hash.h"
#include "asb/lexembed.h"
#include "httplib.h"
#include "json.hpp"

namespace asb {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw UsageError("provider endpoint is not an http(s) URL: " + url);
  }
  return Endpoint{m[1].str(), m[2].matched ? m[2].str() : "/"};
}

std::filesystem::path cache_path(const std::vector<const Message*>& sorted,
                                 const ProviderConfig& config) {
  Fnv1a h;
  h.bytes(config.endpoint).u64(0).bytes(config.model).u64(0).bytes(config.pooling);
  for (const Message* m : sorted) {
    h.u64(1).bytes(m->message_id).u64(2).bytes(m->text);
  }
  return config.cache_dir / ("provider-" + config.model + "-" + to_hex(h.digest()) + ".emb");
}

using Batch = std::vector<std::vector<double>>;

Batch request_batch(const Endpoint& ep, const ProviderConfig& config,
                    const std::string& token,
                    const std::vector<const Message*>& batch,
                    std::atomic<size_t>& requests, std::atomic<size_t>& retries) {
  nlohmann::json body;
  body["model"] = config.model;
  body["texts"] = nlohmann::json::array();
  for (const Message* m : batch) body["texts"].push_back(m->text);
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    if (attempt > 0) {
      ++retries;
      std::this_thread::sleep_for(config.backoff * (1 << std::min(attempt - 1, 10)));
    }
    ++requests;
    httplib::Client client(ep.origin);
    client.set_connection_timeout(config.timeout);
    client.set_read_timeout(config.timeout);
    client.set_write_timeout(config.timeout);
    client.set_bearer_token_auth(token);
    auto res = client.Post(ep.path, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      last_error = std::string("malformed response: ") + e.what();
      continue;
    }
    if (!reply.contains("vectors") || !reply["vectors"].is_array()) {
      last_error = "response has no 'vectors' array";
      continue;
    }
    Batch out;
    for (const auto& v : reply["vectors"]) {
      if (!v.is_array()) throw DataError("provider returned a non-array vector");
      std::vector<double> row;
      row.reserve(v.size());
      for (const auto& x : v) {
        if (!x.is_number()) throw DataError("provider returned a non-numeric value");
        row.push_back(x.get<double>());
      }
      out.push_back(std::move(row));
    }
    if (out.size() != batch.size()) {
      throw DataError("provider returned " + std::to_string(out.size()) +
                      " vectors for " + std::to_string(batch.size()) + " texts");
    }
    return out;
  }
  throw ProviderError("provider request failed after " +
                      std::to_string(config.max_attempts) +
                      " attempt(s): " + last_error);
}

}  // namespace

void ProviderConfig::validate() const {
  if (batch_size < 1) throw UsageError("provider batch_size must be >= 1");
  if (max_attempts < 1) throw UsageError("provider max_attempts must be >= 1");
  if (max_in_flight < 1) throw UsageError("provider max_in_flight must be >= 1");
  if (model.empty()) throw UsageError("provider model identifier is empty");
  if (pooling != "mean" && pooling != "cls") {
    throw UsageError("provider pooling must be mean or cls");
  }
}

EmbeddingTable fetch_from_provider(const std::vector<Message>& messages,
                                   const ProviderConfig& config,
                                   ProviderStats* stats) {
  config.validate();
  ProviderStats local;
  ProviderStats& st = stats ? *stats : local;
  st = ProviderStats{};

  EmbeddingTable table;
  table.model_name = config.model;
  table.pooling = config.pooling;
  table.dim = config.expected_dim.value_or(0);
  if (messages.empty()) return table;

  std::vector<const Message*> sorted;
  for (const auto& m : messages) sorted.push_back(&m);
  std::sort(sorted.begin(), sorted.end(), [](const Message* a, const Message* b) {
    return a->message_id < b->message_id;
  });
  for (size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->message_id == sorted[i - 1]->message_id) {
      throw DataError("duplicate message_id \"" + sorted[i]->message_id +
                      "\" in provider request");
    }
  }

  std::filesystem::path cached;
  if (!config.cache_dir.empty()) {
    cached = cache_path(sorted, config);
    if (std::filesystem::exists(cached)) {
      st.cache_hit = true;
      return load_table(cached);
    }
  }

  const Endpoint ep = parse_endpoint(config.endpoint);
  const char* token = std::getenv(config.token_env.c_str());
  if (token == nullptr || *token == '\0') {
    throw ProviderError("provider token missing: set environment variable " +
                        config.token_env);
  }

  std::vector<std::vector<const Message*>> batches;
  for (size_t i = 0; i < sorted.size(); i += static_cast<size_t>(config.batch_size)) {
    const size_t end = std::min(sorted.size(), i + static_cast<size_t>(config.batch_size));
    batches.emplace_back(sorted.begin() + static_cast<long>(i),
                         sorted.begin() + static_cast<long>(end));
  }

  std::atomic<size_t> requests{0}, retries{0};
  std::vector<Batch> results(batches.size());
  // Waves of at most max_in_flight concurrent batches; results are stored by
  // batch index so the table does not depend on completion order.
  for (size_t start = 0; start < batches.size();
       start += static_cast<size_t>(config.max_in_flight)) {
    const size_t end =
        std::min(batches.size(), start + static_cast<size_t>(config.max_in_flight));
    std::vector<std::future<Batch>> wave;
    for (size_t b = start; b < end; ++b) {
      wave.push_back(std::async(std::launch::async, [&, b] {
        return request_batch(ep, config, token, batches[b], requests, retries);
      }));
    }
    std::exception_ptr failure;
    for (size_t b = start; b < end; ++b) {
      try {
        results[b] = wave[b - start].get();
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) {
      st.requests = requests;
      st.retries = retries;
      std::rethrow_exception(failure);
    }
  }
  st.requests = requests;
  st.retries = retries;

  int dim = -1;
  for (size_t b = 0; b < batches.size(); ++b) {
    for (size_t k = 0; k < batches[b].size(); ++k) {
      auto& v = results[b][k];
      if (dim < 0) dim = static_cast<int>(v.size());
      if (static_cast<int>(v.size()) != dim || dim == 0) {
        throw DataError("provider returned inconsistent vector dimensions");
      }
      table.rows.emplace(batches[b][k]->message_id, std::move(v));
    }
  }
  if (config.expected_dim && *config.expected_dim != dim) {
    throw DataError("provider returned dim " + std::to_string(dim) +
                    ", expected " + std::to_string(*config.expected_dim));
  }
  table.dim = dim;
  if (!cached.empty()) write_table_file(table, cached);
  return table;
}

}  // namespace asb
