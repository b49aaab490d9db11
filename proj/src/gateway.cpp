#include "mpl/gateway.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <optional>
#include <thread>

#include <httplib.h>

namespace mpl {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // no trailing slash
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error("endpoint '" + url + "' has no scheme");
  const auto path_begin = url.find('/', scheme_end + 3);
  Endpoint e;
  if (path_begin == std::string::npos) {
    e.origin = url;
  } else {
    e.origin = url.substr(0, path_begin);
    e.path = url.substr(path_begin);
  }
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

std::string api_key(const GatewayConfig& cfg) {
  if (!cfg.api_key.empty()) return cfg.api_key;
  if (const char* env = std::getenv("MPL_API_KEY")) return env;
  return {};
}

bool transient_status(int status) { return status == 429 || status >= 500; }

}  // namespace

void GatewayConfig::validate() const {
  if (max_concurrent < 1) throw Error("max_concurrent must be >= 1");
  if (max_attempts < 1) throw Error("max_attempts must be >= 1");
  if (temperature < 0) throw Error("temperature must be >= 0");
  if (timeout_seconds <= 0) throw Error("timeout must be positive");
  if (backoff_base_seconds < 0) throw Error("backoff base must be >= 0");
  split_endpoint(endpoint);
}

TransportError::TransportError(Kind kind, std::string message, std::vector<std::string> attempts,
                               int status)
    : Error([&] {
        std::string m = std::move(message);
        for (const auto& a : attempts) m += "\n  " + a;
        return m;
      }()),
      kind_(kind),
      status_(status),
      attempts_(std::move(attempts)) {}

json chat_request_body(const CodePrompt& prompt, const GatewayConfig& cfg) {
  return {{"model", cfg.model},
          {"messages", json::array({{{"role", "user"}, {"content", prompt.text}}})},
          {"max_tokens", cfg.max_tokens},
          {"temperature", cfg.temperature}};
}

RemoteCompletion complete_remote(const CodePrompt& prompt, const GatewayConfig& cfg) {
  cfg.validate();
  const Endpoint ep = split_endpoint(cfg.endpoint);
  const std::string body = chat_request_body(prompt, cfg).dump();
  const std::string key = api_key(cfg);

  httplib::Client client(ep.origin);
  const auto secs = static_cast<time_t>(cfg.timeout_seconds);
  const auto usecs = static_cast<time_t>((cfg.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

  RemoteCompletion out;
  TransportError::Kind last_kind = TransportError::Kind::ConnectionRefused;
  int last_status = 0;
  for (std::size_t attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    if (attempt > 1 && cfg.backoff_base_seconds > 0) {
      const double wait = cfg.backoff_base_seconds * std::pow(2.0, static_cast<double>(attempt - 2));
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    }
    const std::string tag = "attempt " + std::to_string(attempt) + ": ";
    auto res = client.Post(ep.path + "/chat/completions", headers, body, "application/json");
    if (!res) {
      const auto err = res.error();
      const bool timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                           err == httplib::Error::Write;
      last_kind = timeout ? TransportError::Kind::Timeout : TransportError::Kind::ConnectionRefused;
      out.attempts.push_back(tag + (timeout ? "timeout (" : "connection failed (") +
                             httplib::to_string(err) + ")");
      continue;
    }
    last_status = res->status;
    if (res->status < 200 || res->status >= 300) {
      out.attempts.push_back(tag + "HTTP " + std::to_string(res->status));
      last_kind = TransportError::Kind::HttpStatus;
      if (!transient_status(res->status)) {
        throw TransportError(TransportError::Kind::HttpStatus,
                             "HTTP " + std::to_string(res->status) + " from " + cfg.endpoint +
                                 ": " + res->body,
                             out.attempts, res->status);
      }
      continue;
    }
    try {
      const auto reply = json::parse(res->body);
      out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
      out.attempts.push_back(tag + "bad response");
      throw TransportError(TransportError::Kind::BadResponse,
                           "unreadable completion from " + cfg.endpoint + ": " + e.what() +
                               "; body: " + res->body,
                           out.attempts, res->status);
    }
    out.attempts.push_back(tag + "ok");
    return out;
  }
  throw TransportError(last_kind,
                       "giving up on " + cfg.endpoint + " after " +
                           std::to_string(cfg.max_attempts) + " attempts",
                       out.attempts, last_status);
}

std::vector<std::string> complete_remote_batch(std::span<const CodePrompt> prompts,
                                               const GatewayConfig& cfg) {
  cfg.validate();
  std::vector<std::string> results(prompts.size());
  std::vector<std::exception_ptr> errors(prompts.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::min(cfg.max_concurrent, prompts.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < prompts.size(); i = next++) {
          try {
            results[i] = complete_remote(prompts[i], cfg).text;
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace mpl
