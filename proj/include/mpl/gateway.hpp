#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mpl/core.hpp"
#include "mpl/prompt.hpp"

namespace mpl {

// Client settings for a chat-completions compatible endpoint. The request
// goes to `{endpoint}/chat/completions`; the bearer token is read from
// MPL_API_KEY when `api_key` is empty.
struct GatewayConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1";
  std::string model = "mpl";
  int max_tokens = 512;
  double temperature = 0.0;
  double timeout_seconds = 60.0;
  std::size_t max_concurrent = 4;
  std::size_t max_attempts = 3;
  double backoff_base_seconds = 1.0;
  std::string api_key;

  void validate() const;
};

class TransportError : public Error {
 public:
  enum class Kind { Timeout, ConnectionRefused, HttpStatus, BadResponse };

  TransportError(Kind kind, std::string message, std::vector<std::string> attempts, int status = 0);

  Kind kind() const { return kind_; }
  int status() const { return status_; }
  const std::vector<std::string>& attempts() const { return attempts_; }

 private:
  Kind kind_;
  int status_;
  std::vector<std::string> attempts_;
};

struct RemoteCompletion {
  std::string text;
  std::vector<std::string> attempts;  // one line per attempt, last one "ok"
};

// Retries timeouts, refused connections, 429 and 5xx up to max_attempts,
// sleeping base * 2^(n-1) seconds after the n-th failure. Other non-2xx
// statuses fail at once with the response body in the message.
RemoteCompletion complete_remote(const CodePrompt& prompt, const GatewayConfig& cfg);

// Runs the prompts with at most cfg.max_concurrent requests in flight.
// Results are in input order. If any prompt fails, the first failure (by
// input position) is rethrown after all workers finish.
std::vector<std::string> complete_remote_batch(std::span<const CodePrompt> prompts,
                                               const GatewayConfig& cfg);

// Request body sent for one prompt.
json chat_request_body(const CodePrompt& prompt, const GatewayConfig& cfg);

}  // namespace mpl
