#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "mpl/gateway.hpp"
#include "support/fixtures.hpp"

using namespace mpl;

namespace {

// Serves a scripted handler on a free loopback port for the lifetime of the object.
class StubServer {
 public:
  explicit StubServer(httplib::Server::Handler handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

// A loopback port that was bound (never listened on) and released.
int unused_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

std::string reply(const std::string& content) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

CodePrompt prompt(const std::string& id = "p") {
  CodePrompt p;
  p.text = "EntityList = ";
  p.instance_id = id;
  p.boundary = p.text.size();
  return p;
}

GatewayConfig fast_config(const std::string& endpoint) {
  GatewayConfig cfg;
  cfg.endpoint = endpoint;
  cfg.backoff_base_seconds = 0.0;
  cfg.timeout_seconds = 2.0;
  return cfg;
}

}  // namespace

TEST_SUITE("gateway") {

TEST_CASE("echo stub") {
  json seen;
  std::string auth;
  StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(reply("[]"), "application/json");
  });
  auto cfg = fast_config(server.endpoint());
  cfg.api_key = "secret";
  cfg.model = "m1";
  const auto out = complete_remote(prompt(), cfg);
  CHECK(out.text == "[]");
  CHECK(out.attempts.size() == 1);
  CHECK(seen["model"] == "m1");
  CHECK(seen["messages"][0]["role"] == "user");
  CHECK(seen["messages"][0]["content"] == "EntityList = ");
  CHECK(seen["temperature"] == 0.0);
  CHECK(seen["max_tokens"] == 512);
  CHECK(auth == "Bearer secret");
}

TEST_CASE("API key from the environment") {
  std::string auth;
  StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    res.set_content(reply("[]"), "application/json");
  });
  ::setenv("MPL_API_KEY", "from-env", 1);
  complete_remote(prompt(), fast_config(server.endpoint()));
  ::unsetenv("MPL_API_KEY");
  CHECK(auth == "Bearer from-env");
}

TEST_CASE("transient failures are retried") {
  std::atomic<int> calls{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    if (++calls <= 2) {
      res.status = 503;
      res.set_content("busy", "text/plain");
      return;
    }
    res.set_content(reply("[Entity(\"a\", \"X\")]"), "application/json");
  });
  auto cfg = fast_config(server.endpoint());
  cfg.max_attempts = 3;
  const auto out = complete_remote(prompt(), cfg);
  CHECK(out.text == "[Entity(\"a\", \"X\")]");
  CHECK(out.attempts.size() == 3);
  CHECK(calls == 3);
}

TEST_CASE("exhausted retries raise a transport error") {
  std::atomic<int> calls{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  auto cfg = fast_config(server.endpoint());
  cfg.max_attempts = 2;
  try {
    complete_remote(prompt(), cfg);
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.kind() == TransportError::Kind::HttpStatus);
    CHECK(e.attempts().size() == 2);
    CHECK(e.status() == 500);
  }
  CHECK(calls == 2);
}

TEST_CASE("client errors fail immediately with the body") {
  std::atomic<int> calls{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
    res.set_content("bad model name", "text/plain");
  });
  try {
    complete_remote(prompt(), fast_config(server.endpoint()));
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.status() == 400);
    CHECK(std::string(e.what()).find("bad model name") != std::string::npos);
  }
  CHECK(calls == 1);
}

TEST_CASE("timeout is distinguished from refused connections") {
  StubServer slow([&](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(800));
    res.set_content(reply("[]"), "application/json");
  });
  auto cfg = fast_config(slow.endpoint());
  cfg.timeout_seconds = 0.2;
  cfg.max_attempts = 1;
  try {
    complete_remote(prompt(), cfg);
    FAIL("expected a timeout");
  } catch (const TransportError& e) {
    CHECK(e.kind() == TransportError::Kind::Timeout);
  }

  // Grab a free port, then close it so nothing listens there.
  int dead_port = unused_port();
  auto refused = fast_config("http://127.0.0.1:" + std::to_string(dead_port) + "/v1");
  refused.max_attempts = 2;
  try {
    complete_remote(prompt(), refused);
    FAIL("expected a connection error");
  } catch (const TransportError& e) {
    CHECK(e.kind() == TransportError::Kind::ConnectionRefused);
    CHECK(e.attempts().size() == 2);
  }
}

TEST_CASE("malformed reply bodies") {
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"choices\": []}", "application/json");
  });
  try {
    complete_remote(prompt(), fast_config(server.endpoint()));
    FAIL("expected an error");
  } catch (const TransportError& e) {
    CHECK(e.kind() == TransportError::Kind::BadResponse);
  }
}

TEST_CASE("batch respects the concurrency bound and keeps order") {
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  std::atomic<int> requests{0};
  StubServer server([&](const httplib::Request& req, httplib::Response& res) {
    ++requests;
    const int now = ++in_flight;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    --in_flight;
    const auto body = json::parse(req.body);
    res.set_content(reply(body["messages"][0]["content"].get<std::string>() + "!"), "application/json");
  });
  auto cfg = fast_config(server.endpoint());
  cfg.max_concurrent = 3;
  std::vector<CodePrompt> prompts;
  for (int i = 0; i < 24; ++i) {
    auto p = prompt("p" + std::to_string(i));
    p.text = "prompt " + std::to_string(i);
    prompts.push_back(p);
  }
  const auto out = complete_remote_batch(prompts, cfg);
  REQUIRE(out.size() == prompts.size());
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == prompts[i].text + "!");
  CHECK(peak <= 3);
  CHECK(peak >= 2);
  CHECK(requests <= static_cast<int>(cfg.max_attempts * prompts.size()));
}

TEST_CASE("config validation") {
  GatewayConfig cfg;
  cfg.max_concurrent = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = GatewayConfig{};
  cfg.max_attempts = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = GatewayConfig{};
  cfg.temperature = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = GatewayConfig{};
  cfg.endpoint = "localhost:8000";
  CHECK_THROWS_AS(cfg.validate(), Error);
}

}
