#include <doctest.h>

#include <cstdlib>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "transagent/chat_client.hpp"

using namespace transagent::chat;
using json = nlohmann::json;

namespace {

class FakeTransport final : public HttpTransport {
 public:
  mutable std::vector<HttpRequest> seen;
  HttpResponse canned;

  explicit FakeTransport(HttpResponse r) : canned(std::move(r)) {}
  HttpResponse post(const HttpRequest& request) const override {
    seen.push_back(request);
    return canned;
  }
};

std::string reply_body(const std::string& content) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}
      .dump();
}

std::string header(const HttpRequest& r, const std::string& name) {
  for (const auto& [k, v] : r.headers) {
    if (k == name) return v;
  }
  return {};
}

// Local chat endpoint on an ephemeral port.
struct LocalServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;

  LocalServer() {
    server.Post("/v1/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
      const json body = json::parse(req.body);
      res.set_content(reply_body(" echo:" + body["messages"][0]["content"].get<std::string>() + "\n"),
                      "application/json");
    });
    server.Post("/broken/v1/chat/completions",
                [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    server.Post("/slow/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1500));
      res.set_content(reply_body("late"), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LocalServer() {
    server.stop();
    thread.join();
  }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port); }
};

}  // namespace

TEST_CASE("config validation") {
  const auto check = [](std::string endpoint, std::string model, int timeout_ms = 1000) {
    ChatClientConfig{std::move(endpoint), std::move(model), std::chrono::milliseconds(timeout_ms)}.validate();
  };
  CHECK_NOTHROW(check("http://localhost:8080", "m"));
  CHECK_NOTHROW(check("https://api.example.com/base/", "m"));
  CHECK_THROWS_AS(check("localhost:8080", "m"), ConfigError);
  CHECK_THROWS_AS(check("ftp://host", "m"), ConfigError);
  CHECK_THROWS_AS(check("http://", "m"), ConfigError);
  CHECK_THROWS_AS(check("http://host", ""), ConfigError);
  CHECK_THROWS_AS(check("http://host", "m", 0), ConfigError);
  const ChatClientConfig bad{"nope", "m"};
  CHECK_THROWS_AS(ChatClient{bad}, ConfigError);
}

TEST_CASE("request shape") {
  auto fake = std::make_shared<FakeTransport>(HttpResponse{200, reply_body("  salut \n")});
  ChatClientConfig cfg{"http://llm.test/api//", "tiny-model", std::chrono::milliseconds(1234),
                       "TRANSAGENT_TEST_TOKEN_UNSET"};
  ::unsetenv("TRANSAGENT_TEST_TOKEN_UNSET");
  const ChatClient client(cfg, fake);
  CHECK(client.completions_url() == "http://llm.test/api/v1/chat/completions");
  CHECK(client.complete("hello") == "salut");

  REQUIRE(fake->seen.size() == 1);
  const HttpRequest& r = fake->seen[0];
  CHECK(r.url == "http://llm.test/api/v1/chat/completions");
  CHECK(r.timeout == std::chrono::milliseconds(1234));
  CHECK(header(r, "Content-Type") == "application/json");
  CHECK(header(r, "Authorization").empty());
  const json body = json::parse(r.body);
  CHECK(body["model"] == "tiny-model");
  CHECK(body["temperature"] == 0);
  REQUIRE(body["messages"].size() == 1);
  CHECK(body["messages"][0]["role"] == "user");
  CHECK(body["messages"][0]["content"] == "hello");
}

TEST_CASE("bearer token comes from the environment") {
  auto fake = std::make_shared<FakeTransport>(HttpResponse{200, reply_body("ok")});
  ::setenv("TRANSAGENT_TEST_TOKEN", "s3cret", 1);
  const ChatClient client(ChatClientConfig{"http://llm.test", "m", std::chrono::seconds(1),
                                           "TRANSAGENT_TEST_TOKEN"},
                          fake);
  client.complete("x");
  ::unsetenv("TRANSAGENT_TEST_TOKEN");
  CHECK(header(fake->seen.at(0), "Authorization") == "Bearer s3cret");
}

TEST_CASE("status and body errors") {
  const ChatClientConfig cfg{"http://llm.test", "m"};
  try {
    ChatClient(cfg, std::make_shared<FakeTransport>(HttpResponse{500, "oops"})).complete("x");
    FAIL("expected status error");
  } catch (const HttpStatusError& e) {
    CHECK(e.status() == 500);
    CHECK(e.endpoint() == "http://llm.test/v1/chat/completions");
    CHECK(std::string(e.what()).find("http://llm.test") != std::string::npos);
  }
  CHECK_THROWS_AS(ChatClient(cfg, std::make_shared<FakeTransport>(HttpResponse{302, ""})).complete("x"),
                  HttpStatusError);

  const ChatClient client(cfg, std::make_shared<FakeTransport>(HttpResponse{200, ""}));
  CHECK_THROWS_AS(client.complete("x"), MalformedResponseError);
  CHECK_THROWS_AS(client.parse_reply("not json"), MalformedResponseError);
  CHECK_THROWS_AS(client.parse_reply("{}"), MalformedResponseError);
  CHECK_THROWS_AS(client.parse_reply(R"({"choices":[]})"), MalformedResponseError);
  CHECK_THROWS_AS(client.parse_reply(R"({"choices":[{"message":{}}]})"), MalformedResponseError);
  CHECK_THROWS_AS(client.parse_reply(R"({"choices":[{"message":{"content":7}}]})"),
                  MalformedResponseError);
  CHECK(client.parse_reply(R"({"choices":[{"message":{"content":"\thi "}}]})") == "hi");
}

TEST_CASE("talks to a live local endpoint") {
  LocalServer srv;
  const ChatClient ok(ChatClientConfig{srv.base(), "m", std::chrono::seconds(5)});
  CHECK(ok.complete("ping") == "echo:ping");

  const ChatClient broken(ChatClientConfig{srv.base() + "/broken", "m", std::chrono::seconds(5)});
  CHECK_THROWS_AS(broken.complete("ping"), HttpStatusError);

  const ChatClient slow(ChatClientConfig{srv.base() + "/slow", "m", std::chrono::milliseconds(300)});
  CHECK_THROWS_AS(slow.complete("ping"), TimeoutError);
}

TEST_CASE("connection refused is a transport error") {
  // Bind an ephemeral port, then close it so nothing listens there.
  int port = 0;
  {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    port = ntohs(addr.sin_port);
    ::close(fd);
  }
  const ChatClient client(
      ChatClientConfig{"http://127.0.0.1:" + std::to_string(port), "m", std::chrono::seconds(2)});
  try {
    client.complete("x");
    FAIL("expected transport failure");
  } catch (const TransportError& e) {
    CHECK(e.endpoint().find("127.0.0.1") != std::string::npos);
  } catch (const TimeoutError& e) {
    FAIL("refused connection reported as timeout: " << std::string(e.what()));
  }
}
