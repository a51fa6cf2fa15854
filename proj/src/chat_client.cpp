#include "transagent/chat_client.hpp"

#include <cctype>
#include <cstdlib>
#include <regex>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace transagent::chat {

namespace {

using json = nlohmann::json;

struct SplitUrl {
  std::string scheme_host_port;
  std::string path;
};

// scheme://authority[/path]; the authority must be non-empty.
const std::regex& url_pattern() {
  static const std::regex pattern(R"(^(https?)://([^/?#\s]+)([^?#\s]*)$)", std::regex::icase);
  return pattern;
}

SplitUrl split_url(const std::string& url) {
  std::smatch m;
  if (!std::regex_match(url, m, url_pattern())) {
    throw ConfigError("not an absolute http(s) URL: '" + url + "'");
  }
  std::string path = m[3].str();
  if (path.empty()) path = "/";
  return {m[1].str() + "://" + m[2].str(), path};
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

void ChatClientConfig::validate() const {
  split_url(endpoint);
  if (model.empty()) throw ConfigError("chat client needs a model name");
  if (timeout.count() <= 0) throw ConfigError("chat client timeout must be positive");
}

HttpResponse HttplibTransport::post(const HttpRequest& request) const {
  const SplitUrl url = split_url(request.url);
  httplib::Client client(url.scheme_host_port);
  client.set_connection_timeout(request.timeout);
  client.set_read_timeout(request.timeout);
  client.set_write_timeout(request.timeout);

  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [name, value] : request.headers) {
    if (lower(name) == "content-type") {
      content_type = value;
    } else {
      headers.emplace(name, value);
    }
  }

  const auto started = std::chrono::steady_clock::now();
  auto result = client.Post(url.path, headers, request.body, content_type);
  if (!result) {
    const auto err = result.error();
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= request.timeout)) {
      throw TimeoutError("chat request timed out after " + std::to_string(request.timeout.count()) + " ms",
                         request.url);
    }
    throw TransportError("chat request failed: " + httplib::to_string(err), request.url);
  }
  return HttpResponse{result->status, result->body};
}

ChatClient::ChatClient(ChatClientConfig config, std::shared_ptr<const HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  if (!transport_) transport_ = std::make_shared<HttplibTransport>();
}

std::string ChatClient::completions_url() const {
  std::string base = config_.endpoint;
  while (!base.empty() && base.back() == '/') base.pop_back();
  return base + "/v1/chat/completions";
}

std::string ChatClient::request_body(const std::string& prompt) const {
  const json body = {{"model", config_.model},
                     {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                     {"temperature", 0}};
  return body.dump();
}

std::string ChatClient::parse_reply(const std::string& body) const {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error&) {
    throw MalformedResponseError("chat response is not JSON", completions_url());
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty()) {
    throw MalformedResponseError("chat response has no choices", completions_url());
  }
  const json& choice = doc["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object() ||
      !choice["message"].contains("content") || !choice["message"]["content"].is_string()) {
    throw MalformedResponseError("chat response lacks choices[0].message.content", completions_url());
  }
  return trim(choice["message"]["content"].get<std::string>());
}

std::string ChatClient::complete(const std::string& prompt) const {
  HttpRequest request{completions_url(), {}, request_body(prompt), config_.timeout};
  request.headers.emplace_back("Content-Type", "application/json");
  if (const char* token = std::getenv(config_.token_env.c_str()); token && *token) {
    request.headers.emplace_back("Authorization", std::string("Bearer ") + token);
  }
  const HttpResponse response = transport_->post(request);
  if (response.status < 200 || response.status > 299) {
    throw HttpStatusError(response.status, request.url);
  }
  return parse_reply(response.body);
}

}  // namespace transagent::chat
