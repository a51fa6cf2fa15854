#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "transagent/error.hpp"

namespace transagent::chat {

/// Failure talking to a chat-completion endpoint. Every subclass names the endpoint.
class RemoteError : public Error {
 public:
  RemoteError(const std::string& what, std::string endpoint)
      : Error(what + " [" + endpoint + "]"), endpoint_(std::move(endpoint)) {}
  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  std::string endpoint_;
};

class TransportError : public RemoteError {
 public:
  using RemoteError::RemoteError;
};

class TimeoutError : public RemoteError {
 public:
  using RemoteError::RemoteError;
};

class HttpStatusError : public RemoteError {
 public:
  HttpStatusError(int status, const std::string& endpoint)
      : RemoteError("chat endpoint answered HTTP " + std::to_string(status), endpoint),
        status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class MalformedResponseError : public RemoteError {
 public:
  using RemoteError::RemoteError;
};

/// Invalid ChatClientConfig (bad endpoint URL, empty model name).
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ChatClientConfig {
  std::string endpoint;  // absolute http(s) URL; "/v1/chat/completions" is appended
  std::string model;
  std::chrono::milliseconds timeout{std::chrono::seconds(30)};
  std::string token_env = "TRANSAGENT_LLM_TOKEN";

  /// Throws ConfigError unless the endpoint is an absolute http(s) URL and a model is named.
  void validate() const;
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{};
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// One blocking POST per call. Implementations throw TransportError or
/// TimeoutError; they never interpret the status code.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) const = 0;
};

/// cpp-httplib backed transport; a fresh connection per request.
class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const HttpRequest& request) const override;
};

/// Chat-completion client: POST {endpoint}/v1/chat/completions with a single
/// user message at temperature 0 and returns choices[0].message.content, trimmed.
class ChatClient {
 public:
  explicit ChatClient(ChatClientConfig config,
                      std::shared_ptr<const HttpTransport> transport = nullptr);

  std::string complete(const std::string& prompt) const;

  const ChatClientConfig& config() const noexcept { return config_; }
  std::string completions_url() const;
  /// JSON request body for `prompt`.
  std::string request_body(const std::string& prompt) const;
  /// Extracts the reply; throws MalformedResponseError.
  std::string parse_reply(const std::string& body) const;

 private:
  ChatClientConfig config_;
  std::shared_ptr<const HttpTransport> transport_;
};

}  // namespace transagent::chat
