#pragma once

#include <chrono>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "relkit/backend.hpp"
#include "relkit/digest.hpp"
#include "relkit/errors.hpp"
#include "relkit/wire.hpp"

namespace relkit {

/// Append-only request/response audit log, line-delimited JSON. Auth headers
/// never reach it.
class AuditLog {
 public:
  explicit AuditLog(const std::string& path) : out_(path, std::ios::app) {
    if (!out_) throw DatasetIoError("cannot open audit log: " + path);
  }

  void write(const std::string& prompt_digest, const std::string& sample_id, int status,
             const std::string& raw_response, double latency_ms, int attempts) {
    json j{{"prompt_digest", prompt_digest}, {"sample_id", sample_id},   {"status", status},
           {"raw_response", raw_response},   {"latency_ms", latency_ms}, {"attempts", attempts}};
    std::lock_guard<std::mutex> lock(mutex_);
    out_ << j.dump() << '\n';
    out_.flush();
  }

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

/// Chat-completions client with exponential backoff on transient failures
/// (connect errors, timeouts, 429, 5xx). Safe for concurrent use; each call
/// owns its connection.
class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(BackendConfig cfg, AuditLog* audit = nullptr)
      : cfg_(std::move(cfg)), audit_(audit) {
    validate_backend_config(cfg_);
    endpoint_ = wire::parse_endpoint(cfg_.endpoint_url);
  }

  std::string complete(const ConversationPrompt& prompt, const std::string& sample_id) override {
    const std::string body = wire::build_request_body(prompt, cfg_).dump();
    const std::string digest = hex64(fnv1a64(body));
    const auto started = std::chrono::steady_clock::now();

    std::string last_error;
    bool last_was_timeout = false;
    const int attempts_allowed = cfg_.max_retries + 1;
    for (int attempt = 1; attempt <= attempts_allowed; ++attempt) {
      if (attempt > 1) {
        const auto delay = std::chrono::milliseconds(
            static_cast<long long>(cfg_.retry_backoff_ms) << (attempt - 2));
        std::this_thread::sleep_for(delay);
      }
      httplib::Client client(endpoint_.base);
      client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_s));
      client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_s));
      client.set_write_timeout(std::chrono::duration<double>(cfg_.timeout_s));
      httplib::Headers headers;
      if (cfg_.auth_token) headers.emplace("Authorization", "Bearer " + *cfg_.auth_token);

      auto res = client.Post(endpoint_.path, headers, body, "application/json");
      if (!res) {
        const auto err = res.error();
        last_was_timeout = err == httplib::Error::ConnectionTimeout ||
                           err == httplib::Error::Read || err == httplib::Error::Write;
        last_error = httplib::to_string(err);
        continue;
      }
      if (res->status >= 200 && res->status < 300) {
        const double latency = elapsed_ms(started);
        const std::string text = wire::extract_assistant_text(res->body);
        if (audit_) audit_->write(digest, sample_id, res->status, res->body, latency, attempt);
        return text;
      }
      if (res->status == 429 || res->status >= 500) {
        last_was_timeout = false;
        last_error = "http status " + std::to_string(res->status);
        continue;
      }
      if (audit_) audit_->write(digest, sample_id, res->status, res->body, elapsed_ms(started), attempt);
      throw HttpError(res->status, res->body);
    }
    if (audit_) audit_->write(digest, sample_id, 0, last_error, elapsed_ms(started), attempts_allowed);
    if (last_was_timeout) throw TimeoutError("timed out after " +
                                             std::to_string(attempts_allowed) + " attempt(s)");
    throw ExhaustedRetriesError(attempts_allowed, last_error);
  }

  std::string name() const override { return cfg_.model_name; }

 private:
  static double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }

  BackendConfig cfg_;
  wire::Endpoint endpoint_;
  AuditLog* audit_;
};

/// Backend factory honoring mock: endpoints; http(s) URLs get the real client.
inline std::unique_ptr<ChatBackend> make_backend(const BackendConfig& cfg,
                                                 AuditLog* audit = nullptr) {
  if (auto mock = make_mock_backend(cfg.endpoint_url)) return mock;
  return std::make_unique<HttpChatBackend>(cfg, audit);
}

}  // namespace relkit
