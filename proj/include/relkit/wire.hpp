#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "relkit/backend.hpp"
#include "relkit/errors.hpp"
#include "relkit/prompt.hpp"

namespace relkit {

// Pure request/response plumbing for the chat-completions wire protocol.
// Kept free of any socket code so conformance is testable in isolation.

namespace wire {

inline std::string base64_encode(const std::string& bytes) {
  static const char* table = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                      static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out.push_back(table[(v >> 6) & 63]);
    out.push_back(table[v & 63]);
    i += 3;
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    std::uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out.append("==");
  } else if (rest == 2) {
    std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out.push_back(table[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

inline std::string mime_for(const std::string& uri) {
  auto dot = uri.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : uri.substr(dot + 1);
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == "png") return "image/png";
  if (ext == "jpg" || ext == "jpeg") return "image/jpeg";
  if (ext == "gif") return "image/gif";
  if (ext == "webp") return "image/webp";
  if (ext == "bmp") return "image/bmp";
  return "application/octet-stream";
}

/// http(s) URIs pass through; local files are inlined as base64 data URIs.
inline std::string image_url_for(const MediaRef& image) {
  if (image.uri.rfind("http://", 0) == 0 || image.uri.rfind("https://", 0) == 0 ||
      image.uri.rfind("data:", 0) == 0)
    return image.uri;
  std::ifstream in(image.uri, std::ios::binary);
  if (!in) throw ImageLoadError(image.uri);
  std::ostringstream buf;
  buf << in.rdbuf();
  return "data:" + mime_for(image.uri) + ";base64," + base64_encode(buf.str());
}

inline json text_part(const std::string& text) { return json{{"type", "text"}, {"text", text}}; }

inline json image_part(const MediaRef& image) {
  // resolved before the json literal: a throw inside an initializer list
  // leaks the partially built temporaries
  const std::string url = image_url_for(image);
  return json{{"type", "image_url"}, {"image_url", {{"url", url}}}};
}

/// Chat-completions body mirroring the prompt's turn order. Internal
/// Human/Assistant roles map to user/assistant. Identical prompts yield
/// byte-identical bodies (auth lives in headers, not here).
inline json build_request_body(const ConversationPrompt& prompt, const BackendConfig& cfg) {
  json messages = json::array();
  messages.push_back({{"role", "user"}, {"content", json::array({text_part(prompt.instruction)})}});
  for (const auto& turn : prompt.context_turns) {
    json content = json::array();
    if (!turn.image.uri.empty()) content.push_back(image_part(turn.image));
    content.push_back(text_part(turn.text.body));
    messages.push_back({{"role", "user"}, {"content", std::move(content)}});
    messages.push_back({{"role", "assistant"}, {"content", answer_text(turn.answer)}});
  }
  json query = json::array();
  if (!prompt.query_image.uri.empty()) query.push_back(image_part(prompt.query_image));
  query.push_back(text_part(prompt.query_text.body));
  messages.push_back({{"role", "user"}, {"content", std::move(query)}});
  return json{{"model", cfg.model_name},
              {"messages", std::move(messages)},
              {"temperature", cfg.temperature},
              {"max_tokens", cfg.max_tokens}};
}

/// Assistant message text, verbatim, from a chat-completions response.
inline std::string extract_assistant_text(const std::string& response_body) {
  json j;
  try {
    j = json::parse(response_body);
  } catch (const json::exception& e) {
    throw BackendError(std::string("unparseable response: ") + e.what());
  }
  try {
    const json& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    // content-part arrays: concatenate the text parts
    std::string out;
    for (const auto& part : content)
      if (part.value("type", "") == "text") out += part.value("text", "");
    return out;
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed response: ") + e.what());
  }
}

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // /v1/chat/completions
};

inline Endpoint parse_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint_url not absolute: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace wire
}  // namespace relkit
