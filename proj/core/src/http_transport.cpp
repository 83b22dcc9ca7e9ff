#include <httplib.h>

#include "humancorpus/error.hpp"
#include "humancorpus/llm_client.hpp"

namespace humancorpus {

HttpChatTransport::HttpChatTransport(std::string base_url, std::string api_key)
    : api_key_(std::move(api_key)) {
  while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
  const auto scheme = base_url.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorCode::kConfig, "llm.base_url needs a scheme: '" + base_url + "'");
  }
  const auto slash = base_url.find('/', scheme + 3);
  origin_ = base_url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : base_url.substr(slash);
  if (prefix.size() >= 3 && prefix.compare(prefix.size() - 3, 3, "/v1") == 0) {
    path_ = prefix + "/chat/completions";
  } else {
    path_ = prefix + "/v1/chat/completions";
  }
}

TransportResult HttpChatTransport::send(const ChatRequest& request,
                                        std::chrono::milliseconds timeout) {
  httplib::Client client(origin_);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  if (!api_key_.empty()) client.set_bearer_token_auth(api_key_);

  const std::string body = to_wire(request).dump();
  auto res = client.Post(path_, body, "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout) {
      return {TransportStatus::kTimeout, {}, httplib::to_string(err)};
    }
    return {TransportStatus::kError, {}, httplib::to_string(err)};
  }
  if (res->status != 200) {
    return {TransportStatus::kError, {}, "HTTP " + std::to_string(res->status)};
  }
  Json parsed = Json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) {
    return {TransportStatus::kError, {}, "response is not JSON"};
  }
  auto content = content_from_wire(parsed);
  if (!content) return {TransportStatus::kError, {}, "response has no choices[0].message.content"};
  return {TransportStatus::kOk, std::move(*content), {}};
}

}  // namespace humancorpus
