#include "humancorpus/llm_client.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <thread>

#include "humancorpus/error.hpp"
#include "humancorpus/filter.hpp"
#include "humancorpus/rng.hpp"

namespace humancorpus {

Json to_wire(const ChatRequest& request) {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back(Json{{"role", m.role}, {"content", m.content}});
  }
  return Json{{"model", request.model},
              {"messages", std::move(messages)},
              {"temperature", request.temperature}};
}

ChatRequest request_from_wire(const Json& j) {
  if (!j.is_object() || !j.contains("messages") || !j["messages"].is_array()) {
    throw Error(ErrorCode::kParse, "chat request: missing 'messages' array");
  }
  ChatRequest r;
  r.model = j.value("model", std::string{});
  r.temperature = j.value("temperature", 0.0);
  for (const auto& m : j["messages"]) {
    if (!m.is_object() || !m.contains("role") || !m.contains("content") ||
        !m["role"].is_string() || !m["content"].is_string()) {
      throw Error(ErrorCode::kParse, "chat request: malformed message");
    }
    r.messages.push_back({m["role"].get<std::string>(), m["content"].get<std::string>()});
  }
  return r;
}

std::optional<std::string> content_from_wire(const Json& response) {
  if (!response.is_object()) return std::nullopt;
  auto choices = response.find("choices");
  if (choices == response.end() || !choices->is_array() || choices->empty()) {
    return std::nullopt;
  }
  const Json& first = (*choices)[0];
  if (!first.is_object()) return std::nullopt;
  auto message = first.find("message");
  if (message == first.end() || !message->is_object()) return std::nullopt;
  auto content = message->find("content");
  if (content == message->end()) return std::nullopt;
  if (content->is_null()) return std::string{};
  if (!content->is_string()) return std::nullopt;
  return content->get<std::string>();
}

Json response_to_wire(std::string_view content, std::string_view model) {
  return Json{{"object", "chat.completion"},
              {"model", model},
              {"choices", Json::array({Json{{"index", 0},
                                            {"message", {{"role", "assistant"},
                                                         {"content", content}}},
                                            {"finish_reason", "stop"}}})}};
}

// ---------------------------------------------------------------------------
// Mock transport

namespace {

std::string last_user_content(const ChatRequest& r) {
  for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  return {};
}

std::string ascii_upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

MockChatTransport::MockChatTransport(Mode mode) : mode_(mode) {
  if (mode == Mode::kCustom) {
    throw Error(ErrorCode::kInvalidArgument, "custom mock needs a responder");
  }
}

MockChatTransport::MockChatTransport(std::unordered_map<std::uint64_t, std::string> canned)
    : mode_(Mode::kCanned), canned_(std::move(canned)) {}

MockChatTransport::MockChatTransport(Responder responder)
    : mode_(Mode::kCustom), responder_(std::move(responder)) {
  if (!responder_) throw Error(ErrorCode::kInvalidArgument, "empty mock responder");
}

std::unique_ptr<MockChatTransport> MockChatTransport::from_name(std::string_view name) {
  if (name == "echo") return std::make_unique<MockChatTransport>(Mode::kEcho);
  if (name == "upper") return std::make_unique<MockChatTransport>(Mode::kUpper);
  throw Error(ErrorCode::kConfig, "unknown mock transport '" + std::string(name) + "'");
}

std::uint64_t MockChatTransport::next_attempt(const std::string& content) {
  std::lock_guard lock(attempts_mu_);
  return attempts_[content]++;
}

TransportResult MockChatTransport::send(const ChatRequest& request,
                                        std::chrono::milliseconds /*timeout*/) {
  const int now = active_.fetch_add(1) + 1;
  int peak = peak_.load();
  while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
  }
  if (limit_ > 0 && now > limit_) violated_ = true;
  calls_.fetch_add(1);

  struct Leave {
    std::atomic<int>& a;
    ~Leave() { a.fetch_sub(1); }
  } leave{active_};

  if (latency_.count() > 0) std::this_thread::sleep_for(latency_);

  const std::string content = last_user_content(request);
  const auto attempt = next_attempt(content);
  const double u = unit_hash(faults_.seed, content + '\x1f' + std::to_string(attempt));
  if (u < faults_.timeout_rate) {
    return {TransportStatus::kTimeout, {}, "injected timeout"};
  }
  if (u < faults_.timeout_rate + faults_.refusal_rate) {
    return {TransportStatus::kOk, faults_.refusal_text, {}};
  }
  if (u < faults_.timeout_rate + faults_.refusal_rate + faults_.empty_rate) {
    return {TransportStatus::kOk, {}, {}};
  }

  switch (mode_) {
    case Mode::kEcho:
      return {TransportStatus::kOk, content, {}};
    case Mode::kUpper:
      return {TransportStatus::kOk, ascii_upper(content), {}};
    case Mode::kCanned: {
      auto it = canned_.find(fnv1a64(content));
      return {TransportStatus::kOk, it == canned_.end() ? content : it->second, {}};
    }
    case Mode::kCustom:
      return responder_(request);
  }
  return {TransportStatus::kError, {}, "unreachable"};
}

// ---------------------------------------------------------------------------
// Client

std::string_view to_string(LlmFailure f) noexcept {
  switch (f) {
    case LlmFailure::kNone: return "none";
    case LlmFailure::kTimeout: return "timeout";
    case LlmFailure::kTransport: return "transport";
    case LlmFailure::kEmpty: return "empty";
    case LlmFailure::kRefusal: return "refusal";
    case LlmFailure::kOversized: return "oversized";
  }
  return "unknown";
}

std::chrono::milliseconds backoff_delay(const LlmEndpointConfig& cfg, int retry_index,
                                        std::uint64_t jitter_seed) {
  double d = static_cast<double>(std::max(cfg.backoff_initial_ms, 0));
  for (int i = 0; i < retry_index && d < cfg.backoff_max_ms; ++i) d *= 2;
  d = std::min(d, static_cast<double>(std::max(cfg.backoff_max_ms, 0)));
  const double u = unit_hash(jitter_seed, std::to_string(retry_index));
  return std::chrono::milliseconds(static_cast<std::int64_t>(d / 2 + u * d / 2));
}

LlmClient::LlmClient(std::shared_ptr<ChatTransport> transport, LlmEndpointConfig cfg,
                     std::vector<std::string> refusal_patterns, Sleeper sleeper)
    : transport_(std::move(transport)),
      cfg_(std::move(cfg)),
      refusal_patterns_(std::move(refusal_patterns)),
      sleeper_(std::move(sleeper)) {
  if (!transport_) throw Error(ErrorCode::kInvalidArgument, "null chat transport");
  if (cfg_.max_in_flight < 1) {
    throw Error(ErrorCode::kConfig, "llm.max_in_flight must be >= 1");
  }
  if (cfg_.retry_budget < 0) throw Error(ErrorCode::kConfig, "llm.retry_budget must be >= 0");
  if (refusal_patterns_.empty()) {
    throw Error(ErrorCode::kConfig, "refusal pattern list is empty");
  }
  if (!sleeper_) {
    sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

TransportResult LlmClient::send_bounded(const ChatRequest& request) {
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < cfg_.max_in_flight; });
    ++in_flight_;
    peak_ = std::max(peak_, in_flight_);
  }
  TransportResult r;
  try {
    r = transport_->send(request, std::chrono::milliseconds(cfg_.timeout_ms));
  } catch (const std::exception& e) {
    r = {TransportStatus::kError, {}, e.what()};
  }
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
  return r;
}

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

LlmResult LlmClient::complete(std::vector<ChatMessage> messages, std::string_view key,
                              bool check_refusal) {
  ChatRequest request{cfg_.model, std::move(messages), cfg_.temperature};
  const std::uint64_t jitter_seed = fnv1a64(key);

  LlmResult result;
  int retries = 0;
  int refusals = 0;
  for (;;) {
    ++result.attempts;
    TransportResult r = send_bounded(request);
    result.detail = r.detail;
    if (r.status == TransportStatus::kTimeout) {
      result.failure = LlmFailure::kTimeout;
    } else if (r.status == TransportStatus::kError) {
      result.failure = LlmFailure::kTransport;
    } else {
      result.text = trim(r.content);
      if (result.text.empty()) {
        result.failure = LlmFailure::kEmpty;
      } else if (check_refusal && detect_refusal(result.text, refusal_patterns_)) {
        result.failure = LlmFailure::kRefusal;
        ++refusals;
      } else {
        result.failure = LlmFailure::kNone;
        result.detail.clear();
        return result;
      }
    }
    const bool may_retry =
        retries < cfg_.retry_budget &&
        !(result.failure == LlmFailure::kRefusal && refusals > 1);
    if (!may_retry) return result;
    sleeper_(backoff_delay(cfg_, retries, jitter_seed));
    ++retries;
  }
}

std::shared_ptr<ChatTransport> make_transport(const LlmEndpointConfig& cfg) {
  if (!cfg.mock.empty()) return MockChatTransport::from_name(cfg.mock);
  std::string key;
  if (!cfg.api_key_env.empty()) {
    if (const char* v = std::getenv(cfg.api_key_env.c_str())) key = v;
  }
  return std::make_shared<HttpChatTransport>(cfg.base_url, std::move(key));
}

}  // namespace humancorpus
