#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "humancorpus/config.hpp"
#include "humancorpus/record.hpp"

namespace humancorpus {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0;
};

/// {"model", "messages": [{"role", "content"}], "temperature"}
Json to_wire(const ChatRequest& request);
ChatRequest request_from_wire(const Json& j);

/// choices[0].message.content, or nullopt if the shape does not match.
std::optional<std::string> content_from_wire(const Json& response);
Json response_to_wire(std::string_view content, std::string_view model);

enum class TransportStatus : std::uint8_t { kOk, kTimeout, kError };

struct TransportResult {
  TransportStatus status = TransportStatus::kOk;
  std::string content;
  std::string detail;
};

/// One chat round trip. Implementations must be safe to call concurrently.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual TransportResult send(const ChatRequest& request,
                               std::chrono::milliseconds timeout) = 0;
};

/// POSTs to <base_url>/v1/chat/completions (or <base_url>/chat/completions
/// when base_url already ends in /v1).
class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(std::string base_url, std::string api_key = {});
  TransportResult send(const ChatRequest& request, std::chrono::milliseconds timeout) override;

 private:
  std::string origin_;
  std::string path_;
  std::string api_key_;
};

/// Offline transport. Responses are a pure function of the request content
/// and how many times that content has been sent, so runs are reproducible
/// regardless of scheduling. Tracks concurrent callers and flags any excess
/// over `max_concurrency`.
class MockChatTransport : public ChatTransport {
 public:
  enum class Mode : std::uint8_t { kEcho, kUpper, kCanned, kCustom };

  struct Faults {
    double timeout_rate = 0;
    double refusal_rate = 0;
    double empty_rate = 0;
    std::uint64_t seed = 0;
    std::string refusal_text = "I'm sorry, but I can't help with that.";
  };

  using Responder = std::function<TransportResult(const ChatRequest&)>;

  explicit MockChatTransport(Mode mode = Mode::kEcho);
  /// kCanned: responses keyed by fnv1a64 of the last user message; misses
  /// fall back to echo.
  explicit MockChatTransport(std::unordered_map<std::uint64_t, std::string> canned);
  explicit MockChatTransport(Responder responder);

  /// "echo" or "upper"; throws Error(kConfig) otherwise.
  static std::unique_ptr<MockChatTransport> from_name(std::string_view name);

  void set_faults(const Faults& faults) { faults_ = faults; }
  void set_latency(std::chrono::microseconds latency) { latency_ = latency; }
  void set_max_concurrency(int limit) { limit_ = limit; }

  TransportResult send(const ChatRequest& request, std::chrono::milliseconds timeout) override;

  std::uint64_t calls() const noexcept { return calls_.load(); }
  int peak_concurrency() const noexcept { return peak_.load(); }
  bool concurrency_violated() const noexcept { return violated_.load(); }

 private:
  std::uint64_t next_attempt(const std::string& content);

  Mode mode_;
  std::unordered_map<std::uint64_t, std::string> canned_;
  Responder responder_;
  Faults faults_;
  std::chrono::microseconds latency_{0};
  int limit_ = 0;  // 0: unchecked
  std::atomic<int> active_{0};
  std::atomic<int> peak_{0};
  std::atomic<bool> violated_{false};
  std::atomic<std::uint64_t> calls_{0};
  std::mutex attempts_mu_;
  std::unordered_map<std::string, std::uint64_t> attempts_;
};

enum class LlmFailure : std::uint8_t {
  kNone,
  kTimeout,
  kTransport,
  kEmpty,
  kRefusal,
  kOversized,
};

std::string_view to_string(LlmFailure f) noexcept;

struct LlmResult {
  std::string text;
  LlmFailure failure = LlmFailure::kNone;
  int attempts = 0;
  std::string detail;

  bool ok() const noexcept { return failure == LlmFailure::kNone; }
};

/// Exponential backoff with equal jitter: attempt k waits a uniform draw from
/// [d/2, d] with d = min(max, initial * 2^k). Deterministic per key.
std::chrono::milliseconds backoff_delay(const LlmEndpointConfig& cfg, int retry_index,
                                        std::uint64_t jitter_seed);

/// Retrying, concurrency-bounded client over a ChatTransport.
///
/// Every call ends in exactly one of: success, a classified failure after the
/// retry budget is spent, or an immediate non-retryable failure. Timeouts,
/// transport errors and empty responses retry up to `retry_budget` times;
/// a refusal retries once and then fails.
class LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  LlmClient(std::shared_ptr<ChatTransport> transport, LlmEndpointConfig cfg,
            std::vector<std::string> refusal_patterns, Sleeper sleeper = {});

  /// `key` seeds the backoff jitter (use the record id).
  LlmResult complete(std::vector<ChatMessage> messages, std::string_view key,
                     bool check_refusal = true);

  const LlmEndpointConfig& config() const noexcept { return cfg_; }
  int peak_in_flight() const noexcept { return peak_; }

 private:
  TransportResult send_bounded(const ChatRequest& request);

  std::shared_ptr<ChatTransport> transport_;
  LlmEndpointConfig cfg_;
  std::vector<std::string> refusal_patterns_;
  Sleeper sleeper_;
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  int peak_ = 0;
};

/// Transport chosen by the endpoint config: the mock when `mock` is set,
/// otherwise HTTP.
std::shared_ptr<ChatTransport> make_transport(const LlmEndpointConfig& cfg);

}  // namespace humancorpus
