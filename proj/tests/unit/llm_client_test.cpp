#include "humancorpus/llm_client.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "humancorpus/error.hpp"
#include "humancorpus/rng.hpp"

namespace hc = humancorpus;
using namespace std::chrono_literals;

namespace {

const std::vector<std::string> kPatterns{"i'm sorry", "i cannot"};

hc::LlmEndpointConfig fast_config() {
  hc::LlmEndpointConfig cfg;
  cfg.retry_budget = 3;
  cfg.backoff_initial_ms = 1;
  cfg.backoff_max_ms = 4;
  cfg.max_in_flight = 2;
  return cfg;
}

hc::LlmClient::Sleeper no_sleep() {
  return [](std::chrono::milliseconds) {};
}

std::vector<hc::ChatMessage> user(const std::string& text) { return {{"user", text}}; }

// Replies from a script, one entry per call.
std::shared_ptr<hc::MockChatTransport> scripted(std::vector<hc::TransportResult> script) {
  auto calls = std::make_shared<std::atomic<std::size_t>>(0);
  return std::make_shared<hc::MockChatTransport>(
      [script = std::move(script), calls](const hc::ChatRequest&) {
        const auto i = calls->fetch_add(1);
        return script[std::min(i, script.size() - 1)];
      });
}

}  // namespace

TEST(Wire, RequestRoundTrip) {
  hc::ChatRequest req{"m", {{"system", "be brief"}, {"user", "hi \"there\""}}, 0.3};
  const auto back = hc::request_from_wire(hc::Json::parse(hc::to_wire(req).dump()));
  EXPECT_EQ(back.model, "m");
  EXPECT_EQ(back.messages, req.messages);
  EXPECT_DOUBLE_EQ(back.temperature, 0.3);
}

TEST(Wire, ResponseContent) {
  EXPECT_EQ(hc::content_from_wire(hc::response_to_wire("hello", "m")), "hello");
  EXPECT_EQ(hc::content_from_wire(hc::Json{{"choices", hc::Json::array()}}), std::nullopt);
  EXPECT_EQ(hc::content_from_wire(hc::Json::object()), std::nullopt);
}

TEST(Backoff, EqualJitterWithinBounds) {
  hc::LlmEndpointConfig cfg;
  cfg.backoff_initial_ms = 100;
  cfg.backoff_max_ms = 1000;
  for (int k = 0; k < 8; ++k) {
    const double d = std::min(1000.0, 100.0 * std::pow(2.0, k));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto wait = hc::backoff_delay(cfg, k, seed).count();
      EXPECT_GE(wait, static_cast<long>(d / 2) - 1);
      EXPECT_LE(wait, static_cast<long>(d));
    }
    EXPECT_EQ(hc::backoff_delay(cfg, k, 7), hc::backoff_delay(cfg, k, 7));
  }
}

TEST(LlmClient, SuccessOnFirstTry) {
  hc::LlmClient client(std::make_shared<hc::MockChatTransport>(), fast_config(), kPatterns,
                       no_sleep());
  const auto r = client.complete(user("  a caption  "), "k");
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.text, "a caption");
  EXPECT_EQ(r.attempts, 1);
}

TEST(LlmClient, RetriesTimeoutsThenSucceeds) {
  auto t = scripted({{hc::TransportStatus::kTimeout, "", "slow"},
                     {hc::TransportStatus::kError, "", "reset"},
                     {hc::TransportStatus::kOk, "fine", ""}});
  std::vector<std::chrono::milliseconds> waits;
  hc::LlmClient client(t, fast_config(), kPatterns,
                       [&](std::chrono::milliseconds d) { waits.push_back(d); });
  const auto r = client.complete(user("x"), "id");
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.attempts, 3);
  EXPECT_EQ(waits.size(), 2u);
}

TEST(LlmClient, BudgetExhaustedReportsLastFailure) {
  auto t = scripted({{hc::TransportStatus::kTimeout, "", "slow"}});
  hc::LlmClient client(t, fast_config(), kPatterns, no_sleep());
  const auto r = client.complete(user("x"), "id");
  EXPECT_EQ(r.failure, hc::LlmFailure::kTimeout);
  EXPECT_EQ(r.attempts, 4);
  EXPECT_EQ(t->calls(), 4u);
}

TEST(LlmClient, RefusalRetriedOnce) {
  auto t = scripted({{hc::TransportStatus::kOk, "I'm sorry, I cannot.", ""}});
  hc::LlmClient client(t, fast_config(), kPatterns, no_sleep());
  const auto r = client.complete(user("x"), "id");
  EXPECT_EQ(r.failure, hc::LlmFailure::kRefusal);
  EXPECT_EQ(r.attempts, 2);

  auto judge = scripted({{hc::TransportStatus::kOk, "I'm sorry, score 3", ""}});
  hc::LlmClient judge_client(judge, fast_config(), kPatterns, no_sleep());
  EXPECT_TRUE(judge_client.complete(user("x"), "id", false).ok());
}

TEST(LlmClient, EmptyAnswersClassified) {
  auto t = scripted({{hc::TransportStatus::kOk, "   ", ""}});
  hc::LlmClient client(t, fast_config(), kPatterns, no_sleep());
  EXPECT_EQ(client.complete(user("x"), "id").failure, hc::LlmFailure::kEmpty);
}

TEST(LlmClient, BoundsConcurrency) {
  auto mock = std::make_shared<hc::MockChatTransport>();
  mock->set_latency(2ms);
  mock->set_max_concurrency(2);
  hc::LlmClient client(mock, fast_config(), kPatterns, no_sleep());
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 5; ++i) client.complete(user(std::to_string(t * 10 + i)), "k");
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_FALSE(mock->concurrency_violated());
  EXPECT_LE(client.peak_in_flight(), 2);
  EXPECT_GE(mock->peak_concurrency(), 1);
  EXPECT_EQ(mock->calls(), 40u);
}

TEST(MockTransport, ModesAndFaultsAreDeterministic) {
  auto upper = hc::MockChatTransport::from_name("upper");
  hc::ChatRequest req{"m", {{"user", "abc"}}, 0};
  EXPECT_EQ(upper->send(req, 1s).content, "ABC");
  EXPECT_THROW(hc::MockChatTransport::from_name("loud"), hc::Error);

  std::unordered_map<std::uint64_t, std::string> canned{{hc::fnv1a64("q"), "a"}};
  hc::MockChatTransport c(canned);
  EXPECT_EQ(c.send({"m", {{"user", "q"}}, 0}, 1s).content, "a");
  EXPECT_EQ(c.send({"m", {{"user", "other"}}, 0}, 1s).content, "other");

  auto run = [] {
    hc::MockChatTransport m;
    m.set_faults({0.3, 0.2, 0.0, 5, "I'm sorry."});
    std::vector<int> kinds;
    for (int i = 0; i < 200; ++i) {
      const auto r = m.send({"m", {{"user", std::to_string(i % 50)}}, 0}, 1s);
      kinds.push_back(r.status == hc::TransportStatus::kTimeout ? 2
                      : r.content == "I'm sorry."              ? 1
                                                               : 0);
    }
    return kinds;
  };
  const auto a = run();
  EXPECT_EQ(a, run());
  const auto timeouts = std::count(a.begin(), a.end(), 2);
  EXPECT_GT(timeouts, 30);
  EXPECT_LT(timeouts, 90);
}

TEST(HttpTransport, TalksToLocalServer) {
  httplib::Server server;
  std::string seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    const auto body = hc::request_from_wire(hc::Json::parse(req.body));
    res.set_content(hc::response_to_wire("got: " + body.messages.back().content, body.model).dump(),
                    "application/json");
  });
  server.Post("/slow/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(600ms);
    res.set_content("{}", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  hc::HttpChatTransport http(base, "secret");
  const auto ok = http.send({"m", {{"user", "hello"}}, 0}, 2000ms);
  EXPECT_EQ(ok.status, hc::TransportStatus::kOk) << ok.detail;
  EXPECT_EQ(ok.content, "got: hello");
  EXPECT_EQ(seen_auth, "Bearer secret");

  hc::HttpChatTransport v1(base + "/v1");
  EXPECT_EQ(v1.send({"m", {{"user", "x"}}, 0}, 2000ms).content, "got: x");

  hc::HttpChatTransport slow(base + "/slow");
  EXPECT_EQ(slow.send({"m", {{"user", "x"}}, 0}, 100ms).status, hc::TransportStatus::kTimeout);

  hc::HttpChatTransport missing(base + "/nowhere");
  EXPECT_EQ(missing.send({"m", {{"user", "x"}}, 0}, 2000ms).status, hc::TransportStatus::kError);

  server.stop();
  th.join();
}
