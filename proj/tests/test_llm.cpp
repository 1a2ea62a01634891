#include <atomic>
#include <thread>

#include <gtest/gtest.h>
#include <json.hpp>

#include "qaea/augment.hpp"
#include "qaea/embed.hpp"
#include "qaea/error.hpp"
#include "qaea/llm.hpp"
#include "qaea/log.hpp"
#include "qaea/prompts.hpp"

// After Eigen: resolv.h defines _res.
#include <httplib.h>

namespace qaea::llm {
namespace {

using nlohmann::json;
using std::chrono::milliseconds;

// Local HTTP server on an ephemeral port for the duration of a test.
class LocalServer {
 public:
  explicit LocalServer(std::function<void(httplib::Server&)> routes) {
    routes(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string chat_reply(const std::string& content) {
  return json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

struct RecordingSleeper {
  std::shared_ptr<std::vector<milliseconds>> delays = std::make_shared<std::vector<milliseconds>>();
  Gateway::Sleeper fn() {
    auto d = delays;
    return [d](milliseconds m) { d->push_back(m); };
  }
};

TEST(MockBackend, CannedMap) {
  Gateway g(MockChatBackend::canned({{"P", "R"}}));
  ChatRequest r;
  r.user_prompt = "P";
  auto resp = g.complete(r);
  EXPECT_EQ(resp.text, "R");
  EXPECT_EQ(resp.backend_id, "mock:canned");
  EXPECT_EQ(resp.attempts, 1);
}

TEST(MockBackend, EmptyOutputIsAnError) {
  Gateway g(MockChatBackend::canned({}));
  ChatRequest r;
  r.user_prompt = "unknown";
  EXPECT_THROW(g.complete(r), EmptyOutputError);
}

TEST(ChatRequest, DefaultsToTemperatureZero) {
  ChatRequest r;
  EXPECT_EQ(r.temperature, 0.0);
  EXPECT_GT(r.max_output_tokens, 0);
}

TEST(RetryPolicy, ExponentialSchedule) {
  RetryPolicy p;
  EXPECT_EQ(p.backoff(1), milliseconds(500));
  EXPECT_EQ(p.backoff(2), milliseconds(1000));
  EXPECT_EQ(p.backoff(3), milliseconds(2000));
}

TEST(Gateway, RetriesTransientFailuresAndLogsThem) {
  auto calls = std::make_shared<int>(0);
  auto backend = std::make_shared<MockChatBackend>("flaky", [calls](const ChatRequest&) -> std::string {
    if (++*calls < 3) throw TransportError("connection reset");
    return "ok";
  });
  RecordingSleeper sleeper;
  Gateway g(backend, {}, 1, sleeper.fn());
  log::Capture capture;
  auto resp = g.complete({});
  EXPECT_EQ(resp.text, "ok");
  EXPECT_EQ(resp.attempts, 3);
  EXPECT_EQ(*sleeper.delays, (std::vector<milliseconds>{milliseconds(500), milliseconds(1000)}));
  auto retries = capture.events("llm.retry");
  ASSERT_EQ(retries.size(), 2u);
  EXPECT_EQ(retries[0].fields.at("retry"), "1");
  EXPECT_EQ(retries[1].fields.at("backoff_ms"), "1000");
  EXPECT_EQ(retries[0].fields.at("backend"), "flaky");
}

TEST(Gateway, GivesUpAfterMaxRetries) {
  auto calls = std::make_shared<int>(0);
  auto backend = std::make_shared<MockChatBackend>("down", [calls](const ChatRequest&) -> std::string {
    ++*calls;
    throw TransportError("refused");
  });
  RecordingSleeper sleeper;
  Gateway g(backend, {2, milliseconds(10), 2.0}, 1, sleeper.fn());
  EXPECT_THROW(g.complete({}), TransportError);
  EXPECT_EQ(*calls, 3);
  EXPECT_EQ(sleeper.delays->size(), 2u);
}

TEST(Gateway, ClientErrorsAreNotRetried) {
  auto calls = std::make_shared<int>(0);
  auto backend = std::make_shared<MockChatBackend>("bad", [calls](const ChatRequest&) -> std::string {
    ++*calls;
    throw BackendError(400, "bad request");
  });
  Gateway g(backend, {}, 1, RecordingSleeper{}.fn());
  try {
    g.complete({});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 400);
    EXPECT_EQ(e.body_excerpt(), "bad request");
  }
  EXPECT_EQ(*calls, 1);
}

TEST(Gateway, ConcurrencyIsBounded) {
  std::atomic<int> active{0}, peak{0};
  auto backend = std::make_shared<MockChatBackend>("slow", [&](const ChatRequest&) -> std::string {
    int now = ++active;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(milliseconds(5));
    --active;
    return "x";
  });
  Gateway g(backend, {}, 2);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { g.complete({}); });
  for (auto& t : threads) t.join();
  EXPECT_LE(peak.load(), 2);
  EXPECT_GE(peak.load(), 1);
}

TEST(HttpChat, RetriesOn429ThenSucceeds) {
  std::atomic<int> hits{0};
  json seen;
  LocalServer server([&](httplib::Server& s) {
    s.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      if (hits++ == 0) {
        res.status = 429;
        res.set_content("slow down", "text/plain");
        return;
      }
      seen = json::parse(req.body);
      res.set_content(chat_reply("hello"), "application/json");
    });
  });
  RecordingSleeper sleeper;
  Gateway g(std::make_shared<HttpChatBackend>(HttpConfig{server.url("/v1/chat/completions"), "m1", "k", std::chrono::seconds(5)}),
            {}, 1, sleeper.fn());
  ChatRequest r;
  r.user_prompt = "hi";
  r.system_prompt = "sys";
  auto resp = g.complete(r);
  EXPECT_EQ(resp.text, "hello");
  EXPECT_EQ(resp.attempts, 2);
  EXPECT_GE(resp.latency.count(), 0);
  EXPECT_EQ(hits.load(), 2);
  EXPECT_EQ(sleeper.delays->size(), 1u);
  EXPECT_EQ(seen["model"], "m1");
  EXPECT_EQ(seen["temperature"], 0.0);
  ASSERT_EQ(seen["messages"].size(), 2u);
  EXPECT_EQ(seen["messages"][0]["role"], "system");
  EXPECT_EQ(seen["messages"][1]["content"], "hi");
}

TEST(HttpChat, NonRetryableStatusCarriesBody) {
  LocalServer server([](httplib::Server& s) {
    s.Post("/chat", [](const httplib::Request&, httplib::Response& res) {
      res.status = 401;
      res.set_content("invalid key", "text/plain");
    });
  });
  Gateway g(std::make_shared<HttpChatBackend>(HttpConfig{server.url("/chat"), "m", "", std::chrono::seconds(5)}), {}, 1,
            RecordingSleeper{}.fn());
  try {
    g.complete({});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 401);
    EXPECT_NE(e.body_excerpt().find("invalid key"), std::string::npos);
  }
}

TEST(HttpChat, DownServerIsTransportErrorAfterRetries) {
  RecordingSleeper sleeper;
  Gateway g(std::make_shared<HttpChatBackend>(HttpConfig{"http://127.0.0.1:1/chat", "m", "", std::chrono::seconds(2)}),
            {3, milliseconds(1), 2.0}, 1, sleeper.fn());
  EXPECT_THROW(g.complete({}), TransportError);
  EXPECT_EQ(sleeper.delays->size(), 3u);
}

TEST(HttpChat, InvalidEndpointRejected) {
  EXPECT_THROW(HttpChatBackend(HttpConfig{"ftp://x", "m", "", std::chrono::seconds(1)}), ArgumentError);
}

TEST(HttpEmbedding, BatchesAndRetries) {
  std::atomic<int> hits{0};
  std::vector<std::size_t> batch_sizes;
  LocalServer server([&](httplib::Server& s) {
    s.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
      if (hits++ == 0) {
        res.status = 503;
        return;
      }
      auto body = json::parse(req.body);
      batch_sizes.push_back(body["input"].size());
      json data = json::array();
      // Reply out of order to exercise index alignment.
      for (std::size_t i = body["input"].size(); i-- > 0;) {
        double len = static_cast<double>(body["input"][i].get<std::string>().size());
        data.push_back({{"index", i}, {"embedding", {len, 1.0, 0.0}}});
      }
      res.set_content(json{{"data", data}}.dump(), "application/json");
    });
  });
  HttpEmbeddingConfig cfg;
  cfg.endpoint = server.url("/embed");
  cfg.model = "e";
  cfg.batch_size = 2;
  cfg.dimension = 3;
  cfg.retry = {3, milliseconds(1), 2.0};
  HttpEmbeddingProvider provider(cfg);
  std::vector<std::string> texts{"a", "bb", "ccc"};
  log::Capture capture;
  auto out = embed_texts(texts, provider);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(batch_sizes, (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(capture.events("embed.retry").size(), 1u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(out[i].norm(), 1.0, 1e-9);
    double len = static_cast<double>(i + 1);
    EXPECT_NEAR(out[i].values()(0), len / std::sqrt(len * len + 1.0), 1e-12);
  }
}

TEST(HttpEmbedding, DownServerNamesFailingBatch) {
  HttpEmbeddingConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/embed";
  cfg.model = "e";
  cfg.dimension = 3;
  cfg.retry = {1, milliseconds(1), 2.0};
  cfg.timeout = std::chrono::seconds(2);
  HttpEmbeddingProvider provider(cfg);
  std::vector<std::string> texts{"a"};
  try {
    provider.embed(texts);
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("batch [0, 1)"), std::string::npos);
  }
}

// ---- mock profiles

TEST(MockGenerate, EchoOracleQa) {
  MockProfile p;
  EXPECT_EQ(mock_generate("X is Y.", Task::qag, p), R"({"factual inquiry":[["What is X?","X is Y."]]})");
}

TEST(MockGenerate, EchoOracleEvent) {
  MockProfile p;
  auto events = parse_event_json(mock_generate("Rome was founded early. Nothing else here.", Task::ee, p)).value;
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].event, "Rome was founded early.");
  EXPECT_EQ(events[0].event_subject, "Rome");
  EXPECT_EQ(events[0].event_type, "Statement");
}

TEST(MockGenerate, EchoOracleFallsBackToFirstSentence) {
  MockProfile p;
  auto qa = parse_qa_json(mock_generate("Cats purr loudly. Dogs bark.", Task::qag, p)).value;
  ASSERT_EQ(qa.size(), 1u);
  EXPECT_EQ(qa[0].answer, "Cats purr loudly.");
}

TEST(MockGenerate, NoisyAlwaysMalformedAtProbabilityOne) {
  MockProfile p{MockProfile::Kind::noisy, 1.0, 7};
  auto out = mock_generate("X is Y.", Task::qag, p);
  EXPECT_NE(out.back(), '}');
  EXPECT_THROW(parse_qa_json(out), ParseError);
  MockProfile clean{MockProfile::Kind::noisy, 0.0, 7};
  EXPECT_EQ(mock_generate("X is Y.", Task::qag, clean), mock_generate("X is Y.", Task::qag, MockProfile{}));
}

TEST(MockGenerate, Deterministic) {
  MockProfile p{MockProfile::Kind::noisy, 0.5, 11};
  for (const char* text : {"A is b.", "Some other text is here.", "Z were q. R are s."})
    for (Task t : {Task::qag, Task::ee}) EXPECT_EQ(mock_generate(text, t, p), mock_generate(text, t, p));
}

TEST(MockGenerate, NoisyRateRoughlyMatchesProbability) {
  MockProfile p{MockProfile::Kind::noisy, 0.3, 5};
  int malformed = 0;
  for (int i = 0; i < 400; ++i) {
    auto out = mock_generate("Doc " + std::to_string(i) + " is here.", Task::qag, p);
    malformed += out.back() != '}';
  }
  EXPECT_GT(malformed, 80);
  EXPECT_LT(malformed, 160);
}

TEST(MockGenerate, AdversarialScoresLowUnderHeuristic) {
  MockProfile p{MockProfile::Kind::adversarial_low_score, 0.0, 0};
  const std::string doc = "The library is open on weekdays.";
  Gateway evaluator(make_heuristic_evaluator());
  for (Task t : {Task::qag, Task::ee}) {
    ChatRequest r;
    r.user_prompt = build_score_prompt(mock_generate(doc, t, p), doc, t);
    auto score = parse_score_json(evaluator.complete(r).text).value;
    EXPECT_LE(score.total_score, 5);
  }
}

TEST(MockEvaluator, HeuristicGivesTenForEcho) {
  const std::string doc = "The library is open on weekdays.";
  Gateway evaluator(make_heuristic_evaluator());
  ChatRequest r;
  r.user_prompt = build_score_prompt(mock_generate(doc, Task::qag, {}), doc, Task::qag);
  EXPECT_EQ(parse_score_json(evaluator.complete(r).text).value.total_score, 10);
}

TEST(MockEvaluator, HeuristicShortWordsUseOverlap) {
  Gateway evaluator(make_heuristic_evaluator());
  ChatRequest r;
  r.user_prompt = build_score_prompt(mock_generate("The lake is deep.", Task::qag, {}), "The lake is deep.", Task::qag);
  EXPECT_EQ(parse_score_json(evaluator.complete(r).text).value.total_score, 10);
  r.user_prompt = build_score_prompt(R"({"factual inquiry": [["Why?", "No."]]})", "The lake is deep.", Task::qag);
  EXPECT_EQ(parse_score_json(evaluator.complete(r).text).value.total_score, 9);
}

TEST(MockEvaluator, HeuristicPenalisesMalformedAndEmpty) {
  const std::string doc = "The library is open on weekdays.";
  Gateway evaluator(make_heuristic_evaluator());
  ChatRequest r;
  r.user_prompt = build_score_prompt("{\"factual inquiry\": [[", doc, Task::qag);
  EXPECT_EQ(parse_score_json(evaluator.complete(r).text).value.total_score, 5);
  r.user_prompt = build_score_prompt("{}", doc, Task::qag);
  EXPECT_EQ(parse_score_json(evaluator.complete(r).text).value.total_score, 0);
}

TEST(MockEvaluator, Constant) {
  Gateway evaluator(make_constant_evaluator(7));
  auto score = parse_score_json(evaluator.complete({}).text).value;
  EXPECT_EQ(score.total_score, 7);
  ASSERT_EQ(score.deductions.size(), 1u);
  EXPECT_EQ(score.deductions[0].deduction_score, 3);
}

TEST(MockProfiles, ParseNames) {
  EXPECT_EQ(parse_mock_profile("echo-oracle"), MockProfile::Kind::echo_oracle);
  EXPECT_EQ(parse_mock_profile("noisy"), MockProfile::Kind::noisy);
  EXPECT_EQ(parse_mock_profile("adversarial-low-score"), MockProfile::Kind::adversarial_low_score);
  EXPECT_THROW(parse_mock_profile("other"), ArgumentError);
}

TEST(PromptSection, ExtractsTaggedBlock) {
  EXPECT_EQ(prompt_section("a\n<document>\nhello\nworld\n</document>\nb", "document"), "hello\nworld");
  EXPECT_FALSE(prompt_section("no tags", "document").has_value());
}

TEST(SplitSentences, Basic) {
  EXPECT_EQ(split_sentences("A b. C d! E f? g"), (std::vector<std::string>{"A b.", "C d!", "E f?", "g"}));
  EXPECT_EQ(split_sentences("v1.2 is out."), (std::vector<std::string>{"v1.2 is out."}));
  EXPECT_EQ(split_sentences("\xE4\xB8\xAD\xE3\x80\x82\xE6\x96\x87"),
            (std::vector<std::string>{"\xE4\xB8\xAD\xE3\x80\x82", "\xE6\x96\x87"}));
}

}  // namespace
}  // namespace qaea::llm
