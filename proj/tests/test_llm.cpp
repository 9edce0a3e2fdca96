#include "scenewright/llm/json_extract.hpp"
#include "scenewright/llm/prompt.hpp"
#include "scenewright/llm/provider.hpp"
#include "scenewright/llm/usage.hpp"

#include "scenewright/canonical_json.hpp"
#include "scenewright/error.hpp"
#include "support/generators.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <cstdlib>
#include <thread>

namespace scenewright::llm {
namespace {

using testing::Gen;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::NotFound;
}

constexpr const char* kDecomposition = R"({"subtasks": [
  {"task_type": "create", "request": "Create a red cube", "categories": [{"kind": "user_context", "properties": ["position"]}]},
  {"task_type": "animate", "request": "Spin it", "categories": ["virtual_objects", "animations"]}]})";

TEST(JsonExtract, FindsFirstBalancedValue) {
  auto r = extract_json("Sure! ```json\n{\"a\": [1, {\"b\": \"}\"}]}\n``` hope that helps {\"c\": 2}");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->value, nlohmann::json::parse(R"({"a": [1, {"b": "}"}]})"));
}

TEST(JsonExtract, SkipsUnparsableCandidates) {
  auto r = extract_json("{not json} then [1, 2]");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->value, nlohmann::json::parse("[1, 2]"));
  EXPECT_EQ(r->begin, 16u);
  EXPECT_EQ(r->end, 22u);
  EXPECT_FALSE(extract_json("no structure here"));
  EXPECT_FALSE(extract_json("{\"open\": "));
  EXPECT_FALSE(extract_json("[}"));
}

TEST(JsonExtract, PlainTextCollapsesAndSanitizes) {
  EXPECT_EQ(plain_text("  Here you go:\n```json\n```  Enjoy!  "), "Here you go: Enjoy!");
  EXPECT_EQ(plain_text("a\xff" "b"), "a\xEF\xBF\xBD" "b");
  EXPECT_EQ(plain_text("caf\xC3\xA9"), "caf\xC3\xA9");
  EXPECT_EQ(plain_text("\xE0\x80\x80"), "\xEF\xBF\xBD\xEF\xBF\xBD\xEF\xBF\xBD");
}

TEST(Prompt, InitialEnvelopeCarriesHistoryAndSchema) {
  const auto env = build_initial_prompt("make it blue", {"create a cube", "make it blue"});
  EXPECT_EQ(env.stage, PromptStage::Initial);
  EXPECT_EQ(env.user_text, "make it blue");
  EXPECT_NE(env.user_message.find("1. create a cube\n2. make it blue"), std::string::npos);
  EXPECT_NE(env.system_text.find("virtual_objects"), std::string::npos);
  EXPECT_NE(env.system_text.find("\"subtasks\""), std::string::npos);
  EXPECT_EQ(env.system_text.find("{{"), std::string::npos);
  EXPECT_EQ(env.digest(), build_initial_prompt("make it blue", {"create a cube", "make it blue"}).digest());
  EXPECT_NE(env.digest(), build_initial_prompt("make it blue", {"make it blue"}).digest());
  EXPECT_EQ(env.digest().size(), 64u);
}

TEST(Prompt, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Prompt, ParsesDecompositionWithProse) {
  const auto plan = parse_initial_response(std::string("Plan:\n```json\n") + kDecomposition + "\n```");
  ASSERT_EQ(plan.subtasks.size(), 2u);
  EXPECT_EQ(plan.subtasks[0].task_type, TaskType::Create);
  EXPECT_EQ(plan.subtasks[0].categories[0].properties, std::set<Property>{Property::Position});
  EXPECT_EQ(plan.subtasks[1].categories.size(), 2u);
  const auto bare = parse_initial_response(R"([{"task_type": "converse", "request": "hi", "categories": []}])");
  EXPECT_EQ(bare.subtasks[0].task_type, TaskType::Converse);
}

TEST(Prompt, DecompositionErrorsCarryPaths) {
  EXPECT_EQ(code_of([] { parse_initial_response("I cannot help with that."); }), ErrorCode::NoJSONFound);
  try {
    parse_initial_response(R"({"subtasks": [{"task_type": "dance", "request": "x", "categories": []}]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
    EXPECT_EQ(e.detail().rfind("/subtasks/0/task_type", 0), 0u) << e.detail();
  }
  try {
    parse_initial_response(R"({"subtasks": [{"task_type": "create", "request": "x", "categories": [{"kind": "history", "properties": ["color"]}]}]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownProperty);
    EXPECT_EQ(e.detail().rfind("/subtasks/0/categories/0", 0), 0u) << e.detail();
  }
}

TEST(Prompt, RefinedEnvelopeRequiresMatchingContext) {
  const auto plan = parse_initial_response(kDecomposition);
  ContextPayload payload;
  payload.sections[CategoryKind::UserContext] = "head | position=(0.000,1.600,0.000)\n";
  const auto env = build_refined_prompt(plan.subtasks[0], payload);
  EXPECT_EQ(env.task_type, TaskType::Create);
  EXPECT_NE(env.user_message.find("## user_context\nhead"), std::string::npos);
  EXPECT_NE(env.system_text.find("\"objects\""), std::string::npos);
  payload.sections[CategoryKind::History] = "";
  EXPECT_EQ(code_of([&] { build_refined_prompt(plan.subtasks[0], payload); }), ErrorCode::CategoryMismatch);
}

TEST(Prompt, RefinedResponses) {
  const auto create = parse_refined_response(
      R"(Here is your cube: {"objects": [{"name": "cube", "primitive": "cube"}]} Enjoy!)", TaskType::Create);
  EXPECT_EQ(create.payload["objects"][0]["name"], "cube");
  EXPECT_EQ(create.speech_text, "Here is your cube: Enjoy!");
  const auto shorthand = parse_refined_response(R"([{"id": "s", "unit": "rotate", "subject": "cube", "axis": "y"}])",
                                                TaskType::Animate);
  EXPECT_TRUE(shorthand.payload.contains("animations"));
  const auto talk = parse_refined_response("Hello there!", TaskType::Converse);
  EXPECT_EQ(talk.speech_text, "Hello there!");
  EXPECT_TRUE(talk.payload.empty());
  const auto spoken = parse_refined_response(R"({"speech": "Sure."})", TaskType::Converse);
  EXPECT_EQ(spoken.speech_text, "Sure.");
  EXPECT_EQ(code_of([] { parse_refined_response("no", TaskType::Fuse); }), ErrorCode::NoJSONFound);
  EXPECT_EQ(code_of([] { parse_refined_response(R"({"objects": [{"primitive": "cube"}]})", TaskType::Create); }),
            ErrorCode::SchemaViolation);
}

std::string mutate(Gen& gen, std::string s) {
  switch (gen.integer(0, 6)) {
    case 0: return s.substr(0, gen.index(s.size() + 1));
    case 1:
      if (!s.empty()) s[gen.index(s.size())] = static_cast<char>(gen.integer(0, 255));
      return s;
    case 2:
      if (!s.empty()) s.erase(gen.index(s.size()), 1);
      return s;
    case 3: return s.insert(gen.index(s.size() + 1), std::string(1, "{}[]\",:"[gen.index(7)]));
    case 4: return gen.bytes(64);
    case 5: return "prose " + s + " " + gen.bytes(8);
    default: {
      for (int i = 0; i < 4 && !s.empty(); ++i) s[gen.index(s.size())] = static_cast<char>(gen.integer(0, 255));
      return s;
    }
  }
}

TEST(PromptFuzz, MalformedResponsesOnlyRaiseTypedErrors) {
  Gen gen(1234);
  const std::vector<std::pair<std::string, TaskType>> seeds = {
      {R"({"objects": [{"name": "cube", "primitive": "cube", "position": [0, 1, 2], "color": "red"}]})", TaskType::Create},
      {R"({"animations": [{"id": "a", "unit": "orbit", "subject": "moon", "target": "earth", "axis": [0, 1, 0]}]})",
       TaskType::Animate},
      {R"({"actions": [{"object": "cube", "block": "hand_follow", "hand": "left", "offset": [0, 0.1, 0]}]})",
       TaskType::Fuse},
      {R"({"speech": "hello"})", TaskType::Converse},
  };
  std::size_t typed = 0;
  for (int i = 0; i < 10000; ++i) {
    const bool initial = gen.coin(0.3);
    const auto& seed = seeds[gen.index(seeds.size())];
    const std::string text = mutate(gen, initial ? std::string(kDecomposition) : seed.first);
    try {
      if (initial) {
        (void)parse_initial_response(text);
      } else {
        const auto cmd = parse_refined_response(text, seed.second);
        (void)canonical_dump(cmd.to_json());
      }
    } catch (const Error&) {
      ++typed;
    } catch (const std::exception& e) {
      FAIL() << "untyped exception on case " << i << ": " << e.what();
    }
  }
  EXPECT_GT(typed, 1000u);
}

TEST(Provider, ScriptedMockAnswersByDigest) {
  const auto env = build_initial_prompt("hello", {"hello"});
  ScriptedMock mock({{env.digest(), "reply", 10, 2}});
  const auto c = mock.complete(env);
  EXPECT_EQ(c.text, "reply");
  EXPECT_EQ(c.input_tokens, 10);
  EXPECT_EQ(code_of([&] { mock.complete(build_initial_prompt("bye", {})); }), ErrorCode::TranscriptMiss);
  EXPECT_EQ(mock.calls(), 2u);
  EXPECT_EQ(code_of([&] { ScriptedMock({{"d", "a", 0, 0}, {"d", "b", 0, 0}}); }), ErrorCode::SchemaViolation);
}

TEST(Provider, TranscriptRoundTripAndValidation) {
  const std::vector<TranscriptEntry> t = {{"abc", "text", 5, 6}};
  const auto back = transcript_from_json(to_json(t));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].response_text, "text");
  EXPECT_EQ(back[0].output_tokens, 6);
  EXPECT_EQ(code_of([] { transcript_from_json(nlohmann::json::parse(R"([{"envelope_digest": "a"}])")); }),
            ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([] {
              transcript_from_json(nlohmann::json::parse(R"([{"envelope_digest": "a", "response_text": "", "input_tokens": "7"}])"));
            }),
            ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([] { ScriptedMock::load("/nonexistent/transcript.json"); }), ErrorCode::FixtureMissing);
}

TEST(Provider, RecordingProviderCapturesDigests) {
  SequenceProvider seq({{"one", 1, 1}, {"two", 2, 2}});
  RecordingProvider rec(seq);
  const auto a = build_initial_prompt("a", {});
  const auto b = build_initial_prompt("b", {});
  rec.complete(a);
  rec.complete(b);
  ASSERT_EQ(rec.transcript().size(), 2u);
  EXPECT_EQ(rec.transcript()[1].envelope_digest, b.digest());
  EXPECT_EQ(code_of([&] { rec.complete(a); }), ErrorCode::TranscriptMiss);
  ScriptedMock replayed(rec.transcript());
  EXPECT_EQ(replayed.complete(b).text, "two");
}

TEST(Provider, GenericHttpTalksChatCompletions) {
  httplib::Server server;
  std::string seen_auth;
  nlohmann::json seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = nlohmann::json::parse(req.body);
    res.set_content(R"({"choices": [{"message": {"content": "hi"}}], "usage": {"prompt_tokens": 12, "completion_tokens": 3}})",
                    "application/json");
  });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices": [{"message": {"content": null}}], "usage": {"prompt_tokens": "x"}})", "application/json");
  });
  server.Post("/down", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("SCENEWRIGHT_TEST_KEY", "secret", 1);
  ProviderConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.model = "m";
  cfg.api_key_env = "SCENEWRIGHT_TEST_KEY";
  cfg.structured_output = true;
  GenericHTTP provider(cfg);
  const auto env = build_initial_prompt("hello", {});
  const auto c = provider.complete(env);
  EXPECT_EQ(c.text, "hi");
  EXPECT_EQ(c.input_tokens, 12);
  EXPECT_EQ(c.output_tokens, 3);
  EXPECT_EQ(seen_auth, "Bearer secret");
  EXPECT_EQ(seen_body["messages"][0]["role"], "system");
  EXPECT_EQ(seen_body["response_format"]["json_schema"]["schema"], env.schema);

  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/broken";
  const auto empty = GenericHTTP(cfg).complete(env);
  EXPECT_EQ(empty.text, "");
  EXPECT_EQ(empty.input_tokens, 0);
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/down";
  EXPECT_EQ(code_of([&] { GenericHTTP(cfg).complete(env); }), ErrorCode::ProviderUnavailable);
  server.stop();
  thread.join();

  cfg.timeout_seconds = 0.5;
  EXPECT_EQ(code_of([&] { GenericHTTP(cfg).complete(env); }), ErrorCode::ProviderUnavailable);
  cfg.endpoint = "localhost";
  EXPECT_EQ(code_of([&] { GenericHTTP{cfg}; }), ErrorCode::ConfigInvalid);
}

TEST(Usage, LedgerSumsPerRequest) {
  UsageLedger ledger;
  const auto t = ledger.account("r1", {{"r1", "initial", 3000, 60}, {"r1", "refined", 200, 20}});
  EXPECT_EQ(t.input_tokens, 3200);
  EXPECT_EQ(t.output_tokens, 80);
  EXPECT_EQ(t.calls, 2u);
  ledger.account("r2", {{"r2", "initial", 800, 40}});
  EXPECT_EQ(ledger.totals("r1")->input_tokens, 3200);
  const auto avg = ledger.rolling_average();
  EXPECT_DOUBLE_EQ(avg.input_tokens, 2000.0);
  EXPECT_DOUBLE_EQ(avg.output_tokens, 60.0);
  EXPECT_DOUBLE_EQ(ledger.rolling_average(1).input_tokens, 800.0);
  EXPECT_FALSE(ledger.totals("r3"));
}

TEST(Usage, RandomLedgersMatchDirectSums) {
  Gen gen(77);
  for (int trial = 0; trial < 200; ++trial) {
    UsageLedger ledger;
    std::int64_t in = 0;
    std::int64_t out = 0;
    std::vector<TokenUsage> calls;
    for (int i = 0, n = gen.integer(0, 8); i < n; ++i) {
      calls.push_back({"r", i ? "refined" : "initial", gen.integer(0, 5000), gen.integer(0, 500)});
      in += calls.back().input_tokens;
      out += calls.back().output_tokens;
    }
    const auto t = ledger.account("r", calls);
    EXPECT_EQ(t.input_tokens, in);
    EXPECT_EQ(t.output_tokens, out);
  }
}

}  // namespace
}  // namespace scenewright::llm
