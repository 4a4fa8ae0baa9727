#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <doctest.h>

#include "vrpagent/llm/gateway.hpp"
#include "vrpagent/llm/provider.hpp"
#include "vrpagent/llm/templates.hpp"
#include "vrpagent/util/digest.hpp"

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <thread>

using namespace vrpagent;

namespace {

/// Bindings used for the frozen rendered digests below.
Bindings reference_bindings() {
    Bindings b = problem_bindings(ProblemKind::CVRP);
    b["code"] = std::string(seed_operator_source());
    b["code_parent_1"] = std::string(seed_operator_source());
    b["code_parent_2"] = "int x = 0;";
    b["bias_percent"] = "80";
    b["worse_percent"] = "20";
    return b;
}

/// Local OpenAI-style endpoint answering from a queue of statuses.
struct FakeEndpoint {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::vector<int> statuses;
    std::atomic<int> hits{0};
    std::string last_body;
    std::string last_auth;
    std::string reply = R"({"model":"m1","choices":[{"message":{"role":"assistant","content":"```cpp\nint a;\n```"}}],"usage":{"prompt_tokens":11,"completion_tokens":7}})";

    explicit FakeEndpoint(std::vector<int> s) : statuses(std::move(s)) {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            int k = hits++;
            last_body = req.body;
            last_auth = req.get_header_value("Authorization");
            int status = k < static_cast<int>(statuses.size()) ? statuses[static_cast<std::size_t>(k)] : 200;
            res.status = status;
            res.set_content(status == 200 ? reply : std::string("{\"error\":\"x\"}"), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~FakeEndpoint() {
        server.stop();
        thread.join();
    }
    HttpSettings settings() const {
        HttpSettings s;
        s.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
        s.api_key = "test-key";
        s.timeout = 5.0;
        return s;
    }
};

ChatRequest simple_request() {
    ChatRequest r;
    r.messages = {{"system", "s"}, {"user", "u"}};
    r.model = "m";
    r.temperature = 0.7;
    return r;
}

} // namespace

TEST_CASE("template bodies match their pins") {
    CHECK_NOTHROW(verify_template_pins());
    for (TemplateId id : all_template_ids()) {
        CHECK(sha256_hex(template_body(id)) == pinned_digest(id));
    }
}

TEST_CASE("rendered prompts hash to frozen digests") {
    const std::map<TemplateId, std::string> expected{
        {TemplateId::system, "a89a030131aa11f78c17eae446bbf3df67c990dfd5522d3f138eb3e2a073eab5"},
        {TemplateId::seed, "fdad8f06dacefb1aebbbcc1c1103e20ffb223f538594b4d3f038d5b6fe48bbbb"},
        {TemplateId::crossover, "64a3fcbe51c7799954cb13d4cb6a7035a0ef65505f24d1d3e5e44334aa1ddd0f"},
        {TemplateId::mutation_ablation, "1ed446c566da0e4805b2994b3400773fb109232900750e79712b287b3d40a03c"},
        {TemplateId::mutation_extend, "68399c2a801e9ee40f261aaf53d89ca6b467029b5061b90b976880a5f96bb3ed"},
        {TemplateId::mutation_adjust, "a3f3f3e70537ebcd27cfb2a3284b1653446b2fd52e638957dab3a4518907455c"},
        {TemplateId::mutation_refactor, "b06cf2a4136be3b0379962c320b85fd04429309f447e4812a5679fadb17d798c"},
        {TemplateId::crossover_standard, "11e78e41e9eaa265fd3418387eb4e3b717e19c8c4325bc43969581dda0d9e5c1"},
    };
    Bindings b = reference_bindings();
    for (const auto& [id, digest] : expected) {
        CHECK_MESSAGE(sha256_hex(render_template(id, b)) == digest, to_string(id));
    }
}

TEST_CASE("crossover body differs from the published listing only in the completed bias sentence") {
    // Digest of the listing as published, whose bias line breaks off after "(80".
    std::string body(template_body(TemplateId::crossover));
    const std::string completion = "{bias_percent}%) and only {worse_percent}% from the worse code.";
    auto pos = body.find(completion);
    REQUIRE(pos != std::string::npos);
    body.replace(pos, completion.size(), "80");
    CHECK(sha256_hex(body) == "23ed7d0f352f99ed7ea930e789ce0555a5115f7e53e55be085b2ec8024df6855");
}

TEST_CASE("problem context digests") {
    CHECK(sha256_hex(problem_description(ProblemKind::CVRP)) ==
          "ff256908433d7d9da92caba3cbc08e4f93d3d837c34a7f09178c9758006abb6e");
    CHECK(sha256_hex(lns_headers(ProblemKind::CVRP)) ==
          "cee0e4c5218f95cef2f0e63898c1b546096d8b15e0af7082745e8dda6712b881");
    CHECK(sha256_hex(seed_operator_source()) == "80534688bfbc9ac5e1f1e7351e0d3a46fcca72bf1c4239580d5363e9539cad5f");
    for (auto kind : {ProblemKind::VRPTW, ProblemKind::PCVRP}) {
        CHECK(lns_headers(kind).find("struct Instance {") != std::string_view::npos);
        CHECK(problem_description(kind) != problem_description(ProblemKind::CVRP));
    }
    CHECK(lns_headers(ProblemKind::VRPTW).find("startTW") != std::string_view::npos);
    CHECK(lns_headers(ProblemKind::PCVRP).find("prizes") != std::string_view::npos);
}

TEST_CASE("render behaviour") {
    Bindings b = reference_bindings();
    SUBCASE("crossover shows better code before worse code and embeds the bias") {
        b["bias_percent"] = percent_string(0.8);
        b["worse_percent"] = percent_string(0.2);
        std::string text = render_template(TemplateId::crossover, b);
        auto better = text.find("[Better Code]");
        auto worse = text.find("[Worse Code]");
        REQUIRE(better != std::string::npos);
        CHECK(better < worse);
        CHECK(text.find("better code (80%) and only 20%") != std::string::npos);
        b["bias_percent"] = percent_string(0.65);
        CHECK(render_template(TemplateId::crossover, b).find("(65%)") != std::string::npos);
    }
    SUBCASE("seed prompt embeds the header context under the library section") {
        std::string text = render_template(TemplateId::seed, b);
        auto lib = text.find("# Libary context");
        auto hdr = text.find(std::string(lns_headers(ProblemKind::CVRP)));
        REQUIRE(lib != std::string::npos);
        CHECK(hdr > lib);
    }
    SUBCASE("rendering is stable and bound values are not rescanned") {
        CHECK(render_template(TemplateId::seed, b) == render_template(TemplateId::seed, b));
        CHECK(render_text("a{x}b", {{"x", "{y}"}, {"y", "no"}}) == "a{y}b");
        CHECK(render_text("{ x } {1} {}", {}) == "{ x } {1} {}");
    }
    SUBCASE("missing binding names the slot") {
        b.erase("code");
        try {
            render_template(TemplateId::mutation_extend, b);
            FAIL("expected RenderError");
        } catch (const RenderError& e) {
            CHECK(std::string(e.what()).find("'code'") != std::string::npos);
        }
    }
    SUBCASE("required slots") {
        CHECK(required_slots(TemplateId::crossover) ==
              std::vector<std::string>{"bias_percent", "code_parent_1", "code_parent_2", "worse_percent"});
        CHECK(required_slots(TemplateId::system) == std::vector<std::string>{"problem_desc", "problem_name_long"});
        for (TemplateId id : all_template_ids()) {
            Bindings exact;
            for (const auto& s : required_slots(id)) {
                exact[s] = "v";
            }
            std::string out = render_template(id, exact);
            for (const auto& s : required_slots(id)) {
                CHECK(out.find("{" + s + "}") == std::string::npos);
            }
        }
    }
    SUBCASE("messages put the system prompt first") {
        auto msgs = render_messages(TemplateId::mutation_adjust, b);
        REQUIRE(msgs.size() == 2);
        CHECK(msgs[0].role == "system");
        CHECK(msgs[0].content.rfind("You are an operations research expert.", 0) == 0);
        CHECK(msgs[1].role == "user");
        CHECK(msgs[1].content.rfind("[Code]\n", 0) == 0);
    }
    SUBCASE("ids") {
        for (TemplateId id : all_template_ids()) {
            CHECK(parse_template_id(to_string(id)) == id);
        }
        CHECK_THROWS_AS(parse_template_id("mutation"), std::invalid_argument);
    }
}

TEST_CASE("percent strings") {
    CHECK(percent_string(0.8) == "80");
    CHECK(percent_string(0.5) == "50");
    CHECK(percent_string(1.0) == "100");
    CHECK(percent_string(0.625) == "62.5");
}

TEST_CASE("extract_code") {
    CHECK(extract_code("```cpp\nint a;\n```") == "int a;");
    CHECK(extract_code("intro\n```c++\nint a;\n```\nmid\n```\nint b;\nint c;\n```\nbye") == "int b;\nint c;");
    CHECK(extract_code("```\nx\n\n```") == "x");
    CHECK_THROWS_AS(extract_code("just prose"), ExtractionError);
    CHECK_THROWS_AS(extract_code("```cpp\nunterminated"), ExtractionError);
    CHECK(extract_code("```cpp\nauto s = \"```\";\n```\n") == "auto s = \"```\";");
}

TEST_CASE("mock provider") {
    ChatRequest req = simple_request();
    SUBCASE("scripted replies verbatim with zero usage") {
        auto p = MockProvider::scripted({{"hello", 0}, {"", 503}, {"", 401}});
        ChatResponse r = p->complete(req);
        CHECK(r.text == "hello");
        CHECK(r.usage.input_tokens == 0);
        CHECK(r.usage.output_tokens == 0);
        CHECK_THROWS_AS(p->complete(req), RetryExhaustedError);
        CHECK_THROWS_AS(p->complete(req), AuthError);
        CHECK_THROWS_AS(p->complete(req), LlmError);
    }
    SUBCASE("corpus choice is a pure function of prompt, call index and seed") {
        std::vector<std::string> corpus{"A", "B", "C", "D", "E"};
        auto p1 = MockProvider::corpus(corpus, 9);
        auto p2 = MockProvider::corpus(corpus, 9);
        std::set<std::string> seen;
        for (std::uint64_t i = 0; i < 50; ++i) {
            req.call_index = i;
            std::string a = p1->complete(req).text;
            CHECK(a == p2->complete(req).text);
            seen.insert(extract_code(a));
        }
        CHECK(seen.size() == 5);
        req.call_index = 3;
        std::string first = p1->complete(req).text;
        p1->complete(simple_request());
        CHECK(p1->complete(req).text == first);
    }
    SUBCASE("echo returns the better parent") {
        auto p = MockProvider::echo();
        Bindings b = reference_bindings();
        b["code_parent_1"] = "int elite;";
        req.messages = render_messages(TemplateId::crossover, b);
        CHECK(extract_code(p->complete(req).text) == "int elite;");
        b["code"] = "int mutant;";
        req.messages = render_messages(TemplateId::mutation_refactor, b);
        CHECK(extract_code(p->complete(req).text) == "int mutant;");
        req.messages = render_messages(TemplateId::seed, b);
        CHECK(extract_code(p->complete(req).text) == seed_operator_source());
    }
}

TEST_CASE("http provider request and response shapes") {
    ChatRequest req = simple_request();
    auto body = nlohmann::json::parse(HttpProvider::request_body(req));
    CHECK(body["model"] == "m");
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["content"] == "u");
    CHECK(body["temperature"] == 0.7);
    CHECK(body.contains("max_tokens"));

    ChatResponse r = HttpProvider::parse_response(
        R"({"choices":[{"message":{"content":"hi"}}],"usage":{"prompt_tokens":3,"completion_tokens":4}})");
    CHECK(r.text == "hi");
    CHECK(r.usage.input_tokens == 3);
    CHECK(r.usage.output_tokens == 4);
    CHECK_THROWS_AS(HttpProvider::parse_response("not json"), MalformedResponseError);
    CHECK_THROWS_AS(HttpProvider::parse_response(R"({"choices":[]})"), MalformedResponseError);
    CHECK_THROWS_AS(HttpProvider::parse_response(R"({"choices":[{"message":{"content":""}}]})"), MalformedResponseError);
    CHECK_THROWS_AS(HttpProvider::parse_response(R"({"choices":[{"message":{}}]})"), MalformedResponseError);
}

TEST_CASE("http provider retries transient failures") {
    std::vector<double> sleeps;
    auto sleeper = [&](std::chrono::duration<double> d) { sleeps.push_back(d.count()); };
    SUBCASE("two 503s then success") {
        FakeEndpoint ep({503, 503});
        HttpProvider p(ep.settings(), sleeper);
        ChatResponse r = p.complete(simple_request());
        CHECK(r.retry_count == 2);
        CHECK(ep.hits == 3);
        CHECK(extract_code(r.text) == "int a;");
        CHECK(r.usage.input_tokens == 11);
        CHECK(r.usage.output_tokens == 7);
        CHECK(sleeps == std::vector<double>{1.0, 2.0});
        CHECK(ep.last_auth == "Bearer test-key");
        CHECK(nlohmann::json::parse(ep.last_body)["messages"].size() == 2);
    }
    SUBCASE("429 and 500 are transient too") {
        FakeEndpoint ep({429, 500});
        HttpProvider p(ep.settings(), sleeper);
        CHECK(p.complete(simple_request()).retry_count == 2);
    }
    SUBCASE("exhaustion") {
        FakeEndpoint ep({503, 503, 503, 503, 503, 503});
        HttpSettings s = ep.settings();
        s.retry.max_retries = 2;
        HttpProvider p(s, sleeper);
        CHECK_THROWS_AS(p.complete(simple_request()), RetryExhaustedError);
        CHECK(ep.hits == 3);
    }
    SUBCASE("auth failure is terminal") {
        FakeEndpoint ep({401});
        HttpProvider p(ep.settings(), sleeper);
        CHECK_THROWS_AS(p.complete(simple_request()), AuthError);
        CHECK(ep.hits == 1);
    }
    SUBCASE("bad request is not retried") {
        FakeEndpoint ep({400});
        HttpProvider p(ep.settings(), sleeper);
        CHECK_THROWS_AS(p.complete(simple_request()), RequestRejectedError);
        CHECK(ep.hits == 1);
    }
    SUBCASE("malformed body") {
        FakeEndpoint ep({});
        ep.reply = "{\"choices\":42}";
        HttpProvider p(ep.settings(), sleeper);
        CHECK_THROWS_AS(p.complete(simple_request()), MalformedResponseError);
    }
    SUBCASE("connection refused counts as transient") {
        HttpSettings s;
        s.endpoint = "http://127.0.0.1:1/v1/chat/completions";
        s.api_key = "k";
        s.timeout = 1.0;
        s.retry.max_retries = 1;
        HttpProvider p(s, sleeper);
        CHECK_THROWS_AS(p.complete(simple_request()), RetryExhaustedError);
        CHECK(sleeps.size() == 1);
    }
    SUBCASE("backoff is capped") {
        FakeEndpoint ep({503, 503, 503, 503});
        HttpSettings s = ep.settings();
        s.retry.max_backoff = 3.0;
        HttpProvider p(s, sleeper);
        p.complete(simple_request());
        CHECK(sleeps == std::vector<double>{1.0, 2.0, 3.0, 3.0});
    }
}

TEST_CASE("http settings from the environment") {
    ::unsetenv(kEndpointEnv);
    ::unsetenv(kApiKeyEnv);
    CHECK_THROWS_AS(http_settings_from_env(), LlmError);
    ::setenv(kEndpointEnv, "https://example.invalid/v1/chat/completions", 1);
    CHECK_THROWS_AS(http_settings_from_env(), LlmError);
    ::setenv(kApiKeyEnv, "secret", 1);
    HttpSettings s = http_settings_from_env();
    CHECK(s.api_key == "secret");
    CHECK_NOTHROW(HttpProvider{s});
    s.endpoint = "ftp://x/y";
    CHECK_THROWS_AS(HttpProvider{s}, LlmError);
    ::unsetenv(kEndpointEnv);
    ::unsetenv(kApiKeyEnv);
}

TEST_CASE("token cost reproduces published per-run totals") {
    struct Row {
        double in_m, out_m, in_rate, out_rate, total;
    };
    // Token usage in millions, rates in $ per million tokens, totals as published.
    const Row rows[] = {{2.5, 1.2, 0.10, 0.40, 0.73}, {4.1, 7.1, 0.30, 2.50, 18.98}, {4.0, 2.5, 0.09, 0.36, 1.26},
                        {2.5, 1.2, 0.09, 0.16, 0.42}, {1.5, 4.4, 0.08, 0.29, 1.40}, {2.3, 1.0, 0.08, 0.29, 0.47}};
    for (const auto& row : rows) {
        Usage u{static_cast<std::int64_t>(std::llround(row.in_m * 1e6)), static_cast<std::int64_t>(std::llround(row.out_m * 1e6))};
        double cost = token_cost(u, {row.in_rate, row.out_rate});
        CHECK(std::round(cost * 100.0) / 100.0 == doctest::Approx(row.total).epsilon(1e-12));
    }
}

TEST_CASE("ledger totals are additive") {
    UsageLedger ledger({0.30, 2.50});
    ChatResponse a;
    a.usage = {100, 50};
    a.retry_count = 1;
    ChatResponse b;
    b.usage = {7, 3};
    ledger.record("init", a);
    ledger.record("crossover", b);
    ledger.record("crossover", b);
    ledger.record_failure("crossover");
    CHECK(ledger.total().input_tokens == 114);
    CHECK(ledger.total().output_tokens == 56);
    CHECK(ledger.calls() == 3);
    CHECK(ledger.failures() == 1);
    CHECK(ledger.retries() == 1);
    CHECK(ledger.cost() == doctest::Approx((114 * 0.30 + 56 * 2.50) / 1e6));
    UsageLedger copy({0.30, 2.50});
    copy.restore(ledger.to_json());
    CHECK(copy.to_json() == ledger.to_json());
}

TEST_CASE("gateway admission and accounting") {
    struct SlowProvider : Provider {
        std::atomic<int> in_flight{0};
        std::atomic<int> peak{0};
        ChatResponse complete(const ChatRequest&) override {
            int now = ++in_flight;
            int p = peak.load();
            while (now > p && !peak.compare_exchange_weak(p, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
            --in_flight;
            ChatResponse r;
            r.text = "```\nx\n```";
            r.usage = {10, 5};
            return r;
        }
        std::string name() const override { return "slow"; }
    };
    auto owned = std::make_unique<SlowProvider>();
    SlowProvider* raw = owned.get();
    GatewaySettings gs;
    gs.max_concurrent = 2;
    Gateway gw(std::move(owned), gs);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&, i] {
            gw.complete(TemplateId::mutation_extend, reference_bindings(), "mutation", static_cast<std::uint64_t>(i), 0.7);
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    CHECK(raw->peak <= 2);
    CHECK(gw.ledger().calls() == 8);
    CHECK(gw.ledger().total().input_tokens == 80);

    GatewaySettings tight;
    tight.token_budget = 20;
    Gateway limited(MockProvider::echo(), tight);
    limited.complete(TemplateId::seed, reference_bindings(), "init", 0, 1.0);
    CHECK_THROWS_AS(limited.complete(TemplateId::seed, reference_bindings(), "init", 1, 1.0), TokenBudgetExceeded);
}
