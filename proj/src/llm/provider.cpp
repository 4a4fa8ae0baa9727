#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "vrpagent/llm/provider.hpp"

#include "vrpagent/util/digest.hpp"
#include "vrpagent/util/rng.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace vrpagent {

namespace {

std::int64_t estimate_tokens(std::size_t chars) { return static_cast<std::int64_t>((chars + 3) / 4); }

std::int64_t estimate_tokens(const std::vector<Message>& messages) {
    std::size_t chars = 0;
    for (const auto& m : messages) {
        chars += m.content.size();
    }
    return estimate_tokens(chars);
}

std::string fence(std::string_view code) { return "```cpp\n" + std::string(code) + "\n```\n"; }

/// Text between `open` and the next blank-line-separated section header.
std::optional<std::string> section(std::string_view prompt, std::string_view open, std::string_view close) {
    auto a = prompt.find(open);
    if (a == std::string_view::npos) {
        return std::nullopt;
    }
    a += open.size();
    auto b = prompt.find(close, a);
    if (b == std::string_view::npos) {
        return std::nullopt;
    }
    return std::string(prompt.substr(a, b - a));
}

[[noreturn]] void raise_status(int status, const std::string& body) {
    std::string what = "endpoint returned HTTP " + std::to_string(status);
    if (!body.empty()) {
        what += ": " + body.substr(0, 200);
    }
    if (status == 401 || status == 403) {
        throw AuthError(what);
    }
    throw RequestRejectedError(what, status);
}

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

} // namespace

std::string prompt_digest(const std::vector<Message>& messages) {
    std::string joined;
    for (const auto& m : messages) {
        joined += m.role;
        joined += '\0';
        joined += m.content;
        joined += '\0';
    }
    return sha256_hex(joined);
}

std::unique_ptr<MockProvider> MockProvider::corpus(std::vector<std::string> sources, std::uint64_t seed) {
    if (sources.empty()) {
        throw std::invalid_argument("mock corpus is empty");
    }
    std::unique_ptr<MockProvider> p(new MockProvider(Mode::corpus));
    p->corpus_ = std::move(sources);
    p->seed_ = seed;
    return p;
}

std::unique_ptr<MockProvider> MockProvider::echo() { return std::unique_ptr<MockProvider>(new MockProvider(Mode::echo)); }

std::unique_ptr<MockProvider> MockProvider::scripted(std::vector<Reply> replies) {
    std::unique_ptr<MockProvider> p(new MockProvider(Mode::scripted));
    p->script_ = std::move(replies);
    return p;
}

std::size_t MockProvider::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

ChatResponse MockProvider::complete(const ChatRequest& request) {
    ChatResponse out;
    out.model = request.model;
    {
        std::lock_guard lock(mutex_);
        ++calls_;
    }
    const std::string user = request.messages.empty() ? std::string() : request.messages.back().content;
    switch (mode_) {
    case Mode::scripted: {
        Reply reply;
        {
            std::lock_guard lock(mutex_);
            if (next_ >= script_.size()) {
                throw LlmError("mock script exhausted");
            }
            reply = script_[next_++];
        }
        if (reply.fail_status != 0) {
            if (transient_status(reply.fail_status)) {
                throw RetryExhaustedError("scripted HTTP " + std::to_string(reply.fail_status), 1);
            }
            raise_status(reply.fail_status, {});
        }
        out.text = reply.text;
        return out;
    }
    case Mode::echo: {
        auto code = section(user, "[Better Code]\n", "\n\n[Worse Code]");
        if (!code) {
            code = section(user, "[Code 1]\n", "\n\n[Code 2]");
        }
        if (!code) {
            code = section(user, "[Code]\n", "\n\n[Task]");
        }
        out.text = fence(code ? *code : std::string(seed_operator_source()));
        break;
    }
    case Mode::corpus: {
        std::string digest = prompt_digest(request.messages);
        std::uint64_t h = std::stoull(digest.substr(0, 16), nullptr, 16);
        std::uint64_t pick = derive_seed(seed_ ^ h, stream_tag("mock-corpus"), request.call_index);
        out.text = "Here is the implementation.\n\n" + fence(corpus_[pick % corpus_.size()]);
        break;
    }
    }
    out.usage.input_tokens = estimate_tokens(request.messages);
    out.usage.output_tokens = estimate_tokens(out.text.size());
    return out;
}

HttpSettings http_settings_from_env() {
    HttpSettings s;
    const char* endpoint = std::getenv(kEndpointEnv);
    const char* key = std::getenv(kApiKeyEnv);
    if (!endpoint || !*endpoint) {
        throw LlmError(std::string(kEndpointEnv) + " is not set");
    }
    if (!key || !*key) {
        throw LlmError(std::string(kApiKeyEnv) + " is not set");
    }
    s.endpoint = endpoint;
    s.api_key = key;
    return s;
}

HttpProvider::HttpProvider(HttpSettings settings, std::function<void(std::chrono::duration<double>)> sleep)
    : settings_(std::move(settings)), sleep_(std::move(sleep)) {
    const std::string& url = settings_.endpoint;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw LlmError("endpoint must be an absolute http(s) URL: " + url);
    }
    std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw LlmError("unsupported endpoint scheme '" + scheme + "'");
    }
    auto path_start = url.find('/', scheme_end + 3);
    origin_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (!sleep_) {
        sleep_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
    }
}

std::string HttpProvider::request_body(const ChatRequest& request) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    nlohmann::json body{{"model", request.model},
                        {"messages", messages},
                        {"temperature", request.temperature},
                        {"max_tokens", request.max_output_tokens}};
    return body.dump();
}

ChatResponse HttpProvider::parse_response(const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw MalformedResponseError("response is not a JSON object");
    }
    ChatResponse out;
    try {
        const auto& choices = j.at("choices");
        if (!choices.is_array() || choices.empty()) {
            throw MalformedResponseError("response has no choices");
        }
        const auto& content = choices.at(0).at("message").at("content");
        if (!content.is_string() || content.get_ref<const std::string&>().empty()) {
            throw MalformedResponseError("response message content is empty");
        }
        out.text = content.get<std::string>();
        if (j.contains("usage") && j["usage"].is_object()) {
            out.usage.input_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
            out.usage.output_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
        }
        out.model = j.value("model", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw MalformedResponseError(std::string("unexpected response shape: ") + e.what());
    }
    if (out.usage.input_tokens < 0 || out.usage.output_tokens < 0) {
        throw MalformedResponseError("negative token usage");
    }
    return out;
}

ChatResponse HttpProvider::complete(const ChatRequest& request) {
    httplib::Client client(origin_);
    auto timeout = std::chrono::duration<double>(settings_.timeout);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    httplib::Headers headers{{"Authorization", "Bearer " + settings_.api_key}};
    const std::string body = request_body(request);
    const RetryPolicy& policy = settings_.retry;

    auto started = std::chrono::steady_clock::now();
    double backoff = policy.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
        if (attempt > 0) {
            sleep_(std::chrono::duration<double>(backoff));
            backoff = std::min(backoff * policy.multiplier, policy.max_backoff);
        }
        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (transient_status(res->status)) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            raise_status(res->status, res->body);
        }
        ChatResponse out = parse_response(res->body);
        out.retry_count = attempt;
        out.latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (out.model.empty()) {
            out.model = request.model;
        }
        return out;
    }
    throw RetryExhaustedError("giving up after " + std::to_string(policy.max_retries + 1) + " attempts: " + last_error,
                              policy.max_retries + 1);
}

} // namespace vrpagent
