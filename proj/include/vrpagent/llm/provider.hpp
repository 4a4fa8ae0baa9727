#pragma once

#include "vrpagent/llm/templates.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vrpagent {

class LlmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
/// 401/403; never retried.
class AuthError : public LlmError {
public:
    using LlmError::LlmError;
};
/// Response arrived but does not have the expected shape.
class MalformedResponseError : public LlmError {
public:
    using LlmError::LlmError;
};
/// Transient failures persisted past the retry budget.
class RetryExhaustedError : public LlmError {
public:
    RetryExhaustedError(const std::string& what, int attempts) : LlmError(what), attempts_(attempts) {}
    int attempts() const { return attempts_; }

private:
    int attempts_;
};
/// Non-retryable HTTP status other than auth (e.g. 400).
class RequestRejectedError : public LlmError {
public:
    RequestRejectedError(const std::string& what, int status) : LlmError(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

struct Usage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

struct ChatRequest {
    std::vector<Message> messages;
    std::string model;
    double temperature = 1.0;
    int max_output_tokens = 8192;
    std::string purpose;          // free-form tag for the ledger ("init", "crossover", ...)
    std::uint64_t call_index = 0; // caller-assigned, stable across resumes
};

struct ChatResponse {
    std::string text;
    Usage usage;
    double latency = 0.0;  // seconds
    int retry_count = 0;
    std::string model;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

/// SHA-256 over roles and contents of the messages.
std::string prompt_digest(const std::vector<Message>& messages);

/// Operator pairs for the corpus mock: five deterministic shim-compatible
/// variants and one that fails to compile.
std::vector<std::string> default_mock_corpus();

/**
 * Offline provider.
 *
 * corpus: answers with one fenced source drawn from the corpus by a hash of
 * (prompt digest, call index, seed). echo: answers with the first code section
 * of the prompt ([Better Code] or [Code]), or the seed code for other prompts.
 * scripted: replays a fixed list of replies in arrival order. Corpus and echo
 * report token usage estimated at four characters per token; scripted reports
 * zero.
 */
class MockProvider : public Provider {
public:
    struct Reply {
        std::string text;
        int fail_status = 0;  // nonzero: raise as if the endpoint returned this status
    };

    static std::unique_ptr<MockProvider> corpus(std::vector<std::string> sources, std::uint64_t seed);
    static std::unique_ptr<MockProvider> echo();
    static std::unique_ptr<MockProvider> scripted(std::vector<Reply> replies);

    ChatResponse complete(const ChatRequest& request) override;
    std::string name() const override { return "mock"; }
    std::size_t calls() const;

private:
    enum class Mode { corpus, echo, scripted };
    explicit MockProvider(Mode mode) : mode_(mode) {}

    Mode mode_;
    std::vector<std::string> corpus_;
    std::uint64_t seed_ = 0;
    std::vector<Reply> script_;
    mutable std::mutex mutex_;
    std::size_t next_ = 0;
    std::size_t calls_ = 0;
};

struct RetryPolicy {
    int max_retries = 4;
    double initial_backoff = 1.0;  // seconds
    double max_backoff = 30.0;
    double multiplier = 2.0;
};

struct HttpSettings {
    std::string endpoint;  // full URL of the chat-completions resource
    std::string api_key;
    double timeout = 120.0;
    RetryPolicy retry;
};

inline constexpr const char* kEndpointEnv = "VRPAGENT_LLM_ENDPOINT";
inline constexpr const char* kApiKeyEnv = "VRPAGENT_LLM_API_KEY";

/// Reads the endpoint and credential from the environment. Throws LlmError when
/// either is unset.
HttpSettings http_settings_from_env();

/// OpenAI-compatible chat-completions client.
class HttpProvider : public Provider {
public:
    /// `sleep` is injectable for tests; defaults to std::this_thread::sleep_for.
    explicit HttpProvider(HttpSettings settings,
                          std::function<void(std::chrono::duration<double>)> sleep = {});

    ChatResponse complete(const ChatRequest& request) override;
    std::string name() const override { return "http"; }

    /// Builds the JSON request body.
    static std::string request_body(const ChatRequest& request);
    /// Parses a response body; throws MalformedResponseError.
    static ChatResponse parse_response(const std::string& body);

private:
    HttpSettings settings_;
    std::string origin_;
    std::string path_;
    std::function<void(std::chrono::duration<double>)> sleep_;
};

} // namespace vrpagent
