#pragma once

#include "vrpagent/llm/provider.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>

namespace vrpagent {

/// Price per million tokens.
struct TokenRates {
    double input_per_million = 0.0;
    double output_per_million = 0.0;
};

double token_cost(const Usage& usage, const TokenRates& rates);

/// Thread-safe running totals of token usage, overall and per purpose.
class UsageLedger {
public:
    explicit UsageLedger(TokenRates rates = {}) : rates_(rates) {}

    void record(const std::string& purpose, const ChatResponse& response);
    void record_failure(const std::string& purpose);

    Usage total() const;
    std::int64_t calls() const;
    std::int64_t failures() const;
    std::int64_t retries() const;
    double cost() const;
    nlohmann::json to_json() const;
    /// Restores totals written by to_json (used on resume).
    void restore(const nlohmann::json& j);

private:
    struct Entry {
        Usage usage;
        std::int64_t calls = 0;
        std::int64_t failures = 0;
        std::int64_t retries = 0;
        double latency = 0.0;
    };
    TokenRates rates_;
    mutable std::mutex mutex_;
    std::map<std::string, Entry> by_purpose_;
};

struct GatewaySettings {
    std::string model = "mock";
    int max_concurrent = 4;
    std::int64_t token_budget = 0;  // total tokens; 0 = unlimited
    TokenRates rates;
    double init_temperature = 1.0;
    double breed_temperature = 0.7;
    int max_output_tokens = 8192;
};

class TokenBudgetExceeded : public LlmError {
public:
    using LlmError::LlmError;
};

/// Shared front door to a provider: admission control and accounting.
class Gateway {
public:
    Gateway(std::unique_ptr<Provider> provider, GatewaySettings settings);

    /// Renders `task` with `bindings`, sends it, records usage. Blocks while
    /// max_concurrent requests are in flight.
    ChatResponse complete(TemplateId task, const Bindings& bindings, const std::string& purpose,
                          std::uint64_t call_index, double temperature);
    ChatResponse complete(const ChatRequest& request);

    const GatewaySettings& settings() const { return settings_; }
    UsageLedger& ledger() { return ledger_; }
    const UsageLedger& ledger() const { return ledger_; }
    std::string provider_name() const { return provider_->name(); }

private:
    std::unique_ptr<Provider> provider_;
    GatewaySettings settings_;
    UsageLedger ledger_;
    std::counting_semaphore<> slots_;
};

} // namespace vrpagent
