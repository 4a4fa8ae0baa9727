#include "vrpagent/llm/gateway.hpp"

#include <chrono>

namespace vrpagent {

double token_cost(const Usage& usage, const TokenRates& rates) {
    return static_cast<double>(usage.input_tokens) * rates.input_per_million / 1e6 +
           static_cast<double>(usage.output_tokens) * rates.output_per_million / 1e6;
}

void UsageLedger::record(const std::string& purpose, const ChatResponse& response) {
    std::lock_guard lock(mutex_);
    Entry& e = by_purpose_[purpose];
    e.usage.input_tokens += response.usage.input_tokens;
    e.usage.output_tokens += response.usage.output_tokens;
    e.calls += 1;
    e.retries += response.retry_count;
    e.latency += response.latency;
}

void UsageLedger::record_failure(const std::string& purpose) {
    std::lock_guard lock(mutex_);
    by_purpose_[purpose].failures += 1;
}

Usage UsageLedger::total() const {
    std::lock_guard lock(mutex_);
    Usage u;
    for (const auto& [_, e] : by_purpose_) {
        u.input_tokens += e.usage.input_tokens;
        u.output_tokens += e.usage.output_tokens;
    }
    return u;
}

std::int64_t UsageLedger::calls() const {
    std::lock_guard lock(mutex_);
    std::int64_t n = 0;
    for (const auto& [_, e] : by_purpose_) {
        n += e.calls;
    }
    return n;
}

std::int64_t UsageLedger::failures() const {
    std::lock_guard lock(mutex_);
    std::int64_t n = 0;
    for (const auto& [_, e] : by_purpose_) {
        n += e.failures;
    }
    return n;
}

std::int64_t UsageLedger::retries() const {
    std::lock_guard lock(mutex_);
    std::int64_t n = 0;
    for (const auto& [_, e] : by_purpose_) {
        n += e.retries;
    }
    return n;
}

double UsageLedger::cost() const { return token_cost(total(), rates_); }

nlohmann::json UsageLedger::to_json() const {
    Usage t = total();
    nlohmann::json purposes = nlohmann::json::object();
    {
        std::lock_guard lock(mutex_);
        for (const auto& [name, e] : by_purpose_) {
            purposes[name] = {{"input_tokens", e.usage.input_tokens},
                              {"output_tokens", e.usage.output_tokens},
                              {"calls", e.calls},
                              {"failures", e.failures},
                              {"retries", e.retries},
                              {"latency_s", e.latency}};
        }
    }
    return {{"input_tokens", t.input_tokens},
            {"output_tokens", t.output_tokens},
            {"rates_per_million", {{"input", rates_.input_per_million}, {"output", rates_.output_per_million}}},
            {"cost", token_cost(t, rates_)},
            {"by_purpose", purposes}};
}

void UsageLedger::restore(const nlohmann::json& j) {
    std::lock_guard lock(mutex_);
    by_purpose_.clear();
    for (const auto& [name, e] : j.at("by_purpose").items()) {
        Entry& out = by_purpose_[name];
        out.usage.input_tokens = e.at("input_tokens").get<std::int64_t>();
        out.usage.output_tokens = e.at("output_tokens").get<std::int64_t>();
        out.calls = e.at("calls").get<std::int64_t>();
        out.failures = e.at("failures").get<std::int64_t>();
        out.retries = e.at("retries").get<std::int64_t>();
        out.latency = e.value("latency_s", 0.0);
    }
}

Gateway::Gateway(std::unique_ptr<Provider> provider, GatewaySettings settings)
    : provider_(std::move(provider)), settings_(std::move(settings)), ledger_(settings_.rates),
      slots_(std::max(1, settings_.max_concurrent)) {
    if (!provider_) {
        throw std::invalid_argument("gateway needs a provider");
    }
}

ChatResponse Gateway::complete(TemplateId task, const Bindings& bindings, const std::string& purpose,
                               std::uint64_t call_index, double temperature) {
    ChatRequest req;
    req.messages = render_messages(task, bindings);
    req.model = settings_.model;
    req.temperature = temperature;
    req.max_output_tokens = settings_.max_output_tokens;
    req.purpose = purpose;
    req.call_index = call_index;
    return complete(req);
}

ChatResponse Gateway::complete(const ChatRequest& request) {
    if (settings_.token_budget > 0) {
        Usage u = ledger_.total();
        if (u.input_tokens + u.output_tokens >= settings_.token_budget) {
            throw TokenBudgetExceeded("token budget of " + std::to_string(settings_.token_budget) + " exhausted");
        }
    }
    slots_.acquire();
    struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
    } release{slots_};
    auto started = std::chrono::steady_clock::now();
    try {
        ChatResponse r = provider_->complete(request);
        if (r.latency == 0.0) {
            r.latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        }
        ledger_.record(request.purpose, r);
        return r;
    } catch (...) {
        ledger_.record_failure(request.purpose);
        throw;
    }
}

} // namespace vrpagent
