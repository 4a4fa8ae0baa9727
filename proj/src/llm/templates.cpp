#include "vrpagent/llm/templates.hpp"

#include "prompt_texts.hpp"
#include "vrpagent/util/digest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace vrpagent {

namespace {

bool is_slot_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_slot_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

/// Calls on_text / on_slot for the pieces of `body`.
template <class Text, class Slot>
void scan(std::string_view body, Text on_text, Slot on_slot) {
    std::size_t i = 0;
    std::size_t plain = 0;
    while (i < body.size()) {
        if (body[i] == '{' && i + 1 < body.size() && is_slot_start(body[i + 1])) {
            std::size_t j = i + 1;
            while (j < body.size() && is_slot_char(body[j])) {
                ++j;
            }
            if (j < body.size() && body[j] == '}') {
                on_text(body.substr(plain, i - plain));
                on_slot(body.substr(i + 1, j - i - 1));
                i = j + 1;
                plain = i;
                continue;
            }
        }
        ++i;
    }
    on_text(body.substr(plain));
}

} // namespace

std::string_view to_string(TemplateId id) {
    switch (id) {
    case TemplateId::system:
        return "system";
    case TemplateId::seed:
        return "seed";
    case TemplateId::crossover:
        return "crossover";
    case TemplateId::mutation_ablation:
        return "mutation-ablation";
    case TemplateId::mutation_extend:
        return "mutation-extend";
    case TemplateId::mutation_adjust:
        return "mutation-adjust";
    case TemplateId::mutation_refactor:
        return "mutation-refactor";
    case TemplateId::crossover_standard:
        return "crossover-standard";
    }
    return "?";
}

std::vector<TemplateId> all_template_ids() {
    return {TemplateId::system,          TemplateId::seed,           TemplateId::crossover,
            TemplateId::mutation_ablation, TemplateId::mutation_extend, TemplateId::mutation_adjust,
            TemplateId::mutation_refactor, TemplateId::crossover_standard};
}

TemplateId parse_template_id(std::string_view name) {
    for (TemplateId id : all_template_ids()) {
        if (to_string(id) == name) {
            return id;
        }
    }
    throw std::invalid_argument("unknown template id '" + std::string(name) + "'");
}

std::string_view template_body(TemplateId id) {
    switch (id) {
    case TemplateId::system:
        return prompts::kSystem;
    case TemplateId::seed:
        return prompts::kSeed;
    case TemplateId::crossover:
        return prompts::kCrossover;
    case TemplateId::mutation_ablation:
        return prompts::kMutationAblation;
    case TemplateId::mutation_extend:
        return prompts::kMutationExtend;
    case TemplateId::mutation_adjust:
        return prompts::kMutationAdjust;
    case TemplateId::mutation_refactor:
        return prompts::kMutationRefactor;
    case TemplateId::crossover_standard:
        return prompts::kCrossoverStandard;
    }
    return {};
}

std::string_view pinned_digest(TemplateId id) {
    switch (id) {
    case TemplateId::system:
        return "7f4572d21fd4b45fd6a4280c5cac4516e3a3bf99f030b4d12ee5803481980d8d";
    case TemplateId::seed:
        return "42c47d6f15dc9eb8f19deca490fb1771484dcea7743f9d6d8ee95e7104b2c506";
    case TemplateId::crossover:
        return "8ab967e4340237760c1cdba7f58eb1d516167ee20e67eea1bfe612cc691677c9";
    case TemplateId::mutation_ablation:
        return "356df17b4789b9fc7dd16874d59fcd04a035fbaa201fdfd04e1a8120f19577fd";
    case TemplateId::mutation_extend:
        return "fd84a0b347e21a8a290572e09e035dfb422f35372ca7123d0db4c99425664907";
    case TemplateId::mutation_adjust:
        return "d1ad4edd9867e1de880257b1e6571566d599d97bd082ff671a5fba1604297e26";
    case TemplateId::mutation_refactor:
        return "149625628a7d4ecbdc96e5a8979294868fd5b6a4b331671ee35a90300e5115a4";
    case TemplateId::crossover_standard:
        return "ea5ea6e5114171af7e63b191833f0a321cc74667df605e96dbdba672096936a1";
    }
    return {};
}

void verify_template_pins() {
    for (TemplateId id : all_template_ids()) {
        if (sha256_hex(template_body(id)) != pinned_digest(id)) {
            throw RenderError("template '" + std::string(to_string(id)) + "' does not match its pinned digest");
        }
    }
}

std::vector<std::string> required_slots(TemplateId id) {
    std::set<std::string> slots;
    scan(template_body(id), [](std::string_view) {}, [&](std::string_view s) { slots.emplace(s); });
    return {slots.begin(), slots.end()};
}

std::string render_text(std::string_view body, const Bindings& bindings) {
    std::string out;
    out.reserve(body.size());
    scan(
        body, [&](std::string_view text) { out.append(text); },
        [&](std::string_view slot) {
            auto it = bindings.find(slot);
            if (it == bindings.end()) {
                throw RenderError("missing binding for slot '" + std::string(slot) + "'");
            }
            out.append(it->second);
        });
    return out;
}

std::string render_template(TemplateId id, const Bindings& bindings) {
    return render_text(template_body(id), bindings);
}

std::vector<Message> render_messages(TemplateId task, const Bindings& bindings) {
    std::vector<Message> out;
    out.push_back({"system", render_template(TemplateId::system, bindings)});
    if (task != TemplateId::system) {
        out.push_back({"user", render_template(task, bindings)});
    }
    return out;
}

std::string_view problem_name_long(ProblemKind kind) {
    switch (kind) {
    case ProblemKind::CVRP:
        return "Capacitated Vehicle Routing Problem (CVRP)";
    case ProblemKind::VRPTW:
        return "Vehicle Routing Problem with Time Windows (VRPTW)";
    case ProblemKind::PCVRP:
        return "Prize-Collecting Vehicle Routing Problem (PCVRP)";
    }
    return {};
}

std::string_view problem_description(ProblemKind kind) {
    switch (kind) {
    case ProblemKind::CVRP:
        return prompts::kCvrpDescription;
    case ProblemKind::VRPTW:
        return prompts::kVrptwDescription;
    case ProblemKind::PCVRP:
        return prompts::kPcvrpDescription;
    }
    return {};
}

std::string_view lns_headers(ProblemKind kind) {
    switch (kind) {
    case ProblemKind::CVRP:
        return prompts::kCvrpHeaders;
    case ProblemKind::VRPTW:
        return prompts::kVrptwHeaders;
    case ProblemKind::PCVRP:
        return prompts::kPcvrpHeaders;
    }
    return {};
}

std::string_view seed_operator_source() { return prompts::kSeedCode; }

Bindings problem_bindings(ProblemKind kind) {
    return {{"problem_name_long", std::string(problem_name_long(kind))},
            {"problem_desc", std::string(problem_description(kind))},
            {"LNS_headers", std::string(lns_headers(kind))},
            {"seed_code", std::string(seed_operator_source())}};
}

std::string percent_string(double fraction) {
    double pct = fraction * 100.0;
    double rounded = std::round(pct);
    if (std::abs(pct - rounded) < 1e-9) {
        return std::to_string(static_cast<long long>(rounded));
    }
    std::string s = std::to_string(pct);
    while (!s.empty() && s.back() == '0') {
        s.pop_back();
    }
    if (!s.empty() && s.back() == '.') {
        s.pop_back();
    }
    return s;
}

std::string extract_code(std::string_view response) {
    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    std::size_t pos = 0;
    while (true) {
        std::size_t open = response.find("```", pos);
        if (open == std::string_view::npos) {
            break;
        }
        std::size_t line_end = response.find('\n', open);
        if (line_end == std::string_view::npos) {
            break;
        }
        std::size_t close = response.find("```", line_end + 1);
        // A closing fence must start its own line.
        while (close != std::string_view::npos && close > 0 && response[close - 1] != '\n') {
            close = response.find("```", close + 3);
        }
        if (close == std::string_view::npos) {
            break;
        }
        blocks.emplace_back(line_end + 1, close);
        std::size_t after = response.find('\n', close);
        pos = after == std::string_view::npos ? response.size() : after;
    }
    if (blocks.empty()) {
        throw ExtractionError("response contains no fenced code block");
    }
    auto [begin, end] = blocks.back();
    std::string code(response.substr(begin, end - begin));
    while (!code.empty() && code.back() == '\n') {
        code.pop_back();
    }
    return code;
}

} // namespace vrpagent
