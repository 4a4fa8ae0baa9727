#pragma once

#include "vrpagent/model/instance.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vrpagent {

enum class TemplateId {
    system,
    seed,
    crossover,
    mutation_ablation,
    mutation_extend,
    mutation_adjust,
    mutation_refactor,
    crossover_standard,
};

std::string_view to_string(TemplateId id);
/// Accepts the dashed ids ("mutation-extend"). Throws std::invalid_argument.
TemplateId parse_template_id(std::string_view name);
std::vector<TemplateId> all_template_ids();

class RenderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raw template body with {slot} placeholders.
std::string_view template_body(TemplateId id);
/// Slot names appearing in the body, sorted.
std::vector<std::string> required_slots(TemplateId id);
/// SHA-256 hex digest the body is pinned to.
std::string_view pinned_digest(TemplateId id);
/// Throws RenderError naming the first template whose body no longer matches its pin.
void verify_template_pins();

using Bindings = std::map<std::string, std::string, std::less<>>;

/**
 * Single-pass substitution of {slot} placeholders. Bound values are inserted
 * verbatim and never rescanned. Throws RenderError naming a missing slot.
 * Extra bindings are ignored.
 */
std::string render_template(TemplateId id, const Bindings& bindings);
std::string render_text(std::string_view body, const Bindings& bindings);

struct Message {
    std::string role;  // "system" or "user"
    std::string content;
};

/// System message (rendered system template) followed by the task as a user message.
std::vector<Message> render_messages(TemplateId task, const Bindings& bindings);

/// Problem context bound into every prompt.
std::string_view problem_name_long(ProblemKind kind);
std::string_view problem_description(ProblemKind kind);
std::string_view lns_headers(ProblemKind kind);
/// Reference operator source shown to the model and used as a fallback seed.
std::string_view seed_operator_source();

/// Bindings shared by all prompts for `kind`: problem_name_long, problem_desc,
/// LNS_headers, seed_code.
Bindings problem_bindings(ProblemKind kind);

/// Renders a fraction in (0, 1] as an integer percentage string, e.g. 0.8 -> "80".
std::string percent_string(double fraction);

class ExtractionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Interior of the last ``` fenced block; the language tag is ignored.
std::string extract_code(std::string_view response);

} // namespace vrpagent
