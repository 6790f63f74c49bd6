#include "tutorforge/suite/concepts.hpp"

#include <array>
#include <stdexcept>

namespace tutorforge::suite {

namespace {

constexpr std::string_view kBuiltinPrefix = "tutorforge:concepts/";

struct Builtin {
    std::string_view id;
    std::string_view title;
    std::string_view explanation;
    std::string_view notes;
};

constexpr std::array<Builtin, 10> kBuiltins{{
    {"boundary-conditions", "Boundary conditions",
     "Some inputs or states sit at the edge of what the code accepts. Tests should probe values just inside, "
     "exactly at, and just outside each edge.",
     "Look for every comparison in the specification: limits, capacities, empty and full states.\n\n"
     "For a limit `n`, try `n - 1`, `n` and `n + 1`. For a collection, try it empty, with one element and at "
     "capacity.\n\n"
     "Ask: what does the specification say should happen at the edge, and have I checked it?\n"},
    {"compound-boolean-conditions", "Compound boolean conditions",
     "A decision built from several conditions joined by and/or can be reached in more than one way. Each "
     "part should be seen both true and false.",
     "When a rule reads \"if A or B\", a test that only makes A true never tells you whether B is handled.\n\n"
     "List each simple condition in the rule and find an input that makes it decide the outcome on its own. "
     "Remember that evaluation stops early: in `A || B`, B is only looked at when A is false.\n"},
    {"equivalence-partitioning", "Equivalence partitioning",
     "Inputs fall into groups the code treats alike. One representative test per group, valid and invalid, "
     "gives broad confidence with few tests.",
     "Split the input space into classes that the specification handles the same way, for example "
     "\"negative\", \"zero\", \"positive\".\n\n"
     "Pick one value from each class, and include the invalid classes too. Two tests from the same class add "
     "little.\n"},
    {"exception-handling", "Exception handling",
     "Operations that must refuse bad requests do so by raising an error. Tests should trigger every "
     "documented error and check which error is raised.",
     "Read the specification for words like \"raises\", \"rejects\" or \"fails\". Each one is a test.\n\n"
     "Use `assert_throws(call, Name)` to check that the right error is raised, and check afterwards that the "
     "state did not change.\n"},
    {"state-transitions", "State transitions",
     "Objects with memory behave differently depending on earlier calls. Tests should drive the object through "
     "its states and check each move.",
     "Sketch the states the object can be in and the calls that move it between them.\n\n"
     "Cover each transition at least once, and check the observable state after it. Sequences such as "
     "add-then-remove often reveal more than single calls.\n"},
    {"loop-iteration", "Loop iteration",
     "Loops hide bugs at zero, one and many iterations. Tests should make each loop run none, once and several "
     "times.",
     "For each loop in the behaviour, find inputs where it runs zero times, exactly once, and more than once.\n\n"
     "Off-by-one mistakes usually show up at zero or one.\n"},
    {"input-validation", "Input validation",
     "Code that accepts outside data must reject malformed or out-of-range input. Tests should feed it the "
     "inputs it is meant to refuse.",
     "List what counts as invalid input: wrong ranges, wrong formats, missing pieces.\n\n"
     "Give each kind of invalid input its own test and check that it is refused without side effects.\n"},
    {"data-integrity", "Data integrity",
     "Stored data must stay consistent across operations, including failed ones. Tests should check the state "
     "after every kind of call.",
     "After each operation, ask whether everything the object stores is still correct.\n\n"
     "Failed operations matter most: a rejected request should leave the data exactly as it was.\n"},
    {"interface-dispatch", "Interface dispatch",
     "When behaviour is selected by name or by kind, every selectable option needs a test, including an "
     "unknown one.",
     "Enumerate every option the dispatcher can choose, and test each once.\n\n"
     "Also test what happens with an option that does not exist.\n"},
    {"observer-notification", "Observer notification",
     "Objects that notify listeners must notify the right ones, at the right time, and not otherwise. Tests "
     "should check who was told what.",
     "Register listeners, trigger events, and check which listeners were notified and how often.\n\n"
     "Include the cases with no listener, with several listeners, and with events that should notify nobody.\n"},
}};

ConceptTaxonomy build_default() {
    std::vector<ConceptTag> concepts;
    for (const auto& b : kBuiltins) {
        ConceptTag tag;
        tag.id = std::string(b.id);
        tag.title = std::string(b.title);
        tag.explanation = std::string(b.explanation);
        tag.resources.push_back({std::string(b.title) + " notes", builtin_concept_url(b.id), ResourceKind::Text});
        concepts.push_back(std::move(tag));
    }
    return ConceptTaxonomy(std::move(concepts));
}

const nlohmann::json& require(const nlohmann::json& json, const char* key) {
    if (!json.is_object() || !json.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
    return json.at(key);
}

std::string require_string(const nlohmann::json& json, const char* key) {
    const auto& value = require(json, key);
    if (!value.is_string() || value.get_ref<const std::string&>().empty()) {
        throw std::invalid_argument(std::string("field '") + key + "' must be a non-empty string");
    }
    return value.get<std::string>();
}

}  // namespace

std::string_view resource_kind_name(ResourceKind kind) { return kind == ResourceKind::Video ? "video" : "text"; }

std::optional<ResourceKind> parse_resource_kind(std::string_view text) {
    if (text == "text") return ResourceKind::Text;
    if (text == "video") return ResourceKind::Video;
    return std::nullopt;
}

ResourceScheme resource_scheme(std::string_view url) {
    if (url.starts_with("http://") || url.starts_with("https://")) return ResourceScheme::External;
    if (url.starts_with(kBuiltinPrefix)) return ResourceScheme::BuiltIn;
    return ResourceScheme::BundleFile;
}

ConceptTaxonomy::ConceptTaxonomy(std::vector<ConceptTag> concepts) {
    for (auto& c : concepts) upsert(std::move(c));
}

const ConceptTag* ConceptTaxonomy::find(std::string_view id) const {
    for (const auto& c : concepts_) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

void ConceptTaxonomy::upsert(ConceptTag concept_tag) {
    for (auto& c : concepts_) {
        if (c.id == concept_tag.id) {
            c = std::move(concept_tag);
            return;
        }
    }
    concepts_.push_back(std::move(concept_tag));
}

const ConceptTaxonomy& default_taxonomy() {
    static const ConceptTaxonomy taxonomy = build_default();
    return taxonomy;
}

std::optional<std::string> builtin_concept_notes(std::string_view id) {
    for (const auto& b : kBuiltins) {
        if (b.id == id) return "# " + std::string(b.title) + "\n\n" + std::string(b.explanation) + "\n\n" + std::string(b.notes);
    }
    return std::nullopt;
}

std::string builtin_concept_url(std::string_view id) { return std::string(kBuiltinPrefix) + std::string(id); }

nlohmann::json concept_to_json(const ConceptTag& concept_tag) {
    nlohmann::json resources = nlohmann::json::array();
    for (const auto& r : concept_tag.resources) {
        resources.push_back({{"label", r.label}, {"url", r.url}, {"kind", resource_kind_name(r.kind)}});
    }
    return {{"id", concept_tag.id},
            {"title", concept_tag.title},
            {"explanation", concept_tag.explanation},
            {"resources", resources}};
}

ConceptTag concept_from_json(const nlohmann::json& json) {
    ConceptTag tag;
    tag.id = require_string(json, "id");
    tag.title = require_string(json, "title");
    tag.explanation = require_string(json, "explanation");
    const auto& resources = require(json, "resources");
    if (!resources.is_array()) throw std::invalid_argument("concept '" + tag.id + "': resources must be an array");
    for (const auto& r : resources) {
        Resource resource;
        resource.label = require_string(r, "label");
        resource.url = require_string(r, "url");
        const auto kind = parse_resource_kind(require_string(r, "kind"));
        if (!kind) throw std::invalid_argument("concept '" + tag.id + "': resource kind must be text or video");
        resource.kind = *kind;
        tag.resources.push_back(std::move(resource));
    }
    if (tag.resources.empty()) throw std::invalid_argument("concept '" + tag.id + "' has no resources");
    return tag;
}

}  // namespace tutorforge::suite
