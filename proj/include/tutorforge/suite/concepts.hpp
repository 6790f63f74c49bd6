#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tutorforge::suite {

enum class ResourceKind { Text, Video };

std::string_view resource_kind_name(ResourceKind kind);
std::optional<ResourceKind> parse_resource_kind(std::string_view text);

/// A learning resource attached to a concept. `url` is one of:
///   http(s)://...                  external link
///   tutorforge:concepts/<id>       built-in notes page served by the platform
///   <relative path>                file shipped inside the assignment bundle
struct Resource {
    std::string label;
    std::string url;
    ResourceKind kind = ResourceKind::Text;

    bool operator==(const Resource&) const = default;
};

enum class ResourceScheme { External, BuiltIn, BundleFile };

ResourceScheme resource_scheme(std::string_view url);

struct ConceptTag {
    std::string id;
    std::string title;
    std::string explanation;
    std::vector<Resource> resources;

    bool operator==(const ConceptTag&) const = default;
};

class ConceptTaxonomy {
public:
    ConceptTaxonomy() = default;
    explicit ConceptTaxonomy(std::vector<ConceptTag> concepts);

    const ConceptTag* find(std::string_view id) const;
    const std::vector<ConceptTag>& concepts() const noexcept { return concepts_; }

    /// Replaces the concept with the same id, or appends a new one.
    void upsert(ConceptTag concept_tag);

private:
    std::vector<ConceptTag> concepts_;
};

/// The ten concepts shipped with the tool.
const ConceptTaxonomy& default_taxonomy();

/// Markdown notes for a built-in concept, or nullopt for unknown ids.
std::optional<std::string> builtin_concept_notes(std::string_view id);

std::string builtin_concept_url(std::string_view id);

nlohmann::json concept_to_json(const ConceptTag& concept_tag);
/// Throws std::invalid_argument on malformed input.
ConceptTag concept_from_json(const nlohmann::json& json);

}  // namespace tutorforge::suite
