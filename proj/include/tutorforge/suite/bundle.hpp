#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tutorforge/lang/ast.hpp"
#include "tutorforge/lang/entities.hpp"
#include "tutorforge/runtime/runtime.hpp"
#include "tutorforge/suite/concepts.hpp"
#include "tutorforge/suite/test_suite.hpp"

namespace tutorforge::suite {

enum class Mode { Learning, Development };
enum class SourceVisibility { WhiteBox, BlackBox };
enum class FeedbackMode { None, Detailed, Conceptual };
enum class Visibility { Private, Institution, Public };

std::string_view mode_name(Mode mode);
std::string_view source_visibility_name(SourceVisibility visibility);
std::string_view feedback_mode_name(FeedbackMode mode);
std::string_view visibility_name(Visibility visibility);

std::optional<Mode> parse_mode(std::string_view text);
std::optional<SourceVisibility> parse_source_visibility(std::string_view text);
std::optional<FeedbackMode> parse_feedback_mode(std::string_view text);
std::optional<Visibility> parse_visibility(std::string_view text);

struct FunctionSignature {
    std::string name;
    std::vector<lang::TypeKind> params;
    lang::TypeKind returns = lang::TypeKind::Void;

    bool operator==(const FunctionSignature&) const = default;
};

/// `name(int, string) -> int`
std::string format_signature(const FunctionSignature& signature);
FunctionSignature signature_of(const lang::Function& function);

struct InterfaceIssue {
    enum class Kind { Missing, Mismatch };
    Kind kind = Kind::Missing;
    std::string function;
    std::string message;
};

struct InterfaceReport {
    std::vector<InterfaceIssue> issues;

    bool conformant() const noexcept { return issues.empty(); }
};

/// Lists every interface function that is absent from `program` or declared
/// with a different signature. Extra functions in the program are allowed.
InterfaceReport check_interface(const lang::SourceProgram& program, const std::vector<FunctionSignature>& interface);

/// Relative path (forward slashes) -> file contents.
using BundleFiles = std::map<std::string, std::string>;

class BundleError : public std::runtime_error {
public:
    enum class Kind {
        MissingFile,
        InvalidManifest,
        InvalidSource,
        UnknownConcept,
        DanglingResource,
        FailingReferenceTest,
        IncompleteCoverage,
        Io,
    };

    BundleError(Kind kind, std::string message, std::vector<std::string> details = {});

    Kind kind() const noexcept { return kind_; }
    const std::vector<std::string>& details() const noexcept { return details_; }

private:
    Kind kind_;
    std::vector<std::string> details_;
};

std::string_view bundle_error_kind_name(BundleError::Kind kind);

struct AssignmentBundle {
    std::string id;
    std::string title;
    std::string specification;
    Mode mode = Mode::Learning;
    SourceVisibility source_visibility = SourceVisibility::WhiteBox;
    FeedbackMode feedback_mode = FeedbackMode::Detailed;
    Visibility visibility = Visibility::Private;
    std::vector<FunctionSignature> interface;

    lang::SourceProgram reference_program;
    lang::EntityCatalog catalog;
    TestSuite reference_suite;
    /// Reference suite run on the reference program, in suite order.
    std::vector<runtime::TestRunResult> reference_results;

    /// Default taxonomy with the bundle's own concepts applied on top.
    ConceptTaxonomy taxonomy;
    /// Concepts declared by the bundle's concepts.json, in file order.
    std::vector<ConceptTag> bundle_concepts;
    bool has_concepts_file = false;

    /// Every file of the bundle other than manifest.json and concepts.json,
    /// kept verbatim.
    BundleFiles files;

    /// Concept ids used by the reference suite, in first-use order.
    std::vector<std::string> used_concepts() const;
};

/// Validates a bundle given as a file map. Throws BundleError.
AssignmentBundle parse_bundle(const BundleFiles& files);

/// Reads every non-hidden regular file under `directory`.
BundleFiles read_bundle_files(const std::filesystem::path& directory);

AssignmentBundle load_bundle(const std::filesystem::path& directory);

/// Canonical file map of a bundle; manifest.json and concepts.json are
/// re-serialized, all other files are written back verbatim.
BundleFiles serialize_bundle(const AssignmentBundle& bundle);

void save_bundle(const AssignmentBundle& bundle, const std::filesystem::path& directory);

nlohmann::json manifest_to_json(const AssignmentBundle& bundle);

}  // namespace tutorforge::suite
