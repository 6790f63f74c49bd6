#include "tutorforge/suite/bundle.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace tutorforge::suite {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kManifest = "manifest.json";
constexpr std::string_view kConcepts = "concepts.json";
constexpr std::string_view kSpecification = "spec.md";
constexpr std::string_view kReferenceDir = "reference/";
constexpr std::string_view kTestsDir = "tests/";

const std::set<std::string> kManifestKeys{"id",          "title",    "mode",     "source_visibility",
                                          "feedback_mode", "visibility", "interface"};

std::optional<lang::TypeKind> parse_type(std::string_view text) {
    for (auto type : {lang::TypeKind::Void, lang::TypeKind::Int, lang::TypeKind::Bool, lang::TypeKind::String,
                      lang::TypeKind::IntArray}) {
        if (lang::type_name(type) == text) return type;
    }
    return std::nullopt;
}

[[noreturn]] void manifest_error(const std::string& message) {
    throw BundleError(BundleError::Kind::InvalidManifest, "manifest.json: " + message);
}

std::string manifest_string(const json& manifest, const char* key) {
    if (!manifest.contains(key)) manifest_error(std::string("missing field '") + key + "'");
    const auto& value = manifest.at(key);
    if (!value.is_string() || value.get_ref<const std::string&>().empty()) {
        manifest_error(std::string("field '") + key + "' must be a non-empty string");
    }
    return value.get<std::string>();
}

template <typename Enum, typename Parser>
Enum manifest_enum(const json& manifest, const char* key, Parser parse) {
    const auto text = manifest_string(manifest, key);
    const auto value = parse(text);
    if (!value) manifest_error(std::string("field '") + key + "' has invalid value '" + text + "'");
    return *value;
}

bool valid_id(std::string_view id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id) {
        if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_')) return false;
    }
    return true;
}

bool safe_relative_path(std::string_view path) {
    if (path.empty() || path.front() == '/' || path.find('\\') != std::string_view::npos) return false;
    std::size_t start = 0;
    while (start <= path.size()) {
        const auto end = std::min(path.find('/', start), path.size());
        const auto part = path.substr(start, end - start);
        if (part.empty() || part == "." || part == "..") return false;
        start = end + 1;
    }
    return true;
}

std::vector<FunctionSignature> parse_interface(const json& manifest) {
    std::vector<FunctionSignature> out;
    if (!manifest.contains("interface")) return out;
    const auto& list = manifest.at("interface");
    if (!list.is_array()) manifest_error("field 'interface' must be an array");
    std::set<std::string> names;
    for (const auto& entry : list) {
        FunctionSignature sig;
        sig.name = manifest_string(entry, "name");
        if (!names.insert(sig.name).second) manifest_error("interface lists '" + sig.name + "' twice");
        if (!entry.contains("params") || !entry.at("params").is_array()) {
            manifest_error("interface entry '" + sig.name + "' needs a params array");
        }
        for (const auto& p : entry.at("params")) {
            const auto type = p.is_string() ? parse_type(p.get<std::string>()) : std::nullopt;
            if (!type || *type == lang::TypeKind::Void) manifest_error("interface entry '" + sig.name + "' has an invalid parameter type");
            sig.params.push_back(*type);
        }
        const auto returns = parse_type(manifest_string(entry, "returns"));
        if (!returns) manifest_error("interface entry '" + sig.name + "' has an invalid return type");
        sig.returns = *returns;
        out.push_back(std::move(sig));
    }
    return out;
}

std::string display_path(std::string_view bundle_path, std::string_view dir) { return std::string(bundle_path.substr(dir.size())); }

std::vector<lang::SourceInput> collect_sources(const BundleFiles& files, std::string_view dir) {
    std::vector<lang::SourceInput> out;
    for (const auto& [path, text] : files) {
        if (path.starts_with(dir) && path.ends_with(".tl") && path.find('/', dir.size()) == std::string::npos) {
            out.push_back({display_path(path, dir), text});
        }
    }
    return out;
}

[[noreturn]] void source_error(const lang::ParseError& e, std::string_view dir) {
    throw BundleError(BundleError::Kind::InvalidSource, std::string(dir) + e.what(),
                      {std::string(dir) + e.path() + ":" + std::to_string(e.line()) + ":" +
                       std::to_string(e.column()) + ": " + e.detail()});
}

void validate_resources(const ConceptTag& tag, const BundleFiles& files) {
    for (const auto& r : tag.resources) {
        switch (resource_scheme(r.url)) {
            case ResourceScheme::External: break;
            case ResourceScheme::BuiltIn: {
                const auto id = std::string_view(r.url).substr(builtin_concept_url("").size());
                if (!builtin_concept_notes(id)) {
                    throw BundleError(BundleError::Kind::DanglingResource,
                                      "concept '" + tag.id + "' links to unknown built-in notes '" + r.url + "'", {r.url});
                }
                break;
            }
            case ResourceScheme::BundleFile:
                if (!safe_relative_path(r.url) || !files.contains(r.url)) {
                    throw BundleError(BundleError::Kind::DanglingResource,
                                      "concept '" + tag.id + "' links to missing bundle file '" + r.url + "'", {r.url});
                }
                break;
        }
    }
}

}  // namespace

std::string_view mode_name(Mode mode) { return mode == Mode::Development ? "DEVELOPMENT" : "LEARNING"; }

std::string_view source_visibility_name(SourceVisibility visibility) {
    return visibility == SourceVisibility::BlackBox ? "BLACK_BOX" : "WHITE_BOX";
}

std::string_view feedback_mode_name(FeedbackMode mode) {
    switch (mode) {
        case FeedbackMode::None: return "NONE";
        case FeedbackMode::Detailed: return "DETAILED";
        case FeedbackMode::Conceptual: return "CONCEPTUAL";
    }
    return "?";
}

std::string_view visibility_name(Visibility visibility) {
    switch (visibility) {
        case Visibility::Private: return "PRIVATE";
        case Visibility::Institution: return "INSTITUTION";
        case Visibility::Public: return "PUBLIC";
    }
    return "?";
}

std::optional<Mode> parse_mode(std::string_view text) {
    if (text == "LEARNING") return Mode::Learning;
    if (text == "DEVELOPMENT") return Mode::Development;
    return std::nullopt;
}

std::optional<SourceVisibility> parse_source_visibility(std::string_view text) {
    if (text == "WHITE_BOX") return SourceVisibility::WhiteBox;
    if (text == "BLACK_BOX") return SourceVisibility::BlackBox;
    return std::nullopt;
}

std::optional<FeedbackMode> parse_feedback_mode(std::string_view text) {
    if (text == "NONE") return FeedbackMode::None;
    if (text == "DETAILED") return FeedbackMode::Detailed;
    if (text == "CONCEPTUAL") return FeedbackMode::Conceptual;
    return std::nullopt;
}

std::optional<Visibility> parse_visibility(std::string_view text) {
    if (text == "PRIVATE") return Visibility::Private;
    if (text == "INSTITUTION") return Visibility::Institution;
    if (text == "PUBLIC") return Visibility::Public;
    return std::nullopt;
}

std::string format_signature(const FunctionSignature& signature) {
    std::string out = signature.name + "(";
    for (std::size_t i = 0; i < signature.params.size(); ++i) {
        if (i) out += ", ";
        out += lang::type_name(signature.params[i]);
    }
    return out + ") -> " + std::string(lang::type_name(signature.returns));
}

FunctionSignature signature_of(const lang::Function& function) {
    FunctionSignature sig;
    sig.name = function.name;
    for (const auto& p : function.params) sig.params.push_back(p.type);
    sig.returns = function.return_type;
    return sig;
}

InterfaceReport check_interface(const lang::SourceProgram& program, const std::vector<FunctionSignature>& interface) {
    InterfaceReport report;
    for (const auto& expected : interface) {
        const auto* fn = program.find_function(expected.name);
        if (!fn) {
            report.issues.push_back({InterfaceIssue::Kind::Missing, expected.name,
                                     "missing function " + format_signature(expected)});
            continue;
        }
        const auto found = signature_of(*fn);
        if (found != expected) {
            report.issues.push_back({InterfaceIssue::Kind::Mismatch, expected.name,
                                     "signature mismatch: expected " + format_signature(expected) + " but found " +
                                         format_signature(found)});
        }
    }
    return report;
}

BundleError::BundleError(Kind kind, std::string message, std::vector<std::string> details)
    : std::runtime_error(std::move(message)), kind_(kind), details_(std::move(details)) {}

std::string_view bundle_error_kind_name(BundleError::Kind kind) {
    switch (kind) {
        case BundleError::Kind::MissingFile: return "missing_file";
        case BundleError::Kind::InvalidManifest: return "invalid_manifest";
        case BundleError::Kind::InvalidSource: return "invalid_source";
        case BundleError::Kind::UnknownConcept: return "unknown_concept";
        case BundleError::Kind::DanglingResource: return "dangling_resource";
        case BundleError::Kind::FailingReferenceTest: return "failing_reference_test";
        case BundleError::Kind::IncompleteCoverage: return "incomplete_coverage";
        case BundleError::Kind::Io: return "io";
    }
    return "?";
}

std::vector<std::string> AssignmentBundle::used_concepts() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& test : reference_suite.tests) {
        for (const auto& c : test.concepts) {
            if (seen.insert(c).second) out.push_back(c);
        }
    }
    return out;
}

AssignmentBundle parse_bundle(const BundleFiles& files) {
    for (const auto& [path, text] : files) {
        if (!safe_relative_path(path)) {
            throw BundleError(BundleError::Kind::InvalidManifest, "unsafe path in bundle: '" + path + "'", {path});
        }
    }
    auto require_file = [&](std::string_view name) -> const std::string& {
        const auto it = files.find(std::string(name));
        if (it == files.end()) {
            throw BundleError(BundleError::Kind::MissingFile, "bundle is missing " + std::string(name), {std::string(name)});
        }
        return it->second;
    };

    AssignmentBundle bundle;
    json manifest;
    try {
        manifest = json::parse(require_file(kManifest));
    } catch (const json::parse_error& e) {
        manifest_error(std::string("not valid JSON: ") + e.what());
    }
    if (!manifest.is_object()) manifest_error("top level must be an object");
    for (const auto& [key, value] : manifest.items()) {
        if (!kManifestKeys.contains(key)) manifest_error("unknown field '" + key + "'");
    }
    bundle.id = manifest_string(manifest, "id");
    if (!valid_id(bundle.id)) manifest_error("id must use lowercase letters, digits, '-' or '_'");
    bundle.title = manifest_string(manifest, "title");
    bundle.mode = manifest_enum<Mode>(manifest, "mode", parse_mode);
    bundle.source_visibility = manifest_enum<SourceVisibility>(manifest, "source_visibility", parse_source_visibility);
    bundle.feedback_mode = manifest_enum<FeedbackMode>(manifest, "feedback_mode", parse_feedback_mode);
    bundle.visibility = manifest_enum<Visibility>(manifest, "visibility", parse_visibility);
    bundle.interface = parse_interface(manifest);
    if (bundle.mode == Mode::Development) {
        if (bundle.source_visibility != SourceVisibility::BlackBox) {
            manifest_error("DEVELOPMENT mode requires source_visibility BLACK_BOX");
        }
        if (bundle.interface.empty()) manifest_error("DEVELOPMENT mode requires a non-empty interface");
    }
    bundle.specification = require_file(kSpecification);

    for (const auto& [path, text] : files) {
        if (path != kManifest && path != kConcepts) bundle.files.emplace(path, text);
    }

    const auto reference_sources = collect_sources(files, kReferenceDir);
    if (reference_sources.empty()) {
        throw BundleError(BundleError::Kind::MissingFile, "bundle has no reference/*.tl files", {"reference/"});
    }
    const auto test_sources = collect_sources(files, kTestsDir);
    if (test_sources.empty()) throw BundleError(BundleError::Kind::MissingFile, "bundle has no tests/*.tl files", {"tests/"});

    try {
        bundle.reference_program = lang::parse_program(reference_sources);
    } catch (const lang::ParseError& e) {
        source_error(e, kReferenceDir);
    }
    try {
        bundle.reference_suite = make_suite(test_sources, TestOrigin::Reference);
    } catch (const lang::ParseError& e) {
        source_error(e, kTestsDir);
    }

    const auto interface_report = check_interface(bundle.reference_program, bundle.interface);
    if (!interface_report.conformant()) {
        std::vector<std::string> details;
        for (const auto& issue : interface_report.issues) details.push_back(issue.message);
        throw BundleError(BundleError::Kind::InvalidManifest, "reference program does not implement the interface",
                          details);
    }

    bundle.taxonomy = default_taxonomy();
    if (const auto it = files.find(std::string(kConcepts)); it != files.end()) {
        bundle.has_concepts_file = true;
        try {
            const auto doc = json::parse(it->second);
            if (!doc.is_object() || !doc.contains("concepts") || !doc.at("concepts").is_array() || doc.size() != 1) {
                throw std::invalid_argument("expected an object with a single 'concepts' array");
            }
            std::set<std::string> ids;
            for (const auto& entry : doc.at("concepts")) {
                auto tag = concept_from_json(entry);
                if (!valid_id(tag.id)) throw std::invalid_argument("invalid concept id '" + tag.id + "'");
                if (!ids.insert(tag.id).second) throw std::invalid_argument("concept '" + tag.id + "' declared twice");
                bundle.bundle_concepts.push_back(std::move(tag));
            }
        } catch (const json::exception& e) {
            throw BundleError(BundleError::Kind::InvalidManifest, std::string("concepts.json: ") + e.what());
        } catch (const std::invalid_argument& e) {
            throw BundleError(BundleError::Kind::InvalidManifest, std::string("concepts.json: ") + e.what());
        }
        for (const auto& tag : bundle.bundle_concepts) {
            validate_resources(tag, files);
            bundle.taxonomy.upsert(tag);
        }
    }

    std::vector<std::string> unknown;
    for (const auto& test : bundle.reference_suite.tests) {
        for (const auto& c : test.concepts) {
            if (!bundle.taxonomy.find(c)) unknown.push_back(test.name + ": " + c);
        }
    }
    if (!unknown.empty()) {
        throw BundleError(BundleError::Kind::UnknownConcept, "reference tests use unknown concept ids", unknown);
    }

    bundle.catalog = lang::extract_entities(bundle.reference_program);
    bundle.reference_results = runtime::run_suite(bundle.reference_program, bundle.reference_suite);

    std::vector<std::string> failing;
    for (const auto& result : bundle.reference_results) {
        if (result.verdict != runtime::Verdict::Pass) {
            failing.push_back(result.test_name + ": " + std::string(runtime::verdict_name(result.verdict)) +
                              (result.message.empty() ? "" : " (" + result.message + ")"));
        }
    }
    if (!failing.empty()) {
        throw BundleError(BundleError::Kind::FailingReferenceTest, "reference tests do not pass on the reference program",
                          failing);
    }

    const auto covered = runtime::union_coverage(bundle.reference_results);
    std::vector<std::string> uncovered;
    for (const auto& entity : bundle.catalog.all()) {
        if (!covered.contains(entity)) uncovered.push_back(lang::describe_entity(bundle.reference_program, entity));
    }
    if (!uncovered.empty()) {
        std::string message = "reference suite leaves " + std::to_string(uncovered.size()) + " entities uncovered: ";
        for (std::size_t i = 0; i < uncovered.size(); ++i) message += (i ? ", " : "") + uncovered[i];
        throw BundleError(BundleError::Kind::IncompleteCoverage, message, uncovered);
    }
    return bundle;
}

BundleFiles read_bundle_files(const fs::path& directory) {
    std::error_code ec;
    if (!fs::is_directory(directory, ec)) {
        throw BundleError(BundleError::Kind::Io, "not a directory: " + directory.string(), {directory.string()});
    }
    BundleFiles files;
    for (auto it = fs::recursive_directory_iterator(directory, ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec)) {
        const auto name = it->path().filename().string();
        if (name.starts_with(".")) {
            if (it->is_directory()) it.disable_recursion_pending();
            continue;
        }
        if (!it->is_regular_file()) continue;
        std::ifstream in(it->path(), std::ios::binary);
        if (!in) throw BundleError(BundleError::Kind::Io, "cannot read " + it->path().string(), {it->path().string()});
        std::ostringstream buffer;
        buffer << in.rdbuf();
        files.emplace(fs::relative(it->path(), directory).generic_string(), buffer.str());
    }
    if (ec) throw BundleError(BundleError::Kind::Io, "cannot list " + directory.string() + ": " + ec.message());
    return files;
}

AssignmentBundle load_bundle(const fs::path& directory) { return parse_bundle(read_bundle_files(directory)); }

json manifest_to_json(const AssignmentBundle& bundle) {
    json interface = json::array();
    for (const auto& sig : bundle.interface) {
        json params = json::array();
        for (auto p : sig.params) params.push_back(lang::type_name(p));
        interface.push_back({{"name", sig.name}, {"params", params}, {"returns", lang::type_name(sig.returns)}});
    }
    return {{"id", bundle.id},
            {"title", bundle.title},
            {"mode", mode_name(bundle.mode)},
            {"source_visibility", source_visibility_name(bundle.source_visibility)},
            {"feedback_mode", feedback_mode_name(bundle.feedback_mode)},
            {"visibility", visibility_name(bundle.visibility)},
            {"interface", interface}};
}

BundleFiles serialize_bundle(const AssignmentBundle& bundle) {
    BundleFiles out = bundle.files;
    out[std::string(kManifest)] = manifest_to_json(bundle).dump(2) + "\n";
    if (bundle.has_concepts_file) {
        json concepts = json::array();
        for (const auto& tag : bundle.bundle_concepts) concepts.push_back(concept_to_json(tag));
        out[std::string(kConcepts)] = json{{"concepts", concepts}}.dump(2) + "\n";
    }
    return out;
}

void save_bundle(const AssignmentBundle& bundle, const fs::path& directory) {
    for (const auto& [path, text] : serialize_bundle(bundle)) {
        const auto target = directory / fs::path(path);
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
        std::ofstream out(target, std::ios::binary | std::ios::trunc);
        if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
            throw BundleError(BundleError::Kind::Io, "cannot write " + target.string(), {target.string()});
        }
    }
}

}  // namespace tutorforge::suite
