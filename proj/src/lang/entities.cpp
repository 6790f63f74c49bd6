#include "tutorforge/lang/entities.hpp"

namespace tutorforge::lang {

std::string_view entity_kind_name(EntityKind kind) {
    switch (kind) {
        case EntityKind::Line: return "LINE";
        case EntityKind::BranchArm: return "BRANCH_ARM";
        case EntityKind::ConditionOutcome: return "CONDITION_OUTCOME";
    }
    return "?";
}

std::string describe_entity(const SourceProgram& program, const CoverageEntity& entity) {
    std::string out = program.file_path(entity.file) + ":" + std::to_string(entity.line);
    const char* outcome = entity.outcome ? "true" : "false";
    switch (entity.kind) {
        case EntityKind::Line: out += " line"; break;
        case EntityKind::BranchArm: out += std::string(" branch(") + outcome + ")"; break;
        case EntityKind::ConditionOutcome:
            out += " condition#" + std::to_string(entity.atom) + "(" + outcome + ")";
            break;
    }
    return out;
}

const EntitySet& EntityCatalog::of_kind(EntityKind kind) const {
    switch (kind) {
        case EntityKind::Line: return lines;
        case EntityKind::BranchArm: return branch_arms;
        case EntityKind::ConditionOutcome: break;
    }
    return condition_outcomes;
}

EntitySet EntityCatalog::all() const {
    EntitySet out = lines;
    out.insert(branch_arms.begin(), branch_arms.end());
    out.insert(condition_outcomes.begin(), condition_outcomes.end());
    return out;
}

namespace {

class Extractor {
public:
    explicit Extractor(EntityCatalog& catalog) : catalog_(catalog) {}

    void stmt(const Stmt& s) {
        if (s.line_owner != 0) catalog_.lines.insert(CoverageEntity::make_line(s.span.file, s.span.line, s.line_owner));
        if (s.is_guarded()) {
            catalog_.branch_arms.insert(CoverageEntity::make_arm(s.span.file, s.span.line, s.id, true));
            catalog_.branch_arms.insert(CoverageEntity::make_arm(s.span.file, s.span.line, s.id, false));
        }
        if (s.init) stmt(*s.init);
        if (s.step) stmt(*s.step);
        if (s.index) expr(*s.index);
        if (s.value) expr(*s.value);
        for (const auto& child : s.body) stmt(*child);
        for (const auto& child : s.alternative) stmt(*child);
    }

    void expr(const Expr& e) {
        if (e.atom_index >= 0) {
            const auto atom = static_cast<std::uint32_t>(e.atom_index);
            for (bool outcome : {true, false}) {
                catalog_.condition_outcomes.insert(
                    CoverageEntity::make_condition(e.span.file, e.span.line, e.condition_owner, atom, outcome));
            }
        }
        for (const auto& operand : e.operands) expr(*operand);
    }

private:
    EntityCatalog& catalog_;
};

}  // namespace

EntityCatalog extract_entities(const SourceProgram& program) {
    EntityCatalog catalog;
    Extractor extractor(catalog);
    for (const auto& global : program.globals) extractor.stmt(*global);
    for (const auto& fn : program.functions) {
        for (const auto& s : fn.body) extractor.stmt(*s);
    }
    return catalog;
}

}  // namespace tutorforge::lang
