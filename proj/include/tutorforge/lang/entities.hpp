#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <string_view>

#include "tutorforge/lang/ast.hpp"

namespace tutorforge::lang {

enum class EntityKind : std::uint8_t { Line, BranchArm, ConditionOutcome };

std::string_view entity_kind_name(EntityKind kind);

/// One instrumentation target.
///
/// LINE entities are keyed by (file, line); `owner` is the first statement on
/// that line. BRANCH_ARM entities are owned by their guarded statement and use
/// `outcome` as the arm. CONDITION_OUTCOME entities are owned by the root of a
/// compound boolean expression, with `atom` the left-to-right atom index and
/// `line` the atom's own source line.
struct CoverageEntity {
    EntityKind kind = EntityKind::Line;
    FileIndex file = 0;
    std::uint32_t line = 0;
    NodeId owner = 0;
    std::uint32_t atom = 0;
    bool outcome = false;

    auto operator<=>(const CoverageEntity&) const = default;

    static CoverageEntity make_line(FileIndex file, std::uint32_t line, NodeId owner) {
        return {EntityKind::Line, file, line, owner, 0, false};
    }
    static CoverageEntity make_arm(FileIndex file, std::uint32_t line, NodeId owner, bool arm) {
        return {EntityKind::BranchArm, file, line, owner, 0, arm};
    }
    static CoverageEntity make_condition(FileIndex file, std::uint32_t line, NodeId owner, std::uint32_t atom,
                                         bool outcome) {
        return {EntityKind::ConditionOutcome, file, line, owner, atom, outcome};
    }
};

using EntitySet = std::set<CoverageEntity>;

/// Human-readable key, e.g. `queue.tl:12 branch(true)`.
std::string describe_entity(const SourceProgram& program, const CoverageEntity& entity);

struct EntityCatalog {
    EntitySet lines;
    EntitySet branch_arms;
    EntitySet condition_outcomes;

    const EntitySet& of_kind(EntityKind kind) const;
    bool contains(const CoverageEntity& entity) const { return of_kind(entity.kind).contains(entity); }
    std::size_t size() const { return lines.size() + branch_arms.size() + condition_outcomes.size(); }
    EntitySet all() const;

    bool operator==(const EntityCatalog&) const = default;
};

/// Static enumeration of every coverage entity of a program.
EntityCatalog extract_entities(const SourceProgram& program);

}  // namespace tutorforge::lang

template <>
struct std::hash<tutorforge::lang::CoverageEntity> {
    std::size_t operator()(const tutorforge::lang::CoverageEntity& e) const noexcept {
        std::size_t h = static_cast<std::size_t>(e.kind);
        auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
        mix(e.file);
        mix(e.line);
        mix(e.owner);
        mix(e.atom);
        mix(e.outcome ? 1U : 0U);
        return h;
    }
};
