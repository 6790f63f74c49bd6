#pragma once

#include <span>

#include <json.hpp>

#include "tutorforge/lang/entities.hpp"
#include "tutorforge/runtime/runtime.hpp"

namespace tutorforge::runtime {

/// `{kind, file, line, node, arm}` for branch arms, `{kind, file, line, node,
/// atom, outcome}` for condition outcomes, `{kind, file, line, node}` for lines.
nlohmann::ordered_json entity_to_json(const lang::SourceProgram& program, const lang::CoverageEntity& entity);

/// Inverse of entity_to_json. Throws std::invalid_argument on unknown files or
/// malformed records.
lang::CoverageEntity entity_from_json(const lang::SourceProgram& program, const nlohmann::json& record);

nlohmann::ordered_json entities_to_json(const lang::SourceProgram& program, const lang::EntitySet& entities);

/// Coverage trace export: `[{test, verdict, message, entities: [...]}]`.
nlohmann::ordered_json trace_to_json(const lang::SourceProgram& program, std::span<const TestRunResult> results);

std::vector<TestRunResult> trace_from_json(const lang::SourceProgram& program, const nlohmann::json& trace);

}  // namespace tutorforge::runtime
