#include "tutorforge/runtime/trace_json.hpp"

#include <stdexcept>

namespace tutorforge::runtime {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json entity_to_json(const lang::SourceProgram& program, const lang::CoverageEntity& entity) {
    ordered_json out;
    out["kind"] = lang::entity_kind_name(entity.kind);
    out["file"] = program.file_path(entity.file);
    out["line"] = entity.line;
    out["node"] = entity.owner;
    switch (entity.kind) {
        case lang::EntityKind::Line: break;
        case lang::EntityKind::BranchArm: out["arm"] = entity.outcome; break;
        case lang::EntityKind::ConditionOutcome:
            out["atom"] = entity.atom;
            out["outcome"] = entity.outcome;
            break;
    }
    return out;
}

lang::CoverageEntity entity_from_json(const lang::SourceProgram& program, const json& record) {
    try {
        const std::string kind = record.at("kind").get<std::string>();
        const std::string file = record.at("file").get<std::string>();
        lang::FileIndex index = 0;
        bool found = false;
        for (lang::FileIndex i = 0; i < program.files.size(); ++i) {
            if (program.files[i].path == file) {
                index = i;
                found = true;
                break;
            }
        }
        if (!found) throw std::invalid_argument("unknown file '" + file + "'");
        const auto line = record.at("line").get<std::uint32_t>();
        const auto node = record.at("node").get<lang::NodeId>();
        if (kind == "LINE") return lang::CoverageEntity::make_line(index, line, node);
        if (kind == "BRANCH_ARM") return lang::CoverageEntity::make_arm(index, line, node, record.at("arm").get<bool>());
        if (kind == "CONDITION_OUTCOME") {
            return lang::CoverageEntity::make_condition(index, line, node, record.at("atom").get<std::uint32_t>(),
                                                        record.at("outcome").get<bool>());
        }
        throw std::invalid_argument("unknown entity kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed entity record: ") + e.what());
    }
}

ordered_json entities_to_json(const lang::SourceProgram& program, const lang::EntitySet& entities) {
    ordered_json out = ordered_json::array();
    for (const auto& entity : entities) out.push_back(entity_to_json(program, entity));
    return out;
}

ordered_json trace_to_json(const lang::SourceProgram& program, std::span<const TestRunResult> results) {
    ordered_json out = ordered_json::array();
    for (const auto& result : results) {
        ordered_json record;
        record["test"] = result.test_name;
        record["verdict"] = verdict_name(result.verdict);
        record["message"] = result.message;
        record["entities"] = entities_to_json(program, result.coverage.covered);
        out.push_back(std::move(record));
    }
    return out;
}

std::vector<TestRunResult> trace_from_json(const lang::SourceProgram& program, const json& trace) {
    std::vector<TestRunResult> results;
    for (const auto& record : trace) {
        TestRunResult result;
        result.test_name = record.at("test").get<std::string>();
        const std::string verdict = record.at("verdict").get<std::string>();
        if (verdict == "PASS") {
            result.verdict = Verdict::Pass;
        } else if (verdict == "FAIL") {
            result.verdict = Verdict::Fail;
        } else if (verdict == "ERROR") {
            result.verdict = Verdict::Error;
        } else if (verdict == "TIMEOUT") {
            result.verdict = Verdict::Timeout;
        } else {
            throw std::invalid_argument("unknown verdict '" + verdict + "'");
        }
        result.message = record.value("message", "");
        for (const auto& entity : record.at("entities")) {
            result.coverage.covered.insert(entity_from_json(program, entity));
        }
        results.push_back(std::move(result));
    }
    return results;
}

}  // namespace tutorforge::runtime
