#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tutorforge/analytics/analytics.hpp"
#include "tutorforge/suite/bundle.hpp"

namespace tutorforge::service {

using suite::FeedbackMode;

enum class Role { Admin, Instructor, Student };

std::string_view role_name(Role role);
std::optional<Role> parse_role(std::string_view text);

struct Institution {
    std::string id;
    std::string name;
};

struct User {
    std::string id;
    std::string institution_id;
    Role role = Role::Student;
    std::string name;
    std::string token_sha256;  // hex digest of the bearer token
};

/// The authenticated caller.
struct Principal {
    std::string user_id;
    std::string institution_id;
    Role role = Role::Student;
};

struct RosterEntry {
    std::string student_id;
    analytics::Group group = analytics::Group::A;
};

struct CourseAssignment {
    std::string bundle_id;
    /// Replaces the bundle's default feedback mode for this course.
    std::optional<FeedbackMode> feedback_mode;
    /// Per study group; takes precedence over `feedback_mode`.
    std::map<analytics::Group, FeedbackMode> group_modes;
    analytics::Phase phase = analytics::Phase::Treatment;
};

struct Course {
    std::string id;
    std::string institution_id;
    std::string title;
    std::string semester = "S1";
    std::vector<std::string> instructors;
    std::vector<RosterEntry> roster;
    std::vector<CourseAssignment> assignments;
    analytics::GradeConfig grade;

    const RosterEntry* find_student(std::string_view student_id) const;
    const CourseAssignment* find_assignment(std::string_view bundle_id) const;
    bool has_instructor(std::string_view user_id) const;
};

/// Feedback mode a rostered student receives for one course assignment.
FeedbackMode effective_mode(const CourseAssignment& entry, analytics::Group group, FeedbackMode bundle_default);

struct BundleEntry {
    std::string id;
    std::string owner_id;
    std::string institution_id;
};

enum class SubmissionStatus { Queued, Done, Failed };

std::string_view submission_status_name(SubmissionStatus status);
std::optional<SubmissionStatus> parse_submission_status(std::string_view text);

struct SubmissionRecord {
    std::string id;
    std::string student_id;
    std::string course_id;
    std::string assignment_id;
    std::uint32_t attempt = 0;
    std::string timestamp;
    SubmissionStatus status = SubmissionStatus::Queued;
    FeedbackMode feedback_mode = FeedbackMode::None;
    std::string suite_text;
    std::optional<std::string> program_text;

    // Present when status is DONE.
    std::optional<nlohmann::ordered_json> metrics;
    std::optional<nlohmann::ordered_json> gap;
    std::optional<nlohmann::ordered_json> feedback;
    std::optional<double> grade;
    std::optional<nlohmann::ordered_json> results;  // per-test verdicts, instructor view

    std::string error;  // FAILED only
};

/// Everything but the submission log.
struct StoreState {
    std::vector<Institution> institutions;
    std::vector<User> users;
    std::vector<Course> courses;
    std::vector<BundleEntry> bundles;
    std::uint64_t next_submission = 1;
};

nlohmann::ordered_json course_to_json(const Course& course);
/// Throws std::invalid_argument on malformed input.
Course course_from_json(const nlohmann::json& json);

nlohmann::ordered_json state_to_json(const StoreState& state);
StoreState state_from_json(const nlohmann::json& json);

nlohmann::ordered_json submission_to_json(const SubmissionRecord& record);
SubmissionRecord submission_from_json(const nlohmann::ordered_json& json);

/// Lowercase letters, digits, '-' and '_', at most 64 characters.
bool valid_id(std::string_view id);

}  // namespace tutorforge::service
