#include "tutorforge/service/model.hpp"

#include <algorithm>

namespace tutorforge::service {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

template <typename T, typename J>
T required(const J& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
    try {
        return j.at(key).template get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument(std::string("field '") + key + "' has the wrong type");
    }
}

template <typename T, typename J>
T optional_field(const J& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return required<T>(j, key);
}

FeedbackMode feedback_mode_field(const std::string& text) {
    const auto mode = suite::parse_feedback_mode(text);
    if (!mode) throw std::invalid_argument("unknown feedback mode '" + text + "'");
    return *mode;
}

analytics::Group group_field(const std::string& text) {
    const auto group = analytics::parse_group(text);
    if (!group) throw std::invalid_argument("group must be A or B");
    return *group;
}

}  // namespace

std::string_view role_name(Role role) {
    switch (role) {
        case Role::Admin: return "ADMIN";
        case Role::Instructor: return "INSTRUCTOR";
        case Role::Student: return "STUDENT";
    }
    return "?";
}

std::optional<Role> parse_role(std::string_view text) {
    if (text == "ADMIN") return Role::Admin;
    if (text == "INSTRUCTOR") return Role::Instructor;
    if (text == "STUDENT") return Role::Student;
    return std::nullopt;
}

const RosterEntry* Course::find_student(std::string_view student_id) const {
    for (const auto& entry : roster) {
        if (entry.student_id == student_id) return &entry;
    }
    return nullptr;
}

const CourseAssignment* Course::find_assignment(std::string_view bundle_id) const {
    for (const auto& entry : assignments) {
        if (entry.bundle_id == bundle_id) return &entry;
    }
    return nullptr;
}

bool Course::has_instructor(std::string_view user_id) const {
    return std::find(instructors.begin(), instructors.end(), user_id) != instructors.end();
}

FeedbackMode effective_mode(const CourseAssignment& entry, analytics::Group group, FeedbackMode bundle_default) {
    if (const auto it = entry.group_modes.find(group); it != entry.group_modes.end()) return it->second;
    return entry.feedback_mode.value_or(bundle_default);
}

std::string_view submission_status_name(SubmissionStatus status) {
    switch (status) {
        case SubmissionStatus::Queued: return "QUEUED";
        case SubmissionStatus::Done: return "DONE";
        case SubmissionStatus::Failed: return "FAILED";
    }
    return "?";
}

std::optional<SubmissionStatus> parse_submission_status(std::string_view text) {
    if (text == "QUEUED") return SubmissionStatus::Queued;
    if (text == "DONE") return SubmissionStatus::Done;
    if (text == "FAILED") return SubmissionStatus::Failed;
    return std::nullopt;
}

bool valid_id(std::string_view id) {
    if (id.empty() || id.size() > 64) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    });
}

ordered_json course_to_json(const Course& course) {
    ordered_json roster = ordered_json::array();
    for (const auto& r : course.roster) {
        roster.push_back({{"student", r.student_id}, {"group", analytics::group_name(r.group)}});
    }
    ordered_json assignments = ordered_json::array();
    for (const auto& a : course.assignments) {
        ordered_json entry{{"bundle", a.bundle_id}, {"phase", analytics::phase_name(a.phase)}};
        if (a.feedback_mode) entry["feedback_mode"] = suite::feedback_mode_name(*a.feedback_mode);
        if (!a.group_modes.empty()) {
            ordered_json modes = ordered_json::object();
            for (const auto& [group, mode] : a.group_modes) modes[std::string(analytics::group_name(group))] = suite::feedback_mode_name(mode);
            entry["group_modes"] = modes;
        }
        assignments.push_back(entry);
    }
    return {{"id", course.id},
            {"institution", course.institution_id},
            {"title", course.title},
            {"semester", course.semester},
            {"instructors", course.instructors},
            {"roster", roster},
            {"assignments", assignments},
            {"grade_weights", {{"coverage", course.grade.w_coverage}, {"redundancy", course.grade.w_redundancy}}}};
}

Course course_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("course must be an object");
    Course c;
    c.id = required<std::string>(j, "id");
    if (!valid_id(c.id)) throw std::invalid_argument("invalid course id '" + c.id + "'");
    c.institution_id = optional_field<std::string>(j, "institution", "");
    c.title = optional_field<std::string>(j, "title", c.id);
    c.semester = optional_field<std::string>(j, "semester", "S1");
    if (c.semester != "S1" && c.semester != "S2") throw std::invalid_argument("semester must be S1 or S2");
    c.instructors = optional_field<std::vector<std::string>>(j, "instructors", {});
    if (j.contains("roster")) {
        if (!j.at("roster").is_array()) throw std::invalid_argument("roster must be an array");
        for (const auto& r : j.at("roster")) {
            RosterEntry entry;
            if (r.is_string()) {
                entry.student_id = r.get<std::string>();
            } else {
                entry.student_id = required<std::string>(r, "student");
                entry.group = group_field(optional_field<std::string>(r, "group", "A"));
            }
            if (c.find_student(entry.student_id)) throw std::invalid_argument("student listed twice: " + entry.student_id);
            c.roster.push_back(std::move(entry));
        }
    }
    if (j.contains("assignments")) {
        if (!j.at("assignments").is_array()) throw std::invalid_argument("assignments must be an array");
        for (const auto& a : j.at("assignments")) {
            CourseAssignment entry;
            if (a.is_string()) {
                entry.bundle_id = a.get<std::string>();
            } else {
                entry.bundle_id = required<std::string>(a, "bundle");
                if (a.contains("feedback_mode") && !a.at("feedback_mode").is_null()) {
                    entry.feedback_mode = feedback_mode_field(required<std::string>(a, "feedback_mode"));
                }
                const auto phase_text = optional_field<std::string>(a, "phase", "TREATMENT");
                const auto phase = analytics::parse_phase(phase_text);
                if (!phase) throw std::invalid_argument("unknown phase '" + phase_text + "'");
                entry.phase = *phase;
                if (a.contains("group_modes")) {
                    const auto& modes = a.at("group_modes");
                    if (!modes.is_object()) throw std::invalid_argument("group_modes must be an object");
                    for (const auto& [group, mode] : modes.items()) {
                        if (!mode.is_string()) throw std::invalid_argument("group_modes values must be strings");
                        entry.group_modes[group_field(group)] = feedback_mode_field(mode.get<std::string>());
                    }
                }
            }
            if (c.find_assignment(entry.bundle_id)) throw std::invalid_argument("assignment listed twice: " + entry.bundle_id);
            c.assignments.push_back(std::move(entry));
        }
    }
    if (j.contains("grade_weights")) {
        const auto& w = j.at("grade_weights");
        c.grade.w_coverage = required<double>(w, "coverage");
        c.grade.w_redundancy = required<double>(w, "redundancy");
        c.grade.validate();
    }
    return c;
}

ordered_json state_to_json(const StoreState& state) {
    ordered_json institutions = ordered_json::array();
    for (const auto& i : state.institutions) institutions.push_back({{"id", i.id}, {"name", i.name}});
    ordered_json users = ordered_json::array();
    for (const auto& u : state.users) {
        users.push_back({{"id", u.id},
                         {"institution", u.institution_id},
                         {"role", role_name(u.role)},
                         {"name", u.name},
                         {"token_sha256", u.token_sha256}});
    }
    ordered_json courses = ordered_json::array();
    for (const auto& c : state.courses) courses.push_back(course_to_json(c));
    ordered_json bundles = ordered_json::array();
    for (const auto& b : state.bundles) {
        bundles.push_back({{"id", b.id}, {"owner", b.owner_id}, {"institution", b.institution_id}});
    }
    return {{"version", 1},
            {"institutions", institutions},
            {"users", users},
            {"courses", courses},
            {"bundles", bundles},
            {"next_submission", state.next_submission}};
}

StoreState state_from_json(const json& j) {
    if (required<int>(j, "version") != 1) throw std::invalid_argument("unsupported store version");
    StoreState s;
    for (const auto& i : required<json>(j, "institutions")) {
        s.institutions.push_back({required<std::string>(i, "id"), required<std::string>(i, "name")});
    }
    for (const auto& u : required<json>(j, "users")) {
        const auto role = parse_role(required<std::string>(u, "role"));
        if (!role) throw std::invalid_argument("unknown role");
        s.users.push_back({required<std::string>(u, "id"), required<std::string>(u, "institution"), *role,
                           required<std::string>(u, "name"), required<std::string>(u, "token_sha256")});
    }
    for (const auto& c : required<json>(j, "courses")) s.courses.push_back(course_from_json(c));
    for (const auto& b : required<json>(j, "bundles")) {
        s.bundles.push_back({required<std::string>(b, "id"), required<std::string>(b, "owner"),
                             required<std::string>(b, "institution")});
    }
    s.next_submission = required<std::uint64_t>(j, "next_submission");
    return s;
}

ordered_json submission_to_json(const SubmissionRecord& r) {
    ordered_json j{{"id", r.id},
                   {"student", r.student_id},
                   {"course", r.course_id},
                   {"assignment", r.assignment_id},
                   {"attempt", r.attempt},
                   {"timestamp", r.timestamp},
                   {"status", submission_status_name(r.status)},
                   {"feedback_mode", suite::feedback_mode_name(r.feedback_mode)},
                   {"suite", r.suite_text}};
    if (r.program_text) j["program"] = *r.program_text;
    if (r.metrics) j["metrics"] = *r.metrics;
    if (r.gap) j["gap"] = *r.gap;
    if (r.feedback) j["feedback"] = *r.feedback;
    if (r.grade) j["grade"] = *r.grade;
    if (r.results) j["results"] = *r.results;
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

SubmissionRecord submission_from_json(const ordered_json& j) {
    SubmissionRecord r;
    r.id = required<std::string>(j, "id");
    r.student_id = required<std::string>(j, "student");
    r.course_id = required<std::string>(j, "course");
    r.assignment_id = required<std::string>(j, "assignment");
    r.attempt = required<std::uint32_t>(j, "attempt");
    r.timestamp = required<std::string>(j, "timestamp");
    const auto status = parse_submission_status(required<std::string>(j, "status"));
    if (!status) throw std::invalid_argument("unknown submission status");
    r.status = *status;
    r.feedback_mode = feedback_mode_field(required<std::string>(j, "feedback_mode"));
    r.suite_text = required<std::string>(j, "suite");
    if (j.contains("program")) r.program_text = required<std::string>(j, "program");
    if (j.contains("metrics")) r.metrics = j.at("metrics");
    if (j.contains("gap")) r.gap = j.at("gap");
    if (j.contains("feedback")) r.feedback = j.at("feedback");
    if (j.contains("grade")) r.grade = required<double>(j, "grade");
    if (j.contains("results")) r.results = j.at("results");
    r.error = optional_field<std::string>(j, "error", "");
    return r;
}

}  // namespace tutorforge::service
