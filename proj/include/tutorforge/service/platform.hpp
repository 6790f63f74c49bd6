#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tutorforge/service/pipeline.hpp"
#include "tutorforge/service/store.hpp"

namespace tutorforge::service {

/// An API-level failure: HTTP status, stable machine code, message, details.
class ServiceError : public std::runtime_error {
public:
    ServiceError(int status, std::string code, std::string message, std::vector<std::string> details = {});

    int status() const noexcept { return status_; }
    const std::string& code() const noexcept { return code_; }
    const std::vector<std::string>& details() const noexcept { return details_; }
    nlohmann::ordered_json to_json() const;

private:
    int status_;
    std::string code_;
    std::vector<std::string> details_;
};

struct SubmitRequest {
    std::string assignment_id;
    std::optional<std::string> course_id;  // needed only when the assignment is in several of the student's courses
    std::string suite_text;
    std::optional<std::string> program_text;
};

struct UserSpec {
    std::string id;
    std::string name;
    Role role = Role::Student;
};

/// Issued credentials. The token is shown once; only its digest is stored.
struct IssuedToken {
    std::string user_id;
    std::string token;
};

struct ReportRow {
    std::string student_id;
    analytics::Group group = analytics::Group::A;
    std::string assignment_id;
    analytics::Phase phase = analytics::Phase::Treatment;
    std::size_t attempts = 0;
    std::optional<std::string> latest_submission;
    std::optional<analysis::MetricsRecord> latest_metrics;  // latest DONE attempt
    std::optional<double> latest_grade;
    std::vector<double> grades;  // DONE attempts in order
};

struct CourseReport {
    std::string course_id;
    std::string semester;
    std::vector<ReportRow> rows;  // roster order, then course assignment order
};

nlohmann::ordered_json course_report_to_json(const CourseReport& report);
/// Rows with at least one DONE attempt, in the study dataset CSV format.
std::string course_report_to_csv(const CourseReport& report);

/// The submission platform. Thread-safe; submissions by the same student to
/// the same assignment are serialized so attempt numbers stay strict.
class Platform {
public:
    using Clock = std::function<std::string()>;

    explicit Platform(std::unique_ptr<Store> store, Clock clock = {}, runtime::ExecutionLimits limits = {});
    ~Platform();

    Platform(const Platform&) = delete;
    Platform& operator=(const Platform&) = delete;

    /// Creates the first institution and its administrator. Fails with 409
    /// once any user exists.
    IssuedToken bootstrap(const std::string& institution_id, const std::string& institution_name,
                          const std::string& admin_id, const std::string& admin_name);

    /// 401 for unknown tokens.
    Principal authenticate(std::string_view token) const;

    // Administration.
    /// New institution with its first administrator (ADMIN only).
    IssuedToken create_institution(const Principal& caller, const std::string& id, const std::string& name,
                                   const UserSpec& admin);
    /// New user in the caller's institution (ADMIN only).
    IssuedToken create_user(const Principal& caller, const UserSpec& spec);
    /// Creates or replaces a course in the caller's institution. ADMINs may
    /// write any course there; INSTRUCTORs only courses they teach.
    nlohmann::ordered_json upsert_course(const Principal& caller, const nlohmann::json& course);
    /// Validates and stores a bundle owned by the caller (INSTRUCTOR or ADMIN).
    /// 422 with the bundle error details when it does not load.
    nlohmann::ordered_json register_bundle(const Principal& caller, const suite::BundleFiles& files);
    /// Instructor override of one course assignment's feedback mode; nullopt
    /// restores the bundle default.
    nlohmann::ordered_json set_feedback_mode(const Principal& caller, const std::string& course_id,
                                             const std::string& assignment_id, std::optional<FeedbackMode> mode);

    // Students.
    /// Runs the pipeline and stores the record. Returns the stored record.
    SubmissionRecord submit(const Principal& caller, const SubmitRequest& request);
    /// Student-visible view of a submission: the report for its feedback mode.
    /// With `full`, instructors and admins also get metrics, gap, grade and
    /// per-test results.
    nlohmann::ordered_json get_feedback(const Principal& caller, const std::string& submission_id, bool full) const;
    /// HTML rendering of the student-visible report.
    std::string get_feedback_html(const Principal& caller, const std::string& submission_id) const;
    nlohmann::ordered_json history(const Principal& caller, const std::optional<std::string>& assignment_id,
                                   const std::optional<std::string>& student_id) const;
    nlohmann::ordered_json list_assignments(const Principal& caller) const;
    nlohmann::ordered_json assignment_detail(const Principal& caller, const std::string& assignment_id) const;
    nlohmann::ordered_json whoami(const Principal& caller) const;

    // Instructors.
    CourseReport course_report(const Principal& caller, const std::string& course_id) const;

    /// Re-runs the pipeline on a stored submission with its original id,
    /// timestamp, attempt and mode. Nothing is stored.
    SubmissionRecord reprocess(const std::string& submission_id) const;

    /// A bundle file that some concept resource of the bundle links to.
    /// Unauthenticated; nullopt for anything else.
    std::optional<std::string> resource_file(const std::string& bundle_id, const std::string& path) const;

    std::size_t submission_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Current UTC time as 2026-01-05T10:00:00Z.
std::string utc_now();

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace tutorforge::service
