#include "tutorforge/service/platform.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <random>
#include <set>

#include "tutorforge/lang/parser.hpp"

namespace tutorforge::service {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

ServiceError forbidden(const std::string& message) { return ServiceError(403, "forbidden", message); }
ServiceError not_found(const std::string& message) { return ServiceError(404, "not_found", message); }
ServiceError conflict(const std::string& message) { return ServiceError(409, "conflict", message); }
ServiceError invalid(const std::string& message, std::vector<std::string> details = {}) {
    return ServiceError(422, "invalid_request", message, std::move(details));
}

void require_id(const std::string& id, const char* what) {
    if (!valid_id(id)) throw invalid(std::string("invalid ") + what + " id '" + id + "'");
}

std::string new_token() {
    std::random_device device;
    std::string token = "tf_";
    static constexpr char kHex[] = "0123456789abcdef";
    for (int i = 0; i < 24; ++i) {
        const auto byte = device() & 0xFF;
        token += kHex[byte >> 4];
        token += kHex[byte & 0xF];
    }
    return token;
}

std::string format_location(const lang::ParseError& e) {
    return e.path() + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " + e.detail();
}

std::uint64_t submission_number(const std::string& id) {
    if (id.size() < 2 || id[0] != 's') return 0;
    try {
        return std::stoull(id.substr(1));
    } catch (const std::exception&) {
        return 0;
    }
}

std::string submission_id(std::uint64_t number) {
    auto digits = std::to_string(number);
    if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
    return "s" + digits;
}

bool is_staff(const Principal& p) { return p.role != Role::Student; }

}  // namespace

ServiceError::ServiceError(int status, std::string code, std::string message, std::vector<std::string> details)
    : std::runtime_error(std::move(message)), status_(status), code_(std::move(code)), details_(std::move(details)) {}

ordered_json ServiceError::to_json() const { return {{"code", code_}, {"message", what()}, {"details", details_}}; }

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

ordered_json course_report_to_json(const CourseReport& report) {
    ordered_json rows = ordered_json::array();
    for (const auto& r : report.rows) {
        ordered_json row{{"student", r.student_id},
                         {"group", analytics::group_name(r.group)},
                         {"assignment", r.assignment_id},
                         {"phase", analytics::phase_name(r.phase)},
                         {"attempts", r.attempts},
                         {"latest_submission", r.latest_submission ? ordered_json(*r.latest_submission) : ordered_json()},
                         {"metrics", r.latest_metrics ? analysis::metrics_to_json(*r.latest_metrics) : ordered_json()},
                         {"grade", r.latest_grade ? ordered_json(*r.latest_grade) : ordered_json()},
                         {"grades", r.grades}};
        rows.push_back(std::move(row));
    }
    return {{"course", report.course_id}, {"semester", report.semester}, {"rows", rows}};
}

std::string course_report_to_csv(const CourseReport& report) {
    std::vector<analytics::StudyRecord> records;
    for (const auto& r : report.rows) {
        if (!r.latest_metrics || !r.latest_grade) continue;
        analytics::StudyRecord rec;
        rec.student_id = r.student_id;
        rec.group = r.group;
        rec.semester = report.semester;
        rec.phase = r.phase;
        rec.assignment = r.assignment_id;
        rec.line = r.latest_metrics->line_pct;
        rec.branch = r.latest_metrics->branch_pct;
        rec.cond = r.latest_metrics->condition_pct;
        rec.redundant = r.latest_metrics->redundant_count;
        rec.total = r.latest_metrics->total_tests;
        rec.grade = *r.latest_grade;
        records.push_back(std::move(rec));
    }
    return analytics::records_to_csv(records);
}

struct Platform::Impl {
    std::unique_ptr<Store> store;
    Clock clock;
    runtime::ExecutionLimits limits;

    mutable std::shared_mutex mutex;
    StoreState state;
    std::map<std::string, std::shared_ptr<const suite::AssignmentBundle>> bundles;
    std::vector<SubmissionRecord> submissions;
    std::map<std::string, std::size_t> submission_index;
    std::map<std::string, std::string> tokens;  // digest -> user id
    std::uint64_t next_submission = 1;

    std::mutex key_mutex;
    std::map<std::pair<std::string, std::string>, std::shared_ptr<std::mutex>> submit_locks;

    // All lookups below expect `mutex` to be held.
    const User* find_user(std::string_view id) const {
        for (const auto& u : state.users) {
            if (u.id == id) return &u;
        }
        return nullptr;
    }
    Course* find_course(std::string_view id) {
        for (auto& c : state.courses) {
            if (c.id == id) return &c;
        }
        return nullptr;
    }
    const Course* find_course(std::string_view id) const { return const_cast<Impl*>(this)->find_course(id); }
    const BundleEntry* find_bundle_entry(std::string_view id) const {
        for (const auto& b : state.bundles) {
            if (b.id == id) return &b;
        }
        return nullptr;
    }
    bool institution_exists(std::string_view id) const {
        return std::any_of(state.institutions.begin(), state.institutions.end(), [&](const auto& i) { return i.id == id; });
    }
    std::shared_ptr<const suite::AssignmentBundle> bundle(std::string_view id) const {
        const auto it = bundles.find(std::string(id));
        return it == bundles.end() ? nullptr : it->second;
    }

    /// Staff visibility of a bundle.
    bool can_see(const Principal& p, const BundleEntry& entry) const {
        if (!is_staff(p)) return false;
        const auto b = bundle(entry.id);
        if (!b) return false;
        switch (b->visibility) {
            case suite::Visibility::Private: return entry.owner_id == p.user_id;
            case suite::Visibility::Institution: return entry.institution_id == p.institution_id;
            case suite::Visibility::Public: return true;
        }
        return false;
    }

    bool can_read_course(const Principal& p, const Course& c) const {
        if (c.institution_id != p.institution_id) return false;
        if (p.role == Role::Admin) return true;
        return p.role == Role::Instructor && c.has_instructor(p.user_id);
    }

    bool can_read_submission(const Principal& p, const SubmissionRecord& r) const {
        if (p.role == Role::Student) return r.student_id == p.user_id;
        const auto* course = find_course(r.course_id);
        return course && can_read_course(p, *course);
    }

    const SubmissionRecord& submission(const std::string& id) const {
        const auto it = submission_index.find(id);
        if (it == submission_index.end()) throw not_found("no submission '" + id + "'");
        return submissions[it->second];
    }

    IssuedToken add_user(const std::string& institution_id, const UserSpec& spec) {
        require_id(spec.id, "user");
        if (find_user(spec.id)) throw conflict("user '" + spec.id + "' already exists");
        IssuedToken issued{spec.id, new_token()};
        User user{spec.id, institution_id, spec.role, spec.name.empty() ? spec.id : spec.name, sha256_hex(issued.token)};
        tokens[user.token_sha256] = user.id;
        state.users.push_back(std::move(user));
        return issued;
    }

    void add_record(SubmissionRecord record) {
        store->append_submission(record);
        submission_index[record.id] = submissions.size();
        submissions.push_back(std::move(record));
    }

    ordered_json summary(const SubmissionRecord& r, bool staff) const {
        ordered_json j{{"id", r.id},
                       {"assignment", r.assignment_id},
                       {"course", r.course_id},
                       {"student", r.student_id},
                       {"attempt", r.attempt},
                       {"timestamp", r.timestamp},
                       {"status", submission_status_name(r.status)},
                       {"feedback_mode", suite::feedback_mode_name(r.feedback_mode)}};
        if (r.feedback) j["tests"] = r.feedback->at("receipt").at("tests");
        if (staff && r.grade) j["grade"] = *r.grade;
        if (r.status == SubmissionStatus::Failed) j["error"] = r.error;
        return j;
    }

    PipelineOutput rerun(const SubmissionRecord& r) const {
        const auto b = bundle(r.assignment_id);
        if (!b) throw not_found("bundle '" + r.assignment_id + "' is no longer available");
        const auto* course = find_course(r.course_id);
        PipelineInput input;
        input.set_sources(r.suite_text, r.program_text);
        input.mode = r.feedback_mode;
        input.submission_id = r.id;
        input.timestamp = r.timestamp;
        input.attempt = r.attempt;
        input.grade = course ? course->grade : analytics::GradeConfig{};
        input.limits = limits;
        return run_pipeline(*b, input);
    }
};

Platform::Platform(std::unique_ptr<Store> store, Clock clock, runtime::ExecutionLimits limits)
    : impl_(std::make_unique<Impl>()) {
    limits.validate();
    impl_->store = std::move(store);
    impl_->clock = clock ? std::move(clock) : Clock(utc_now);
    impl_->limits = limits;
    impl_->state = impl_->store->load_state();
    for (const auto& u : impl_->state.users) impl_->tokens[u.token_sha256] = u.id;
    for (const auto& entry : impl_->state.bundles) {
        try {
            impl_->bundles[entry.id] = std::make_shared<const suite::AssignmentBundle>(
                suite::parse_bundle(impl_->store->load_bundle_files(entry.id)));
        } catch (const suite::BundleError& e) {
            throw StoreError("stored bundle '" + entry.id + "' no longer loads: " + e.what());
        }
    }
    for (auto& record : impl_->store->load_submissions()) {
        impl_->next_submission = std::max(impl_->next_submission, submission_number(record.id) + 1);
        impl_->submission_index[record.id] = impl_->submissions.size();
        impl_->submissions.push_back(std::move(record));
    }
    impl_->next_submission = std::max(impl_->next_submission, impl_->state.next_submission);
}

Platform::~Platform() = default;

IssuedToken Platform::bootstrap(const std::string& institution_id, const std::string& institution_name,
                                const std::string& admin_id, const std::string& admin_name) {
    std::unique_lock lock(impl_->mutex);
    if (!impl_->state.users.empty()) throw conflict("the platform is already bootstrapped");
    require_id(institution_id, "institution");
    auto state = impl_->state;
    impl_->state.institutions.push_back({institution_id, institution_name.empty() ? institution_id : institution_name});
    try {
        auto issued = impl_->add_user(institution_id, {admin_id, admin_name, Role::Admin});
        impl_->store->save_state(impl_->state);
        return issued;
    } catch (...) {
        impl_->state = std::move(state);
        impl_->tokens.clear();
        throw;
    }
}

Principal Platform::authenticate(std::string_view token) const {
    const auto digest = sha256_hex(token);
    std::shared_lock lock(impl_->mutex);
    const auto it = impl_->tokens.find(digest);
    if (token.empty() || it == impl_->tokens.end()) throw ServiceError(401, "unauthorized", "missing or unknown bearer token");
    const auto* user = impl_->find_user(it->second);
    return {user->id, user->institution_id, user->role};
}

IssuedToken Platform::create_institution(const Principal& caller, const std::string& id, const std::string& name,
                                         const UserSpec& admin) {
    if (caller.role != Role::Admin) throw forbidden("only administrators create institutions");
    require_id(id, "institution");
    std::unique_lock lock(impl_->mutex);
    if (impl_->institution_exists(id)) throw conflict("institution '" + id + "' already exists");
    if (impl_->find_user(admin.id)) throw conflict("user '" + admin.id + "' already exists");
    impl_->state.institutions.push_back({id, name.empty() ? id : name});
    auto issued = impl_->add_user(id, {admin.id, admin.name, Role::Admin});
    impl_->store->save_state(impl_->state);
    return issued;
}

IssuedToken Platform::create_user(const Principal& caller, const UserSpec& spec) {
    if (caller.role != Role::Admin) throw forbidden("only administrators create users");
    std::unique_lock lock(impl_->mutex);
    auto issued = impl_->add_user(caller.institution_id, spec);
    impl_->store->save_state(impl_->state);
    return issued;
}

ordered_json Platform::upsert_course(const Principal& caller, const json& body) {
    if (!is_staff(caller)) throw forbidden("students cannot manage courses");
    Course course;
    try {
        course = course_from_json(body);
    } catch (const std::invalid_argument& e) {
        throw invalid(e.what());
    }
    if (!course.institution_id.empty() && course.institution_id != caller.institution_id) {
        throw forbidden("courses can only be created in your own institution");
    }
    course.institution_id = caller.institution_id;

    std::unique_lock lock(impl_->mutex);
    auto* existing = impl_->find_course(course.id);
    if (existing && existing->institution_id != caller.institution_id) throw conflict("course id '" + course.id + "' is taken");
    if (caller.role == Role::Instructor) {
        if (existing && !existing->has_instructor(caller.user_id)) throw forbidden("you do not teach this course");
        if (!course.has_instructor(caller.user_id)) course.instructors.push_back(caller.user_id);
    }
    std::vector<std::string> problems;
    for (const auto& id : course.instructors) {
        const auto* u = impl_->find_user(id);
        if (!u || u->institution_id != caller.institution_id || u->role == Role::Student) {
            problems.push_back("not an instructor of this institution: " + id);
        }
    }
    for (const auto& r : course.roster) {
        const auto* u = impl_->find_user(r.student_id);
        if (!u || u->institution_id != caller.institution_id || u->role != Role::Student) {
            problems.push_back("not a student of this institution: " + r.student_id);
        }
    }
    for (const auto& a : course.assignments) {
        const auto* entry = impl_->find_bundle_entry(a.bundle_id);
        const bool owned_by_teacher = entry && course.has_instructor(entry->owner_id) &&
                                      entry->institution_id == caller.institution_id;
        if (!entry || !(impl_->can_see(caller, *entry) || owned_by_teacher)) {
            problems.push_back("unknown or inaccessible assignment: " + a.bundle_id);
        }
    }
    if (!problems.empty()) throw invalid("course '" + course.id + "' is inconsistent", problems);
    if (existing) {
        *existing = course;
    } else {
        impl_->state.courses.push_back(course);
    }
    impl_->store->save_state(impl_->state);
    return course_to_json(course);
}

ordered_json Platform::register_bundle(const Principal& caller, const suite::BundleFiles& files) {
    if (!is_staff(caller)) throw forbidden("students cannot upload assignments");
    std::shared_ptr<const suite::AssignmentBundle> bundle;
    try {
        bundle = std::make_shared<const suite::AssignmentBundle>(suite::parse_bundle(files));
    } catch (const suite::BundleError& e) {
        throw ServiceError(422, "invalid_bundle",
                           std::string(suite::bundle_error_kind_name(e.kind())) + ": " + e.what(), e.details());
    }
    std::unique_lock lock(impl_->mutex);
    auto* entry = const_cast<BundleEntry*>(impl_->find_bundle_entry(bundle->id));
    if (entry && entry->owner_id != caller.user_id) throw conflict("assignment id '" + bundle->id + "' is taken");
    impl_->store->save_bundle_files(bundle->id, files);
    if (!entry) impl_->state.bundles.push_back({bundle->id, caller.user_id, caller.institution_id});
    impl_->bundles[bundle->id] = bundle;
    impl_->store->save_state(impl_->state);
    return {{"id", bundle->id},
            {"title", bundle->title},
            {"mode", suite::mode_name(bundle->mode)},
            {"feedback_mode", suite::feedback_mode_name(bundle->feedback_mode)},
            {"visibility", suite::visibility_name(bundle->visibility)},
            {"reference_tests", bundle->reference_suite.size()},
            {"concepts", bundle->used_concepts()}};
}

ordered_json Platform::set_feedback_mode(const Principal& caller, const std::string& course_id,
                                         const std::string& assignment_id, std::optional<FeedbackMode> mode) {
    std::unique_lock lock(impl_->mutex);
    auto* course = impl_->find_course(course_id);
    if (!course) throw not_found("no course '" + course_id + "'");
    if (!impl_->can_read_course(caller, *course)) throw forbidden("you do not manage this course");
    auto* entry = const_cast<CourseAssignment*>(course->find_assignment(assignment_id));
    if (!entry) throw not_found("course '" + course_id + "' has no assignment '" + assignment_id + "'");
    entry->feedback_mode = mode;
    entry->group_modes.clear();
    impl_->store->save_state(impl_->state);
    return course_to_json(*course);
}

SubmissionRecord Platform::submit(const Principal& caller, const SubmitRequest& request) {
    if (caller.role != Role::Student) throw forbidden("only students submit");
    std::shared_ptr<const suite::AssignmentBundle> bundle;
    const Course* course = nullptr;
    FeedbackMode mode = FeedbackMode::None;
    analytics::GradeConfig grade;
    {
        std::shared_lock lock(impl_->mutex);
        std::vector<const Course*> candidates;
        for (const auto& c : impl_->state.courses) {
            if (c.institution_id != caller.institution_id) continue;
            if (request.course_id && c.id != *request.course_id) continue;
            if (c.find_student(caller.user_id) && c.find_assignment(request.assignment_id)) candidates.push_back(&c);
        }
        if (candidates.empty()) {
            throw forbidden("you are not enrolled in a course with assignment '" + request.assignment_id + "'");
        }
        if (candidates.size() > 1) throw invalid("the assignment is in several of your courses; name the course");
        course = candidates.front();
        bundle = impl_->bundle(request.assignment_id);
        if (!bundle) throw not_found("assignment '" + request.assignment_id + "' is not available");
        mode = effective_mode(*course->find_assignment(request.assignment_id), course->find_student(caller.user_id)->group,
                              bundle->feedback_mode);
        grade = course->grade;
    }
    const std::string course_id = course->id;

    std::shared_ptr<std::mutex> key_lock;
    {
        std::lock_guard guard(impl_->key_mutex);
        auto& slot = impl_->submit_locks[{caller.user_id, request.assignment_id}];
        if (!slot) slot = std::make_shared<std::mutex>();
        key_lock = slot;
    }
    std::lock_guard serialized(*key_lock);

    SubmissionRecord record;
    {
        std::unique_lock lock(impl_->mutex);
        record.id = submission_id(impl_->next_submission++);
        record.attempt = 1 + static_cast<std::uint32_t>(std::count_if(
                                 impl_->submissions.begin(), impl_->submissions.end(), [&](const SubmissionRecord& r) {
                                     return r.student_id == caller.user_id && r.assignment_id == request.assignment_id;
                                 }));
    }
    record.student_id = caller.user_id;
    record.course_id = course_id;
    record.assignment_id = request.assignment_id;
    record.timestamp = impl_->clock();
    record.feedback_mode = mode;
    record.suite_text = request.suite_text;
    record.program_text = request.program_text;

    PipelineInput input;
    input.set_sources(request.suite_text, request.program_text);
    input.mode = mode;
    input.submission_id = record.id;
    input.timestamp = record.timestamp;
    input.attempt = record.attempt;
    input.grade = grade;
    input.limits = impl_->limits;
    try {
        const auto out = run_pipeline(*bundle, input);
        record.status = SubmissionStatus::Done;
        record.metrics = out.metrics_json();
        record.gap = out.gap_json(*bundle);
        record.feedback = out.feedback_json();
        record.grade = out.grade;
        record.results = out.results_json();
    } catch (const lang::ParseError& e) {
        throw ServiceError(422, "parse_error", "the submission does not parse", {format_location(e)});
    } catch (const analysis::SubmissionError& e) {
        if (e.kind() == analysis::SubmissionError::Kind::InterfaceMismatch) {
            throw ServiceError(409, "interface_mismatch", e.what(), e.details());
        }
        throw ServiceError(422, "invalid_submission", e.what(), e.details());
    } catch (const std::exception& e) {
        record.status = SubmissionStatus::Failed;
        record.error = e.what();
    }

    std::unique_lock lock(impl_->mutex);
    impl_->add_record(record);
    return record;
}

ordered_json Platform::get_feedback(const Principal& caller, const std::string& submission_id, bool full) const {
    std::shared_lock lock(impl_->mutex);
    const auto& r = impl_->submission(submission_id);
    if (!impl_->can_read_submission(caller, r)) throw forbidden("you cannot read this submission");
    if (full && !is_staff(caller)) throw forbidden("full results are for instructors");
    ordered_json out{{"submission", impl_->summary(r, is_staff(caller))},
                     {"feedback", r.feedback ? *r.feedback : ordered_json()}};
    if (full) {
        out["metrics"] = r.metrics ? *r.metrics : ordered_json();
        out["gap"] = r.gap ? *r.gap : ordered_json();
        out["grade"] = r.grade ? ordered_json(*r.grade) : ordered_json();
        out["results"] = r.results ? *r.results : ordered_json();
    }
    return out;
}

std::string Platform::get_feedback_html(const Principal& caller, const std::string& submission_id) const {
    std::shared_lock lock(impl_->mutex);
    const auto& r = impl_->submission(submission_id);
    if (!impl_->can_read_submission(caller, r)) throw forbidden("you cannot read this submission");
    if (r.status != SubmissionStatus::Done) throw conflict("submission '" + submission_id + "' has no feedback");
    return feedback::render_html(impl_->rerun(r).report);
}

ordered_json Platform::history(const Principal& caller, const std::optional<std::string>& assignment_id,
                               const std::optional<std::string>& student_id) const {
    if (caller.role == Role::Student && student_id && *student_id != caller.user_id) {
        throw forbidden("students can only list their own submissions");
    }
    std::shared_lock lock(impl_->mutex);
    ordered_json out = ordered_json::array();
    for (const auto& r : impl_->submissions) {
        if (assignment_id && r.assignment_id != *assignment_id) continue;
        if (student_id && r.student_id != *student_id) continue;
        if (!impl_->can_read_submission(caller, r)) continue;
        out.push_back(impl_->summary(r, is_staff(caller)));
    }
    return out;
}

ordered_json Platform::list_assignments(const Principal& caller) const {
    std::shared_lock lock(impl_->mutex);
    ordered_json out = ordered_json::array();
    if (caller.role == Role::Student) {
        for (const auto& c : impl_->state.courses) {
            const auto* enrolled = c.find_student(caller.user_id);
            if (c.institution_id != caller.institution_id || !enrolled) continue;
            for (const auto& a : c.assignments) {
                const auto b = impl_->bundle(a.bundle_id);
                if (!b) continue;
                out.push_back({{"id", b->id},
                               {"title", b->title},
                               {"course", c.id},
                               {"mode", suite::mode_name(b->mode)},
                               {"source_visibility", suite::source_visibility_name(b->source_visibility)},
                               {"feedback_mode", suite::feedback_mode_name(effective_mode(a, enrolled->group, b->feedback_mode))}});
            }
        }
        return out;
    }
    for (const auto& entry : impl_->state.bundles) {
        if (!impl_->can_see(caller, entry)) continue;
        const auto b = impl_->bundle(entry.id);
        out.push_back({{"id", b->id},
                       {"title", b->title},
                       {"mode", suite::mode_name(b->mode)},
                       {"source_visibility", suite::source_visibility_name(b->source_visibility)},
                       {"feedback_mode", suite::feedback_mode_name(b->feedback_mode)},
                       {"visibility", suite::visibility_name(b->visibility)},
                       {"owner", entry.owner_id},
                       {"institution", entry.institution_id}});
    }
    return out;
}

ordered_json Platform::assignment_detail(const Principal& caller, const std::string& assignment_id) const {
    std::shared_lock lock(impl_->mutex);
    const auto* entry = impl_->find_bundle_entry(assignment_id);
    const auto b = impl_->bundle(assignment_id);
    if (!entry || !b) throw not_found("no assignment '" + assignment_id + "'");
    ordered_json interface = ordered_json::array();
    for (const auto& sig : b->interface) interface.push_back(suite::format_signature(sig));
    ordered_json out{{"id", b->id},
                     {"title", b->title},
                     {"specification", b->specification},
                     {"mode", suite::mode_name(b->mode)},
                     {"source_visibility", suite::source_visibility_name(b->source_visibility)},
                     {"interface", interface}};
    const bool white_box = b->source_visibility == suite::SourceVisibility::WhiteBox;
    if (caller.role == Role::Student) {
        const CourseAssignment* found = nullptr;
        const RosterEntry* enrolled = nullptr;
        for (const auto& c : impl_->state.courses) {
            if (c.institution_id != caller.institution_id) continue;
            if (const auto* r = c.find_student(caller.user_id); r && c.find_assignment(assignment_id)) {
                found = c.find_assignment(assignment_id);
                enrolled = r;
                out["course"] = c.id;
                break;
            }
        }
        if (!found) throw forbidden("you are not enrolled in a course with this assignment");
        out["feedback_mode"] = suite::feedback_mode_name(effective_mode(*found, enrolled->group, b->feedback_mode));
    } else {
        if (!impl_->can_see(caller, *entry)) throw forbidden("this assignment is not shared with you");
        out["feedback_mode"] = suite::feedback_mode_name(b->feedback_mode);
        out["visibility"] = suite::visibility_name(b->visibility);
        out["owner"] = entry->owner_id;
        ordered_json tests = ordered_json::array();
        for (const auto& t : b->reference_suite.tests) tests.push_back({{"name", t.name}, {"concepts", t.concepts}});
        out["reference_tests"] = tests;
    }
    if (white_box || is_staff(caller)) {
        ordered_json sources = ordered_json::object();
        for (const auto& file : b->reference_program.files) sources[file.path] = file.text;
        out["reference_source"] = sources;
    }
    return out;
}

ordered_json Platform::whoami(const Principal& caller) const {
    std::shared_lock lock(impl_->mutex);
    const auto* user = impl_->find_user(caller.user_id);
    ordered_json courses = ordered_json::array();
    for (const auto& c : impl_->state.courses) {
        if (c.institution_id != caller.institution_id) continue;
        if (c.find_student(caller.user_id) || c.has_instructor(caller.user_id) || caller.role == Role::Admin) {
            courses.push_back({{"id", c.id}, {"title", c.title}});
        }
    }
    return {{"id", caller.user_id},
            {"name", user ? user->name : caller.user_id},
            {"institution", caller.institution_id},
            {"role", role_name(caller.role)},
            {"courses", courses}};
}

CourseReport Platform::course_report(const Principal& caller, const std::string& course_id) const {
    std::shared_lock lock(impl_->mutex);
    const auto* course = impl_->find_course(course_id);
    if (!course) throw not_found("no course '" + course_id + "'");
    if (!impl_->can_read_course(caller, *course)) throw forbidden("you do not manage this course");
    CourseReport report;
    report.course_id = course->id;
    report.semester = course->semester;
    for (const auto& student : course->roster) {
        for (const auto& a : course->assignments) {
            ReportRow row;
            row.student_id = student.student_id;
            row.group = student.group;
            row.assignment_id = a.bundle_id;
            row.phase = a.phase;
            for (const auto& r : impl_->submissions) {
                if (r.course_id != course->id || r.student_id != student.student_id || r.assignment_id != a.bundle_id) continue;
                ++row.attempts;
                if (r.status != SubmissionStatus::Done) continue;
                row.latest_submission = r.id;
                row.latest_metrics = analysis::metrics_from_json(*r.metrics);
                row.latest_grade = r.grade;
                row.grades.push_back(*r.grade);
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

SubmissionRecord Platform::reprocess(const std::string& submission_id) const {
    std::shared_lock lock(impl_->mutex);
    auto record = impl_->submission(submission_id);
    if (record.status != SubmissionStatus::Done) return record;
    const auto b = impl_->bundle(record.assignment_id);
    const auto out = impl_->rerun(record);
    record.metrics = out.metrics_json();
    record.gap = out.gap_json(*b);
    record.feedback = out.feedback_json();
    record.grade = out.grade;
    record.results = out.results_json();
    return record;
}

std::optional<std::string> Platform::resource_file(const std::string& bundle_id, const std::string& path) const {
    std::shared_lock lock(impl_->mutex);
    const auto b = impl_->bundle(bundle_id);
    if (!b) return std::nullopt;
    for (const auto& tag : b->taxonomy.concepts()) {
        for (const auto& resource : tag.resources) {
            if (suite::resource_scheme(resource.url) != suite::ResourceScheme::BundleFile || resource.url != path) continue;
            const auto it = b->files.find(path);
            if (it != b->files.end()) return it->second;
        }
    }
    return std::nullopt;
}

std::size_t Platform::submission_count() const {
    std::shared_lock lock(impl_->mutex);
    return impl_->submissions.size();
}

}  // namespace tutorforge::service
