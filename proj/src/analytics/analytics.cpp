#include "tutorforge/analytics/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace tutorforge::analytics {

namespace {

constexpr double kAlpha = 0.05;

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double x, double a, double b) {
    constexpr int kMaxIterations = 10000;
    constexpr double kEpsilon = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon) return h;
    }
    return h;
}

double mean_of(std::span<const double> values) {
    double sum = 0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double variance_of(std::span<const double> values, double mean) {
    double sum = 0;
    for (double v : values) sum += (v - mean) * (v - mean);
    return sum / static_cast<double>(values.size() - 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto end = line.find(sep, start);
        out.push_back(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Non-empty lines with their 1-based numbers; the first must match `header`.
std::vector<std::pair<std::size_t, std::string_view>> data_lines(std::string_view text, std::string_view header) {
    std::vector<std::pair<std::size_t, std::string_view>> out;
    std::size_t number = 0;
    bool seen_header = false;
    for (auto line : split(text, '\n')) {
        ++number;
        line = trim(line);
        if (line.empty()) continue;
        if (!seen_header) {
            if (line != header) throw DataError(number, "expected header '" + std::string(header) + "'");
            seen_header = true;
            continue;
        }
        out.emplace_back(number, line);
    }
    if (!seen_header) throw DataError(1, "missing header '" + std::string(header) + "'");
    return out;
}

double parse_number(std::string_view field, std::size_t line, const char* name, double lo, double hi) {
    field = trim(field);
    double value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw DataError(line, std::string(name) + " is not a number: '" + std::string(field) + "'");
    }
    if (value < lo || value > hi) {
        throw DataError(line, std::string(name) + " out of range: '" + std::string(field) + "'");
    }
    return value;
}

std::size_t parse_count(std::string_view field, std::size_t line, const char* name) {
    field = trim(field);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError(line, std::string(name) + " is not a count: '" + std::string(field) + "'");
    }
    return value;
}

std::string parse_token(std::string_view field, std::size_t line, const char* name) {
    field = trim(field);
    if (field.empty()) throw DataError(line, std::string(name) + " is empty");
    if (field.find('"') != std::string_view::npos) throw DataError(line, std::string(name) + " may not contain quotes");
    return std::string(field);
}

Group parse_group_field(std::string_view field, std::size_t line) {
    const auto group = parse_group(trim(field));
    if (!group) throw DataError(line, "group must be A or B");
    return *group;
}

// Shortest round-trip text for a double.
std::string format_number(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ptr);
}

std::string fixed(double value, int decimals) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(decimals);
    // Avoid printing "-0.00".
    const double scale = std::pow(10.0, decimals);
    if (std::round(std::fabs(value) * scale) == 0) value = 0;
    out << value;
    return out.str();
}

VariableRow make_row(std::string name, int decimals, std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw InsufficientData(name + ": need at least two observations per group (A has " + std::to_string(a.size()) +
                               ", B has " + std::to_string(b.size()) + ")");
    }
    VariableRow row;
    row.name = std::move(name);
    row.decimals = decimals;
    row.test = welch_test(a, b);
    row.significant = row.test.p < kAlpha;
    return row;
}

constexpr std::array<std::string_view, kSurveyQuestions> kQuestions{
    "The feedback helped me find gaps in code coverage.",
    "The feedback helped me find redundant tests.",
    "The coverage feedback changed how I will approach testing.",
    "The redundancy feedback changed how I will approach testing.",
    "The tool made me more effective at testing.",
    "The tool made me more productive at testing.",
    "The tool is easy to use.",
    "I learned to use the tool quickly.",
    "I would recommend the tool to someone learning testing.",
};

}  // namespace

void GradeConfig::validate() const {
    if (!(w_coverage >= 0) || !(w_redundancy >= 0) || std::fabs(w_coverage + w_redundancy - 1.0) > 1e-9) {
        throw std::invalid_argument("grade weights must be non-negative and sum to 1");
    }
}

double compute_grade(const analysis::MetricsRecord& m, const GradeConfig& config) {
    config.validate();
    if (m.total_tests == 0) return 0.0;
    const double coverage = (m.line_pct + m.branch_pct + m.condition_pct) / 3.0;
    const double kept = std::max(0.0, 1.0 - static_cast<double>(m.redundant_count) / static_cast<double>(m.total_tests));
    return config.w_coverage * coverage + config.w_redundancy * 100.0 * kept;
}

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0) || !(b > 0)) throw std::invalid_argument("incomplete beta needs a > 0 and b > 0");
    if (!(x >= 0 && x <= 1)) throw std::invalid_argument("incomplete beta needs 0 <= x <= 1");
    if (x == 0 || x == 1) return x;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
    return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_cdf(double t, double df) {
    if (!(df > 0)) throw std::invalid_argument("degrees of freedom must be positive");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double tail = 0.5 * regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5);
    return t > 0 ? 1.0 - tail : tail;
}

WelchResult welch_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("Welch test needs at least two values per sample");
    WelchResult r;
    r.n_a = a.size();
    r.n_b = b.size();
    r.mean_a = mean_of(a);
    r.mean_b = mean_of(b);
    r.var_a = variance_of(a, r.mean_a);
    r.var_b = variance_of(b, r.mean_b);
    const double sa = r.var_a / static_cast<double>(r.n_a);
    const double sb = r.var_b / static_cast<double>(r.n_b);
    const double se2 = sa + sb;
    if (se2 == 0) {
        r.df = static_cast<double>(r.n_a + r.n_b - 2);
        if (r.mean_a == r.mean_b) {
            r.t = 0;
            r.p = 1;
        } else {
            r.t = r.mean_a > r.mean_b ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            r.p = 0;
        }
        return r;
    }
    r.t = (r.mean_a - r.mean_b) / std::sqrt(se2);
    r.df = se2 * se2 / (sa * sa / static_cast<double>(r.n_a - 1) + sb * sb / static_cast<double>(r.n_b - 1));
    r.p = std::min(1.0, regularized_incomplete_beta(r.df / (r.df + r.t * r.t), r.df / 2.0, 0.5));
    return r;
}

std::string_view group_name(Group group) { return group == Group::A ? "A" : "B"; }

std::string_view phase_name(Phase phase) {
    switch (phase) {
        case Phase::Pretest: return "PRETEST";
        case Phase::Treatment: return "TREATMENT";
        case Phase::Posttest: return "POSTTEST";
    }
    return "?";
}

std::optional<Group> parse_group(std::string_view text) {
    if (text == "A") return Group::A;
    if (text == "B") return Group::B;
    return std::nullopt;
}

std::optional<Phase> parse_phase(std::string_view text) {
    if (text == "PRETEST") return Phase::Pretest;
    if (text == "TREATMENT") return Phase::Treatment;
    if (text == "POSTTEST") return Phase::Posttest;
    return std::nullopt;
}

DataError::DataError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

std::vector<StudyRecord> parse_records_csv(std::string_view text) {
    std::vector<StudyRecord> out;
    for (const auto& [number, line] : data_lines(text, kRecordsHeader)) {
        const auto fields = split(line, ',');
        if (fields.size() != 11) throw DataError(number, "expected 11 fields, found " + std::to_string(fields.size()));
        StudyRecord r;
        r.student_id = parse_token(fields[0], number, "student_id");
        r.group = parse_group_field(fields[1], number);
        r.semester = parse_token(fields[2], number, "semester");
        if (r.semester != "S1" && r.semester != "S2") throw DataError(number, "semester must be S1 or S2");
        const auto phase = parse_phase(trim(fields[3]));
        if (!phase) throw DataError(number, "phase must be PRETEST, TREATMENT or POSTTEST");
        r.phase = *phase;
        r.assignment = parse_token(fields[4], number, "assignment");
        r.line = parse_number(fields[5], number, "line", 0, 100);
        r.branch = parse_number(fields[6], number, "branch", 0, 100);
        r.cond = parse_number(fields[7], number, "cond", 0, 100);
        r.redundant = parse_count(fields[8], number, "redundant");
        r.total = parse_count(fields[9], number, "total");
        if (r.redundant > r.total) throw DataError(number, "redundant exceeds total");
        r.grade = parse_number(fields[10], number, "grade", 0, 100);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<SurveyResponse> parse_survey_csv(std::string_view text) {
    std::vector<SurveyResponse> out;
    for (const auto& [number, line] : data_lines(text, kSurveyHeader)) {
        const auto fields = split(line, ',');
        if (fields.size() != 2 + kSurveyQuestions) {
            throw DataError(number, "expected " + std::to_string(2 + kSurveyQuestions) + " fields, found " +
                                        std::to_string(fields.size()));
        }
        SurveyResponse r;
        r.respondent = parse_token(fields[0], number, "respondent");
        r.group = parse_group_field(fields[1], number);
        for (std::size_t q = 0; q < kSurveyQuestions; ++q) {
            if (trim(fields[2 + q]).empty()) continue;  // no answer
            const auto value = parse_count(fields[2 + q], number, "rating");
            if (value < 1 || value > 7) throw DataError(number, "ratings must be between 1 and 7");
            r.answers[q] = static_cast<int>(value);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string records_to_csv(std::span<const StudyRecord> records) {
    std::string out = std::string(kRecordsHeader) + "\n";
    for (const auto& r : records) {
        out += r.student_id + "," + std::string(group_name(r.group)) + "," + r.semester + "," +
               std::string(phase_name(r.phase)) + "," + r.assignment + "," + format_number(r.line) + "," +
               format_number(r.branch) + "," + format_number(r.cond) + "," + std::to_string(r.redundant) + "," +
               std::to_string(r.total) + "," + format_number(r.grade) + "\n";
    }
    return out;
}

std::string survey_to_csv(std::span<const SurveyResponse> responses) {
    std::string out = std::string(kSurveyHeader) + "\n";
    for (const auto& r : responses) {
        out += r.respondent + "," + std::string(group_name(r.group));
        for (int a : r.answers) out += a == 0 ? std::string(",") : "," + std::to_string(a);
        out += "\n";
    }
    return out;
}

GroupStats group_summary(std::span<const StudyRecord> records, Phase phase) {
    std::array<std::vector<double>, 5> a;
    std::array<std::vector<double>, 5> b;
    for (const auto& r : records) {
        if (r.phase != phase) continue;
        auto& target = r.group == Group::A ? a : b;
        target[0].push_back(r.line);
        target[1].push_back(r.branch);
        target[2].push_back(r.cond);
        target[3].push_back(static_cast<double>(r.redundant));
        target[4].push_back(r.grade);
    }
    GroupStats stats;
    switch (phase) {
        case Phase::Pretest: stats.title = "Pre-test results"; break;
        case Phase::Treatment: stats.title = "Treatment results"; break;
        case Phase::Posttest: stats.title = "Post-test results"; break;
    }
    stats.rows.push_back(make_row("Line Coverage", 1, a[0], b[0]));
    stats.rows.push_back(make_row("Branch Coverage", 1, a[1], b[1]));
    stats.rows.push_back(make_row("Conditional Coverage", 1, a[2], b[2]));
    stats.rows.push_back(make_row("Redundant Tests", 2, a[3], b[3]));
    stats.rows.push_back(make_row("Assignment Grade", 2, a[4], b[4]));
    return stats;
}

GroupStats survey_summary(std::span<const SurveyResponse> responses) {
    GroupStats stats;
    stats.title = "Survey results (7-point scale)";
    for (std::size_t q = 0; q < kSurveyQuestions; ++q) {
        std::vector<double> a;
        std::vector<double> b;
        for (const auto& r : responses) {
            if (r.answers[q] != 0) (r.group == Group::A ? a : b).push_back(r.answers[q]);
        }
        stats.rows.push_back(make_row("Q" + std::to_string(q + 1), 2, a, b));
    }
    return stats;
}

std::string_view survey_question(std::size_t index) { return kQuestions.at(index); }

std::string export_csv(const GroupStats& stats) {
    std::string out = "variable,group_a_mean,group_b_mean,t,df,p,significant\n";
    for (const auto& row : stats.rows) {
        out += row.name + "," + fixed(row.test.mean_a, row.decimals) + "," + fixed(row.test.mean_b, row.decimals) + "," +
               fixed(row.test.t, 4) + "," + fixed(row.test.df, 2) + "," + fixed(row.test.p, 6) + "," +
               (row.significant ? "yes" : "no") + "\n";
    }
    return out;
}

std::string export_text(const GroupStats& stats) {
    const std::vector<std::string> header{"Dependent Variable", "Treatment A (Detailed)", "Treatment B (Conceptual)", "t", "p",
                                          "Sig."};
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : stats.rows) {
        rows.push_back({row.name, fixed(row.test.mean_a, row.decimals), fixed(row.test.mean_b, row.decimals),
                        fixed(row.test.t, 3), fixed(row.test.p, 4), row.significant ? "*" : ""});
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
    }
    auto emit = [&](const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto pad = std::string(width[c] - cells[c].size(), ' ');
            line += c == 0 ? cells[c] + pad : "  " + pad + cells[c];
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        return line + "\n";
    };
    std::size_t total = 0;
    for (auto w : width) total += w;
    total += 2 * (width.size() - 1);
    std::string out = stats.title + "\n" + emit(header) + std::string(total, '-') + "\n";
    for (const auto& r : rows) out += emit(r);
    out += "* p < 0.05 (Welch two-sample t-test, two-sided)\n";
    return out;
}

}  // namespace tutorforge::analytics
