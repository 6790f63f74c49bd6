#include "tutorforge/service/http.hpp"

#include <httplib.h>

#include "tutorforge/suite/concepts.hpp"

namespace tutorforge::service {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", kJson);
}

void send_error(httplib::Response& res, const ServiceError& e) { send_json(res, e.status(), e.to_json()); }

json parse_body(const httplib::Request& req) {
    try {
        auto body = json::parse(req.body);
        if (!body.is_object()) throw ServiceError(400, "bad_request", "the request body must be a JSON object");
        return body;
    } catch (const json::parse_error& e) {
        throw ServiceError(400, "bad_request", "the request body is not valid JSON", {e.what()});
    }
}

std::string string_field(const json& body, const char* key) {
    if (!body.contains(key) || !body.at(key).is_string()) {
        throw ServiceError(422, "invalid_request", std::string("field '") + key + "' must be a string");
    }
    return body.at(key).get<std::string>();
}

std::optional<std::string> optional_string(const json& body, const char* key) {
    if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
    return string_field(body, key);
}

std::optional<std::string> query(const httplib::Request& req, const char* key) {
    if (!req.has_param(key)) return std::nullopt;
    return req.get_param_value(key);
}

bool flag(const httplib::Request& req, const char* key) {
    const auto value = query(req, key);
    return value && (*value == "1" || *value == "true");
}

std::string content_type_for(const std::string& path) {
    const auto dot = path.rfind('.');
    const auto ext = dot == std::string::npos ? std::string() : path.substr(dot);
    if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
    if (ext == ".json") return "application/json";
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".pdf") return "application/pdf";
    return "text/plain; charset=utf-8";
}

}  // namespace

struct HttpServer::Impl {
    Platform& platform;
    HttpOptions options;
    httplib::Server server;

    Impl(Platform& p, HttpOptions o) : platform(p), options(std::move(o)) {}

    Principal principal(const httplib::Request& req) const {
        const auto header = req.get_header_value("Authorization");
        constexpr std::string_view kBearer = "Bearer ";
        if (header.size() <= kBearer.size() || header.compare(0, kBearer.size(), kBearer) != 0) {
            throw ServiceError(401, "unauthorized", "missing or unknown bearer token");
        }
        return platform.authenticate(std::string_view(header).substr(kBearer.size()));
    }

    // Wraps a handler with authentication and error mapping.
    template <typename F>
    httplib::Server::Handler authed(F handler) {
        return [this, handler](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { handler(principal(req), req, res); });
        };
    }

    template <typename F>
    static void guarded(httplib::Response& res, F&& body) {
        try {
            body();
        } catch (const ServiceError& e) {
            send_error(res, e);
        } catch (const std::exception& e) {
            send_error(res, ServiceError(500, "internal", e.what()));
        }
    }

    void routes() {
        server.set_payload_max_length(options.max_body_bytes);

        server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"status", "ok"}});
        });

        server.Get("/api/me", authed([this](const Principal& p, const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, platform.whoami(p));
        }));

        server.Post("/api/admin/institutions",
                    authed([this](const Principal& p, const httplib::Request& req, httplib::Response& res) {
                        const auto body = parse_body(req);
                        if (!body.contains("admin") || !body.at("admin").is_object()) {
                            throw ServiceError(422, "invalid_request", "field 'admin' must be an object");
                        }
                        const auto& admin = body.at("admin");
                        const auto id = string_field(body, "id");
                        const auto issued = platform.create_institution(
                            p, id, optional_string(body, "name").value_or(id),
                            {string_field(admin, "id"), optional_string(admin, "name").value_or(""), Role::Admin});
                        send_json(res, 201, {{"institution", id}, {"admin", issued.user_id}, {"token", issued.token}});
                    }));

        server.Post("/api/admin/users", authed([this](const Principal& p, const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req);
            const auto role_text = string_field(body, "role");
            const auto role = parse_role(role_text);
            if (!role) throw ServiceError(422, "invalid_request", "unknown role '" + role_text + "'");
            const auto issued = platform.create_user(p, {string_field(body, "id"), optional_string(body, "name").value_or(""), *role});
            send_json(res, 201, {{"id", issued.user_id}, {"role", role_name(*role)}, {"token", issued.token}});
        }));

        server.Post("/api/admin/courses", authed([this](const Principal& p, const httplib::Request& req, httplib::Response& res) {
            send_json(res, 201, platform.upsert_course(p, parse_body(req)));
        }));

        server.Post("/api/admin/bundles", authed([this](const Principal& p, const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req);
            if (!body.contains("files") || !body.at("files").is_object()) {
                throw ServiceError(422, "invalid_request", "field 'files' must map paths to file contents");
            }
            suite::BundleFiles files;
            for (const auto& [path, text] : body.at("files").items()) {
                if (!text.is_string()) throw ServiceError(422, "invalid_request", "file '" + path + "' must be a string");
                files[path] = text.get<std::string>();
            }
            send_json(res, 201, platform.register_bundle(p, files));
        }));

        server.Put(R"(/api/courses/([^/]+)/assignments/([^/]+))",
                   authed([this](const Principal& p, const httplib::Request& req, httplib::Response& res) {
                       const auto body = parse_body(req);
                       std::optional<FeedbackMode> mode;
                       if (const auto text = optional_string(body, "feedback_mode")) {
                           mode = suite::parse_feedback_mode(*text);
                           if (!mode) throw ServiceError(422, "invalid_request", "unknown feedback mode '" + *text + "'");
                       }
                       send_json(res, 200, platform.set_feedback_mode(p, req.matches[1], req.matches[2], mode));
                   }));

        server.Post("/api/submissions", authed([this](const Principal& p, const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req);
            SubmitRequest request{string_field(body, "assignment"), optional_string(body, "course"),
                                  string_field(body, "suite"), optional_string(body, "program")};
            const auto record = platform.submit(p, request);
            send_json(res, 201, platform.get_feedback(p, record.id, false));
        }));

        server.Get("/api/submissions", authed([this](const Principal& p, const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, platform.history(p, query(req, "assignment"), query(req, "student")));
        }));

        server.Get(R"(/api/submissions/([^/]+)/feedback)",
                   authed([this](const Principal& p, const httplib::Request& req, httplib::Response& res) {
                       if (query(req, "format") == "html") {
                           res.set_content(platform.get_feedback_html(p, req.matches[1]), "text/html; charset=utf-8");
                           return;
                       }
                       send_json(res, 200, platform.get_feedback(p, req.matches[1], flag(req, "full")));
                   }));

        server.Get("/api/assignments", authed([this](const Principal& p, const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, platform.list_assignments(p));
        }));

        server.Get(R"(/api/assignments/([^/]+))",
                   authed([this](const Principal& p, const httplib::Request& req, httplib::Response& res) {
                       send_json(res, 200, platform.assignment_detail(p, req.matches[1]));
                   }));

        server.Get(R"(/api/courses/([^/]+)/report)",
                   authed([this](const Principal& p, const httplib::Request& req, httplib::Response& res) {
                       const auto report = platform.course_report(p, req.matches[1]);
                       if (query(req, "format") == "csv") {
                           res.set_content(course_report_to_csv(report), "text/csv; charset=utf-8");
                           return;
                       }
                       send_json(res, 200, course_report_to_json(report));
                   }));

        server.Get(R"(/concepts/([^/]+))", [](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const std::string id = req.matches[1];
                const auto notes = suite::builtin_concept_notes(id);
                if (!notes) throw ServiceError(404, "not_found", "no concept '" + id + "'");
                res.set_content(*notes, "text/markdown; charset=utf-8");
            });
        });

        server.Get(R"(/assignments/([^/]+)/files/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const std::string path = req.matches[2];
                const auto file = platform.resource_file(req.matches[1], path);
                if (!file) throw ServiceError(404, "not_found", "no such resource");
                res.set_content(*file, content_type_for(path));
            });
        });

        if (options.static_dir) server.set_mount_point("/", options.static_dir->string());
    }
};

HttpServer::HttpServer(Platform& platform, HttpOptions options)
    : impl_(std::make_unique<Impl>(platform, std::move(options))) {
    impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace tutorforge::service
