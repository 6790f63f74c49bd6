#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "tutorforge/service/platform.hpp"

namespace tutorforge::service {

struct HttpOptions {
    /// Served at `/` when set (the web UI build output).
    std::optional<std::filesystem::path> static_dir;
    std::size_t max_body_bytes = 4 * 1024 * 1024;
};

/// JSON API over a Platform. Routes are documented in docs/api.md.
class HttpServer {
public:
    HttpServer(Platform& platform, HttpOptions options = {});
    ~HttpServer();

    /// Binds; port 0 picks a free port. Returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Call after bind().
    bool listen();
    void stop();
    /// Blocks until the server accepts connections.
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tutorforge::service
