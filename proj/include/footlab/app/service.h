#pragma once

#include "footlab/app/config.h"

#include <chrono>
#include <memory>
#include <string>

namespace footlab::app {

/// JSON-over-HTTP front end to the same commands as the CLI. See docs/http-api.md.
class Service {
public:
    explicit Service(SessionConfig config, std::chrono::milliseconds sync_budget = std::chrono::seconds(1));
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the listening socket; port 0 picks a free one. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Requires bind().
    void run();
    /// run() on a background thread; returns once the server accepts connections.
    void start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace footlab::app
