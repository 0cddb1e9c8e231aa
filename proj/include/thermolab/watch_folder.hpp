#pragma once

#include "thermolab/controller.hpp"

#include <atomic>
#include <filesystem>
#include <set>
#include <string>
#include <thread>

namespace thermolab {

/// Confirms a capture whenever a new frame file (.raw or .csv) shows up in
/// the session's frames/ directory, in file-name order.
class WatchFolder {
public:
    explicit WatchFolder(std::shared_ptr<SessionController> session, std::string subdir = "frames");
    ~WatchFolder();

    WatchFolder(const WatchFolder&) = delete;
    WatchFolder& operator=(const WatchFolder&) = delete;

    /// One scan; returns the number of captures confirmed.
    std::size_t poll_once();

    void start(Millis interval);
    void stop();

private:
    std::shared_ptr<SessionController> session_;
    std::string subdir_;
    std::set<std::string> known_;
    std::atomic<bool> running_{false};
    std::thread worker_;
};

} // namespace thermolab
