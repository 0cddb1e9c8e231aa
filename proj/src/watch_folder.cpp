#include "thermolab/watch_folder.hpp"

#include "thermolab/frame_io.hpp"

#include <algorithm>
#include <vector>

namespace thermolab {

namespace fs = std::filesystem;

WatchFolder::WatchFolder(std::shared_ptr<SessionController> session, std::string subdir)
    : session_(std::move(session)), subdir_(std::move(subdir))
{
    for (const PhaseRecord& p : session_->session().phases)
        for (const Capture& c : p.captures)
            known_.insert(c.frame_ref);
}

WatchFolder::~WatchFolder()
{
    stop();
}

std::size_t WatchFolder::poll_once()
{
    const fs::path dir = session_->dir() / subdir_;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        return 0;
    std::vector<std::string> fresh;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        const std::string ext = entry.path().extension().string();
        if (!entry.is_regular_file() || (ext != ".raw" && ext != ".csv"))
            continue;
        if (ext == ".raw" && !fs::exists(meta_path_for(entry.path())))
            continue;
        const std::string ref = subdir_ + "/" + entry.path().filename().string();
        if (!known_.count(ref))
            fresh.push_back(ref);
    }
    std::sort(fresh.begin(), fresh.end());
    std::size_t confirmed = 0;
    for (const std::string& ref : fresh) {
        known_.insert(ref);
        CommandRequest req;
        req.verb = CommandVerb::ConfirmCapture;
        req.session_id = session_->id();
        req.request_id = "watch-" + req.session_id + "-" + ref;
        req.payload = {{"frame_ref", ref}};
        if (session_->submit(req).ok())
            ++confirmed;
    }
    return confirmed;
}

void WatchFolder::start(Millis interval)
{
    if (running_.exchange(true))
        return;
    worker_ = std::thread([this, interval] {
        while (running_.load()) {
            poll_once();
            std::this_thread::sleep_for(interval);
        }
    });
}

void WatchFolder::stop()
{
    running_.store(false);
    if (worker_.joinable())
        worker_.join();
}

} // namespace thermolab
