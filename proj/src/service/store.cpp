#include "tutorforge/service/store.hpp"

#include <fstream>
#include <sstream>

namespace tutorforge::service {

namespace fs = std::filesystem;

namespace {

constexpr const char* kStateFile = "state.json";
constexpr const char* kLogFile = "submissions.jsonl";
constexpr const char* kBundleDir = "bundles";

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StoreError("cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Write to a sibling and rename, so readers never see a torn file.
void write_atomically(const fs::path& path, const std::string& text) {
    const auto temp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size())) || !out.flush()) {
            throw StoreError("cannot write " + temp.string());
        }
    }
    std::error_code ec;
    fs::rename(temp, path, ec);
    if (ec) throw StoreError("cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace

FileStore::FileStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_ / kBundleDir, ec);
    if (ec || !fs::is_directory(root_)) throw StoreError("cannot use store directory " + root_.string());
    const auto probe = root_ / ".write-probe";
    {
        std::ofstream out(probe);
        if (!out) throw StoreError("store directory is not writable: " + root_.string());
    }
    fs::remove(probe, ec);
}

bool FileStore::initialized() const { return fs::exists(root_ / kStateFile); }

StoreState FileStore::load_state() {
    if (!initialized()) return {};
    try {
        return state_from_json(nlohmann::json::parse(read_text(root_ / kStateFile)));
    } catch (const nlohmann::json::exception& e) {
        throw StoreError(std::string("corrupt state.json: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw StoreError(std::string("corrupt state.json: ") + e.what());
    }
}

void FileStore::save_state(const StoreState& state) { write_atomically(root_ / kStateFile, state_to_json(state).dump(2) + "\n"); }

void FileStore::append_submission(const SubmissionRecord& record) {
    const auto line = submission_to_json(record).dump() + "\n";
    std::lock_guard lock(log_mutex_);
    std::ofstream out(root_ / kLogFile, std::ios::binary | std::ios::app);
    if (!out || !out.write(line.data(), static_cast<std::streamsize>(line.size())) || !out.flush()) {
        throw StoreError("cannot append to " + (root_ / kLogFile).string());
    }
}

std::vector<SubmissionRecord> FileStore::load_submissions() {
    std::vector<SubmissionRecord> out;
    const auto path = root_ / kLogFile;
    if (!fs::exists(path)) return out;
    const auto text = read_text(path);
    std::size_t start = 0;
    std::size_t number = 0;
    while (start < text.size()) {
        ++number;
        const auto end = text.find('\n', start);
        const bool torn = end == std::string::npos;  // crash mid-append
        const auto line = text.substr(start, torn ? std::string::npos : end - start);
        start = torn ? text.size() : end + 1;
        if (line.empty()) continue;
        try {
            out.push_back(submission_from_json(nlohmann::ordered_json::parse(line)));
        } catch (const std::exception& e) {
            if (torn) break;
            throw StoreError("corrupt submissions.jsonl line " + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

void FileStore::save_bundle_files(const std::string& bundle_id, const suite::BundleFiles& files) {
    if (!valid_id(bundle_id)) throw StoreError("invalid bundle id '" + bundle_id + "'");
    const auto dir = root_ / kBundleDir / bundle_id;
    const auto staging = root_ / kBundleDir / ("." + bundle_id + ".staging");
    std::error_code ec;
    fs::remove_all(staging, ec);
    for (const auto& [path, text] : files) {
        const auto target = staging / fs::path(path);
        fs::create_directories(target.parent_path(), ec);
        std::ofstream out(target, std::ios::binary | std::ios::trunc);
        if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
            throw StoreError("cannot write " + target.string());
        }
    }
    fs::remove_all(dir, ec);
    fs::rename(staging, dir, ec);
    if (ec) throw StoreError("cannot install bundle " + bundle_id + ": " + ec.message());
}

suite::BundleFiles FileStore::load_bundle_files(const std::string& bundle_id) {
    try {
        return suite::read_bundle_files(root_ / kBundleDir / bundle_id);
    } catch (const suite::BundleError& e) {
        throw StoreError("cannot read bundle " + bundle_id + ": " + e.what());
    }
}

StoreState MemoryStore::load_state() {
    std::lock_guard lock(mutex_);
    return state_;
}

void MemoryStore::save_state(const StoreState& state) {
    std::lock_guard lock(mutex_);
    state_ = state;
}

void MemoryStore::append_submission(const SubmissionRecord& record) {
    std::lock_guard lock(mutex_);
    submissions_.push_back(record);
}

std::vector<SubmissionRecord> MemoryStore::load_submissions() {
    std::lock_guard lock(mutex_);
    return submissions_;
}

void MemoryStore::save_bundle_files(const std::string& bundle_id, const suite::BundleFiles& files) {
    std::lock_guard lock(mutex_);
    bundles_[bundle_id] = files;
}

suite::BundleFiles MemoryStore::load_bundle_files(const std::string& bundle_id) {
    std::lock_guard lock(mutex_);
    const auto it = bundles_.find(bundle_id);
    if (it == bundles_.end()) throw StoreError("unknown bundle " + bundle_id);
    return it->second;
}

}  // namespace tutorforge::service
