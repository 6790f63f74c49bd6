#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "tutorforge/service/model.hpp"

namespace tutorforge::service {

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Persistence behind the platform. Callers serialize writes.
class Store {
public:
    virtual ~Store() = default;

    virtual StoreState load_state() = 0;
    virtual void save_state(const StoreState& state) = 0;

    /// Append-only. Records are never rewritten.
    virtual void append_submission(const SubmissionRecord& record) = 0;
    virtual std::vector<SubmissionRecord> load_submissions() = 0;

    virtual void save_bundle_files(const std::string& bundle_id, const suite::BundleFiles& files) = 0;
    virtual suite::BundleFiles load_bundle_files(const std::string& bundle_id) = 0;
};

/// Single-directory store:
///   state.json         institutions, users, courses, bundle index
///   submissions.jsonl  one submission record per line
///   bundles/<id>/      bundle files as uploaded
class FileStore final : public Store {
public:
    /// Creates the directory when missing. Throws StoreError when it cannot be
    /// created or is not writable.
    explicit FileStore(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }
    bool initialized() const;

    StoreState load_state() override;
    void save_state(const StoreState& state) override;
    void append_submission(const SubmissionRecord& record) override;
    std::vector<SubmissionRecord> load_submissions() override;
    void save_bundle_files(const std::string& bundle_id, const suite::BundleFiles& files) override;
    suite::BundleFiles load_bundle_files(const std::string& bundle_id) override;

private:
    std::filesystem::path root_;
    std::mutex log_mutex_;
};

class MemoryStore final : public Store {
public:
    StoreState load_state() override;
    void save_state(const StoreState& state) override;
    void append_submission(const SubmissionRecord& record) override;
    std::vector<SubmissionRecord> load_submissions() override;
    void save_bundle_files(const std::string& bundle_id, const suite::BundleFiles& files) override;
    suite::BundleFiles load_bundle_files(const std::string& bundle_id) override;

private:
    std::mutex mutex_;
    StoreState state_;
    std::vector<SubmissionRecord> submissions_;
    std::map<std::string, suite::BundleFiles> bundles_;
};

}  // namespace tutorforge::service
