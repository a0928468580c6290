#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lectern/core/canonical.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/core/fs.hpp"
#include "lectern/core/serialize.hpp"
#include "lectern/core/types.hpp"

namespace lectern::pipeline {

enum class GlobalStage { planned, paginated, generated, validated, awaiting_review, rendered, merged };

// Furthest completed step of one page, in execution order.
enum class PageStage { pending, generated, narrated, synthesized, synced, debugged, laid_out, final_, rendered };

std::string to_name(GlobalStage s);
std::string to_name(PageStage s);
GlobalStage global_stage_from(const std::string& name);
PageStage page_stage_from(const std::string& name);

struct TraceEvent {
    int seq = 0;
    std::string step;          // composer.skeletonize, page.codegen, ...
    std::optional<int> page;   // page-scoped steps only
    std::string note;

    bool operator==(const TraceEvent&) const = default;
};

struct PageState {
    PageStage stage = PageStage::pending;
    int revision = 0;  // bumped on every accepted EditSet
    bool approved = false;

    bool operator==(const PageState&) const = default;
};

struct RunState {
    std::string run_id;
    std::optional<GlobalStage> stage;  // nullopt before the composer finishes
    std::map<int, PageState> pages;
    bool review_enabled = false;
    bool continue_requested = false;
    std::vector<TraceEvent> trace;

    // Appends a trace event; seq numbers are consecutive from 1.
    void log(std::string step, std::optional<int> page = std::nullopt, std::string note = {});
    // Raises the page stage; never lowers it.
    void advance(int page, PageStage to);
    // Raises the global stage; never lowers it.
    void advance(GlobalStage to);
    int count(const std::string& step, std::optional<int> page = std::nullopt) const;

    bool operator==(const RunState&) const = default;
};

Json to_json(const RunState& s);
RunState run_state_from_json(const Json& j);  // SchemaError on bad input

// Artifacts of one run: <root>/<run-id>/...
class ProjectStore {
public:
    ProjectStore(std::filesystem::path project_root, std::string run_id);

    const std::string& run_id() const { return run_id_; }
    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path page_dir(int page) const;
    std::filesystem::path state_path() const { return dir_ / "state"; }

    bool exists(const std::filesystem::path& rel) const;

    template <class T>
    void put(const std::filesystem::path& rel, const T& value) const {
        write_atomic(dir_ / rel, serialize(value));
    }
    template <class T>
    T get(const std::filesystem::path& rel) const {
        const auto path = dir_ / rel;
        auto text = read_file(path);
        if (!text) throw ResumeError("missing artifact " + path.string(), path.string());
        try {
            return deserialize<T>(*text);
        } catch (const Error& e) {
            throw ResumeError("corrupt artifact " + path.string() + ": " + e.what(), path.string());
        }
    }
    void put_json(const std::filesystem::path& rel, const Json& value) const;
    Json get_json(const std::filesystem::path& rel) const;

    bool has_state() const;
    RunState load_state() const;  // ResumeError when corrupt
    void save_state(const RunState& state) const;

private:
    std::filesystem::path dir_;
    std::string run_id_;
};

// Relative artifact paths.
std::filesystem::path page_file(int page, const std::string& name);

// Exclusive per-run lock held for the lifetime of the object (flock on
// <run>/lock). Throws LockError when another process holds it.
class RunLock {
public:
    explicit RunLock(const std::filesystem::path& run_dir);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::filesystem::path path_;
    int fd_ = -1;
};

}  // namespace lectern::pipeline
