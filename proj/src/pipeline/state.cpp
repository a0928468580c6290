#include "lectern/pipeline/state.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <array>

namespace lectern::pipeline {

namespace {

constexpr std::array<const char*, 7> kGlobalNames = {"planned",         "paginated", "generated", "validated",
                                                     "awaiting_review", "rendered",  "merged"};
constexpr std::array<const char*, 9> kPageNames = {"pending",  "generated", "narrated", "synthesized", "synced",
                                                   "debugged", "laid_out",  "final",    "rendered"};

template <std::size_t N>
int index_of(const std::array<const char*, N>& names, const std::string& name, const char* what) {
    for (std::size_t i = 0; i < N; ++i)
        if (name == names[i]) return static_cast<int>(i);
    throw SchemaError(std::string("unknown ") + what + " '" + name + "'");
}

}  // namespace

std::string to_name(GlobalStage s) { return kGlobalNames[static_cast<std::size_t>(s)]; }
std::string to_name(PageStage s) { return kPageNames[static_cast<std::size_t>(s)]; }
GlobalStage global_stage_from(const std::string& name) {
    return static_cast<GlobalStage>(index_of(kGlobalNames, name, "run stage"));
}
PageStage page_stage_from(const std::string& name) {
    return static_cast<PageStage>(index_of(kPageNames, name, "page stage"));
}

void RunState::log(std::string step, std::optional<int> page, std::string note) {
    trace.push_back({static_cast<int>(trace.size()) + 1, std::move(step), page, std::move(note)});
}

void RunState::advance(int page, PageStage to) {
    auto& p = pages[page];
    if (to > p.stage) p.stage = to;
}

void RunState::advance(GlobalStage to) {
    if (!stage || to > *stage) stage = to;
}

int RunState::count(const std::string& step, std::optional<int> page) const {
    return static_cast<int>(std::count_if(trace.begin(), trace.end(), [&](const TraceEvent& e) {
        return e.step == step && (!page || e.page == page);
    }));
}

Json to_json(const RunState& s) {
    Json pages = Json::object();
    for (const auto& [i, p] : s.pages)
        pages[std::to_string(i)] = {{"stage", to_name(p.stage)}, {"revision", p.revision}, {"approved", p.approved}};
    Json trace = Json::array();
    for (const auto& e : s.trace)
        trace.push_back({{"seq", e.seq}, {"step", e.step}, {"page", e.page ? Json(*e.page) : Json(nullptr)},
                         {"note", e.note}});
    return {{"run_id", s.run_id},
            {"stage", s.stage ? Json(to_name(*s.stage)) : Json(nullptr)},
            {"pages", pages},
            {"review_enabled", s.review_enabled},
            {"continue_requested", s.continue_requested},
            {"trace", trace}};
}

RunState run_state_from_json(const Json& j) {
    return with_schema_errors("RunState", [&] {
        RunState s;
        s.run_id = j.at("run_id").get<std::string>();
        if (!j.at("stage").is_null()) s.stage = global_stage_from(j.at("stage").get<std::string>());
        for (const auto& [key, p] : j.at("pages").items()) {
            std::size_t used = 0;
            const int index = std::stoi(key, &used);
            if (used != key.size() || index < 1) throw SchemaError("bad page key '" + key + "'");
            s.pages[index] = {page_stage_from(p.at("stage").get<std::string>()), p.at("revision").get<int>(),
                              p.at("approved").get<bool>()};
        }
        s.review_enabled = j.at("review_enabled").get<bool>();
        s.continue_requested = j.at("continue_requested").get<bool>();
        for (const auto& e : j.at("trace")) {
            TraceEvent t{e.at("seq").get<int>(), e.at("step").get<std::string>(), std::nullopt,
                         e.at("note").get<std::string>()};
            if (!e.at("page").is_null()) t.page = e.at("page").get<int>();
            if (t.seq != static_cast<int>(s.trace.size()) + 1) throw SchemaError("trace sequence is broken");
            s.trace.push_back(std::move(t));
        }
        return s;
    });
}

ProjectStore::ProjectStore(std::filesystem::path project_root, std::string run_id)
    : dir_(std::move(project_root) / run_id), run_id_(std::move(run_id)) {}

std::filesystem::path ProjectStore::page_dir(int page) const { return dir_ / "pages" / std::to_string(page); }

bool ProjectStore::exists(const std::filesystem::path& rel) const { return std::filesystem::exists(dir_ / rel); }

void ProjectStore::put_json(const std::filesystem::path& rel, const Json& value) const {
    write_atomic(dir_ / rel, canonical_dump(value));
}

Json ProjectStore::get_json(const std::filesystem::path& rel) const {
    const auto path = dir_ / rel;
    auto text = read_file(path);
    if (!text) throw ResumeError("missing artifact " + path.string(), path.string());
    try {
        return canonical_parse(*text, path.string());
    } catch (const Error& e) {
        throw ResumeError("corrupt artifact " + path.string() + ": " + e.what(), path.string());
    }
}

bool ProjectStore::has_state() const { return std::filesystem::exists(state_path()); }

RunState ProjectStore::load_state() const {
    const Json j = get_json("state");
    try {
        RunState s = run_state_from_json(open_envelope(j, "RunState"));
        if (s.run_id != run_id_) throw SchemaError("state belongs to run '" + s.run_id + "'");
        return s;
    } catch (const SchemaError& e) {
        throw ResumeError("corrupt state file " + state_path().string() + ": " + e.what(), state_path().string());
    }
}

void ProjectStore::save_state(const RunState& state) const { put_json("state", envelope("RunState", to_json(state))); }

std::filesystem::path page_file(int page, const std::string& name) {
    return std::filesystem::path("pages") / std::to_string(page) / name;
}

RunLock::RunLock(const std::filesystem::path& run_dir) : path_(run_dir / "lock") {
    std::filesystem::create_directories(run_dir);
    fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw LockError("cannot open lock file " + path_.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw LockError("run directory " + run_dir.string() + " is in use by another process");
    }
}

RunLock::~RunLock() {
    if (fd_ < 0) return;
    std::error_code ec;
    std::filesystem::remove(path_, ec);
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
}

}  // namespace lectern::pipeline
