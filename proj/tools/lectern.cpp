#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "lectern/core/errors.hpp"
#include "lectern/core/fs.hpp"
#include "lectern/core/serialize.hpp"
#include "lectern/core/validate.hpp"
#include "lectern/debugger/renderer.hpp"
#include "lectern/layout/layout.hpp"
#include "lectern/pipeline/pipeline.hpp"
#include "lectern/pipeline/review.hpp"
#include "lectern/pipeline/services.hpp"

namespace fs = std::filesystem;
using namespace lectern;
using namespace lectern::pipeline;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitFixtureMiss = 3;

template <class T>
T load(const std::string& path, const char* what) {
    const auto text = read_file(path);
    if (!text) throw ConfigError(std::string("cannot read ") + what + " file " + path, path);
    try {
        return deserialize<T>(*text);
    } catch (const Error& e) {
        throw ConfigError(std::string("bad ") + what + " file " + path + ": " + e.what(), path);
    }
}

PipelineConfig load_config(const std::string& path) { return path.empty() ? PipelineConfig{} : load<PipelineConfig>(path, "config"); }

std::string resolve_run(const fs::path& project, const std::string& run) {
    if (!run.empty()) return run;
    std::vector<std::string> ids;
    if (fs::exists(project))
        for (const auto& e : fs::directory_iterator(project))
            if (e.is_directory() && fs::exists(e.path() / "state")) ids.push_back(e.path().filename());
    if (ids.size() == 1) return ids.front();
    throw ConfigError(ids.empty() ? "no runs under " + project.string()
                                  : "several runs under " + project.string() + "; pass --run");
}

struct ServiceFlags {
    std::string replay;
    bool offline = false;

    ServiceOptions options() const {
        ServiceOptions o;
        if (!replay.empty()) {
            if (!fs::is_directory(replay)) throw ConfigError("fixture directory " + replay + " does not exist", replay);
            o.mode = gateway::FixtureMode::replay;
            o.fixture_dir = replay;
        }
        if (offline) o.llm = LlmSource::template_agent;
        return o;
    }
    void add(CLI::App* cmd) {
        cmd->add_option("--replay", replay, "answer every service call from recorded fixtures");
        cmd->add_flag("--offline", offline, "use the built-in template agent instead of LECTERN_LLM_*");
    }
};

// LECTERN_HALT_AFTER_PAGE=<i> kills the process once page i is committed.
RunOptions run_options() {
    RunOptions o;
    if (const char* v = std::getenv("LECTERN_HALT_AFTER_PAGE")) {
        const int halt = std::atoi(v);
        o.after_page = [halt](int page) {
            if (page != halt) return;
            std::cerr << "halting after page " << page << "\n";
            std::fflush(nullptr);
            std::raise(SIGKILL);
        };
    }
    return o;
}

void report(const RunResult& r, const gateway::Gateway& g) {
    const auto stats = g.stats();
    if (r.status == RunStatus::awaiting_review) {
        std::cout << "run " << r.run_id << ": awaiting review (lectern serve --run " << r.run_id << ")\n";
    } else {
        const auto& v = r.output->video_plan;
        std::cout << "run " << r.run_id << ": completed, " << v.segments.size() << " pages, "
                  << format_real(v.total_duration_s()) << " s, merged " << v.merged_ref.value_or("") << "\n";
    }
    std::cout << "service calls: " << stats.network_calls << " network, " << stats.fixture_hits << " replayed, "
              << stats.fixture_writes << " recorded\n";
}

bool already(const fs::path& project, const std::string& run_id, GlobalStage at_least) {
    ProjectStore store(project, run_id);
    if (!store.has_state()) return false;
    const auto state = store.load_state();
    return state.stage && *state.stage >= at_least;
}

fs::path scratch_dir(const std::string& tag) {
    std::random_device rd;
    auto p = fs::temp_directory_path() / ("lectern-" + tag + "-" + std::to_string(rd()));
    fs::create_directories(p);
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lectern: narrated lecture video generation"};
    app.require_subcommand(1);
    std::string project = "project";
    app.add_option("--project", project, "project root holding run directories")->capture_default_str();

    std::function<int()> action;
    std::string outline_path, config_path, run, fixtures_dir, host = "127.0.0.1";
    int page = 0, port = 8737;
    bool review = false;
    ServiceFlags flags;

    auto* generate = app.add_subcommand("generate", "run the whole pipeline");
    generate->add_option("--outline", outline_path, "lecture outline")->required();
    generate->add_option("--config", config_path, "pipeline config; missing keys keep their defaults");
    generate->add_flag("--review", review, "park the run for educator review before the final render");
    flags.add(generate);
    generate->callback([&] {
        action = [&] {
            const auto outline = load<LectureOutline>(outline_path, "outline");
            auto config = load_config(config_path);
            if (review) config.review_enabled = true;
            validate_outline(outline);
            validate_config(config);
            const auto id = make_run_id(outline, config);
            if (already(project, id, GlobalStage::merged))
                std::cout << "run " << id << " is already complete; nothing to do\n";
            ServiceBundle bundle(config, flags.options());
            Pipeline p(project, bundle.services(), run_options());
            report(p.run(outline, config), bundle.gateway());
            return 0;
        };
    });

    auto* plan = app.add_subcommand("plan", "compose the manuscript only");
    plan->add_option("--outline", outline_path, "lecture outline")->required();
    plan->add_option("--config", config_path, "pipeline config");
    flags.add(plan);
    plan->callback([&] {
        action = [&] {
            const auto outline = load<LectureOutline>(outline_path, "outline");
            const auto config = load_config(config_path);
            validate_outline(outline);
            validate_config(config);
            const auto id = make_run_id(outline, config);
            if (already(project, id, GlobalStage::planned))
                std::cout << "run " << id << " is already planned; nothing to do\n";
            ServiceBundle bundle(config, flags.options());
            const auto m = Pipeline(project, bundle.services()).plan(outline, config);
            std::cout << "run " << id << ": " << m.sections.size() << " sections, " << m.word_count << " words\n";
            for (const auto& s : m.sections) std::cout << "  " << s.heading << "\n";
            return 0;
        };
    });

    auto* paginate = app.add_subcommand("paginate", "split the manuscript into pages");
    paginate->add_option("--run", run, "run id (optional when the project holds one run)");
    flags.add(paginate);
    paginate->callback([&] {
        action = [&] {
            const auto id = resolve_run(project, run);
            if (already(project, id, GlobalStage::paginated))
                std::cout << "run " << id << " is already paginated; nothing to do\n";
            const auto config = ProjectStore(project, id).get<PipelineConfig>("config");
            ServiceBundle bundle(config, flags.options());
            for (const auto& p : Pipeline(project, bundle.services()).paginate(id))
                std::cout << "page " << p.page_index << ": " << p.title << " (" << p.bullet_points.size()
                          << " bullets, " << p.visual_intents.size() << " visuals)\n";
            return 0;
        };
    });

    auto* render_page = app.add_subcommand("render-page", "render one page's current scene in full mode");
    render_page->add_option("--run", run, "run id");
    render_page->add_option("--page", page, "page index")->required();
    render_page->callback([&] {
        action = [&] {
            const auto id = resolve_run(project, run);
            ProjectStore store(project, id);
            RunLock lock(store.dir());
            const auto state = store.load_state();
            if (!state.pages.count(page) || state.pages.at(page).stage < PageStage::generated)
                throw ConfigError("page " + std::to_string(page) + " has no scene yet");
            if (state.pages.at(page).stage >= PageStage::rendered) {
                const auto r = open_envelope(store.get_json(page_file(page, "render")), "RenderResult");
                std::cout << "page " << page << " is already rendered: " << r.at("video_ref").get<std::string>()
                          << "; nothing to do\n";
                return 0;
            }
            const auto config = store.get<PipelineConfig>("config");
            const auto scene = store.get<SceneProgram>(page_file(page, "scene"));
            auto renderer = debugger::make_renderer(config.renderer);
            const auto out = renderer->render({page, scene.source_text, config.dialect, debugger::RenderMode::full,
                                               store.dir() / "render" / ("page_" + std::to_string(page))});
            if (!out.ok()) {
                std::cerr << out.stderr_text;
                throw Error("RenderError", "page " + std::to_string(page) + " failed to render (exit " +
                                               std::to_string(out.exit_status) + ")");
            }
            std::cout << "page " << page << ": " << out.output_ref.value_or("(no output)") << "\n";
            return 0;
        };
    });

    auto* inspect = app.add_subcommand("inspect", "print a page's stage and layout conflicts");
    inspect->add_option("--run", run, "run id");
    inspect->add_option("--page", page, "page index")->required();
    inspect->callback([&] {
        action = [&] {
            const auto id = resolve_run(project, run);
            ProjectStore store(project, id);
            const auto state = store.load_state();
            if (!state.pages.count(page)) throw ConfigError("run " + id + " has no page " + std::to_string(page));
            const auto config = store.get<PipelineConfig>("config");
            const auto scene = store.get<SceneProgram>(page_file(page, "scene"));
            const auto report = layout::detect_conflicts(scene, config.frame, config.margin_u);
            std::cout << "run " << id << " page " << page << ": stage " << to_name(state.pages.at(page).stage)
                      << ", " << scene.elements.size() << " elements, " << scene.events.size() << " events\n";
            for (const auto& o : report.overlaps)
                std::cout << "overlap " << o.a << " " << o.b << " area " << format_real(o.overlap_area_u2) << "\n";
            for (const auto& o : report.overflows) {
                std::cout << "overflow " << o.element_id;
                for (auto e : o.violated_edges) std::cout << " " << to_name(e);
                std::cout << " excess " << format_real(o.excess_u) << "\n";
            }
            if (report.empty()) std::cout << "no conflicts\n";
            return 0;
        };
    });

    auto* serve = app.add_subcommand("serve", "serve the review API");
    serve->add_option("--run", run, "run whose config drives the final render");
    serve->add_option("--port", port, "TCP port")->capture_default_str();
    serve->add_option("--host", host, "bind address")->capture_default_str();
    flags.add(serve);
    serve->callback([&] {
        action = [&] {
            const auto id = resolve_run(project, run);
            const auto opts = flags.options();
            ReviewDesk desk(project, [&](const std::string& run_id) {
                const auto config = ProjectStore(project, run_id).get<PipelineConfig>("config");
                ServiceBundle bundle(config, opts);
                return Pipeline(project, bundle.services()).resume(run_id);
            });
            if (!desk.enable_review(id)) std::cout << "run " << id << " is already rendered; review is read-only\n";
            std::cout << "reviewing " << id << " on http://" << host << ":" << port << "\n" << std::flush;
            serve_review(desk, host, port);
            return 0;
        };
    });

    auto* fixtures = app.add_subcommand("fixtures", "manage recorded service fixtures");
    fixtures->require_subcommand(1);
    auto* record = fixtures->add_subcommand("record", "run the pipeline and record every service answer");
    record->add_option("--outline", outline_path, "lecture outline")->required();
    record->add_option("--config", config_path, "pipeline config");
    record->add_option("--fixtures", fixtures_dir, "fixture directory to write")->required();
    record->add_flag("--offline", flags.offline, "record the built-in template agent");
    record->callback([&] {
        action = [&] {
            const auto outline = load<LectureOutline>(outline_path, "outline");
            const auto config = load_config(config_path);
            ServiceOptions opts;
            opts.mode = gateway::FixtureMode::record;
            opts.fixture_dir = fixtures_dir;
            if (flags.offline) opts.llm = LlmSource::template_agent;
            const auto scratch = scratch_dir("record");
            ServiceBundle bundle(config, opts);
            try {
                Pipeline(scratch, bundle.services()).run(outline, config);
            } catch (...) {
                fs::remove_all(scratch);
                throw;
            }
            fs::remove_all(scratch);
            std::cout << "recorded " << bundle.gateway().stats().fixture_writes << " fixtures into " << fixtures_dir
                      << " (" << gateway::verify_fixtures(fixtures_dir) << " total)\n";
            return 0;
        };
    });
    auto* verify = fixtures->add_subcommand("verify", "check fixtures, and replay a run against them");
    verify->add_option("--fixtures", fixtures_dir, "fixture directory")->required();
    verify->add_option("--outline", outline_path, "replay this outline against the fixtures");
    verify->add_option("--config", config_path, "pipeline config for the replay");
    verify->callback([&] {
        action = [&] {
            const auto n = gateway::verify_fixtures(fixtures_dir);
            std::cout << n << " fixtures well-formed\n";
            if (outline_path.empty()) return 0;
            const auto outline = load<LectureOutline>(outline_path, "outline");
            const auto config = load_config(config_path);
            ServiceOptions opts;
            opts.mode = gateway::FixtureMode::replay;
            opts.fixture_dir = fixtures_dir;
            const auto scratch = scratch_dir("verify");
            ServiceBundle bundle(config, opts);
            try {
                Pipeline(scratch, bundle.services()).run(outline, config);
            } catch (...) {
                fs::remove_all(scratch);
                throw;
            }
            fs::remove_all(scratch);
            std::cout << "replay ok: " << bundle.gateway().stats().fixture_hits << " fixtures used\n";
            return 0;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    try {
        return action();
    } catch (const FixtureMiss& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return kExitFixtureMiss;
    } catch (const Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
