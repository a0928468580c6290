#include "lectern/pipeline/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <set>

#include "lectern/codegen/codegen.hpp"
#include "lectern/composer/composer.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/core/parallel.hpp"
#include "lectern/core/validate.hpp"
#include "lectern/debugger/debugger.hpp"
#include "lectern/layout/layout.hpp"
#include "lectern/paginator/paginator.hpp"
#include "lectern/synchronizer/synchronizer.hpp"

namespace lectern::pipeline {

namespace fs = std::filesystem;

namespace {

std::string relative_ref(const std::string& ref, const fs::path& run_dir) {
    const fs::path p(ref);
    if (!p.is_absolute()) return ref;
    const auto rel = p.lexically_relative(run_dir);
    if (rel.empty() || *rel.begin() == "..") return ref;
    return rel.generic_string();
}

std::string audio_ref(const AudioAsset& audio) {
    return audio.media_ref ? *audio.media_ref : "mock-audio://page-" + std::to_string(audio.page_index);
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    return s;
}

Json page_trace_json(const PageTrace& t) {
    return envelope("PageTrace", {{"debug", t.debug},
                                  {"detected", Json(t.detected)},
                                  {"placement", Json(t.placement)},
                                  {"sync_warnings", t.sync_warnings}});
}

// Work done for one page in the validation fan-out; steps that finished are
// committed even when a later step failed.
struct ValidationWork {
    std::optional<SynthesisResult> audio;
    std::optional<SceneProgram> synced;
    std::vector<std::string> sync_warnings;
    std::optional<debugger::DebugResult> debugged;
    std::optional<SceneProgram> laid_out;
    ConflictReport detected;
    PlacementPlan placement;
    ConflictReport residual;
    std::exception_ptr error;
};

std::vector<int> page_indices(const RunState& state) {
    std::vector<int> out;
    for (const auto& [i, p] : state.pages) out.push_back(i);
    return out;
}

std::size_t worker_limit(std::size_t pages, const PipelineConfig& config) {
    return std::max<std::size_t>(1, std::min<std::size_t>(pages, static_cast<std::size_t>(config.parallelism)));
}

}  // namespace

std::string ManifestMuxer::mux(const VideoSegment& segment, const fs::path&) { return segment.video_ref; }

std::string ManifestMuxer::concat(const std::vector<VideoSegment>& segments, const fs::path& run_dir) {
    Json list = Json::array();
    double total = 0;
    for (const auto& s : segments) {
        list.push_back(Json(s));
        total += s.duration_s;
    }
    write_atomic(run_dir / "merged.manifest",
                 canonical_dump(envelope("MergeManifest", {{"segments", list}, {"total_duration_s", quantize(total)}})));
    return "merged.manifest";
}

CommandMuxer::CommandMuxer(CommandBackend backend) : backend_(std::move(backend)) {
    if (backend_.command.empty()) throw ConfigError("external muxer needs a command");
}

std::string CommandMuxer::mux(const VideoSegment& segment, const fs::path& run_dir) {
    const auto rel = fs::path("segments") / ("page_" + std::to_string(segment.page_index) + ".mp4");
    fs::create_directories(run_dir / "segments");
    std::string cmd = backend_.command;
    cmd = replace_all(cmd, "{mode}", "mux");
    cmd = replace_all(cmd, "{video}", debugger::shell_quote((run_dir / segment.video_ref).string()));
    cmd = replace_all(cmd, "{audio}", debugger::shell_quote((run_dir / segment.audio_ref).string()));
    cmd = replace_all(cmd, "{list}", "");
    cmd = replace_all(cmd, "{output}", debugger::shell_quote((run_dir / rel).string()));
    const auto r = debugger::run_command(cmd, run_dir, backend_.timeout_s);
    if (r.exit_status != 0)
        throw MergeError("muxing page " + std::to_string(segment.page_index) + " failed: " + r.stderr_text,
                         std::to_string(segment.page_index));
    return rel.generic_string();
}

std::string CommandMuxer::concat(const std::vector<VideoSegment>& segments, const fs::path& run_dir) {
    std::string list;
    for (const auto& s : segments) list += (run_dir / s.video_ref).string() + "\n";
    write_atomic(run_dir / "segments" / "list.txt", list);
    std::string cmd = backend_.command;
    cmd = replace_all(cmd, "{mode}", "concat");
    cmd = replace_all(cmd, "{video}", "");
    cmd = replace_all(cmd, "{audio}", "");
    cmd = replace_all(cmd, "{list}", debugger::shell_quote((run_dir / "segments" / "list.txt").string()));
    cmd = replace_all(cmd, "{output}", debugger::shell_quote((run_dir / "merged.mp4").string()));
    const auto r = debugger::run_command(cmd, run_dir, backend_.timeout_s);
    if (r.exit_status != 0) throw MergeError("concatenation failed: " + r.stderr_text);
    return "merged.mp4";
}

std::shared_ptr<Muxer> make_muxer(const CommandBackend& backend) {
    if (backend.backend == "null") return std::make_shared<ManifestMuxer>();
    if (backend.backend == "external") return std::make_shared<CommandMuxer>(backend);
    throw ConfigError("unknown muxer backend '" + backend.backend + "'");
}

VideoArtifact merge(const std::vector<VideoSegment>& rendered, int page_count, Muxer& muxer, const fs::path& run_dir) {
    if (page_count < 1) throw MergeError("nothing to merge");
    std::vector<const VideoSegment*> by_page(static_cast<std::size_t>(page_count) + 1, nullptr);
    for (const auto& s : rendered) {
        if (s.page_index < 1 || s.page_index > page_count)
            throw MergeError("segment for unknown page " + std::to_string(s.page_index), std::to_string(s.page_index));
        if (by_page[static_cast<std::size_t>(s.page_index)])
            throw MergeError("page " + std::to_string(s.page_index) + " has two segments", std::to_string(s.page_index));
        by_page[static_cast<std::size_t>(s.page_index)] = &s;
    }
    VideoArtifact out;
    for (int i = 1; i <= page_count; ++i) {
        const VideoSegment* s = by_page[static_cast<std::size_t>(i)];
        if (!s || s->video_ref.empty())
            throw MergeError("page " + std::to_string(i) + " has no rendered segment", std::to_string(i));
        VideoSegment muxed = *s;
        muxed.video_ref = muxer.mux(*s, run_dir);
        out.segments.push_back(std::move(muxed));
    }
    out.merged_ref = page_count == 1 ? out.segments.front().video_ref : muxer.concat(out.segments, run_dir);
    return out;
}

std::string make_run_id(const LectureOutline& outline, const PipelineConfig& config) {
    const std::string material = serialize(outline) + serialize(config);
    return "run-" + gateway::sha256_hex(material).substr(0, 12);
}

Pipeline::Pipeline(fs::path project_root, Services services, RunOptions options)
    : root_(std::move(project_root)), services_(services), options_(std::move(options)) {}

RunResult Pipeline::run(const LectureOutline& outline, const PipelineConfig& config) {
    validate_outline(outline);
    validate_config(config);
    ProjectStore store(root_, make_run_id(outline, config));
    RunLock lock(store.dir());
    RunState state;
    if (store.has_state()) {
        state = store.load_state();
        verify_artifacts(store, state);
    } else {
        state.run_id = store.run_id();
        state.review_enabled = config.review_enabled;
        store.put("outline", outline);
        store.put("config", config);
        store.save_state(state);
    }
    return advance(store, state, outline, config);
}

RunResult Pipeline::resume(const std::string& run_id) {
    ProjectStore store(root_, run_id);
    if (!store.has_state()) throw ResumeError("no run state for '" + run_id + "' under " + root_.string());
    RunLock lock(store.dir());
    RunState state = store.load_state();
    const auto outline = store.get<LectureOutline>("outline");
    const auto config = store.get<PipelineConfig>("config");
    verify_artifacts(store, state);
    return advance(store, state, outline, config);
}

Manuscript Pipeline::plan(const LectureOutline& outline, const PipelineConfig& config) {
    validate_outline(outline);
    validate_config(config);
    ProjectStore store(root_, make_run_id(outline, config));
    RunLock lock(store.dir());
    if (store.has_state()) {
        const RunState state = store.load_state();
        if (state.stage) return store.get<Manuscript>("manuscript");
    }
    RunState state;
    state.run_id = store.run_id();
    state.review_enabled = config.review_enabled;
    store.put("outline", outline);
    store.put("config", config);
    auto& llm = services_.llm;
    const auto skeleton = composer::skeletonize(outline, llm);
    store.put("skeleton", skeleton);
    state.log("composer.skeletonize");
    const auto draft = composer::expand(skeleton, outline, llm, config.parallelism);
    state.log("composer.expand");
    const auto refined = composer::refine(draft, config.target_duration_s, config.words_per_minute_default, llm);
    store.put("manuscript", refined.manuscript);
    state.log("composer.refine", std::nullopt,
              "iterations=" + std::to_string(refined.iterations) + " converged=" + (refined.converged ? "1" : "0"));
    state.advance(GlobalStage::planned);
    store.save_state(state);
    return refined.manuscript;
}

std::vector<PageBlueprint> Pipeline::paginate(const std::string& run_id) {
    ProjectStore store(root_, run_id);
    if (!store.has_state()) throw ResumeError("no run state for '" + run_id + "'");
    RunLock lock(store.dir());
    RunState state = store.load_state();
    std::vector<PageBlueprint> pages;
    if (!state.stage) throw ResumeError("run '" + run_id + "' has no manuscript yet; run plan first");
    if (*state.stage >= GlobalStage::paginated) {
        for (int i : page_indices(state)) pages.push_back(store.get<PageBlueprint>(page_file(i, "blueprint")));
        return pages;
    }
    const auto config = store.get<PipelineConfig>("config");
    const auto manuscript = store.get<Manuscript>("manuscript");
    const auto segments = paginator::segment(manuscript, config.segment_budget_words);
    std::vector<std::vector<PageBlueprint>> per_segment(segments.size());
    parallel_for(segments.size(), worker_limit(segments.size(), config), [&](std::size_t i) {
        per_segment[i] = paginator::paginate_segment(segments[i], manuscript, config.page_density_max, services_.llm);
    });
    pages = paginator::aggregate(per_segment, static_cast<int>(manuscript.sections.size()));
    store.put("segments", segments);
    for (const auto& p : pages) {
        store.put(page_file(p.page_index, "blueprint"), p);
        state.pages[p.page_index] = PageState{};
    }
    state.log("paginator.paginate", std::nullopt, "pages=" + std::to_string(pages.size()));
    state.advance(GlobalStage::paginated);
    store.save_state(state);
    return pages;
}

RunResult Pipeline::advance(ProjectStore& store, RunState& state, const LectureOutline& outline,
                            const PipelineConfig& config) {
    RunResult result{store.run_id(), RunStatus::completed, std::nullopt};
    if (state.stage == GlobalStage::merged) {
        result.output = store.get<PipelineOutput>("output");
        return result;
    }
    auto& llm = services_.llm;
    const auto& dialect = codegen::dialect(config.dialect);
    auto save = [&] { store.save_state(state); };

    // Content planning.
    if (!state.stage) {
        Skeleton skeleton;
        if (store.exists("skeleton") && state.count("composer.skeletonize")) {
            skeleton = store.get<Skeleton>("skeleton");
        } else {
            skeleton = composer::skeletonize(outline, llm);
            store.put("skeleton", skeleton);
            state.log("composer.skeletonize");
            save();
        }
        const auto draft = composer::expand(skeleton, outline, llm, config.parallelism);
        state.log("composer.expand");
        const auto refined = composer::refine(draft, config.target_duration_s, config.words_per_minute_default, llm);
        store.put("manuscript", refined.manuscript);
        state.log("composer.refine", std::nullopt,
                  "iterations=" + std::to_string(refined.iterations) + " converged=" + (refined.converged ? "1" : "0"));
        state.advance(GlobalStage::planned);
        save();
    }
    const auto manuscript = store.get<Manuscript>("manuscript");

    if (*state.stage < GlobalStage::paginated) {
        const auto segments = paginator::segment(manuscript, config.segment_budget_words);
        std::vector<std::vector<PageBlueprint>> per_segment(segments.size());
        parallel_for(segments.size(), worker_limit(segments.size(), config), [&](std::size_t i) {
            per_segment[i] = paginator::paginate_segment(segments[i], manuscript, config.page_density_max, llm);
        });
        const auto pages = paginator::aggregate(per_segment, static_cast<int>(manuscript.sections.size()));
        store.put("segments", segments);
        for (const auto& p : pages) {
            store.put(page_file(p.page_index, "blueprint"), p);
            state.pages[p.page_index] = PageState{};
        }
        state.log("paginator.paginate", std::nullopt, "pages=" + std::to_string(pages.size()));
        state.advance(GlobalStage::paginated);
        save();
    }

    const std::vector<int> indices = page_indices(state);
    std::map<int, PageBlueprint> blueprints;
    for (int i : indices) blueprints[i] = store.get<PageBlueprint>(page_file(i, "blueprint"));
    auto stage_of = [&](int i) { return state.pages.at(i).stage; };
    auto todo = [&](PageStage below) {
        std::vector<int> out;
        for (int i : indices)
            if (stage_of(i) < below) out.push_back(i);
        return out;
    };

    // Presentation generation: scenes fan out, narration follows the page chain.
    {
        const auto pending = todo(PageStage::generated);
        std::vector<SceneProgram> scenes(pending.size());
        std::vector<std::exception_ptr> errors(pending.size());
        parallel_for(pending.size(), worker_limit(pending.size(), config), [&](std::size_t k) {
            try {
                scenes[k] = codegen::generate_scene(blueprints.at(pending[k]), config.frame, dialect, llm);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
        for (std::size_t k = 0; k < pending.size(); ++k) {
            if (errors[k]) std::rethrow_exception(errors[k]);
            store.put(page_file(pending[k], "scene"), scenes[k]);
            state.advance(pending[k], PageStage::generated);
            state.log("page.codegen", pending[k]);
            save();
        }
    }
    {
        std::optional<NarrationScript> previous;
        for (int i : indices) {
            if (stage_of(i) >= PageStage::narrated) {
                previous = store.get<NarrationScript>(page_file(i, "script"));
                continue;
            }
            const auto scene = store.get<SceneProgram>(page_file(i, "scene"));
            auto script = narrator::compose_narration(blueprints.at(i), scene, previous, outline.language, llm);
            store.put(page_file(i, "script"), script);
            state.advance(i, PageStage::narrated);
            state.log("page.narrate", i);
            save();
            previous = std::move(script);
        }
        state.advance(GlobalStage::generated);
        save();
    }

    // Quality validation: synthesis, sync, render-and-repair, layout.
    {
        const auto pending = todo(PageStage::laid_out);
        std::vector<ValidationWork> work(pending.size());
        parallel_for(pending.size(), worker_limit(pending.size(), config), [&](std::size_t k) {
            const int i = pending[k];
            auto& w = work[k];
            try {
                const PageStage at = stage_of(i);
                const auto script = store.get<NarrationScript>(page_file(i, "script"));
                SceneProgram scene = store.get<SceneProgram>(page_file(i, "scene"));
                SynthesisResult audio;
                if (at < PageStage::synthesized) {
                    audio = narrator::synthesize(script, config.voice_id, outline.language, services_.tts);
                    w.audio = audio;
                } else {
                    audio = store.get<SynthesisResult>(page_file(i, "audio-meta"));
                }
                if (at < PageStage::synced) {
                    auto aligned = sync::align(scene, script, audio, dialect);
                    scene = aligned.scene;
                    w.sync_warnings = aligned.warnings;
                    w.synced = scene;
                }
                if (at < PageStage::debugged) {
                    w.debugged = debugger::run_debug_loop(scene, services_.renderer, config.retry_threshold, dialect, llm);
                    scene = w.debugged->scene;
                }
                w.detected = layout::detect_conflicts(scene, config.frame, config.margin_u);
                w.placement = layout::retrieve_positions(w.detected, scene, config.frame,
                                                         ScanOrder::horizontal_right_then_vertical_down, config.cell_u,
                                                         config.margin_u);
                w.laid_out = layout::apply_layout(scene, w.placement, dialect);
                w.residual = layout::detect_conflicts(*w.laid_out, config.frame, config.margin_u);
            } catch (...) {
                w.error = std::current_exception();
            }
        });
        for (std::size_t k = 0; k < pending.size(); ++k) {
            const int i = pending[k];
            auto& w = work[k];
            if (w.audio) {
                store.put(page_file(i, "audio-meta"), *w.audio);
                state.advance(i, PageStage::synthesized);
                state.log("page.tts", i);
                save();
            }
            if (w.synced) {
                store.put(page_file(i, "scene"), *w.synced);
                state.advance(i, PageStage::synced);
                state.log("page.sync", i);
                save();
            }
            Json debug_json = nullptr;
            if (w.debugged) {
                store.put(page_file(i, "scene"), w.debugged->scene);
                debug_json = debugger::to_json(w.debugged->trace);
                store.put_json(page_file(i, "debug"), envelope("DebugTrace", debug_json));
                state.advance(i, PageStage::debugged);
                state.log("page.debug", i, debugger::to_name(w.debugged->trace.final_outcome));
                save();
            }
            if (w.laid_out) {
                if (debug_json.is_null())
                    debug_json = open_envelope(store.get_json(page_file(i, "debug")), "DebugTrace");
                store.put(page_file(i, "scene"), *w.laid_out);
                store.put(page_file(i, "conflicts"), w.residual);
                PageTrace trace{debug_json, w.detected, w.placement, w.sync_warnings};
                store.put_json(page_file(i, "trace"), page_trace_json(trace));
                state.advance(i, PageStage::laid_out);
                state.log("page.layout", i, "moves=" + std::to_string(w.placement.moves.size()));
                save();
            }
            if (w.error) std::rethrow_exception(w.error);
            if (options_.after_page) options_.after_page(i);
        }
        state.advance(GlobalStage::validated);
        save();
    }

    // Educator refinement.
    if (!state.review_enabled) {
        for (int i : todo(PageStage::final_)) {
            const auto scene = store.get<SceneProgram>(page_file(i, "scene"));
            const auto edited =
                layout::apply_human_edits(scene, EditSet{i, {}, "", ""}, config.frame, config.margin_u, dialect);
            store.put(page_file(i, "scene"), edited.scene);
            store.put(page_file(i, "conflicts"), edited.report);
            state.advance(i, PageStage::final_);
            state.log("page.human", i, "auto");
            save();
        }
    } else {
        const bool all_final = todo(PageStage::final_).empty();
        const bool all_approved = std::all_of(state.pages.begin(), state.pages.end(),
                                              [](const auto& p) { return p.second.approved; });
        if (!all_final || !all_approved || !state.continue_requested) {
            state.advance(GlobalStage::awaiting_review);
            state.log("run.await_review");
            save();
            result.status = RunStatus::awaiting_review;
            return result;
        }
    }

    // Final render and merge.
    {
        const auto pending = todo(PageStage::rendered);
        std::vector<std::string> refs(pending.size());
        std::vector<std::exception_ptr> errors(pending.size());
        parallel_for(pending.size(), worker_limit(pending.size(), config), [&](std::size_t k) {
            try {
                const int i = pending[k];
                const auto scene = store.get<SceneProgram>(page_file(i, "scene"));
                debugger::RenderRequest req{i, scene.source_text, dialect.name, debugger::RenderMode::full,
                                            store.dir() / "render" / ("page_" + std::to_string(i))};
                const auto out = services_.renderer.render(req);
                if (!out.ok() || !out.output_ref)
                    throw Error("RenderError", "final render of page " + std::to_string(i) + " failed: " +
                                                   out.stderr_text.substr(0, 512));
                refs[k] = relative_ref(*out.output_ref, store.dir());
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
        for (std::size_t k = 0; k < pending.size(); ++k) {
            if (errors[k]) std::rethrow_exception(errors[k]);
            store.put_json(page_file(pending[k], "render"), envelope("RenderResult", {{"video_ref", refs[k]}}));
            state.advance(pending[k], PageStage::rendered);
            state.log("page.render", pending[k]);
            save();
        }
        state.advance(GlobalStage::rendered);
        save();
    }

    std::vector<VideoSegment> segments;
    PipelineOutput output;
    for (int i : indices) {
        const auto render = open_envelope(store.get_json(page_file(i, "render")), "RenderResult");
        const auto audio = store.get<SynthesisResult>(page_file(i, "audio-meta"));
        segments.push_back({i, render.at("video_ref").get<std::string>(), audio_ref(audio.audio), audio.audio.duration_s});
        output.lecture_scripts.push_back(store.get<NarrationScript>(page_file(i, "script")));
    }
    output.video_plan = merge(segments, static_cast<int>(indices.size()), services_.muxer, store.dir());
    output.manuscript = manuscript;
    store.put("output", output);
    state.log("run.merge", std::nullopt, "pages=" + std::to_string(indices.size()));
    state.advance(GlobalStage::merged);
    save();
    result.output = std::move(output);
    return result;
}

void verify_artifacts(const ProjectStore& store, const RunState& state) {
    if (state.stage) {
        store.get<Skeleton>("skeleton");
        store.get<Manuscript>("manuscript");
    }
    if (state.stage && *state.stage >= GlobalStage::paginated) store.get<std::vector<Segment>>("segments");
    for (const auto& [i, p] : state.pages) {
        store.get<PageBlueprint>(page_file(i, "blueprint"));
        if (p.stage >= PageStage::generated) store.get<SceneProgram>(page_file(i, "scene"));
        if (p.stage >= PageStage::narrated) store.get<NarrationScript>(page_file(i, "script"));
        if (p.stage >= PageStage::synthesized) store.get<SynthesisResult>(page_file(i, "audio-meta"));
        if (p.stage >= PageStage::debugged) store.get_json(page_file(i, "debug"));
        if (p.stage >= PageStage::laid_out) {
            store.get<ConflictReport>(page_file(i, "conflicts"));
            store.get_json(page_file(i, "trace"));
        }
        if (p.stage >= PageStage::rendered) store.get_json(page_file(i, "render"));
        if (store.exists(page_file(i, "edits"))) store.get<std::vector<EditSet>>(page_file(i, "edits"));
    }
    if (state.stage == GlobalStage::merged) store.get<PipelineOutput>("output");
}

}  // namespace lectern::pipeline
