#include "lectern/debugger/renderer.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <thread>

#include "lectern/codegen/codegen.hpp"
#include "lectern/core/errors.hpp"
#include "lectern/core/fs.hpp"

namespace lectern::debugger {

namespace {

std::string source_file_name(const RenderRequest& r) {
    return "page_" + std::to_string(r.page_index) + (r.dialect == "ir-json" ? ".json" : ".py");
}

std::filesystem::path fresh_dir() {
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("lectern-render-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    return s;
}

}  // namespace

RenderOutcome NullRenderer::render(const RenderRequest& request) {
    RenderOutcome out;
    out.source_path = source_file_name(request);
    if (request.mode == RenderMode::full) out.output_ref = "null://page-" + std::to_string(request.page_index);
    return out;
}

ScriptedRenderer::ScriptedRenderer(Options options) : options_(std::move(options)) {}

int ScriptedRenderer::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

RenderOutcome ScriptedRenderer::render(const RenderRequest& request) {
    int call;
    {
        std::lock_guard lock(mutex_);
        call = ++calls_;
    }
    RenderOutcome out;
    out.source_path = source_file_name(request);
    const bool fail = options_.fails_when ? options_.fails_when(request.source) : call <= options_.fail_count;
    if (!fail) {
        if (request.mode == RenderMode::full) out.output_ref = "scripted://page-" + std::to_string(request.page_index);
        return out;
    }
    out.exit_status = 1;
    std::optional<int> line;
    for (const auto& hit : codegen::scan_markers(request.source)) {
        if (options_.fault_anchor ? hit.anchor_id == *options_.fault_anchor : hit.anchor_id.rfind("sync-wait-", 0) != 0) {
            line = hit.line + 1;
            break;
        }
    }
    out.stderr_text = "Traceback (most recent call last):\n";
    if (options_.line_info && line)
        out.stderr_text += "  File \"" + out.source_path + "\", line " + std::to_string(*line) + ", in construct\n";
    out.stderr_text += "RuntimeError: scripted render failure " + std::to_string(call) + "\n";
    return out;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

CommandResult run_command(const std::string& command, const std::filesystem::path& work_dir, double timeout_s) {
    const auto err_path = work_dir / ".stderr";
    const pid_t pid = ::fork();
    if (pid < 0) throw RendererUnavailable("cannot spawn '" + command + "'");
    if (pid == 0) {
        ::setpgid(0, 0);
        if (::chdir(work_dir.c_str()) != 0) ::_exit(126);
        const int fd = ::open(err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        if (fd >= 0) {
            ::dup2(fd, 2);
            ::close(fd);
        }
        const int null_fd = ::open("/dev/null", O_RDWR);
        if (null_fd >= 0) {
            ::dup2(null_fd, 0);
            ::dup2(null_fd, 1);
            ::close(null_fd);
        }
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    CommandResult result;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    int status = 0;
    for (;;) {
        const pid_t r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (r < 0) throw RendererUnavailable("lost track of '" + command + "'");
        if (std::chrono::steady_clock::now() >= deadline) {
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            result.timed_out = true;
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    result.stderr_text = read_file(err_path).value_or("");
    std::error_code ec;
    std::filesystem::remove(err_path, ec);
    if (result.timed_out) result.exit_status = 124;
    else if (WIFEXITED(status)) result.exit_status = WEXITSTATUS(status);
    else result.exit_status = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    return result;
}

ExternalRenderer::ExternalRenderer(CommandBackend backend) : backend_(std::move(backend)) {
    if (backend_.command.empty()) throw ConfigError("external renderer needs a command");
}

RenderOutcome ExternalRenderer::render(const RenderRequest& request) {
    const auto dir = request.work_dir.empty() ? fresh_dir() : request.work_dir;
    std::filesystem::create_directories(dir);
    RenderOutcome out;
    out.source_path = source_file_name(request);
    const auto source = dir / out.source_path;
    write_atomic(source, request.source);
    const auto output = dir / ("page_" + std::to_string(request.page_index) + ".mp4");
    std::string cmd = backend_.command;
    cmd = replace_all(cmd, "{source}", shell_quote(source.string()));
    cmd = replace_all(cmd, "{workdir}", shell_quote(dir.string()));
    cmd = replace_all(cmd, "{page}", std::to_string(request.page_index));
    cmd = replace_all(cmd, "{mode}", request.mode == RenderMode::check ? "check" : "full");
    cmd = replace_all(cmd, "{output}", shell_quote(output.string()));
    const CommandResult r = run_command(cmd, dir, backend_.timeout_s);
    if (r.exit_status == 126 || r.exit_status == 127)
        throw RendererUnavailable("renderer command could not run (exit " + std::to_string(r.exit_status) +
                                  "): " + r.stderr_text.substr(0, 512));
    out.exit_status = r.exit_status;
    out.stderr_text = r.timed_out ? "TimeoutError: renderer exceeded " + std::to_string(backend_.timeout_s) + " s\n" +
                                        r.stderr_text
                                  : r.stderr_text;
    if (out.ok() && request.mode == RenderMode::full) out.output_ref = output.string();
    return out;
}

std::shared_ptr<Renderer> make_renderer(const CommandBackend& backend) {
    if (backend.backend == "null") return std::make_shared<NullRenderer>();
    if (backend.backend == "external") return std::make_shared<ExternalRenderer>(backend);
    throw ConfigError("renderer backend '" + backend.backend + "' cannot be built from configuration");
}

}  // namespace lectern::debugger
