// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#include "cellsplat/orchestrate.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cellsplat/error.hpp"

extern char** environ;

namespace cellsplat {

using nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(JobStatus s) {
    switch (s) {
        case JobStatus::kPending: return "pending";
        case JobStatus::kRunning: return "running";
        case JobStatus::kDone: return "done";
        case JobStatus::kFailed: return "failed";
    }
    return "pending";
}

JobStatus job_status_from_string(const std::string& s) {
    if (s == "pending") return JobStatus::kPending;
    if (s == "running") return JobStatus::kRunning;
    if (s == "done") return JobStatus::kDone;
    if (s == "failed") return JobStatus::kFailed;
    throw SchemaError("unknown job status '" + s + "'");
}

void save_job_manifest(const JobManifest& m, const fs::path& path) {
    json cells = json::array();
    for (const auto& c : m.cells)
        cells.push_back({{"row", c.row},
                         {"col", c.col},
                         {"dataset_dir", c.dataset_dir},
                         {"output_ply", c.output_ply},
                         {"log_file", c.log_file},
                         {"status", to_string(c.status)},
                         {"exit_code", c.exit_code},
                         {"wall_time_s", c.wall_time_s}});
    const json doc = {{"version", 1},
                      {"trainer_command", m.trainer_command},
                      {"max_parallel", m.max_parallel},
                      {"cells", std::move(cells)}};

    // Atomic replace: write a sibling temp file, then rename over the target.
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp);
        if (!f) throw IoError("cannot write " + tmp.string());
        f << doc.dump(2) << '\n';
        if (!f) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string());
}

JobManifest load_job_manifest(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    json doc;
    try {
        f >> doc;
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": invalid JSON: " + e.what());
    }
    try {
        if (doc.at("version").get<int>() != 1)
            throw SchemaError(path.string() + ": unsupported manifest version");
        JobManifest m;
        m.trainer_command = doc.at("trainer_command").get<std::string>();
        m.max_parallel = doc.at("max_parallel").get<int>();
        for (const auto& c : doc.at("cells")) {
            JobCell cell;
            cell.row = c.at("row").get<int>();
            cell.col = c.at("col").get<int>();
            cell.dataset_dir = c.at("dataset_dir").get<std::string>();
            cell.output_ply = c.at("output_ply").get<std::string>();
            cell.log_file = c.value("log_file", std::string{});
            cell.status = job_status_from_string(c.at("status").get<std::string>());
            cell.exit_code = c.at("exit_code").get<int>();
            cell.wall_time_s = c.at("wall_time_s").get<double>();
            m.cells.push_back(std::move(cell));
        }
        return m;
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": malformed job manifest: " + e.what());
    }
}

namespace {

std::vector<std::string> tokenize_command(const std::string& cmd) {
    std::istringstream ss(cmd);
    std::vector<std::string> tokens;
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    return tokens;
}

void substitute(std::string& tok, const std::string& key, const std::string& value) {
    for (size_t pos = tok.find(key); pos != std::string::npos; pos = tok.find(key))
        tok.replace(pos, key.size(), value);
}

// PATH lookup mirroring what posix_spawnp will do, so a missing binary is a
// clear up-front error instead of max_parallel identical failures.
bool binary_exists(const std::string& name) {
    if (name.find('/') != std::string::npos)
        return ::access(name.c_str(), X_OK) == 0;
    const char* path = std::getenv("PATH");
    if (!path) return false;
    std::istringstream ss(path);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
        if (dir.empty()) continue;
        if (::access((fs::path(dir) / name).c_str(), X_OK) == 0) return true;
    }
    return false;
}

struct Running {
    size_t cell_index;
    std::chrono::steady_clock::time_point started;
};

}  // namespace

RunStats run_cells(JobManifest& m, const fs::path& manifest_path) {
    if (m.trainer_command.find("{data}") == std::string::npos ||
        m.trainer_command.find("{out}") == std::string::npos)
        throw OrchestrationError(
            "trainer command must contain {data} and {out} placeholders, got: " +
            m.trainer_command);
    if (m.max_parallel < 1)
        throw OrchestrationError("max_parallel must be >= 1");

    const auto tokens = tokenize_command(m.trainer_command);
    if (tokens.empty()) throw OrchestrationError("empty trainer command");
    if (!binary_exists(tokens[0]))
        throw OrchestrationError("trainer binary not found: " + tokens[0]);

    const fs::path root = manifest_path.parent_path();
    const auto resolve = [&](const std::string& rel) {
        fs::path p(rel);
        return p.is_absolute() ? p : root / p;
    };

    RunStats stats;
    // Reconcile persisted state: done cells with an existing output are
    // skipped; everything else (including stale "running") goes back to
    // pending.
    for (auto& cell : m.cells) {
        if (cell.status == JobStatus::kDone && fs::exists(resolve(cell.output_ply))) {
            ++stats.skipped;
        } else {
            cell.status = JobStatus::kPending;
            cell.exit_code = -1;
            cell.wall_time_s = 0.0;
        }
    }
    save_job_manifest(m, manifest_path);

    std::map<pid_t, Running> running;

    const auto spawn_cell = [&](size_t index) {
        JobCell& cell = m.cells[index];
        std::vector<std::string> argv_s = tokens;
        for (auto& tok : argv_s) {
            substitute(tok, "{data}", resolve(cell.dataset_dir).string());
            substitute(tok, "{out}", resolve(cell.output_ply).string());
        }
        std::vector<char*> argv;
        argv.reserve(argv_s.size() + 1);
        for (auto& s : argv_s) argv.push_back(s.data());
        argv.push_back(nullptr);

        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init(&actions);
        fs::path log = cell.log_file.empty()
                           ? resolve(cell.dataset_dir) / "trainer.log"
                           : resolve(cell.log_file);
        if (cell.log_file.empty())
            cell.log_file = fs::relative(log, root).string();
        posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log.c_str(),
                                         O_WRONLY | O_CREAT | O_APPEND, 0644);
        posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);

        pid_t pid = -1;
        const int rc =
            posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
        posix_spawn_file_actions_destroy(&actions);
        if (rc != 0)
            throw OrchestrationError(std::string("failed to spawn trainer: ") +
                                     std::strerror(rc));
        cell.status = JobStatus::kRunning;
        running[pid] = {index, std::chrono::steady_clock::now()};
        save_job_manifest(m, manifest_path);
    };

    size_t next = 0;
    const auto find_pending = [&]() -> bool {
        while (next < m.cells.size() && m.cells[next].status != JobStatus::kPending)
            ++next;
        return next < m.cells.size();
    };

    while (true) {
        while (static_cast<int>(running.size()) < m.max_parallel && find_pending())
            spawn_cell(next++);
        if (running.empty()) break;

        int wstatus = 0;
        const pid_t pid = ::waitpid(-1, &wstatus, 0);
        if (pid < 0) {
            if (errno == EINTR) continue;
            throw OrchestrationError(std::string("waitpid failed: ") +
                                     std::strerror(errno));
        }
        const auto it = running.find(pid);
        if (it == running.end()) continue;  // not one of ours

        JobCell& cell = m.cells[it->second.cell_index];
        cell.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          it->second.started)
                .count();
        cell.exit_code = WIFEXITED(wstatus) ? WEXITSTATUS(wstatus)
                                            : 128 + WTERMSIG(wstatus);
        const bool ok = cell.exit_code == 0 && fs::exists(resolve(cell.output_ply));
        cell.status = ok ? JobStatus::kDone : JobStatus::kFailed;
        if (ok)
            ++stats.executed;
        else
            ++stats.failed;
        running.erase(it);
        save_job_manifest(m, manifest_path);
    }
    return stats;
}

}  // namespace cellsplat
