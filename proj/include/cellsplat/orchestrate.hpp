// Copyright Contributors to the CellSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cellsplat {

enum class JobStatus { kPending, kRunning, kDone, kFailed };

const char* to_string(JobStatus s);
JobStatus job_status_from_string(const std::string& s);

struct JobCell {
    int row = 0, col = 0;
    std::string dataset_dir;   // relative to the manifest's directory
    std::string output_ply;
    std::string log_file;
    JobStatus status = JobStatus::kPending;
    int exit_code = -1;        // meaningful once done/failed
    double wall_time_s = 0.0;
};

/// Orchestration record: which trainer to run, how wide, and the per-cell
/// state. Persisted as JSON (version 1) with an atomic rename on every
/// transition so a crashed run can resume where it stopped.
struct JobManifest {
    std::string trainer_command;  // must contain {data} and {out}
    int max_parallel = 1;
    std::vector<JobCell> cells;
};

void save_job_manifest(const JobManifest& m, const std::filesystem::path& path);
JobManifest load_job_manifest(const std::filesystem::path& path);

struct RunStats {
    int executed = 0;
    int skipped = 0;
    int failed = 0;
};

/// Runs the trainer over all cells with at most max_parallel child
/// processes in flight. Cells already done whose output file exists are
/// skipped; a nonzero exit marks that cell failed without touching its
/// siblings. The manifest is re-persisted to `manifest_path` after every
/// state transition. Relative cell paths resolve against the manifest's
/// directory. Throws OrchestrationError when the trainer binary cannot be
/// found or the command template lacks its placeholders.
RunStats run_cells(JobManifest& m, const std::filesystem::path& manifest_path);

}  // namespace cellsplat
