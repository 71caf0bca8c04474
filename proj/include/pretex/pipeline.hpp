#pragma once

#include "pretex/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace pretex {

// Artifact names under output_dir.
extern const char* kSubsetFile;
extern const char* kDemosFile;
extern const char* kSamplesFile;
extern const char* kResultsFile;
extern const char* kScoresFile;
extern const char* kReportJsonFile;
extern const char* kReportTextFile;
extern const char* kKrowCsvFile;
extern const char* kAblationTextFile;
extern const char* kManifestFile;

// report_<view>.json names for the cumulative transformation sweep.
std::string ablation_report_file(const std::string& view);

struct StageStats {
    uint64_t rephrase_requests = 0;
    uint64_t generation_requests = 0;
    uint64_t verify_requests = 0;
};

// Each stage reads its inputs from output_dir (except ingest), writes its
// artifacts there, and refreshes the manifest. Progress goes to `log`;
// artifacts never carry timestamps or absolute paths.
void run_ingest(const RunConfig& config, std::ostream& log);
StageStats run_generate(const RunConfig& config, std::ostream& log);
StageStats run_evaluate(const RunConfig& config, std::ostream& log);
void run_report(const RunConfig& config, std::ostream& out, std::ostream& log);
StageStats run_all(const RunConfig& config, std::ostream& out, std::ostream& log);

// Hashes every artifact in output_dir (cache and the manifest itself
// excluded) into manifest.json.
void write_manifest(const RunConfig& config);

}  // namespace pretex
