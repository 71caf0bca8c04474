#pragma once

#include "pretex/transform.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pretex {

// One experiment, fully pinned. Everything that defines the experiment
// feeds config_hash; execution knobs (directories, parallelism, retry
// budget) do not, so the same experiment hashes identically wherever and
// however fast it runs.
struct RunConfig {
    std::string kb_path;
    std::string schema_path;
    std::string prototypes_path;

    std::string generator = "pretexeval";
    std::vector<std::string> key_subset;  // empty = all variants

    std::string model;      // endpoint model name or a built-in mock (mock:...)
    std::string model_url;  // required for non-mock models

    int shots = 5;
    int demo_holdout = 3;  // held-out (head, relation) pairs per relation

    bool rephrase = false;
    std::string rephraser_url;
    std::string rephraser_model;

    bool pad_llmeval = false;
    bool ablation = false;

    uint64_t subset_seed = 1;
    uint64_t negative_seed = 2;
    uint64_t demo_seed = 3;
    uint64_t mock_seed = 4;

    int parallelism = 1;
    int retries = 3;

    std::string output_dir;
    std::string cache_dir;  // empty = <output_dir>/cache

    std::string effective_cache_dir() const;

    // Mock specs without an explicit seed pick up mock_seed.
    std::string effective_model() const;
};

// key = value lines, '#' comments, unknown keys rejected.
RunConfig load_config(const std::string& path);

// Canonical serialization of the experiment-defining fields.
std::string config_canonical(const RunConfig& config);
std::string config_hash(const RunConfig& config);

// Non-throwing checks; each problem is one actionable line.
std::vector<std::string> validate_config(const RunConfig& config, bool check_endpoint);

// Secrets come from the environment, never the config file.
extern const char* kApiKeyEnv;
extern const char* kRephraserApiKeyEnv;

std::string api_key_from_env();
std::string rephraser_api_key_from_env();

}  // namespace pretex
