#include "pretex/cli.hpp"

#include "pretex/config.hpp"
#include "pretex/errors.hpp"
#include "pretex/pipeline.hpp"
#include "pretex/util.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace pretex {

namespace {

// Flag values gathered before the config file is loaded; only flags the
// user actually passed override it.
struct Overrides {
    std::string config_path;
    std::string generator;
    std::string key_subset;
    std::string model;
    std::string model_url;
    std::string output_dir;
    std::string cache_dir;
    int shots = 0;
    int parallelism = 0;
    int retries = 0;
    uint64_t subset_seed = 0;
    uint64_t negative_seed = 0;
    uint64_t demo_seed = 0;
    uint64_t mock_seed = 0;
    bool rephrase = false;
    bool no_rephrase = false;
    bool ablation = false;
    bool pad_llmeval = false;
};

void add_common_options(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "run configuration file")->required();
    cmd->add_option("--generator", ov.generator, "pretexeval, direct or llmeval");
    cmd->add_option("--key-subset", ov.key_subset,
                    "comma-separated transform keys to evaluate (default: all)");
    cmd->add_option("--model", ov.model, "endpoint model name or a built-in mock (mock:...)");
    cmd->add_option("--model-url", ov.model_url, "chat-completions base URL");
    cmd->add_option("--output-dir", ov.output_dir, "artifact directory");
    cmd->add_option("--cache-dir", ov.cache_dir, "response cache directory");
    cmd->add_option("--shots", ov.shots, "demonstrations per prompt");
    cmd->add_option("--parallelism", ov.parallelism, "request dispatch width");
    cmd->add_option("--retries", ov.retries, "transport retry budget");
    cmd->add_option("--subset-seed", ov.subset_seed, "tail selection seed");
    cmd->add_option("--negative-seed", ov.negative_seed, "negative sampling seed");
    cmd->add_option("--demo-seed", ov.demo_seed, "demonstration split/draw seed");
    cmd->add_option("--mock-seed", ov.mock_seed, "seed for seedless mock specs");
    cmd->add_flag("--rephrase", ov.rephrase, "rephrase statements via the configured endpoint");
    cmd->add_flag("--no-rephrase", ov.no_rephrase, "disable rephrasing");
    cmd->add_flag("--ablation", ov.ablation, "emit cumulative transformation reports");
    cmd->add_flag("--pad-llmeval", ov.pad_llmeval, "pad short llmeval replies instead of failing");
}

RunConfig resolve_config(const CLI::App* cmd, const Overrides& ov) {
    RunConfig config = load_config(ov.config_path);
    auto passed = [cmd](const std::string& flag) { return cmd->count(flag) > 0; };
    if (passed("--generator")) config.generator = ov.generator;
    if (passed("--key-subset")) {
        config.key_subset.clear();
        for (const auto& piece : split(ov.key_subset, ',')) {
            std::string name = trim(piece);
            if (!name.empty()) config.key_subset.push_back(name);
        }
    }
    if (passed("--model")) config.model = ov.model;
    if (passed("--model-url")) config.model_url = ov.model_url;
    if (passed("--output-dir")) config.output_dir = ov.output_dir;
    if (passed("--cache-dir")) config.cache_dir = ov.cache_dir;
    if (passed("--shots")) config.shots = ov.shots;
    if (passed("--parallelism")) config.parallelism = ov.parallelism;
    if (passed("--retries")) config.retries = ov.retries;
    if (passed("--subset-seed")) config.subset_seed = ov.subset_seed;
    if (passed("--negative-seed")) config.negative_seed = ov.negative_seed;
    if (passed("--demo-seed")) config.demo_seed = ov.demo_seed;
    if (passed("--mock-seed")) config.mock_seed = ov.mock_seed;
    if (passed("--rephrase")) config.rephrase = true;
    if (passed("--no-rephrase")) config.rephrase = false;
    if (passed("--ablation")) config.ablation = true;
    if (passed("--pad-llmeval")) config.pad_llmeval = true;
    for (const auto& name : config.key_subset) parse_key(name);
    return config;
}

int exit_code_for(const Error& e) {
    if (dynamic_cast<const PoolError*>(&e) || dynamic_cast<const GenerationError*>(&e)) return 2;
    if (dynamic_cast<const EvaluationError*>(&e) || dynamic_cast<const TransportError*>(&e))
        return 3;
    return 1;  // ConfigError, ParseError, anything else shaped like bad input
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"dynamic true/false knowledge evaluation for language models"};
    app.name("pretexeval");
    app.require_subcommand(1);

    Overrides ov;
    bool check_endpoint = false;

    CLI::App* ingest = app.add_subcommand("ingest", "sample the evaluation subset and negatives");
    CLI::App* generate = app.add_subcommand("generate", "produce test statements");
    CLI::App* evaluate = app.add_subcommand("evaluate", "query the model and score replies");
    CLI::App* report = app.add_subcommand("report", "compute mastery metrics");
    CLI::App* run = app.add_subcommand("run", "all stages in order");
    CLI::App* validate = app.add_subcommand("validate", "check a configuration without running");
    for (CLI::App* cmd : {ingest, generate, evaluate, report, run, validate})
        add_common_options(cmd, ov);
    validate->add_flag("--check-endpoint", check_endpoint, "probe endpoint reachability");

    std::vector<const char*> argv;
    argv.push_back("pretexeval");
    for (const auto& arg : args) argv.push_back(arg.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App* cmd = app.get_subcommands().front();
    try {
        RunConfig config = resolve_config(cmd, ov);
        if (cmd == validate) {
            auto problems = validate_config(config, check_endpoint);
            for (const auto& problem : problems) out << "problem: " << problem << "\n";
            out << problems.size() << (problems.size() == 1 ? " problem" : " problems") << "\n";
            return problems.empty() ? 0 : 1;
        }
        if (cmd == ingest) {
            run_ingest(config, err);
        } else if (cmd == generate) {
            run_generate(config, err);
        } else if (cmd == evaluate) {
            run_evaluate(config, err);
        } else if (cmd == report) {
            run_report(config, out, err);
        } else if (cmd == run) {
            run_all(config, out, err);
        }
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace pretex
