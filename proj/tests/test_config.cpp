#include "pretex/config.hpp"
#include "pretex/errors.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace pretex;
using testsup::TempDir;
using testsup::fixture_path;
using testsup::write_text;

namespace {

RunConfig fixture_config() {
    RunConfig config;
    config.kb_path = fixture_path("kb.tsv");
    config.schema_path = fixture_path("schema.tsv");
    config.prototypes_path = fixture_path("prototypes.tsv");
    config.model = "mock:perfect";
    config.output_dir = "out";
    return config;
}

bool any_problem_mentions(const std::vector<std::string>& problems, const std::string& needle) {
    return std::any_of(problems.begin(), problems.end(), [&needle](const std::string& p) {
        return p.find(needle) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("config files parse key = value lines") {
    TempDir tmp;
    write_text(tmp.file("run.conf"),
               "# experiment\n"
               "kb = kb.tsv\n"
               "schema= schema.tsv\n"
               "prototypes =prototypes.tsv\n"
               "model = mock:coin:9\n"
               "generator = pretexeval\n"
               "key_subset = none, inv+dn\n"
               "shots = 3\n"
               "rephrase = true\n"
               "rephraser_url = http://localhost:9000/v1\n"
               "rephraser_model = helper\n"
               "subset_seed = 42\n"
               "parallelism = 4\n"
               "output_dir = out/exp1\n"
               "\n");
    auto config = load_config(tmp.file("run.conf"));
    CHECK(config.kb_path == "kb.tsv");
    CHECK(config.schema_path == "schema.tsv");
    CHECK(config.prototypes_path == "prototypes.tsv");
    CHECK(config.model == "mock:coin:9");
    const std::vector<std::string> subset = {"none", "inv+dn"};
    CHECK(config.key_subset == subset);
    CHECK(config.shots == 3);
    CHECK(config.rephrase);
    CHECK(config.subset_seed == 42);
    CHECK(config.parallelism == 4);
    CHECK(config.output_dir == "out/exp1");
    CHECK(config.demo_holdout == 3);  // defaults survive
    CHECK(config.effective_cache_dir() == "out/exp1/cache");
}

TEST_CASE("config files reject unknown keys and malformed lines") {
    TempDir tmp;
    write_text(tmp.file("bad.conf"), "modle = typo\n");
    CHECK_THROWS_WITH_AS(load_config(tmp.file("bad.conf")), doctest::Contains("modle"),
                         ConfigError);

    write_text(tmp.file("noeq.conf"), "just words\n");
    CHECK_THROWS_WITH_AS(load_config(tmp.file("noeq.conf")), doctest::Contains(":1:"),
                         ConfigError);

    write_text(tmp.file("badint.conf"), "shots = five\n");
    CHECK_THROWS_AS(load_config(tmp.file("badint.conf")), ConfigError);

    write_text(tmp.file("badkey.conf"), "key_subset = none, sideways\n");
    CHECK_THROWS_AS(load_config(tmp.file("badkey.conf")), Error);

    CHECK_THROWS_AS(load_config(tmp.file("missing.conf")), ConfigError);
}

TEST_CASE("seedless coin and surface mocks pick up the configured seed") {
    RunConfig config;
    config.model = "mock:coin";
    config.mock_seed = 17;
    CHECK(config.effective_model() == "mock:coin:17");
    config.model = "mock:surface";
    CHECK(config.effective_model() == "mock:surface:17");
    config.model = "mock:coin:3";
    CHECK(config.effective_model() == "mock:coin:3");  // explicit seed wins
    config.model = "mock:perfect";
    CHECK(config.effective_model() == "mock:perfect");
}

TEST_CASE("the config hash pins the experiment, not the execution") {
    auto config = fixture_config();
    auto base = config_hash(config);
    CHECK(base.size() == 16);

    // Execution knobs do not move the hash.
    auto tweaked = config;
    tweaked.output_dir = "elsewhere";
    tweaked.cache_dir = "/tmp/cache";
    tweaked.parallelism = 16;
    tweaked.retries = 9;
    CHECK(config_hash(tweaked) == base);

    // Experiment-defining fields do.
    auto other = config;
    other.shots = 1;
    CHECK(config_hash(other) != base);
    other = config;
    other.subset_seed += 1;
    CHECK(config_hash(other) != base);
    other = config;
    other.model = "mock:always-true";
    CHECK(config_hash(other) != base);
    other = config;
    other.key_subset = {"none"};
    CHECK(config_hash(other) != base);

    // Seedless mocks hash like their seeded expansion.
    auto seedless = config;
    seedless.model = "mock:coin";
    seedless.mock_seed = 4;
    auto seeded = config;
    seeded.model = "mock:coin:4";
    CHECK(config_hash(seedless) == config_hash(seeded));
}

TEST_CASE("a clean fixture config validates with zero problems") {
    auto problems = validate_config(fixture_config(), false);
    for (const auto& p : problems) MESSAGE(p);
    CHECK(problems.empty());
}

TEST_CASE("validation names each problem") {
    RunConfig empty;
    auto problems = validate_config(empty, false);
    CHECK(any_problem_mentions(problems, "output_dir"));
    CHECK(any_problem_mentions(problems, "model is not set"));
    CHECK(any_problem_mentions(problems, "schema"));
    CHECK(any_problem_mentions(problems, "kb"));
    CHECK(any_problem_mentions(problems, "prototypes"));

    auto config = fixture_config();
    config.model = "mock:psychic";
    CHECK(any_problem_mentions(validate_config(config, false), "mock:psychic"));

    config = fixture_config();
    config.model = "llama3";
    CHECK(any_problem_mentions(validate_config(config, false), "model_url"));

    config = fixture_config();
    config.generator = "llmeval";
    CHECK(any_problem_mentions(validate_config(config, false), "rephraser_url"));
    config.key_subset = {"none"};
    CHECK(any_problem_mentions(validate_config(config, false), "key_subset"));

    config = fixture_config();
    config.shots = 7;  // buckets hold 2 * demo_holdout = 6
    CHECK(any_problem_mentions(validate_config(config, false), "demo pool"));

    config = fixture_config();
    config.shots = 5;
    config.demo_holdout = 0;
    CHECK(any_problem_mentions(validate_config(config, false), "demo_holdout"));

    config = fixture_config();
    config.rephrase = true;
    CHECK(any_problem_mentions(validate_config(config, false), "rephraser_url"));
}

TEST_CASE("validation names missing prototype cells") {
    TempDir tmp;
    write_text(tmp.file("partial.tsv"),
               "may treat\tnone\taffirmative\t[X] might treat [Y] .\n"
               "may treat\tnone\tnegated\t[X] is not able to treat [Y] .\n");
    auto config = fixture_config();
    config.prototypes_path = tmp.file("partial.tsv");

    auto problems = validate_config(config, false);
    CHECK(any_problem_mentions(problems, "prototype pool missing (may treat, inv, affirmative)"));
    CHECK(any_problem_mentions(problems, "prototype pool missing (may prevent, none, negated)"));
}
