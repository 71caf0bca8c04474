#include "pretex/errors.hpp"
#include "pretex/metrics.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace pretex;
using testsup::TempDir;

namespace {

ScoreMatrix make_matrix(const std::vector<std::vector<int>>& cells) {
    ScoreMatrix matrix;
    matrix.model_id = "test-model";
    matrix.generator = "pretexeval";
    matrix.shots = 5;
    matrix.demo_seed = 3;
    size_t m = cells.empty() ? 0 : cells[0].size();
    for (size_t c = 0; c < m; ++c) matrix.key_subset.push_back("c" + std::to_string(c));
    for (size_t i = 0; i < cells.size(); ++i) {
        ScoreRow row;
        row.triplet_id = "t" + std::to_string(i);
        row.relation = (i % 2 == 0) ? "relation one" : "relation two";
        row.cells = cells[i];
        matrix.rows.push_back(std::move(row));
    }
    return matrix;
}

ScoreMatrix random_matrix(std::mt19937& rng, size_t n, size_t m, double p) {
    std::vector<std::vector<int>> cells(n, std::vector<int>(m));
    std::bernoulli_distribution coin(p);
    for (auto& row : cells)
        for (auto& cell : row) cell = coin(rng) ? 1 : 0;
    return make_matrix(cells);
}

// Direct enumeration of the expected joint accuracy with i columns: joint
// accuracy over every i-sized column subset, averaged. Slow but obviously
// right; the closed form must match it exactly.
Fraction brute_force_expected_joint(const ScoreMatrix& matrix, size_t i) {
    size_t m = matrix.columns();
    size_t n = matrix.rows.size();
    long long numerator = 0;
    long long subsets = 0;
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        if (static_cast<size_t>(__builtin_popcount(mask)) != i) continue;
        ++subsets;
        for (const auto& row : matrix.rows) {
            bool joint = true;
            for (size_t c = 0; c < m; ++c) {
                if ((mask >> c) & 1u) joint = joint && row.cells[c] == 1;
            }
            if (joint) ++numerator;
        }
    }
    return Fraction(numerator, subsets * static_cast<long long>(n));
}

}  // namespace

TEST_CASE("average and joint accuracy on a worked example") {
    auto matrix = make_matrix({{1, 1}, {1, 0}});
    CHECK(average_accuracy_exact(matrix) == Fraction(3, 4));
    CHECK(joint_accuracy_exact(matrix) == Fraction(1, 2));
    CHECK(average_accuracy(matrix) == doctest::Approx(0.75));
    CHECK(joint_accuracy(matrix) == doctest::Approx(0.5));

    auto curve = expected_joint_curve_exact(matrix);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0] == Fraction(3, 4));
    CHECK(curve[1] == Fraction(1, 2));
}

TEST_CASE("a 6-of-8 row drawn twice keeps 15/28 of its mass") {
    auto matrix = make_matrix({{1, 1, 1, 1, 1, 1, 0, 0}});
    auto curve = expected_joint_curve_exact(matrix);
    REQUIRE(curve.size() == 8);
    CHECK(curve[1] == Fraction(15, 28));  // C(6,2)/C(8,2)
    CHECK(curve[7] == Fraction(0, 1));
}

TEST_CASE("matrices must be rectangular and binary") {
    CHECK_THROWS_AS(average_accuracy_exact(make_matrix({})), Error);

    auto ragged = make_matrix({{1, 1}, {1, 0}});
    ragged.rows[1].cells.push_back(1);
    CHECK_THROWS_AS(average_accuracy_exact(ragged), Error);

    auto unfilled = make_matrix({{1, -1}});
    CHECK_THROWS_AS(joint_accuracy_exact(unfilled), Error);
}

TEST_CASE("closed-form curve equals subset enumeration exactly") {
    std::mt19937 rng(2024);
    for (double p : {0.25, 0.5, 0.85}) {
        auto matrix = random_matrix(rng, 20, 8, p);
        auto curve = expected_joint_curve_exact(matrix);
        REQUIRE(curve.size() == 8);
        for (size_t i = 1; i <= 8; ++i) {
            CHECK(curve[i - 1] == brute_force_expected_joint(matrix, i));
        }
    }
}

TEST_CASE("curve endpoints are the average and joint accuracies") {
    std::mt19937 rng(99);
    for (int round = 0; round < 10; ++round) {
        auto matrix = random_matrix(rng, 15, 8, 0.6);
        auto curve = expected_joint_curve_exact(matrix);
        CHECK(curve.front() == average_accuracy_exact(matrix));
        CHECK(curve.back() == joint_accuracy_exact(matrix));
    }
}

TEST_CASE("the curve never increases and joint never beats average") {
    std::mt19937 rng(7);
    for (int round = 0; round < 25; ++round) {
        auto matrix = random_matrix(rng, 12, 8, 0.1 + 0.03 * round);
        auto curve = expected_joint_curve_exact(matrix);
        for (size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] <= curve[i - 1]);
        CHECK(joint_accuracy_exact(matrix) <= average_accuracy_exact(matrix));
    }
}

TEST_CASE("metrics are invariant under column permutation") {
    std::mt19937 rng(41);
    auto matrix = random_matrix(rng, 10, 8, 0.5);

    auto shuffled = matrix;
    std::vector<size_t> perm = {5, 2, 7, 0, 3, 6, 1, 4};
    for (size_t i = 0; i < matrix.rows.size(); ++i)
        for (size_t c = 0; c < 8; ++c) shuffled.rows[i].cells[c] = matrix.rows[i].cells[perm[c]];

    CHECK(average_accuracy_exact(shuffled) == average_accuracy_exact(matrix));
    CHECK(joint_accuracy_exact(shuffled) == joint_accuracy_exact(matrix));
    auto a = expected_joint_curve_exact(shuffled);
    auto b = expected_joint_curve_exact(matrix);
    CHECK(a == b);
}

TEST_CASE("gain is percentage points above coin flipping") {
    CHECK(gain_vs_random(0.817) == doctest::Approx(31.7));
    CHECK(gain_vs_random(0.5) == doctest::Approx(0.0));
    CHECK(gain_vs_random(0.469) == doctest::Approx(-3.1));
    CHECK(gain_vs_random(1.0) == doctest::Approx(50.0));
}

TEST_CASE("relation breakdown partitions the rows") {
    std::mt19937 rng(123);
    auto matrix = random_matrix(rng, 14, 8, 0.7);
    auto breakdown = per_relation_breakdown(matrix);
    REQUIRE(breakdown.size() == 2);

    size_t rows = 0;
    double weighted = 0.0;
    for (const auto& [relation, rm] : breakdown) {
        rows += rm.rows;
        weighted += rm.a_avg * static_cast<double>(rm.rows);
    }
    CHECK(rows == matrix.rows.size());
    CHECK(weighted / static_cast<double>(matrix.rows.size()) ==
          doctest::Approx(average_accuracy(matrix)).epsilon(1e-12));
}

TEST_CASE("column restriction keeps the requested order") {
    auto matrix = make_matrix({{1, 0, 1}, {0, 1, 1}});
    auto restricted = restrict_columns(matrix, {"c2", "c0"});
    const std::vector<std::string> expected_names = {"c2", "c0"};
    CHECK(restricted.key_subset == expected_names);
    const std::vector<int> row0 = {1, 1};
    const std::vector<int> row1 = {1, 0};
    CHECK(restricted.rows[0].cells == row0);
    CHECK(restricted.rows[1].cells == row1);
    CHECK(restricted.model_id == matrix.model_id);
    CHECK_THROWS_AS(restrict_columns(matrix, {"c9"}), Error);
}

TEST_CASE("reports round-trip through json") {
    auto matrix = make_matrix({{1, 1, 0, 1}, {0, 1, 1, 1}, {1, 1, 1, 1}});
    auto report = compute_report(matrix);
    CHECK(report.n == 3);
    CHECK(report.m == 4);
    CHECK(report.a_avg_exact == Fraction(10, 12));
    CHECK(report.a_joint_exact == Fraction(1, 3));
    CHECK(report.gain_points == doctest::Approx(100.0 * 10.0 / 12.0 - 50.0));

    TempDir tmp;
    write_report_json(tmp.file("report.json"), report, "cafe0123");
    auto loaded = load_report_json(tmp.file("report.json"));
    CHECK(loaded.model_id == report.model_id);
    CHECK(loaded.generator == report.generator);
    CHECK(loaded.key_subset == report.key_subset);
    CHECK(loaded.n == report.n);
    CHECK(loaded.m == report.m);
    CHECK(loaded.a_avg_exact == report.a_avg_exact);
    CHECK(loaded.a_joint_exact == report.a_joint_exact);
    CHECK(loaded.expected_joint_exact == report.expected_joint_exact);
    CHECK(loaded.gain_points == doctest::Approx(report.gain_points));
    CHECK(loaded.per_relation.size() == report.per_relation.size());
    for (const auto& [relation, rm] : report.per_relation) {
        REQUIRE(loaded.per_relation.count(relation) == 1);
        CHECK(loaded.per_relation[relation].rows == rm.rows);
        CHECK(loaded.per_relation[relation].a_avg == doctest::Approx(rm.a_avg));
    }

    auto text = render_report_text(report);
    CHECK(text.find("average accuracy:  0.8333") != std::string::npos);
    CHECK(text.find("joint accuracy:    0.3333") != std::string::npos);
    CHECK(text.find("gain vs random:    +33.3 points") != std::string::npos);
    CHECK(text.find("relation one") != std::string::npos);
    CHECK(text.find("test-model") != std::string::npos);
}

TEST_CASE("krow csv lists per-point correct counts") {
    auto matrix = make_matrix({{1, 1, 0, 1}, {0, 0, 0, 0}});
    TempDir tmp;
    write_krow_csv(tmp.file("krow.csv"), matrix);
    auto text = testsup::read_text(tmp.file("krow.csv"));
    CHECK(text == "triplet_id,relation,correct,columns\n"
                  "t0,relation one,3,4\n"
                  "t1,relation two,0,4\n");
}
