#pragma once

#include "pretex/harness.hpp"
#include "pretex/util.hpp"

#include <map>
#include <string>
#include <vector>

namespace pretex {

// Everything here is exact rational arithmetic first, decimals second;
// reports must not depend on summation order or platform rounding.

Fraction average_accuracy_exact(const ScoreMatrix& matrix);
Fraction joint_accuracy_exact(const ScoreMatrix& matrix);

double average_accuracy(const ScoreMatrix& matrix);
double joint_accuracy(const ScoreMatrix& matrix);

// Value at index i-1 (i = 1..m): the expected joint accuracy had only i of
// the m variants been drawn, averaged over all C(m,i) choices. Closed form
// per row: C(k,i)/C(m,i) with k = correct cells in the row.
std::vector<Fraction> expected_joint_curve_exact(const ScoreMatrix& matrix);
std::vector<double> expected_joint_curve(const ScoreMatrix& matrix);

// Percentage points above a 50% random-guess baseline.
double gain_vs_random(double a_avg);

struct RelationMetrics {
    double a_avg = 0.0;
    double a_joint = 0.0;
    size_t rows = 0;
};

std::map<std::string, RelationMetrics> per_relation_breakdown(const ScoreMatrix& matrix);

// Same matrix restricted to the named columns, preserving column order as
// given. Unknown names are an error.
ScoreMatrix restrict_columns(const ScoreMatrix& matrix, const std::vector<std::string>& columns);

struct MetricsReport {
    std::string model_id;
    std::string generator;
    std::vector<std::string> key_subset;
    size_t n = 0;
    size_t m = 0;
    int shots = 0;
    uint64_t demo_seed = 0;
    Fraction a_avg_exact;
    Fraction a_joint_exact;
    std::vector<Fraction> expected_joint_exact;
    double a_avg = 0.0;
    double a_joint = 0.0;
    std::vector<double> expected_joint;
    double gain_points = 0.0;
    std::map<std::string, RelationMetrics> per_relation;
};

MetricsReport compute_report(const ScoreMatrix& matrix);

void write_report_json(const std::string& path, const MetricsReport& report,
                       const std::string& config_hash = "");
MetricsReport load_report_json(const std::string& path);

// Human-readable summary table.
std::string render_report_text(const MetricsReport& report);

// Per-knowledge-point correct counts for external curve plotting.
void write_krow_csv(const std::string& path, const ScoreMatrix& matrix);

}  // namespace pretex
