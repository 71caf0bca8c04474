#include "pretex/metrics.hpp"

#include "pretex/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>

namespace pretex {

using nlohmann::json;

namespace {

void require_populated(const ScoreMatrix& matrix) {
    if (matrix.rows.empty()) throw Error("score matrix has no rows");
    size_t m = matrix.columns();
    if (m == 0) throw Error("score matrix has no columns");
    for (const auto& row : matrix.rows) {
        if (row.cells.size() != m)
            throw Error("row " + row.triplet_id + " has " + std::to_string(row.cells.size()) +
                        " cells, expected " + std::to_string(m));
        for (int cell : row.cells) {
            if (cell != 0 && cell != 1)
                throw Error("row " + row.triplet_id + " holds a non-binary cell");
        }
    }
}

size_t correct_in_row(const ScoreRow& row) {
    size_t k = 0;
    for (int cell : row.cells) k += cell;
    return k;
}

}  // namespace

Fraction average_accuracy_exact(const ScoreMatrix& matrix) {
    require_populated(matrix);
    long long correct = 0;
    for (const auto& row : matrix.rows) correct += static_cast<long long>(correct_in_row(row));
    long long total = static_cast<long long>(matrix.rows.size() * matrix.columns());
    return Fraction(correct, total);
}

Fraction joint_accuracy_exact(const ScoreMatrix& matrix) {
    require_populated(matrix);
    long long mastered = 0;
    for (const auto& row : matrix.rows) {
        if (correct_in_row(row) == matrix.columns()) ++mastered;
    }
    return Fraction(mastered, static_cast<long long>(matrix.rows.size()));
}

double average_accuracy(const ScoreMatrix& matrix) {
    return average_accuracy_exact(matrix).value();
}

double joint_accuracy(const ScoreMatrix& matrix) {
    return joint_accuracy_exact(matrix).value();
}

std::vector<Fraction> expected_joint_curve_exact(const ScoreMatrix& matrix) {
    require_populated(matrix);
    size_t m = matrix.columns();
    size_t n = matrix.rows.size();
    std::vector<Fraction> curve;
    curve.reserve(m);
    for (size_t i = 1; i <= m; ++i) {
        long long numerator = 0;
        for (const auto& row : matrix.rows) {
            size_t k = correct_in_row(row);
            if (k >= i) numerator += static_cast<long long>(binomial(k, i));
        }
        long long denominator = static_cast<long long>(n) * static_cast<long long>(binomial(m, i));
        curve.emplace_back(numerator, denominator);
    }
    return curve;
}

std::vector<double> expected_joint_curve(const ScoreMatrix& matrix) {
    auto exact = expected_joint_curve_exact(matrix);
    std::vector<double> out;
    out.reserve(exact.size());
    for (const auto& f : exact) out.push_back(f.value());
    return out;
}

double gain_vs_random(double a_avg) {
    return 100.0 * a_avg - 50.0;
}

std::map<std::string, RelationMetrics> per_relation_breakdown(const ScoreMatrix& matrix) {
    require_populated(matrix);
    std::map<std::string, ScoreMatrix> slices;
    for (const auto& row : matrix.rows) {
        auto& slice = slices[row.relation];
        if (slice.rows.empty()) slice.key_subset = matrix.key_subset;
        slice.rows.push_back(row);
    }
    std::map<std::string, RelationMetrics> out;
    for (const auto& [relation, slice] : slices) {
        RelationMetrics rm;
        rm.a_avg = average_accuracy(slice);
        rm.a_joint = joint_accuracy(slice);
        rm.rows = slice.rows.size();
        out.emplace(relation, rm);
    }
    return out;
}

ScoreMatrix restrict_columns(const ScoreMatrix& matrix, const std::vector<std::string>& columns) {
    std::vector<size_t> picks;
    picks.reserve(columns.size());
    for (const auto& name : columns) {
        auto it = std::find(matrix.key_subset.begin(), matrix.key_subset.end(), name);
        if (it == matrix.key_subset.end())
            throw Error("score matrix has no column named " + name);
        picks.push_back(static_cast<size_t>(it - matrix.key_subset.begin()));
    }
    ScoreMatrix out;
    out.model_id = matrix.model_id;
    out.generator = matrix.generator;
    out.key_subset = columns;
    out.shots = matrix.shots;
    out.demo_seed = matrix.demo_seed;
    out.rows.reserve(matrix.rows.size());
    for (const auto& row : matrix.rows) {
        ScoreRow slim;
        slim.triplet_id = row.triplet_id;
        slim.relation = row.relation;
        slim.cells.reserve(picks.size());
        for (size_t p : picks) slim.cells.push_back(row.cells.at(p));
        out.rows.push_back(std::move(slim));
    }
    return out;
}

MetricsReport compute_report(const ScoreMatrix& matrix) {
    MetricsReport report;
    report.model_id = matrix.model_id;
    report.generator = matrix.generator;
    report.key_subset = matrix.key_subset;
    report.n = matrix.rows.size();
    report.m = matrix.columns();
    report.shots = matrix.shots;
    report.demo_seed = matrix.demo_seed;
    report.a_avg_exact = average_accuracy_exact(matrix);
    report.a_joint_exact = joint_accuracy_exact(matrix);
    report.expected_joint_exact = expected_joint_curve_exact(matrix);
    report.a_avg = report.a_avg_exact.value();
    report.a_joint = report.a_joint_exact.value();
    for (const auto& f : report.expected_joint_exact) report.expected_joint.push_back(f.value());
    report.gain_points = gain_vs_random(report.a_avg);
    report.per_relation = per_relation_breakdown(matrix);
    return report;
}

namespace {

std::string fraction_string(const Fraction& f) {
    return std::to_string(f.num) + "/" + std::to_string(f.den);
}

Fraction parse_fraction(const std::string& s) {
    auto parts = split(s, '/');
    if (parts.size() != 2) throw Error("malformed fraction: " + s);
    return Fraction(std::stoll(parts[0]), std::stoll(parts[1]));
}

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
    return buf;
}

std::string signed_fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%+.*f", digits, value);
    return buf;
}

}  // namespace

void write_report_json(const std::string& path, const MetricsReport& report,
                       const std::string& config_hash) {
    json doc;
    doc["format"] = "pretexeval.report.v1";
    if (!config_hash.empty()) doc["config_hash"] = config_hash;
    doc["model"] = report.model_id;
    doc["generator"] = report.generator;
    doc["key_subset"] = report.key_subset;
    doc["n"] = report.n;
    doc["m"] = report.m;
    doc["shots"] = report.shots;
    doc["demo_seed"] = report.demo_seed;
    doc["a_avg"] = report.a_avg;
    doc["a_avg_fraction"] = fraction_string(report.a_avg_exact);
    doc["a_joint"] = report.a_joint;
    doc["a_joint_fraction"] = fraction_string(report.a_joint_exact);
    doc["expected_joint"] = report.expected_joint;
    auto& fractions = doc["expected_joint_fractions"] = json::array();
    for (const auto& f : report.expected_joint_exact) fractions.push_back(fraction_string(f));
    doc["gain_points"] = report.gain_points;
    auto& per_relation = doc["per_relation"] = json::object();
    for (const auto& [relation, rm] : report.per_relation) {
        per_relation[relation] = {{"a_avg", rm.a_avg}, {"a_joint", rm.a_joint}, {"rows", rm.rows}};
    }
    write_file(path, doc.dump(2) + "\n");
}

MetricsReport load_report_json(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path, 0, e.what());
    }
    if (doc.value("format", "") != "pretexeval.report.v1")
        throw ParseError(path, 0, "not a metrics report file");
    MetricsReport report;
    try {
        report.model_id = doc.at("model").get<std::string>();
        report.generator = doc.at("generator").get<std::string>();
        report.key_subset = doc.at("key_subset").get<std::vector<std::string>>();
        report.n = doc.at("n").get<size_t>();
        report.m = doc.at("m").get<size_t>();
        report.shots = doc.at("shots").get<int>();
        report.demo_seed = doc.at("demo_seed").get<uint64_t>();
        report.a_avg = doc.at("a_avg").get<double>();
        report.a_avg_exact = parse_fraction(doc.at("a_avg_fraction").get<std::string>());
        report.a_joint = doc.at("a_joint").get<double>();
        report.a_joint_exact = parse_fraction(doc.at("a_joint_fraction").get<std::string>());
        report.expected_joint = doc.at("expected_joint").get<std::vector<double>>();
        for (const auto& f : doc.at("expected_joint_fractions"))
            report.expected_joint_exact.push_back(parse_fraction(f.get<std::string>()));
        report.gain_points = doc.at("gain_points").get<double>();
        for (const auto& [relation, rm] : doc.at("per_relation").items()) {
            RelationMetrics metrics;
            metrics.a_avg = rm.at("a_avg").get<double>();
            metrics.a_joint = rm.at("a_joint").get<double>();
            metrics.rows = rm.at("rows").get<size_t>();
            report.per_relation.emplace(relation, metrics);
        }
    } catch (const json::exception& e) {
        throw ParseError(path, 0, e.what());
    }
    return report;
}

std::string render_report_text(const MetricsReport& report) {
    std::string out;
    out += "model:      " + report.model_id + "\n";
    out += "generator:  " + report.generator + "\n";
    out += "columns:   ";
    for (const auto& name : report.key_subset) out += " " + name;
    out += "\n";
    out += "points:     " + std::to_string(report.n) + "\n";
    out += "samples:    " + std::to_string(report.n * report.m) + "\n";
    out += "shots:      " + std::to_string(report.shots) + "\n";
    out += "\n";
    out += "average accuracy:  " + fixed(report.a_avg, 4) + "\n";
    out += "joint accuracy:    " + fixed(report.a_joint, 4) + "\n";
    out += "gain vs random:    " + signed_fixed(report.gain_points, 1) + " points\n";
    out += "\n";
    out += "expected joint accuracy by variant count\n";
    out += "  i";
    for (size_t i = 1; i <= report.m; ++i) out += "       " + std::to_string(i);
    out += "\n";
    out += "   ";
    for (double v : report.expected_joint) out += "  " + fixed(v, 4);
    out += "\n";
    out += "\n";
    out += "relation breakdown\n";
    size_t width = 8;
    for (const auto& [relation, rm] : report.per_relation) width = std::max(width, relation.size());
    out += "  relation" + std::string(width - 8, ' ') + "  points  a_avg   a_joint\n";
    for (const auto& [relation, rm] : report.per_relation) {
        out += "  " + relation + std::string(width - relation.size(), ' ');
        std::string points = std::to_string(rm.rows);
        out += "  " + points + std::string(points.size() < 6 ? 6 - points.size() : 0, ' ');
        out += "  " + fixed(rm.a_avg, 4);
        out += "  " + fixed(rm.a_joint, 4);
        out += "\n";
    }
    return out;
}

void write_krow_csv(const std::string& path, const ScoreMatrix& matrix) {
    require_populated(matrix);
    std::string out = "triplet_id,relation,correct,columns\n";
    for (const auto& row : matrix.rows) {
        out += row.triplet_id + "," + row.relation + "," + std::to_string(correct_in_row(row)) +
               "," + std::to_string(matrix.columns()) + "\n";
    }
    write_file(path, out);
}

}  // namespace pretex
