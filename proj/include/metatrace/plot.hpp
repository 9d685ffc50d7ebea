#pragma once

#include "metatrace/harness.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace metatrace {

struct SummaryRow {
    std::string env;
    std::string method;
    double alpha = 0.0;
    double beta = 0.0;
    std::optional<double> lambda;
    std::optional<double> kappa;
    std::optional<double> eta;
    int n_runs = 0;
    double mean_final = 0.0;
    double std_final = 0.0;
    int n_diverged = 0;

    /// Series label: method plus its lambda or kappa.
    std::string series() const;
};

/// Parse errors are std::runtime_error naming the offending line.
std::vector<SummaryRow> read_summary_csv(std::istream& in);
std::vector<MetricsRecord> read_runs_csv(std::istream& in);

/// Final performance against log10(alpha), one line per series with a +-1 std
/// band. Cells with any divergent run are drawn at the top edge with a cross.
std::string ucurve_svg(const std::vector<SummaryRow>& rows, const std::string& title);

struct LearningSeries {
    std::string label;
    std::vector<MetricsRecord> records;
};

/// Mean +-1 std of one metric over equal-width step bins.
std::string learning_svg(const std::vector<LearningSeries>& series, Metric metric, int bins,
                         const std::string& title);

}  // namespace metatrace
