#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace nonlin::harness {

struct RateRow {
    double parameter = 0.0;
    double error = 0.0;
    double runtime_s = 0.0;
    bool excluded = false; // left out of the fit (e.g. failed verification)
    std::string note;
};

/// (parameter, error) rows with a least-squares fit of log error on log parameter.
struct RateReport {
    std::string experiment;
    std::string parameter = "h";
    std::vector<RateRow> rows;
    std::optional<double> slope;
    std::optional<double> intercept;
    std::optional<double> r2;
    bool reliable = false; // slope defined and R² ≥ 0.95
    bool passed = true;    // experiment postconditions
    nlohmann::json extra = nlohmann::json::object();

    /// Sorts rows by decreasing parameter and fits over non-excluded rows with
    /// error > 1e-9; the slope needs at least 3 such rows.
    void fit();
    bool errors_decreasing() const;

    void write_csv(std::ostream& os) const;
    nlohmann::json to_json() const;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

} // namespace nonlin::harness
