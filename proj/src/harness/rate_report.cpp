#include "nonlin/harness/rate_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nonlin::harness {

namespace {

constexpr double kZeroError = 1e-9;

// Shortest round-trip representation, so CSV output is bit-faithful.
std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (f.intercept + f.slope * x[i]);
        sse += r * r;
    }
    f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return f;
}

void RateReport::fit() {
    std::stable_sort(rows.begin(), rows.end(), [](const RateRow& a, const RateRow& b) { return a.parameter > b.parameter; });
    slope.reset();
    intercept.reset();
    r2.reset();
    reliable = false;
    std::vector<double> x, y;
    for (const auto& r : rows) {
        if (r.excluded || !(r.error > kZeroError) || !(r.parameter > 0.0)) continue;
        x.push_back(std::log(r.parameter));
        y.push_back(std::log(r.error));
    }
    if (x.size() < 3) return;
    LineFit f = least_squares(x, y);
    slope = f.slope;
    intercept = f.intercept;
    r2 = f.r2;
    reliable = f.r2 >= 0.95;
}

bool RateReport::errors_decreasing() const {
    // Rows are ordered by decreasing parameter, so errors must decrease strictly along them.
    const RateRow* prev = nullptr;
    for (const auto& r : rows) {
        if (r.excluded) continue;
        if (prev && !(r.error < prev->error)) return false;
        prev = &r;
    }
    return true;
}

void RateReport::write_csv(std::ostream& os) const {
    os << parameter << ",error,runtime_s\n";
    for (const auto& r : rows) os << fmt(r.parameter) << ',' << fmt(r.error) << ',' << fmt(r.runtime_s) << '\n';
}

nlohmann::json RateReport::to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["parameter"] = parameter;
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row{{parameter, r.parameter}, {"error", r.error}, {"runtime_s", r.runtime_s}, {"excluded", r.excluded}};
        if (!r.note.empty()) row["note"] = r.note;
        rs.push_back(row);
    }
    j["rows"] = rs;
    j["slope"] = slope ? nlohmann::json(*slope) : nlohmann::json(nullptr);
    j["intercept"] = intercept ? nlohmann::json(*intercept) : nlohmann::json(nullptr);
    j["r2"] = r2 ? nlohmann::json(*r2) : nlohmann::json(nullptr);
    j["reliable"] = reliable;
    j["errors_decreasing"] = errors_decreasing();
    j["passed"] = passed;
    if (!extra.empty()) j["details"] = extra;
    return j;
}

} // namespace nonlin::harness
