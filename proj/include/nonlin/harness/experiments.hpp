#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "nonlin/harness/config.hpp"
#include "nonlin/harness/rate_report.hpp"
#include "nonlin/scheme.hpp"
#include "nonlin/solver.hpp"
#include "nonlin/viscosity.hpp"

namespace nonlin::harness {

/// Thrown when a postcondition of an experiment fails (CLI exit code 1).
class AssertionFailure : public Error {
  public:
    using Error::Error;
};

/// Assembly plus the (F_h1)/(F_h2) re-validation every experiment performs.
struct ValidatedOperator {
    MeshPtr mesh;
    DiscreteOperator op;
    MonotonicityReport monotonicity;
    std::vector<ConsistencyReport> consistency;
};

/// Throws AssertionFailure when monotonicity or consistency fails.
ValidatedOperator build_validated(const Nonlinearity& F, const ScalarField& f, const Domain& domain, double h,
                                  int width, std::uint64_t seed, int trials = 2000,
                                  const std::optional<ScalarField>& exact = std::nullopt);

/// Solve that throws AssertionFailure on non-convergence.
SolveResult solve_checked(const DiscreteOperator& op, const ScalarField& g, const SolveOptions& opts);

/// sup over mesh points of |u_exact - v_h| for each h.
RateReport run_rates(const Problem& p, const std::vector<double>& h_list);

struct DeltaOptions {
    double h = 1.0 / 32.0;
    bool verify = true;
    std::size_t samples = 4000;
    bool corrupt_spike = false; // test hook: push one interior value down by 1 before verification
};

/// δ-solutions v_h^{θ,-} built from the discrete solution; error sup|u - v_δ|
/// against δ = √θ. Verified rows with violations are excluded from the fit.
RateReport run_delta(const Problem& p, const std::vector<double>& theta_list, const DeltaOptions& opts);

struct ConvolutionDeltaResult {
    DeltaReport super;  // v_h^{θ,-} against F_ν - f^ν
    DeltaReport sub;    // v_h^{θ,+} against F^ν - f_ν
    double nu = 0.0;
    double delta = 0.0;
    double slack = 0.0;
};

/// Direct check that the inf/sup-convolutions of the discrete solution are
/// δ-super/subsolutions of the ν-perturbed problem, δ = Nh.
ConvolutionDeltaResult verify_convolution_delta(const Problem& p, double h, double theta, std::size_t samples, std::uint64_t seed,
                           bool corrupt_spike = false);

/// Frozen-coefficient problems on B_r(x0) with boundary data from the full solution.
RateReport run_freeze(const Problem& p, const Point& x0, const std::vector<double>& r_list, double h);

/// u_ε from F_ε(D²u_ε) = f^ε; error sup|u - u_ε|. Asserts u_ε ≤ u + 1e-8.
RateReport run_perturb(const Problem& p, const std::vector<double>& eps_list, double h);

struct BarrierReport {
    double c = 0.0;
    double bound = 0.0;     // c diam² / (2λ)
    double max_gap = 0.0;   // max (u - ū)
    double min_gap = 0.0;   // min (u - ū)
    bool passed = false;
    nlohmann::json to_json() const;
};

/// ū solves F = f + c; asserts ū ≤ u ≤ ū + c diam²/(2λ) + tol pointwise.
BarrierReport run_barrier(const Problem& p, double c, double h, double tol = 1e-8);

struct CheckReport {
    MonotonicityReport monotonicity;
    std::vector<std::pair<std::string, ConsistencyReport>> consistency;
    EllipticityReport ellipticity;
    double polynomial_discrepancy = 0.0; // worst over quadratic/cubic test functions
    bool passed = false;
    nlohmann::json to_json() const;
};

/// monotonicity_check + consistency_check + check_ellipticity on the assembled operator.
CheckReport run_check(const Problem& p, double h, int trials);

} // namespace nonlin::harness
