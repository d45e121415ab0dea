#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "nonlin/fields.hpp"
#include "nonlin/mesh.hpp"
#include "nonlin/operators.hpp"
#include "nonlin/solver.hpp"

namespace nonlin::harness {

/// Parsed problem: F(D²u, x) = f in U, u = g on ∂U, discretized with stencil width N.
struct Problem {
    std::string name;
    Domain domain = Domain::box({0.0}, {1.0});
    Nonlinearity F = Nonlinearity::pucci(1.0, 1.0, 1);
    ScalarField f;
    ScalarField g;
    std::optional<ScalarField> exact;
    int width = 2;
    SolveOptions solver;
    std::uint64_t seed = 0;
    double h = 1.0 / 32.0;
    nlohmann::json experiments = nlohmann::json::object();
};

/// Throws ConfigError naming the offending field (or line for JSON syntax errors).
Problem parse_problem(const std::string& text);
Problem load_problem(const std::string& path);

/// Field spec: number, preset name, catalog object, or array (sum).
ScalarField parse_field(const nlohmann::json& spec, int dim, const std::string& where);

} // namespace nonlin::harness
