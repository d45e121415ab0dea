#include "nonlin/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace nonlin::harness {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw ConfigError("config field '" + where + "': " + msg);
}

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) fail(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where.empty() ? key : where + "." + key, "missing");
    return *it;
}

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : number(*it, join(where, key));
}

Point vector_of(const json& j, const std::string& where, int dim = -1) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    Point out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    if (dim >= 0 && static_cast<int>(out.size()) != dim)
        fail(where, "expected " + std::to_string(dim) + " entries, got " + std::to_string(out.size()));
    return out;
}

SymMat matrix_of(const json& j, const std::string& where, int dim) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim) fail(where, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < dim; ++i) rows.push_back(vector_of(j[i], where + "[" + std::to_string(i) + "]", dim));
    try {
        return SymMat::from_rows(rows);
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
}

Domain parse_domain(const json& j) {
    const std::string where = "domain";
    if (!j.is_object()) fail(where, "expected an object");
    const std::string kind = require(j, "kind", where).is_string() ? j["kind"].get<std::string>() : "";
    try {
        if (kind == "box") {
            allow_keys(j, where, {"kind", "lo", "hi"});
            return Domain::box(vector_of(require(j, "lo", where), "domain.lo"), vector_of(require(j, "hi", where), "domain.hi"));
        }
        if (kind == "ball") {
            allow_keys(j, where, {"kind", "center", "radius"});
            return Domain::ball(vector_of(require(j, "center", where), "domain.center"),
                                number(require(j, "radius", where), "domain.radius"));
        }
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    fail("domain.kind", "expected \"box\" or \"ball\"");
}

CoeffField parse_coeff(const json& j, int dim, const std::string& where) {
    if (j.is_string()) {
        if (j.get<std::string>() == "identity") return CoeffField::constant(SymMat::identity(dim));
        fail(where, "unknown coefficient preset '" + j.get<std::string>() + "'");
    }
    if (!j.is_array() || j.empty()) fail(where, "expected \"identity\", a matrix, or a list of {weight, matrix} terms");
    if (j.front().is_array()) return CoeffField::constant(matrix_of(j, where, dim));
    std::vector<CoeffField::Term> terms;
    for (std::size_t t = 0; t < j.size(); ++t) {
        std::string w = where + "[" + std::to_string(t) + "]";
        if (!j[t].is_object()) fail(w, "expected {weight, matrix}");
        allow_keys(j[t], w, {"weight", "matrix"});
        auto it = j[t].find("weight");
        ScalarField weight = it == j[t].end() ? ScalarField::constant(1.0) : parse_field(*it, dim, w + ".weight");
        terms.push_back({weight, matrix_of(require(j[t], "matrix", w), w + ".matrix", dim)});
    }
    return CoeffField(std::move(terms));
}

Nonlinearity parse_operator(const json& j, int dim) {
    const std::string where = "operator";
    if (!j.is_object()) fail(where, "expected an object");
    const json& kind_j = require(j, "kind", where);
    if (!kind_j.is_string()) fail("operator.kind", "expected a string");
    const std::string kind = kind_j.get<std::string>();
    try {
        if (kind == "linear") {
            allow_keys(j, where, {"kind", "coeff", "lambda", "Lambda"});
            const json& c = require(j, "coeff", where);
            bool identity = c.is_string() && c.get<std::string>() == "identity";
            if (!identity && (!j.contains("lambda") || !j.contains("Lambda")))
                fail(where, "lambda and Lambda are required for non-identity coefficients");
            return Nonlinearity::linear(parse_coeff(c, dim, "operator.coeff"), number_or(j, "lambda", 1.0, where),
                                        number_or(j, "Lambda", 1.0, where));
        }
        if (kind == "pucci") {
            allow_keys(j, where, {"kind", "lambda", "Lambda", "sign"});
            const json& s = require(j, "sign", where);
            if (!s.is_number_integer() || (s.get<int>() != 1 && s.get<int>() != -1)) fail("operator.sign", "expected 1 or -1");
            return Nonlinearity::pucci(number(require(j, "lambda", where), "operator.lambda"),
                                       number(require(j, "Lambda", where), "operator.Lambda"), s.get<int>());
        }
        if (kind == "isaacs") {
            allow_keys(j, where, {"kind", "coeff", "running", "lambda", "Lambda"});
            const json& c = require(j, "coeff", where);
            if (!c.is_array() || c.empty()) fail("operator.coeff", "expected a nonempty [alpha][beta] array");
            std::vector<std::vector<CoeffField>> a;
            for (std::size_t i = 0; i < c.size(); ++i) {
                std::string wi = "operator.coeff[" + std::to_string(i) + "]";
                if (!c[i].is_array() || c[i].empty()) fail(wi, "expected a nonempty array of coefficients");
                std::vector<CoeffField> row;
                for (std::size_t k = 0; k < c[i].size(); ++k)
                    row.push_back(parse_coeff(c[i][k], dim, wi + "[" + std::to_string(k) + "]"));
                a.push_back(std::move(row));
            }
            std::vector<std::vector<ScalarField>> running;
            if (auto it = j.find("running"); it != j.end()) {
                if (!it->is_array() || it->size() != a.size()) fail("operator.running", "shape must match operator.coeff");
                for (std::size_t i = 0; i < a.size(); ++i) {
                    std::string wi = "operator.running[" + std::to_string(i) + "]";
                    const json& row = (*it)[i];
                    if (!row.is_array() || row.size() != a[i].size()) fail(wi, "shape must match operator.coeff");
                    std::vector<ScalarField> r;
                    for (std::size_t k = 0; k < row.size(); ++k) r.push_back(parse_field(row[k], dim, wi + "[" + std::to_string(k) + "]"));
                    running.push_back(std::move(r));
                }
            }
            return Nonlinearity::isaacs(std::move(a), std::move(running), number(require(j, "lambda", where), "operator.lambda"),
                                        number(require(j, "Lambda", where), "operator.Lambda"));
        }
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    fail("operator.kind", "expected \"linear\", \"pucci\" or \"isaacs\"");
}

SolveOptions parse_solver(const json& j) {
    SolveOptions o;
    if (!j.is_object()) fail("solver", "expected an object");
    allow_keys(j, "solver", {"method", "tol", "max_iter"});
    if (auto it = j.find("method"); it != j.end()) {
        std::string m = it->is_string() ? it->get<std::string>() : "";
        if (m == "policy") o.method = SolveMethod::policy;
        else if (m == "relax") o.method = SolveMethod::relax;
        else fail("solver.method", "expected \"policy\" or \"relax\"");
    }
    o.tol = number_or(j, "tol", o.tol, "solver");
    if (!(o.tol > 0.0)) fail("solver.tol", "must be positive");
    if (auto it = j.find("max_iter"); it != j.end()) {
        if (!it->is_number_integer() || it->get<int>() < 1) fail("solver.max_iter", "expected a positive integer");
        o.max_iter = it->get<int>();
    }
    return o;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

} // namespace

ScalarField parse_field(const json& spec, int dim, const std::string& where) {
    if (spec.is_number()) return ScalarField::constant(spec.get<double>());
    if (spec.is_string()) {
        const std::string s = spec.get<std::string>();
        if (s == "zero") return ScalarField::constant(0.0);
        if (s == "sin_pi") return ScalarField::sin_product(1.0, std::numbers::pi, dim);
        if (s == "half_norm_sq") return ScalarField::quadratic(0.0, Point(dim, 0.0), SymMat::identity(dim));
        fail(where, "unknown field preset '" + s + "'");
    }
    if (spec.is_array()) {
        if (spec.empty()) fail(where, "empty sum");
        ScalarField acc = parse_field(spec[0], dim, where + "[0]");
        for (std::size_t i = 1; i < spec.size(); ++i) acc = acc + parse_field(spec[i], dim, where + "[" + std::to_string(i) + "]");
        return acc;
    }
    if (!spec.is_object()) fail(where, "expected a number, preset name, object or array");
    const json& kj = require(spec, "kind", where);
    if (!kj.is_string()) fail(where + ".kind", "expected a string");
    const std::string kind = kj.get<std::string>();
    try {
        if (kind == "constant") {
            allow_keys(spec, where, {"kind", "value"});
            return ScalarField::constant(number(require(spec, "value", where), where + ".value"));
        }
        if (kind == "affine") {
            allow_keys(spec, where, {"kind", "c", "b"});
            return ScalarField::affine(number_or(spec, "c", 0.0, where), vector_of(require(spec, "b", where), where + ".b", dim));
        }
        if (kind == "quadratic") {
            allow_keys(spec, where, {"kind", "c", "b", "M"});
            Point b = spec.contains("b") ? vector_of(spec["b"], where + ".b", dim) : Point(dim, 0.0);
            return ScalarField::quadratic(number_or(spec, "c", 0.0, where), std::move(b),
                                          matrix_of(require(spec, "M", where), where + ".M", dim));
        }
        if (kind == "cubic_axis") {
            allow_keys(spec, where, {"kind", "a", "axis", "shift"});
            const json& ax = require(spec, "axis", where);
            if (!ax.is_number_integer() || ax.get<int>() < 0 || ax.get<int>() >= dim) fail(where + ".axis", "expected an axis index below the dimension");
            return ScalarField::cubic_axis(number(require(spec, "a", where), where + ".a"), ax.get<int>(),
                                           number_or(spec, "shift", 0.0, where));
        }
        if (kind == "sin_product") {
            allow_keys(spec, where, {"kind", "amplitude", "frequency"});
            return ScalarField::sin_product(number_or(spec, "amplitude", 1.0, where),
                                            number_or(spec, "frequency", std::numbers::pi, where), dim);
        }
        if (kind == "exponential") {
            allow_keys(spec, where, {"kind", "amplitude", "b"});
            return ScalarField::exponential(number_or(spec, "amplitude", 1.0, where), vector_of(require(spec, "b", where), where + ".b", dim));
        }
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    fail(where + ".kind", "unknown field kind '" + kind + "'");
}

Problem parse_problem(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config syntax error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    allow_keys(j, "", {"name", "domain", "operator", "f", "g", "exact", "stencil_width", "solver", "seed", "h", "experiments"});

    Problem p;
    if (auto it = j.find("name"); it != j.end()) {
        if (!it->is_string()) fail("name", "expected a string");
        p.name = it->get<std::string>();
    }
    p.domain = parse_domain(require(j, "domain", ""));
    const int dim = p.domain.dim();
    p.F = parse_operator(require(j, "operator", ""), dim);
    if (auto it = j.find("exact"); it != j.end()) p.exact = parse_field(*it, dim, "exact");

    if (auto it = j.find("stencil_width"); it != j.end()) {
        if (!it->is_number_integer() || it->get<int>() < 1) fail("stencil_width", "expected a positive integer");
        p.width = it->get<int>();
    }
    if (auto it = j.find("solver"); it != j.end()) p.solver = parse_solver(*it);
    if (auto it = j.find("seed"); it != j.end()) {
        if (!it->is_number_unsigned()) fail("seed", "expected a nonnegative integer");
        p.seed = it->get<std::uint64_t>();
    }
    p.h = number_or(j, "h", p.h, "");
    if (!(p.h > 0.0)) fail("h", "must be positive");
    if (auto it = j.find("experiments"); it != j.end()) {
        if (!it->is_object()) fail("experiments", "expected an object");
        p.experiments = *it;
    }

    const json& fj = require(j, "f", "");
    const bool manufactured = fj.is_string() && fj.get<std::string>() == "manufactured";
    if (manufactured) {
        if (!p.exact) fail("f", "\"manufactured\" requires an exact solution");
        auto mp = manufactured_problem(*p.exact, p.F, p.domain);
        p.f = mp.f;
        p.g = mp.g;
    } else {
        p.f = parse_field(fj, dim, "f");
    }

    if (auto it = j.find("g"); it != j.end()) {
        if (it->is_string() && it->get<std::string>() == "exact") {
            if (!p.exact) fail("g", "\"exact\" requires an exact solution");
            p.g = *p.exact;
        } else {
            p.g = parse_field(*it, dim, "g");
        }
    } else if (!manufactured) {
        if (!p.exact) fail("g", "missing (and no exact solution to take boundary data from)");
        p.g = *p.exact;
    }
    return p;
}

Problem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str());
}

} // namespace nonlin::harness
