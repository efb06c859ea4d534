#include "hermite/experiment.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hermite/analysis.hpp"
#include "hermite/fespace.hpp"
#include "hermite/problems.hpp"
#include "hermite/solvers.hpp"

namespace hermite {

namespace {

using nlohmann::json;

bool is_hjb(const std::string& name)
{
    return name == "exp3" || name == "exp4";
}

// Built-in check failure; maps to exit status 3.
struct invariant_violation : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

NondivProblem linear_problem(const RunConfig& config)
{
    if (config.experiment == "exp1")
        return exp1();
    if (config.experiment == "exp2")
        return exp2();
    const CustomProblemConfig& c = *config.custom;
    return constant_coefficient_problem(c.domain, c.A, c.b, c.c, c.epsilon, c.lambda);
}

struct Level
{
    std::shared_ptr<const Mesh> mesh;
    std::string label;
};

std::vector<Level> build_levels(const RunConfig& config, const Box& domain)
{
    std::vector<Level> out;
    if (config.experiment == "exp4") {
        for (Mesh& m : graded_mesh_sequence(config.graded_levels, config.grading)) {
            out.push_back({ std::make_shared<const Mesh>(std::move(m)), {} });
            out.back().label = "graded level " + std::to_string(out.size() - 1);
        }
        return out;
    }
    const std::vector<int> ns = config.levels.empty() ? default_levels(config.experiment, config.degree) : config.levels;
    for (int n : ns)
        out.push_back({ std::make_shared<const Mesh>(uniform_rect_mesh(domain, n)), "n=" + std::to_string(n) });
    return out;
}

void check_solution(const HermiteSpace& space, const Eigen::VectorXd& u, const ErrorRow& row)
{
    if (!u.allFinite() || !std::isfinite(row.l2) || !std::isfinite(row.h1) || !std::isfinite(row.h2_broken))
        throw invariant_violation("non-finite solution or error");
    const MtTerms mt = mt_identity_terms(space, u);
    if (std::abs(mt.gap()) > 1e-8 * std::max(mt.hessian, 1e-300))
        throw invariant_violation("discrete Miranda-Talenti identity violated by the solution");
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os)
        throw std::runtime_error("cannot write " + path.string());
}

double number(const json& j, const char* key)
{
    if (!j.is_number())
        throw usage_error(std::string("config key '") + key + "' must be a number");
    return j.get<double>();
}

int integer(const json& j, const char* key)
{
    if (!j.is_number_integer())
        throw usage_error(std::string("config key '") + key + "' must be an integer");
    return j.get<int>();
}

CustomProblemConfig read_problem(const json& p)
{
    if (!p.is_object())
        throw usage_error("config key 'problem' must be an object");
    CustomProblemConfig c;
    for (const auto& [key, value] : p.items()) {
        if (key == "domain") {
            if (!value.is_array() || value.size() != 4)
                throw usage_error("problem.domain must be [xmin, xmax, ymin, ymax]");
            c.domain = { number(value[0], "domain"), number(value[1], "domain"), number(value[2], "domain"),
                         number(value[3], "domain") };
        } else if (key == "A") {
            if (!value.is_array() || value.size() != 2 || !value[0].is_array() || value[0].size() != 2 ||
                !value[1].is_array() || value[1].size() != 2)
                throw usage_error("problem.A must be a 2x2 array");
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    c.A(i, j) = number(value[i][j], "A");
        } else if (key == "b") {
            if (!value.is_array() || value.size() != 2)
                throw usage_error("problem.b must be [b1, b2]");
            c.b = { number(value[0], "b"), number(value[1], "b") };
        } else if (key == "c") {
            c.c = number(value, "c");
        } else if (key == "epsilon") {
            c.epsilon = number(value, "epsilon");
        } else if (key == "lambda") {
            c.lambda = number(value, "lambda");
        } else {
            throw usage_error("unknown problem key '" + key + "'");
        }
    }
    return c;
}

void validate_custom(const CustomProblemConfig& c)
{
    const Box& d = c.domain;
    if (!(d.xmax > d.xmin) || !(d.ymax > d.ymin))
        throw usage_error("problem.domain is empty");
    if (!c.A.allFinite() || !c.b.allFinite() || !std::isfinite(c.c))
        throw usage_error("problem coefficients must be finite");
    if (c.A(0, 1) != c.A(1, 0))
        throw usage_error("problem.A must be symmetric");
    if (!(c.A.trace() > 0.0) || !(c.A.determinant() > 0.0))
        throw usage_error("problem.A must be positive definite");
    if (!(c.epsilon > 0.0 && c.epsilon <= 1.0))
        throw usage_error("problem.epsilon must lie in (0, 1]");
    const bool lower = c.b.squaredNorm() > 0.0 || c.c != 0.0;
    if (lower && !(c.lambda > 0.0))
        throw usage_error("problem.lambda must be positive when b or c is nonzero");
    if (c.lambda < 0.0 || c.c < 0.0)
        throw usage_error("problem.lambda and problem.c must be nonnegative");

    double actual = 0.0;
    try {
        if (lower) {
            const Coefficients k{ c.A, c.b, c.c, 0.0 };
            actual = cordes_epsilon_hjb(std::span<const Coefficients>(&k, 1), c.lambda);
        } else {
            const Point p(0.0, 0.0);
            actual = cordes_epsilon_nondiv([&](const Point&) { return c.A; }, std::span<const Point>(&p, 1));
        }
    } catch (const std::exception& e) {
        throw usage_error(std::string("problem data violate the Cordes condition: ") + e.what());
    }
    if (c.epsilon > actual * (1.0 + 1e-12))
        throw usage_error("problem.epsilon exceeds the Cordes constant of the data (" + std::to_string(actual) + ")");
}

} // namespace

double default_tolerance(const std::string& experiment)
{
    return experiment == "exp4" ? 1e-6 : 1e-8;
}

std::vector<int> default_levels(const std::string& experiment, int degree)
{
    if (experiment == "exp1" || experiment == "exp2")
        return degree == 3 ? std::vector<int>{ 8, 16, 32, 64, 128 } : std::vector<int>{ 4, 8, 16, 32, 64 };
    if (experiment == "exp3")
        return { 2, 4, 8, 16 };
    return { 2, 4, 8, 16, 32 };
}

void validate(const RunConfig& config)
{
    const std::string& e = config.experiment;
    if (e != "exp1" && e != "exp2" && e != "exp3" && e != "exp4" && e != "custom")
        throw usage_error("unknown experiment '" + e + "' (expected exp1, exp2, exp3, exp4 or custom)");
    if (config.degree != 3 && config.degree != 4)
        throw usage_error("degree must be 3 or 4");
    for (int n : config.levels)
        if (n < 1)
            throw usage_error("mesh levels must be positive subdivision counts");
    if (e == "exp4") {
        if (config.graded_levels < 1)
            throw usage_error("graded_levels must be at least 1");
        if (!(config.grading > 0.0))
            throw usage_error("grading must be positive");
    }
    if (config.tol && !(*config.tol > 0.0))
        throw usage_error("tol must be positive");
    if (config.max_iter < 1)
        throw usage_error("max_iter must be at least 1");
    if (config.eps_tilde && !(*config.eps_tilde >= 0.0 && *config.eps_tilde <= 1.0))
        throw usage_error("eps_tilde must lie in [0, 1]");
    if (config.out.empty())
        throw usage_error("output directory must not be empty");
    if (e == "custom") {
        if (!config.custom)
            throw usage_error("custom experiment needs a 'problem' block");
        validate_custom(*config.custom);
    } else if (config.custom) {
        throw usage_error("a 'problem' block is only allowed with experiment 'custom'");
    }
}

RunConfig read_config(std::istream& is, RunConfig base)
{
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw usage_error(std::string("malformed config: ") + e.what());
    }
    if (!j.is_object())
        throw usage_error("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "experiment") {
            if (!value.is_string())
                throw usage_error("config key 'experiment' must be a string");
            base.experiment = value.get<std::string>();
        } else if (key == "degree") {
            base.degree = integer(value, "degree");
        } else if (key == "levels") {
            if (!value.is_array())
                throw usage_error("config key 'levels' must be an array");
            base.levels.clear();
            for (const json& n : value)
                base.levels.push_back(integer(n, "levels"));
        } else if (key == "graded_levels") {
            base.graded_levels = integer(value, "graded_levels");
        } else if (key == "grading") {
            base.grading = number(value, "grading");
        } else if (key == "tol") {
            base.tol = number(value, "tol");
        } else if (key == "max_iter") {
            base.max_iter = integer(value, "max_iter");
        } else if (key == "out") {
            if (!value.is_string())
                throw usage_error("config key 'out' must be a string");
            base.out = value.get<std::string>();
        } else if (key == "eps_tilde") {
            base.eps_tilde = number(value, "eps_tilde");
        } else if (key == "problem") {
            base.custom = read_problem(value);
        } else {
            throw usage_error("unknown config key '" + key + "'");
        }
    }
    return base;
}

int run_experiment(const RunConfig& config, std::ostream& log)
{
    try {
        validate(config);
    } catch (const usage_error& e) {
        log << "usage error: " << e.what() << '\n';
        return exit_usage;
    }
    std::error_code ec;
    std::filesystem::create_directories(config.out, ec);
    if (ec || !std::filesystem::is_directory(config.out)) {
        log << "usage error: cannot create output directory " << config.out << '\n';
        return exit_usage;
    }

    const bool hjb = is_hjb(config.experiment);
    HjbProblem hjb_problem;
    NondivProblem linear;
    if (config.experiment == "exp3")
        hjb_problem = exp3();
    else if (config.experiment == "exp4")
        hjb_problem = exp4();
    else
        linear = linear_problem(config);
    const Box domain = hjb ? hjb_problem.domain : linear.domain;
    const ScalarField& exact = hjb ? hjb_problem.exact : linear.exact;
    const double lambda = hjb ? hjb_problem.lambda : linear.lambda;
    const auto& kx = hjb ? hjb_problem.kink_x : linear.kink_x;
    const auto& ky = hjb ? hjb_problem.kink_y : linear.kink_y;

    ErrorReport report;
    report.graded = config.experiment == "exp4";
    std::ostringstream meshinfo;
    meshinfo << "level,triangles,vertices,ndof\n";
    int status = exit_success;

    const std::vector<Level> levels = build_levels(config, domain);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const Level& level = levels[i];
        const std::string where = "level " + std::to_string(i) + " (" + level.label + ")";
        try {
            if (!resolves_kinks(*level.mesh, kx, ky))
                throw invariant_violation("mesh does not resolve the coefficient discontinuities");
            const HermiteSpace space(level.mesh, config.degree);
            Eigen::VectorXd u;
            if (hjb) {
                NewtonOptions opts;
                opts.tol = config.tol.value_or(default_tolerance(config.experiment));
                opts.max_iter = config.max_iter;
                opts.eps_used = config.eps_tilde;
                const NewtonResult res =
                    semismooth_newton(space, hjb_problem, Eigen::VectorXd::Zero(space.num_dofs()), opts);
                std::ostringstream csv;
                write_newton_csv(csv, res.history);
                write_file(config.out / ("newton_" + std::to_string(i) + ".csv"), csv.str());
                if (!res.converged)
                    throw std::runtime_error("semismooth Newton did not converge in " +
                                                std::to_string(config.max_iter) + " iterations");
                u = res.u;
                log << where << ": Newton converged in " << res.history.steps.size() << " iterations\n";
            } else {
                u = solve_nondiv(space, linear, config.eps_tilde);
            }
            const ErrorRow row = error_norms(space, u, exact, lambda);
            check_solution(space, u, row);
            report.rows.push_back(row);
            meshinfo << i << ',' << level.mesh->num_triangles() << ',' << level.mesh->num_vertices() << ','
                     << space.num_dofs() << '\n';
            log << where << ": ndof " << row.ndof << ", broken H2 error " << row.h2_broken << '\n';
        } catch (const invariant_violation& e) {
            log << "invariant violation at " << where << ": " << e.what() << '\n';
            status = exit_invariant_violation;
            break;
        } catch (const std::exception& e) {
            log << "solver failure at " << where << ": " << e.what() << '\n';
            status = exit_solver_failure;
            break;
        }
    }

    try {
        if (report.rows.size() >= 2)
            convergence_orders(report);
        std::ostringstream errors;
        write_error_csv(errors, report);
        write_file(config.out / "errors.csv", errors.str());
        write_file(config.out / "meshinfo.csv", meshinfo.str());
    } catch (const std::exception& e) {
        log << "cannot write results: " << e.what() << '\n';
        return exit_solver_failure;
    }
    return status;
}

} // namespace hermite
