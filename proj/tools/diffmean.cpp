// diffmean: diffusion means, Frechet means and smeariness diagnostics from the command line.
//
// Exit codes: 0 success, 2 input or configuration error, 3 non-convergence.

#include "diffmean/dataset.hpp"
#include "diffmean/estimation.hpp"
#include "diffmean/heat_kernel.hpp"
#include "diffmean/smeariness.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace diffmean;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNonConvergence = 3;

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

struct Options {
    std::string manifold;
    int dim = 0;
    std::string data;
    std::vector<double> ts;
    bool frechet = false;
    std::uint64_t seed = 0;
    std::string out = "diffmean_out";

    KernelConfig kernel;
    OptimOptions optim;

    // kernel
    std::vector<double> x;
    std::vector<double> y;
    bool degrees = false;

    // profile
    std::size_t grid_size = 720;

    // fss
    int B = 1000;
    std::vector<std::size_t> n_grid;

    // fit
    std::vector<double> t_range{0.01, 10.0};
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::optional<ManifoldKind> parse_kind(const std::string& name) {
    if (name.empty()) return std::nullopt;
    static const std::map<std::string, ManifoldKind> kinds{{"euclidean", ManifoldKind::Euclidean},
                                                           {"circle", ManifoldKind::Circle},
                                                           {"sphere", ManifoldKind::Sphere},
                                                           {"hyperbolic", ManifoldKind::Hyperbolic}};
    return kinds.at(name);
}

void check_data_manifold(const Sample& s, const Options& o) {
    if (o.dim > 0 && s.manifold().dim() != o.dim) {
        throw DomainError("--dim " + std::to_string(o.dim) + " does not match the data dimension " +
                          std::to_string(s.manifold().dim()));
    }
}

Sample load(const Options& o) {
    Sample s = read_dataset(o.data, parse_kind(o.manifold));
    check_data_manifold(s, o);
    return s;
}

std::string coords_text(const Point& p) {
    std::string out;
    for (Eigen::Index i = 0; i < p.coords().size(); ++i) {
        if (i) out += ' ';
        out += fmt(p.coords()[i]);
    }
    return out;
}

std::string point_text(const Point& p) {
    if (p.manifold().kind() == ManifoldKind::Circle) {
        return fmt(p.angle()) + " rad (" + fmt(p.angle() * kRadToDeg) + " deg)";
    }
    return coords_text(p);
}

// Requested criteria in command-line order: Frechet first when --frechet is given.
std::vector<Criterion> criteria(const Options& o, std::initializer_list<double> fallback_ts, bool fallback_frechet) {
    std::vector<Criterion> out;
    const bool any = o.frechet || !o.ts.empty();
    if (any ? o.frechet : fallback_frechet) out.push_back(Criterion::frechet());
    for (double t : any ? o.ts : std::vector<double>(fallback_ts)) out.push_back(Criterion::diffusion(Diffusivity(t)));
    return out;
}

std::ofstream open_output(const Options& o, const std::string& name) {
    fs::create_directories(o.out);
    const fs::path path = fs::path(o.out) / name;
    std::ofstream f(path);
    if (!f) throw DomainError("cannot write " + path.string());
    return f;
}

Point make_point(const ManifoldSpec& m, const std::vector<double>& v, bool degrees) {
    if (v.empty()) return origin(m);
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
    if (m.kind() == ManifoldKind::Circle && degrees) c *= 1.0 / kRadToDeg;
    // Hyperbolic points may be given by their m spatial coordinates alone.
    if (m.kind() == ManifoldKind::Hyperbolic && c.size() == m.dim()) {
        Eigen::VectorXd full(c.size() + 1);
        full << 0.0, c;
        c = full;
    }
    if (c.size() != m.ambient_dim()) {
        throw DomainError("expected " + std::to_string(m.ambient_dim()) + " coordinates for " + to_string(m) +
                          ", got " + std::to_string(c.size()));
    }
    return Point(m, c);
}

int cmd_kernel(const Options& o) {
    if (o.manifold.empty()) throw DomainError("kernel: --manifold is required");
    if (o.ts.size() != 1) throw DomainError("kernel: exactly one --t is required");
    const ManifoldKind kind = *parse_kind(o.manifold);
    const int dim = kind == ManifoldKind::Circle ? 1 : (o.dim > 0 ? o.dim : (kind == ManifoldKind::Euclidean ? 1 : 2));
    const ManifoldSpec m(kind, dim);
    const Point x = make_point(m, o.x, o.degrees);
    const Point y = make_point(m, o.y, o.degrees);
    const Diffusivity t(o.ts.front());
    o.kernel.validate();
    const double lp = log_heat_kernel(m, x, y, t, o.kernel);
    std::cout << "manifold: " << to_string(m) << '\n'
              << "x: " << point_text(x) << '\n'
              << "y: " << point_text(y) << '\n'
              << "t: " << fmt(t.value()) << '\n'
              << "dist: " << fmt(dist(m, x, y)) << '\n'
              << "tail_tol: " << fmt(o.kernel.tail_tol) << '\n'
              << "max_terms: " << o.kernel.max_terms << '\n'
              << "quad_rel_tol: " << fmt(o.kernel.quad_rel_tol) << '\n'
              << "quad_upper_sigma: " << fmt(o.kernel.quad_upper_sigma) << '\n'
              << "ln_p: " << fmt(lp) << '\n'
              << "p: " << fmt(std::exp(lp)) << '\n';
    return kExitOk;
}

void print_report(std::ostream& os, const EstimateReport& r) {
    os << "criterion: " << r.criterion.label() << '\n'
       << "optimum: " << point_text(r.optimum) << '\n'
       << "objective: " << fmt(r.objective) << '\n'
       << "converged: " << (r.converged ? "true" : "false") << '\n'
       << "grad_norm: " << fmt(r.grad_norm) << '\n'
       << "starts: " << r.iterations.size() << '\n'
       << "selected_start: " << r.selected_start << '\n'
       << "near_ties: " << r.near_ties.size() << '\n';
    for (const auto& tie : r.near_ties) os << "  tie: " << point_text(tie.point) << " objective " << fmt(tie.objective) << '\n';
}

void write_mean_row(std::ostream& os, const EstimateReport& r) {
    os << "criterion,objective,converged,grad_norm,near_ties";
    for (Eigen::Index i = 0; i < r.optimum.coords().size(); ++i) os << ",c" << i;
    os << '\n' << r.criterion.label() << ',' << fmt(r.objective) << ',' << (r.converged ? 1 : 0) << ','
       << fmt(r.grad_norm) << ',' << r.near_ties.size();
    for (Eigen::Index i = 0; i < r.optimum.coords().size(); ++i) os << ',' << fmt(r.optimum.coords()[i]);
    os << '\n';
}

int cmd_mean(const Options& o) {
    const Sample s = load(o);
    if (o.frechet == !o.ts.empty() || o.ts.size() > 1) throw DomainError("mean: give exactly one of --t or --frechet");
    const Criterion c = o.frechet ? Criterion::frechet() : Criterion::diffusion(Diffusivity(o.ts.front()));
    try {
        const EstimateReport r = minimize(s, c, o.optim, o.kernel);
        print_report(std::cout, r);
        std::ofstream f = open_output(o, "mean.csv");
        write_mean_row(f, r);
    } catch (const NonConvergenceError& e) {
        print_report(std::cout, e.best());
        throw;
    }
    return kExitOk;
}

constexpr const char* kPlotProfile = R"PY(import csv
import math
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

# Likelihood profiles rescaled to a common height. Each curve keeps its own
# minimum value, so the relative minima stay comparable across t.
rows = defaultdict(list)
with open(sys.argv[1] if len(sys.argv) > 1 else "profile.csv") as f:
    for r in csv.DictReader(f):
        rows[r["criterion"]].append((float(r["angle_deg"]), float(r["value"])))

fig, ax = plt.subplots(figsize=(7, 4))
for label, pts in rows.items():
    pts.sort()
    vals = [v for _, v in pts]
    lo, hi = min(vals), max(vals)
    span = hi - lo if hi > lo else 1.0
    ax.plot([a for a, _ in pts], [lo + (v - lo) / span for v in vals],
            label="Frechet" if label == "frechet" else "t = " + label)
ax.set_xlabel("angle (deg)")
ax.set_ylabel("rescaled objective")
ax.legend()
fig.tight_layout()
fig.savefig("profile.png", dpi=150)
)PY";

constexpr const char* kPlotFss = R"PY(import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

curves = defaultdict(list)
with open(sys.argv[1] if len(sys.argv) > 1 else "fss.csv") as f:
    for r in csv.DictReader(f):
        curves[r["criterion"]].append((int(r["n"]), float(r["ratio"]), float(r["mc_stderr"])))

fig, ax = plt.subplots(figsize=(7, 4))
for label, pts in curves.items():
    pts.sort()
    ax.errorbar([p[0] for p in pts], [p[1] for p in pts], yerr=[2 * p[2] for p in pts], capsize=2,
                label="Frechet" if label == "frechet" else "t = " + label)
ax.axhline(1.0, color="gray", lw=0.8, ls="--")
ax.set_xscale("log")
ax.set_xlabel("n")
ax.set_ylabel("variance ratio")
ax.legend()
fig.tight_layout()
fig.savefig("fss.png", dpi=150)
)PY";

int cmd_profile(const Options& o) {
    const Sample s = load(o);
    if (s.manifold().kind() != ManifoldKind::Circle) throw DomainError("profile: circle data required");
    if (o.grid_size < 2) throw DomainError("profile: --grid-size must be >= 2");
    const std::vector<Criterion> cs = criteria(o, {0.05, 0.3, 1.0}, true);
    const std::vector<Point> grid = circle_grid(o.grid_size);

    std::ofstream f = open_output(o, "profile.csv");
    f << "criterion,angle_rad,angle_deg,value\n";
    std::cout << "criterion,argmin_deg,min_value\n";
    for (const auto& c : cs) {
        std::vector<double> values(grid.size());
        if (c.is_frechet()) {
            for (std::size_t i = 0; i < grid.size(); ++i) values[i] = frechet_objective(s, grid[i]);
        } else {
            const Diffusivity t = c.t();
            const std::vector<ProfileRow> rows = profile_likelihood(s, std::span(&t, 1), grid, o.kernel);
            for (std::size_t i = 0; i < grid.size(); ++i) values[i] = rows[i].value;
        }
        std::size_t best = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            f << c.label() << ',' << fmt(grid[i].angle()) << ',' << fmt(grid[i].angle() * kRadToDeg) << ','
              << fmt(values[i]) << '\n';
            if (values[i] < values[best]) best = i;
        }
        std::cout << c.label() << ',' << fmt(grid[best].angle() * kRadToDeg) << ',' << fmt(values[best]) << '\n';
    }
    open_output(o, "plot_profile.py") << kPlotProfile;
    return kExitOk;
}

int cmd_fss(const Options& o) {
    const Sample s = load(o);
    const std::vector<Criterion> cs = criteria(o, {0.1, 0.3, 0.5, 1.0}, true);
    BootstrapConfig bcfg;
    bcfg.B = o.B;
    bcfg.seed = o.seed;
    bcfg.n_grid = o.n_grid;
    bcfg.validate(s.size());

    std::ofstream table = open_output(o, "fss.csv");
    table << "criterion,n,ratio,mc_stderr\n";
    std::ostringstream summary;
    summary << "criterion,s_fss,argmax_n\n";
    for (const auto& c : cs) {
        const VarianceRatioCurve curve = variance_ratio_curve(s, c, bcfg, o.optim, o.kernel);
        std::size_t argmax = curve.rows.front().n;
        for (const auto& row : curve.rows) {
            table << c.label() << ',' << row.n << ',' << fmt(row.ratio) << ',' << fmt(row.mc_stderr) << '\n';
            if (row.ratio == fss_magnitude(curve)) argmax = row.n;
        }
        summary << c.label() << ',' << fmt(fss_magnitude(curve)) << ',' << argmax << '\n';
    }
    open_output(o, "fss_summary.csv") << summary.str();
    open_output(o, "plot_fss.py") << kPlotFss;
    std::cout << summary.str();
    return kExitOk;
}

int cmd_fit(const Options& o) {
    const Sample s = load(o);
    if (o.t_range.size() != 2) throw DomainError("fit: --t-range takes two values lo,hi");
    const JointFit fit = joint_fit(s, o.t_range[0], o.t_range[1], o.optim, o.kernel);
    if (fit.boundary) {
        std::cerr << "WARNING: profile minimum lies at the boundary of the t range [" << fmt(o.t_range[0]) << ", "
                  << fmt(o.t_range[1]) << "]; t_hat is not an interior estimate\n";
    }
    std::cout << "t_hat: " << fmt(fit.t.value()) << '\n'
              << "boundary: " << (fit.boundary ? "true" : "false") << '\n';
    print_report(std::cout, fit.report);

    std::ofstream f = open_output(o, "fit_trace.csv");
    f << "t,objective";
    for (Eigen::Index i = 0; i < fit.report.optimum.coords().size(); ++i) f << ",c" << i;
    f << '\n';
    for (const auto& p : fit.trace) {
        f << fmt(p.t) << ',' << fmt(p.objective);
        for (Eigen::Index i = 0; i < p.optimum.coords().size(); ++i) f << ',' << fmt(p.optimum.coords()[i]);
        f << '\n';
    }
    return kExitOk;
}

void add_common(CLI::App* cmd, Options& o, bool needs_data) {
    cmd->add_option("--manifold", o.manifold, "euclidean, circle, sphere or hyperbolic")
        ->check(CLI::IsMember({"euclidean", "circle", "sphere", "hyperbolic"}));
    cmd->add_option("--dim", o.dim, "intrinsic dimension")->check(CLI::PositiveNumber);
    if (needs_data) cmd->add_option("--data", o.data, "comma-separated sample file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--seed", o.seed, "master random seed");
    cmd->add_option("--tail-tol", o.kernel.tail_tol, "series truncation tolerance");
    cmd->add_option("--max-terms", o.kernel.max_terms, "series term cap");
    cmd->add_option("--quad-rel-tol", o.kernel.quad_rel_tol, "quadrature relative tolerance");
    cmd->add_option("--quad-upper-sigma", o.kernel.quad_upper_sigma, "quadrature cutoff in units of sqrt(t)");
    cmd->add_option("--max-iters", o.optim.max_iters, "descent iterations per start");
    cmd->add_option("--grad-tol", o.optim.grad_tol, "gradient norm tolerance");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diffusion means, Frechet means and finite sample smeariness on manifolds"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value configuration file; flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);

    Options o;

    auto* kernel = app.add_subcommand("kernel", "evaluate ln p(x, y, t)");
    add_common(kernel, o, false);
    kernel->add_option("--x", o.x, "first point (comma-separated coordinates; circle: angle)")->delimiter(',');
    kernel->add_option("--y", o.y, "second point")->delimiter(',');
    kernel->add_option("--t", o.ts, "diffusion time")->required()->check(CLI::PositiveNumber);
    kernel->add_flag("--degrees", o.degrees, "circle angles in degrees");

    auto* mean = app.add_subcommand("mean", "diffusion t-mean or Frechet mean of a sample");
    add_common(mean, o, true);
    mean->add_option("--t", o.ts, "diffusion time")->check(CLI::PositiveNumber);
    mean->add_flag("--frechet", o.frechet, "Frechet mean instead of a diffusion mean");

    auto* profile = app.add_subcommand("profile", "likelihood profiles on a circle grid");
    add_common(profile, o, true);
    profile->add_option("--t", o.ts, "diffusion times (repeat or comma-separate)")->delimiter(',')->check(CLI::PositiveNumber);
    profile->add_flag("--frechet", o.frechet, "include the Frechet function");
    profile->add_option("--grid-size", o.grid_size, "grid nodes on the circle");

    auto* fss = app.add_subcommand("fss", "bootstrap variance-ratio curves");
    add_common(fss, o, true);
    fss->add_option("--t", o.ts, "diffusion times (repeat or comma-separate)")->delimiter(',')->check(CLI::PositiveNumber);
    fss->add_flag("--frechet", o.frechet, "include the Frechet mean");
    fss->add_option("--B", o.B, "bootstrap replicates")->check(CLI::PositiveNumber);
    fss->add_option("--n-grid", o.n_grid, "resample sizes (comma-separated)")->delimiter(',');

    auto* fit = app.add_subcommand("fit", "joint estimate of t and the diffusion mean");
    add_common(fit, o, true);
    fit->add_option("--t-range", o.t_range, "search interval lo,hi for t")->delimiter(',')->expected(2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    o.optim.seed = o.seed;
    try {
        o.kernel.validate();
        o.optim.validate();
        if (kernel->parsed()) return cmd_kernel(o);
        if (mean->parsed()) return cmd_mean(o);
        if (profile->parsed()) return cmd_profile(o);
        if (fss->parsed()) return cmd_fss(o);
        return cmd_fit(o);
    } catch (const NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
}
