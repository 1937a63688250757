// SPDX-License-Identifier: Apache-2.0
//
// stochid: identifiability of stochastic operators on finite time-frequency grids
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Command line front end.
//
//   stochid [--seed S] [--tol T] [--out DIR] [--format json|csv] [--threads N] <command> ...
//
//   check PATTERN [--window W] [--trials N] [--budget B]
//   simulate MODEL [--window W] [--nsamples N]
//   counterexample PATTERN [--window W]
//   rectify BOXSET -L PRIME [--width A] [--as 2d|diagonal|tensor-square]
//   probe-slant FAMILY [--n2 8,16,32,64] [--slant S]
//
// Exit codes: 0 ok, 2 bad input, 3 search budget exhausted, 4 not identifiable
// (or no kernel), 5 internal error.

#include <stochid/io.hpp>
#include <stochid/stochid.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace stochid;

namespace
{

enum Exit
{
    exit_ok = 0,
    exit_input = 2,
    exit_budget = 3,
    exit_not_identifiable = 4,
    exit_internal = 5
};

struct RunConfig
{
    std::uint64_t seed = 1;
    double tol = default_tol;
    std::string out;
    std::string format = "json";
    unsigned threads = 0;
};

// Writes to DIR/name when --out is set, to stdout otherwise.
void emit(const RunConfig& cfg, const std::string& name, const std::string& text)
{
    if (cfg.out.empty())
    {
        std::cout << text;
        return;
    }
    std::filesystem::create_directories(cfg.out);
    write_text_file((std::filesystem::path(cfg.out) / name).string(), text);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::optional<Window> load_window(const std::string& path)
{
    if (path.empty())
        return std::nullopt;
    return window_from_json(read_json_file(path));
}

void require_matching_L(const Window& w, const Pattern& p)
{
    if (w.L() != p.L())
        throw InputError("window length " + std::to_string(w.L()) + " does not match pattern L = " +
                         std::to_string(p.L()));
}

// ---- check ----

struct CheckArgs
{
    std::string pattern;
    std::string window;
    int trials = 200;
    std::uint64_t budget = default_node_budget;
};

int cmd_check(const RunConfig& cfg, const CheckArgs& a)
{
    const Pattern p = pattern_from_json(read_json_file(a.pattern));
    if (p.size() == 0)
        throw InputError("pattern is empty");
    const auto witness = detect_defect(p, a.budget);

    Window w = alltop_window(1);
    IdentifiabilityReport rep;
    std::string source;
    if (auto given = load_window(a.window))
    {
        require_matching_L(*given, p);
        w = *given;
        rep = check_identifiable(w, p, cfg.tol);
        source = "file";
    }
    else if (p.size() > static_cast<std::size_t>(p.L()) * p.L())
    {
        // Fails on dimension for every window; no search needed.
        Rng rng = substream(cfg.seed, 0);
        w = random_gaussian_window(p.L(), rng);
        rep = check_identifiable(w, p, cfg.tol);
        source = "random";
    }
    else
    {
        const WindowSearchResult s = search_window(p, a.trials, cfg.seed, thread_count(cfg.threads), cfg.tol);
        w = s.window;
        rep = s.report;
        source = "search";
    }

    json j;
    j["defect"] = witness ? to_string(witness->kind) : "none";
    j["witness"] = witness ? to_json(*witness) : json(nullptr);
    j["invertible"] = rep.invertible;
    j["sigma_min"] = rep.sigma_min;
    j["sigma_max"] = rep.sigma_max;
    j["rank"] = rep.rank;
    j["columns"] = p.size();
    j["rows"] = p.L() * p.L();
    j["reason"] = rep.reason.empty() ? json(nullptr) : json(rep.reason);
    j["window_source"] = source;
    j["window"] = to_json(w);

    if (cfg.format == "csv")
    {
        std::ostringstream os;
        os << "defect,invertible,sigma_min,sigma_max,rank,columns,reason\n"
           << j["defect"].get<std::string>() << ',' << (rep.invertible ? "true" : "false") << ','
           << format_double(rep.sigma_min) << ',' << format_double(rep.sigma_max) << ',' << rep.rank << ','
           << p.size() << ',' << rep.reason << '\n';
        emit(cfg, "check.csv", os.str());
    }
    else
        emit(cfg, "check.json", dump(j));
    return exit_ok;
}

// ---- simulate ----

struct SimulateArgs
{
    std::string model;
    std::string window;
    int nsamples = 1000;
    int trials = 200;
};

double relative(const CMatrix& err, const CMatrix& ref)
{
    const double r = ref.norm();
    return r > 0.0 ? err.norm() / r : err.norm();
}

int cmd_simulate(const RunConfig& cfg, const SimulateArgs& a)
{
    const CovarianceModel m = covariance_from_json(read_json_file(a.model));
    const Pattern& p = m.pattern();
    Window w = alltop_window(1);
    if (auto given = load_window(a.window))
    {
        require_matching_L(*given, p);
        w = *given;
    }
    else
        w = search_window(p, a.trials, cfg.seed, thread_count(cfg.threads), cfg.tol).window;

    const IdentifiabilityReport rep = check_identifiable(w, p, cfg.tol);
    if (!rep.invertible)
    {
        json j = {{"error", "not identifiable"}, {"report", to_json(rep)}};
        std::cerr << dump(j);
        if (!cfg.out.empty())
            emit(cfg, "report.json", dump(j));
        return exit_not_identifiable;
    }

    const CMatrix D = output_covariance(m, w);
    const EmpiricalOutput emp = sample_output(m, w, a.nsamples, cfg.seed);
    const Recovery exact = recover_covariance(D, w, p, false, cfg.tol);
    const Recovery mc = recover_covariance(emp.D, w, p, false, cfg.tol);

    std::ostringstream csv;
    csv << "source,nsamples,covariance_error,recovery_error,residual\n";
    csv << "exact,0,0," << format_double(relative(exact.A - m.A(), m.A())) << ',' << format_double(exact.residual)
        << '\n';
    csv << "monte_carlo," << a.nsamples << ',' << format_double(relative(emp.D - D, D)) << ','
        << format_double(relative(mc.A - m.A(), m.A())) << ',' << format_double(mc.residual) << '\n';

    json summary;
    summary["window"] = to_json(w);
    summary["report"] = to_json(rep);
    summary["nsamples"] = a.nsamples;
    summary["clip_warning"] = emp.clip_warning;
    summary["D_exact"] = matrix_to_json(D);
    summary["D_empirical"] = matrix_to_json(emp.D);
    summary["A_recovered_exact"] = matrix_to_json(exact.A);
    summary["A_recovered_empirical"] = matrix_to_json(mc.A);

    if (cfg.out.empty())
    {
        if (cfg.format == "csv")
            std::cout << csv.str();
        else
            std::cout << dump(summary);
        return exit_ok;
    }
    emit(cfg, "simulate.json", dump(summary));
    emit(cfg, "errors.csv", csv.str());
    return exit_ok;
}

// ---- counterexample ----

struct CounterexampleArgs
{
    std::string pattern;
    std::string window;
};

std::string eigen_csv(const Counterexample& ce)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> e1(ce.A1.A(), Eigen::EigenvaluesOnly), e2(ce.A2.A(), Eigen::EigenvaluesOnly);
    std::ostringstream os;
    os << "index,eig_A1,eig_A2\n";
    for (Eigen::Index i = 0; i < e1.eigenvalues().size(); ++i)
        os << i << ',' << format_double(e1.eigenvalues()(i)) << ',' << format_double(e2.eigenvalues()(i)) << '\n';
    return os.str();
}

int cmd_counterexample(const RunConfig& cfg, const CounterexampleArgs& a)
{
    const Pattern p = pattern_from_json(read_json_file(a.pattern));
    if (p.size() == 0)
        throw InputError("pattern is empty");
    Window w = alltop_window(1);
    if (auto given = load_window(a.window))
    {
        require_matching_L(*given, p);
        w = *given;
    }
    else
    {
        Rng rng = substream(cfg.seed, 0);
        w = random_unimodular_window(p.L(), rng);
    }
    const Counterexample ce = build_counterexample(w, p, cfg.tol);

    json j;
    j["window"] = to_json(w);
    j["K"] = ce.K;
    j["gap"] = ce.gap;
    j["d_diff"] = ce.d_diff;
    j["A1"] = to_json(ce.A1);
    j["A2"] = to_json(ce.A2);
    j["D"] = matrix_to_json(ce.D1);
    if (cfg.format == "csv")
        emit(cfg, "counterexample.csv", eigen_csv(ce));
    else
        emit(cfg, "counterexample.json", dump(j));
    return exit_ok;
}

// ---- rectify ----

struct RectifyArgs
{
    std::string boxset;
    int L = 0;
    double width = 0.0;
    std::string as = "auto";
};

int cmd_rectify(const RunConfig& cfg, const RectifyArgs& a)
{
    const BoxSet s = boxset_from_json(read_json_file(a.boxset));
    const std::optional<double> width = a.width > 0.0 ? std::optional<double>(a.width) : std::nullopt;
    if (s.dim() == 4 && a.as != "auto")
        throw InputError("--as applies to 2D box sets only");
    const Rectification r = [&] {
        if (s.dim() == 4)
            return rectify_4d_symmetric(s, a.L, width);
        if (a.as == "diagonal")
            return rectify_diagonal(s, a.L, width);
        if (a.as == "tensor-square")
            return rectify_tensor_square(s, a.L, width);
        return rectify_2d(s, a.L, width);
    }();

    if (cfg.format == "csv")
        emit(cfg, "rectify.csv", edge_list_csv(r.pattern));
    else
        emit(cfg, "rectify.json", dump(to_json(r)));
    return exit_ok;
}

// ---- probe-slant ----

struct ProbeArgs
{
    std::string family;
    std::vector<int> n2 = {8, 16, 32, 64};
    double slant = 0.0;
};

int cmd_probe(const RunConfig& cfg, const ProbeArgs& a)
{
    const SlantedFamily f = family_from_json(read_json_file(a.family));
    const double slant = a.slant > 0.0 ? a.slant : f.plant_slant;
    const auto rows = instability_probe(f, a.n2, slant, thread_count(cfg.threads));
    if (cfg.format == "csv")
    {
        emit(cfg, "probe.csv", probe_csv(rows));
        return exit_ok;
    }
    json j;
    j["family"] = to_json(f);
    j["slant"] = slant;
    j["rows"] = json::array();
    for (const auto& r : rows)
        j["rows"].push_back({{"N2", r.n2},
                             {"minor_rows", r.minor_rows},
                             {"minor_cols", r.minor_cols},
                             {"sigma_min", std::isnan(r.sigma_min) ? json(nullptr) : json(r.sigma_min)},
                             {"ratio", r.ratio}});
    const DecayExponent e = predicted_decay_exponent(f);
    j["predicted_slope"] = e.via_b;
    j["predicted_slope_consistent"] = e.consistent;
    if (rows.size() >= 2)
        j["observed_slope"] = loglog_slope(rows);
    emit(cfg, "probe.json", dump(j));
    return exit_ok;
}

template <class F>
int guarded(F&& f)
{
    try
    {
        return f();
    }
    catch (const InputError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    }
    catch (const BudgetExceeded& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_budget;
    }
    catch (const NotIdentifiable& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_not_identifiable;
    }
    catch (const NoKernel& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_not_identifiable;
    }
    catch (const std::exception& e)
    {
        std::cerr << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Identifiability of stochastic operators on finite time-frequency grids"};
    app.require_subcommand(1);
    // Global flags may also follow the subcommand.
    app.fallthrough();
    RunConfig cfg;
    app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    app.add_option("--tol", cfg.tol, "Relative singular value tolerance")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--out", cfg.out, "Output directory (stdout when omitted)");
    app.add_option("--format", cfg.format, "Output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--threads", cfg.threads, "Worker threads (default: STOCHID_THREADS or all cores)");

    CheckArgs check;
    auto* c = app.add_subcommand("check", "Defect search and identifiability verdict for a pattern");
    c->add_option("pattern", check.pattern, "Pattern JSON")->required();
    c->add_option("--window", check.window, "Window JSON (searched when omitted)");
    c->add_option("--trials", check.trials, "Random windows tried by the search")->capture_default_str();
    c->add_option("--budget", check.budget, "Node budget of the defect search")->capture_default_str();

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Channel sounding: exact and sampled output covariance, recovery");
    s->add_option("model", sim.model, "Covariance model JSON")->required();
    s->add_option("--window", sim.window, "Window JSON (searched when omitted)");
    s->add_option("--nsamples", sim.nsamples, "Monte Carlo samples")->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--trials", sim.trials, "Random windows tried by the search")->capture_default_str();

    CounterexampleArgs cex;
    auto* x = app.add_subcommand("counterexample", "Two covariances with the same output on a defective pattern");
    x->add_option("pattern", cex.pattern, "Pattern JSON")->required();
    x->add_option("--window", cex.window, "Window JSON (random unimodular when omitted)");

    RectifyArgs rect;
    auto* r = app.add_subcommand("rectify", "Lattice cover of a 2D or 4D box set");
    r->add_option("boxset", rect.boxset, "Box set JSON")->required();
    r->add_option("-L", rect.L, "Prime lattice size")->required();
    r->add_option("--width", rect.width, "Cell width a (default 1/sqrt(L))");
    r->add_option("--as", rect.as, "Reading of a 2D set")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "2d", "diagonal", "tensor-square"}));

    ProbeArgs probe;
    auto* ps = app.add_subcommand("probe-slant", "Instability probe for a slanted matrix family");
    ps->add_option("family", probe.family, "Family JSON")->required();
    ps->add_option("--n2", probe.n2, "Truncation sizes")->delimiter(',')->capture_default_str();
    ps->add_option("--slant", probe.slant, "Slant of the minors (default: the family's planted slant)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_input;
    }

    if (c->parsed())
        return guarded([&] { return cmd_check(cfg, check); });
    if (s->parsed())
        return guarded([&] { return cmd_simulate(cfg, sim); });
    if (x->parsed())
        return guarded([&] { return cmd_counterexample(cfg, cex); });
    if (r->parsed())
        return guarded([&] { return cmd_rectify(cfg, rect); });
    return guarded([&] { return cmd_probe(cfg, probe); });
}
