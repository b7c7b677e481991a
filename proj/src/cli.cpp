#include "wba/cli.hpp"

#include "wba/best_approx.hpp"
#include "wba/cross_section.hpp"
#include "wba/ergodic.hpp"
#include "wba/errors.hpp"
#include "wba/lattice.hpp"
#include "wba/section_mc.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace wba::cli {

using nlohmann::ordered_json;

namespace {

struct RunConfig {
    std::string subcommand;
    int d = 0;
    std::string weights;
    std::uint64_t seed = 0;
    std::string theta;
    long theta_bits = 256;
    std::string method = "auto";
    std::uint64_t q_max = 0;
    std::size_t n_records = 30;
    double t_budget = 20;
    std::size_t n_theta = 100;
    std::uint64_t n_samples = 100000;
    std::string T = "100,1000";
    double dt = 0.01;
    int bins = 20;
    std::string observable = "chi_K";
    double eps = 0.5;
    double z = 1.0;
    std::string eps_grid = "0.05,0.07,0.1,0.14,0.2,0.28,0.4,0.5";
    std::string basis;
    double t = 0;
    double kappa = 1.0;
    std::string out;
    std::string format = "csv";
    std::string config;
    int jobs = 1;
    long max_bits = default_max_bits();
};

struct Result {
    ordered_json summary = ordered_json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<ordered_json>> rows;
};

ordered_json big(const mpz_class& z) {
    if (z.fits_slong_p()) return z.get_si();
    return z.get_str();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError(std::string("bad number in ") + what + ": " + tok);
        }
    }
    if (out.empty()) throw ConfigError(std::string(what) + " is empty");
    return out;
}

WeightVector weights_of(const RunConfig& c) {
    if (c.weights.empty()) {
        if (c.d < 1) throw ConfigError("give --w or --d");
        return WeightVector::equal(c.d);
    }
    std::optional<WeightVector> w;
    try {
        w = WeightVector::parse(c.weights);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad --w: ") + e.what());
    }
    if (c.d != 0 && c.d != w->dim()) throw ConfigError("--d does not match the length of --w");
    return *w;
}

ThetaVector theta_of(const RunConfig& c, const WeightVector& w) {
    if (c.theta.empty()) throw ConfigError("--theta is required");
    ThetaVector th;
    try {
        th = ThetaVector::parse(c.theta, c.theta_bits);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad --theta: ") + e.what());
    }
    if (th.dim() != w.dim()) throw ConfigError("--theta and --w differ in dimension");
    return th;
}

void require_positive(double v, const char* name) {
    if (!(v > 0)) throw ConfigError(std::string(name) + " must be positive");
}

void record_rows(Result& res, const BestApproxSequence& s) {
    const int d = s.theta.dim();
    res.columns.push_back("n");
    for (int i = 1; i <= d; ++i) res.columns.push_back("p" + std::to_string(i));
    res.columns.insert(res.columns.end(), {"q", "r", "r_width"});
    for (std::size_t k = 0; k < s.records.size(); ++k) {
        const auto& r = s.records[k];
        std::vector<ordered_json> row{k + 1};
        for (const auto& p : r.p) row.push_back(big(p));
        row.push_back(big(r.q));
        row.push_back(r.r.center_double());
        row.push_back(2 * r.r.radius_double());
        res.rows.push_back(std::move(row));
    }
    res.summary["n_records"] = s.records.size();
    res.summary["terminal"] = s.terminal;
    res.summary["horizon_q"] = big(s.horizon_q);
    res.summary["tie_events"] = s.tie_events;
    std::size_t uncertified = 0;
    for (const auto& r : s.records) uncertified += r.certified ? 0 : 1;
    res.summary["uncertified_records"] = uncertified;
}

Result cmd_best_approx(const RunConfig& c) {
    const WeightVector w = weights_of(c);
    const ThetaVector th = theta_of(c, w);
    const bool brute = c.method == "brute" || (c.method == "auto" && c.q_max > 0);
    if (c.method != "auto" && c.method != "brute" && c.method != "fast") throw ConfigError("--method is auto, brute or fast");
    Result res;
    if (brute) {
        if (c.q_max == 0) throw ConfigError("--q-max is required for the brute-force method");
        record_rows(res, enumerate_best_approx_bruteforce(th, w, c.q_max));
        res.summary["method"] = "brute";
    } else {
        require_positive(c.t_budget, "--t-budget");
        EnumOptions opt{c.max_bits};
        record_rows(res, enumerate_best_approx_fast(th, w, c.n_records, c.t_budget, opt));
        res.summary["method"] = "fast";
    }
    return res;
}

Result cmd_best_approx_regular(const RunConfig& c) {
    const WeightVector w = weights_of(c);
    const ThetaVector th = theta_of(c, w);
    require_positive(c.t_budget, "--t-budget");
    Result res;
    record_rows(res, enumerate_regular_best_approx(th, w, c.n_records, c.t_budget, EnumOptions{c.max_bits}));
    return res;
}

Result cmd_cross_section(const RunConfig& c) {
    const WeightVector w = weights_of(c);
    const ThetaVector th = theta_of(c, w);
    require_positive(c.t_budget, "--t-budget");
    CrossSectionOrbit orbit = cross_section_visits(th, w, c.t_budget, VisitOptions{c.max_bits});
    Result res;
    res.columns = {"t", "q"};
    for (int i = 1; i <= w.dim(); ++i) res.columns.push_back("p" + std::to_string(i));
    res.columns.insert(res.columns.end(), {"r", "r_width", "in_S1_sharp", "in_B"});
    std::size_t nb = 0;
    for (const auto& v : orbit.visits) {
        std::vector<ordered_json> row{v.t, big(v.q)};
        for (const auto& p : v.p) row.push_back(big(p));
        row.push_back(v.r_of_visit.center_double());
        row.push_back(2 * v.r_of_visit.radius_double());
        row.push_back(v.in_S1_sharp ? 1 : 0);
        row.push_back(v.in_B ? 1 : 0);
        nb += v.in_B ? 1 : 0;
        res.rows.push_back(std::move(row));
    }
    res.summary["n_visits"] = orbit.visits.size();
    res.summary["n_B_visits"] = nb;
    res.summary["divergent"] = orbit.divergent;
    res.summary["skipped_ambiguous"] = orbit.skipped_ambiguous;
    res.summary["max_B_visits_per_unit_time"] = orbit.max_b_visits_per_unit_time();
    return res;
}

Result cmd_first_return(const RunConfig& c) {
    const WeightVector w = weights_of(c);
    const ThetaVector th = theta_of(c, w);
    require_positive(c.t_budget, "--t-budget");
    CrossSectionOrbit orbit = cross_section_visits(th, w, c.t_budget, VisitOptions{c.max_bits});
    auto returns = first_returns(orbit);
    Result res;
    res.columns = {"k", "q", "q_next", "t_return", "F", "F_width"};
    std::vector<const CrossSectionVisit*> bv;
    for (const auto& v : orbit.visits) {
        if (v.in_B) bv.push_back(&v);
    }
    double sf = 0, st = 0, fmax = 0;
    for (std::size_t k = 0; k < returns.size(); ++k) {
        const auto& fr = returns[k];
        res.rows.push_back({k + 1, big(bv[k]->q), big(fr.next.q), fr.t_return, fr.F.center_double(),
                            2 * fr.F.radius_double()});
        sf += fr.F.center_double();
        st += fr.t_return;
        fmax = std::max(fmax, fr.F.upper_double());
    }
    res.summary["n_returns"] = returns.size();
    if (!returns.empty()) {
        res.summary["mean_F"] = sf / static_cast<double>(returns.size());
        res.summary["mean_t_return"] = st / static_cast<double>(returns.size());
        res.summary["max_F_upper"] = fmax;
    }
    res.summary["divergent"] = orbit.divergent;
    return res;
}

SampleConfig sample_config(const RunConfig& c, const WeightVector& w) {
    if (c.n_theta == 0) throw ConfigError("--n-theta must be positive");
    if (c.n_records == 0) throw ConfigError("--n-records must be positive");
    SampleConfig s;
    s.d = w.dim();
    s.w = w.entries();
    s.n_theta = c.n_theta;
    s.n_records = c.n_records;
    s.seed = c.seed;
    s.theta_bits = c.theta_bits;
    s.jobs = c.jobs;
    return s;
}

Result cmd_levy(const RunConfig& c) {
    const WeightVector w = weights_of(c);
    LevyEstimate est = estimate_levy(sample_config(c, w));
    Result res;
    res.summary["L_hat"] = est.L_hat;
    res.summary["L_hat_stderr"] = est.L_hat_stderr;
    res.summary["L_extrapolated"] = est.L_extrapolated;
    res.summary["L_extrapolated_stderr"] = est.L_extrapolated_stderr;
    res.summary["n_used"] = est.n_used;
    res.summary["n_dropped"] = est.n_dropped;
    res.columns = {"n", "mean_log_q_over_n", "mean_log_r_over_n"};
    for (std::size_t n = 0; n < est.mean_log_q_over_n.size(); ++n) {
        res.rows.push_back({n + 1, est.mean_log_q_over_n[n], est.mean_log_r_over_n[n]});
    }
    return res;
}

Result cmd_beta_dist(const RunConfig& c) {
    const WeightVector w = weights_of(c);
    if (c.bins < 1) throw ConfigError("--bins must be positive");
    auto runs = run_theta_sample(sample_config(c, w));
    BetaHistogram h = beta_histogram(runs, c.bins);
    std::size_t dropped = 0;
    for (const auto& r : runs) dropped += r.dropped ? 1 : 0;
    Result res;
    res.summary["n_total"] = h.n_total;
    res.summary["out_of_range"] = h.out_of_range;
    res.summary["max_ks_theta_vs_pool"] = h.max_ks_theta_vs_pool;
    res.summary["n_dropped"] = dropped;
    res.columns = {"bin_lo", "bin_hi", "count", "density"};
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        const double width = h.edges[k + 1] - h.edges[k];
        const double dens = h.n_total ? static_cast<double>(h.counts[k]) / static_cast<double>(h.n_total) / width : 0.0;
        res.rows.push_back({h.edges[k], h.edges[k + 1], h.counts[k], dens});
    }
    return res;
}

Result cmd_mc_measure(const RunConfig& c) {
    const WeightVector w = weights_of(c);
    if (c.n_samples == 0) throw ConfigError("--n-samples must be positive");
    if (w.dim() > 2) throw ConfigError("mc-measure supports d = 1 and d = 2");
    require_positive(c.kappa, "--kappa");
    MCEstimate est = estimate_B_probability(w.dim(), w, c.n_samples, c.seed, c.jobs);
    Result res;
    res.summary["n_samples"] = est.n_samples;
    res.summary["hits_B"] = est.hits_B;
    res.summary["n_ambiguous"] = est.n_ambiguous;
    res.summary["p_hat"] = est.p_hat;
    res.summary["stderr"] = est.stderr_;
    res.summary["section_total_mass"] = section_total_mass(w);
    res.summary["kappa"] = c.kappa;
    const double mu = mu_B_estimate(est, w, c.kappa);
    res.summary["mu_B"] = mu;
    res.summary["implied_L"] = mu > 0 ? 1.0 / mu : 0.0;
    return res;
}

std::vector<ThetaVector> orbit_thetas(const RunConfig& c, const WeightVector& w, double T_max) {
    const long needed = bits_for_time(T_max, w.max_weight().get_d()) + 64;
    if (needed > c.max_bits) {
        throw PrecisionExhausted("orbit length needs " + std::to_string(needed) + " bits; raise --max-bits", needed,
                                 c.max_bits);
    }
    if (c.n_theta == 0) throw ConfigError("--n-theta must be positive");
    std::vector<ThetaVector> out;
    for (std::size_t i = 0; i < c.n_theta; ++i) {
        Rng rng(derive_seed(c.seed, i));
        out.push_back(ThetaVector::sample(w.dim(), needed, rng));
    }
    return out;
}

Result cmd_equidist(const RunConfig& c) {
    const WeightVector w = weights_of(c);
    std::vector<double> grid = parse_doubles(c.T, "--T");
    Observable f;
    if (c.observable == "chi_K") {
        f = Observable::chi_K(c.eps);
    } else if (c.observable == "chi_C") {
        f = Observable::chi_C(c.z);
    } else {
        throw ConfigError("--observable is chi_K or chi_C");
    }
    auto thetas = orbit_thetas(c, w, grid.back());
    const FlowParams fp = FlowParams::vector_case(w);
    std::vector<ErgodicAverageCurve> curves(thetas.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < thetas.size(); i = next++) {
            try {
                curves[i] = birkhoff_average(make_theta_lattice(thetas[i]), fp, f, grid, c.dt, OrbitOptions{c.max_bits});
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < c.jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    Result res;
    res.columns = {"theta", "T", "average", "uncertain_steps"};
    std::vector<double> pooled(grid.size(), 0.0);
    for (std::size_t i = 0; i < curves.size(); ++i) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            res.rows.push_back({i, grid[k], curves[i].average[k], curves[i].uncertain_steps[k]});
            pooled[k] += curves[i].average[k] / static_cast<double>(curves.size());
        }
    }
    for (std::size_t k = 0; k < grid.size(); ++k) res.rows.push_back({"pooled", grid[k], pooled[k], ordered_json()});
    res.summary["observable"] = f.id();
    ordered_json pj = ordered_json::array();
    for (double p : pooled) pj.push_back(p);
    res.summary["pooled_average"] = pj;
    return res;
}

Result cmd_cusp_scaling(const RunConfig& c) {
    const WeightVector w = weights_of(c);
    std::vector<double> grid = parse_doubles(c.T, "--T");
    if (grid.size() != 1) throw ConfigError("cusp-scaling takes a single --T");
    std::vector<double> eps = parse_doubles(c.eps_grid, "--eps-grid");
    auto thetas = orbit_thetas(c, w, grid.front());
    CuspTable tab = cusp_scaling(FlowParams::vector_case(w), thetas, eps, grid.front(), c.dt, OrbitOptions{c.max_bits},
                                 c.jobs);
    Result res;
    res.columns = {"eps", "fraction_outside_K"};
    for (const auto& r : tab.rows) res.rows.push_back({r.eps, r.fraction});
    res.summary["slope"] = tab.slope;
    res.summary["n_theta"] = tab.n_theta;
    return res;
}

Result cmd_lattice_min(const RunConfig& c) {
    std::optional<UnimodularLattice> L;
    WeightVector w = WeightVector::equal(1);
    if (!c.basis.empty()) {
        std::vector<std::vector<mpq_class>> cols;
        try {
            for (const auto& col : split(c.basis, ';')) {
                std::vector<mpq_class> v;
                for (const auto& e : split(col, ',')) v.push_back(parse_rational_text(e));
                cols.push_back(std::move(v));
            }
        } catch (const std::exception& e) {
            throw ConfigError(std::string("bad --basis: ") + e.what());
        }
        if (cols.size() < 2) throw ConfigError("--basis needs at least two columns");
        for (const auto& col : cols) {
            if (col.size() != cols.size()) throw ConfigError("--basis must be square");
        }
        RunConfig cw = c;
        if (cw.weights.empty()) cw.d = static_cast<int>(cols.size()) - 1;
        w = weights_of(cw);
        if (w.dim() + 1 != static_cast<int>(cols.size())) throw ConfigError("--basis dimension must be d+1");
        L = UnimodularLattice::from_rational_basis(cols);
        if (c.t != 0) L = apply_flow(*L, FlowParams::vector_case(w), c.t, c.max_bits);
    } else {
        w = weights_of(c);
        const ThetaVector th = theta_of(c, w);
        L = apply_flow(make_theta_lattice(th), FlowParams::vector_case(w), c.t, c.max_bits);
    }
    const DyadicInterval det = determinant(*L);
    if (!det.contains(mpq_class(1)) && !det.contains(mpq_class(-1))) throw ConfigError("basis is not unimodular");
    Result res;
    const DyadicInterval ls = lambda1_sup(*L), lw = lambda1_w(*L, w), dl = delta_fn(*L);
    res.columns = {"quantity", "value", "width"};
    res.rows.push_back({"lambda1_sup", ls.center_double(), 2 * ls.radius_double()});
    res.rows.push_back({"lambda1_w", lw.center_double(), 2 * lw.radius_double()});
    res.rows.push_back({"delta", dl.center_double(), 2 * dl.radius_double()});
    return res;
}

std::string cell(const ordered_json& j) {
    if (j.is_null()) return "";
    if (j.is_string()) return j.get<std::string>();
    return j.dump();
}

void write_result(std::ostream& os, const RunConfig& c, const ordered_json& config, const Result& res) {
    if (c.format == "json") {
        ordered_json doc;
        doc["meta"] = {{"version", kVersion}, {"subcommand", c.subcommand}, {"config", config}};
        doc["summary"] = res.summary;
        doc["columns"] = res.columns;
        doc["rows"] = res.rows;
        os << doc.dump(2) << "\n";
        return;
    }
    os << "# " << kVersion << "\n";
    os << "# subcommand=" << c.subcommand << "\n";
    for (const auto& [k, v] : config.items()) os << "# " << k << "=" << cell(v) << "\n";
    for (const auto& [k, v] : res.summary.items()) os << "# summary." << k << "=" << cell(v) << "\n";
    std::vector<std::string> cols = res.columns;
    std::vector<std::vector<ordered_json>> rows = res.rows;
    if (cols.empty()) {
        std::vector<ordered_json> row;
        for (const auto& [k, v] : res.summary.items()) {
            cols.push_back(k);
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\r\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i]);
        os << "\r\n";
    }
}

std::string flag_name(const std::string& tok) {
    if (tok.rfind("--", 0) != 0) return {};
    return tok.substr(2, tok.find('=') == std::string::npos ? std::string::npos : tok.find('=') - 2);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos || line[a] == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        trim(key);
        trim(val);
        if (val.size() >= 2 && (val.front() == '"' || val.front() == '\'') && val.back() == val.front()) {
            val = val.substr(1, val.size() - 2);
        }
        std::replace(key.begin(), key.end(), '_', '-');
        out.emplace_back(key, val);
    }
    return out;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Weighted best approximations and the diagonal flow on unimodular lattices", "wba-lab"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    struct Sub {
        CLI::App* app;
        Result (*fn)(const RunConfig&);
    };
    std::vector<Sub> subs;
    auto add_sub = [&](const char* name, const char* desc, Result (*fn)(const RunConfig&)) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->add_option("--d", c.d, "Dimension d");
        s->add_option("--w", c.weights, "Weights, e.g. 2/3,1/3");
        s->add_option("--out", c.out, "Output path (default stdout)");
        s->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        s->add_option("--config", c.config, "key=value config file");
        s->add_option("--max-bits", c.max_bits, "Precision ceiling in bits");
        subs.push_back({s, fn});
        return s;
    };
    auto theta_opts = [&](CLI::App* s) {
        s->add_option("--theta", c.theta, "Comma-separated rationals, phi or sqrtN")->required();
        s->add_option("--theta-bits", c.theta_bits, "Truncation bits for irrational theta");
    };
    auto sample_opts = [&](CLI::App* s) {
        s->add_option("--seed", c.seed, "Seed")->required();
        s->add_option("--n-theta", c.n_theta, "Number of sampled theta");
        s->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
    };

    {
        auto* s = add_sub("best-approx", "w-best approximation records", cmd_best_approx);
        theta_opts(s);
        s->add_option("--method", c.method, "auto, brute or fast");
        s->add_option("--q-max", c.q_max, "Denominator bound (brute force)");
        s->add_option("--n-records", c.n_records, "Record count (fast)");
        s->add_option("--t-budget", c.t_budget, "Flow time budget (fast)");
    }
    {
        auto* s = add_sub("best-approx-regular", "Regular best approximations", cmd_best_approx_regular);
        theta_opts(s);
        s->add_option("--n-records", c.n_records, "Record count");
        s->add_option("--t-budget", c.t_budget, "Flow time budget");
    }
    {
        auto* s = add_sub("cross-section", "Visits of the theta orbit to S_1", cmd_cross_section);
        theta_opts(s);
        s->add_option("--t-budget", c.t_budget, "Flow time budget");
    }
    {
        auto* s = add_sub("first-return", "First returns to B along the theta orbit", cmd_first_return);
        theta_opts(s);
        s->add_option("--t-budget", c.t_budget, "Flow time budget");
    }
    {
        auto* s = add_sub("levy", "Growth rate of q_n over sampled theta", cmd_levy);
        sample_opts(s);
        s->add_option("--n-records", c.n_records, "Records per theta");
        s->add_option("--theta-bits", c.theta_bits, "Bits of sampled theta");
    }
    {
        auto* s = add_sub("beta-dist", "Distribution of q_{n+1} r_n", cmd_beta_dist);
        sample_opts(s);
        s->add_option("--n-records", c.n_records, "Records per theta");
        s->add_option("--theta-bits", c.theta_bits, "Bits of sampled theta");
        s->add_option("--bins", c.bins, "Histogram bins");
    }
    {
        auto* s = add_sub("mc-measure", "Monte Carlo estimate of the B-fraction of S_1", cmd_mc_measure);
        s->add_option("--seed", c.seed, "Seed")->required();
        s->add_option("--n-samples", c.n_samples, "Samples");
        s->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
        s->add_option("--kappa", c.kappa, "Normalization factor of the Haar measure on E");
    }
    {
        auto* s = add_sub("equidist", "Birkhoff averages along theta orbits", cmd_equidist);
        sample_opts(s);
        s->add_option("--T", c.T, "Comma-separated increasing horizons");
        s->add_option("--dt", c.dt, "Time step");
        s->add_option("--observable", c.observable, "chi_K or chi_C");
        s->add_option("--eps", c.eps, "epsilon of chi_K");
        s->add_option("--z", c.z, "z of chi_C");
    }
    {
        auto* s = add_sub("cusp-scaling", "Orbit time outside K_eps", cmd_cusp_scaling);
        sample_opts(s);
        s->add_option("--T", c.T, "Horizon");
        s->add_option("--dt", c.dt, "Time step");
        s->add_option("--eps-grid", c.eps_grid, "Comma-separated epsilons in (0, 0.5]");
    }
    {
        auto* s = add_sub("lattice-min", "First minima of a_t Lambda", cmd_lattice_min);
        s->add_option("--theta", c.theta, "theta for Lambda_theta");
        s->add_option("--theta-bits", c.theta_bits, "Truncation bits for irrational theta");
        s->add_option("--basis", c.basis, "Columns separated by ';', entries by ','");
        s->add_option("--t", c.t, "Flow time");
    }

    std::vector<std::string> args = raw_args;
    try {
        for (std::size_t i = 0; i < raw_args.size(); ++i) {
            std::string path;
            if (raw_args[i] == "--config" && i + 1 < raw_args.size()) path = raw_args[i + 1];
            if (raw_args[i].rfind("--config=", 0) == 0) path = raw_args[i].substr(9);
            if (path.empty()) continue;
            std::set<std::string> given;
            for (const auto& a : raw_args) given.insert(flag_name(a));
            for (const auto& [k, v] : read_config_file(path)) {
                if (given.count(k) || k == "config") continue;
                args.push_back("--" + k);
                args.push_back(v);
            }
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        CLI::App* active = &app;
        for (auto& s : subs) {
            if (s.app->parsed()) active = s.app;
        }
        err << active->help();
        return kConfigError;
    }

    const Sub* chosen = nullptr;
    for (auto& s : subs) {
        if (s.app->parsed()) chosen = &s;
    }
    c.subcommand = chosen->app->get_name();

    ordered_json config = ordered_json::object();
    for (const CLI::Option* o : chosen->app->get_options()) {
        if (o->get_lnames().empty()) continue;
        const std::string name = o->get_lnames().front();
        if (name == "help" || name == "config" || name == "out") continue;
        config[name] = o->count() ? o->as<std::string>() : o->get_default_str();
    }

    try {
        Result res = chosen->fn(c);
        if (c.out.empty()) {
            write_result(out, c, config, res);
        } else {
            std::ofstream f(c.out, std::ios::binary);
            if (!f) throw ConfigError("cannot open " + c.out);
            write_result(f, c, config, res);
        }
        return kOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n" << chosen->app->help();
        return kConfigError;
    } catch (const PrecisionExhausted& e) {
        err << "precision exhausted: " << e.what() << " (needed " << e.needed_bits() << " bits, ceiling "
            << e.max_bits() << ")\n";
        return kPrecisionExhausted;
    } catch (const UncertifiableComparison& e) {
        err << "uncertifiable comparison: " << e.what();
        if (!e.context().empty()) err << " [" << e.context() << "]";
        err << "\n";
        return kUncertifiable;
    } catch (const AmbiguityBudgetExceeded& e) {
        err << "ambiguity budget exceeded: " << e.what() << "\n";
        return kUncertifiable;
    } catch (const BoundaryAmbiguous& e) {
        err << "boundary ambiguous: " << e.what() << "\n";
        return kUncertifiable;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return kFailure;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace wba::cli
