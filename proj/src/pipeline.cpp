#include "diagpath/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "diagpath/errors.hpp"
#include "diagpath/features.hpp"
#include "diagpath/gram.hpp"
#include "diagpath/io.hpp"
#include "diagpath/parallel.hpp"
#include "diagpath/regression.hpp"
#include "diagpath/rng.hpp"

namespace diagpath::pipeline {

using nlohmann::json;

namespace {

std::uint64_t tag_stream(const std::string& tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

std::size_t parse_count(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size() || s.front() == '-') throw ArgumentError(what + ": not a count: '" + s + "'");
    return static_cast<std::size_t>(v);
}

// Reads the keys of one config block; anything left over is reported as unknown.
class Block {
public:
    Block(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ArgumentError("config: '" + name_ + "' must be an object");
    }
    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ArgumentError("config: " + name_ + "." + key + ": " + e.what());
        }
    }
    void grid(const char* key, GridSpec& out) {
        std::string s;
        get(key, s);
        if (j_.contains(key)) out = GridSpec::parse(s);
    }
    void range(const char* key, double& lo, double& hi) {
        std::vector<double> v{lo, hi};
        get(key, v);
        if (v.size() != 2) throw ArgumentError("config: " + name_ + "." + key + " must be [lo, hi]");
        lo = v[0];
        hi = v[1];
    }
    // Number, or the string "auto" meaning 0.
    void auto_number(const char* key, double& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (v.is_string() && v.get<std::string>() == "auto") out = 0;
        else if (v.is_number()) out = v.get<double>();
        else throw ArgumentError("config: " + name_ + "." + key + " must be a number or \"auto\"");
    }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ArgumentError("config: unknown key " + name_ + "." + it.key());
    }

private:
    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

double population_variance(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double s = 0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / double(v.size());
}

}  // namespace

GridSpec GridSpec::parse(const std::string& text) {
    const auto f = split(text, ':');
    if (f.size() != 4 || (f[3] != "log" && f[3] != "lin"))
        throw ArgumentError("grid '" + text + "': expected lo:hi:count:log or lo:hi:count:lin");
    GridSpec g;
    try {
        g.lo = io::parse_double(f[0]);
        g.hi = io::parse_double(f[1]);
    } catch (const DataError&) {
        throw ArgumentError("grid '" + text + "': bad bound");
    }
    g.count = parse_count(f[2], "grid '" + text + "'");
    g.log = f[3] == "log";
    g.values();  // validates
    return g;
}

std::string GridSpec::str() const {
    return io::format_double(lo) + ":" + io::format_double(hi) + ":" + std::to_string(count) + (log ? ":log" : ":lin");
}

std::vector<double> GridSpec::values() const {
    if (count == 1) {
        if (!(lo > 0) && log) throw ArgumentError("grid: log grid needs positive bounds");
        return {lo};
    }
    return log ? features::log_grid(lo, hi, count) : features::linear_grid(lo, hi, count);
}

void ExperimentConfig::validate() const {
    const auto& s = simulation;
    if (s.n_sims < 1 || s.n_agents < 1 || s.n_steps < 2) throw ArgumentError("config: simulation counts too small");
    if (!(s.t_end > 0)) throw ArgumentError("config: simulation.t_end must be positive");
    if (!(s.softening >= 0)) throw ArgumentError("config: simulation.softening must be nonnegative");
    if (!(s.c_lo > 0 && s.c_hi >= s.c_lo && s.l_lo > 0 && s.l_hi >= s.l_lo))
        throw ArgumentError("config: parameter ranges must be positive intervals");
    swarm::SwarmParams::from_ratios(s.c_lo, s.l_lo, s.mass, s.alpha, s.beta).validate();
    if (persistence.max_dim < 0 || persistence.max_dim > 2) throw ArgumentError("config: persistence.max_dim must be 0..2");
    if (features.mode != "moments" && features.mode != "crocker" && features.mode != "betti-path")
        throw ArgumentError("config: features.mode must be moments, crocker or betti-path");
    if (features.degree < 1) throw ArgumentError("config: features.degree must be >= 1");
    if (features.time_stride < 1) throw ArgumentError("config: features.time_stride must be >= 1");
    if (features.inner_level < 1) throw ArgumentError("config: features.inner_level must be >= 1");
    features.eps_grid.values();
    if (kernel.level < 1) throw ArgumentError("config: kernel.level must be >= 1");
    signature::parse_route(kernel.route);
    if (kernel.tau < 1) throw ArgumentError("config: kernel.tau must be >= 1");
    regression.lambda_grid.values();
    regression.epsilon_grid.values();
    if (regression.folds < 2) throw ArgumentError("config: regression.folds must be >= 2");
    if (trials.n_train + trials.n_test > s.n_sims)
        throw ArgumentError("config: split sizes exceed the corpus size");
    if (trials.n_train < static_cast<std::size_t>(regression.folds) || trials.n_test < 1)
        throw ArgumentError("config: training split smaller than the fold count, or empty test split");
    if (trials.regimes.empty()) throw ArgumentError("config: no regimes");
    std::set<std::string> names;
    for (const auto& r : trials.regimes) {
        bool full = false;
        parse_source(r.train_source, &full);
        parse_source(r.test_source, &full);
        if (!names.insert(r.name).second) throw ArgumentError("config: duplicate regime name " + r.name);
    }
}

std::string ExperimentConfig::feature_map_name() const {
    if (features.mode == "crocker") return "crocker";
    std::string name = features.mode + "+sig" + std::to_string(kernel.level);
    if (kernel.lags > 0) name += "_lags" + std::to_string(kernel.lags);
    if (kernel.normalize) name += "_norm";
    return name;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("config: ") + e.what());
    }
    ExperimentConfig c;
    Block top(j, "config");
    auto sub = [&](const char* key) -> const json* {
        json dummy;
        top.get(key, dummy);
        return j.contains(key) ? &j.at(key) : nullptr;
    };
    if (const json* p = sub("simulation")) {
        Block b(*p, "simulation");
        auto& s = c.simulation;
        b.get("n_sims", s.n_sims);
        b.get("n_agents", s.n_agents);
        b.get("t_end", s.t_end);
        b.get("n_steps", s.n_steps);
        b.range("c_range", s.c_lo, s.c_hi);
        b.range("l_range", s.l_lo, s.l_hi);
        b.get("mass", s.mass);
        b.get("alpha", s.alpha);
        b.get("beta", s.beta);
        b.get("seed", s.seed);
        b.get("reject_displacement", s.reject_displacement);
        b.get("reject_before", s.reject_before);
        b.get("max_attempts", s.max_attempts);
        b.get("softening", s.softening);
        b.get("max_steps", s.max_steps);
        b.finish();
    }
    if (const json* p = sub("persistence")) {
        Block b(*p, "persistence");
        b.get("max_dim", c.persistence.max_dim);
        b.auto_number("threshold", c.persistence.threshold);
        b.auto_number("cap", c.persistence.cap);
        b.get("max_simplices", c.persistence.max_simplices);
        b.finish();
    }
    if (const json* p = sub("features")) {
        Block b(*p, "features");
        b.get("mode", c.features.mode);
        b.get("degree", c.features.degree);
        b.grid("eps_grid", c.features.eps_grid);
        b.get("time_stride", c.features.time_stride);
        b.get("inner_level", c.features.inner_level);
        b.get("count_normalize", c.features.count_normalize);
        b.finish();
    }
    if (const json* p = sub("kernel")) {
        Block b(*p, "kernel");
        b.get("level", c.kernel.level);
        b.get("route", c.kernel.route);
        b.get("normalize", c.kernel.normalize);
        b.get("lags", c.kernel.lags);
        b.get("tau", c.kernel.tau);
        b.finish();
    }
    if (const json* p = sub("regression")) {
        Block b(*p, "regression");
        b.grid("lambda_grid", c.regression.lambda_grid);
        b.grid("epsilon_grid", c.regression.epsilon_grid);
        b.get("folds", c.regression.folds);
        b.get("tolerance", c.regression.tolerance);
        b.get("max_updates", c.regression.max_updates);
        b.finish();
    }
    if (const json* p = sub("trials")) {
        Block b(*p, "trials");
        b.get("n_trials", c.trials.n_trials);
        b.get("n_train", c.trials.n_train);
        b.get("n_test", c.trials.n_test);
        b.get("seed", c.trials.seed);
        json regimes;
        b.get("regimes", regimes);
        if (p->contains("regimes")) {
            if (!regimes.is_array()) throw ArgumentError("config: trials.regimes must be an array");
            c.trials.regimes.clear();
            for (const auto& r : regimes) {
                Block rb(r, "trials.regimes[]");
                Regime reg;
                rb.get("name", reg.name);
                rb.get("train", reg.train_source);
                rb.get("test", reg.test_source);
                rb.finish();
                c.trials.regimes.push_back(reg);
            }
        }
        b.finish();
    }
    top.finish();
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const DataError& e) {
        throw ArgumentError(e.what());
    }
    return parse_config(text);
}

std::string dump_config(const ExperimentConfig& c) {
    json regimes = json::array();
    for (const auto& r : c.trials.regimes)
        regimes.push_back({{"name", r.name}, {"train", r.train_source}, {"test", r.test_source}});
    const auto& s = c.simulation;
    json j = {
        {"simulation",
         {{"n_sims", s.n_sims}, {"n_agents", s.n_agents}, {"t_end", s.t_end}, {"n_steps", s.n_steps},
          {"c_range", {s.c_lo, s.c_hi}}, {"l_range", {s.l_lo, s.l_hi}}, {"mass", s.mass},
          {"alpha", s.alpha}, {"beta", s.beta}, {"seed", s.seed},
          {"reject_displacement", s.reject_displacement}, {"reject_before", s.reject_before},
          {"max_attempts", s.max_attempts}, {"softening", s.softening}, {"max_steps", s.max_steps}}},
        {"persistence",
         {{"max_dim", c.persistence.max_dim},
          {"threshold", c.persistence.threshold > 0 ? json(c.persistence.threshold) : json("auto")},
          {"cap", c.persistence.cap > 0 ? json(c.persistence.cap) : json("auto")},
          {"max_simplices", c.persistence.max_simplices}}},
        {"features",
         {{"mode", c.features.mode}, {"degree", c.features.degree}, {"eps_grid", c.features.eps_grid.str()},
          {"time_stride", c.features.time_stride}, {"inner_level", c.features.inner_level},
          {"count_normalize", c.features.count_normalize}}},
        {"kernel",
         {{"level", c.kernel.level}, {"route", c.kernel.route}, {"normalize", c.kernel.normalize},
          {"lags", c.kernel.lags}, {"tau", c.kernel.tau}}},
        {"regression",
         {{"lambda_grid", c.regression.lambda_grid.str()}, {"epsilon_grid", c.regression.epsilon_grid.str()},
          {"folds", c.regression.folds}, {"tolerance", c.regression.tolerance},
          {"max_updates", c.regression.max_updates}}},
        {"trials",
         {{"n_trials", c.trials.n_trials}, {"n_train", c.trials.n_train}, {"n_test", c.trials.n_test},
          {"seed", c.trials.seed}, {"regimes", regimes}}},
    };
    return j.dump(2) + "\n";
}

std::vector<Simulation> build_corpus(const SimulationConfig& cfg, CorpusStats* stats) {
    const std::size_t max_attempts = cfg.max_attempts ? cfg.max_attempts : 20 * cfg.n_sims;
    swarm::SimulateOptions opts;
    opts.abort_displacement = cfg.reject_displacement;
    opts.abort_cutoff = cfg.reject_before;
    opts.softening = cfg.softening;
    if (cfg.max_steps) opts.tolerances.max_steps = cfg.max_steps;

    std::vector<Simulation> kept;
    CorpusStats st;
    // Attempts run in batches; acceptance follows attempt order, so the corpus
    // does not depend on the thread count.
    while (kept.size() < cfg.n_sims && st.attempts < max_attempts) {
        const std::size_t batch = std::min(cfg.n_sims - kept.size(), max_attempts - st.attempts);
        std::vector<Simulation> sims(batch);
        std::vector<int> status(batch, 0);  // 0 ok, 1 unbounded, 2 integration failure
        parallel_for(batch, [&](std::size_t b) {
            const std::uint64_t attempt = st.attempts + b;
            Simulation& sim = sims[b];
            sim.seed = mix_seed(cfg.seed, attempt);
            Rng rng = make_rng(sim.seed, 7);
            std::uniform_real_distribution<double> uc(cfg.c_lo, cfg.c_hi), ul(cfg.l_lo, cfg.l_hi);
            sim.C = uc(rng);
            sim.ell = ul(rng);
            const auto params = swarm::SwarmParams::from_ratios(sim.C, sim.ell, cfg.mass, cfg.alpha, cfg.beta);
            try {
                sim.traj = swarm::simulate(params, cfg.n_agents, cfg.t_end, cfg.n_steps, sim.seed, opts);
                if (sim.traj.n_steps() != cfg.n_steps ||
                    swarm::is_unbounded(sim.traj, cfg.reject_displacement, cfg.reject_before))
                    status[b] = 1;
            } catch (const IntegrationError&) {
                status[b] = 2;
            }
        });
        for (std::size_t b = 0; b < batch; ++b) {
            if (status[b] == 1) ++st.rejected_unbounded;
            if (status[b] == 2) ++st.rejected_integration;
            if (status[b] == 0 && kept.size() < cfg.n_sims) {
                sims[b].sim_id = kept.size();
                kept.push_back(std::move(sims[b]));
            }
        }
        st.attempts += batch;
    }
    if (stats) *stats = st;
    if (kept.size() < cfg.n_sims)
        throw DataError("corpus: only " + std::to_string(kept.size()) + " bounded simulations after " +
                        std::to_string(st.attempts) + " attempts; raise simulation.max_attempts");
    return kept;
}

swarm::SubsampleScheme parse_source(const std::string& tag, bool* is_full) {
    const auto f = split(tag, ':');
    *is_full = false;
    if (tag == "full") {
        *is_full = true;
        return {};
    }
    if (f.size() == 2 && f[0] == "fixed") return swarm::SubsampleScheme::fixed(parse_count(f[1], "source " + tag));
    if (f.size() == 3 && f[0] == "random") {
        const auto lo = parse_count(f[1], "source " + tag), hi = parse_count(f[2], "source " + tag);
        if (lo < 1 || hi < lo) throw ArgumentError("source " + tag + ": need 1 <= lo <= hi");
        return swarm::SubsampleScheme::random(lo, hi);
    }
    throw ArgumentError("unknown data source '" + tag + "' (use full, fixed:N or random:LO:HI)");
}

swarm::PointCloudSeries source_series(const Simulation& sim, const std::string& source, std::uint64_t seed) {
    bool full = false;
    const auto scheme = parse_source(source, &full);
    if (full) return swarm::full_series(sim.traj);
    return swarm::subsample(sim.traj, scheme, mix_seed(seed, tag_stream(source)));
}

persistence::DiagramPath series_diagrams(const swarm::PointCloudSeries& series, const ExperimentConfig& cfg,
                                         std::uint64_t sim_id, const std::string& scheme) {
    persistence::PersistOptions po;
    po.max_dim = cfg.persistence.max_dim;
    po.threshold = cfg.persistence.threshold;
    po.cap = cfg.persistence.cap;
    po.max_simplices = cfg.persistence.max_simplices;
    if (!cfg.features.count_normalize) return persistence::diagram_path(series, po, sim_id, scheme);

    swarm::PointCloudSeries scaled = series;
    for (auto& c : scaled.clouds) c = features::normalize_by_count(c, std::max<std::size_t>(c.size(), 1), 3);
    auto path = persistence::diagram_path(scaled, po, sim_id, scheme);
    for (std::size_t t = 0; t < path.frames.size(); ++t) {
        const double n = static_cast<double>(std::max<std::size_t>(series.clouds[t].size(), 1));
        for (auto& d : path.frames[t]) d = features::diagram_scale(d, 1.0 / n);
    }
    return path;
}

FeaturePath featurize(const persistence::DiagramPath& path, const ExperimentConfig& cfg) {
    const auto& f = cfg.features;
    if (f.mode == "moments") return features::moment_path(path, f.degree, cfg.persistence.max_dim);
    if (f.mode == "betti-path") return features::betti_signature_path(path, f.eps_grid.values(), f.inner_level);
    return features::crocker_path(path, f.eps_grid.values(), f.time_stride);
}

Eigen::MatrixXd gram(const std::vector<FeaturePath>& rows, const std::vector<FeaturePath>& cols,
                     const ExperimentConfig& cfg, bool symmetric) {
    signature::KernelOptions ko;
    ko.level = cfg.kernel.level;
    ko.route = cfg.features.mode == "crocker" ? signature::Route::kLinear : signature::parse_route(cfg.kernel.route);
    ko.normalize = cfg.kernel.normalize;
    ko.lags = cfg.kernel.lags;
    ko.tau = cfg.kernel.tau;
    return signature::signature_gram(rows, cols, ko, symmetric);
}

std::vector<TrialResult> run_trials(const Eigen::MatrixXd& gram_train, const Eigen::MatrixXd& gram_cross,
                                    const std::vector<double>& C, const std::vector<double>& ell,
                                    const ExperimentConfig& cfg, const Regime& regime) {
    const std::size_t n = C.size();
    if (ell.size() != n || std::size_t(gram_train.rows()) != n || std::size_t(gram_cross.rows()) != n)
        throw ArgumentError("trials: gram and target sizes disagree");
    const auto& tc = cfg.trials;
    if (tc.n_train + tc.n_test > n) throw ArgumentError("trials: split sizes exceed the corpus size");
    const auto lambdas = cfg.regression.lambda_grid.values();
    const auto epsilons = cfg.regression.epsilon_grid.values();
    regression::SvrOptions so;
    so.tolerance = cfg.regression.tolerance;
    so.max_updates = cfg.regression.max_updates;

    std::vector<TrialResult> out(tc.n_trials);
    parallel_for(tc.n_trials, [&](std::size_t t) {
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t seed = mix_seed(tc.seed, t);
        std::vector<Eigen::Index> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng = make_rng(seed, 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const std::vector<Eigen::Index> tr(perm.begin(), perm.begin() + Eigen::Index(tc.n_train));
        const std::vector<Eigen::Index> te(perm.begin() + Eigen::Index(tc.n_train),
                                           perm.begin() + Eigen::Index(tc.n_train + tc.n_test));
        const Eigen::MatrixXd Ktr = gram_train(tr, tr);
        const Eigen::MatrixXd Kte = gram_cross(te, tr);

        TrialResult& res = out[t];
        res.regime = regime.name;
        res.feature_map = cfg.feature_map_name();
        res.trial = t;
        const std::pair<const char*, const std::vector<double>*> targets[] = {{"C", &C}, {"ell", &ell}};
        for (std::size_t p = 0; p < 2; ++p) {
            std::vector<double> ytr, yte;
            for (auto i : tr) ytr.push_back((*targets[p].second)[std::size_t(i)]);
            for (auto i : te) yte.push_back((*targets[p].second)[std::size_t(i)]);
            const auto cv = regression::grid_search_cv(Ktr, ytr, lambdas, epsilons, cfg.regression.folds,
                                                       mix_seed(seed, 1 + p), so);
            auto no_check = so;
            no_check.check_psd = false;
            const auto model = regression::svr_train(Ktr, ytr, cv.best_lambda, cv.best_epsilon, no_check);
            ParameterResult pr;
            pr.parameter = targets[p].first;
            pr.lambda = cv.best_lambda;
            pr.epsilon = cv.best_epsilon;
            pr.mse = regression::mse(regression::svr_predict(model, Kte), yte);
            pr.target_variance = population_variance(yte);
            pr.converged = model.converged;
            if (!std::isfinite(pr.mse)) throw NumericalError("trial " + std::to_string(t) + ": non-finite MSE");
            res.params.push_back(pr);
        }
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });
    return out;
}

std::string results_csv(const std::vector<TrialResult>& results) {
    // one row per trial; each parameter contributes a block of columns
    std::string out = "regime,feature_map,trial";
    if (!results.empty())
        for (const auto& p : results.front().params)
            for (const char* col : {"lambda", "epsilon", "mse", "target_variance", "converged"})
                out += std::string(",") + col + '_' + p.parameter;
    out += '\n';
    for (const auto& r : results) {
        out += r.regime + ',' + r.feature_map + ',' + std::to_string(r.trial);
        for (const auto& p : r.params)
            out += ',' + io::format_double(p.lambda) + ',' + io::format_double(p.epsilon) + ',' +
                   io::format_double(p.mse) + ',' + io::format_double(p.target_variance) + ',' +
                   (p.converged ? "1" : "0");
        out += '\n';
    }
    return out;
}

Quartiles quartiles(std::vector<double> v) {
    if (v.empty()) throw ArgumentError("quartiles: empty sample");
    std::sort(v.begin(), v.end());
    auto at = [&](double p) {
        const double h = p * double(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (h - double(lo)) * (v[hi] - v[lo]);
    };
    return {v.front(), at(0.25), at(0.5), at(0.75), v.back()};
}

BoxplotData emit_boxplot_data(const std::vector<TrialResult>& results, const std::vector<std::string>& groups) {
    if (results.empty()) throw ArgumentError("boxplot: no results");
    BoxplotData out;
    out.long_csv = "regime,feature_map,parameter,trial,mse\n";
    out.summary_csv = "regime,feature_map,parameter,count,min,q1,median,q3,max\n";
    const std::set<std::string> wanted(groups.begin(), groups.end());
    std::map<std::string, bool> seen_group;
    for (const auto& g : groups) seen_group[g] = false;

    // Summary groups keep first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> samples;
    for (const auto& r : results) {
        const std::string group = r.regime + "/" + r.feature_map;
        if (!wanted.empty() && !wanted.count(group)) continue;
        seen_group[group] = true;
        for (const auto& p : r.params) {
            out.long_csv += r.regime + ',' + r.feature_map + ',' + p.parameter + ',' + std::to_string(r.trial) +
                            ',' + io::format_double(p.mse) + '\n';
            const std::string key = r.regime + ',' + r.feature_map + ',' + p.parameter;
            if (!samples.count(key)) order.push_back(key);
            samples[key].push_back(p.mse);
        }
    }
    for (const auto& key : order) {
        const auto q = quartiles(samples[key]);
        out.summary_csv += key + ',' + std::to_string(samples[key].size()) + ',' + io::format_double(q.min) + ',' +
                           io::format_double(q.q1) + ',' + io::format_double(q.median) + ',' +
                           io::format_double(q.q3) + ',' + io::format_double(q.max) + '\n';
    }
    for (const auto& [g, seen] : seen_group)
        if (!seen) out.warnings.push_back("boxplot: group " + g + " has no results; omitted");
    return out;
}

std::vector<TrialResult> run_experiment(const ExperimentConfig& cfg, const std::vector<Simulation>& sims) {
    cfg.validate();
    const std::size_t n = sims.size();
    if (cfg.trials.n_train + cfg.trials.n_test > n)
        throw ArgumentError("experiment: split sizes exceed the corpus size");
    std::vector<TrialResult> out;

    std::vector<double> C(n), ell(n);
    for (std::size_t i = 0; i < n; ++i) C[i] = sims[i].C, ell[i] = sims[i].ell;

    std::map<std::string, std::vector<FeaturePath>> feats;
    auto features_for = [&](const std::string& source) -> const std::vector<FeaturePath>& {
        auto it = feats.find(source);
        if (it != feats.end()) return it->second;
        std::vector<FeaturePath> fs(n);
        parallel_for(n, [&](std::size_t i) {
            const auto series = source_series(sims[i], source, sims[i].seed);
            fs[i] = featurize(series_diagrams(series, cfg, sims[i].sim_id, source), cfg);
        });
        return feats.emplace(source, std::move(fs)).first->second;
    };

    std::map<std::pair<std::string, std::string>, Eigen::MatrixXd> grams;
    auto gram_for = [&](const std::string& row_src, const std::string& col_src) -> const Eigen::MatrixXd& {
        const auto key = std::make_pair(row_src, col_src);
        auto it = grams.find(key);
        if (it != grams.end()) return it->second;
        const auto& rows = features_for(row_src);
        const auto& cols = features_for(col_src);
        return grams.emplace(key, gram(rows, cols, cfg, row_src == col_src)).first->second;
    };

    for (const auto& regime : cfg.trials.regimes) {
        const auto& Ktrain = gram_for(regime.train_source, regime.train_source);
        const auto& Kcross = gram_for(regime.test_source, regime.train_source);
        auto res = run_trials(Ktrain, Kcross, C, ell, cfg, regime);
        out.insert(out.end(), res.begin(), res.end());
    }
    return out;
}

PipelineResult run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    PipelineResult pr;
    pr.simulations = build_corpus(cfg.simulation, &pr.corpus);
    const auto& sims = pr.simulations;
    pr.trials = run_experiment(cfg, sims);

    if (!out_dir.empty()) {
        std::string targets = "sim_id,seed,C,ell\n";
        for (const auto& s : sims)
            targets += std::to_string(s.sim_id) + ',' + std::to_string(s.seed) + ',' + io::format_double(s.C) + ',' +
                       io::format_double(s.ell) + '\n';
        io::atomic_write(out_dir / "targets.csv", targets);
        io::atomic_write(out_dir / "results.csv", results_csv(pr.trials));
        std::string timing = "regime,trial,seconds\n";
        for (const auto& r : pr.trials)
            timing += r.regime + ',' + std::to_string(r.trial) + ',' + io::format_double(r.seconds) + '\n';
        io::atomic_write(out_dir / "timing.csv", timing);
        const auto box = emit_boxplot_data(pr.trials);
        io::atomic_write(out_dir / "boxplot.csv", box.long_csv);
        io::atomic_write(out_dir / "boxplot_summary.csv", box.summary_csv);
        io::atomic_write(out_dir / "config.json", dump_config(cfg));
    }
    return pr;
}

}  // namespace diagpath::pipeline
