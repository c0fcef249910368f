#include "svrcd/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include <openssl/evp.h>

#include "svrcd/errors.hpp"

namespace svrcd {

namespace {

constexpr std::pair<GraphType, std::string_view> kGraphNames[] = {
    {GraphType::bipartite, "bipartite"},
    {GraphType::scale_free, "scale_free"},
    {GraphType::random, "random"},
};

constexpr std::pair<ExperimentMode, std::string_view> kModeNames[] = {
    {ExperimentMode::sweep_lambda1, "sweep-lambda1"}, {ExperimentMode::sweep_lambda2, "sweep-lambda2"},
    {ExperimentMode::sweep_gamma, "sweep-gamma"},     {ExperimentMode::compare, "compare"},
    {ExperimentMode::scalability, "scalability"},     {ExperimentMode::noise, "noise"},
};

// sweep grids
const std::vector<double> kLambda1Grid{0.9, 1.0, 1.1, 1.2, 1.3};
const std::vector<double> kLambda2Grid{0.1, 0.2, 0.3, 0.4, 0.5};
const std::vector<double> kGammaGrid{0.001, 0.002, 0.004, 0.006, 0.008};
const std::vector<std::pair<Index, Index>> kScalabilityGrid{{50, 50}, {50, 100}, {100, 100}, {50, 200}};

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t replicate_seed, std::uint64_t stream)
{
    return splitmix(replicate_seed * 8 + stream);
}

std::string fmt(double v)
{
    std::ostringstream s;
    s << v;
    return s.str();
}

std::string slug(const std::string& label)
{
    std::string out = label;
    for (char& c : out) {
        if (c == '=' || c == ',') c = '_';
    }
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

template <typename Enum, std::size_t N>
Enum parse_name(const std::pair<Enum, std::string_view> (&table)[N], std::string_view s, const char* what)
{
    for (const auto& [value, name] : table) {
        if (name == s) return value;
    }
    std::string allowed;
    for (const auto& [value, name] : table) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "' (expected one of: " + allowed + ")");
}

template <typename Enum, std::size_t N>
std::string name_of(const std::pair<Enum, std::string_view> (&table)[N], Enum v)
{
    for (const auto& [value, name] : table) {
        if (value == v) return std::string(name);
    }
    return "?";
}

} // namespace

std::string to_string(GraphType t) { return name_of(kGraphNames, t); }
std::string to_string(ExperimentMode m) { return name_of(kModeNames, m); }
std::string to_string(Method m) { return m == Method::svrcd ? "svrcd" : "hc"; }

GraphType parse_graph_type(std::string_view s)
{
    if (s == "scale-free") return GraphType::scale_free;
    return parse_name(kGraphNames, s, "graph type");
}

ExperimentMode parse_mode(std::string_view s) { return parse_name(kModeNames, s, "mode"); }

DagGraph make_truth(GraphType type, Index p, std::uint64_t seed)
{
    switch (type) {
    case GraphType::bipartite: return gen_bipartite(p, seed);
    case GraphType::scale_free: return gen_scale_free(p, kDefaultAttachmentPower, seed);
    case GraphType::random: return gen_random_dag(p, p, seed);
    }
    throw ConfigError("unhandled graph type");
}

Instance make_instance(GraphType type, Index n, Index p, double noise, std::uint64_t seed, int replicate)
{
    const std::uint64_t rep_seed = seed + static_cast<std::uint64_t>(replicate);
    auto truth = make_truth(type, p, rep_seed);
    const auto spec = VariableSpec::binary(p);
    const auto cpds = gen_true_cpds(truth, spec, {}, stream_seed(rep_seed, 1));
    auto data = sample_dataset(truth, cpds, n, stream_seed(rep_seed, 2));
    if (noise > 0.0) data = inject_noise(data, noise, stream_seed(rep_seed, 3));
    return {std::move(truth), std::move(data)};
}

// ---- configuration ----------------------------------------------------------

void validate(const ExperimentConfig& cfg)
{
    validate(cfg.hp);
    if (cfg.p < 2) throw ConfigError("p must be at least 2");
    if (cfg.n < 1) throw ConfigError("n must be at least 1");
    if (cfg.replicates < 1) throw ConfigError("replicates must be at least 1");
    if (cfg.max_parents < 0) throw ConfigError("max_parents must be >= 0");
    if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
    if (cfg.mode == ExperimentMode::noise && cfg.noise.empty()) throw ConfigError("noise mode needs noise fractions");
    for (double q : cfg.noise) {
        if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("noise fraction " + fmt(q) + " is outside [0, 1]");
    }
    if (cfg.graph_type == GraphType::random && cfg.p < 3) {
        throw ConfigError("random graphs with p edges need p >= 3");
    }
}

nlohmann::json to_json(const ExperimentConfig& cfg)
{
    nlohmann::json j;
    j["graph_type"] = to_string(cfg.graph_type);
    j["p"] = cfg.p;
    j["n"] = cfg.n;
    j["replicates"] = cfg.replicates;
    j["lambda1"] = cfg.hp.lambda1;
    j["lambda2"] = cfg.hp.lambda2;
    j["gamma"] = cfg.hp.gamma;
    j["m"] = cfg.hp.m;
    j["sweeps"] = cfg.hp.sweeps;
    j["tol"] = cfg.hp.tol;
    j["tau"] = cfg.hp.tau;
    j["noise"] = cfg.noise;
    j["seed"] = cfg.seed;
    j["out"] = cfg.out;
    j["mode"] = to_string(cfg.mode);
    j["max_parents"] = cfg.max_parents;
    j["threads"] = cfg.threads;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig cfg)
{
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "graph_type") cfg.graph_type = parse_graph_type(value.get<std::string>());
            else if (key == "p") cfg.p = value.get<Index>();
            else if (key == "n") cfg.n = value.get<Index>();
            else if (key == "replicates") cfg.replicates = value.get<int>();
            else if (key == "lambda1") cfg.hp.lambda1 = value.get<double>();
            else if (key == "lambda2") cfg.hp.lambda2 = value.get<double>();
            else if (key == "gamma") cfg.hp.gamma = value.get<double>();
            else if (key == "m") cfg.hp.m = value.get<Index>();
            else if (key == "sweeps") cfg.hp.sweeps = value.get<int>();
            else if (key == "tol") cfg.hp.tol = value.get<double>();
            else if (key == "tau") cfg.hp.tau = value.get<double>();
            else if (key == "noise") cfg.noise = value.is_array() ? value.get<std::vector<double>>()
                                                                  : std::vector<double>{value.get<double>()};
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "out") cfg.out = value.get<std::string>();
            else if (key == "mode") cfg.mode = parse_mode(value.get<std::string>());
            else if (key == "max_parents") cfg.max_parents = value.get<int>();
            else if (key == "threads") cfg.threads = value.get<int>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j, std::move(base));
}

std::vector<Setting> expand_settings(const ExperimentConfig& cfg)
{
    std::vector<Setting> out;
    const auto base = [&](std::string label) {
        Setting s;
        s.label = std::move(label);
        s.n = cfg.n;
        s.p = cfg.p;
        s.hp = cfg.hp;
        return s;
    };
    switch (cfg.mode) {
    case ExperimentMode::sweep_lambda1:
        for (double v : kLambda1Grid) {
            out.push_back(base("lambda1=" + fmt(v)));
            out.back().hp.lambda1 = v;
        }
        break;
    case ExperimentMode::sweep_lambda2:
        for (double v : kLambda2Grid) {
            out.push_back(base("lambda2=" + fmt(v)));
            out.back().hp.lambda2 = v;
        }
        break;
    case ExperimentMode::sweep_gamma:
        for (double v : kGammaGrid) {
            out.push_back(base("gamma=" + fmt(v)));
            out.back().hp.gamma = v;
        }
        break;
    case ExperimentMode::compare:
        out.push_back(base("svrcd"));
        out.push_back(base("hc"));
        out.back().method = Method::hc;
        break;
    case ExperimentMode::scalability:
        for (auto [n, p] : kScalabilityGrid) {
            out.push_back(base("n=" + std::to_string(n) + ",p=" + std::to_string(p)));
            out.back().n = n;
            out.back().p = p;
        }
        break;
    case ExperimentMode::noise:
        for (double q : cfg.noise) {
            out.push_back(base("noise=" + fmt(q)));
            out.back().noise = q;
        }
        break;
    }
    return out;
}

// ---- experiment runner ------------------------------------------------------------

namespace {

using InstanceKey = std::tuple<Index, Index, double, int>;  // n, p, noise, replicate

struct Job
{
    std::size_t setting;
    int replicate;
};

struct JobOutput
{
    MetricsReport report;
    double seconds = 0.0;
};

std::string instance_stem(const InstanceKey& k)
{
    auto [n, p, q, r] = k;
    std::string stem = "n" + std::to_string(n) + "_p" + std::to_string(p);
    if (q > 0.0) stem += "_noise" + fmt(q);
    return stem + "_rep" + std::to_string(r);
}

} // namespace

RunRecord run_experiment(const ExperimentConfig& cfg, std::ostream* log)
{
    validate(cfg);
    const auto settings = expand_settings(cfg);
    const bool write = !cfg.out.empty();
    const std::filesystem::path root(cfg.out);
    if (write) {
        for (const char* sub : {"data", "truth", "estimated", "traces"}) std::filesystem::create_directories(root / sub);
    }

    // Datasets first, serially, so that sharing between settings is explicit.
    std::map<InstanceKey, Instance> instances;
    for (const auto& s : settings) {
        for (int r = 0; r < cfg.replicates; ++r) {
            const InstanceKey key{s.n, s.p, s.noise, r};
            if (instances.count(key)) continue;
            auto inst = make_instance(cfg.graph_type, s.n, s.p, s.noise, cfg.seed, r);
            if (write) {
                const auto stem = instance_stem(key);
                write_dataset_csv(inst.data, root / "data" / (stem + ".csv"));
                write_edge_list(inst.truth, root / "truth" / (stem + ".edges"));
            }
            instances.emplace(key, std::move(inst));
        }
    }

    std::vector<Job> jobs;
    for (std::size_t s = 0; s < settings.size(); ++s) {
        for (int r = 0; r < cfg.replicates; ++r) jobs.push_back({s, r});
    }
    std::vector<JobOutput> outputs(jobs.size());
    std::mutex log_mutex;

    const auto run_job = [&](std::size_t idx) {
        const auto& job = jobs[idx];
        const auto& s = settings[job.setting];
        const InstanceKey key{s.n, s.p, s.noise, job.replicate};
        const auto& inst = instances.at(key);
        const std::uint64_t rep_seed = cfg.seed + static_cast<std::uint64_t>(job.replicate);
        const std::string stem = slug(s.label) + "_rep" + std::to_string(job.replicate);

        const auto start = std::chrono::steady_clock::now();
        DagGraph estimate;
        std::ostringstream trace;
        trace.precision(12);
        if (s.method == Method::svrcd) {
            RunOptions options;
            options.trace_csv = &trace;
            estimate = run(inst.data, s.hp, stream_seed(rep_seed, 4), options).graph;
        } else {
            estimate = hc_baseline(inst.data, cfg.max_parents);
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        outputs[idx].report = evaluate(estimate, inst.truth);
        outputs[idx].seconds = seconds;
        if (write) {
            std::ostringstream edges;
            write_edge_list(estimate, edges);
            write_atomic(root / "estimated" / (stem + ".edges"), edges.str());
            if (s.method == Method::svrcd) write_atomic(root / "traces" / (stem + ".csv"), trace.str());
        }
        if (log) {
            std::lock_guard lock(log_mutex);
            *log << s.label << " replicate " << job.replicate << ": SHD " << outputs[idx].report.SHD << ", JI "
                 << outputs[idx].report.JI << " (" << std::fixed << std::setprecision(2) << seconds << " s)\n"
                 << std::defaultfloat << std::setprecision(6) << std::flush;
        }
    };

    if (cfg.threads <= 1 || jobs.size() <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::exception_ptr error;
        std::vector<std::thread> pool;
        const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), jobs.size());
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < jobs.size(); i = next++) {
                    try {
                        run_job(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    RunRecord record;
    record.config = to_json(cfg);

    std::ostringstream metrics;
    std::ostringstream aggregate_csv;
    std::ostringstream variance_csv;
    std::ostringstream timing;
    for (auto* s : {&metrics, &aggregate_csv, &variance_csv}) s->precision(10);
    const std::string keys = "setting,method,n,p,lambda1,lambda2,gamma,noise,";
    metrics << keys << "replicate," << kMetricsHeader << '\n';
    aggregate_csv << keys << kMetricsHeader << '\n';
    variance_csv << keys << kMetricsHeader << '\n';
    timing << "setting,replicate,seconds\n";

    nlohmann::json summaries = nlohmann::json::array();
    for (std::size_t s = 0; s < settings.size(); ++s) {
        SettingResult result;
        result.setting = settings[s];
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (jobs[i].setting != s) continue;
            result.reports.push_back(outputs[i].report);
            result.seconds.push_back(outputs[i].seconds);
        }
        result.summary = aggregate(result.reports);

        const auto& st = result.setting;
        std::ostringstream prefix;
        prefix.precision(10);
        prefix << '"' << st.label << "\"," << to_string(st.method) << ',' << st.n << ',' << st.p << ','
               << st.hp.lambda1 << ',' << st.hp.lambda2 << ',' << st.hp.gamma << ',' << st.noise << ',';
        for (std::size_t r = 0; r < result.reports.size(); ++r) {
            metrics << prefix.str() << r << ',';
            write_metrics_row(metrics, result.reports[r]);
            metrics << '\n';
            timing << '"' << st.label << "\"," << r << ',' << result.seconds[r] << '\n';
        }
        aggregate_csv << prefix.str();
        write_metrics_row(aggregate_csv, result.summary.mean);
        aggregate_csv << '\n';
        variance_csv << prefix.str();
        write_metrics_row(variance_csv, result.summary.variance);
        variance_csv << '\n';

        const auto as_json = [](const MetricsReport& m) {
            return nlohmann::json{{"P", m.P},     {"E", m.E},     {"R", m.R},     {"M", m.M},   {"FP", m.FP},
                                  {"TPR", m.TPR}, {"FDR", m.FDR}, {"SHD", m.SHD}, {"JI", m.JI}, {"s0", m.s0}};
        };
        summaries.push_back({{"setting", st.label},
                             {"method", to_string(st.method)},
                             {"replicates", result.reports.size()},
                             {"mean", as_json(result.summary.mean)},
                             {"variance", as_json(result.summary.variance)}});
        record.results.push_back(std::move(result));
    }

    const std::string config_text = record.config.dump(2) + "\n";
    // where the files go and how many workers ran them do not change any result
    auto inputs = record.config;
    inputs.erase("out");
    inputs.erase("threads");
    record.hash = content_hash(inputs.dump() + "\n" + metrics.str());

    if (write) {
        write_atomic(root / "config.json", config_text);
        write_atomic(root / "metrics.csv", metrics.str());
        write_atomic(root / "aggregate.csv", aggregate_csv.str());
        write_atomic(root / "variance.csv", variance_csv.str());
        write_atomic(root / "timing.csv", timing.str());
        const nlohmann::json run_json{{"config", record.config}, {"hash", record.hash}, {"settings", summaries}};
        write_atomic(root / "run.json", run_json.dump(2) + "\n");
    }
    return record;
}

// ---- hill-climbing baseline -----------------------------------------------------

double bic_family_score(const Dataset& d, Index child, const std::vector<Index>& parents)
{
    const Index n = d.rows();
    const auto levels = static_cast<std::uint64_t>(d.spec().levels(child));
    double configs = 1.0;
    for (Index j : parents) configs *= d.spec().levels(j);
    const double penalty = 0.5 * std::log(static_cast<double>(std::max<Index>(n, 1))) *
                           static_cast<double>(levels - 1) * configs;
    if (n == 0) return -penalty;

    std::vector<std::uint64_t> keys(static_cast<std::size_t>(n));
    for (Index h = 0; h < n; ++h) {
        std::uint64_t config = 0;
        for (Index j : parents) config = config * static_cast<std::uint64_t>(d.spec().levels(j)) + d(h, j);
        keys[static_cast<std::size_t>(h)] = config * levels + static_cast<std::uint64_t>(d(h, child));
    }
    std::sort(keys.begin(), keys.end());

    double ll = 0.0;
    std::size_t a = 0;
    while (a < keys.size()) {
        const std::uint64_t config = keys[a] / levels;
        std::size_t b = a;
        while (b < keys.size() && keys[b] / levels == config) ++b;
        const double total = static_cast<double>(b - a);
        for (std::size_t c = a; c < b;) {
            std::size_t e = c;
            while (e < b && keys[e] == keys[c]) ++e;
            const double count = static_cast<double>(e - c);
            ll += count * std::log(count / total);
            c = e;
        }
        a = b;
    }
    return ll - penalty;
}

namespace {

bool reaches_without(const DagGraph& g, Index from, Index to, Index skip_from, Index skip_to)
{
    std::vector<char> seen(static_cast<std::size_t>(g.size()), 0);
    std::vector<Index> stack{from};
    seen[static_cast<std::size_t>(from)] = 1;
    while (!stack.empty()) {
        const Index v = stack.back();
        stack.pop_back();
        for (Index w : g.children(v)) {
            if (v == skip_from && w == skip_to) continue;
            if (w == to) return true;
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                stack.push_back(w);
            }
        }
    }
    return false;
}

std::vector<Index> with(std::vector<Index> v, Index x)
{
    v.insert(std::lower_bound(v.begin(), v.end(), x), x);
    return v;
}

std::vector<Index> without(std::vector<Index> v, Index x)
{
    v.erase(std::find(v.begin(), v.end(), x));
    return v;
}

} // namespace

DagGraph hc_baseline(const Dataset& d, int max_parents)
{
    if (max_parents < 0) throw ConfigError("max_parents must be >= 0");
    const Index p = d.cols();
    constexpr double kNone = -std::numeric_limits<double>::infinity();
    constexpr double kMinGain = 1e-9;

    DagGraph g(p);
    std::vector<std::vector<Index>> parents(static_cast<std::size_t>(p));
    std::vector<double> score(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) score[static_cast<std::size_t>(i)] = bic_family_score(d, i, {});

    // delta(i, j): score change of toggling parent j of child i under the current parents
    Eigen::MatrixXd delta = Eigen::MatrixXd::Constant(p, p, kNone);
    std::vector<char> stale(static_cast<std::size_t>(p), 1);
    const auto refresh = [&](Index i) {
        const auto& pa = parents[static_cast<std::size_t>(i)];
        for (Index j = 0; j < p; ++j) {
            if (j == i) continue;
            if (g.has_edge(j, i)) {
                delta(i, j) = bic_family_score(d, i, without(pa, j)) - score[static_cast<std::size_t>(i)];
            } else if (static_cast<int>(pa.size()) < max_parents) {
                delta(i, j) = bic_family_score(d, i, with(pa, j)) - score[static_cast<std::size_t>(i)];
            } else {
                delta(i, j) = kNone;
            }
        }
        stale[static_cast<std::size_t>(i)] = 0;
    };
    const auto set_parents = [&](Index i, std::vector<Index> pa) {
        score[static_cast<std::size_t>(i)] = bic_family_score(d, i, pa);
        parents[static_cast<std::size_t>(i)] = std::move(pa);
        stale[static_cast<std::size_t>(i)] = 1;
    };

    enum class Move { add, remove, reverse };
    for (;;) {
        for (Index i = 0; i < p; ++i) {
            if (stale[static_cast<std::size_t>(i)]) refresh(i);
        }
        const auto pm = path_matrix(g);
        double best = kMinGain;
        Move move = Move::add;
        Index best_from = -1;
        Index best_to = -1;
        for (Index i = 0; i < p; ++i) {
            for (Index j = 0; j < p; ++j) {
                if (j == i) continue;
                if (!g.has_edge(j, i)) {
                    if (delta(i, j) > best && !pm(i, j)) {
                        best = delta(i, j);
                        move = Move::add;
                        best_from = j;
                        best_to = i;
                    }
                    continue;
                }
                if (delta(i, j) > best) {
                    best = delta(i, j);
                    move = Move::remove;
                    best_from = j;
                    best_to = i;
                }
                // j -> i becomes i -> j
                const double rev = delta(i, j) + delta(j, i);
                if (delta(j, i) != kNone && rev > best && !reaches_without(g, j, i, j, i)) {
                    best = rev;
                    move = Move::reverse;
                    best_from = j;
                    best_to = i;
                }
            }
        }
        if (best_from < 0) break;

        const Index j = best_from;
        const Index i = best_to;
        switch (move) {
        case Move::add:
            g.add_edge(j, i);
            set_parents(i, with(parents[static_cast<std::size_t>(i)], j));
            break;
        case Move::remove:
            g.remove_edge(j, i);
            set_parents(i, without(parents[static_cast<std::size_t>(i)], j));
            break;
        case Move::reverse:
            g.remove_edge(j, i);
            g.add_edge(i, j);
            set_parents(i, without(parents[static_cast<std::size_t>(i)], j));
            set_parents(j, with(parents[static_cast<std::size_t>(j)], i));
            break;
        }
    }
    return g;
}

// ---- hashing ----------------------------------------------------------------------

std::string content_hash(std::string_view content)
{
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw Error("cannot allocate a hash context");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                    EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &length) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw Error("SHA-1 computation failed");
    std::ostringstream hex;
    for (unsigned int k = 0; k < length; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[k]);
    return hex.str();
}

} // namespace svrcd
