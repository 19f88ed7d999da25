#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "qtrunc/cyclotomic.hpp"
#include "qtrunc/errors.hpp"
#include "qtrunc/qgh_metric.hpp"

namespace qtrunc::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSchema = "qtrunc.result/1";

const std::map<std::string, std::set<std::string>>& allowed_keys()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"group", {"id", "generators", "labels"}},
        {"lipnorm", {"family", "s", "window", "search_window"}},
        {"kernel", {"family"}},
        {"levels", {"min", "max"}},
        {"run", {"seed", "workers", "samples", "budget", "output"}},
        {"report", {"inputs"}},
    };
    return keys;
}

const std::set<std::string> kKernelFamilies{"auto", "fejer", "folner-ball", "counit", "delta"};

std::string trim(std::string s)
{
    auto ws = [](unsigned char c) { return std::isspace(c); };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }
std::string num(const std::optional<Rational>& r) { return r ? rational_to_string(*r) : std::string(); }
std::string flag(bool b) { return b ? "true" : "false"; }

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s)
        q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

[[noreturn]] void invalid(const fs::path& origin, const std::string& what)
{
    throw ValidationError(fmt::format("{}: {}", origin.string(), what));
}

// ---------------------------------------------------------------------------
// per-point context; each worker builds its own group objects

struct Context
{
    GroupPtr group;
    FiniteGroupPtr finite;
    LipNormSpec lip;
};

bool integers(const Group& g) { return g.id().family == Family::FreeAbelian && g.id().parameter == 1; }

FiniteGroupPtr finite_data(const ExperimentConfig& cfg)
{
    return FiniteGroupData::load(cfg.group, cfg.generators);
}

Context context(const ExperimentConfig& cfg)
{
    Context c;
    const LipFamily fam = parse_lip_family(cfg.lipnorm);
    if (fam == LipFamily::ClassicalLipschitz) {
        c.finite = finite_data(cfg);
        c.group = c.finite->group();
        c.lip = LipNormSpec::classical_lipschitz(c.finite);
        return c;
    }
    c.group = make_group(cfg.group, cfg.generators);
    switch (fam) {
    case LipFamily::WeightedL1: c.lip = LipNormSpec::weighted_l1(c.group); break;
    case LipFamily::Sobolev: c.lip = LipNormSpec::sobolev(c.group, cfg.s, cfg.window); break;
    case LipFamily::DiracWordLength: c.lip = LipNormSpec::dirac_word_length(c.group, cfg.window); break;
    case LipFamily::DiracCircle: c.lip = LipNormSpec::dirac_circle(c.group, cfg.window); break;
    case LipFamily::ClassicalLipschitz: break;
    }
    return c;
}

std::string resolved_kernel(const ExperimentConfig& cfg, const Group& g)
{
    if (cfg.kernel != "auto")
        return cfg.kernel;
    return integers(g) ? "fejer" : "folner-ball";
}

// Kernel with parameter n: Fejer order n, Folner ball radius n.
PositiveDefiniteKernel kernel_with_parameter(const std::string& family, const GroupPtr& g, int n)
{
    if (family == "fejer") {
        if (!integers(*g))
            throw PreconditionError("the fejer kernel family is defined on Z only");
        return fejer_kernel(g, n);
    }
    if (family == "folner-ball")
        return folner_ball_kernel(g, n);
    if (family == "counit")
        return counit_kernel(g);
    return folner_kernel(g, {g->identity()}, "delta");
}

// Kernel supported in ball(N): phi_{N+1} on Z, ball(N/2) otherwise.
PositiveDefiniteKernel kernel_for_level(const std::string& family, const GroupPtr& g, int level)
{
    if (family == "fejer")
        return kernel_with_parameter(family, g, level + 1);
    if (family == "folner-ball")
        return kernel_with_parameter(family, g, level / 2);
    return kernel_with_parameter(family, g, 0);
}

AlgebraElement random_self_adjoint(const GroupPtr& gp, int radius, std::mt19937_64& rng)
{
    const Group& g = *gp;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    AlgebraElement a(gp);
    for (const auto& x : g.ball_index(radius)->elements) {
        GroupElement xi = g.inverse(x);
        if (xi < x)
            continue;
        Complex c(u(rng), xi == x ? 0.0 : u(rng));
        a.add(x, c);
        if (xi != x)
            a.add(xi, std::conj(c));
    }
    return a;
}

std::mt19937_64 point_rng(std::uint64_t seed, int point)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(point)};
    return std::mt19937_64(seq);
}

struct Point
{
    std::vector<std::vector<std::string>> rows;
    nlohmann::json certificates = nlohmann::json::array();
};

template <class F>
std::vector<Point> parallel_map(std::size_t n, int workers, F f)
{
    std::vector<Point> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                out[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t count = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < count; ++t)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

// --- commands ---------------------------------------------------------------

using Rows = std::vector<std::vector<std::string>>;

void collect(ResultRecord& rec, std::vector<Point>& points)
{
    for (auto& p : points) {
        for (auto& r : p.rows)
            rec.rows.push_back(std::move(r));
        for (auto& c : p.certificates)
            rec.certificates.push_back(std::move(c));
    }
}

void cmd_lipnorm(ResultRecord& rec, const ExperimentConfig& cfg, std::uint64_t seed, int workers)
{
    rec.columns = {"level", "sample", "lower", "upper", "window", "method"};
    const auto levels = cfg.levels();
    const bool classical = parse_lip_family(cfg.lipnorm) == LipFamily::ClassicalLipschitz;
    auto points = parallel_map(levels.size(), classical ? 1 : workers, [&](std::size_t i) {
        Point p;
        const int n = levels[i];
        auto ctx = context(cfg);
        auto rng = point_rng(seed, n);
        for (int k = 0; k < cfg.samples; ++k) {
            NormEstimate est;
            if (classical) {
                std::uniform_int_distribution<int> v(-9, 9);
                std::vector<Cyclotomic> vals;
                for (std::size_t x = 0; x < ctx.finite->order(); ++x)
                    vals.emplace_back(Rational(v(rng)));
                est = lip_eval(ctx.lip, FunctionOnG(ctx.finite, vals));
            } else {
                est = lip_eval(ctx.lip, random_self_adjoint(ctx.group, n, rng));
            }
            p.rows.push_back({std::to_string(n), std::to_string(k), num(est.lower), num(est.upper),
                              std::to_string(est.window), est.method});
        }
        return p;
    });
    collect(rec, points);
}

void cmd_fejer_sweep(ResultRecord& rec, const ExperimentConfig& cfg, int workers)
{
    rec.columns = {"n", "kernel", "epsilon", "exact", "lower", "gap", "method", "level_N", "window", "window_relative"};
    const auto levels = cfg.levels();
    auto points = parallel_map(levels.size(), workers, [&](std::size_t i) {
        Point p;
        const int n = levels[i];
        auto ctx = context(cfg);
        auto phi = kernel_with_parameter(resolved_kernel(cfg, *ctx.group), ctx.group, n);
        auto c = epsilon_of_kernel(phi, ctx.lip, cfg.search_window);
        p.rows.push_back({std::to_string(n), c.kernel, num(c.epsilon), num(c.exact), num(c.lower), num(c.gap), c.method,
                          std::to_string(c.level_N), std::to_string(c.window), flag(c.window_relative)});
        auto j = c.to_json(*ctx.group);
        j["n"] = n;
        p.certificates.push_back(j);
        return p;
    });
    collect(rec, points);
}

void cmd_distq(ResultRecord& rec, const ExperimentConfig& cfg, std::uint64_t seed, int workers)
{
    rec.columns = {"level", "kernel", "upper", "lower", "gap", "upper_exact", "lower_exact", "max_violation", "method"};
    const auto levels = cfg.levels();
    auto points = parallel_map(levels.size(), workers, [&](std::size_t i) {
        Point p;
        const int n = levels[i];
        auto ctx = context(cfg);
        auto phi = kernel_for_level(resolved_kernel(cfg, *ctx.group), ctx.group, n);
        DistqOptions opt;
        opt.samples = static_cast<std::size_t>(cfg.samples);
        opt.seed = seed + static_cast<std::uint64_t>(n);
        opt.radius.seed = seed;
        auto c = distq_certificate(TruncationSystem::group_algebra(ctx.group, n), phi, ctx.lip, opt);
        p.rows.push_back({std::to_string(c.level), c.kernel, num(c.upper), num(c.lower), num(c.gap), num(c.upper_exact),
                          num(c.lower_exact), num(c.hypothesis.max_violation), c.epsilon.method});
        p.certificates.push_back(c.to_json(*ctx.group));
        return p;
    });
    collect(rec, points);
}

// l1 distance on the circle between 0 and the Fejer density, by the midpoint rule.
double fejer_transport_quadrature(int n, long points)
{
    double s = 0.0;
    for (long j = 0; j < points; ++j) {
        const double t = -std::numbers::pi + 2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(points);
        double f = 1.0;
        for (int k = 1; k < n; ++k)
            f += 2.0 * (1.0 - static_cast<double>(k) / n) * std::cos(k * t);
        s += std::abs(t) * f;
    }
    return s / static_cast<double>(points);
}

std::size_t bfs_ball_size(const Group& g, int n)
{
    std::set<GroupElement> seen{g.identity()};
    std::vector<GroupElement> frontier{g.identity()};
    for (int r = 0; r < n; ++r) {
        std::vector<GroupElement> next;
        for (const auto& x : frontier)
            for (const auto& s : g.id().generators) {
                GroupElement y = g.multiply(x, s);
                if (seen.insert(y).second)
                    next.push_back(y);
            }
        frontier = std::move(next);
    }
    return seen.size();
}

void cmd_oracle(ResultRecord& rec, const ExperimentConfig& cfg, int workers)
{
    rec.columns = {"check", "level", "value", "oracle", "abs_error"};
    const auto levels = cfg.levels();
    auto points = parallel_map(levels.size(), workers, [&](std::size_t i) {
        Point p;
        const int n = levels[i];
        auto g = make_group(cfg.group, cfg.generators);
        auto row = [&](const std::string& check, double v, double o) {
            p.rows.push_back({check, std::to_string(n), num(v), num(o), num(std::abs(v - o))});
        };
        row("ball-size", static_cast<double>(g->enumerate_ball(n).size()), static_cast<double>(bfs_ball_size(*g, n)));
        const LipFamily fam = parse_lip_family(cfg.lipnorm);
        if (integers(*g) && n >= 1 && (fam == LipFamily::WeightedL1 || fam == LipFamily::DiracCircle)) {
            auto ctx = context(cfg);
            auto c = epsilon_of_kernel(fejer_kernel(ctx.group, n), ctx.lip);
            if (fam == LipFamily::WeightedL1)
                row("fejer-epsilon", c.epsilon, 1.0 / n);
            else
                row("fejer-transport", c.epsilon, fejer_transport_quadrature(n, 200000));
        }
        return p;
    });
    collect(rec, points);
}

void cmd_states(ResultRecord& rec, const ExperimentConfig& cfg, int workers)
{
    rec.columns = {"i", "j", "state_i", "state_j", "value", "lower", "gap", "exact", "method"};
    const bool classical = parse_lip_family(cfg.lipnorm) == LipFamily::ClassicalLipschitz;
    std::size_t count = 0;
    if (classical) {
        count = finite_data(cfg)->order();
        workers = 1;
    } else {
        count = cfg.levels().size() + 1;
    }
    const auto levels = cfg.levels();
    const int sys_level = cfg.search_window >= 0 ? cfg.search_window : (levels.empty() ? 0 : levels.back());

    struct Net
    {
        Context ctx;
        std::vector<StateModel> states;
        std::optional<TruncationSystem> sys;
    };
    auto build = [&]() {
        Net net{context(cfg), {}, std::nullopt};
        if (classical) {
            std::set<std::string> labels;
            for (const auto& l : split(cfg.labels, ','))
                labels.insert(l);
            if (labels.empty())
                for (const auto& l : net.ctx.finite->labels())
                    labels.insert(l);
            auto s = make_label_set(*net.ctx.finite, labels);
            net.sys = TruncationSystem::classical_system(net.ctx.finite, s,
                                                         filtration_sets(*net.ctx.finite, s, 0).stabilization_level);
            for (std::size_t x = 0; x < net.ctx.finite->order(); ++x)
                net.states.push_back(StateModel::point_mass(net.ctx.finite, x));
        } else {
            net.sys = TruncationSystem::group_algebra(net.ctx.group, sys_level);
            const auto fam = resolved_kernel(cfg, *net.ctx.group);
            for (int n : levels)
                net.states.push_back(StateModel::from_kernel(kernel_with_parameter(fam, net.ctx.group, n)));
            net.states.push_back(StateModel::from_kernel(counit_kernel(net.ctx.group), "counit"));
        }
        return net;
    };
    auto points = parallel_map(count, workers, [&](std::size_t i) {
        Point p;
        auto net = build();
        for (std::size_t j = 0; j < net.states.size(); ++j) {
            auto m = state_metric(net.states[i], net.states[j], net.ctx.lip, *net.sys);
            p.rows.push_back({std::to_string(i), std::to_string(j), net.states[i].describe(), net.states[j].describe(),
                              num(m.value), num(m.lower), num(m.gap), num(m.exact), m.method});
        }
        return p;
    });
    collect(rec, points);
}

void cmd_fusion(ResultRecord& rec, const ExperimentConfig& cfg)
{
    rec.columns = {"gamma", "beta", "constituent", "multiplicity"};
    auto g = finite_data(cfg);
    const auto labels = g->labels();
    for (const auto& a : labels)
        for (const auto& b : labels)
            for (const auto& [c, m] : fusion_decompose(*g, a, b))
                if (m != 0)
                    rec.rows.push_back({a, b, c, std::to_string(m)});
    std::set<std::string> gen;
    for (const auto& l : split(cfg.labels, ','))
        gen.insert(l);
    if (gen.empty())
        return;
    auto s = make_label_set(*g, gen);
    for (int n : cfg.levels()) {
        auto f = filtration_sets(*g, s, n);
        rec.certificates.push_back({{"level", n},
                                    {"labels", std::vector<std::string>(f.set.labels.begin(), f.set.labels.end())},
                                    {"stabilization_level", f.stabilization_level}});
    }
}

void write_file(const fs::path& p, const std::string& content)
{
    fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw ResourceError("cannot write " + p.string());
    f << content;
}

std::string read_file(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    if (!f)
        throw ValidationError(p.string() + ": cannot read file");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path cache_dir(const fs::path& out)
{
    if (const char* env = std::getenv("QTRUNC_CACHE_DIR"); env && *env)
        return fs::path(env);
    return out / ".qtrunc-cache";
}

}  // namespace

// ---------------------------------------------------------------------------
// config

std::vector<int> ExperimentConfig::levels() const
{
    std::vector<int> out;
    for (int n = level_min; n <= level_max; ++n)
        out.push_back(n);
    return out;
}

std::string ExperimentConfig::canonical() const
{
    std::vector<std::string> lines{
        "group.id=" + group,
        "group.generators=" + generators,
        "group.labels=" + labels,
        "lipnorm.family=" + lipnorm,
        "lipnorm.s=" + num(s),
        "lipnorm.window=" + std::to_string(window),
        "lipnorm.search_window=" + std::to_string(search_window),
        "kernel.family=" + kernel,
        "levels.min=" + std::to_string(level_min),
        "levels.max=" + std::to_string(level_max),
        "run.samples=" + std::to_string(samples),
        "run.budget=" + std::to_string(budget),
    };
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines)
        out += l + "\n";
    return out;
}

ExperimentConfig parse_config(const std::string& text, const fs::path& origin)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        invalid(origin, fmt::format("line {}: {}", e.line(), e.message()));
    }
    ExperimentConfig cfg;
    cfg.path = origin;
    for (const auto& [section, body] : tree) {
        auto it = allowed_keys().find(section);
        if (it == allowed_keys().end())
            invalid(origin, fmt::format("unknown section [{}]", section));
        if (body.empty() && !body.data().empty())
            invalid(origin, fmt::format("key '{}' outside of a section", section));
        for (const auto& [key, value] : body)
            if (!it->second.count(key))
                invalid(origin, fmt::format("unknown key '{}' in [{}]", key, section));
    }
    auto str = [&](const char* key, std::string& dst) {
        if (auto v = tree.get_optional<std::string>(key))
            dst = trim(*v);
    };
    auto integer = [&](const char* key, int& dst) {
        if (auto v = tree.get_optional<std::string>(key)) {
            try {
                std::size_t pos = 0;
                const std::string t = trim(*v);
                dst = std::stoi(t, &pos);
                if (pos != t.size())
                    throw std::invalid_argument(t);
            } catch (const std::exception&) {
                invalid(origin, fmt::format("{}: expected an integer, got '{}'", key, *v));
            }
        }
    };
    str("group.id", cfg.group);
    str("group.generators", cfg.generators);
    str("group.labels", cfg.labels);
    str("lipnorm.family", cfg.lipnorm);
    if (auto v = tree.get_optional<std::string>("lipnorm.s")) {
        try {
            std::size_t pos = 0;
            cfg.s = std::stod(trim(*v), &pos);
            if (pos != trim(*v).size() || !(cfg.s > 0.0))
                throw std::invalid_argument(*v);
        } catch (const std::exception&) {
            invalid(origin, fmt::format("lipnorm.s: expected a positive number, got '{}'", *v));
        }
    }
    integer("lipnorm.window", cfg.window);
    integer("lipnorm.search_window", cfg.search_window);
    str("kernel.family", cfg.kernel);
    integer("levels.min", cfg.level_min);
    integer("levels.max", cfg.level_max);
    if (auto v = tree.get_optional<std::string>("run.seed")) {
        try {
            std::size_t pos = 0;
            const std::string t = trim(*v);
            if (t.empty() || t[0] == '-')
                throw std::invalid_argument(t);
            cfg.seed = std::stoull(t, &pos);
            if (pos != t.size())
                throw std::invalid_argument(t);
        } catch (const std::exception&) {
            invalid(origin, fmt::format("run.seed: expected an unsigned integer, got '{}'", *v));
        }
    }
    integer("run.workers", cfg.workers);
    integer("run.samples", cfg.samples);
    integer("run.budget", cfg.budget);
    str("run.output", cfg.output);
    if (auto v = tree.get_optional<std::string>("report.inputs"))
        for (const auto& p : split(*v, ','))
            cfg.report_inputs.push_back(fs::path(p).is_absolute() ? fs::path(p) : origin.parent_path() / p);

    try {
        parse_lip_family(cfg.lipnorm);
    } catch (const std::exception& e) {
        invalid(origin, fmt::format("lipnorm.family: {}", e.what()));
    }
    if (!kKernelFamilies.count(cfg.kernel))
        invalid(origin, fmt::format("kernel.family: unknown family '{}'", cfg.kernel));
    if (cfg.level_min < 0)
        invalid(origin, "levels.min must be nonnegative");
    if (cfg.workers < 1)
        invalid(origin, "run.workers must be at least 1");
    if (cfg.samples < 0)
        invalid(origin, "run.samples must be nonnegative");
    if (cfg.budget < 1)
        invalid(origin, "run.budget must be at least 1");
    try {
        make_group(cfg.group, cfg.generators);
    } catch (const std::exception& e) {
        invalid(origin, fmt::format("group.id: {}", e.what()));
    }
    return cfg;
}

ExperimentConfig load_config(const fs::path& path)
{
    return parse_config(read_file(path), path);
}

// ---------------------------------------------------------------------------
// records

std::string ResultRecord::csv() const
{
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i)
        out += (i ? "," : "") + csv_field(columns[i]);
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out += (i ? "," : "") + csv_field(row[i]);
        out += "\n";
    }
    return out;
}

nlohmann::json ResultRecord::sidecar() const
{
    return {{"schema", kSchema},     {"version", version}, {"command", command},
            {"config_hash", config_hash}, {"columns", columns}, {"rows", rows},
            {"certificates", certificates}, {"seconds", seconds}};
}

ResultRecord ResultRecord::from_sidecar(const nlohmann::json& j)
{
    if (!j.is_object() || j.value("schema", "") != kSchema)
        throw ValidationError(fmt::format("not a {} document", kSchema));
    ResultRecord r;
    try {
        r.version = j.at("version").get<std::string>();
        r.command = j.at("command").get<std::string>();
        r.config_hash = j.at("config_hash").get<std::string>();
        r.columns = j.at("columns").get<std::vector<std::string>>();
        r.rows = j.at("rows").get<std::vector<std::vector<std::string>>>();
        r.certificates = j.value("certificates", nlohmann::json::array());
        r.seconds = j.value("seconds", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed result document: ") + e.what());
    }
    return r;
}

const std::vector<std::string>& commands()
{
    static const std::vector<std::string> c{"lipnorm", "fejer-sweep", "distq", "oracle", "states", "fusion", "report"};
    return c;
}

bool is_randomized(const std::string& command) { return command == "lipnorm" || command == "distq"; }

std::string config_hash(const std::string& command, const ExperimentConfig& cfg, std::optional<std::uint64_t> seed)
{
    const std::string text = fmt::format("{}\n{}\n{}seed={}\n", QTRUNC_VERSION, command, cfg.canonical(),
                                         seed ? std::to_string(*seed) : std::string("none"));
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw ResourceError("SHA-256 digest failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i)
        hex += fmt::format("{:02x}", md[i]);
    return hex;
}

ResultRecord run(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opt)
{
    if (std::find(commands().begin(), commands().end(), command) == commands().end() || command == "report")
        invalid(cfg.path, fmt::format("'{}' is not a runnable command", command));
    const auto seed = opt.seed ? opt.seed : cfg.seed;
    if (is_randomized(command) && !seed)
        invalid(cfg.path, fmt::format("run.seed is required for {} (or pass --seed)", command));
    const int workers = opt.workers.value_or(cfg.workers);
    const fs::path out = opt.out.empty() ? fs::path(cfg.output.empty() ? "qtrunc-out" : cfg.output) : opt.out;

    ResultRecord rec;
    rec.command = command;
    rec.version = QTRUNC_VERSION;
    rec.config_hash = config_hash(command, cfg, is_randomized(command) ? seed : std::nullopt);

    const fs::path cached = cache_dir(out) / (rec.config_hash + ".json");
    if (opt.use_cache && fs::exists(cached)) {
        rec = ResultRecord::from_sidecar(nlohmann::json::parse(read_file(cached)));
        rec.from_cache = true;
    } else {
        const auto t0 = std::chrono::steady_clock::now();
        const std::uint64_t s = seed.value_or(0);
        try {
            if (command == "lipnorm")
                cmd_lipnorm(rec, cfg, s, workers);
            else if (command == "fejer-sweep")
                cmd_fejer_sweep(rec, cfg, workers);
            else if (command == "distq")
                cmd_distq(rec, cfg, s, workers);
            else if (command == "oracle")
                cmd_oracle(rec, cfg, workers);
            else if (command == "states")
                cmd_states(rec, cfg, workers);
            else
                cmd_fusion(rec, cfg);
        } catch (const ValidationError&) {
            throw;
        } catch (const StructuralError& e) {
            throw StructuralError(fmt::format("{}: {}", cfg.path.string(), e.what()));
        } catch (const PreconditionError& e) {
            throw PreconditionError(fmt::format("{}: {}", cfg.path.string(), e.what()));
        } catch (const ResourceError& e) {
            throw ResourceError(fmt::format("{}: {}", cfg.path.string(), e.what()));
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(fmt::format("{}: {}", cfg.path.string(), e.what()));
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (opt.use_cache)
            write_file(cached, rec.sidecar().dump(2) + "\n");
    }
    write_file(out / (command + ".csv"), rec.csv());
    write_file(out / (command + ".json"), rec.sidecar().dump(2) + "\n");
    return rec;
}

// ---------------------------------------------------------------------------
// report

ReportSummary report(const std::vector<ResultRecord>& records)
{
    ReportSummary s;
    s.csv = "command,config_hash,x,value,lower,gap\n";
    for (const auto& r : records)
        if (r.version != records.front().version)
            throw ValidationError(
                fmt::format("records from different tool versions ({} and {})", records.front().version, r.version));
    for (const auto& r : records) {
        auto col = [&](const std::string& name) -> std::optional<std::size_t> {
            auto it = std::find(r.columns.begin(), r.columns.end(), name);
            if (it == r.columns.end())
                return std::nullopt;
            return static_cast<std::size_t>(it - r.columns.begin());
        };
        std::optional<std::size_t> x, v;
        if (r.command == "fejer-sweep") {
            x = col("n");
            v = col("epsilon");
        } else if (r.command == "distq") {
            x = col("level");
            v = col("upper");
        }
        std::string line = fmt::format("{} {}: rows={} seconds={:.3f}", r.command, r.config_hash.substr(0, 12),
                                       r.rows.size(), r.seconds);
        if (x && v) {
            const auto lo = col("lower"), gap = col("gap");
            bool decreasing = true;
            double prev = 0.0;
            for (std::size_t i = 0; i < r.rows.size(); ++i) {
                const auto& row = r.rows[i];
                const double value = std::stod(row[*v]);
                if (i > 0 && !(value < prev))
                    decreasing = false;
                prev = value;
                s.csv += fmt::format("{},{},{},{},{},{}\n", r.command, r.config_hash, row[*x], row[*v],
                                     lo ? row[*lo] : std::string(), gap ? row[*gap] : std::string());
            }
            line += fmt::format(" decreasing: {}", flag(decreasing));
        }
        s.lines.push_back(line);
    }
    return s;
}

// ---------------------------------------------------------------------------
// entry point

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Fourier truncation and quantum metric experiments"};
    app.require_subcommand(1, 1);
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    bool no_cache = false;
    for (const auto& c : commands()) {
        auto* sub = app.add_subcommand(c);
        sub->add_option("--config", config_path, "INI experiment description")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--no-cache", no_cache, "ignore and do not write the result cache");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "qtrunc: " << e.what() << "\n";
        return 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        auto cfg = load_config(config_path);
        RunOptions opt;
        opt.out = out_dir;
        opt.seed = seed;
        opt.workers = workers;
        opt.use_cache = !no_cache;
        if (command == "report") {
            std::vector<ResultRecord> recs;
            for (const auto& p : cfg.report_inputs)
                recs.push_back(ResultRecord::from_sidecar(nlohmann::json::parse(read_file(p), nullptr, false)));
            ReportSummary s;
            try {
                s = report(recs);
            } catch (const ValidationError& e) {
                invalid(cfg.path, e.what());
            }
            const fs::path dir = out_dir.empty() ? fs::path(cfg.output.empty() ? "qtrunc-out" : cfg.output) : fs::path(out_dir);
            std::string text;
            for (const auto& l : s.lines)
                text += l + "\n";
            write_file(dir / "report.csv", s.csv);
            write_file(dir / "report.txt", text);
            out << text;
            return 0;
        }
        auto rec = run(command, cfg, opt);
        out << fmt::format("{}: {} rows{} -> {}\n", command, rec.rows.size(), rec.from_cache ? " (cached)" : "",
                           ((opt.out.empty() ? fs::path(cfg.output.empty() ? "qtrunc-out" : cfg.output) : opt.out) /
                            (command + ".csv"))
                               .string());
        return 0;
    } catch (const ValidationError& e) {
        err << "qtrunc: " << e.what() << "\n";
        return 2;
    } catch (const StructuralError& e) {
        err << "qtrunc: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        err << "qtrunc: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError& e) {
        err << "qtrunc: " << e.what() << "\n";
        return 3;
    } catch (const ConvergenceError& e) {
        err << "qtrunc: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "qtrunc: " << config_path << ": " << e.what() << "\n";
        return 3;
    }
}

}  // namespace qtrunc::cli
