#include "specdyn/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "specdyn/error.hpp"

namespace specdyn {

using json = nlohmann::json;

namespace {

class Section {
public:
    Section(const json& node, std::string name) : node_(node), name_(std::move(name)) {
        if (!node_.is_object()) fail("must be an object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    double real(const std::string& key, std::optional<double> fallback = std::nullopt) {
        const json* v = lookup(key, fallback.has_value());
        if (!v) return *fallback;
        if (!v->is_number()) fail(key, "must be a number");
        const double x = v->get<double>();
        if (!std::isfinite(x)) fail(key, "must be finite");
        return x;
    }

    std::uint64_t count(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) {
        const json* v = lookup(key, fallback.has_value());
        if (!v) return *fallback;
        return as_count(*v, key);
    }

    std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        const json* v = lookup(key, fallback.has_value());
        if (!v) return *fallback;
        if (!v->is_string()) fail(key, "must be a string");
        return v->get<std::string>();
    }

    std::vector<double> reals(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
        const json* v = lookup(key, fallback.has_value());
        if (!v) return *fallback;
        if (!v->is_array()) fail(key, "must be an array of numbers");
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number() || !std::isfinite(e.get<double>())) fail(key, "must be an array of finite numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<std::uint64_t> counts(const std::string& key,
                                      std::optional<std::vector<std::uint64_t>> fallback = std::nullopt) {
        const json* v = lookup(key, fallback.has_value());
        if (!v) return *fallback;
        if (!v->is_array()) fail(key, "must be an array of nonnegative integers");
        std::vector<std::uint64_t> out;
        for (const auto& e : *v) out.push_back(as_count(e, key));
        return out;
    }

    Section child(const std::string& key) {
        const json* v = lookup(key, false);
        return Section(*v, name_ + "." + key);
    }

    void finish() const {
        for (const auto& item : node_.items())
            if (!seen_.contains(item.key())) fail(item.key(), "is not a recognized key");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError("config: " + name_ + "." + key + " " + what);
    }
    [[noreturn]] void fail(const std::string& what) const { throw ConfigError("config: " + name_ + " " + what); }

private:
    const json* lookup(const std::string& key, bool optional) {
        seen_.insert(key);
        if (!node_.contains(key)) {
            if (optional) return nullptr;
            fail(key, "is required");
        }
        return &node_.at(key);
    }

    std::uint64_t as_count(const json& v, const std::string& key) const {
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_float()) {
            const double x = v.get<double>();
            if (x >= 0.0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
        }
        fail(key, "must be a nonnegative integer");
    }

    const json& node_;
    std::string name_;
    std::set<std::string> seen_;
};

void require(bool ok, Section& s, const std::string& key, const std::string& what) {
    if (!ok) s.fail(key, what);
}

PotentialConfig parse_potential(Section s) {
    PotentialConfig p;
    p.family = s.text("family");
    if (p.family == "four_well") {
        p.barrier = s.real("barrier", 5.0);
        require(p.barrier > 0.0, s, "barrier", "must be positive");
        p.dim = s.count("dim", 1);
        require(p.dim == 1, s, "dim", "must be 1 for four_well");
    } else {
        try {
            (void)parse_potential_family(p.family);
        } catch (const InvalidInput&) {
            s.fail("family", "must be four_well, quadratic, polynomial or gaussian_mixture_2d");
        }
        p.parameters = s.reals("parameters");
        p.dim = s.count("dim", p.family == "gaussian_mixture_2d" ? 2 : 1);
    }
    s.finish();
    try {
        p.spec().validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("config: simulation.potential: ") + e.what());
    }
    return p;
}

SimulationConfig parse_simulation(Section s) {
    SimulationConfig c;
    c.potential = parse_potential(s.child("potential"));
    c.x0 = s.reals("x0", std::vector<double>{});
    require(c.x0.empty() || c.x0.size() == c.potential.dim, s, "x0", "must have one entry per dimension");
    c.inner_dt = s.real("inner_dt", 1e-3);
    require(c.inner_dt > 0.0, s, "inner_dt", "must be positive");
    c.stride = s.count("stride", 1);
    require(c.stride >= 1, s, "stride", "must be at least 1");
    c.n_samples = s.count("n_samples");
    require(c.n_samples >= 2, s, "n_samples", "must be at least 2");
    c.burn_in = s.count("burn_in", 100000);
    c.seed = s.count("seed");
    try {
        c.format = parse_trajectory_format(s.text("format", "binary"));
    } catch (const InvalidInput&) {
        s.fail("format", "must be csv or binary");
    }
    s.finish();
    return c;
}

FeatureConfig parse_features(Section s) {
    FeatureConfig c;
    c.bandwidth = s.real("bandwidth");
    require(c.bandwidth > 0.0, s, "bandwidth", "must be positive");
    c.n_features = s.count("n_features", 2000);
    require(c.n_features >= 1, s, "n_features", "must be at least 1");
    c.seed = s.count("seed");
    c.drop_tol = s.real("drop_tol", 1e-8);
    require(c.drop_tol >= 0.0, s, "drop_tol", "must be nonnegative");
    c.quadrature_samples = s.count("quadrature_samples", 0);
    c.quadrature_seed = s.count("quadrature_seed");
    c.box_padding = s.real("box_padding", 0.1);
    require(c.box_padding >= 0.0, s, "box_padding", "must be nonnegative");
    s.finish();
    return c;
}

EstimationConfig parse_estimation(Section s) {
    EstimationConfig c;
    c.rank = s.count("rank");
    require(c.rank >= 1, s, "rank", "must be at least 1");
    s.finish();
    return c;
}

ClusteringConfig parse_clustering(Section s) {
    ClusteringConfig c;
    const auto ms = s.counts("m");
    require(!ms.empty(), s, "m", "must list at least one cluster count");
    c.m.assign(ms.begin(), ms.end());
    for (std::size_t m : c.m) require(m >= 1, s, "m", "entries must be at least 1");
    c.restarts = s.count("restarts", 10);
    require(c.restarts >= 1, s, "restarts", "must be at least 1");
    c.max_iter = s.count("max_iter", 300);
    require(c.max_iter >= 1, s, "max_iter", "must be at least 1");
    c.seed = s.count("seed");
    s.finish();
    return c;
}

BenchmarkConfig parse_benchmark(Section s) {
    BenchmarkConfig c;
    const auto ns = s.counts("n_values");
    require(!ns.empty(), s, "n_values", "must list at least one sample size");
    c.n_values.assign(ns.begin(), ns.end());
    for (std::size_t n : c.n_values) require(n >= 1, s, "n_values", "entries must be at least 1");
    c.seeds = s.counts("seeds");
    require(!c.seeds.empty(), s, "seeds", "must list at least one seed");
    const std::string ref = s.text("reference", "grid");
    if (ref == "grid")
        c.reference = BenchmarkConfig::Reference::Grid;
    else if (ref == "long_run")
        c.reference = BenchmarkConfig::Reference::LongRun;
    else if (ref == "both")
        c.reference = BenchmarkConfig::Reference::Both;
    else
        s.fail("reference", "must be grid, long_run or both");
    c.grid_count = s.count("grid_count", 401);
    require(c.grid_count >= 5 && c.grid_count % 2 == 1, s, "grid_count", "must be odd and at least 5");
    c.grid_lo = s.real("grid_lo", -2.2);
    c.grid_hi = s.real("grid_hi", 2.2);
    require(c.grid_hi > c.grid_lo, s, "grid_hi", "must exceed grid_lo");
    c.grid_dt = s.real("grid_dt", 0.0);
    require(c.grid_dt >= 0.0, s, "grid_dt", "must be nonnegative");
    c.n_ref = s.count("n_ref", 10000000);
    require(c.n_ref >= 1, s, "n_ref", "must be at least 1");
    c.reference_seed = s.count("reference_seed");
    c.basis_samples = s.count("basis_samples", 100000);
    require(c.basis_samples >= 2, s, "basis_samples", "must be at least 2");
    c.basis_seed = s.count("basis_seed");
    s.finish();
    return c;
}

std::string_view reference_name(BenchmarkConfig::Reference r) {
    switch (r) {
        case BenchmarkConfig::Reference::Grid: return "grid";
        case BenchmarkConfig::Reference::LongRun: return "long_run";
        case BenchmarkConfig::Reference::Both: return "both";
    }
    return "grid";
}

std::string_view format_name(TrajectoryFormat f) { return f == TrajectoryFormat::Csv ? "csv" : "binary"; }

template <typename T>
const T& required_section(const std::optional<T>& section, const char* name) {
    if (!section) throw ConfigError(std::string("config: section '") + name + "' is required for this command");
    return *section;
}

}  // namespace

PotentialSpec PotentialConfig::spec() const {
    if (family == "four_well") return four_well_1d(barrier).spec;
    PotentialSpec s;
    s.family = parse_potential_family(family);
    s.parameters = parameters;
    s.dim = dim;
    return s;
}

std::optional<MultiWell1d> PotentialConfig::wells() const {
    if (family == "four_well") return four_well_1d(barrier);
    return std::nullopt;
}

SimulationOptions SimulationConfig::options() const {
    SimulationOptions o;
    o.x0 = x0.empty() ? Vector::Zero(static_cast<Eigen::Index>(potential.dim))
                      : Vector(Eigen::Map<const Vector>(x0.data(), static_cast<Eigen::Index>(x0.size())));
    o.inner_dt = inner_dt;
    o.n_samples = n_samples;
    o.stride = stride;
    o.burn_in = burn_in;
    o.seed = seed;
    return o;
}

BasisOptions FeatureConfig::basis_options() const {
    BasisOptions o;
    o.drop_tol = drop_tol;
    o.quadrature_samples = quadrature_samples;
    o.quadrature_seed = quadrature_seed;
    o.box_padding = box_padding;
    return o;
}

const SimulationConfig& RunConfig::require_simulation() const { return required_section(simulation, "simulation"); }
const FeatureConfig& RunConfig::require_features() const { return required_section(features, "features"); }
const EstimationConfig& RunConfig::require_estimation() const { return required_section(estimation, "estimation"); }
const ClusteringConfig& RunConfig::require_clustering() const { return required_section(clustering, "clustering"); }
const BenchmarkConfig& RunConfig::require_benchmark() const { return required_section(benchmark, "benchmark"); }

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    Section root(doc, "config");
    RunConfig c;
    if (root.has("simulation")) c.simulation = parse_simulation(root.child("simulation"));
    if (root.has("features")) c.features = parse_features(root.child("features"));
    if (root.has("estimation")) c.estimation = parse_estimation(root.child("estimation"));
    if (root.has("clustering")) c.clustering = parse_clustering(root.child("clustering"));
    if (root.has("benchmark")) c.benchmark = parse_benchmark(root.child("benchmark"));
    if (root.has("paths")) {
        Section p = root.child("paths");
        c.paths.trajectory = p.text("trajectory", "trajectory.bin");
        require(!c.paths.trajectory.empty(), p, "trajectory", "must not be empty");
        p.finish();
    }
    root.finish();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_text_file(path));
}

std::string resolved_config_json(const RunConfig& c) {
    json doc = json::object();
    if (c.simulation) {
        const auto& s = *c.simulation;
        json potential = {{"family", s.potential.family}, {"dim", s.potential.dim}};
        if (s.potential.family == "four_well")
            potential["barrier"] = s.potential.barrier;
        else
            potential["parameters"] = s.potential.parameters;
        doc["simulation"] = {{"potential", potential}, {"x0", s.x0},           {"inner_dt", s.inner_dt},
                             {"stride", s.stride},     {"n_samples", s.n_samples}, {"burn_in", s.burn_in},
                             {"seed", s.seed},         {"format", format_name(s.format)}};
    }
    if (c.features) {
        const auto& f = *c.features;
        doc["features"] = {{"bandwidth", f.bandwidth},
                           {"n_features", f.n_features},
                           {"seed", f.seed},
                           {"drop_tol", f.drop_tol},
                           {"quadrature_samples", f.quadrature_samples},
                           {"quadrature_seed", f.quadrature_seed},
                           {"box_padding", f.box_padding}};
    }
    if (c.estimation) doc["estimation"] = {{"rank", c.estimation->rank}};
    if (c.clustering) {
        const auto& k = *c.clustering;
        doc["clustering"] = {{"m", k.m}, {"restarts", k.restarts}, {"max_iter", k.max_iter}, {"seed", k.seed}};
    }
    if (c.benchmark) {
        const auto& b = *c.benchmark;
        doc["benchmark"] = {{"n_values", b.n_values},       {"seeds", b.seeds},
                            {"reference", reference_name(b.reference)},
                            {"grid_count", b.grid_count},   {"grid_lo", b.grid_lo},
                            {"grid_hi", b.grid_hi},         {"grid_dt", b.grid_dt},
                            {"n_ref", b.n_ref},             {"reference_seed", b.reference_seed},
                            {"basis_samples", b.basis_samples}, {"basis_seed", b.basis_seed}};
    }
    doc["paths"] = {{"trajectory", c.paths.trajectory}};
    return doc.dump(2) + "\n";
}

}  // namespace specdyn
