#include "specdyn/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "specdyn/error.hpp"

namespace specdyn {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'P', 'D', 'Y', 'T', 'R', 'A', 'J'};
constexpr std::uint32_t kTrajectoryVersion = 1;
constexpr std::size_t kHeaderBytes = 32;

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

template <typename T>
void put_le(std::string& buf, T value) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFFU));
}

template <typename T>
T get_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return static_cast<T>(v);
}

double parse_double(std::string_view text, const fs::path& path) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    while (first < last && *first == ' ') ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw IoError(path.string() + ": malformed number '" + std::string(text) + "'");
    return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

json matrix_json(const Matrix& m) {
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols))
        throw IoError("matrix entry count does not match its shape");
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++].get<double>();
    return m;
}

json vector_json(const Vector& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void save_json(const fs::path& path, const json& doc) {
    auto out = open_out(path);
    out << doc.dump(1) << '\n';
    finish(out, path);
}

template <typename F>
auto load_json(const fs::path& path, F&& build) {
    const std::string text = read_text_file(path);
    try {
        return build(json::parse(text));
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::string_view measure_kind_name(OrthoMeasure::Kind kind) {
    return kind == OrthoMeasure::Kind::Empirical ? "empirical" : "uniform_box";
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

TrajectoryFormat parse_trajectory_format(std::string_view name) {
    if (name == "csv") return TrajectoryFormat::Csv;
    if (name == "binary") return TrajectoryFormat::Binary;
    throw InvalidInput("unknown trajectory format '" + std::string(name) + "' (expected csv or binary)");
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out << text;
    finish(out, path);
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
    std::string text = "t";
    for (std::size_t c = 0; c < traj.dim(); ++c) text += ",x" + std::to_string(c + 1);
    text += '\n';
    for (Eigen::Index t = 0; t < traj.states.rows(); ++t) {
        text += format_double(static_cast<double>(t) * traj.sample_interval);
        for (Eigen::Index c = 0; c < traj.states.cols(); ++c) {
            text += ',';
            text += format_double(traj.states(t, c));
        }
        text += '\n';
    }
    write_text_file(path, text);
}

void write_trajectory_binary(const fs::path& path, const Trajectory& traj) {
    std::string buf(kMagic.begin(), kMagic.end());
    buf.reserve(kHeaderBytes + static_cast<std::size_t>(traj.states.size()) * 8);
    put_le<std::uint32_t>(buf, kTrajectoryVersion);
    put_le<std::uint64_t>(buf, traj.length());
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(traj.dim()));
    put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(traj.sample_interval));
    for (Eigen::Index t = 0; t < traj.states.rows(); ++t)
        for (Eigen::Index c = 0; c < traj.states.cols(); ++c)
            put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(traj.states(t, c)));
    write_text_file(path, buf);
}

void write_trajectory(const fs::path& path, const Trajectory& traj, TrajectoryFormat format) {
    if (format == TrajectoryFormat::Csv)
        write_trajectory_csv(path, traj);
    else
        write_trajectory_binary(path, traj);
}

namespace {

Trajectory read_binary(const std::string& bytes, const fs::path& path) {
    if (bytes.size() < kHeaderBytes) throw IoError(path.string() + ": truncated trajectory header");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const auto version = get_le<std::uint32_t>(p + 8);
    if (version != kTrajectoryVersion)
        throw IoError(path.string() + ": unsupported trajectory version " + std::to_string(version));
    const auto rows = get_le<std::uint64_t>(p + 12);
    const auto dim = get_le<std::uint32_t>(p + 20);
    const double tau = std::bit_cast<double>(get_le<std::uint64_t>(p + 24));
    if (dim == 0 || rows > (bytes.size() - kHeaderBytes) / 8 / dim ||
        bytes.size() != kHeaderBytes + rows * dim * 8)
        throw IoError(path.string() + ": trajectory payload size does not match its header");
    Trajectory traj;
    traj.sample_interval = tau;
    traj.states.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    const unsigned char* data = p + kHeaderBytes;
    for (Eigen::Index t = 0; t < traj.states.rows(); ++t)
        for (Eigen::Index c = 0; c < traj.states.cols(); ++c) {
            traj.states(t, c) = std::bit_cast<double>(get_le<std::uint64_t>(data));
            data += 8;
        }
    return traj;
}

Trajectory read_csv(const std::string& text, const fs::path& path) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty trajectory file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line, ',');
    if (header.size() < 2 || header[0] != "t") throw IoError(path.string() + ": expected header t,x1,...,xd");
    for (std::size_t c = 1; c < header.size(); ++c)
        if (header[c] != "x" + std::to_string(c)) throw IoError(path.string() + ": expected header t,x1,...,xd");
    const std::size_t dim = header.size() - 1;

    std::vector<double> times;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split(line, ',');
        if (fields.size() != dim + 1)
            throw IoError(path.string() + ": row " + std::to_string(times.size() + 1) + " has the wrong field count");
        times.push_back(parse_double(fields[0], path));
        for (std::size_t c = 1; c <= dim; ++c) values.push_back(parse_double(fields[c], path));
    }
    Trajectory traj;
    traj.states.resize(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t t = 0; t < times.size(); ++t)
        for (std::size_t c = 0; c < dim; ++c)
            traj.states(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = values[t * dim + c];
    traj.sample_interval = times.size() >= 2 ? times[1] - times[0] : 0.0;
    return traj;
}

}  // namespace

Trajectory read_trajectory(const fs::path& path) {
    const std::string bytes = read_text_file(path);
    if (bytes.size() >= kMagic.size() && std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) == 0)
        return read_binary(bytes, path);
    return read_csv(bytes, path);
}

void save_feature_map(const fs::path& path, const OrthoFeatureMap& map) {
    const OrthoMeasure& m = map.measure();
    json measure = {{"kind", measure_kind_name(m.kind)}, {"sample_count", m.sample_count}};
    if (m.kind == OrthoMeasure::Kind::UniformBox) {
        measure["seed"] = m.seed;
        measure["lower"] = vector_json(m.box.lower);
        measure["upper"] = vector_json(m.box.upper);
    }
    const json doc = {
        {"kind", "random_fourier_orthogonal"},
        {"spec", {{"bandwidth", map.raw().spec().bandwidth}, {"dim", map.raw().spec().dim}}},
        {"seed", map.raw().seed()},
        {"n_features", map.raw().size()},
        {"transform", matrix_json(map.transform())},
        {"rho", vector_json(map.norms())},
        {"measure", std::move(measure)},
        {"id", map.id()},
    };
    save_json(path, doc);
}

OrthoFeatureMap load_feature_map(const fs::path& path) {
    return load_json(path, [&](const json& doc) {
        GaussianKernelSpec spec;
        spec.bandwidth = doc.at("spec").at("bandwidth").get<double>();
        spec.dim = doc.at("spec").at("dim").get<std::size_t>();
        const RawFeatureMap raw =
            sample_rff(spec, doc.at("n_features").get<std::size_t>(), doc.at("seed").get<std::uint64_t>());
        const json& jm = doc.at("measure");
        OrthoMeasure measure;
        const auto kind = jm.at("kind").get<std::string>();
        if (kind == "empirical") {
            measure.kind = OrthoMeasure::Kind::Empirical;
        } else if (kind == "uniform_box") {
            measure.kind = OrthoMeasure::Kind::UniformBox;
            measure.seed = jm.at("seed").get<std::uint64_t>();
            measure.box.lower = vector_from_json(jm.at("lower"));
            measure.box.upper = vector_from_json(jm.at("upper"));
        } else {
            throw IoError(path.string() + ": unknown measure kind '" + kind + "'");
        }
        measure.sample_count = jm.at("sample_count").get<std::size_t>();
        OrthoFeatureMap map(raw, matrix_from_json(doc.at("transform")), vector_from_json(doc.at("rho")),
                            std::move(measure));
        if (doc.contains("id") && doc.at("id").get<std::string>() != map.id())
            throw IoError(path.string() + ": feature map content does not match its recorded id");
        return map;
    });
}

void save_projection(const fs::path& path, const ProjectionEstimate& est) {
    save_json(path, {{"p_hat", matrix_json(est.p_hat())},
                     {"pair_count", est.pair_count()},
                     {"left_id", est.left_id()},
                     {"right_id", est.right_id()}});
}

ProjectionEstimate load_projection(const fs::path& path) {
    return load_json(path, [](const json& doc) {
        return ProjectionEstimate::from_average(matrix_from_json(doc.at("p_hat")),
                                                doc.at("pair_count").get<std::size_t>(),
                                                doc.at("left_id").get<std::string>(),
                                                doc.at("right_id").get<std::string>());
    });
}

void save_reshaped(const fs::path& path, const ReshapedKernelModel& model) {
    save_json(path, {{"u", matrix_json(model.u)},
                     {"sigma", vector_json(model.sigma)},
                     {"v", matrix_json(model.v)},
                     {"rank", model.rank},
                     {"residual_sigma", model.residual_sigma},
                     {"left_id", model.left_id},
                     {"right_id", model.right_id},
                     {"pair_count", model.pair_count}});
}

ReshapedKernelModel load_reshaped(const fs::path& path) {
    return load_json(path, [](const json& doc) {
        ReshapedKernelModel m;
        m.u = matrix_from_json(doc.at("u"));
        m.sigma = vector_from_json(doc.at("sigma"));
        m.v = matrix_from_json(doc.at("v"));
        m.rank = doc.at("rank").get<std::size_t>();
        m.residual_sigma = doc.at("residual_sigma").get<double>();
        m.left_id = doc.at("left_id").get<std::string>();
        m.right_id = doc.at("right_id").get<std::string>();
        m.pair_count = doc.at("pair_count").get<std::size_t>();
        return m;
    });
}

void save_embedder(const fs::path& path, const Embedder& e) {
    save_json(path, {{"left_factor", matrix_json(e.left_factor)},
                     {"right_factor", matrix_json(e.right_factor)},
                     {"sigma", vector_json(e.sigma)},
                     {"rank", e.rank},
                     {"left_id", e.left_id},
                     {"right_id", e.right_id}});
}

Embedder load_embedder(const fs::path& path) {
    return load_json(path, [](const json& doc) {
        Embedder e;
        e.left_factor = matrix_from_json(doc.at("left_factor"));
        e.right_factor = matrix_from_json(doc.at("right_factor"));
        e.sigma = vector_from_json(doc.at("sigma"));
        e.rank = doc.at("rank").get<std::size_t>();
        e.left_id = doc.at("left_id").get<std::string>();
        e.right_id = doc.at("right_id").get<std::string>();
        return e;
    });
}

void save_chain(const fs::path& path, const FiniteChain& chain) {
    save_json(path, {{"transition", matrix_json(chain.transition)}, {"stationary", vector_json(chain.stationary)}});
}

FiniteChain load_chain(const fs::path& path) {
    return load_json(path, [](const json& doc) {
        FiniteChain chain;
        chain.transition = matrix_from_json(doc.at("transition"));
        chain.stationary = vector_from_json(doc.at("stationary"));
        chain.validate();
        return chain;
    });
}

void save_cluster_report(const fs::path& path, const ClusterReport& report) {
    json self = json::array();
    for (double v : report.metastability.self_transition) self.push_back(std::isnan(v) ? json(nullptr) : json(v));
    json doc = {
        {"m", report.model.size()},
        {"centroids", matrix_json(report.model.centroids)},
        {"objective", report.model.objective},
        {"iterations_run", report.model.iterations_run},
        {"seed", report.model.seed},
        {"metastability",
         {{"score", report.metastability.score},
          {"all_visited", report.metastability.all_visited},
          {"self_transition", std::move(self)}}},
    };
    if (report.comparison)
        doc["misclassification"] = {{"rate", report.comparison->rate},
                                    {"permutation", report.comparison->permutation}};
    save_json(path, doc);
}

namespace {

std::string state_header(Eigen::Index dim) {
    std::string h;
    for (Eigen::Index c = 0; c < dim; ++c) h += (c ? ",x" : "x") + std::to_string(c + 1);
    return h;
}

void append_row(std::string& text, const Matrix& m, Eigen::Index row) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) text += ',';
        text += format_double(m(row, c));
    }
}

}  // namespace

void write_embedding_csv(const fs::path& path, const Matrix& states, const Matrix& psi) {
    if (states.rows() != psi.rows()) throw InvalidInput("write_embedding_csv: row count mismatch");
    std::string text = state_header(states.cols());
    for (Eigen::Index c = 0; c < psi.cols(); ++c) text += ",psi" + std::to_string(c + 1);
    text += '\n';
    for (Eigen::Index t = 0; t < states.rows(); ++t) {
        append_row(text, states, t);
        text += ',';
        append_row(text, psi, t);
        text += '\n';
    }
    write_text_file(path, text);
}

void write_labels_csv(const fs::path& path, const Matrix& states, std::span<const std::size_t> labels) {
    if (static_cast<std::size_t>(states.rows()) != labels.size())
        throw InvalidInput("write_labels_csv: row count mismatch");
    std::string text = state_header(states.cols()) + ",label\n";
    for (Eigen::Index t = 0; t < states.rows(); ++t) {
        append_row(text, states, t);
        text += ',' + std::to_string(labels[static_cast<std::size_t>(t)]) + '\n';
    }
    write_text_file(path, text);
}

void write_benchmark_csv(const fs::path& path, std::span<const BenchmarkRow> rows) {
    std::string text = "n,error_plain,error_reshaped,seed\n";
    for (const auto& r : rows)
        text += std::to_string(r.n) + ',' + format_double(r.error_plain) + ',' + format_double(r.error_reshaped) +
                ',' + std::to_string(r.seed) + '\n';
    write_text_file(path, text);
}

std::vector<BenchmarkRow> read_benchmark_csv(const fs::path& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || line != "n,error_plain,error_reshaped,seed")
        throw IoError(path.string() + ": expected header n,error_plain,error_reshaped,seed");
    std::vector<BenchmarkRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 4) throw IoError(path.string() + ": malformed benchmark row");
        BenchmarkRow r;
        r.n = static_cast<std::size_t>(parse_double(f[0], path));
        r.error_plain = parse_double(f[1], path);
        r.error_reshaped = parse_double(f[2], path);
        std::from_chars(f[3].data(), f[3].data() + f[3].size(), r.seed);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace specdyn
