#include "diagpath/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "diagpath/errors.hpp"

namespace diagpath::io {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

class Writer {
public:
    void raw(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
    template <class T>
    void put(T v) { raw(&v, sizeof v); }
    void magic(const char (&m)[6]) { raw(m, 5); }
    void doubles(const double* p, std::size_t n) { raw(p, n * sizeof(double)); }
    const std::string& bytes() const { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    Reader(std::string bytes, fs::path path) : buf_(std::move(bytes)), path_(std::move(path)) {}
    void raw(void* p, std::size_t n) {
        if (pos_ + n > buf_.size()) fail("truncated file");
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    template <class T>
    T get() {
        T v;
        raw(&v, sizeof v);
        return v;
    }
    void magic(const char (&m)[6]) {
        char got[5];
        raw(got, 5);
        if (std::memcmp(got, m, 5) != 0) fail(std::string("bad magic, expected ") + m);
    }
    void doubles(double* p, std::size_t n) { raw(p, n * sizeof(double)); }
    bool at_end() const { return pos_ == buf_.size(); }
    [[noreturn]] void fail(const std::string& why) const {
        throw DataError(path_.string() + ": " + why);
    }

private:
    std::string buf_;
    fs::path path_;
    std::size_t pos_ = 0;
};

void put_params(Writer& w, const swarm::SwarmParams& p) {
    for (double v : {p.mass, p.alpha, p.beta, p.repulsion_strength, p.attraction_strength,
                     p.repulsion_length, p.attraction_length})
        w.put(v);
}

swarm::SwarmParams get_params(Reader& r) {
    swarm::SwarmParams p;
    for (double* v : {&p.mass, &p.alpha, &p.beta, &p.repulsion_strength, &p.attraction_strength,
                      &p.repulsion_length, &p.attraction_length})
        *v = r.get<double>();
    return p;
}

std::uint32_t u32(std::size_t n, const char* what) {
    if (n > 0xffffffffu) throw SizeError(std::string(what) + " does not fit in 32 bits", double(n));
    return static_cast<std::uint32_t>(n);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    std::size_t k = 0;
    while (k < s.size() && s[k] == ' ') ++k;
    return s.substr(k);
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    const std::string t = trim(s);
    double v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw DataError("not a number: '" + s + "'");
    return v;
}

void atomic_write(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw DataError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_trajectory(const fs::path& path, const swarm::SwarmTrajectory& traj) {
    Writer w;
    w.magic("SWRM1");
    const std::size_t na = traj.n_agents(), ns = traj.n_steps();
    w.put(u32(na, "agent count"));
    w.put(u32(ns, "step count"));
    put_params(w, traj.params);
    w.put(traj.seed);
    for (const auto* block : {&traj.positions, &traj.velocities}) {
        if (block->size() != ns) throw DataError("trajectory has inconsistent step counts");
        for (const auto& cloud : *block) {
            if (cloud.size() != na) throw DataError("trajectory has inconsistent agent counts");
            for (const auto& p : cloud) w.doubles(p.data(), 3);
        }
    }
    w.doubles(traj.times.data(), ns);
    atomic_write(path, w.bytes());
}

swarm::SwarmTrajectory read_trajectory(const fs::path& path) {
    Reader r(read_file(path), path);
    r.magic("SWRM1");
    const std::size_t na = r.get<std::uint32_t>(), ns = r.get<std::uint32_t>();
    swarm::SwarmTrajectory t;
    t.params = get_params(r);
    t.seed = r.get<std::uint64_t>();
    for (auto* block : {&t.positions, &t.velocities}) {
        block->assign(ns, swarm::Cloud(na));
        for (auto& cloud : *block)
            for (auto& p : cloud) r.doubles(p.data(), 3);
    }
    t.times.resize(ns);
    r.doubles(t.times.data(), ns);
    if (!r.at_end()) r.fail("trailing bytes");
    return t;
}

void write_series(const fs::path& path, const swarm::PointCloudSeries& s) {
    Writer w;
    w.magic("PCLD1");
    std::size_t max_count = 0;
    for (const auto& c : s.clouds) max_count = std::max(max_count, c.size());
    w.put(u32(max_count, "agent count"));
    w.put(u32(s.clouds.size(), "step count"));
    put_params(w, s.params);
    w.put(s.seed);
    for (const auto& c : s.clouds) w.put(u32(c.size(), "cloud size"));
    if (s.times.size() != s.clouds.size()) throw DataError("series has inconsistent step counts");
    w.doubles(s.times.data(), s.times.size());
    for (const auto& c : s.clouds)
        for (const auto& p : c) w.doubles(p.data(), 3);
    atomic_write(path, w.bytes());
}

swarm::PointCloudSeries read_series(const fs::path& path) {
    Reader r(read_file(path), path);
    r.magic("PCLD1");
    r.get<std::uint32_t>();
    const std::size_t ns = r.get<std::uint32_t>();
    swarm::PointCloudSeries s;
    s.params = get_params(r);
    s.seed = r.get<std::uint64_t>();
    std::vector<std::uint32_t> counts(ns);
    for (auto& c : counts) c = r.get<std::uint32_t>();
    s.times.resize(ns);
    r.doubles(s.times.data(), ns);
    s.clouds.resize(ns);
    for (std::size_t k = 0; k < ns; ++k) {
        s.clouds[k].resize(counts[k]);
        for (auto& p : s.clouds[k]) r.doubles(p.data(), 3);
    }
    if (!r.at_end()) r.fail("trailing bytes");
    return s;
}

void write_diagrams(const fs::path& path, const std::vector<persistence::DiagramPath>& paths) {
    std::string out = "sim_id,time_index,homology_dim,birth,lifetime\n";
    nlohmann::json meta = nlohmann::json::array();
    for (const auto& dp : paths) {
        for (std::size_t t = 0; t < dp.frames.size(); ++t)
            for (int d = 0; d < 3; ++d)
                for (const auto& p : dp.frames[t][d].points) {
                    out += std::to_string(dp.sim_id) + ',' + std::to_string(t) + ',' + std::to_string(d) +
                           ',' + format_double(p.birth) + ',' + format_double(p.lifetime) + '\n';
                }
        nlohmann::json times = nlohmann::json::array();
        for (double v : dp.times) times.push_back(format_double(v));
        nlohmann::json w = nlohmann::json::array();
        // Per-frame weights only matter for count-normalized diagrams.
        for (const auto& fr : dp.frames) w.push_back(format_double(fr[0].weight));
        meta.push_back({{"sim_id", dp.sim_id},
                        {"n_times", dp.frames.size()},
                        {"bound", format_double(dp.bound)},
                        {"scheme", dp.scheme},
                        {"times", times},
                        {"weights", w}});
    }
    atomic_write(path, out);
    fs::path mp = path;
    mp += ".meta.json";
    atomic_write(mp, meta.dump(1) + "\n");
}

std::vector<persistence::DiagramPath> read_diagrams(const fs::path& path) {
    fs::path mp = path;
    mp += ".meta.json";
    if (!fs::exists(mp)) throw DataError("missing " + mp.string() + "; rerun `persist`");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_file(mp));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(mp.string() + ": " + e.what());
    }
    std::vector<persistence::DiagramPath> paths;
    std::map<std::uint64_t, std::size_t> index;
    for (const auto& m : meta) {
        persistence::DiagramPath dp;
        dp.sim_id = m.at("sim_id").get<std::uint64_t>();
        dp.bound = parse_double(m.at("bound").get<std::string>());
        dp.scheme = m.at("scheme").get<std::string>();
        for (const auto& t : m.at("times")) dp.times.push_back(parse_double(t.get<std::string>()));
        dp.frames.resize(m.at("n_times").get<std::size_t>());
        const auto& w = m.at("weights");
        for (std::size_t t = 0; t < dp.frames.size(); ++t)
            for (int d = 0; d < 3; ++d) {
                dp.frames[t][d].homology_dim = d;
                dp.frames[t][d].bound = dp.bound;
                dp.frames[t][d].weight = parse_double(w.at(t).get<std::string>());
            }
        index[dp.sim_id] = paths.size();
        paths.push_back(std::move(dp));
    }
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || trim(line) != "sim_id,time_index,homology_dim,birth,lifetime")
        throw DataError(path.string() + ": missing diagram header");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split(trim(line), ',');
        if (f.size() != 5) throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 5 fields");
        const auto sim = static_cast<std::uint64_t>(std::stoull(f[0]));
        const std::size_t t = std::stoul(f[1]);
        const int d = std::stoi(f[2]);
        auto it = index.find(sim);
        if (it == index.end() || t >= paths[it->second].frames.size() || d < 0 || d > 2)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": record outside the meta ranges");
        paths[it->second].frames[t][d].points.push_back({parse_double(f[3]), parse_double(f[4])});
    }
    for (const auto& dp : paths)
        for (const auto& fr : dp.frames)
            for (const auto& d : fr) d.validate();
    return paths;
}

void write_features(const fs::path& path, const FeaturePath& fp) {
    fp.validate();
    Writer w;
    w.magic("FEAT1");
    w.put(u32(fp.dim, "feature dimension"));
    w.put(u32(fp.length(), "path length"));
    w.put(static_cast<std::uint8_t>(fp.provenance));
    w.doubles(fp.values.data(), fp.values.size());
    w.doubles(fp.times.data(), fp.times.size());
    atomic_write(path, w.bytes());
}

FeaturePath read_features(const fs::path& path) {
    Reader r(read_file(path), path);
    r.magic("FEAT1");
    const std::size_t D = r.get<std::uint32_t>(), L = r.get<std::uint32_t>();
    const auto tag = r.get<std::uint8_t>();
    if (tag > 3) r.fail("unknown provenance tag");
    FeaturePath fp(L, D, static_cast<Provenance>(tag));
    r.doubles(fp.values.data(), fp.values.size());
    r.doubles(fp.times.data(), fp.times.size());
    if (!r.at_end()) r.fail("trailing bytes");
    fp.validate();
    return fp;
}

void write_gram(const fs::path& path, const GramFile& g) {
    Writer w;
    w.magic("GRAM1");
    w.put(u32(static_cast<std::size_t>(g.matrix.rows()), "row count"));
    w.put(u32(static_cast<std::size_t>(g.matrix.cols()), "column count"));
    w.put(static_cast<std::uint32_t>(g.level));
    w.put(static_cast<std::uint8_t>((g.normalized ? 1u : 0u) | (static_cast<unsigned>(g.route) << 1)));
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = g.matrix;
    w.doubles(rm.data(), static_cast<std::size_t>(rm.size()));
    atomic_write(path, w.bytes());
}

GramFile read_gram(const fs::path& path) {
    Reader r(read_file(path), path);
    r.magic("GRAM1");
    const auto rows = r.get<std::uint32_t>(), cols = r.get<std::uint32_t>();
    GramFile g;
    g.level = static_cast<int>(r.get<std::uint32_t>());
    const auto flags = r.get<std::uint8_t>();
    g.normalized = flags & 1u;
    if ((flags >> 1) > 2) r.fail("unknown route flag");
    g.route = static_cast<signature::Route>(flags >> 1);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
    r.doubles(rm.data(), static_cast<std::size_t>(rm.size()));
    if (!r.at_end()) r.fail("trailing bytes");
    g.matrix = rm;
    return g;
}

void write_model(const fs::path& path, const regression::SvrModel& m) {
    std::string out = "svr_model 1\n";
    out += "lambda " + format_double(m.lambda) + "\n";
    out += "epsilon " + format_double(m.epsilon) + "\n";
    out += "bias " + format_double(m.bias) + "\n";
    out += "n_train " + std::to_string(m.n_train()) + "\n";
    out += "fingerprint " + std::to_string(m.fingerprint) + "\n";
    out += "converged " + std::string(m.converged ? "1" : "0") + "\n";
    out += "updates " + std::to_string(m.updates) + "\n";
    out += "dual_coeffs\n";
    for (double c : m.dual_coeffs) out += format_double(c) + "\n";
    atomic_write(path, out);
}

regression::SvrModel read_model(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || trim(line) != "svr_model 1") throw DataError(path.string() + ": not a model file");
    regression::SvrModel m;
    std::size_t n = 0;
    bool have_n = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line == "dual_coeffs") break;
        const auto sp = line.find(' ');
        if (sp == std::string::npos) throw DataError(path.string() + ": malformed line '" + line + "'");
        const std::string key = line.substr(0, sp), val = line.substr(sp + 1);
        if (key == "lambda") m.lambda = parse_double(val);
        else if (key == "epsilon") m.epsilon = parse_double(val);
        else if (key == "bias") m.bias = parse_double(val);
        else if (key == "n_train") n = std::stoul(val), have_n = true;
        else if (key == "fingerprint") m.fingerprint = std::stoull(val);
        else if (key == "converged") m.converged = val == "1";
        else if (key == "updates") m.updates = std::stoul(val);
    }
    if (!have_n) throw DataError(path.string() + ": missing n_train");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw DataError(path.string() + ": too few coefficients");
        m.dual_coeffs.push_back(parse_double(line));
        if (m.dual_coeffs.back() != 0) m.support.push_back(i);
    }
    return m;
}

void write_cv_report(const fs::path& path, const regression::CvReport& r) {
    std::string out = "lambda,epsilon,mean_mse\n";
    for (std::size_t l = 0; l < r.lambdas.size(); ++l)
        for (std::size_t e = 0; e < r.epsilons.size(); ++e)
            out += format_double(r.lambdas[l]) + ',' + format_double(r.epsilons[e]) + ',' +
                   format_double(r.mean_mse(Eigen::Index(l), Eigen::Index(e))) + '\n';
    atomic_write(path, out);
}

std::vector<double> read_csv_column(const fs::path& path, const std::string& column) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    const auto header = split(trim(line), ',');
    std::size_t col = header.size();
    for (std::size_t k = 0; k < header.size(); ++k)
        if (trim(header[k]) == column) col = k;
    if (col == header.size()) throw DataError(path.string() + ": no column named '" + column + "'");
    std::vector<double> out;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(trim(line), ',');
        if (col >= f.size()) throw DataError(path.string() + ": short row");
        out.push_back(parse_double(f[col]));
    }
    return out;
}

}  // namespace diagpath::io
