#pragma once

// File formats: lattice files, polyhedron families, run records, Grayson CSV/SVG.

#include "orbitlat/convex.hpp"
#include "orbitlat/orbit.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace orbitlat {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Numbers

/// Exact value of "p/q", an integer, or a decimal with optional exponent ("-1.25e-3").
inline Rational parse_rational(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw InputError("empty number");
    auto bad = [&] { return InputError("malformed number '" + raw + "'"); };
    if (auto slash = s.find('/'); slash != std::string::npos) {
        const Rational p = parse_rational(s.substr(0, slash));
        const Rational q = parse_rational(s.substr(slash + 1));
        if (q == 0) throw InputError("zero denominator in '" + raw + "'");
        return p / q;
    }
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') neg = s[i++] == '-';
    BigInt mant = 0;
    long long scale = 0;
    bool digits = false, dot = false;
    for (; i < s.size() && s[i] != 'e' && s[i] != 'E'; ++i) {
        if (s[i] == '.') {
            if (dot) throw bad();
            dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            mant = mant * 10 + (s[i] - '0');
            digits = true;
            if (dot) --scale;
        } else {
            throw bad();
        }
    }
    if (!digits) throw bad();
    if (i < s.size()) {
        const std::string e = s.substr(i + 1);
        if (e.empty()) throw bad();
        std::size_t used = 0;
        long long ev = 0;
        try {
            ev = std::stoll(e, &used);
        } catch (const std::exception&) {
            throw bad();
        }
        if (used != e.size() || std::llabs(ev) > 4000) throw bad();
        scale += ev;
    }
    BigInt ten = 1;
    for (long long k = 0; k < std::llabs(scale); ++k) ten *= 10;
    Rational r = scale >= 0 ? Rational(mant * ten) : Rational(mant) / Rational(ten);
    return neg ? Rational(-r) : r;
}

inline double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        // stod rejects "p/q"; fall through to the exact parser
        return parse_rational(s).convert_to<double>();
    }
    if (used != s.size()) return parse_rational(s).convert_to<double>();
    return v;
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string format_rational(const Rational& q) { return q.str(); }

// ---------------------------------------------------------------------------
// Lattice files

enum class NumberMode { floating, rational };

/// {"n": int, "mode": "float"|"rational", "basis": [[...], ...] (row-major; the
/// columns are the basis vectors), "metadata": {...}}. Entries are strings
/// (decimal or "p/q") or JSON numbers.
struct LatticeFile {
    int n = 0;
    NumberMode mode = NumberMode::floating;
    Mat basis;
    std::optional<QMat> exact;
    json metadata = json::object();

    Lattice lattice() const { return exact ? Lattice(*exact) : Lattice(basis); }

    static LatticeFile from_lattice(const Lattice& l, json metadata = json::object()) {
        LatticeFile f;
        f.n = l.dim();
        f.basis = l.basis();
        f.exact = l.exact_basis();
        f.mode = f.exact ? NumberMode::rational : NumberMode::floating;
        f.metadata = std::move(metadata);
        return f;
    }
};

inline LatticeFile parse_lattice_json(const json& j) {
    if (!j.is_object()) throw InputError("lattice file must be a JSON object");
    for (const char* key : {"n", "basis"})
        if (!j.contains(key)) throw InputError(std::string("lattice file lacks \"") + key + "\"");
    LatticeFile f;
    if (!j["n"].is_number_integer() || j["n"].get<int>() <= 0) throw InputError("\"n\" must be a positive integer");
    f.n = j["n"].get<int>();
    const std::string mode = j.value("mode", std::string("float"));
    if (mode == "float") f.mode = NumberMode::floating;
    else if (mode == "rational") f.mode = NumberMode::rational;
    else throw InputError("\"mode\" must be \"float\" or \"rational\"");
    if (j.contains("metadata")) f.metadata = j["metadata"];

    const json& rows = j["basis"];
    if (!rows.is_array() || static_cast<int>(rows.size()) != f.n)
        throw InputError("\"basis\" must have n rows");
    f.basis.resize(f.n, f.n);
    QMat q(f.n, f.n);
    for (int r = 0; r < f.n; ++r) {
        if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != f.n)
            throw InputError("basis row " + std::to_string(r) + " must have n entries");
        for (int c = 0; c < f.n; ++c) {
            const json& e = rows[r][c];
            std::string s;
            if (e.is_string()) s = e.get<std::string>();
            else if (e.is_number_integer()) s = std::to_string(e.get<long long>());
            else if (e.is_number()) s = format_double(e.get<double>());
            else throw InputError("basis entry (" + std::to_string(r) + "," + std::to_string(c) + ") is not a number");
            if (f.mode == NumberMode::rational) {
                q(r, c) = parse_rational(s);
                f.basis(r, c) = q(r, c).convert_to<double>();
            } else {
                f.basis(r, c) = parse_double(s);
                if (!std::isfinite(f.basis(r, c))) throw InputError("non-finite basis entry");
            }
        }
    }
    if (f.mode == NumberMode::rational) f.exact = q;

    Lattice l = f.lattice();  // singularity check
    if (f.metadata.is_object() && f.metadata.value("unimodular", false) && !l.is_unimodular(1e-9))
        throw InputError("lattice declared unimodular but |det| = " + format_double(std::abs(l.det())));
    return f;
}

inline json to_json(const LatticeFile& f) {
    json rows = json::array();
    for (int r = 0; r < f.n; ++r) {
        json row = json::array();
        for (int c = 0; c < f.n; ++c)
            row.push_back(f.exact ? format_rational((*f.exact)(r, c)) : format_double(f.basis(r, c)));
        rows.push_back(std::move(row));
    }
    json j;
    j["n"] = f.n;
    j["mode"] = f.mode == NumberMode::rational ? "rational" : "float";
    j["basis"] = std::move(rows);
    j["metadata"] = f.metadata;
    return j;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline json parse_json_text(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(where + ": " + e.what());
    }
}

inline LatticeFile read_lattice_file(const std::string& path) {
    return parse_lattice_json(parse_json_text(read_text(path), path));
}

/// Writes to a temporary file next to `path` and renames it into place.
inline void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(static_cast<long long>(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw InputError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw InputError("cannot move output into '" + path + "': " + ec.message());
    }
}

inline void write_lattice_file(const std::string& path, const LatticeFile& f) { write_atomic(path, to_json(f).dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Random lattices

enum class RandomDist { gaussian_qr, integer_unimodular };

inline RandomDist parse_random_dist(const std::string& s) {
    if (s == "gaussian-qr") return RandomDist::gaussian_qr;
    if (s == "integer-unimodular") return RandomDist::integer_unimodular;
    throw InputError("unknown distribution '" + s + "' (expected gaussian-qr or integer-unimodular)");
}

/// gaussian-qr: i.i.d. N(0,1) entries scaled to determinant 1 (|det| read off the
/// QR factor); integer-unimodular: a product of 2n^2 random elementary integer
/// matrices (exact determinant 1, rational mode). Deterministic per (n, seed).
inline Lattice random_lattice(int n, std::uint64_t seed, RandomDist dist) {
    if (n <= 0) throw InputError("dimension must be positive");
    std::mt19937_64 rng(seed);
    if (dist == RandomDist::gaussian_qr) {
        std::normal_distribution<double> gauss;
        for (;;) {
            Mat g(n, n);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) g(r, c) = gauss(rng);
            Eigen::HouseholderQR<Mat> qr(g);
            double log_det = 0.0;
            for (int i = 0; i < n; ++i) log_det += std::log(std::abs(qr.matrixQR()(i, i)));
            if (!std::isfinite(log_det)) continue;
            g *= std::exp(-log_det / n);
            if (g.determinant() < 0) g.col(0) *= -1.0;
            return Lattice(g);
        }
    }
    IMat m = IMat::Identity(n, n);
    if (n > 1) {
        std::uniform_int_distribution<int> pick(0, n - 1);
        std::uniform_int_distribution<int> coef(-2, 2);
        for (int step = 0; step < 2 * n * n; ++step) {
            const int i = pick(rng);
            int j = pick(rng);
            if (i == j) j = (j + 1) % n;
            int c = coef(rng);
            if (c == 0) c = 1;
            for (int col = 0; col < n; ++col) m(i, col) = checked_add(m(i, col), checked_mul(c, m(j, col)));
        }
    }
    return Lattice(QMat(to_rational(m)));
}

// ---------------------------------------------------------------------------
// Polyhedra

/// {"n": int, "ineqs": [[[a...], b], ...]}
inline Polyhedron parse_polyhedron_json(const json& j, std::optional<int> n_default = std::nullopt) {
    if (!j.is_object() || !j.contains("ineqs")) throw InputError("polyhedron must be an object with \"ineqs\"");
    const int n = j.contains("n") ? j["n"].get<int>() : n_default.value_or(0);
    Polyhedron p(n);
    for (const auto& row : j["ineqs"]) {
        if (!row.is_array() || row.size() != 2 || !row[0].is_array())
            throw InputError("each inequality must be [[a...], b]");
        if (static_cast<int>(row[0].size()) != n) throw InputError("inequality normal has the wrong length");
        Vec a(n);
        for (int i = 0; i < n; ++i) a(i) = row[0][i].get<double>();
        p.add(std::move(a), row[1].get<double>());
    }
    return p;
}

inline json to_json(const Polyhedron& p) {
    json ineqs = json::array();
    for (const auto& q : p.inequalities()) {
        json a = json::array();
        for (Eigen::Index i = 0; i < q.a.size(); ++i) a.push_back(q.a(i));
        ineqs.push_back(json::array({a, q.b}));
    }
    return json{{"n", p.dim()}, {"ineqs", ineqs}};
}

/// {"n": int, "family": [polyhedron, ...]} or a bare array of polyhedra.
inline std::pair<int, std::vector<Polyhedron>> parse_family_json(const json& j) {
    const json* list = &j;
    std::optional<int> n;
    if (j.is_object()) {
        if (!j.contains("family")) throw InputError("family file lacks \"family\"");
        if (j.contains("n")) n = j["n"].get<int>();
        list = &j["family"];
    }
    if (!list->is_array()) throw InputError("family must be an array");
    std::vector<Polyhedron> out;
    for (const auto& e : *list) out.push_back(parse_polyhedron_json(e, n));
    if (!n) {
        if (out.empty()) throw InputError("empty family needs an explicit \"n\"");
        n = out.front().dim();
    }
    return {*n, std::move(out)};
}

inline json dim_json(const std::optional<int>& d) { return d ? json(*d) : json("-inf"); }

inline json to_json(const CoverReport& r) {
    json v = json::array();
    for (const auto& x : r.violations) v.push_back({{"indices", x.indices}, {"invdim", x.invdim}, {"bound", x.bound}});
    json j;
    j["n"] = r.n;
    j["depth"] = r.depth;
    j["family_size"] = r.family_size;
    j["subsets_checked"] = r.subsets_checked;
    j["nonempty_by_size"] = r.nonempty_by_size;
    j["violations"] = v;
    j["n_plus_one_intersection"] = r.n_plus_one ? json(*r.n_plus_one) : json(nullptr);
    j["hypotheses_hold"] = r.hypotheses_hold();
    j["incomplete"] = r.incomplete;
    j["warnings"] = r.warnings;
    return j;
}

// ---------------------------------------------------------------------------
// Search results and run records

inline json imat_json(const IMat& m) {
    json cols = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        json col = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) col.push_back(m(r, c));
        cols.push_back(std::move(col));
    }
    return cols;
}

inline json vec_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(format_double(v(i)));
    return a;
}

/// Deterministic part of a search: excludes wall time.
inline json to_json(const SearchResult& r) {
    json cert = json::array();
    for (const auto& e : r.certificate)
        cert.push_back({{r.target == SearchTarget::stable ? "rank" : "index", e.rank},
                        {"generators", imat_json(e.gens)},
                        {"value", format_double(e.value)},
                        {"enumeration_radius", format_double(e.radius)},
                        {"certified", e.certified}});
    json trace = json::array();
    for (const auto& s : r.steps)
        trace.push_back({{"branch", s.branch},
                         {"kind", s.kind},
                         {"margin_before", format_double(s.margin_before)},
                         {"margin_after", format_double(s.margin_after)},
                         {"step", format_double(s.step)}});
    json j;
    j["success"] = r.success;
    j["target"] = r.target == SearchTarget::stable ? "stable" : "well-rounded";
    if (r.target == SearchTarget::well_rounded) j["norm"] = r.norm;
    j["witness"] = vec_json(r.witness.x());
    j["margin"] = format_double(r.margin);
    j["tolerance"] = format_double(r.tol);
    j["certificate"] = cert;
    j["iterations"] = r.iterations;
    j["branches"] = r.branches;
    j["trace"] = trace;
    j["notes"] = r.notes;
    return j;
}

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw IntegrityError("SHA-256 digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

struct RunRecord {
    std::string command;
    std::string input_digest;
    std::uint64_t seed = 0;
    json options = json::object();
    json payload = json::object();
    std::string tool_version = kToolVersion;
    std::string timestamp;
    double wall_seconds = 0.0;
};

inline std::string utc_timestamp() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline json to_json(const RunRecord& r) {
    json j;
    j["command"] = r.command;
    j["input_digest"] = r.input_digest;
    j["seed"] = r.seed;
    j["options"] = r.options;
    j["tool_version"] = r.tool_version;
    j["payload"] = r.payload;
    j["timestamp"] = r.timestamp;
    j["wall_seconds"] = r.wall_seconds;
    return j;
}

// ---------------------------------------------------------------------------
// Grayson profile output

inline std::string grayson_csv(const GraysonProfile& p) {
    std::ostringstream os;
    os << "rank,min_log_cov,is_vertex\n";
    for (const auto& pt : p.points) os << pt.rank << ',' << format_double(pt.min_log_cov) << ',' << (pt.is_vertex ? 1 : 0) << '\n';
    return os.str();
}

/// Polygon through the vertices, other profile points as dots.
inline std::string grayson_svg(const GraysonProfile& p) {
    const double w = 480, h = 360, pad = 40;
    double lo = 0.0, hi = 0.0;
    int n = 0;
    for (const auto& pt : p.points) {
        lo = std::min(lo, pt.min_log_cov);
        hi = std::max(hi, pt.min_log_cov);
        n = std::max(n, pt.rank);
    }
    if (hi - lo < 1e-12) {
        lo -= 1;
        hi += 1;
    }
    auto px = [&](int r) { return pad + (w - 2 * pad) * (n ? static_cast<double>(r) / n : 0.0); };
    auto py = [&](double y) { return h - pad - (h - 2 * pad) * (y - lo) / (hi - lo); };
    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
       << ' ' << h << "\">\n";
    os << "  <line x1=\"" << pad << "\" y1=\"" << py(0) << "\" x2=\"" << w - pad << "\" y2=\"" << py(0)
       << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    os << "  <polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\" points=\"";
    for (const auto& pt : p.points)
        if (pt.is_vertex) os << px(pt.rank) << ',' << py(pt.min_log_cov) << ' ';
    os << "\"/>\n";
    for (const auto& pt : p.points)
        os << "  <circle cx=\"" << px(pt.rank) << "\" cy=\"" << py(pt.min_log_cov) << "\" r=\"" << (pt.is_vertex ? 4 : 3)
           << "\" fill=\"" << (pt.is_vertex ? "#1f4e9c" : "#c0392b") << "\"/>\n";
    for (int r = 0; r <= n; ++r)
        os << "  <text x=\"" << px(r) << "\" y=\"" << h - pad / 3 << "\" font-size=\"12\" text-anchor=\"middle\">" << r
           << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace orbitlat
