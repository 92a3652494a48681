#pragma once

// Command implementations behind tools/orbitlat.cpp; each returns the process exit code.

#include "orbitlat/io.hpp"

#include <functional>
#include <iostream>

namespace orbitlat::cli {

enum ExitCode : int { ok = 0, input_error = 1, resource_error = 2, budget_exhausted = 3, internal_error = 4 };

/// Runs `body`, mapping library exceptions to exit codes with a one-line diagnostic.
inline int guarded(const std::function<int()>& body, std::ostream& err) {
    try {
        return body();
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return input_error;
    } catch (const ResourceError& e) {
        err << "resource limit: " << e.what() << " (cap " << e.cap() << ")\n";
        return resource_error;
    } catch (const IntegrityError& e) {
        err << "integrity check failed: " << e.what() << '\n';
        return internal_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return internal_error;
    }
}

inline std::string short_double(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

inline void emit(const std::optional<std::string>& path, const std::string& content, std::ostream& out) {
    if (path) write_atomic(*path, content);
    else out << content;
}

// ---------------------------------------------------------------------------

struct MinimaOptions {
    std::string file;
    std::string norm = "euclidean";
    double tol = kDefaultTol;
};

/// First line: the minima; then one line per witness.
inline int cmd_minima(const MinimaOptions& o, std::ostream& out) {
    const Lattice l = read_lattice_file(o.file).lattice();
    const NormSpec norm = NormSpec::parse(o.norm);
    const MinimaResult m = successive_minima(l, norm);
    for (std::size_t i = 0; i < m.values.size(); ++i) out << (i ? " " : "") << short_double(m.values[i]);
    out << '\n';
    for (std::size_t i = 0; i < m.witnesses.size(); ++i) {
        out << "lambda_" << i + 1 << " = " << short_double(m.values[i]) << "  coeffs (";
        for (Eigen::Index j = 0; j < m.witnesses[i].coeffs.size(); ++j) out << (j ? " " : "") << m.witnesses[i].coeffs(j);
        out << ")  vector (";
        for (Eigen::Index j = 0; j < m.witnesses[i].vec.size(); ++j) out << (j ? " " : "") << short_double(m.witnesses[i].vec(j));
        out << ")\n";
    }
    out << (is_well_rounded(l, norm, o.tol) ? "well-rounded" : "not well-rounded") << " under " << norm.name() << '\n';
    return ok;
}

struct HnfOptions {
    std::string file;
    std::optional<std::string> csv;
    std::optional<std::string> svg;
    double tol = kDefaultTol;
};

inline std::string log_cov_text(const MinCovolumeResult& m) {
    if (m.covolume_squared) {
        if (*m.covolume_squared == 1) return "0";
        return "(1/2) log(" + format_rational(*m.covolume_squared) + ") = " + short_double(std::log(m.covolume));
    }
    return short_double(std::log(m.covolume));
}

inline int cmd_hnf(const HnfOptions& o, std::ostream& out) {
    const Lattice l = read_lattice_file(o.file).lattice();
    const HNFiltration f = hn_filtration(l, o.tol);
    out << "ranks:";
    for (int r : f.ranks()) out << ' ' << r;
    out << '\n' << (f.trivial() ? "stable (trivial filtration)" : "unstable") << '\n';
    for (int v : f.profile.vertex_ranks) {
        const auto& m = f.profile.minimizers[v];
        out << "rank " << v << ": log cov = " << log_cov_text(m);
        if (v > 0) out << "  generators " << imat_json(m.best.gens()).dump();
        out << '\n';
    }
    out << "profile:\n";
    for (const auto& pt : f.profile.points)
        out << "  " << pt.rank << ' ' << log_cov_text(f.profile.minimizers[pt.rank]) << (pt.is_vertex ? "  vertex" : "") << '\n';
    if (o.csv) write_atomic(*o.csv, grayson_csv(f.profile));
    if (o.svg) write_atomic(*o.svg, grayson_svg(f.profile));
    return ok;
}

struct OrbitOptions {
    std::string file;
    std::string target = "stable";
    std::string norm = "euclidean";
    std::uint64_t seed = 0;
    std::size_t budget = 10'000;
    double time_limit = 60.0;
    unsigned threads = 1;
    bool certify = false;
    double tol = kDefaultTol;
    std::optional<std::string> out;
};

inline json orbit_options_json(const OrbitOptions& o) {
    return json{{"target", o.target}, {"norm", o.norm},       {"budget", o.budget}, {"time_limit", o.time_limit},
                {"threads", o.threads}, {"certify", o.certify}, {"tol", format_double(o.tol)}};
}

/// Writes a run record whose payload is the search result; exit 3 when the budget ran out.
inline int cmd_orbit(const OrbitOptions& o, std::ostream& out) {
    const std::string text = read_text(o.file);
    const Lattice l = parse_lattice_json(parse_json_text(text, o.file)).lattice();
    SearchOptions so;
    so.tol = o.tol;
    so.max_iterations = o.budget;
    so.time_limit_seconds = o.time_limit;
    so.seed = o.seed;
    so.threads = o.threads;
    so.certify = o.certify;

    SearchResult r;
    if (o.target == "stable") {
        r = find_stable(l, so);
    } else if (o.target == "wr") {
        r = find_well_rounded(l, NormSpec::parse(o.norm), so);
    } else {
        throw InputError("unknown target '" + o.target + "' (expected stable or wr)");
    }

    RunRecord rec;
    rec.command = "orbit";
    rec.input_digest = "sha256:" + sha256_hex(text);
    rec.seed = o.seed;
    rec.options = orbit_options_json(o);
    rec.payload = to_json(r);
    rec.timestamp = utc_timestamp();
    rec.wall_seconds = r.wall_seconds;
    emit(o.out, to_json(rec).dump(2) + "\n", out);
    return r.success ? ok : budget_exhausted;
}

struct RandomOptions {
    int n = 3;
    std::uint64_t seed = 0;
    std::string dist = "gaussian-qr";
    std::optional<std::string> out;
};

inline int cmd_random(const RandomOptions& o, std::ostream& out) {
    const RandomDist d = parse_random_dist(o.dist);
    const Lattice l = random_lattice(o.n, o.seed, d);
    json meta{{"generator", "orbitlat random"}, {"dist", o.dist}, {"seed", o.seed}, {"unimodular", true}};
    emit(o.out, to_json(LatticeFile::from_lattice(l, meta)).dump(2) + "\n", out);
    return ok;
}

struct CoverOptions {
    std::string file;
    int depth = 2;
    std::optional<std::string> out;
};

inline int cmd_cover(const CoverOptions& o, std::ostream& out, std::ostream& err) {
    auto [n, family] = parse_family_json(parse_json_text(read_text(o.file), o.file));
    const CoverReport rep = cover_condition_check(family, n, o.depth);
    for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
    emit(o.out, to_json(rep).dump(2) + "\n", out);
    return ok;
}

}  // namespace orbitlat::cli
