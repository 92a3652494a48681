#include "orbitlat/cli.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
    using namespace orbitlat::cli;
    CLI::App app{"Geometry-of-numbers tools: successive minima, Harder-Narasimhan filtrations, diagonal orbit search"};
    app.require_subcommand(1);

    MinimaOptions mo;
    auto* minima = app.add_subcommand("minima", "successive minima and witness vectors");
    minima->add_option("file", mo.file, "lattice file (JSON)")->required();
    minima->add_option("--norm", mo.norm, "euclidean | linf | l1")->check(CLI::IsMember({"euclidean", "l2", "linf", "l1"}));
    minima->add_option("--tol", mo.tol, "well-roundedness tolerance");

    HnfOptions ho;
    auto* hnf = app.add_subcommand("hnf", "Harder-Narasimhan filtration and Grayson profile");
    hnf->add_option("file", ho.file, "lattice file (JSON)")->required();
    hnf->add_option("--csv", ho.csv, "write the profile as CSV");
    hnf->add_option("--svg", ho.svg, "write the Grayson polygon as SVG");
    hnf->add_option("--tol", ho.tol, "hull depth tolerance");

    OrbitOptions oo;
    auto* orbit = app.add_subcommand("orbit", "search the diagonal orbit for a stable or well-rounded point");
    orbit->add_option("file", oo.file, "lattice file (JSON)")->required();
    orbit->add_option("--target", oo.target, "stable | wr")->check(CLI::IsMember({"stable", "wr"}));
    orbit->add_option("--norm", oo.norm, "norm for --target wr")->check(CLI::IsMember({"euclidean", "l2", "linf", "l1"}));
    orbit->add_option("--seed", oo.seed, "64-bit seed for restarts");
    orbit->add_option("--budget", oo.budget, "iteration budget");
    orbit->add_option("--time-limit", oo.time_limit, "wall-clock budget in seconds");
    orbit->add_option("--threads", oo.threads, "concurrent restart branches");
    orbit->add_flag("--certify", oo.certify, "branch-and-bound over a box before local search (stable only)");
    orbit->add_option("--tol", oo.tol, "margin tolerance");
    orbit->add_option("-o,--out", oo.out, "output file (default stdout)");

    RandomOptions ro;
    auto* random = app.add_subcommand("random", "random unimodular lattice file");
    random->add_option("--n", ro.n, "dimension")->required()->check(CLI::Range(1, 64));
    random->add_option("--seed", ro.seed, "64-bit seed");
    random->add_option("--dist", ro.dist, "gaussian-qr | integer-unimodular")
        ->check(CLI::IsMember({"gaussian-qr", "integer-unimodular"}));
    random->add_option("-o,--out", ro.out, "output file (default stdout)");

    CoverOptions co;
    auto* cover = app.add_subcommand("cover", "check cover hypotheses on a polyhedron family");
    cover->add_option("file", co.file, "family file (JSON)")->required();
    cover->add_option("--depth", co.depth, "largest subset size checked");
    cover->add_option("-o,--out", co.out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(input_error);
    }

    return guarded(
        [&] {
            if (*minima) return cmd_minima(mo, std::cout);
            if (*hnf) return cmd_hnf(ho, std::cout);
            if (*orbit) return cmd_orbit(oo, std::cout);
            if (*random) return cmd_random(ro, std::cout);
            return cmd_cover(co, std::cout, std::cerr);
        },
        std::cerr);
}
