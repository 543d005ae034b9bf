#include "doctest.h"

#include "chainhhg/analysis.hpp"
#include "chainhhg/checkpoint.hpp"
#include "chainhhg/config.hpp"
#include "chainhhg/errors.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace chainhhg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "chainhhg-unit";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

} // namespace

// ============================================================================
// Configuration
// ============================================================================

TEST_CASE("defaults are the topological chain with the standard pulse") {
    const RunConfig c;
    CHECK(c.chain.sites == 12);
    CHECK(c.chain.v == 0.10026);
    CHECK(c.chain.w == 0.18268);
    CHECK(c.chain.U == 0.1);
    CHECK(c.pulse.omega == 0.0049);
    CHECK(c.pulse.e0_over_omega == 0.4);
    CHECK(c.pulse.cycles == 5);
    CHECK(c.diag.solver.k == 200);
    CHECK(c.propagation.samples == 8192);
    CHECK(c.propagation.ode_tol == 1e-13);
    c.validate();
}

TEST_CASE("INI sections, phase shortcut and overrides") {
    RunConfig c;
    std::istringstream ini(
        "[chain]\nphase = trivial\nU = 0.2\n[pulse]\nn_cyc = 3\n[solver]\nk = 50\nseed = 7\n"
        "[propagation]\nsamples = 4096\n[output]\ndirectory = results\n");
    c.load_ini(ini);
    CHECK(c.chain.v == 0.18268);
    CHECK(c.chain.w == 0.10026);
    CHECK(c.chain.U == 0.2);
    CHECK(c.pulse.cycles == 3);
    CHECK(c.diag.solver.k == 50);
    CHECK(c.diag.solver.seed == 7);
    CHECK(c.propagation.samples == 4096);
    CHECK(c.directory == fs::path("results"));
    c.set("U", "0.05");
    c.set("chain.N", "8");
    CHECK(c.chain.U == 0.05);
    CHECK(c.chain.sites == 8);
}

TEST_CASE("explicit hoppings in the file win over the phase shortcut") {
    RunConfig c;
    std::istringstream ini("[chain]\nv = 0.3\nphase = trivial\n");
    c.load_ini(ini);
    CHECK(c.chain.v == 0.3);
    CHECK(c.chain.w == 0.10026);
}

TEST_CASE("bad keys and values are parameter errors") {
    RunConfig c;
    CHECK_THROWS_AS(c.set("nonsense", "1"), ParameterError);
    CHECK_THROWS_AS(c.set("U", "abc"), ParameterError);
    CHECK_THROWS_AS(c.set("k", "1.5"), ParameterError);
    CHECK_THROWS_AS(c.set("phase", "metallic"), ParameterError);
    std::istringstream bad("[chain]\nfoo = 1\n");
    CHECK_THROWS_AS(c.load_ini(bad), ParameterError);
    c.set("N", "7");
    CHECK_THROWS_WITH_AS(c.validate(), "N must be even", ParameterError);
}

TEST_CASE("written INI reads back to the same configuration") {
    RunConfig a;
    a.set("phase", "trivial");
    a.set("U", "0.123");
    a.set("keep", "0,2,4");
    std::stringstream ss;
    a.write_ini(ss);
    RunConfig b;
    b.load_ini(ss);
    CHECK(b.chain.v == a.chain.v);
    CHECK(b.chain.U == a.chain.U);
    CHECK(b.keep == a.keep);
    CHECK(b.diag.solver.tol == a.diag.solver.tol);
}

TEST_CASE("value grids") {
    const auto g = parse_value_grid("0:0.02:0.2");
    REQUIRE(g.size() == 11);
    CHECK(g[3] == 0.06);
    CHECK(g.back() == 0.2);
    CHECK(parse_value_grid("0.1, 0.3") == std::vector<double>{0.1, 0.3});
    CHECK_THROWS_AS((void)parse_value_grid("0:-1:1"), ParameterError);
}

// ============================================================================
// Checkpoints
// ============================================================================

TEST_CASE("checkpoint round trip and truncated loading") {
    const ChainSpec spec{6, 0.10026, 0.18268, 0.1};
    DiagonalizeOptions o;
    o.solver.k = 12;
    const auto sol = diagonalize_chain(spec, o);
    const auto path = scratch("roundtrip.bin");
    write_checkpoint(path, spec, sol, 1e-6);
    CheckpointHeader h;
    const auto back = read_checkpoint(path, 0, &h);
    CHECK(h.sites == 6);
    CHECK(h.k == 12);
    CHECK(h.dimension == 400);
    CHECK(back.energies == sol.energies);
    CHECK(back.vectors == sol.vectors);
    CHECK(back.parity == sol.parity);
    CHECK(back.cluster == sol.cluster);
    const auto part = read_checkpoint(path, 5);
    CHECK(part.count() == 5);
    CHECK(part.vectors == sol.vectors.leftCols(5));
}

TEST_CASE("rerunning with the same seed writes an identical checkpoint") {
    const ChainSpec spec{8, 0.18268, 0.10026, 0.1};
    DiagonalizeOptions o;
    o.solver.k = 10;
    const auto a = scratch("det-a.bin");
    const auto b = scratch("det-b.bin");
    write_checkpoint(a, spec, diagonalize_chain(spec, o), 1e-6);
    write_checkpoint(b, spec, diagonalize_chain(spec, o), 1e-6);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("stale checkpoints are detected") {
    const ChainSpec spec{4, 0.10026, 0.18268, 0.1};
    DiagonalizeOptions o;
    o.solver.k = 6;
    const auto path = scratch("stale.bin");
    write_checkpoint(path, spec, diagonalize_chain(spec, o), 1e-6);
    const auto h = read_checkpoint_header(path);
    CHECK_NOTHROW(require_matching(h, spec, o.solver.seed, o.solver.tol, 6));
    ChainSpec other = spec;
    other.U = 0.2;
    CHECK_THROWS_AS(require_matching(h, other, o.solver.seed, o.solver.tol, 6), StaleCheckpointError);
    CHECK_THROWS_AS(require_matching(h, spec, o.solver.seed + 1, o.solver.tol, 6), StaleCheckpointError);
    CHECK_THROWS_AS(require_matching(h, spec, o.solver.seed, 1e-8, 6), StaleCheckpointError);
    CHECK_THROWS_AS(require_matching(h, spec, o.solver.seed, o.solver.tol, 7), StaleCheckpointError);
    CHECK(checkpoint_key(spec, 1, 1e-9) != checkpoint_key(other, 1, 1e-9));
}

TEST_CASE("cached diagonalization reuses a larger checkpoint") {
    const ChainSpec spec{6, 0.10026, 0.18268, 0.15};
    DiagonalizeOptions o;
    o.solver.k = 10;
    const auto dir = scratch("cache");
    fs::remove_all(dir);
    const auto first = cached_diagonalization(spec, o, dir);
    CHECK(fs::exists(checkpoint_path(dir, spec, o.solver.seed, o.solver.tol)));
    o.solver.k = 6;
    const auto second = cached_diagonalization(spec, o, dir);
    CHECK(second.count() == 6);
    CHECK(second.vectors == first.vectors.leftCols(6));
}

TEST_CASE("non-checkpoint files are rejected") {
    const auto path = scratch("garbage.bin");
    std::ofstream(path) << "not a checkpoint";
    CHECK_THROWS_AS((void)read_checkpoint_header(path), ParameterError);
}
