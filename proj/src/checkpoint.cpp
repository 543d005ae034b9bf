#include "chainhhg/checkpoint.hpp"

#include "chainhhg/errors.hpp"

#include "json.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace chainhhg {

namespace {

constexpr char kMagic[8] = {'C', 'H', 'H', 'G', 'C', 'K', 'P', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void get(std::istream& is, T& value) {
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw ParameterError("checkpoint truncated");
}

void put_ints(std::ostream& os, const std::vector<int>& xs, int k) {
    for (int i = 0; i < k; ++i) put(os, static_cast<std::int32_t>(i < static_cast<int>(xs.size()) ? xs[static_cast<std::size_t>(i)] : 0));
}

std::vector<int> get_ints(std::istream& is, int stored, int keep) {
    std::vector<int> out(static_cast<std::size_t>(keep));
    for (int i = 0; i < stored; ++i) {
        std::int32_t x = 0;
        get(is, x);
        if (i < keep) out[static_cast<std::size_t>(i)] = x;
    }
    return out;
}

CheckpointHeader read_header(std::istream& is, const std::filesystem::path& path) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0) throw ParameterError(path.string() + " is not a checkpoint file");
    std::uint32_t version = 0;
    get(is, version);
    if (version != kVersion) throw ParameterError("unsupported checkpoint version " + std::to_string(version));
    CheckpointHeader h;
    get(is, h.sites);
    get(is, h.v);
    get(is, h.w);
    get(is, h.U);
    get(is, h.k);
    get(is, h.seed);
    get(is, h.tol);
    get(is, h.cluster_gap);
    get(is, h.dimension);
    return h;
}

} // namespace

std::uint64_t checkpoint_key(const ChainSpec& spec, std::uint64_t seed, double tol) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "N=%d;v=%.17g;w=%.17g;U=%.17g;seed=%llu;tol=%.17g", spec.sites, spec.v, spec.w,
                  spec.U, static_cast<unsigned long long>(seed), tol);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const char* c = buf; *c; ++c) {
        hash ^= static_cast<unsigned char>(*c);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string checkpoint_key_hex(const ChainSpec& spec, std::uint64_t seed, double tol) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(checkpoint_key(spec, seed, tol)));
    return buf;
}

void write_checkpoint(const std::filesystem::path& path, const ChainSpec& spec, const EigenSolution& sol,
                      double cluster_gap) {
    const auto tmp = std::filesystem::path(path.string() + ".partial");
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ParameterError("cannot write " + tmp.string());
        const int k = sol.count();
        os.write(kMagic, 8);
        put(os, kVersion);
        put(os, static_cast<std::int32_t>(spec.sites));
        put(os, spec.v);
        put(os, spec.w);
        put(os, spec.U);
        put(os, static_cast<std::int32_t>(k));
        put(os, sol.seed);
        put(os, sol.tol);
        put(os, cluster_gap);
        put(os, static_cast<std::uint64_t>(sol.dimension()));
        os.write(reinterpret_cast<const char*>(sol.energies.data()), static_cast<std::streamsize>(k * sizeof(double)));
        os.write(reinterpret_cast<const char*>(sol.residuals.data()), static_cast<std::streamsize>(k * sizeof(double)));
        put_ints(os, sol.parity, k);
        put_ints(os, sol.spin_flip, k);
        put_ints(os, sol.cluster, k);
        os.write(reinterpret_cast<const char*>(sol.vectors.data()),
                 static_cast<std::streamsize>(sol.vectors.size() * static_cast<Eigen::Index>(sizeof(double))));
        if (!os) throw ParameterError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_checkpoint_sidecar(const std::filesystem::path& path, const ChainSpec& spec, const EigenSolution& sol) {
    nlohmann::ordered_json j;
    j["N"] = spec.sites;
    j["v"] = spec.v;
    j["w"] = spec.w;
    j["U"] = spec.U;
    j["k"] = sol.count();
    j["dimension"] = sol.dimension();
    j["seed"] = sol.seed;
    j["tol"] = sol.tol;
    j["key"] = checkpoint_key_hex(spec, sol.seed, sol.tol);
    j["energies"] = std::vector<double>(sol.energies.data(), sol.energies.data() + sol.count());
    j["residuals"] = std::vector<double>(sol.residuals.data(), sol.residuals.data() + sol.count());
    j["parity"] = sol.parity;
    j["spin_flip"] = sol.spin_flip;
    j["cluster"] = sol.cluster;
    std::ofstream os(path);
    if (!os) throw ParameterError("cannot write " + path.string());
    os << j.dump(2) << '\n';
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParameterError("cannot open checkpoint " + path.string());
    return read_header(is, path);
}

EigenSolution read_checkpoint(const std::filesystem::path& path, int max_states, CheckpointHeader* header) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParameterError("cannot open checkpoint " + path.string());
    const CheckpointHeader h = read_header(is, path);
    const int stored = h.k;
    const int keep = (max_states > 0 && max_states < stored) ? max_states : stored;
    EigenSolution sol;
    sol.seed = h.seed;
    sol.tol = h.tol;
    Eigen::VectorXd e(stored), r(stored);
    is.read(reinterpret_cast<char*>(e.data()), static_cast<std::streamsize>(stored * sizeof(double)));
    is.read(reinterpret_cast<char*>(r.data()), static_cast<std::streamsize>(stored * sizeof(double)));
    if (!is) throw ParameterError("checkpoint truncated");
    sol.energies = e.head(keep);
    sol.residuals = r.head(keep);
    sol.parity = get_ints(is, stored, keep);
    sol.spin_flip = get_ints(is, stored, keep);
    sol.cluster = get_ints(is, stored, keep);
    sol.vectors.resize(static_cast<Eigen::Index>(h.dimension), keep);
    is.read(reinterpret_cast<char*>(sol.vectors.data()),
            static_cast<std::streamsize>(sol.vectors.size() * static_cast<Eigen::Index>(sizeof(double))));
    if (!is) throw ParameterError("checkpoint truncated");
    if (header) *header = h;
    return sol;
}

void require_matching(const CheckpointHeader& header, const ChainSpec& spec, std::uint64_t seed, double tol, int k) {
    const bool same = checkpoint_key(header.chain(), header.seed, header.tol) == checkpoint_key(spec, seed, tol);
    if (!same) {
        std::ostringstream os;
        os << "checkpoint was computed for N=" << header.sites << " v=" << header.v << " w=" << header.w
           << " U=" << header.U << " seed=" << header.seed << " tol=" << header.tol
           << ", which does not match the configuration; rerun `diagonalize`";
        throw StaleCheckpointError(os.str());
    }
    if (header.k < k)
        throw StaleCheckpointError("checkpoint holds " + std::to_string(header.k) + " states but " +
                                   std::to_string(k) + " were requested; rerun `diagonalize` with k >= " +
                                   std::to_string(k));
}

} // namespace chainhhg
