#include "chainhhg/config.hpp"

#include "chainhhg/analysis.hpp"
#include "chainhhg/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace chainhhg {

namespace {

const std::vector<std::string> kKeys = {
    "chain.N",          "chain.v",          "chain.w",           "chain.U",           "chain.phase",
    "pulse.omega",      "pulse.E0_over_omega", "pulse.n_cyc",
    "solver.k",         "solver.tol",       "solver.seed",       "solver.block_size", "solver.max_restarts",
    "solver.symmetry",  "solver.memory_gb",
    "propagation.samples", "propagation.ode_tol", "propagation.states", "propagation.keep",
    "output.directory", "output.checkpoint", "output.formats",   "output.trajectory", "output.threshold",
    "output.top",       "output.state",     "output.u_values",   "output.threads",
};

std::string canonical(const std::string& key) {
    if (key.find('.') != std::string::npos) {
        for (const auto& k : kKeys)
            if (k == key) return k;
    } else {
        for (const auto& k : kKeys)
            if (k.substr(k.find('.') + 1) == key) return k;
    }
    throw ParameterError("unknown configuration key '" + key + "'");
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size() || !std::isfinite(x)) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw ParameterError("'" + key + "' expects a number, got '" + value + "'");
    }
}

long long to_integer(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw ParameterError("'" + key + "' expects an integer, got '" + value + "'");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
    if (value == "0" || value == "false" || value == "no" || value == "off") return false;
    throw ParameterError("'" + key + "' expects a boolean, got '" + value + "'");
}

std::string fmt(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, res.ptr};
}

} // namespace

const std::vector<std::string>& config_keys() { return kKeys; }

RunConfig::RunConfig() {
    diag.solver.k = 200;
}

void RunConfig::set(const std::string& raw_key, const std::string& value) {
    const std::string key = canonical(raw_key);
    if (key == "chain.N") chain.sites = static_cast<int>(to_integer(key, value));
    else if (key == "chain.v") chain.v = to_double(key, value);
    else if (key == "chain.w") chain.w = to_double(key, value);
    else if (key == "chain.U") chain.U = to_double(key, value);
    else if (key == "chain.phase") {
        if (value == "topological") {
            chain.v = kHoppingWeak;
            chain.w = kHoppingStrong;
        } else if (value == "trivial") {
            chain.v = kHoppingStrong;
            chain.w = kHoppingWeak;
        } else {
            throw ParameterError("phase must be 'topological' or 'trivial'");
        }
    }
    else if (key == "pulse.omega") pulse.omega = to_double(key, value);
    else if (key == "pulse.E0_over_omega") pulse.e0_over_omega = to_double(key, value);
    else if (key == "pulse.n_cyc") pulse.cycles = static_cast<int>(to_integer(key, value));
    else if (key == "solver.k") diag.solver.k = static_cast<int>(to_integer(key, value));
    else if (key == "solver.tol") diag.solver.tol = to_double(key, value);
    else if (key == "solver.seed") {
        const auto s = to_integer(key, value);
        if (s < 0) throw ParameterError("seed must be non-negative");
        diag.solver.seed = static_cast<std::uint64_t>(s);
    }
    else if (key == "solver.block_size") diag.solver.block_size = static_cast<int>(to_integer(key, value));
    else if (key == "solver.max_restarts") diag.solver.max_restarts = static_cast<int>(to_integer(key, value));
    else if (key == "solver.symmetry") diag.use_symmetry = to_bool(key, value);
    else if (key == "solver.memory_gb") {
        const double gb = to_double(key, value);
        if (!(gb > 0.0)) throw ParameterError("memory_gb must be positive");
        const auto bytes = static_cast<std::size_t>(gb * 1024.0 * 1024.0 * 1024.0);
        diag.solver.memory_cap_bytes = bytes;
        diag.assembly.memory_cap_bytes = bytes;
    }
    else if (key == "propagation.samples") propagation.samples = static_cast<int>(to_integer(key, value));
    else if (key == "propagation.ode_tol") propagation.ode_tol = to_double(key, value);
    else if (key == "propagation.states") states = static_cast<int>(to_integer(key, value));
    else if (key == "propagation.keep") keep = value;
    else if (key == "output.directory") directory = value;
    else if (key == "output.checkpoint") checkpoint = value;
    else if (key == "output.formats") formats = value;
    else if (key == "output.trajectory") trajectory = to_bool(key, value);
    else if (key == "output.threshold") threshold = to_double(key, value);
    else if (key == "output.top") top = static_cast<int>(to_integer(key, value));
    else if (key == "output.state") state = static_cast<int>(to_integer(key, value));
    else if (key == "output.u_values") u_values = value;
    else if (key == "output.threads") threads = static_cast<int>(to_integer(key, value));
}

void RunConfig::load_ini(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ParameterError("cannot open config file " + path.string());
    load_ini(is);
}

void RunConfig::load_ini(std::istream& is) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParameterError(std::string("config parse error: ") + e.what());
    }
    // chain.phase first so explicit v/w in the same file take precedence.
    if (const auto phase = tree.get_optional<std::string>("chain.phase")) set("chain.phase", *phase);
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ParameterError("key '" + section + "' must be inside a section");
        for (const auto& [name, value] : body) {
            const std::string key = section + "." + name;
            if (key == "chain.phase") continue;
            set(key, value.data());
        }
    }
}

void RunConfig::validate() const {
    chain.validate();
    if (!(chain.v > 0.0) || !(chain.w > 0.0)) throw ParameterError("hopping amplitudes must be positive");
    if (chain.U < 0.0) throw ParameterError("U must be non-negative");
    pulse.validate();
    if (diag.solver.k < 1) throw ParameterError("k must be >= 1");
    if (!(diag.solver.tol > 0.0)) throw ParameterError("tol must be positive");
    if (diag.solver.block_size < 1) throw ParameterError("block_size must be >= 1");
    if (propagation.samples < 3) throw ParameterError("samples must be >= 3");
    if (!(propagation.ode_tol > 0.0)) throw ParameterError("ode_tol must be positive");
    if (states < 0 || states > diag.solver.k) throw ParameterError("states must lie in [0, k]");
    if (!(threshold > 0.0)) throw ParameterError("threshold must be positive");
    if (top < 1) throw ParameterError("top must be >= 1");
    if (state < 0 || state >= diag.solver.k) throw ParameterError("state must lie in [0, k)");
    if (threads < 0) throw ParameterError("threads must be >= 0");
}

std::filesystem::path RunConfig::checkpoint_file() const {
    if (!checkpoint.empty()) return checkpoint;
    return checkpoint_path(directory, chain, diag.solver.seed, diag.solver.tol);
}

void RunConfig::write_ini(std::ostream& os) const {
    os << "[chain]\nN = " << chain.sites << "\nv = " << fmt(chain.v) << "\nw = " << fmt(chain.w)
       << "\nU = " << fmt(chain.U) << "\n\n";
    os << "[pulse]\nomega = " << fmt(pulse.omega) << "\nE0_over_omega = " << fmt(pulse.e0_over_omega)
       << "\nn_cyc = " << pulse.cycles << "\n\n";
    os << "[solver]\nk = " << diag.solver.k << "\ntol = " << fmt(diag.solver.tol) << "\nseed = " << diag.solver.seed
       << "\nblock_size = " << diag.solver.block_size << "\nmax_restarts = " << diag.solver.max_restarts
       << "\nsymmetry = " << (diag.use_symmetry ? "true" : "false") << "\n\n";
    os << "[propagation]\nsamples = " << propagation.samples << "\node_tol = " << fmt(propagation.ode_tol)
       << "\nstates = " << states << "\nkeep = " << keep << "\n\n";
    os << "[output]\ndirectory = " << directory.string() << "\ncheckpoint = " << checkpoint
       << "\nformats = " << formats << "\ntrajectory = " << (trajectory ? "true" : "false")
       << "\nthreshold = " << fmt(threshold) << "\ntop = " << top << "\nstate = " << state
       << "\nu_values = " << u_values << "\nthreads = " << threads << "\n";
}

std::vector<double> parse_value_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::stringstream ss(text);
        std::string a, s, b;
        std::getline(ss, a, ':');
        std::getline(ss, s, ':');
        std::getline(ss, b);
        const double lo = to_double("u_values", a);
        const double step = to_double("u_values", s);
        const double hi = to_double("u_values", b);
        if (!(step > 0.0) || hi < lo) throw ParameterError("grid 'a:step:b' needs step > 0 and b >= a");
        const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
        for (long long i = 0; i < count; ++i)
            out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
            if (item.find_first_not_of(" \t") != std::string::npos) {
                item.erase(0, item.find_first_not_of(" \t"));
                item.erase(item.find_last_not_of(" \t") + 1);
                out.push_back(to_double("u_values", item));
            }
    }
    if (out.empty()) throw ParameterError("empty value grid");
    return out;
}

} // namespace chainhhg
