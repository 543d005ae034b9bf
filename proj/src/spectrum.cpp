#include "chainhhg/spectrum.hpp"

#include "chainhhg/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace chainhhg {

Eigen::VectorXd dipole_acceleration(const Eigen::VectorXd& x, double dt) {
    const Eigen::Index m = x.size();
    if (m < 3) throw ParameterError("dipole_acceleration needs at least 3 samples");
    if (!(dt > 0.0)) throw ParameterError("sample spacing must be positive");
    Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
    const double inv = 1.0 / (dt * dt);
    for (Eigen::Index j = 1; j + 1 < m; ++j) a[j] = (x[j - 1] - 2.0 * x[j] + x[j + 1]) * inv;
    return a;
}

SpectrumResult harmonic_spectrum(const Eigen::VectorXd& acceleration, const PulseSpec& pulse) {
    pulse.validate();
    const Eigen::Index m = acceleration.size();
    if (m < 3) throw ParameterError("spectrum needs at least 3 samples");
    const double dt = pulse.duration() / static_cast<double>(m - 1);

    const auto bins = m / 2 + 1;
    double* in = fftw_alloc_real(static_cast<std::size_t>(m));
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(bins));
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in, out, FFTW_ESTIMATE);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double s = std::sin(std::numbers::pi * static_cast<double>(j) / static_cast<double>(m - 1));
        in[j] = s * s * acceleration[j];
    }
    fftw_execute(plan);

    SpectrumResult r;
    r.harmonic_order.resize(bins);
    r.yield.resize(bins);
    r.log10_yield.resize(bins);
    const double step = 2.0 * std::numbers::pi / (static_cast<double>(m) * dt * pulse.omega);
    for (Eigen::Index b = 0; b < bins; ++b) {
        r.harmonic_order[b] = step * static_cast<double>(b);
        r.yield[b] = out[b][0] * out[b][0] + out[b][1] * out[b][1];
        r.log10_yield[b] = r.yield[b] > 0.0 ? std::log10(r.yield[b]) : kLogFloor;
    }
    fftw_destroy_plan(plan);
    fftw_free(out);
    fftw_free(in);
    return r;
}

SpectrumResult spectrum_from_positions(const Eigen::VectorXd& x, const PulseSpec& pulse) {
    if (x.size() < 3) throw ParameterError("spectrum needs at least 3 samples");
    const double dt = pulse.duration() / static_cast<double>(x.size() - 1);
    return harmonic_spectrum(dipole_acceleration(x, dt), pulse);
}

double mean_log_yield(const SpectrumResult& s, double lo, double hi) {
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index b = 0; b < s.size(); ++b)
        if (s.harmonic_order[b] >= lo && s.harmonic_order[b] <= hi) {
            sum += s.log10_yield[b];
            ++count;
        }
    if (count == 0) throw ParameterError("no spectral bins in the requested order range");
    return sum / count;
}

std::vector<Eigen::Index> spectral_peaks(const SpectrumResult& s, double max_order, double relative_floor) {
    std::vector<Eigen::Index> peaks;
    if (s.size() < 3) return peaks;
    const double floor = relative_floor * s.yield.maxCoeff();
    for (Eigen::Index b = 1; b + 1 < s.size() && s.harmonic_order[b] <= max_order; ++b)
        if (s.yield[b] > s.yield[b - 1] && s.yield[b] > s.yield[b + 1] && s.yield[b] > floor) peaks.push_back(b);
    return peaks;
}

void write_spectrum_csv(std::ostream& os, const SpectrumResult& s) {
    for (const auto& [key, value] : s.metadata) os << "# " << key << '=' << value << '\n';
    os << "harmonic_order,yield,log10_yield\n";
    char buf[96];
    for (Eigen::Index b = 0; b < s.size(); ++b) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.harmonic_order[b], s.yield[b], s.log10_yield[b]);
        os << buf;
    }
}

SpectrumResult read_spectrum_csv(std::istream& is) {
    SpectrumResult s;
    std::vector<double> order, yield, logy;
    std::string line;
    bool header = false;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                auto key = line.substr(1, eq - 1);
                key.erase(0, key.find_first_not_of(' '));
                s.metadata.emplace_back(key, line.substr(eq + 1));
            }
            continue;
        }
        if (!header) {
            if (line != "harmonic_order,yield,log10_yield")
                throw ParameterError("unexpected spectrum header at line " + std::to_string(lineno));
            header = true;
            continue;
        }
        double a = 0, b = 0, c = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3)
            throw ParameterError("malformed spectrum row at line " + std::to_string(lineno));
        order.push_back(a);
        yield.push_back(b);
        logy.push_back(c);
    }
    s.harmonic_order = Eigen::Map<Eigen::VectorXd>(order.data(), static_cast<Eigen::Index>(order.size()));
    s.yield = Eigen::Map<Eigen::VectorXd>(yield.data(), static_cast<Eigen::Index>(yield.size()));
    s.log10_yield = Eigen::Map<Eigen::VectorXd>(logy.data(), static_cast<Eigen::Index>(logy.size()));
    return s;
}

} // namespace chainhhg
