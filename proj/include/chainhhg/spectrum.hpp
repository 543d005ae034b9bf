#pragma once

/**
 * @file spectrum.hpp
 * @brief Dipole acceleration, windowed power spectrum and the spectrum CSV.
 */

#include "chainhhg/dynamics.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace chainhhg {

using Metadata = std::vector<std::pair<std::string, std::string>>;

struct SpectrumResult {
    Eigen::VectorXd harmonic_order; ///< Omega / omega, bins 0 .. M/2
    Eigen::VectorXd yield;          ///< |FFT(hann * a)|^2, unnormalized
    Eigen::VectorXd log10_yield;    ///< log10(yield), zero yield maps to kLogFloor
    Metadata metadata;

    [[nodiscard]] Eigen::Index size() const noexcept { return yield.size(); }
};

/// log10 reported for bins with exactly zero yield.
inline constexpr double kLogFloor = -324.0;

/// Central second difference; the two endpoints are set to zero.
[[nodiscard]] Eigen::VectorXd dipole_acceleration(const Eigen::VectorXd& x, double dt);

/// Power spectrum of hann(t) a(t) sampled uniformly on [0, T] (T = pulse
/// duration). The bin m sits at Omega_m = 2 pi m / (M dt), reported as Omega_m / omega.
[[nodiscard]] SpectrumResult harmonic_spectrum(const Eigen::VectorXd& acceleration, const PulseSpec& pulse);

/// Convenience: x(t) on the uniform pulse grid straight to a spectrum.
[[nodiscard]] SpectrumResult spectrum_from_positions(const Eigen::VectorXd& x, const PulseSpec& pulse);

/// Mean log10 yield over bins whose order lies in [lo, hi].
[[nodiscard]] double mean_log_yield(const SpectrumResult& s, double lo, double hi);

/// Bins that are strict local maxima with order <= max_order and yield above
/// relative_floor * max(yield).
[[nodiscard]] std::vector<Eigen::Index> spectral_peaks(const SpectrumResult& s, double max_order,
                                                       double relative_floor = 1e-25);

/// Header lines "# key=value", then harmonic_order,yield,log10_yield rows.
void write_spectrum_csv(std::ostream& os, const SpectrumResult& s);
[[nodiscard]] SpectrumResult read_spectrum_csv(std::istream& is);

} // namespace chainhhg
