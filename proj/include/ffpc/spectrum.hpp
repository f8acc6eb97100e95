#ifndef FFPC_SPECTRUM_HPP
#define FFPC_SPECTRUM_HPP

// Piezo-scan transmission spectra: synthesis from cavity and coupling data,
// and analysis back into peaks, linewidth, finesse and beta.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ffpc/cavity.hpp"
#include "ffpc/mode_matching.hpp"

namespace ffpc
{
struct ScanConfig
{
    double span = 0.0;           // Hz
    std::size_t samples = 0;     // >= 100
    double center = 0.0;         // Hz, centre of the scan
    double sideband_frequency = 0.0; // Hz, 0 disables
    double sideband_fraction = 0.0;  // power in each sideband, [0, 0.5]
    double noise_rms = 0.0;      // additive, intensity units
    bool double_sided = false;   // FA-FA: both ports filter the mode
    std::uint64_t seed = 0;

    void validate() const;
};

struct PeakAnnotation
{
    double center = 0.0;
    double height = 0.0;
    double fwhm = 0.0;
    std::vector<ModeOrder> orders; // degenerate orders merged into this peak
    bool sideband = false;

    std::size_t multiplicity() const { return orders.size(); }
};

struct TransmissionSpectrum
{
    std::vector<double> detuning;  // Hz
    std::vector<double> intensity; // >= 0
    std::vector<PeakAnnotation> annotations;
};

/// Sum of Lorentzians (FWHM = FSR / F_nm, height T_nm) at each order's
/// resonance offset and its comb images, sideband replicas at +-Omega, then
/// noise. Degenerate orders are merged into one annotation.
TransmissionSpectrum synthesize(const CavityGeometry &geom, const CavityMode &mode, const CouplingSet &coupling,
                                const TransmissionModel &model, const ScanConfig &scan);

struct FittedPeak
{
    double center = 0.0;
    double height = 0.0;
    double fwhm = 0.0;
    double baseline = 0.0;
    double prominence = 0.0;
    double height_sigma = 0.0; // from the fit covariance and the noise RMS
    bool sideband = false;
};

struct SpectrumAnalysis
{
    std::vector<FittedPeak> peaks; // calibrated axis, ascending centre
    std::size_t fundamental = 0;   // index into peaks
    double beta = 0.0;
    double linewidth = 0.0;        // Hz, calibrated
    double axis_scale = 1.0;       // true / recorded frequency
    bool calibrated = false;
    std::optional<double> fsr;
    std::optional<double> finesse;
    std::vector<std::string> warnings;
};

/// Detect and fit peaks, calibrate the axis from the fundamental's sidebands
/// when scan.sideband_frequency > 0, and compute beta from carrier heights
/// within one FSR (when the cavity length is known). Throws EmptySpectrumError
/// if nothing rises 5 noise RMS above the floor.
SpectrumAnalysis analyze(const TransmissionSpectrum &spectrum, const ScanConfig &scan,
                         std::optional<double> cavity_length = std::nullopt);

/// Trapezoid integral of the sampled intensity.
double integrate_spectrum(const TransmissionSpectrum &spectrum);

} // namespace ffpc

#endif // FFPC_SPECTRUM_HPP
