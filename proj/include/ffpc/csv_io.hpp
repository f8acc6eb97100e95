#ifndef FFPC_CSV_IO_HPP
#define FFPC_CSV_IO_HPP

// Plain CSV tables with '#' comment headers. Writers take the comment lines
// (usually the resolved config) and emit them ahead of the column header.
// Readers skip comments, check the column header and report errors with
// the 1-based file line.

#include <iosfwd>
#include <string>
#include <vector>

#include "ffpc/fiber_assembly.hpp"
#include "ffpc/mode_matching.hpp"
#include "ffpc/spectrum.hpp"
#include "ffpc/sweep.hpp"

namespace ffpc
{
inline constexpr const char *kKnifeEdgeHeader = "z_um,x_um,power_fraction";
inline constexpr const char *kSpectrumHeader = "detuning_Hz,intensity";
inline constexpr const char *kCouplingHeader = "n,m,eta";
inline constexpr const char *kSweepHeader = "L_um,eta00,beta,finesse,T00,w0_um,z1_um,fsr_GHz,status";

/// Split multi-line text into comment lines.
std::vector<std::string> comment_lines(const std::string &text);

void write_knife_edge(std::ostream &os, const KnifeEdgeDataset &data, const std::vector<std::string> &comments = {});
void write_spectrum(std::ostream &os, const TransmissionSpectrum &s, const std::vector<std::string> &comments = {});
void write_coupling(std::ostream &os, const CouplingSet &c, const std::vector<std::string> &comments = {});
void write_sweep(std::ostream &os, const std::vector<SweepRow> &rows, const std::vector<std::string> &comments = {});

/// Readers throw ParseError. Comment lines (without the leading '#') are
/// appended to `comments` when given.
KnifeEdgeDataset read_knife_edge(std::istream &is, std::vector<std::string> *comments = nullptr);
TransmissionSpectrum read_spectrum(std::istream &is, std::vector<std::string> *comments = nullptr);
CouplingSet read_coupling(std::istream &is, std::vector<std::string> *comments = nullptr);

} // namespace ffpc

#endif // FFPC_CSV_IO_HPP
