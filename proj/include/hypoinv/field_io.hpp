#pragma once

// Frequency-indexed CSV for spectral fields: header l0[,l1[,l2]],re,im and
// one row per lattice mode, numbers in shortest round-trip form.

#include <string>

#include "hypoinv/spectral_grid.hpp"

namespace hypoinv {

std::string field_to_csv(const SpectralField& f);

/// The lattice is inferred from the header and the row count; every mode
/// must appear exactly once.
SpectralField field_from_csv(const std::string& text);

void write_field_csv(const std::string& path, const SpectralField& f);
SpectralField read_field_csv(const std::string& path);

/// Shortest string that parses back to the same double.
std::string format_double(double v);

}  // namespace hypoinv
