#pragma once

#include <filesystem>

#include "ptycho/forward.hpp"

namespace ptycho {

/// "PMEAS1" container: magic, geometry (image dims, window size, position
/// count, u32-LE (row, col) pairs), alpha as f64-LE, a noiseless flag byte,
/// the seed as u64-LE, then per-position N x N f64-LE amplitude blocks in
/// position order.  The probe travels separately as a CIMG1 file.
std::vector<std::uint8_t> encode_measurements(const MeasurementSet& m);
MeasurementSet decode_measurements(const std::uint8_t* data, std::size_t size, const Probe& probe);

void save_measurements(const std::filesystem::path& path, const MeasurementSet& m);
MeasurementSet load_measurements(const std::filesystem::path& path, const Probe& probe);

}  // namespace ptycho
