#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specbench/bench.hpp"

namespace specbench {

// CSV emitters.  Every document opens with a '#' provenance comment carrying
// the tool version and the config hash, then the header row.  Output bytes
// are a pure function of the inputs.
std::string curves_csv(const std::vector<AccuracyCurve>& curves, std::uint64_t config_hash);
std::string auac_csv(const std::vector<AUACScore>& scores, std::uint64_t config_hash);
std::string ranking_csv(const RankingTable& table, std::uint64_t config_hash);

// Deterministic SVG plots.  Curves: one panel per curve, frequency on x in
// [0, 2], accuracy on y in [0, 1], a +/-1 std band, and the mean polyline
// broken wherever a skipped bin interrupts the curve.  Energy: grouped bars
// per bin for the input/target/output energies.
std::string render_curves_svg(const std::vector<AccuracyCurve>& curves, std::uint64_t config_hash);
std::string render_energy_svg(const EnergyComparison& comparison, std::uint64_t config_hash);

}  // namespace specbench
