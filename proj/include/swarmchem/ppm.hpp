#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "swarmchem/metrics.hpp"

namespace swarmchem::metrics {

/// Binary P6 with a "# step <n>" comment line after the magic.
void write_ppm(std::ostream& out, const Bitmap& bitmap);
void write_ppm(const std::filesystem::path& path, const Bitmap& bitmap);

/// Reads P6 (maxval 255). The step comes from a "# step" comment if present.
Bitmap read_ppm(std::istream& in);
Bitmap read_ppm(const std::filesystem::path& path);

/// "snap_<step>.ppm"
std::string snapshot_filename(std::uint64_t step);

/// snap_<step>.ppm files in `dir`, loaded in ascending step order. The step
/// is taken from the file name.
std::vector<Bitmap> load_snapshot_dir(const std::filesystem::path& dir);

}  // namespace swarmchem::metrics
