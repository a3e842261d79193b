#pragma once

#include "diffmean/estimation.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace diffmean {

/**
 * Comma-separated sample files with a header row.
 *
 * Column schemes: `angle_deg` or `angle_rad` (circle), `v0..v{m-1}`
 * (Euclidean R^m), `x0..x{m}` (sphere or hyperboloid, chosen by `kind`).
 * An optional `weight` column holds nonnegative sample weights.
 * Malformed input throws DomainError with the offending line number.
 */
Sample parse_dataset(std::istream& in, std::optional<ManifoldKind> kind = std::nullopt);
Sample read_dataset(const std::string& path, std::optional<ManifoldKind> kind = std::nullopt);

/// Writes with 17 significant digits so that parse_dataset recovers the points.
void write_dataset(std::ostream& out, const Sample& s, bool degrees = false);

}  // namespace diffmean
