#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "lscae/datasets.hpp"

namespace lscae {

/// Reads a rectangular numeric CSV. A first row containing any non-numeric
/// cell is taken as a header. `label_column` names a header column or gives a
/// zero-based column index; that column is removed from X and parsed as
/// integer labels. Throws ParseError or IoError.
Dataset load_csv(const std::filesystem::path& path,
                 const std::optional<std::string>& label_column = std::nullopt);

/// Writes a header row, then one row per sample with values at 17 significant
/// digits; labels (when present) go in a trailing `label_name` column.
void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::string& label_name = "label");

/// Shortest-safe round-trip text for a double (17 significant digits).
std::string format_double(double v);

}  // namespace lscae
