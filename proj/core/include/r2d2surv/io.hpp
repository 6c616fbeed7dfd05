#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "r2d2surv/model.hpp"

namespace r2d2surv {

// Numeric CSV table: one header row, comma separated, decimal point.
struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;

    /// Column index by name, or -1.
    Eigen::Index find(std::string_view name) const;
};

// CSV table kept as text, for mixed string/number files.
struct TextTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name, or -1.
    std::ptrdiff_t find(std::string_view name) const;
};

TextTable parse_text_csv(std::string_view text);
TextTable read_text_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal form of x ("nan", "inf", "-inf" for non-finite values).
std::string format_number(double x);

/// Parse numeric CSV text. Errors carry the 1-based line number.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Build a survival dataset from a table with `time` and `status` columns;
/// every other column is a covariate.
SurvivalDataset survival_from_table(const CsvTable& table, bool standardize = true);
SurvivalDataset read_survival_csv(const std::filesystem::path& path, bool standardize = true);

/// Write `content` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace r2d2surv
