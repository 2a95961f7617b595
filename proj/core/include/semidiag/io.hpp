#pragma once

// CSV ingestion and the plain-text fitted-model format.
//
// CSV: comma-delimited, header row required, unquoted numeric cells.
// Model file: line-oriented `key value...` records opened by a version line;
// every parameter is written with 17 significant digits.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "semidiag/dataset.hpp"
#include "semidiag/models.hpp"

namespace semidiag::io {

inline constexpr int kModelFormatVersion = 1;

/// Reads `response_column` and the covariates into a Dataset with an
/// intercept column prepended. An empty `covariates` list selects every
/// non-response column in header order. Throws DataError naming the row and
/// column of a blank or non-numeric cell, a missing column, or a negative
/// response.
Dataset load_csv(std::istream& in, const std::string& response_column,
                 const std::vector<std::string>& covariates = {});
Dataset load_csv(const std::filesystem::path& path, const std::string& response_column,
                 const std::vector<std::string>& covariates = {});

/// All cells of one named column as numbers (any sign). Throws DataError on a
/// missing column or a blank or non-numeric cell.
std::vector<double> read_column(std::istream& in, const std::string& column);
std::vector<double> read_column(const std::filesystem::path& path, const std::string& column);

/// Writes the response followed by the non-intercept covariates.
void write_csv(std::ostream& out, const Dataset& data);

struct ModelFile {
  models::FittedModel model;
  std::vector<std::string> column_names;
};

void write_model(std::ostream& out, const ModelFile& file);
ModelFile read_model(std::istream& in);
ModelFile read_model(const std::filesystem::path& path);

/// Formats with 17 significant digits (round-trips every double).
std::string format_double(double v);

}  // namespace semidiag::io
