#include "semidiag/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "semidiag/error.hpp"

namespace semidiag {

void Dataset::validate() const {
  if (response.size() != design.rows()) {
    throw DataError("design has " + std::to_string(design.rows()) + " rows but response has " +
                    std::to_string(response.size()));
  }
  if (static_cast<Eigen::Index>(column_names.size()) != design.cols()) {
    throw DataError("column name count does not match design width");
  }
  if (design.rows() < design.cols()) {
    throw DataError("fewer observations (" + std::to_string(design.rows()) +
                    ") than columns (" + std::to_string(design.cols()) + ")");
  }
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    for (Eigen::Index j = 0; j < design.cols(); ++j) {
      if (!std::isfinite(design(i, j))) {
        throw DataError("non-finite covariate at row " + std::to_string(i) + ", column " +
                        column_names[static_cast<std::size_t>(j)]);
      }
    }
    if (!std::isfinite(response[i])) {
      throw DataError("non-finite response at row " + std::to_string(i));
    }
    if (response[i] < 0.0) {
      throw DataError("negative response at row " + std::to_string(i));
    }
  }
}

Dataset Dataset::drop_column(const std::string& name) const {
  const auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) throw DataError("no column named " + name);
  const auto drop = static_cast<Eigen::Index>(it - column_names.begin());
  Dataset out;
  out.response = response;
  out.response_name = response_name;
  out.design.resize(design.rows(), design.cols() - 1);
  for (Eigen::Index j = 0, k = 0; j < design.cols(); ++j) {
    if (j == drop) continue;
    out.design.col(k++) = design.col(j);
    out.column_names.push_back(column_names[static_cast<std::size_t>(j)]);
  }
  return out;
}

Dataset Dataset::positive_part() const {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < response.size(); ++i) {
    if (response[i] > 0.0) keep.push_back(i);
  }
  Dataset out;
  out.column_names = column_names;
  out.response_name = response_name;
  out.design.resize(static_cast<Eigen::Index>(keep.size()), design.cols());
  out.response.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.design.row(static_cast<Eigen::Index>(r)) = design.row(keep[r]);
    out.response[static_cast<Eigen::Index>(r)] = response[keep[r]];
  }
  return out;
}

Eigen::VectorXd Dataset::zero_indicator() const {
  return (response.array() == 0.0).cast<double>().matrix();
}

void require_full_rank(const Eigen::MatrixXd& design) {
  if (design.rows() < design.cols()) {
    throw LinAlgError("design has fewer rows than columns");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) {
    throw LinAlgError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                      " < " + std::to_string(design.cols()) + ")");
  }
}

}  // namespace semidiag
