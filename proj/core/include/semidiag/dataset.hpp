#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace semidiag {

/// Design matrix (column 0 is the intercept) paired with a nonnegative response.
struct Dataset {
  Eigen::MatrixXd design;
  Eigen::VectorXd response;
  std::vector<std::string> column_names;
  std::string response_name = "y";

  Eigen::Index rows() const { return design.rows(); }
  Eigen::Index cols() const { return design.cols(); }

  /// Throws DataError if shapes disagree, any entry is non-finite, a response
  /// is negative, or n < d.
  void validate() const;

  /// Copy without the named covariate column.
  Dataset drop_column(const std::string& name) const;

  /// Rows with strictly positive response.
  Dataset positive_part() const;

  /// 1.0 where the response equals zero, 0.0 elsewhere.
  Eigen::VectorXd zero_indicator() const;
};

/// Label used for the intercept column.
inline constexpr const char* kInterceptName = "(intercept)";

/// Throws LinAlgError if the matrix does not have full column rank.
void require_full_rank(const Eigen::MatrixXd& design);

}  // namespace semidiag
