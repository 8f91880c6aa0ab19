#pragma once

// Expression data ingestion and the per-gene regression problems built from it.

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace shrinknet {

using Index = Eigen::Index;

/// Samples in rows, genes in columns.
struct ExpressionMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> gene_ids;
  std::vector<std::string> sample_ids;

  Index samples() const { return values.rows(); }
  Index genes() const { return values.cols(); }
};

enum class TableFormat { csv, tsv };

/// Throws ValidationError unless n >= 3, p >= 2, ids are unique and sized to match, and all values finite.
void validate(const ExpressionMatrix& m);

/// Parse a delimited table: a header row of gene ids, then one row per sample.
/// A non-numeric first cell in the first data row marks a leading sample-id column.
/// With `transpose`, rows are genes and columns are samples instead.
ExpressionMatrix parse_expression_matrix(std::istream& in, char delimiter, bool transpose = false);

ExpressionMatrix load_expression_matrix(const std::filesystem::path& path, TableFormat format,
                                        bool transpose = false);

/// Format from the file extension (".tsv"/".txt" are tab separated, everything else csv).
TableFormat format_from_path(const std::filesystem::path& path);

void write_expression_matrix(std::ostream& out, const ExpressionMatrix& m, char delimiter = ',');

/// Centre every column; with `scale`, also divide by the sample standard deviation.
/// Throws DegenerateGeneError for a constant column.
ExpressionMatrix standardize(ExpressionMatrix m, bool scale = true);

/// Response y_j regressed on the other genes (or on an explicit covariate list).
struct RegressionProblem {
  Eigen::VectorXd response;
  Eigen::MatrixXd design;
  Index target_gene = 0;
  std::vector<Index> covariate_genes;

  Index samples() const { return response.size(); }
  Index covariates() const { return design.cols(); }
};

/// Design = all columns except j, in their original order.
RegressionProblem build_problem(const ExpressionMatrix& m, Index j);

/// Design restricted to `covariates`. With `center`, response and design are
/// centred within the sub-model, which plays the role of an unpenalised intercept.
RegressionProblem build_subproblem(const ExpressionMatrix& m, Index j, std::span<const Index> covariates,
                                   bool center = true);

/// Thin SVD X = U D V^T = F V^T truncated at the numerical rank.
struct ReducedProblem {
  Eigen::MatrixXd reduced_design;  // F = U D, n x r
  Eigen::MatrixXd right_factors;   // V, (p-1) x r
  Eigen::VectorXd singular_values;
  Eigen::VectorXd response;

  Index rank() const { return reduced_design.cols(); }
};

inline constexpr double kRankTolerance = 1e-10;

ReducedProblem svd_reduce(const RegressionProblem& prob);

struct CoefficientMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

/// beta = V theta; only the diagonal of V Cov(theta) V^T is formed.
CoefficientMoments back_transform(const Eigen::VectorXd& theta_mean, const Eigen::MatrixXd& theta_cov,
                                  const Eigen::MatrixXd& right_factors);

}  // namespace shrinknet
