#include "shrinknet/expression.hpp"

#include "shrinknet/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace shrinknet {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    fields.emplace_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "na" || s == "?";
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

void validate(const ExpressionMatrix& m) {
  const Index n = m.samples();
  const Index p = m.genes();
  if (n < 3) throw ValidationError("expression matrix needs at least 3 samples, got " + std::to_string(n));
  if (p < 2) throw ValidationError("expression matrix needs at least 2 genes, got " + std::to_string(p));
  if (static_cast<Index>(m.gene_ids.size()) != p)
    throw ValidationError("gene id count does not match column count");
  if (static_cast<Index>(m.sample_ids.size()) != n)
    throw ValidationError("sample id count does not match row count");
  std::unordered_set<std::string> seen;
  for (const auto& g : m.gene_ids) {
    if (!seen.insert(g).second) throw ValidationError("duplicate gene id '" + g + "'");
  }
  seen.clear();
  for (const auto& s : m.sample_ids) {
    if (!seen.insert(s).second) throw ValidationError("duplicate sample id '" + s + "'");
  }
  if (!m.values.allFinite()) throw ValidationError("expression matrix contains non-finite values");
}

ExpressionMatrix parse_expression_matrix(std::istream& in, char delimiter, bool transpose) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    rows.push_back(split(line, delimiter));
    line_numbers.push_back(line_no);
  }
  if (rows.size() < 2) throw MalformedInputError("expected a header row and at least one data row", line_no, 1);

  const auto& header = rows.front();
  const auto& first = rows[1];
  double probe = 0.0;
  const bool has_row_labels = !first.empty() && !is_missing_token(first[0]) && !parse_double(first[0], probe);
  const std::size_t width = first.size();
  const std::size_t label_cols = has_row_labels ? 1 : 0;

  // R-style tables omit the corner cell of the header.
  std::size_t header_skip = 0;
  const bool header_ok = has_row_labels ? (header.size() == width || header.size() + 1 == width)
                                        : header.size() == width;
  if (!header_ok)
    throw MalformedInputError("header has " + std::to_string(header.size()) + " fields, data rows have " +
                                  std::to_string(width),
                              line_numbers.front(), 1);
  if (has_row_labels && header.size() == width) header_skip = 1;

  std::vector<std::string> col_ids(header.begin() + static_cast<std::ptrdiff_t>(header_skip), header.end());
  const std::size_t data_rows = rows.size() - 1;
  const std::size_t data_cols = col_ids.size();
  Eigen::MatrixXd body(static_cast<Index>(data_rows), static_cast<Index>(data_cols));
  std::vector<std::string> row_ids;
  row_ids.reserve(data_rows);

  for (std::size_t r = 0; r < data_rows; ++r) {
    const auto& fields = rows[r + 1];
    const auto file_row = line_numbers[r + 1];
    if (fields.size() != width)
      throw MalformedInputError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()),
                                file_row, std::min(fields.size(), width) + 1);
    row_ids.push_back(has_row_labels ? fields[0] : "s" + std::to_string(r + 1));
    for (std::size_t c = 0; c < data_cols; ++c) {
      const auto& cell = fields[c + label_cols];
      if (is_missing_token(cell)) throw MissingDataError(file_row, c + label_cols + 1);
      double v = 0.0;
      if (!parse_double(cell, v))
        throw MalformedInputError("cannot parse '" + cell + "' as a number", file_row, c + label_cols + 1);
      body(static_cast<Index>(r), static_cast<Index>(c)) = v;
    }
  }

  ExpressionMatrix m;
  if (transpose) {
    m.values = body.transpose();
    m.gene_ids = std::move(row_ids);
    m.sample_ids = std::move(col_ids);
  } else {
    m.values = std::move(body);
    m.gene_ids = std::move(col_ids);
    m.sample_ids = std::move(row_ids);
  }
  validate(m);
  return m;
}

TableFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".tsv" || ext == ".txt" || ext == ".tab") ? TableFormat::tsv : TableFormat::csv;
}

ExpressionMatrix load_expression_matrix(const std::filesystem::path& path, TableFormat format, bool transpose) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file '" + path.string() + "'");
  return parse_expression_matrix(in, format == TableFormat::tsv ? '\t' : ',', transpose);
}

void write_expression_matrix(std::ostream& out, const ExpressionMatrix& m, char delimiter) {
  out << "sample";
  for (const auto& g : m.gene_ids) out << delimiter << g;
  out << '\n';
  std::ostringstream cell;
  cell << std::setprecision(17);
  for (Index i = 0; i < m.samples(); ++i) {
    out << m.sample_ids[static_cast<std::size_t>(i)];
    for (Index j = 0; j < m.genes(); ++j) {
      cell.str({});
      cell << m.values(i, j);
      out << delimiter << cell.str();
    }
    out << '\n';
  }
}

ExpressionMatrix standardize(ExpressionMatrix m, bool scale) {
  const Index n = m.samples();
  if (n < 2) throw ValidationError("standardize needs at least 2 samples");
  for (Index j = 0; j < m.genes(); ++j) {
    auto col = m.values.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double ss = col.squaredNorm();
    const double max_abs = col.cwiseAbs().maxCoeff();
    if (!(ss > 0.0) || max_abs <= 1e-12 * (std::abs(mean) + 1.0))
      throw DegenerateGeneError(m.gene_ids[static_cast<std::size_t>(j)]);
    if (scale) col /= std::sqrt(ss / static_cast<double>(n - 1));
  }
  return m;
}

RegressionProblem build_problem(const ExpressionMatrix& m, Index j) {
  const Index p = m.genes();
  if (j < 0 || j >= p) throw std::out_of_range("gene index " + std::to_string(j) + " out of range");
  std::vector<Index> others;
  others.reserve(static_cast<std::size_t>(p - 1));
  for (Index k = 0; k < p; ++k)
    if (k != j) others.push_back(k);
  return build_subproblem(m, j, others, false);
}

RegressionProblem build_subproblem(const ExpressionMatrix& m, Index j, std::span<const Index> covariates,
                                   bool center) {
  const Index p = m.genes();
  if (j < 0 || j >= p) throw std::out_of_range("gene index " + std::to_string(j) + " out of range");
  RegressionProblem prob;
  prob.target_gene = j;
  prob.response = m.values.col(j);
  prob.design.resize(m.samples(), static_cast<Index>(covariates.size()));
  prob.covariate_genes.assign(covariates.begin(), covariates.end());
  for (std::size_t c = 0; c < covariates.size(); ++c) {
    const Index k = covariates[c];
    if (k < 0 || k >= p) throw std::out_of_range("covariate index " + std::to_string(k) + " out of range");
    if (k == j) throw std::invalid_argument("covariate set contains the response gene");
    prob.design.col(static_cast<Index>(c)) = m.values.col(k);
  }
  if (center) {
    prob.response.array() -= prob.response.mean();
    if (prob.design.cols() > 0) prob.design.rowwise() -= prob.design.colwise().mean();
  }
  return prob;
}

ReducedProblem svd_reduce(const RegressionProblem& prob) {
  const auto& X = prob.design;
  if (X.size() == 0 || X.cwiseAbs().maxCoeff() == 0.0) throw NumericalError("degenerate design: all entries zero");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = kRankTolerance * sv(0);
  Index r = 0;
  while (r < sv.size() && sv(r) > cutoff) ++r;

  ReducedProblem red;
  red.singular_values = sv.head(r);
  red.reduced_design = svd.matrixU().leftCols(r) * red.singular_values.asDiagonal();
  red.right_factors = svd.matrixV().leftCols(r);
  red.response = prob.response;
  return red;
}

CoefficientMoments back_transform(const Eigen::VectorXd& theta_mean, const Eigen::MatrixXd& theta_cov,
                                  const Eigen::MatrixXd& right_factors) {
  const Index r = right_factors.cols();
  if (theta_mean.size() != r || theta_cov.rows() != r || theta_cov.cols() != r)
    throw std::invalid_argument("back_transform: dimension mismatch");
  CoefficientMoments out;
  out.mean = right_factors * theta_mean;
  // diag(V C V^T)_k = sum_i (V C)_{ki} V_{ki}
  out.variance = (right_factors * theta_cov).cwiseProduct(right_factors).rowwise().sum();
  return out;
}

}  // namespace shrinknet
