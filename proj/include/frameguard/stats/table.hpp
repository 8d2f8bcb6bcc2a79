#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace frameguard::stats {

// Column-oriented table of string cells; columns are typed when a model reads them.
class DataTable {
 public:
  void add_column(std::string name, std::vector<std::string> values);
  std::size_t rows() const noexcept { return rows_; }
  bool has(std::string_view name) const noexcept;
  const std::vector<std::string>& column(std::string_view name) const;
  const std::vector<std::string>& names() const noexcept { return names_; }

  // Rows where `keep[i]` is true.
  DataTable filter(const std::vector<bool>& keep) const;

  static DataTable from_csv(std::string_view text);
  // One JSON object per line; numbers and booleans are stringified.
  static DataTable from_jsonl(std::string_view text);

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> columns_;
  std::size_t rows_ = 0;
};

struct FactorSpec {
  std::string name;
  // Treatment-coding baseline; when absent the first level in sorted order.
  std::optional<std::string> reference;
  // Preferred level order. Listed levels that occur come first, in this
  // order; the rest follow sorted. The reference is then moved to the front.
  std::vector<std::string> order;
};

struct ModelSpec {
  std::string response;
  std::vector<FactorSpec> fixed_factors;
  std::vector<std::pair<std::string, std::string>> interactions;
  // Random-intercept grouping column (GLMM only).
  std::optional<std::string> grouping;
};

struct Factor {
  std::string name;
  std::vector<std::string> levels;  // levels[0] is the reference
  std::vector<int> codes;           // per row
};

// A model term and the design columns it owns.
struct Term {
  std::string name;  // "(Intercept)", "topic", "health:frame"
  std::vector<int> factors;  // indices into DesignInfo::factors
  std::vector<int> columns;
};

// Everything needed to rebuild a design row from factor levels.
struct DesignInfo {
  std::vector<Factor> factors;
  std::vector<Term> terms;
  std::vector<std::string> column_names;

  int factor_index(std::string_view name) const;    // -1 when absent
  const Term* find_term(std::string_view name) const;
  // Design row for one level index per factor.
  Eigen::RowVectorXd encode(const std::vector<int>& levels) const;
};

struct Design {
  std::shared_ptr<const DesignInfo> info;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  // Group index per row and group labels, present when the ModelSpec names a grouping column.
  std::vector<int> groups;
  std::vector<std::string> group_labels;
};

// Treatment-coded design. Throws ValidationError for missing columns,
// unknown reference levels or non-numeric responses and FitError naming the
// aliased columns when the design is rank deficient.
Design build_design(const ModelSpec& spec, const DataTable& data);

// Rank-revealing check; returns the names of columns that are linear
// combinations of earlier columns (empty when full rank).
std::vector<std::string> aliased_columns(const Eigen::MatrixXd& X, const std::vector<std::string>& names);

}  // namespace frameguard::stats
