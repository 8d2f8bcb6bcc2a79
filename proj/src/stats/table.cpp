#include "frameguard/stats/table.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "frameguard/csv.hpp"
#include "frameguard/error.hpp"

namespace frameguard::stats {

void DataTable::add_column(std::string name, std::vector<std::string> values) {
  if (has(name)) throw ValidationError("duplicate column '" + name + "'");
  if (!names_.empty() && values.size() != rows_) {
    throw ValidationError("column '" + name + "' has " + std::to_string(values.size()) + " rows, expected " +
                          std::to_string(rows_));
  }
  rows_ = values.size();
  names_.push_back(std::move(name));
  columns_.push_back(std::move(values));
}

bool DataTable::has(std::string_view name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<std::string>& DataTable::column(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ValidationError("no column named '" + std::string(name) + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

DataTable DataTable::filter(const std::vector<bool>& keep) const {
  if (keep.size() != rows_) throw ValidationError("filter mask has the wrong length");
  DataTable out;
  for (std::size_t c = 0; c < names_.size(); ++c) {
    std::vector<std::string> col;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (keep[r]) col.push_back(columns_[c][r]);
    }
    out.add_column(names_[c], std::move(col));
  }
  return out;
}

DataTable DataTable::from_csv(std::string_view text) {
  auto doc = csv::parse(text);
  DataTable out;
  for (std::size_t c = 0; c < doc.header.size(); ++c) {
    std::vector<std::string> col;
    col.reserve(doc.rows.size());
    for (const auto& row : doc.rows) col.push_back(row[c]);
    out.add_column(doc.header[c], std::move(col));
  }
  return out;
}

DataTable DataTable::from_jsonl(std::string_view text) {
  using nlohmann::json;
  std::vector<std::string> names;
  std::map<std::string, std::vector<std::string>> cols;
  std::size_t n = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("table jsonl: ") + e.what(), std::string(line));
    }
    if (!j.is_object()) throw ParseError("table jsonl: record is not an object", std::string(line));
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!cols.count(it.key())) {
        names.push_back(it.key());
        cols[it.key()] = std::vector<std::string>(n);
      }
    }
    for (const auto& name : names) {
      auto& col = cols[name];
      auto it = j.find(name);
      if (it == j.end() || it->is_null()) {
        col.emplace_back();
      } else if (it->is_string()) {
        col.push_back(it->get<std::string>());
      } else if (it->is_boolean()) {
        col.emplace_back(it->get<bool>() ? "1" : "0");
      } else {
        col.push_back(it->dump());
      }
    }
    ++n;
  }
  DataTable out;
  for (const auto& name : names) out.add_column(name, std::move(cols[name]));
  return out;
}

// ---------------------------------------------------------------------------

int DesignInfo::factor_index(std::string_view name) const {
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const Term* DesignInfo::find_term(std::string_view name) const {
  for (const auto& t : terms) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

Eigen::RowVectorXd DesignInfo::encode(const std::vector<int>& levels) const {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(column_names.size()));
  for (const auto& term : terms) {
    if (term.factors.empty()) {
      row(term.columns[0]) = 1.0;
      continue;
    }
    if (term.factors.size() == 1) {
      int lvl = levels[static_cast<std::size_t>(term.factors[0])];
      if (lvl > 0) row(term.columns[static_cast<std::size_t>(lvl - 1)]) = 1.0;
      continue;
    }
    const auto& fb = factors[static_cast<std::size_t>(term.factors[1])];
    int la = levels[static_cast<std::size_t>(term.factors[0])];
    int lb = levels[static_cast<std::size_t>(term.factors[1])];
    if (la > 0 && lb > 0) {
      const auto nb = static_cast<int>(fb.levels.size()) - 1;
      row(term.columns[static_cast<std::size_t>((la - 1) * nb + (lb - 1))]) = 1.0;
    }
  }
  return row;
}

std::vector<std::string> aliased_columns(const Eigen::MatrixXd& X, const std::vector<std::string>& names) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> full(X);
  if (full.rank() == X.cols()) return {};
  std::vector<std::string> out;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    Eigen::MatrixXd sub(X.rows(), static_cast<Eigen::Index>(kept.size()) + 1);
    for (std::size_t k = 0; k < kept.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = X.col(kept[k]);
    sub.col(sub.cols() - 1) = X.col(j);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    qr.setThreshold(full.threshold());
    if (qr.rank() == sub.cols()) {
      kept.push_back(j);
    } else {
      out.push_back(names[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

namespace {

double parse_response(const std::string& s, std::size_t row, const std::string& column) {
  if (s == "true" || s == "TRUE" || s == "True") return 1.0;
  if (s == "false" || s == "FALSE" || s == "False") return 0.0;
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("response column '" + column + "' row " + std::to_string(row + 1) +
                        ": non-numeric value '" + s + "'");
}

Factor make_factor(const FactorSpec& spec, const std::vector<std::string>& values) {
  Factor f;
  f.name = spec.name;
  std::set<std::string> distinct(values.begin(), values.end());
  if (distinct.count("")) throw ValidationError("factor '" + spec.name + "' has empty cells");
  for (const auto& l : spec.order) {
    if (distinct.erase(l)) f.levels.push_back(l);
  }
  f.levels.insert(f.levels.end(), distinct.begin(), distinct.end());
  if (spec.reference) {
    auto it = std::find(f.levels.begin(), f.levels.end(), *spec.reference);
    if (it == f.levels.end()) {
      throw ValidationError("reference level '" + *spec.reference + "' does not occur in factor '" + spec.name + "'");
    }
    std::rotate(f.levels.begin(), it, it + 1);
  }
  std::map<std::string, int> code;
  for (std::size_t i = 0; i < f.levels.size(); ++i) code[f.levels[i]] = static_cast<int>(i);
  f.codes.reserve(values.size());
  for (const auto& v : values) f.codes.push_back(code[v]);
  return f;
}

}  // namespace

Design build_design(const ModelSpec& spec, const DataTable& data) {
  if (!data.has(spec.response)) throw ValidationError("response column '" + spec.response + "' not in data");
  auto info = std::make_shared<DesignInfo>();
  for (const auto& fs : spec.fixed_factors) {
    if (!data.has(fs.name)) throw ValidationError("factor column '" + fs.name + "' not in data");
    if (info->factor_index(fs.name) >= 0) throw ValidationError("factor '" + fs.name + "' listed twice");
    info->factors.push_back(make_factor(fs, data.column(fs.name)));
  }

  int next_col = 0;
  info->terms.push_back({"(Intercept)", {}, {next_col++}});
  info->column_names.emplace_back("(Intercept)");
  for (std::size_t i = 0; i < info->factors.size(); ++i) {
    const auto& f = info->factors[i];
    Term t{f.name, {static_cast<int>(i)}, {}};
    for (std::size_t l = 1; l < f.levels.size(); ++l) {
      t.columns.push_back(next_col++);
      info->column_names.push_back(f.name + "[" + f.levels[l] + "]");
    }
    info->terms.push_back(std::move(t));
  }
  for (const auto& [a, b] : spec.interactions) {
    int ia = info->factor_index(a);
    int ib = info->factor_index(b);
    if (ia < 0 || ib < 0) {
      throw ValidationError("interaction " + a + ":" + b + " refers to a factor that is not a main effect");
    }
    const auto& fa = info->factors[static_cast<std::size_t>(ia)];
    const auto& fb = info->factors[static_cast<std::size_t>(ib)];
    Term t{a + ":" + b, {ia, ib}, {}};
    for (std::size_t la = 1; la < fa.levels.size(); ++la) {
      for (std::size_t lb = 1; lb < fb.levels.size(); ++lb) {
        t.columns.push_back(next_col++);
        info->column_names.push_back(fa.name + "[" + fa.levels[la] + "]:" + fb.name + "[" + fb.levels[lb] + "]");
      }
    }
    info->terms.push_back(std::move(t));
  }

  const auto n = static_cast<Eigen::Index>(data.rows());
  Design d;
  d.X.resize(n, next_col);
  d.y.resize(n);
  const auto& resp = data.column(spec.response);
  std::vector<int> levels(info->factors.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < info->factors.size(); ++f) {
      levels[f] = info->factors[f].codes[static_cast<std::size_t>(r)];
    }
    d.X.row(r) = info->encode(levels);
    d.y(r) = parse_response(resp[static_cast<std::size_t>(r)], static_cast<std::size_t>(r), spec.response);
  }

  if (spec.grouping) {
    if (!data.has(*spec.grouping)) throw ValidationError("grouping column '" + *spec.grouping + "' not in data");
    auto g = make_factor(FactorSpec{*spec.grouping, std::nullopt, {}}, data.column(*spec.grouping));
    d.groups = std::move(g.codes);
    d.group_labels = std::move(g.levels);
  }

  if (n < next_col) {
    throw FitError("design has " + std::to_string(n) + " rows but " + std::to_string(next_col) + " columns");
  }
  auto aliased = aliased_columns(d.X, info->column_names);
  if (!aliased.empty()) {
    std::string names;
    for (const auto& a : aliased) names += (names.empty() ? "" : ", ") + a;
    throw FitError("design matrix is rank deficient; aliased columns: " + names);
  }
  d.info = std::move(info);
  return d;
}

}  // namespace frameguard::stats
