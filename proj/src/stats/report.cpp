#include "frameguard/stats/report.hpp"

#include <cmath>
#include <sstream>

#include "frameguard/stats/format.hpp"

namespace frameguard::stats {

namespace {

using nlohmann::json;

json coefficient_rows(const DesignInfo& info, const Eigen::VectorXd& beta, const Eigen::VectorXd& se,
                      const Eigen::VectorXd* stat, const Eigen::VectorXd* p, const char* stat_name, bool z) {
  json rows = json::array();
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    json r;
    r["term"] = info.column_names[static_cast<std::size_t>(j)];
    r["estimate"] = beta[j];
    r["se"] = se[j];
    const double s = stat ? (*stat)[j] : beta[j] / se[j];
    r[stat_name] = s;
    r["p"] = p ? (*p)[j] : (z ? normal_two_sided_p(s) : 1.0);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

std::string_view to_string(EmmWeighting w) noexcept {
  return w == EmmWeighting::Equal ? "equal" : "proportional";
}

json to_json(const GlmmFit& fit) {
  json j;
  j["coefficients"] = coefficient_rows(*fit.info, fit.beta, fit.se, nullptr, nullptr, "z", true);
  j["random_intercept_variance"] = fit.sigma2;
  j["loglik"] = fit.loglik;
  j["aic"] = fit.aic;
  j["bic"] = fit.bic;
  j["n_obs"] = fit.n_obs;
  j["n_groups"] = fit.n_groups;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["warnings"] = fit.warnings;
  return j;
}

json to_json(const OlsFit& fit) {
  json j;
  j["coefficients"] = coefficient_rows(*fit.info, fit.beta, fit.se, &fit.t, &fit.p, "t", false);
  j["r2"] = fit.r2;
  j["adj_r2"] = fit.adj_r2;
  j["f_stat"] = fit.f_stat;
  j["f_p"] = fit.f_p;
  j["df_model"] = fit.df_model;
  j["df_resid"] = fit.df_resid;
  j["resid_se"] = fit.resid_se;
  j["n_obs"] = fit.n_obs;
  j["summary"] = format_f(fit.f_stat, fit.df_model, fit.df_resid) + ", " + format_p(fit.f_p) +
                 "; R² = " + fixed(fit.r2, 3) + "; Adj. R² = " + fixed(fit.adj_r2, 3);
  return j;
}

json to_json(const ChiSqTest& t) {
  return {{"statistic", t.statistic}, {"df", t.df}, {"p", t.p}, {"summary", format_chisq(t.statistic, t.df, t.p)}};
}

json to_json(const EmmResult& emm) {
  json levels = json::array();
  for (const auto& l : emm.levels) {
    levels.push_back({{"level", l.level},
                      {"estimate", l.estimate},
                      {"se", l.se},
                      {"response", l.response},
                      {"lower", l.lower},
                      {"upper", l.upper}});
  }
  return {{"factor", emm.factor},
          {"scale", emm.link == Link::Logit ? "probability" : "response"},
          {"weighting", to_string(emm.weighting)},
          {"averaged_over", emm.averaged_over},
          {"levels", levels}};
}

json to_json(const std::vector<PairwiseComparison>& pairs) {
  json rows = json::array();
  for (const auto& c : pairs) {
    rows.push_back({{"contrast", c.a + " vs " + c.b},
                    {"estimate", c.estimate},
                    {"se", c.se},
                    {"z", c.z},
                    {"odds_ratio", c.odds_ratio},
                    {"ci_lower", c.ci_lower},
                    {"ci_upper", c.ci_upper},
                    {"p_unadjusted", c.p_unadjusted},
                    {"p_adjusted", c.p_adjusted}});
  }
  return rows;
}

json to_json(const AgreementStats& a) {
  const auto& t = a.table.counts;
  return {{"kappa", a.kappa},
          {"spearman_rho", a.spearman_rho},
          {"spearman_p", a.spearman_p},
          {"n", a.n},
          {"contingency", {{"unhealthy_toxic", t[0][0]},
                           {"unhealthy_nontoxic", t[0][1]},
                           {"healthy_toxic", t[1][0]},
                           {"healthy_nontoxic", t[1][1]}}}};
}

namespace {

std::string pad(std::string s, std::size_t width) {
  // Width in code points so "χ²" lines up.
  std::size_t cps = 0;
  for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
  s.append(cps < width ? width - cps : 1, ' ');
  return s;
}

std::string num(const json& v, int decimals) {
  if (!v.is_number()) return "-";
  return fixed(v.get<double>(), decimals);
}

std::string pval(const json& v) {
  if (!v.is_number()) return "-";
  const double p = v.get<double>();
  return p < 0.001 ? "<.001" : format_p(p).substr(4);
}

}  // namespace

std::string render_section(const std::string& title, const json& section) {
  std::ostringstream out;
  out << title << "\n" << std::string(title.size(), '=') << "\n";
  if (section.contains("status") && section["status"] == "failed") {
    out << "failed: " << section.value("error", std::string("unknown error")) << "\n\n";
    return out.str();
  }
  if (section.contains("formula")) out << section["formula"].get<std::string>() << "\n";
  if (section.contains("fit")) {
    const json& fit = section["fit"];
    const bool ols = fit.contains("r2");
    const char* stat = ols ? "t" : "z";
    out << pad("Term", 44) << pad("Estimate", 11) << pad("SE", 10) << pad(stat, 10) << "p\n";
    for (const auto& r : fit["coefficients"]) {
      out << pad(r["term"].get<std::string>(), 44) << pad(num(r["estimate"], 3), 11) << pad(num(r["se"], 3), 10)
          << pad(num(r[stat], 2), 10) << pval(r["p"]) << "\n";
    }
    if (ols) {
      out << fit["summary"].get<std::string>() << "\n";
    } else {
      out << "Article ID (Intercept) Variance: " << num(fit["random_intercept_variance"], 3) << "\n";
      out << "AIC = " << num(fit["aic"], 1) << "; BIC = " << num(fit["bic"], 1) << "; N = " << fit["n_obs"]
          << "; groups = " << fit["n_groups"] << "\n";
    }
  }
  if (section.contains("wald")) {
    out << "\nType II Wald χ² tests\n";
    for (const auto& [term, t] : section["wald"].items()) {
      out << pad(term, 44) << t["summary"].get<std::string>() << "\n";
    }
  }
  if (section.contains("emmeans")) {
    const json& emm = section["emmeans"];
    out << "\nEstimated marginal means: " << emm["factor"].get<std::string>();
    if (!emm["averaged_over"].empty()) {
      out << " (averaged over";
      for (const auto& f : emm["averaged_over"]) out << " " << f.get<std::string>();
      out << " levels)";
    }
    out << "\n";
    for (const auto& l : emm["levels"]) {
      out << pad(l["level"].get<std::string>(), 44) << pad(num(l["response"].get<double>() * 100.0, 1) + "%", 10)
          << "[" << num(l["lower"].get<double>() * 100.0, 1) << "%, " << num(l["upper"].get<double>() * 100.0, 1)
          << "%]\n";
    }
  }
  if (section.contains("pairwise")) {
    out << "\nPairwise comparisons (Tukey-adjusted)\n";
    for (const auto& c : section["pairwise"]) {
      out << pad(c["contrast"].get<std::string>(), 44) << pad("OR = " + num(c["odds_ratio"], 2), 12)
          << pad("[" + num(c["ci_lower"], 2) + ", " + num(c["ci_upper"], 2) + "]", 16) << format_p(c["p_adjusted"].get<double>())
          << "\n";
    }
  }
  out << "\n";
  return out.str();
}

}  // namespace frameguard::stats
