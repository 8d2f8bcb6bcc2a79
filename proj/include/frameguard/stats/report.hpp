#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "frameguard/stats/agreement.hpp"
#include "frameguard/stats/glmm.hpp"
#include "frameguard/stats/inference.hpp"
#include "frameguard/stats/ols.hpp"
#include "frameguard/stats/threads.hpp"

namespace frameguard::stats {

// Coefficient rows {term, estimate, se, z, p} plus fit summary.
nlohmann::json to_json(const GlmmFit& fit);
// Coefficient rows {term, estimate, se, t, p} plus R², F and df.
nlohmann::json to_json(const OlsFit& fit);
nlohmann::json to_json(const ChiSqTest& test);
nlohmann::json to_json(const EmmResult& emm);
nlohmann::json to_json(const std::vector<PairwiseComparison>& pairs);
nlohmann::json to_json(const AgreementStats& a);

std::string_view to_string(EmmWeighting w) noexcept;

// Plain-text rendering of a JSON analysis section in the layout of a
// regression results table (coefficients, tests, EMMs, contrasts).
std::string render_section(const std::string& title, const nlohmann::json& section);

}  // namespace frameguard::stats
