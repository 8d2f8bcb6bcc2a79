#include "frameguard/risk.hpp"

#include <algorithm>

#include <json.hpp>

#include "frameguard/detail/text.hpp"
#include "frameguard/error.hpp"

namespace frameguard {

using nlohmann::json;

std::string_view to_string(RiskLevel l) noexcept {
  switch (l) {
    case RiskLevel::Low: return "low";
    case RiskLevel::Medium: return "medium";
    case RiskLevel::High: return "high";
  }
  return "high";
}

std::string_view to_string(RiskAction a) noexcept {
  switch (a) {
    case RiskAction::Allow: return "allow";
    case RiskAction::Suggest: return "suggest";
    case RiskAction::SuggestAndFlag: return "suggest_and_flag";
  }
  return "suggest_and_flag";
}

std::optional<RiskLevel> parse_risk_level(std::string_view s) {
  s = detail::trim(s);
  for (auto l : {RiskLevel::Low, RiskLevel::Medium, RiskLevel::High}) {
    if (detail::iequals(s, to_string(l))) return l;
  }
  return std::nullopt;
}

std::optional<RiskAction> parse_risk_action(std::string_view s) {
  s = detail::trim(s);
  for (auto a : {RiskAction::Allow, RiskAction::Suggest, RiskAction::SuggestAndFlag}) {
    if (detail::iequals(s, to_string(a))) return a;
  }
  return std::nullopt;
}

RiskAction action_for(RiskLevel level) noexcept {
  switch (level) {
    case RiskLevel::Low: return RiskAction::Allow;
    case RiskLevel::Medium: return RiskAction::Suggest;
    case RiskLevel::High: return RiskAction::SuggestAndFlag;
  }
  return RiskAction::SuggestAndFlag;
}

bool allow_post_for(RiskLevel level) noexcept { return level != RiskLevel::High; }

bool RiskRule::matches(double health, AlignmentCondition alignment) const noexcept {
  if (health < health_lower) return false;
  if (upper_inclusive ? health > health_upper : health >= health_upper) return false;
  return alignments.empty() ||
         std::find(alignments.begin(), alignments.end(), alignment) != alignments.end();
}

RiskRuleSet::RiskRuleSet(std::vector<RiskRule> rules) : rules_(std::move(rules)) {
  if (rules_.empty()) throw ValidationError("risk rule set is empty");
}

const RiskRuleSet& RiskRuleSet::standard() {
  using A = AlignmentCondition;
  static const RiskRuleSet table({
      {"high-any", 0.0, 0.3, false, {}, RiskLevel::High},
      {"high-complete", 0.0, 0.5, false, {A::Complete}, RiskLevel::High},
      {"medium-any", 0.3, 0.6, false, {}, RiskLevel::Medium},
      {"medium-reframe", 0.6, 1.0, true, {A::Selective, A::Complete}, RiskLevel::Medium},
      {"low-match", 0.6, 1.0, true, {A::Match}, RiskLevel::Low},
  });
  return table;
}

RiskAssessment RiskRuleSet::assess(double health, AlignmentCondition alignment) const {
  if (!(health >= 0.0 && health <= 1.0)) {
    throw ValidationError("risk assessment: health must lie in [0,1], got " + std::to_string(health));
  }
  for (const auto& rule : rules_) {
    if (rule.matches(health, alignment)) {
      return {rule.level, action_for(rule.level), allow_post_for(rule.level), rule.id};
    }
  }
  throw ValidationError("risk assessment: no rule matches health " + std::to_string(health) +
                        " with alignment " + std::string(to_string(alignment)));
}

std::string RiskRuleSet::to_json() const {
  json rules = json::array();
  for (const auto& r : rules_) {
    json aligns = json::array();
    for (auto a : r.alignments) aligns.push_back(std::string(to_string(a)));
    rules.push_back({{"id", r.id},
                     {"health_lower", r.health_lower},
                     {"health_upper", r.health_upper},
                     {"upper_inclusive", r.upper_inclusive},
                     {"alignments", aligns},
                     {"level", std::string(to_string(r.level))},
                     {"action", std::string(to_string(action_for(r.level)))}});
  }
  return json{{"evaluation", "first-match"}, {"rules", rules}}.dump(2);
}

RiskRuleSet RiskRuleSet::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("risk rules: ") + e.what(), std::string(text));
  }
  if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array()) {
    throw ValidationError("risk rules: expected an object with a 'rules' array");
  }
  std::vector<RiskRule> rules;
  try {
    for (const auto& r : j["rules"]) {
      RiskRule rule;
      rule.id = r.at("id").get<std::string>();
      rule.health_lower = r.at("health_lower").get<double>();
      rule.health_upper = r.at("health_upper").get<double>();
      rule.upper_inclusive = r.value("upper_inclusive", false);
      for (const auto& a : r.at("alignments")) {
        auto parsed = parse_alignment(a.get<std::string>());
        if (!parsed) throw ValidationError("risk rules: unknown alignment '" + a.get<std::string>() + "'");
        rule.alignments.push_back(*parsed);
      }
      auto level = parse_risk_level(r.at("level").get<std::string>());
      if (!level) throw ValidationError("risk rules: unknown level in rule '" + rule.id + "'");
      rule.level = *level;
      if (rule.health_lower > rule.health_upper) {
        throw ValidationError("risk rules: empty health interval in rule '" + rule.id + "'");
      }
      rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("risk rules: ") + e.what());
  }
  RiskRuleSet set(std::move(rules));
  // Totality spot check on a fine grid, including both ends.
  for (int k = 0; k <= 1000; ++k) {
    for (auto a : {AlignmentCondition::Match, AlignmentCondition::Selective, AlignmentCondition::Complete}) {
      set.assess(k / 1000.0, a);
    }
  }
  return set;
}

RiskAssessment assess(double health, AlignmentCondition alignment) {
  return RiskRuleSet::standard().assess(health, alignment);
}

}  // namespace frameguard
