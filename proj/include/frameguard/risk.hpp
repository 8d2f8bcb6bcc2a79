#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frameguard/framing.hpp"

namespace frameguard {

enum class RiskLevel { Low, Medium, High };
enum class RiskAction { Allow, Suggest, SuggestAndFlag };

std::string_view to_string(RiskLevel l) noexcept;   // "low" | "medium" | "high"
std::string_view to_string(RiskAction a) noexcept;  // "allow" | "suggest" | "suggest_and_flag"
std::optional<RiskLevel> parse_risk_level(std::string_view s);
std::optional<RiskAction> parse_risk_action(std::string_view s);

struct RiskAssessment {
  RiskLevel level = RiskLevel::Low;
  RiskAction action = RiskAction::Allow;
  bool allow_post = true;
  std::string matched_rule;

  bool operator==(const RiskAssessment&) const = default;
};

// One row of the decision table: fires when lower <= health < upper and the
// alignment is in `alignments` (empty = any).
struct RiskRule {
  std::string id;
  double health_lower = 0.0;
  double health_upper = 1.0;
  bool upper_inclusive = false;
  std::vector<AlignmentCondition> alignments;
  RiskLevel level = RiskLevel::Low;

  bool matches(double health, AlignmentCondition alignment) const noexcept;
};

// Ordered rule table evaluated top-down; first match wins.
class RiskRuleSet {
 public:
  explicit RiskRuleSet(std::vector<RiskRule> rules);

  // The moderation decision table:
  //   high-any        health < 0.3
  //   high-complete   health < 0.5 and Complete
  //   medium-any      0.3 <= health < 0.6
  //   medium-reframe  health >= 0.6 and Selective/Complete
  //   low-match       health >= 0.6 and Match
  static const RiskRuleSet& standard();

  const std::vector<RiskRule>& rules() const noexcept { return rules_; }

  // Throws ValidationError when health is outside [0,1] or no rule matches.
  RiskAssessment assess(double health, AlignmentCondition alignment) const;

  std::string to_json() const;
  // Throws ParseError / ValidationError. Checks that the table is total over
  // [0,1] x alignments.
  static RiskRuleSet from_json(std::string_view text);

 private:
  std::vector<RiskRule> rules_;
};

// Action and allow_post are functions of the level alone.
RiskAction action_for(RiskLevel level) noexcept;
bool allow_post_for(RiskLevel level) noexcept;

RiskAssessment assess(double health, AlignmentCondition alignment);

}  // namespace frameguard
