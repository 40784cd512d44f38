#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "signgraph/sign.hpp"
#include "signgraph/vocabulary.hpp"

namespace signgraph {

struct SubmissionAnswer {
  std::string sign_ref;  // template the answer is about
  std::string attribute;
  std::string raw_value;
};

struct GoldAnswer {
  std::string attribute;
  std::string raw_value;
};

/// One crowd worker's answers for a batch of sign templates, including the
/// answers for the embedded gold-standard sign.
struct WorkerSubmission {
  std::string worker_id;
  std::vector<SubmissionAnswer> answers;
  std::string gold_sign_ref;
  std::vector<GoldAnswer> gold_answers;
};

struct ValidationIssue {
  std::string attribute;
  std::string raw_value;
  std::string reason;

  friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

struct ValidationResult {
  bool accepted = false;
  bool gold_passed = false;
  std::vector<ValidationIssue> field_errors;
};

/// Vocabulary backing a submission attribute; nullopt for free-text
/// attributes (text, variant, unit). Unknown attribute names throw.
inline std::optional<VocabularyKind> attribute_vocabulary(const std::string& attribute) {
  static const std::map<std::string, std::optional<VocabularyKind>> table = {
      {"plate_shape", VocabularyKind::plate},
      {"background_color", VocabularyKind::color},
      {"foreground_color", VocabularyKind::color},
      {"border_color", VocabularyKind::color},
      {"printed_shape", VocabularyKind::printed},
      {"icon", VocabularyKind::icon},
      {"text_category", VocabularyKind::text_category},
      {"convention", VocabularyKind::convention},
      {"text", std::nullopt},
      {"variant", std::nullopt},
      {"unit", std::nullopt},
  };
  auto it = table.find(detail::fold_trim(attribute));
  if (it == table.end()) throw Error(ErrorKind::unknown_value, "unknown attribute " + attribute);
  return it->second;
}

/// Screens a submission against its gold-standard sign. The gold check
/// compares plate shape and background color only.
inline ValidationResult validate_submission(const WorkerSubmission& sub, const SignPrototype& gold,
                                            const VocabularySet& vocab = VocabularySet::defaults()) {
  ValidationResult result;

  auto check = [&](const std::string& attribute, const std::string& raw) -> std::optional<std::string> {
    std::optional<VocabularyKind> kind;
    try {
      kind = attribute_vocabulary(attribute);
    } catch (const Error&) {
      result.field_errors.push_back({attribute, raw, "unknown-attribute"});
      return std::nullopt;
    }
    if (!kind) {
      if (detail::trim(raw).empty()) {
        result.field_errors.push_back({attribute, raw, "empty"});
        return std::nullopt;
      }
      return raw;
    }
    try {
      return vocab.parse_value(*kind, raw);
    } catch (const VocabularyError&) {
      result.field_errors.push_back({attribute, raw, "unknown-value"});
      return std::nullopt;
    }
  };

  for (const auto& answer : sub.answers) check(answer.attribute, answer.raw_value);

  std::optional<std::string> gold_plate, gold_bg;
  bool plate_answered = false, bg_answered = false;
  for (const auto& answer : sub.gold_answers) {
    auto value = check(answer.attribute, answer.raw_value);
    auto attribute = detail::fold_trim(answer.attribute);
    if (attribute == "plate_shape") {
      plate_answered = true;
      gold_plate = value;
    } else if (attribute == "background_color") {
      bg_answered = true;
      gold_bg = value;
    }
  }
  if (!plate_answered) result.field_errors.push_back({"plate_shape", "", "gold-missing"});
  if (!bg_answered) result.field_errors.push_back({"background_color", "", "gold-missing"});

  result.gold_passed = sub.gold_sign_ref == gold.id && gold_plate == gold.plate_shape.name &&
                       gold_bg == gold.background_color.name;
  result.accepted = result.gold_passed && result.field_errors.empty();
  return result;
}

}  // namespace signgraph
