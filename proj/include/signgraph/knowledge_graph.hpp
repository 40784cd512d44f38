#pragma once

#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "signgraph/fact.hpp"
#include "signgraph/sign.hpp"
#include "signgraph/sign_document.hpp"
#include "signgraph/sign_facts.hpp"
#include "signgraph/vocabulary.hpp"

namespace signgraph {

/// A record that ingestion refused. `reason` is "duplicate", "unknown-value",
/// or a short description; `field` names the offending field when known.
struct Rejection {
  std::size_t line = 0;
  std::string reason;
  std::string field;
  std::string detail;

  friend bool operator==(const Rejection&, const Rejection&) = default;
};

struct IngestReport {
  std::size_t count = 0;
  std::vector<Rejection> rejected;
};

/// In-memory road sign knowledge graph: sign records, a fact set with
/// provenance, and per-property inverted indexes over sign-level facts.
///
/// Not synchronized. Mutate from one thread, then share as
/// `std::shared_ptr<const KnowledgeGraph>` for concurrent reads.
class KnowledgeGraph {
 public:
  using IdSet = std::set<std::string>;
  /// folded object text → sign ids
  using ValueIndex = std::map<std::string, IdSet, std::less<>>;

  const std::map<std::string, SignPrototype, std::less<>>& signs() const noexcept { return signs_; }
  const std::map<Fact, Provenance>& facts() const noexcept { return facts_; }
  std::size_t size() const noexcept { return signs_.size(); }
  bool empty() const noexcept { return signs_.empty(); }

  const SignPrototype* find_sign(std::string_view id) const {
    auto it = signs_.find(id);
    return it == signs_.end() ? nullptr : &it->second;
  }

  bool contains(const Fact& fact) const { return facts_.count(fact) > 0; }

  std::optional<Provenance> provenance(const Fact& fact) const {
    auto it = facts_.find(fact);
    if (it == facts_.end()) return std::nullopt;
    return it->second;
  }

  PropertyVocabulary& properties() noexcept { return properties_; }
  const PropertyVocabulary& properties() const noexcept { return properties_; }

  /// Validates and inserts one sign together with its facts.
  void insert_sign(SignPrototype sign, const VocabularySet& vocab = VocabularySet::defaults()) {
    validate(sign, vocab);
    if (signs_.count(sign.id)) throw FieldError(ErrorKind::conflict, "id", sign.id, "duplicate");
    auto facts = sign_to_facts(sign);
    auto id = sign.id;
    signs_.emplace(id, std::move(sign));
    for (auto& f : facts) store(std::move(f), Provenance::ingested);
  }

  /// Adds a fact; returns false if it was already present (its provenance is
  /// then left unchanged).
  bool add_fact(Fact fact, Provenance provenance) {
    if (fact.subject.empty()) throw Error(ErrorKind::validation, "fact without subject");
    if (!properties_.knows(fact.predicate)) {
      throw Error(ErrorKind::unknown_value, "unknown property '" + fact.predicate + "'");
    }
    return store(std::move(fact), provenance);
  }

  /// Reads a sign document (one JSON record per line, blank lines skipped).
  /// Each record is inserted whole or not at all.
  IngestReport ingest(std::istream& in, const VocabularySet& vocab = VocabularySet::defaults()) {
    IngestReport report;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (detail::trim(line).empty()) continue;
      try {
        auto sign = parse_sign_line(line, vocab);
        if (signs_.count(sign.id)) {
          report.rejected.push_back({line_no, "duplicate", "id", sign.id});
          continue;
        }
        insert_sign(std::move(sign), vocab);
        ++report.count;
      } catch (const FieldError& e) {
        report.rejected.push_back({line_no, e.reason(), e.field(), e.what()});
      }
    }
    return report;
  }

  IngestReport ingest_text(std::string_view document,
                           const VocabularySet& vocab = VocabularySet::defaults()) {
    std::istringstream in{std::string(document)};
    return ingest(in, vocab);
  }

  /// Index for one sign-level property; empty when nothing uses it.
  const ValueIndex& index(std::string_view predicate) const {
    static const ValueIndex empty_index;
    auto it = index_.find(predicate);
    return it == index_.end() ? empty_index : it->second;
  }

  /// Sign ids whose `predicate` fact has an object equal to `value`
  /// (case-folded).
  const IdSet& lookup(std::string_view predicate, std::string_view value) const {
    static const IdSet none;
    const auto& idx = index(predicate);
    auto it = idx.find(detail::casefold(value));
    return it == idx.end() ? none : it->second;
  }

  /// Facts whose subject is `sign_id` or one of its nodes, in fact order.
  std::vector<Fact> facts_about(const std::string& sign_id) const {
    std::vector<Fact> out;
    auto collect = [&](const std::string& prefix, bool exact) {
      for (auto it = facts_.lower_bound(Fact{prefix, {}, {}}); it != facts_.end(); ++it) {
        const auto& subject = it->first.subject;
        if (exact ? subject != prefix : subject.compare(0, prefix.size(), prefix) != 0) break;
        out.push_back(it->first);
      }
    };
    collect(sign_id, true);
    collect(sign_id + "#", false);
    return out;
  }

  /// Objects of sign-level facts `(sign_id, predicate, *)`.
  std::vector<FactObject> objects(const std::string& sign_id, std::string_view predicate) const {
    std::vector<FactObject> out;
    Fact probe{sign_id, std::string(predicate), FactObject::entity("")};  // smallest object
    for (auto it = facts_.lower_bound(probe);
         it != facts_.end() && it->first.subject == sign_id && it->first.predicate == predicate;
         ++it) {
      out.push_back(it->first.object);
    }
    return out;
  }

  /// Observable equality: same signs, facts and provenance.
  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.signs_ == b.signs_ && a.facts_ == b.facts_;
  }

  /// Insertion that skips property checks; used when restoring snapshots
  /// and building sub-graphs from already validated data.
  bool restore_fact(Fact fact, Provenance provenance) { return store(std::move(fact), provenance); }

  void restore_sign(SignPrototype sign) {
    auto id = sign.id;
    signs_.insert_or_assign(std::move(id), std::move(sign));
    reindex();
  }

 private:
  bool store(Fact fact, Provenance provenance) {
    auto [it, inserted] = facts_.emplace(std::move(fact), provenance);
    if (inserted) index_fact(it->first);
    return inserted;
  }

  void index_fact(const Fact& f) {
    if (!signs_.count(f.subject)) return;
    index_[f.predicate][detail::casefold(f.object.text())].insert(f.subject);
  }

  void reindex() {
    index_.clear();
    for (const auto& [f, _] : facts_) index_fact(f);
  }

  std::map<std::string, SignPrototype, std::less<>> signs_;
  std::map<Fact, Provenance> facts_;
  std::map<std::string, ValueIndex, std::less<>> index_;
  PropertyVocabulary properties_;
};

/// Region slice of `kg`: the signs whose region matches (case-folded) and
/// every fact about them or their nodes. `kg` is not modified.
inline KnowledgeGraph domain_subgraph(const KnowledgeGraph& kg, std::string_view region) {
  KnowledgeGraph out;
  out.properties() = kg.properties();
  const auto wanted = detail::fold_trim(region);
  if (wanted.empty()) return out;
  for (const auto& [id, sign] : kg.signs()) {
    if (detail::fold_trim(sign.region) != wanted) continue;
    out.restore_sign(sign);
  }
  for (const auto& [fact, prov] : kg.facts()) {
    if (out.find_sign(owner_of(fact.subject))) out.restore_fact(fact, prov);
  }
  return out;
}

}  // namespace signgraph
