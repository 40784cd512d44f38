#pragma once

// Annotation pipeline: sessions over images, attribute-driven candidate
// retrieval with optional latent re-ranking, and finalized annotations
// written to append-only JSON Lines logs.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "signgraph/evaluate.hpp"
#include "signgraph/image.hpp"
#include "signgraph/ranker.hpp"
#include "signgraph/sign_document.hpp"

namespace signgraph {

enum class SessionState { open, annotating, closed };

inline const char* to_string(SessionState s) {
  switch (s) {
    case SessionState::open: return "open";
    case SessionState::annotating: return "annotating";
    case SessionState::closed: return "closed";
  }
  return "open";
}

inline SessionState session_state_from_string(std::string_view s) {
  if (s == "open") return SessionState::open;
  if (s == "annotating") return SessionState::annotating;
  if (s == "closed") return SessionState::closed;
  throw Error(ErrorKind::format, "unknown session state '" + std::string(s) + "'");
}

struct Session {
  std::string id;
  std::string image_ref;
  std::string region;
  std::string created_at;
  SessionState state = SessionState::open;
  // Region whose sub-graph backs the session; empty for the generic graph.
  std::string graph_region;
  std::string last_query;

  friend bool operator==(const Session&, const Session&) = default;
};

struct Candidate {
  std::string sign_id;
  std::string prototype_ref;
  std::optional<double> score;  // latent distance when re-ranked

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

enum class CandidateSource { kg_only, kg_vpe };

inline const char* to_string(CandidateSource s) { return s == CandidateSource::kg_vpe ? "kg+vpe" : "kg-only"; }

struct CandidateResponse {
  std::vector<Candidate> candidates;
  CandidateSource source = CandidateSource::kg_only;
  std::size_t kg_size = 0;
  std::optional<std::string> warning;
};

/// Attributes of the selected sign as stored in the domain graph.
struct Enrichment {
  std::string class_name;
  std::optional<std::string> description;
  std::string plate_shape;
  std::string background_color;
  std::optional<std::string> foreground_color;
  std::optional<std::string> border_color;
  std::vector<std::string> printed_shapes;
  std::vector<std::string> icons;
  std::vector<std::string> texts;

  friend bool operator==(const Enrichment&, const Enrichment&) = default;
};

struct AnnotationRecord {
  std::string session_id;
  std::string image_ref;
  BoundingBox bbox;
  std::string sign_id;
  std::string attributes_provided;  // canonical query text, empty if none
  bool missing_sign = false;
  Enrichment enrichment;
  std::string created_at;
  std::optional<std::string> idempotency_key;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

// ---- JSON codecs -------------------------------------------------------

inline OrderedJson bbox_to_json(const BoundingBox& b) {
  return OrderedJson{{"x", b.x}, {"y", b.y}, {"width", b.width}, {"height", b.height}};
}

inline BoundingBox bbox_from_json(const Json& j) {
  if (!j.is_object()) throw FieldError(ErrorKind::validation, "bbox", j.dump(), "expected an object");
  BoundingBox b;
  const std::pair<const char*, int*> fields[] = {{"x", &b.x}, {"y", &b.y}, {"width", &b.width}, {"height", &b.height}};
  for (const auto& [name, dst] : fields) {
    auto it = j.find(name);
    if (it == j.end() || !it->is_number_integer()) {
      throw FieldError(ErrorKind::validation, std::string("bbox.") + name, it == j.end() ? "" : it->dump(),
                       "expected an integer");
    }
    *dst = it->get<int>();
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "x" && key != "y" && key != "width" && key != "height") {
      throw FieldError(ErrorKind::validation, "bbox." + key, "", "unknown field");
    }
  }
  if (!b.valid()) throw FieldError(ErrorKind::validation, "bbox", j.dump(), "zero-area bounding box");
  return b;
}

inline OrderedJson enrichment_to_json(const Enrichment& e) {
  OrderedJson j;
  j["class_name"] = e.class_name;
  if (e.description) j["description"] = *e.description;
  j["plate_shape"] = e.plate_shape;
  j["background_color"] = e.background_color;
  if (e.foreground_color) j["foreground_color"] = *e.foreground_color;
  if (e.border_color) j["border_color"] = *e.border_color;
  j["printed_shapes"] = e.printed_shapes;
  j["icons"] = e.icons;
  j["texts"] = e.texts;
  return j;
}

inline Enrichment enrichment_from_json(const Json& j) {
  Enrichment e;
  e.class_name = j.at("class_name").get<std::string>();
  if (j.contains("description")) e.description = j.at("description").get<std::string>();
  e.plate_shape = j.at("plate_shape").get<std::string>();
  e.background_color = j.at("background_color").get<std::string>();
  if (j.contains("foreground_color")) e.foreground_color = j.at("foreground_color").get<std::string>();
  if (j.contains("border_color")) e.border_color = j.at("border_color").get<std::string>();
  e.printed_shapes = j.at("printed_shapes").get<std::vector<std::string>>();
  e.icons = j.at("icons").get<std::vector<std::string>>();
  e.texts = j.at("texts").get<std::vector<std::string>>();
  return e;
}

inline OrderedJson record_to_json(const AnnotationRecord& r) {
  OrderedJson j;
  j["session_id"] = r.session_id;
  j["image_ref"] = r.image_ref;
  j["bbox"] = bbox_to_json(r.bbox);
  j["sign_id"] = r.sign_id;
  j["attributes_provided"] = r.attributes_provided;
  j["missing_sign"] = r.missing_sign;
  j["enrichment"] = enrichment_to_json(r.enrichment);
  j["created_at"] = r.created_at;
  if (r.idempotency_key) j["idempotency_key"] = *r.idempotency_key;
  return j;
}

inline std::string render_record_line(const AnnotationRecord& r) { return record_to_json(r).dump(); }

inline AnnotationRecord record_from_json(const Json& j) {
  AnnotationRecord r;
  r.session_id = j.at("session_id").get<std::string>();
  r.image_ref = j.at("image_ref").get<std::string>();
  r.bbox = bbox_from_json(j.at("bbox"));
  r.sign_id = j.at("sign_id").get<std::string>();
  r.attributes_provided = j.at("attributes_provided").get<std::string>();
  r.missing_sign = j.at("missing_sign").get<bool>();
  r.enrichment = enrichment_from_json(j.at("enrichment"));
  r.created_at = j.at("created_at").get<std::string>();
  if (j.contains("idempotency_key")) r.idempotency_key = j.at("idempotency_key").get<std::string>();
  return r;
}

inline OrderedJson session_to_json(const Session& s) {
  OrderedJson j;
  j["id"] = s.id;
  j["image_ref"] = s.image_ref;
  j["region"] = s.region;
  j["created_at"] = s.created_at;
  j["state"] = to_string(s.state);
  j["subgraph"] = s.graph_region.empty() ? "generic" : s.graph_region;
  if (!s.last_query.empty()) j["last_query"] = s.last_query;
  return j;
}

inline Session session_from_json(const Json& j) {
  Session s;
  s.id = j.at("id").get<std::string>();
  s.image_ref = j.at("image_ref").get<std::string>();
  s.region = j.at("region").get<std::string>();
  s.created_at = j.at("created_at").get<std::string>();
  s.state = session_state_from_string(j.at("state").get<std::string>());
  auto sub = j.at("subgraph").get<std::string>();
  s.graph_region = sub == "generic" ? "" : sub;
  if (j.contains("last_query")) s.last_query = j.at("last_query").get<std::string>();
  return s;
}

inline OrderedJson candidates_to_json(const CandidateResponse& r) {
  OrderedJson list = OrderedJson::array();
  for (const auto& c : r.candidates) {
    OrderedJson e;
    e["sign_id"] = c.sign_id;
    e["prototype"] = c.prototype_ref;
    if (c.score) e["score"] = *c.score;
    list.push_back(std::move(e));
  }
  OrderedJson j;
  j["candidates"] = std::move(list);
  j["source"] = to_string(r.source);
  j["kg_size"] = r.kg_size;
  if (r.warning) j["warning"] = *r.warning;
  return j;
}

// ---- Logs --------------------------------------------------------------

struct ReplayIssue {
  std::size_t line = 0;
  std::string reason;
};

struct ReplayResult {
  std::vector<AnnotationRecord> records;
  std::vector<ReplayIssue> issues;  // torn or malformed lines, skipped
};

/// Reads an annotation or feedback log. A final line without its newline is
/// a torn write: it is skipped and reported, as is any malformed line.
inline ReplayResult replay_log(std::istream& in) {
  ReplayResult out;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0, line_no = 0;
  while (pos < content.size()) {
    ++line_no;
    auto nl = content.find('\n', pos);
    const bool torn = nl == std::string::npos;
    std::string_view line(content.data() + pos, (torn ? content.size() : nl) - pos);
    pos = torn ? content.size() : nl + 1;
    if (torn) {
      out.issues.push_back({line_no, "torn final line"});
      break;
    }
    if (detail::trim(line).empty()) continue;
    try {
      out.records.push_back(record_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      out.issues.push_back({line_no, std::string("malformed record: ") + e.what()});
    }
  }
  return out;
}

inline ReplayResult replay_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return replay_log(in);
}

/// Serialized appender for one JSON Lines file. Each record is written with a
/// single write call and flushed before the lock is released.
class LogWriter {
 public:
  LogWriter() = default;
  explicit LogWriter(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.empty()) return;
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    // Terminate a torn tail so the next record starts on its own line.
    std::error_code ec;
    auto size = std::filesystem::file_size(path_, ec);
    if (!ec && size > 0) {
      std::ifstream in(path_, std::ios::binary);
      in.seekg(static_cast<std::streamoff>(size - 1));
      if (in.get() != '\n') append_raw("\n");
    }
  }

  const std::filesystem::path& path() const { return path_; }

  void append(const std::string& line) { append_raw(line + "\n"); }

 private:
  void append_raw(const std::string& bytes) {
    if (path_.empty()) return;
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::io, "cannot append to " + path_.string());
  }

  std::filesystem::path path_;
  std::mutex mutex_;
};

// ---- Service -----------------------------------------------------------

struct ServiceConfig {
  std::size_t k = 10;
  // Directory for sessions.jsonl, annotations.jsonl and feedback.jsonl;
  // empty keeps everything in memory.
  std::filesystem::path data_dir;
  // Prototype image paths in the graph are resolved against this root.
  std::filesystem::path prototype_root;
};

using Clock = std::function<std::chrono::system_clock::time_point()>;

inline std::string format_timestamp(std::chrono::system_clock::time_point t) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms % 1000));
  return buf;
}

/// Builds the enrichment of `sign_id` from the facts of `kg`.
inline Enrichment enrich(const KnowledgeGraph& kg, const std::string& sign_id) {
  auto values = [&](std::string_view pred) {
    std::vector<std::string> out;
    for (const auto& o : kg.objects(sign_id, pred)) out.push_back(o.text());
    return out;
  };
  auto single = [&](std::string_view pred) -> std::optional<std::string> {
    auto v = values(pred);
    if (v.empty()) return std::nullopt;
    return v.front();
  };
  Enrichment e;
  e.class_name = single(predicates::category).value_or(sign_id);
  e.description = single(predicates::description);
  e.plate_shape = single(predicates::plate_shape).value_or("");
  e.background_color = single(predicates::background_color).value_or("");
  e.foreground_color = single(predicates::foreground_color);
  e.border_color = single(predicates::border_color);
  e.printed_shapes = values(predicates::printed_shape);
  e.icons = values(predicates::icon);
  e.texts = values(predicates::text);
  return e;
}

class AnnotationService {
 public:
  AnnotationService(std::shared_ptr<const KnowledgeGraph> kg, std::shared_ptr<const EncoderModel> model,
                    ServiceConfig config, Clock clock = std::chrono::system_clock::now)
      : kg_(std::move(kg)), model_(std::move(model)), config_(std::move(config)), clock_(std::move(clock)) {
    if (!kg_) throw Error(ErrorKind::validation, "service needs a knowledge graph");
    if (config_.k < 1) throw Error(ErrorKind::validation, "K must be at least 1");
    if (!config_.data_dir.empty()) {
      std::filesystem::create_directories(config_.data_dir);
      restore_sessions();
      auto replay = replay_log(annotation_log_path());
      records_ = std::move(replay.records);
      for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.idempotency_key) idempotent_.emplace(std::pair{r.session_id, *r.idempotency_key}, i);
      }
      replay_issues_ = std::move(replay.issues);
      sessions_log_ = std::make_unique<LogWriter>(config_.data_dir / "sessions.jsonl");
      annotation_log_ = std::make_unique<LogWriter>(annotation_log_path());
      feedback_log_ = std::make_unique<LogWriter>(feedback_log_path());
    } else {
      sessions_log_ = std::make_unique<LogWriter>();
      annotation_log_ = std::make_unique<LogWriter>();
      feedback_log_ = std::make_unique<LogWriter>();
    }
  }

  std::size_t k() const { return config_.k; }
  bool model_loaded() const { return model_ != nullptr; }
  const KnowledgeGraph& graph() const { return *kg_; }
  const ServiceConfig& config() const { return config_; }
  std::filesystem::path annotation_log_path() const { return config_.data_dir / "annotations.jsonl"; }
  std::filesystem::path feedback_log_path() const { return config_.data_dir / "feedback.jsonl"; }

  /// Issues found while replaying the annotation log at startup.
  const std::vector<ReplayIssue>& replay_issues() const { return replay_issues_; }

  Session create_session(const std::string& image_ref, const std::string& region) {
    if (detail::trim(image_ref).empty()) {
      throw FieldError(ErrorKind::validation, "image_ref", image_ref, "unreadable image reference");
    }
    for (unsigned char c : image_ref) {
      if (c < 0x20 || c == 0x7f) {
        throw FieldError(ErrorKind::validation, "image_ref", image_ref, "unreadable image reference");
      }
    }
    Session s;
    s.image_ref = image_ref;
    s.region = region;
    s.created_at = format_timestamp(clock_());
    s.graph_region = subgraph_for(region).second;
    {
      std::lock_guard lock(sessions_mutex_);
      s.id = next_session_id();
      sessions_[s.id] = s;
      sessions_log_->append(session_to_json(s).dump());
    }
    return s;
  }

  Session session(const std::string& id) const {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorKind::not_found, "unknown session '" + id + "'");
    return it->second;
  }

  std::vector<Session> sessions() const {
    std::lock_guard lock(sessions_mutex_);
    std::vector<Session> out;
    for (const auto& [id, s] : sessions_) out.push_back(s);
    return out;
  }

  CandidateResponse get_candidates(const std::string& session_id, const std::optional<BoundingBox>& bbox,
                                   const std::string& query_text, const std::optional<ImagePatch>& patch) {
    Session s = session(session_id);
    if (s.state == SessionState::closed) throw Error(ErrorKind::conflict, "session is closed");
    if (bbox && !bbox->valid()) throw FieldError(ErrorKind::validation, "bbox", "", "zero-area bounding box");
    if (patch && patch->empty()) throw FieldError(ErrorKind::validation, "patch", "", "zero-area image patch");
    const auto query = parse_query(query_text);
    const auto graph = subgraph_for(s.region).first;
    const auto result = evaluate(query, *graph);

    CandidateResponse response;
    response.kg_size = result.size();
    const bool wants_ranking = result.size() > config_.k && patch.has_value();
    if (wants_ranking && model_) {
      auto ranked = rank(*model_, *patch, result.sign_ids, prototype_lookup(*graph), config_.k, &cache_);
      response.source = CandidateSource::kg_vpe;
      for (const auto& e : ranked.entries) {
        response.candidates.push_back({e.sign_id, graph->find_sign(e.sign_id)->prototype_image_color, e.distance});
      }
    } else {
      if (wants_ranking) response.warning = "model not loaded; returning unranked knowledge-graph candidates";
      for (const auto& id : result.sign_ids) {
        response.candidates.push_back({id, graph->find_sign(id)->prototype_image_color, std::nullopt});
      }
    }

    {
      std::lock_guard lock(sessions_mutex_);
      auto& stored = sessions_.at(session_id);
      if (stored.state == SessionState::closed) throw Error(ErrorKind::conflict, "session is closed");
      stored.state = SessionState::annotating;
      stored.last_query = render_query(query);
      sessions_log_->append(session_to_json(stored).dump());
    }
    return response;
  }

  /// Records the annotator's choice. `query_text` defaults to the last query
  /// the session submitted. Repeating a call with the same idempotency key
  /// returns the first record without writing again.
  AnnotationRecord finalize_annotation(const std::string& session_id, const BoundingBox& bbox,
                                       const std::string& sign_id, bool missing_sign,
                                       const std::optional<std::string>& query_text = std::nullopt,
                                       const std::optional<std::string>& idempotency_key = std::nullopt) {
    Session s = session(session_id);
    if (s.state == SessionState::closed) throw Error(ErrorKind::conflict, "session is closed");
    if (!bbox.valid()) throw FieldError(ErrorKind::validation, "bbox", "", "zero-area bounding box");
    const auto graph = subgraph_for(s.region).first;
    if (!graph->find_sign(sign_id)) throw FieldError(ErrorKind::not_found, "sign_id", sign_id, "unknown sign");
    std::string attributes = s.last_query;
    if (query_text && !detail::trim(*query_text).empty()) attributes = render_query(parse_query(*query_text));

    AnnotationRecord r;
    r.session_id = session_id;
    r.image_ref = s.image_ref;
    r.bbox = bbox;
    r.sign_id = sign_id;
    r.attributes_provided = attributes;
    r.missing_sign = missing_sign;
    r.enrichment = enrich(*graph, sign_id);
    r.idempotency_key = idempotency_key;

    {
      std::lock_guard lock(records_mutex_);
      if (idempotency_key) {
        auto it = idempotent_.find({session_id, *idempotency_key});
        if (it != idempotent_.end()) return records_[it->second];
      }
      r.created_at = format_timestamp(clock_());
      const auto line = render_record_line(r);
      annotation_log_->append(line);
      if (missing_sign) feedback_log_->append(line);
      records_.push_back(r);
      if (idempotency_key) idempotent_[{session_id, *idempotency_key}] = records_.size() - 1;
    }
    {
      std::lock_guard lock(sessions_mutex_);
      auto& stored = sessions_.at(session_id);
      if (stored.state == SessionState::open) {
        stored.state = SessionState::annotating;
        sessions_log_->append(session_to_json(stored).dump());
      }
    }
    return r;
  }

  Session close_session(const std::string& session_id) {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw Error(ErrorKind::not_found, "unknown session '" + session_id + "'");
    if (it->second.state != SessionState::closed) {
      it->second.state = SessionState::closed;
      sessions_log_->append(session_to_json(it->second).dump());
    }
    return it->second;
  }

  std::vector<AnnotationRecord> records() const {
    std::lock_guard lock(records_mutex_);
    return records_;
  }

  /// Sub-graph for a region and the region it was built for; an unknown or
  /// empty region falls back to the generic graph (empty name).
  std::pair<std::shared_ptr<const KnowledgeGraph>, std::string> subgraph_for(const std::string& region) const {
    const auto key = detail::fold_trim(region);
    {
      std::shared_lock lock(subgraph_mutex_);
      auto it = subgraphs_.find(key);
      if (it != subgraphs_.end()) return it->second;
    }
    std::pair<std::shared_ptr<const KnowledgeGraph>, std::string> entry{kg_, ""};
    auto sub = std::make_shared<KnowledgeGraph>(domain_subgraph(*kg_, region));
    if (!sub->empty()) entry = {std::move(sub), key};
    std::unique_lock lock(subgraph_mutex_);
    return subgraphs_.emplace(key, std::move(entry)).first->second;
  }

  /// Loads (and caches) a sign's prototype image; nullptr if unavailable.
  const ImagePatch* prototype_image(const KnowledgeGraph& graph, const std::string& sign_id) const {
    {
      std::shared_lock lock(images_mutex_);
      auto it = images_.find(sign_id);
      if (it != images_.end()) return it->second.get();
    }
    const auto* sign = graph.find_sign(sign_id);
    if (!sign) return nullptr;
    std::shared_ptr<const ImagePatch> img;
    try {
      img = std::make_shared<const ImagePatch>(load_image(config_.prototype_root / sign->prototype_image_color));
    } catch (const Error&) {
      return nullptr;
    }
    std::unique_lock lock(images_mutex_);
    return images_.emplace(sign_id, std::move(img)).first->second.get();
  }

 private:
  PrototypeLookup prototype_lookup(const KnowledgeGraph& graph) const {
    return [this, &graph](const std::string& id) { return prototype_image(graph, id); };
  }

  // Requires sessions_mutex_.
  std::string next_session_id() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(++session_counter_));
    return buf;
  }

  void restore_sessions() {
    std::ifstream in(config_.data_dir / "sessions.jsonl", std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (detail::trim(line).empty()) continue;
      try {
        auto s = session_from_json(Json::parse(line));
        sessions_[s.id] = s;
      } catch (const std::exception&) {
        continue;  // torn tail from an interrupted append
      }
    }
    for (const auto& [id, s] : sessions_) {
      if (id.size() > 1 && id[0] == 's') {
        unsigned long long n = 0;
        if (std::sscanf(id.c_str() + 1, "%llu", &n) == 1) session_counter_ = std::max(session_counter_, n);
      }
    }
  }

  std::shared_ptr<const KnowledgeGraph> kg_;
  std::shared_ptr<const EncoderModel> model_;
  ServiceConfig config_;
  Clock clock_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, Session> sessions_;
  unsigned long long session_counter_ = 0;

  mutable std::mutex records_mutex_;
  std::vector<AnnotationRecord> records_;
  std::map<std::pair<std::string, std::string>, std::size_t> idempotent_;
  std::vector<ReplayIssue> replay_issues_;

  std::unique_ptr<LogWriter> sessions_log_;
  std::unique_ptr<LogWriter> annotation_log_;
  std::unique_ptr<LogWriter> feedback_log_;

  mutable std::shared_mutex subgraph_mutex_;
  mutable std::map<std::string, std::pair<std::shared_ptr<const KnowledgeGraph>, std::string>> subgraphs_;

  mutable std::shared_mutex images_mutex_;
  mutable std::map<std::string, std::shared_ptr<const ImagePatch>> images_;

  EmbeddingCache cache_;
};

}  // namespace signgraph
