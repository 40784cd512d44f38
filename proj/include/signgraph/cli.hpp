#pragma once

// Operator command line. `run_cli` is the whole program minus process setup,
// so tests can drive it in-process.
//
// Exit codes: 0 success, 1 internal, 2 usage, 3 syntax, 4 format,
// 5 validation or unknown value, 6 not found, 7 conflict, 8 I/O.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "signgraph/alignment.hpp"
#include "signgraph/fixture.hpp"
#include "signgraph/http.hpp"
#include "signgraph/render.hpp"
#include "signgraph/reports.hpp"
#include "signgraph/snapshot.hpp"

#include <CLI11.hpp>

namespace signgraph {

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::syntax: return 3;
    case ErrorKind::format: return 4;
    case ErrorKind::unknown_value:
    case ErrorKind::validation: return 5;
    case ErrorKind::not_found: return 6;
    case ErrorKind::conflict: return 7;
    case ErrorKind::io: return 8;
  }
  return 1;
}

namespace detail {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
}

struct GraphOptions {
  std::string snapshot;
  std::string signs;
  std::string rules;
  std::string vocabulary;

  void add_to(CLI::App* cmd, bool allow_signs) {
    cmd->add_option("--snapshot", snapshot, "Knowledge-graph snapshot");
    if (allow_signs) cmd->add_option("--signs", signs, "Sign document (JSON Lines), instead of a snapshot");
    cmd->add_option("--rules", rules, "Alignment rules applied after loading a sign document");
    cmd->add_option("--vocabulary", vocabulary, "Vocabulary schema file");
  }

  VocabularySet vocab() const {
    return vocabulary.empty() ? VocabularySet::defaults() : VocabularySet::load_schema(vocabulary);
  }

  KnowledgeGraph load(const VocabularySet& v, std::ostream& err) const {
    if (!snapshot.empty() && !signs.empty()) throw Error(ErrorKind::validation, "give --snapshot or --signs, not both");
    if (!snapshot.empty()) return load_snapshot(snapshot, v);
    if (signs.empty()) throw Error(ErrorKind::validation, "a knowledge graph is required (--snapshot or --signs)");
    KnowledgeGraph kg;
    std::ifstream in(signs, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read " + signs);
    auto report = kg.ingest(in, v);
    for (const auto& r : report.rejected) {
      err << signs << ":" << r.line << ": rejected (" << r.reason << "): " << r.detail << "\n";
    }
    if (!rules.empty()) apply_alignment(kg, AlignmentRuleSet::load(rules, v));
    return kg;
  }
};

inline std::vector<std::size_t> parse_size_list(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  for (const auto& part : split(text, ',')) {
    auto t = trim(part);
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || v == 0) {
      throw Error(ErrorKind::validation, std::string("bad ") + what + " list '" + text + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::validation, std::string("empty ") + what + " list");
  return out;
}

inline std::pair<std::string, int> parse_listen(const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorKind::validation, "listen address must be host:port");
  int port = 0;
  auto digits = std::string_view(listen).substr(colon + 1);
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || p != digits.data() + digits.size() || port < 0 || port > 65535) {
    throw Error(ErrorKind::validation, "bad port in '" + listen + "'");
  }
  return {listen.substr(0, colon), port};
}

/// Writes degraded field patches of signs with the given plate and
/// background, plus a manifest whose pool is that whole group.
inline std::size_t write_eval_set(const std::vector<SignPrototype>& signs,
                                  const std::map<std::string, ImagePatch>& prototypes,
                                  const std::string& plate, const std::string& bg, std::size_t count,
                                  std::uint64_t seed, const std::filesystem::path& dir) {
  std::vector<std::string> pool;
  for (const auto& s : signs) {
    if (s.plate_shape.name == plate && s.background_color.name == bg) pool.push_back(s.id);
  }
  if (pool.empty()) return 0;
  std::filesystem::create_directories(dir / "patches");
  SplitMix64 rng(seed ^ 0xe7a1u);
  std::string manifest;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& id = pool[rng.below(pool.size())];
    auto patch = field_patch(prototypes.at(id), rng.next());
    char name[64];
    std::snprintf(name, sizeof name, "patch-%03zu.png", i + 1);
    save_png(patch, dir / "patches" / name);
    OrderedJson j;
    j["patch"] = std::string("patches/") + name;
    j["sign_id"] = id;
    j["pool"] = pool;
    manifest += j.dump() + "\n";
  }
  write_text_file(dir / "manifest.jsonl", manifest);
  return count;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Road sign knowledge graph: ingestion, queries, evaluation and the annotation service"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Ingest a sign document and write a snapshot");
  std::string ingest_input, ingest_out, ingest_rules, ingest_vocab;
  ingest->add_option("signs", ingest_input, "Sign document (JSON Lines)")->required();
  ingest->add_option("--snapshot,--out", ingest_out, "Snapshot to write")->required();
  ingest->add_option("--rules", ingest_rules, "Alignment rules to apply before saving");
  ingest->add_option("--vocabulary", ingest_vocab, "Vocabulary schema file");

  // query
  auto* query = app.add_subcommand("query", "Evaluate one attribute query");
  std::string query_text, query_region, query_format = "table";
  detail::GraphOptions query_graph;
  query->add_option("query", query_text, "Query, e.g. 'plate=octagon AND bg=red'")->required();
  query_graph.add_to(query, true);
  query->add_option("--region", query_region, "Evaluate against this region's sub-graph");
  query->add_option("--format", query_format, "table | records");

  // gen-fixture
  auto* gen = app.add_subcommand("gen-fixture", "Generate the synthetic sign catalogue and query workload");
  FixtureSpec spec;
  std::string gen_out;
  bool gen_no_images = false;
  std::size_t gen_eval = 50;
  gen->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
  gen->add_option("--total", spec.total_signs, "Number of signs")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_flag("--no-images", gen_no_images, "Skip prototype images and the evaluation set");
  gen->add_option("--eval-items", gen_eval, "Patches in the ranker evaluation set")->capture_default_str();
  std::vector<std::string> gen_targets;
  gen->add_option("--target", gen_targets, "plate:background:proportion, replaces the default targets");

  // eval-search-space
  auto* ess = app.add_subcommand("eval-search-space", "Search-space reduction over a query workload");
  detail::GraphOptions ess_graph;
  std::string ess_workload, ess_format = "table", ess_out;
  ess_graph.add_to(ess, true);
  ess->add_option("--workload", ess_workload, "Workload file, one query per line")->required();
  ess->add_option("--format", ess_format, "table | records");
  ess->add_option("--out", ess_out, "Write the report here instead of stdout");

  // eval-ranker
  auto* er = app.add_subcommand("eval-ranker", "Top-k accuracy of the latent ranker by pool size");
  detail::GraphOptions er_graph;
  std::string er_weights, er_manifest, er_sizes = "10,20,30", er_ks = "1,3,5", er_format = "table", er_out,
                                       er_root;
  std::uint64_t er_seed = 42;
  er_graph.add_to(er, true);
  er->add_option("--weights", er_weights, "VPE1 weight file")->required();
  er->add_option("--manifest", er_manifest, "Evaluation manifest (JSON Lines)")->required();
  er->add_option("--prototype-root", er_root, "Directory prototype image paths are relative to");
  er->add_option("--sizes", er_sizes, "Pool sizes")->capture_default_str();
  er->add_option("--ks", er_ks, "Rank cutoffs")->capture_default_str();
  er->add_option("--seed", er_seed, "Down-sampling seed")->capture_default_str();
  er->add_option("--format", er_format, "table | records");
  er->add_option("--out", er_out, "Write the report here instead of stdout");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  detail::GraphOptions serve_graph;
  std::string serve_weights, serve_listen = "127.0.0.1:8080", serve_data = "annotation-data", serve_root;
  std::size_t serve_k = 10;
  serve_graph.add_to(serve, true);
  serve->add_option("--weights", serve_weights, "VPE1 weight file; without it results are never re-ranked");
  serve->add_option("--k", serve_k, "Candidate threshold K")->capture_default_str();
  serve->add_option("--listen", serve_listen, "host:port")->capture_default_str();
  serve->add_option("--data-dir", serve_data, "Directory for session and annotation logs")->capture_default_str();
  serve->add_option("--prototype-root", serve_root, "Directory prototype image paths are relative to");
  for (auto* cmd : {serve}) {
    cmd->get_option("--snapshot")->envname("SIGNGRAPH_SNAPSHOT");
    cmd->get_option("--weights")->envname("SIGNGRAPH_WEIGHTS");
    cmd->get_option("--k")->envname("SIGNGRAPH_K");
    cmd->get_option("--listen")->envname("SIGNGRAPH_LISTEN");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*ingest) {
      const auto vocab = ingest_vocab.empty() ? VocabularySet::defaults() : VocabularySet::load_schema(ingest_vocab);
      KnowledgeGraph kg;
      std::ifstream in(ingest_input, std::ios::binary);
      if (!in) throw Error(ErrorKind::io, "cannot read " + ingest_input);
      auto report = kg.ingest(in, vocab);
      for (const auto& r : report.rejected) {
        err << ingest_input << ":" << r.line << ": rejected (" << r.reason << "): " << r.detail << "\n";
      }
      std::size_t derived = 0;
      if (!ingest_rules.empty()) derived = apply_alignment(kg, AlignmentRuleSet::load(ingest_rules, vocab));
      save_snapshot(kg, ingest_out);
      out << "ingested " << report.count << " signs, rejected " << report.rejected.size() << ", derived "
          << derived << " facts -> " << ingest_out << "\n";
      return 0;
    }

    if (*query) {
      const auto vocab = query_graph.vocab();
      auto kg = query_graph.load(vocab, err);
      const auto format = report_format_from_string(query_format);
      const auto parsed = parse_query(query_text);
      const auto graph = query_region.empty() ? kg : domain_subgraph(kg, query_region);
      const auto result = evaluate(parsed, graph);
      for (const auto& id : result.sign_ids) {
        if (format == ReportFormat::records) {
          out << OrderedJson{{"sign_id", id}}.dump() << "\n";
        } else {
          out << id << "\n";
        }
      }
      return 0;
    }

    if (*gen) {
      if (!gen_targets.empty()) {
        spec.targets.clear();
        for (const auto& t : gen_targets) {
          auto parts = detail::split(t, ':');
          double p = 0;
          if (parts.size() != 3 || !(p = detail::parse_number(parts[2]).value_or(-1), p >= 0)) {
            throw Error(ErrorKind::validation, "bad --target '" + t + "', expected plate:background:proportion");
          }
          spec.targets.push_back({detail::fold_trim(parts[0]), detail::fold_trim(parts[1]), p});
        }
      }
      const auto fixture = generate_fixture(spec);
      const std::filesystem::path dir = gen_out;
      detail::write_text_file(dir / "signs.jsonl", fixture.sign_document());
      detail::write_text_file(dir / "workload.txt", fixture.workload_document());
      if (fixture.workload.size() < spec.workload.queries) {
        err << "warning: only " << fixture.workload.size() << " distinct queries fit this catalogue\n";
      }
      std::size_t eval_items = 0;
      if (!gen_no_images) {
        std::map<std::string, ImagePatch> images;
        for (const auto& s : fixture.signs) {
          auto img = render_prototype(s);
          const auto path = dir / s.prototype_image_color;
          std::filesystem::create_directories(path.parent_path());
          save_png(img, path);
          images.emplace(s.id, std::move(img));
        }
        // Evaluation patches come from the second target (diamond/yellow by
        // default) when there is one, else the first.
        if (!spec.targets.empty() && gen_eval > 0) {
          const auto& t = spec.targets.size() > 1 ? spec.targets[1] : spec.targets[0];
          eval_items = detail::write_eval_set(fixture.signs, images, t.plate_shape, t.background_color, gen_eval,
                                              spec.seed, dir / "eval");
        }
      }
      out << "wrote " << fixture.signs.size() << " signs, " << fixture.workload.size() << " queries";
      if (!gen_no_images) out << ", " << fixture.signs.size() << " prototypes, " << eval_items << " eval patches";
      out << " -> " << dir.string() << "\n";
      return 0;
    }

    if (*ess) {
      const auto vocab = ess_graph.vocab();
      auto kg = ess_graph.load(vocab, err);
      const auto format = report_format_from_string(ess_format);
      std::ifstream in(ess_workload, std::ios::binary);
      if (!in) throw Error(ErrorKind::io, "cannot read " + ess_workload);
      const auto queries = parse_workload(in, ess_workload);
      const auto report = search_space_stats(queries, kg);
      const auto text = render_search_space(report, queries, format);
      if (ess_out.empty()) {
        out << text;
      } else {
        detail::write_text_file(ess_out, text);
      }
      return 0;
    }

    if (*er) {
      const auto vocab = er_graph.vocab();
      auto kg = er_graph.load(vocab, err);
      const auto format = report_format_from_string(er_format);
      const auto model = EncoderModel::load(er_weights);
      const auto manifest = load_manifest(er_manifest);
      std::filesystem::path root = er_root;
      if (root.empty()) {
        root = std::filesystem::path(!er_graph.signs.empty() ? er_graph.signs : er_graph.snapshot).parent_path();
      }
      std::map<std::string, ImagePatch> images;
      std::set<std::string> needed;
      for (const auto& e : manifest) needed.insert(e.pool.begin(), e.pool.end());
      for (const auto& id : needed) {
        const auto* sign = kg.find_sign(id);
        if (!sign) throw Error(ErrorKind::not_found, "pool id '" + id + "' is not in the knowledge graph");
        images.emplace(id, load_image(root / sign->prototype_image_color));
      }
      EmbeddingCache cache;
      const auto matrix = evaluate_ranker(model, manifest, lookup_in(images), detail::parse_size_list(er_sizes, "size"),
                                          detail::parse_size_list(er_ks, "k"), er_seed, &cache);
      const auto text = render_accuracy(matrix, format);
      if (er_out.empty()) {
        out << text;
      } else {
        detail::write_text_file(er_out, text);
      }
      return 0;
    }

    if (*serve) {
      const auto vocab = serve_graph.vocab();
      auto kg = std::make_shared<const KnowledgeGraph>(serve_graph.load(vocab, err));
      std::shared_ptr<const EncoderModel> model;
      if (!serve_weights.empty()) model = std::make_shared<const EncoderModel>(EncoderModel::load(serve_weights));
      ServiceConfig config;
      config.k = serve_k;
      config.data_dir = serve_data;
      config.prototype_root = serve_root;
      if (config.prototype_root.empty()) {
        config.prototype_root =
            std::filesystem::path(!serve_graph.signs.empty() ? serve_graph.signs : serve_graph.snapshot).parent_path();
      }
      AnnotationService service(kg, model, config);
      for (const auto& issue : service.replay_issues()) {
        err << "warning: annotation log line " << issue.line << ": " << issue.reason << "\n";
      }
      const auto [host, port] = detail::parse_listen(serve_listen);
      httplib::Server server;
      install_routes(server, service, vocab);
      err << "serving " << kg->size() << " signs on " << host << ":" << port
          << (model ? " with re-ranking" : " without a model") << "\n";
      if (!server.listen(host, port)) throw Error(ErrorKind::io, "cannot listen on " + serve_listen);
      return 0;
    }
  } catch (const PositionedError& e) {
    err << "error[" << to_string(e.kind()) << "] at offset " << e.position() << ": " << e.detail() << "\n";
    return exit_code(e.kind());
  } catch (const FieldError& e) {
    err << "error[" << to_string(e.kind()) << "] field " << e.field() << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error[io]: " << e.what() << "\n";
    return exit_code(ErrorKind::io);
  } catch (const std::exception& e) {
    err << "error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace signgraph
