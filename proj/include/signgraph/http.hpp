#pragma once

// HTTP binding of AnnotationService. Bodies are JSON objects.
//
//   POST /sessions                      {image_ref, region}
//   GET  /sessions/:id
//   POST /sessions/:id/candidates       {q, bbox?, patch? (base64 PNG)}
//   POST /sessions/:id/annotations      {bbox, sign_id, missing_sign?, q?, idempotency_key?}
//   POST /sessions/:id/close
//   GET  /signs?region=..&q=..
//   GET  /signs/:id
//   GET  /signs/:id/prototype.png
//   GET  /vocabularies
//   GET  /healthz
//
// Errors: {"error": kind, "message": text, "field"?, "position"?}.

#include <memory>
#include <string>

// Eigen must come first: httplib pulls in <resolv.h>, whose `_res` macro
// collides with Eigen parameter names.
#include "signgraph/service.hpp"

#include <httplib.h>

namespace signgraph {

inline int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::syntax:
    case ErrorKind::format: return 400;
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    case ErrorKind::unknown_value:
    case ErrorKind::validation: return 422;
    case ErrorKind::io: return 500;
  }
  return 500;
}

namespace detail {

inline void send_json(httplib::Response& res, const OrderedJson& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, const Error& e) {
  OrderedJson body;
  body["error"] = to_string(e.kind());
  body["message"] = e.what();
  if (const auto* fe = dynamic_cast<const FieldError*>(&e)) body["field"] = fe->field();
  if (const auto* pe = dynamic_cast<const PositionedError*>(&e)) body["position"] = pe->position();
  send_json(res, body, http_status(e.kind()));
}

inline Json parse_body(const httplib::Request& req, std::initializer_list<std::string_view> allowed) {
  Json body;
  try {
    body = req.body.empty() ? Json::object() : Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    throw PositionedError(ErrorKind::syntax, e.byte, "malformed JSON body");
  }
  if (!body.is_object()) throw Error(ErrorKind::format, "request body must be a JSON object");
  for (const auto& [key, _] : body.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw FieldError(ErrorKind::validation, key, "", "unknown field");
    }
  }
  return body;
}

inline std::string string_field(const Json& body, const char* name, bool required) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) {
    if (required) throw FieldError(ErrorKind::validation, name, "", "missing");
    return {};
  }
  if (!it->is_string()) throw FieldError(ErrorKind::validation, name, it->dump(), "expected a string");
  return it->get<std::string>();
}

template <class Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const Json::exception& e) {
      send_error(res, Error(ErrorKind::format, e.what()));
    } catch (const std::exception& e) {
      send_error(res, Error(ErrorKind::io, e.what()));
    }
  };
}

}  // namespace detail

/// Registers every route on `server`. `service` and `vocab` must outlive it.
inline void install_routes(httplib::Server& server, AnnotationService& service, const VocabularySet& vocab) {
  using detail::guarded;
  using detail::send_json;

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type, Idempotency-Key"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/healthz", guarded([&](const httplib::Request&, httplib::Response& res) {
    OrderedJson body;
    body["status"] = "ok";
    body["signs"] = service.graph().size();
    body["model_loaded"] = service.model_loaded();
    body["k"] = service.k();
    send_json(res, body);
  }));

  server.Get("/vocabularies", guarded([&](const httplib::Request&, httplib::Response& res) {
    OrderedJson body;
    for (auto kind : kAllVocabularies) body[std::string(vocabulary_name(kind))] = vocab.members(kind);
    send_json(res, body);
  }));

  server.Post("/sessions", guarded([&](const httplib::Request& req, httplib::Response& res) {
    auto body = detail::parse_body(req, {"image_ref", "region"});
    auto s = service.create_session(detail::string_field(body, "image_ref", true),
                                    detail::string_field(body, "region", false));
    send_json(res, session_to_json(s), 201);
  }));

  server.Get("/sessions/:id", guarded([&](const httplib::Request& req, httplib::Response& res) {
    send_json(res, session_to_json(service.session(req.path_params.at("id"))));
  }));

  server.Post("/sessions/:id/candidates", guarded([&](const httplib::Request& req, httplib::Response& res) {
    auto body = detail::parse_body(req, {"q", "bbox", "patch"});
    std::optional<BoundingBox> bbox;
    if (body.contains("bbox") && !body["bbox"].is_null()) bbox = bbox_from_json(body["bbox"]);
    std::optional<ImagePatch> patch;
    auto encoded = detail::string_field(body, "patch", false);
    if (!encoded.empty()) {
      try {
        patch = decode_png(base64_decode(encoded));
      } catch (const Error& e) {
        throw FieldError(ErrorKind::validation, "patch", "", e.what());
      }
      patch->source_bbox = bbox;
    }
    auto response = service.get_candidates(req.path_params.at("id"), bbox,
                                           detail::string_field(body, "q", true), patch);
    send_json(res, candidates_to_json(response));
  }));

  server.Post("/sessions/:id/annotations", guarded([&](const httplib::Request& req, httplib::Response& res) {
    auto body = detail::parse_body(req, {"bbox", "sign_id", "missing_sign", "q", "idempotency_key"});
    if (!body.contains("bbox")) throw FieldError(ErrorKind::validation, "bbox", "", "missing");
    bool missing = false;
    if (body.contains("missing_sign")) {
      if (!body["missing_sign"].is_boolean()) {
        throw FieldError(ErrorKind::validation, "missing_sign", body["missing_sign"].dump(), "expected a boolean");
      }
      missing = body["missing_sign"].get<bool>();
    }
    std::optional<std::string> q;
    if (body.contains("q")) q = detail::string_field(body, "q", false);
    std::optional<std::string> key;
    if (body.contains("idempotency_key")) {
      key = detail::string_field(body, "idempotency_key", true);
    } else if (req.has_header("Idempotency-Key")) {
      key = req.get_header_value("Idempotency-Key");
    }
    auto record = service.finalize_annotation(req.path_params.at("id"), bbox_from_json(body["bbox"]),
                                              detail::string_field(body, "sign_id", true), missing, q, key);
    send_json(res, record_to_json(record), 201);
  }));

  server.Post("/sessions/:id/close", guarded([&](const httplib::Request& req, httplib::Response& res) {
    send_json(res, session_to_json(service.close_session(req.path_params.at("id"))));
  }));

  server.Get("/signs", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const auto region = req.get_param_value("region");
    const auto [graph, graph_region] = service.subgraph_for(region);
    std::vector<std::string> ids;
    const auto q = req.get_param_value("q");
    if (detail::trim(q).empty()) {
      for (const auto& [id, _] : graph->signs()) ids.push_back(id);
    } else {
      ids = evaluate(parse_query(q), *graph).sign_ids;
    }
    OrderedJson list = OrderedJson::array();
    for (const auto& id : ids) {
      list.push_back(OrderedJson{{"sign_id", id}, {"prototype", graph->find_sign(id)->prototype_image_color}});
    }
    OrderedJson body;
    body["subgraph"] = graph_region.empty() ? "generic" : graph_region;
    body["count"] = ids.size();
    body["signs"] = std::move(list);
    send_json(res, body);
  }));

  server.Get("/signs/:id", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const auto& id = req.path_params.at("id");
    const auto* sign = service.graph().find_sign(id);
    if (!sign) throw Error(ErrorKind::not_found, "unknown sign '" + id + "'");
    OrderedJson body;
    body["sign"] = sign_to_json(*sign);
    body["enrichment"] = enrichment_to_json(enrich(service.graph(), id));
    send_json(res, body);
  }));

  server.Get("/signs/:id/prototype.png", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const auto& id = req.path_params.at("id");
    if (!service.graph().find_sign(id)) throw Error(ErrorKind::not_found, "unknown sign '" + id + "'");
    const auto* img = service.prototype_image(service.graph(), id);
    if (!img) throw Error(ErrorKind::not_found, "no prototype image for '" + id + "'");
    res.set_content(encode_png(*img), "image/png");
  }));
}

}  // namespace signgraph
