#include "moneygraph/service.hpp"

#include <cstdlib>

#include "json.hpp"
#include "moneygraph/measures.hpp"

namespace moneygraph {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct HttpError {
  int status;
  std::string code;
  std::string message;
};

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, status, ordered_json{{"code", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw HttpError{400, "ErrMalformedJson", "request body must be a JSON object"};
    return j;
  } catch (const json::exception& e) {
    throw HttpError{400, "ErrMalformedJson", e.what()};
  }
}

Regime parse_regime(const json& body) {
  std::string name = body.value("regime", std::string("fiat"));
  bool full = body.value("full_backing", false);
  if (name == "fiat") return Regime::fiat();
  if (name == "commodity" || name == "pure_commodity") return Regime::pure_commodity();
  if (name == "convertible") return Regime::convertible(full);
  throw Error(ErrorCode::BadParameter, "unknown regime '" + name + "'");
}

std::string param_text(const std::string& key, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  throw HttpError{400, "ErrMalformedJson", "parameter '" + key + "' must be a string, integer or boolean"};
}

ordered_json report_json(const MeasureReport& r) { return ordered_json::parse(r.to_json()); }

ordered_json reports_json(const BalanceGraph& g) {
  auto out = ordered_json::array();
  for (const auto& r : measure_all(g)) out.push_back(report_json(r));
  return out;
}

ordered_json headline_measures(const BalanceGraph& g, const Params& params) {
  if (auto it = params.find("currency"); it != params.end() && g.has_currency(it->second)) {
    return report_json(measure(g, it->second));
  }
  if (g.currencies().empty()) return nullptr;
  return report_json(measure(g, *g.currencies().begin()));
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler inner) {
  return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
    try {
      inner(req, res);
    } catch (const HttpError& e) {
      send_error(res, e.status, e.code, e.message);
    } catch (const Error& e) {
      send_error(res, 422, std::string(e.name()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "ErrMalformedJson", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "ErrInternal", e.what());
    }
  };
}

SessionRegistry::Handle open_or_404(SessionRegistry& registry, const httplib::Request& req) {
  auto id = req.matches[1].str();
  auto h = registry.open(id);
  if (!h.session) throw HttpError{404, "ErrUnknownSession", "no session '" + id + "'"};
  return h;
}

}  // namespace

void mount_api(httplib::Server& server, SessionRegistry& registry) {
  auto& reg = registry;
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server.Get("/ops", guarded([](const httplib::Request&, httplib::Response& res) {
    auto ops = ordered_json::array();
    for (const auto& spec : op_catalog()) {
      auto params = ordered_json::array();
      for (const auto& p : spec.params) params.push_back({{"key", p.key}, {"required", p.required}});
      ops.push_back({{"name", spec.name}, {"structural", spec.structural}, {"params", params}});
    }
    send_json(res, 200, {{"ops", ops}});
  }));

  server.Post("/sessions", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    auto g = new_graph(parse_regime(body));
    if (body.contains("config")) {
      const auto& c = body["config"];
      if (!c.is_object()) throw HttpError{400, "ErrMalformedJson", "config must be an object"};
      GraphConfig config;
      config.cb_intraday_credit = c.value("cb_intraday_credit", false);
      config.treasury_overdraft = c.value("treasury_overdraft", false);
      g.set_config(config);
    }
    auto id = reg.create(std::move(g));
    send_json(res, 200, {{"id", id}});
  }));

  server.Get(R"(/sessions/([A-Za-z0-9_]+)/state)", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
    auto h = open_or_404(reg, req);
    res.set_content(snapshot(h->graph()), "application/json");
  }));

  server.Put(R"(/sessions/([A-Za-z0-9_]+)/state)", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
    auto h = open_or_404(reg, req);
    if (!json::accept(req.body)) throw HttpError{400, "ErrMalformedJson", "snapshot is not valid JSON"};
    h->replace(load_snapshot(req.body));
    send_json(res, 200, {{"ok", true}, {"state_hash", state_hash(h->graph())}});
  }));

  server.Get(R"(/sessions/([A-Za-z0-9_]+)/measures)", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
    auto h = open_or_404(reg, req);
    if (req.has_param("currency")) {
      send_json(res, 200, report_json(measure(h->graph(), req.get_param_value("currency"))));
    } else {
      send_json(res, 200, {{"reports", reports_json(h->graph())}});
    }
  }));

  server.Get(R"(/sessions/([A-Za-z0-9_]+)/dot)", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
    auto h = open_or_404(reg, req);
    res.set_content(export_dot(h->graph()), "text/vnd.graphviz");
  }));

  server.Get(R"(/sessions/([A-Za-z0-9_]+)/invariants)", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
    auto h = open_or_404(reg, req);
    auto out = ordered_json::array();
    for (const auto& v : check_invariants(h->graph())) {
      out.push_back({{"code", v.code}, {"unit", v.unit}, {"subject", v.subject}, {"message", v.message}});
    }
    send_json(res, 200, {{"violations", out}});
  }));

  server.Get(R"(/sessions/([A-Za-z0-9_]+)/log)", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
    auto h = open_or_404(reg, req);
    auto out = ordered_json::array();
    for (const auto& r : h->log()) out.push_back(ordered_json::parse(r.to_json_line()));
    send_json(res, 200, {{"records", out}});
  }));

  server.Post(R"(/sessions/([A-Za-z0-9_]+)/ops)", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    auto h = open_or_404(reg, req);
    if (!body.contains("name") || !body["name"].is_string()) throw HttpError{400, "ErrMalformedJson", "name is required"};
    Params params;
    if (body.contains("params")) {
      if (!body["params"].is_object()) throw HttpError{400, "ErrMalformedJson", "params must be an object"};
      for (const auto& [k, v] : body["params"].items()) params[k] = param_text(k, v);
    }
    const auto& record = h->apply(body["name"].get<std::string>(), params);
    ordered_json out;
    out["ok"] = true;
    out["record"] = ordered_json::parse(record.to_json_line());
    out["measures"] = headline_measures(h->graph(), params);
    out["state_hash"] = state_hash(h->graph());
    send_json(res, 200, out);
  }));

  auto history = [&reg](bool forward) {
    return guarded([&reg, forward](const httplib::Request& req, httplib::Response& res) {
      auto h = open_or_404(reg, req);
      if (!(forward ? h->redo() : h->undo())) {
        throw HttpError{409, forward ? "ErrNothingToRedo" : "ErrNothingToUndo", "history is empty"};
      }
      send_json(res, 200, {{"ok", true}, {"state_hash", state_hash(h->graph())}});
    });
  };
  server.Post(R"(/sessions/([A-Za-z0-9_]+)/undo)", history(false));
  server.Post(R"(/sessions/([A-Za-z0-9_]+)/redo)", history(true));

  server.Post(R"(/sessions/([A-Za-z0-9_]+)/fork)", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
    auto id = req.matches[1].str();
    auto child = reg.fork(id);
    if (!child) throw HttpError{404, "ErrUnknownSession", "no session '" + id + "'"};
    send_json(res, 200, {{"id", *child}});
  }));

  server.Delete(R"(/sessions/([A-Za-z0-9_]+))", guarded([&reg](const httplib::Request& req, httplib::Response& res) {
    auto id = req.matches[1].str();
    if (!reg.erase(id)) throw HttpError{404, "ErrUnknownSession", "no session '" + id + "'"};
    res.status = 204;
  }));
}

int resolve_port(std::optional<int> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MONEYGRAPH_PORT")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
    }
  }
  return 8080;
}

bool serve(const std::string& host, int port) {
  httplib::Server server;
  SessionRegistry registry;
  mount_api(server, registry);
  return server.listen(host, port);
}

}  // namespace moneygraph
