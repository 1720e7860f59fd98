#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "moneygraph/service.hpp"
#include "support.hpp"

using namespace moneygraph;
using nlohmann::json;

namespace {

struct Api {
  httplib::Server server;
  SessionRegistry registry;
  int port = 0;
  std::thread thread;

  Api() {
    mount_api(server, registry);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~Api() {
    server.stop();
    thread.join();
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }

  std::string create(const json& body) {
    auto res = client().Post("/sessions", body.dump(), "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    return json::parse(res->body)["id"];
  }

  httplib::Result op(const std::string& id, const std::string& name, const json& params) {
    return client().Post("/sessions/" + id + "/ops", json{{"name", name}, {"params", params}}.dump(),
                         "application/json");
  }

  std::string state(const std::string& id) {
    auto res = client().Get("/sessions/" + id + "/state");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    return res->body;
  }
};

json params_json(const Params& p) {
  json out = json::object();
  for (const auto& [k, v] : p) out[k] = v;
  return out;
}

void fiat_agents(Api& api, const std::string& id) {
  for (auto [name, params] : std::vector<std::pair<std::string, json>>{
           {"add_agent", {{"name", "cb"}, {"kind", "central_bank"}, {"issues", "DOM"}}},
           {"add_agent", {{"name", "b1"}, {"kind", "bank"}}},
           {"add_agent", {{"name", "h1"}, {"kind", "nonbank"}}}}) {
    auto res = api.op(id, name, params);
    REQUIRE(res);
    REQUIRE(res->status == 200);
  }
}

}  // namespace

TEST_CASE("a loan through the API reports broad money") {
  Api api;
  auto id = api.create({{"regime", "fiat"}});
  fiat_agents(api, id);
  auto res = api.op(id, "create_loan", {{"bank", "b1"}, {"borrower", "h1"}, {"amount", 100}});
  REQUIRE(res);
  CHECK(res->status == 200);
  auto body = json::parse(res->body);
  CHECK(body["ok"] == true);
  CHECK(body["measures"]["broad_money"] == "100");
  CHECK(body["measures"]["currency"] == "DOM");
  CHECK(body["record"]["name"] == "create_loan");

  auto m = api.client().Get("/sessions/" + id + "/measures?currency=DOM");
  REQUIRE(m);
  CHECK(json::parse(m->body)["broad_money"] == "100");
  auto all = json::parse(api.client().Get("/sessions/" + id + "/measures")->body);
  CHECK(all["reports"].size() == 1);

  auto dot = api.client().Get("/sessions/" + id + "/dot");
  REQUIRE(dot);
  CHECK(dot->body.rfind("digraph", 0) == 0);
  CHECK(json::parse(api.client().Get("/sessions/" + id + "/invariants")->body)["violations"].empty());
  CHECK(json::parse(api.client().Get("/sessions/" + id + "/log")->body)["records"].size() == 4);
}

TEST_CASE("credit in a commodity session is a 422") {
  Api api;
  auto id = api.create({{"regime", "commodity"}});
  fiat_agents(api, id);
  auto res = api.op(id, "create_loan", {{"bank", "b1"}, {"borrower", "h1"}, {"amount", 100}});
  REQUIRE(res);
  CHECK(res->status == 422);
  auto body = json::parse(res->body);
  CHECK(body["code"] == "ErrRegimeViolation");
  CHECK(body["message"].is_string());
}

TEST_CASE("undo restores the hash after creation") {
  Api api;
  auto id = api.create({{"regime", "fiat"}});
  fiat_agents(api, id);
  auto before = api.state(id);
  api.op(id, "create_loan", {{"bank", "b1"}, {"borrower", "h1"}, {"amount", 100}});
  auto res = api.client().Post("/sessions/" + id + "/undo");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["state_hash"] == state_hash(load_snapshot(before)));
  CHECK(api.state(id) == before);

  auto redo = api.client().Post("/sessions/" + id + "/redo");
  CHECK(redo->status == 200);
  CHECK(api.client().Post("/sessions/" + id + "/redo")->status == 409);
}

TEST_CASE("error statuses") {
  Api api;
  auto c = api.client();
  CHECK(c.Get("/sessions/s999/state")->status == 404);
  CHECK(json::parse(c.Get("/sessions/s999/state")->body)["code"] == "ErrUnknownSession");
  CHECK(c.Post("/sessions/s999/ops", R"({"name":"create_loan"})", "application/json")->status == 404);
  CHECK(c.Delete("/sessions/s999")->status == 404);
  CHECK(c.Post("/sessions", "{not json", "application/json")->status == 400);
  CHECK(c.Post("/sessions", R"({"regime":"barter"})", "application/json")->status == 422);

  auto id = api.create({{"regime", "fiat"}});
  CHECK(c.Post("/sessions/" + id + "/ops", "[1,2", "application/json")->status == 400);
  CHECK(c.Post("/sessions/" + id + "/ops", R"({"params":{}})", "application/json")->status == 400);
  CHECK(c.Post("/sessions/" + id + "/ops", R"({"name":"create_loan","params":{"amount":[1]}})", "application/json")
            ->status == 400);
  auto unknown = c.Post("/sessions/" + id + "/ops", R"({"name":"teleport","params":{}})", "application/json");
  CHECK(unknown->status == 422);
  CHECK(json::parse(unknown->body)["code"] == "ErrUnknownOperation");
  CHECK(c.Post("/sessions/" + id + "/undo")->status == 409);
  CHECK(c.Put("/sessions/" + id + "/state", "garbage", "application/json")->status == 400);
  CHECK(c.Put("/sessions/" + id + "/state", "{}", "application/json")->status == 422);

  CHECK(c.Delete("/sessions/" + id)->status == 204);
  CHECK(c.Get("/sessions/" + id + "/state")->status == 404);
}

TEST_CASE("fork branches from an identical snapshot") {
  Api api;
  auto id = api.create({{"regime", "fiat"}});
  fiat_agents(api, id);
  api.op(id, "create_loan", {{"bank", "b1"}, {"borrower", "h1"}, {"amount", 70}});
  auto res = api.client().Post("/sessions/" + id + "/fork");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  std::string child = json::parse(res->body)["id"];
  CHECK(child != id);
  auto parent_state = api.state(id);
  CHECK(api.state(child) == parent_state);
  CHECK(api.op(child, "repay_loan", {{"bank", "b1"}, {"borrower", "h1"}, {"amount", 70}})->status == 200);
  CHECK(api.state(id) == parent_state);
  CHECK(api.state(child) != parent_state);
}

TEST_CASE("snapshot upload") {
  Api api;
  auto a = api.create({{"regime", "fiat"}});
  fiat_agents(api, a);
  api.op(a, "create_loan", {{"bank", "b1"}, {"borrower", "h1"}, {"amount", 30}});
  auto b = api.create({{"regime", "pure_commodity"}});
  auto put = api.client().Put("/sessions/" + b + "/state", api.state(a), "application/json");
  REQUIRE(put);
  CHECK(put->status == 200);
  CHECK(api.state(b) == api.state(a));
  CHECK(api.client().Post("/sessions/" + b + "/undo")->status == 200);
  CHECK(api.state(b).find("pure_commodity") != std::string::npos);
}

TEST_CASE("operation catalog") {
  Api api;
  auto res = api.client().Get("/ops");
  REQUIRE(res);
  auto ops = json::parse(res->body)["ops"];
  CHECK(ops.size() == op_catalog().size());
  bool found = false;
  for (const auto& o : ops) found = found || o["name"] == "treasury_spend";
  CHECK(found);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
}

TEST_CASE("API and engine agree over a scripted 50-op session") {
  Api api;
  auto w = mgtest::fiat_world(2, 3, 1, {true, true});
  auto id = api.create({{"regime", "fiat"}, {"config", {{"cb_intraday_credit", true}, {"treasury_overdraft", true}}}});
  auto add = [&](const AgentId& name, const char* kind, json extra = json::object()) {
    extra["name"] = name;
    extra["kind"] = kind;
    REQUIRE(api.op(id, "add_agent", extra)->status == 200);
  };
  add("cb", "central_bank", {{"issues", "DOM"}});
  add("tr", "treasury", {{"currency", "DOM"}});
  for (const auto& b : w.banks) add(b, "bank");
  for (const auto& h : w.nonbanks) add(h, "nonbank");
  for (const auto& f : w.foreigners) add(f, "foreign");
  REQUIRE(api.state(id) == snapshot(w.g));

  std::mt19937_64 rng(2024);
  int applied = 0;
  int rejected = 0;
  while (applied < 50) {
    auto p = mgtest::propose_any(w, rng);
    std::optional<std::string> engine_error;
    try {
      apply_op(w.g, p.name, p.params);
    } catch (const Error& e) {
      engine_error = std::string(e.name());
    }
    auto res = api.op(id, p.name, params_json(p.params));
    REQUIRE(res);
    if (engine_error) {
      ++rejected;
      CHECK(res->status == 422);
      CHECK(json::parse(res->body)["code"] == *engine_error);
      continue;
    }
    REQUIRE(res->status == 200);
    CHECK(json::parse(res->body)["state_hash"] == state_hash(w.g));
    ++applied;
  }
  CHECK(api.state(id) == snapshot(w.g));
  INFO("rejected proposals: " << rejected);

  auto undo = api.client().Post("/sessions/" + id + "/undo");
  CHECK(undo->status == 200);
  CHECK(api.client().Post("/sessions/" + id + "/redo")->status == 200);
  CHECK(api.state(id) == snapshot(w.g));
}

TEST_CASE("port resolution") {
  CHECK(resolve_port(9000) == 9000);
  ::unsetenv("MONEYGRAPH_PORT");
  CHECK(resolve_port(std::nullopt) == 8080);
  ::setenv("MONEYGRAPH_PORT", "9123", 1);
  CHECK(resolve_port(std::nullopt) == 9123);
  ::unsetenv("MONEYGRAPH_PORT");
}
