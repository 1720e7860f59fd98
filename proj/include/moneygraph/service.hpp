#pragma once

#include <optional>
#include <string>

#include "httplib.h"
#include "moneygraph/session.hpp"

namespace moneygraph {

// JSON-over-HTTP session API. Routes (all bodies JSON unless noted):
//
//   GET    /ops                       operation catalog
//   POST   /sessions                  {regime, full_backing?, config?} -> {id}
//   GET    /sessions/{id}/state       canonical snapshot
//   PUT    /sessions/{id}/state       upload a snapshot (undoable)
//   GET    /sessions/{id}/measures    {reports: [MeasureReport]}; ?currency=X for one
//   GET    /sessions/{id}/dot         Graphviz text
//   GET    /sessions/{id}/invariants  {violations: [...]}
//   GET    /sessions/{id}/log         {records: [OpRecord]}
//   POST   /sessions/{id}/ops         {name, params} -> {ok, record, measures, state_hash}
//   POST   /sessions/{id}/undo|redo   {ok, state_hash}; 409 when history is empty
//   POST   /sessions/{id}/fork        {id}
//   DELETE /sessions/{id}
//
// Engine errors are 422 {code, message}; unknown sessions 404; bad JSON 400.
void mount_api(httplib::Server& server, SessionRegistry& registry);

/// --port, else $MONEYGRAPH_PORT, else 8080.
int resolve_port(std::optional<int> flag);

/// Blocks serving the API. Returns false if the port cannot be bound.
bool serve(const std::string& host, int port);

}  // namespace moneygraph
