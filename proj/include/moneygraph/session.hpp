#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "moneygraph/ledger.hpp"
#include "moneygraph/operations.hpp"

namespace moneygraph {

/// One sandbox branch: a graph, its operation log and undo/redo history.
/// Not thread-safe by itself; the registry hands out a lock with it.
class Session {
 public:
  static constexpr std::size_t default_undo_limit = 256;

  Session(std::string id, BalanceGraph graph, std::size_t undo_limit = default_undo_limit);

  const std::string& id() const { return id_; }
  const BalanceGraph& graph() const { return graph_; }
  const std::vector<OpRecord>& log() const { return log_; }
  std::size_t undo_depth() const { return undo_.size(); }
  std::size_t redo_depth() const { return redo_.size(); }

  /// Applies a named operation. On error nothing changes.
  const OpRecord& apply(std::string_view name, const Params& params);

  /// Replaces the graph wholesale (snapshot upload); undoable.
  void replace(BalanceGraph graph);

  bool undo();
  bool redo();

  /// Copy of the current graph and log under a new id, with empty history.
  Session fork(std::string id) const;

 private:
  struct Entry {
    std::string snapshot;
    std::optional<OpRecord> record;  // empty for uploads
  };

  void push_undo(Entry e);

  std::string id_;
  BalanceGraph graph_;
  std::size_t undo_limit_;
  std::deque<Entry> undo_;
  std::vector<Entry> redo_;
  std::vector<OpRecord> log_;
};

class SessionRegistry {
 public:
  struct Handle {
    std::shared_ptr<Session> session;
    std::shared_ptr<std::mutex> mutex;  // declared before lock: released after it
    std::unique_lock<std::mutex> lock;
    Session* operator->() const { return session.get(); }
    Session& operator*() const { return *session; }
  };

  std::string create(BalanceGraph graph);
  /// Locked access; empty session pointer when the id is unknown.
  Handle open(const std::string& id);
  std::optional<std::string> fork(const std::string& id);
  bool erase(const std::string& id);
  std::size_t size() const;

 private:
  struct Slot {
    std::shared_ptr<Session> session;
    std::shared_ptr<std::mutex> mutex;
  };

  std::string next_id();

  mutable std::mutex mutex_;
  std::map<std::string, Slot> sessions_;
  std::uint64_t counter_ = 0;
};

}  // namespace moneygraph
