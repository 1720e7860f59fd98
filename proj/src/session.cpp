#include "moneygraph/session.hpp"

namespace moneygraph {

Session::Session(std::string id, BalanceGraph graph, std::size_t undo_limit)
    : id_(std::move(id)), graph_(std::move(graph)), undo_limit_(undo_limit) {}

void Session::push_undo(Entry e) {
  undo_.push_back(std::move(e));
  while (undo_.size() > undo_limit_) undo_.pop_front();
  redo_.clear();
}

const OpRecord& Session::apply(std::string_view name, const Params& params) {
  auto before = snapshot(graph_);
  auto next = graph_;
  auto record = apply_op(next, name, params);
  record.seq = log_.empty() ? 1 : log_.back().seq + 1;
  graph_ = std::move(next);
  push_undo({std::move(before), record});
  log_.push_back(std::move(record));
  return log_.back();
}

void Session::replace(BalanceGraph graph) {
  push_undo({snapshot(graph_), std::nullopt});
  graph_ = std::move(graph);
}

bool Session::undo() {
  if (undo_.empty()) return false;
  auto e = std::move(undo_.back());
  undo_.pop_back();
  Entry current{snapshot(graph_), e.record};
  graph_ = load_snapshot(e.snapshot);
  if (e.record && !log_.empty()) log_.pop_back();
  redo_.push_back(std::move(current));
  return true;
}

bool Session::redo() {
  if (redo_.empty()) return false;
  auto e = std::move(redo_.back());
  redo_.pop_back();
  undo_.push_back({snapshot(graph_), e.record});
  graph_ = load_snapshot(e.snapshot);
  if (e.record) log_.push_back(*e.record);
  return true;
}

Session Session::fork(std::string id) const {
  Session s(std::move(id), graph_, undo_limit_);
  s.log_ = log_;
  return s;
}

std::string SessionRegistry::next_id() { return "s" + std::to_string(++counter_); }

std::string SessionRegistry::create(BalanceGraph graph) {
  std::lock_guard lock(mutex_);
  auto id = next_id();
  sessions_.emplace(id, Slot{std::make_shared<Session>(id, std::move(graph)), std::make_shared<std::mutex>()});
  return id;
}

SessionRegistry::Handle SessionRegistry::open(const std::string& id) {
  Slot slot;
  {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return {};
    slot = it->second;
  }
  Handle h{slot.session, slot.mutex, {}};
  h.lock = std::unique_lock<std::mutex>(*h.mutex);
  return h;
}

std::optional<std::string> SessionRegistry::fork(const std::string& id) {
  auto parent = open(id);
  if (!parent.session) return std::nullopt;
  std::lock_guard lock(mutex_);
  auto child = next_id();
  sessions_.emplace(child, Slot{std::make_shared<Session>(parent->fork(child)), std::make_shared<std::mutex>()});
  return child;
}

bool SessionRegistry::erase(const std::string& id) {
  auto h = open(id);
  if (!h.session) return false;
  std::lock_guard lock(mutex_);
  return sessions_.erase(id) > 0;
}

std::size_t SessionRegistry::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

}  // namespace moneygraph
