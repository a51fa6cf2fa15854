#include "transagent/graph.hpp"

#include <deque>

#include <nlohmann/json.hpp>

namespace transagent::graph {

namespace {

using json = nlohmann::json;

bool is_start(std::string_view id) { return id == kStart; }
bool is_end(std::string_view id) { return id == kEnd; }

std::vector<std::string> targets_of(const Edge& e) {
  if (const auto* s = std::get_if<StaticEdge>(&e.kind)) return {s->to};
  const auto& c = std::get<ConditionalEdge>(e.kind);
  return {c.allowed_targets.begin(), c.allowed_targets.end()};
}

std::string describe(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

json optional_to_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::string> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

json state_to_json(const GraphState& s) {
  return {{"input_text", s.input_text},
          {"detected_language", optional_to_json(s.detected_language)},
          {"intent", optional_to_json(s.intent)},
          {"output_text", optional_to_json(s.output_text)},
          {"metadata", s.metadata}};
}

GraphState state_from_json(const json& j) {
  GraphState s;
  s.input_text = j.at("input_text").get<std::string>();
  s.detected_language = optional_from_json(j.at("detected_language"));
  s.intent = optional_from_json(j.at("intent"));
  s.output_text = optional_from_json(j.at("output_text"));
  s.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
  return s;
}

}  // namespace

std::string_view to_string(GraphError::Code code) {
  switch (code) {
    case GraphError::Code::DuplicateNode: return "duplicate-node";
    case GraphError::Code::DanglingEdge: return "dangling-edge";
    case GraphError::Code::UnreachableNode: return "unreachable-node";
    case GraphError::Code::NoPathToEnd: return "no-path-to-end";
    case GraphError::Code::StaticCycle: return "static-cycle";
    case GraphError::Code::InvalidEntry: return "invalid-entry";
    case GraphError::Code::MultipleOutgoing: return "multiple-outgoing";
  }
  return "unknown";
}

std::vector<std::string> ExecutionTrace::node_order() const {
  std::vector<std::string> order;
  order.reserve(visits.size());
  for (const auto& v : visits) order.push_back(v.node);
  return order;
}

// ---------------------------------------------------------------------------
// Building

StateGraph& StateGraph::add_node(std::string id, Handler handler) {
  if (is_start(id) || is_end(id)) {
    throw GraphError(GraphError::Code::DuplicateNode, "node id '" + id + "' is reserved");
  }
  for (const auto& n : nodes_) {
    if (n.id == id) throw GraphError(GraphError::Code::DuplicateNode, "duplicate node '" + id + "'");
  }
  nodes_.push_back(Node{std::move(id), std::move(handler)});
  return *this;
}

StateGraph& StateGraph::add_edge(std::string from, std::string to) {
  return add_edge(Edge{std::move(from), StaticEdge{std::move(to)}});
}

StateGraph& StateGraph::add_conditional_edge(std::string from, Router router,
                                             std::set<std::string> allowed_targets) {
  return add_edge(
      Edge{std::move(from), ConditionalEdge{std::move(router), std::move(allowed_targets)}});
}

StateGraph& StateGraph::add_edge(Edge edge) {
  edges_.push_back(std::move(edge));
  return *this;
}

CompiledGraph StateGraph::compile() const {
  using Code = GraphError::Code;
  std::set<std::string, std::less<>> ids;
  for (const auto& n : nodes_) ids.insert(n.id);
  auto known = [&](const std::string& id) { return ids.contains(id); };

  for (const auto& e : edges_) {
    if (!is_start(e.from) && !known(e.from)) {
      throw GraphError(Code::DanglingEdge, "edge leaves unknown node '" + e.from + "'");
    }
    if (const auto* c = std::get_if<ConditionalEdge>(&e.kind)) {
      if (c->allowed_targets.empty()) {
        throw GraphError(Code::DanglingEdge, "conditional edge from '" + e.from + "' has no targets");
      }
      if (!c->router) throw GraphError(Code::DanglingEdge, "conditional edge from '" + e.from + "' has no router");
    }
    for (const auto& to : targets_of(e)) {
      if (!is_end(to) && !known(to)) {
        throw GraphError(Code::DanglingEdge,
                         "edge from '" + e.from + "' points to unknown node '" + to + "'");
      }
    }
  }

  // Cycles made only of static edges can never be left.
  {
    std::map<std::string, std::vector<std::string>> static_next;
    for (const auto& e : edges_) {
      if (const auto* s = std::get_if<StaticEdge>(&e.kind); s && !is_start(e.from) && !is_end(s->to)) {
        static_next[e.from].push_back(s->to);
      }
    }
    enum class Mark { White, Grey, Black };
    std::map<std::string, Mark> mark;
    std::function<void(const std::string&)> visit = [&](const std::string& id) {
      mark[id] = Mark::Grey;
      for (const auto& next : static_next[id]) {
        if (mark[next] == Mark::Grey) {
          throw GraphError(Code::StaticCycle, "static edges form a cycle through '" + next + "'");
        }
        if (mark[next] == Mark::White) visit(next);
      }
      mark[id] = Mark::Black;
    };
    for (const auto& n : nodes_) {
      if (mark[n.id] == Mark::White) visit(n.id);
    }
  }

  std::map<std::string, std::vector<const Edge*>> outgoing;
  for (const auto& e : edges_) outgoing[e.from].push_back(&e);

  const auto start_edges = outgoing[std::string(kStart)];
  if (start_edges.size() != 1) {
    throw GraphError(Code::InvalidEntry, "START must have exactly one outgoing edge, found " +
                                             std::to_string(start_edges.size()));
  }
  for (const auto& n : nodes_) {
    const auto& out = outgoing[n.id];
    if (out.empty()) {
      throw GraphError(Code::NoPathToEnd, "node '" + n.id + "' has no outgoing edge");
    }
    if (out.size() > 1) {
      throw GraphError(Code::MultipleOutgoing, "node '" + n.id + "' has " +
                                                   std::to_string(out.size()) + " outgoing edges");
    }
  }

  // Forward reachability from START.
  std::set<std::string> reached;
  std::deque<std::string> queue{std::string(kStart)};
  while (!queue.empty()) {
    const std::string id = queue.front();
    queue.pop_front();
    for (const Edge* e : outgoing[id]) {
      for (const auto& to : targets_of(*e)) {
        if (reached.insert(to).second && !is_end(to)) queue.push_back(to);
      }
    }
  }
  for (const auto& n : nodes_) {
    if (!reached.contains(n.id)) {
      throw GraphError(Code::UnreachableNode, "node '" + n.id + "' is unreachable from START");
    }
  }

  // Backward reachability from END.
  std::map<std::string, std::vector<std::string>> incoming;
  for (const auto& e : edges_) {
    for (const auto& to : targets_of(e)) incoming[to].push_back(e.from);
  }
  std::set<std::string> reaches_end{std::string(kEnd)};
  queue.assign({std::string(kEnd)});
  while (!queue.empty()) {
    const std::string id = queue.front();
    queue.pop_front();
    for (const auto& from : incoming[id]) {
      if (reaches_end.insert(from).second) queue.push_back(from);
    }
  }
  for (const auto& n : nodes_) {
    if (!reaches_end.contains(n.id)) {
      throw GraphError(Code::NoPathToEnd, "END is unreachable from node '" + n.id + "'");
    }
  }
  if (!reaches_end.contains(std::string(kStart))) {
    throw GraphError(Code::NoPathToEnd, "END is unreachable from START");
  }

  CompiledGraph compiled;
  for (const auto& n : nodes_) compiled.handlers_.emplace(n.id, n.handler);
  for (const auto& e : edges_) compiled.out_edge_.emplace(e.from, e);
  if (const auto* s = std::get_if<StaticEdge>(&start_edges.front()->kind)) compiled.entry_ = s->to;
  return compiled;
}

// ---------------------------------------------------------------------------
// Running

bool CompiledGraph::has_node(std::string_view id) const { return handlers_.contains(id); }

std::set<std::string> CompiledGraph::successors(std::string_view id) const {
  auto it = out_edge_.find(id);
  if (it == out_edge_.end()) return {};
  const auto targets = targets_of(it->second);
  return {targets.begin(), targets.end()};
}

RunResult CompiledGraph::run(GraphState initial, std::size_t step_limit) const {
  if (step_limit == 0) throw DomainError("step_limit must be at least 1");
  RunResult result{std::move(initial), {}};

  // Resolves the successor of `from`; nullopt means the router threw and the
  // run has been marked failed.
  auto next_of = [&](std::string_view from) -> std::optional<std::string> {
    const Edge& edge = out_edge_.find(from)->second;
    if (const auto* s = std::get_if<StaticEdge>(&edge.kind)) return s->to;
    const auto& c = std::get<ConditionalEdge>(edge.kind);
    std::string target;
    try {
      target = c.router(result.state);
    } catch (...) {
      const auto cause = std::current_exception();
      result.trace.status = Failed{std::string(from), describe(cause), cause};
      return std::nullopt;
    }
    if (!c.allowed_targets.contains(target)) {
      const std::string msg = "router of '" + std::string(from) + "' returned undeclared target '" +
                              target + "'";
      result.trace.status = Failed{std::string(from), msg, nullptr};
      throw GraphRunError(GraphRunError::Code::DisallowedTarget, msg, result);
    }
    return target;
  };

  auto current = next_of(kStart);
  std::size_t steps = 0;
  while (current && !is_end(*current)) {
    if (steps == step_limit) {
      const std::string msg = "step limit of " + std::to_string(step_limit) +
                              " reached before node '" + *current + "'";
      result.trace.status = Failed{*current, msg, nullptr};
      throw GraphRunError(GraphRunError::Code::StepLimitExceeded, msg, result);
    }
    ++steps;

    const Handler& handler = handlers_.find(*current)->second;
    try {
      GraphState next = handler(result.state);
      for (const auto& [key, value] : result.state.metadata) {
        if (!next.metadata.contains(key)) {
          throw Error("handler removed metadata key '" + key + "'");
        }
      }
      result.state = std::move(next);
    } catch (...) {
      const auto cause = std::current_exception();
      result.trace.status = Failed{*current, describe(cause), cause};
      return result;
    }
    result.trace.visits.push_back(Visit{*current, result.state});
    current = next_of(*current);
  }
  return result;
}

// ---------------------------------------------------------------------------
// JSONL

std::string trace_to_jsonl(const ExecutionTrace& trace) {
  std::string out;
  for (const auto& v : trace.visits) {
    out += json{{"node", v.node}, {"state", state_to_json(v.state)}}.dump();
    out += '\n';
  }
  json status;
  if (const auto* f = std::get_if<Failed>(&trace.status)) {
    status = {{"status", "failed"}, {"node", f->node}, {"error", f->error}};
  } else {
    status = {{"status", "completed"}};
  }
  out += status.dump();
  out += '\n';
  return out;
}

ExecutionTrace trace_from_jsonl(std::string_view text) {
  ExecutionTrace trace;
  bool saw_status = false;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (saw_status) throw Error("trace line " + std::to_string(line_no) + " follows the status line");
    try {
      const json j = json::parse(line);
      if (j.contains("status")) {
        saw_status = true;
        const auto status = j.at("status").get<std::string>();
        if (status == "completed") {
          trace.status = Completed{};
        } else if (status == "failed") {
          trace.status = Failed{j.at("node").get<std::string>(), j.at("error").get<std::string>(), nullptr};
        } else {
          throw Error("unknown trace status '" + status + "'");
        }
      } else {
        trace.visits.push_back(Visit{j.at("node").get<std::string>(), state_from_json(j.at("state"))});
      }
    } catch (const json::exception& e) {
      throw Error("malformed trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!saw_status) throw Error("trace has no status line");
  return trace;
}

}  // namespace transagent::graph
