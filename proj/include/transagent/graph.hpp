#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "transagent/error.hpp"

namespace transagent::graph {

inline constexpr std::string_view kStart = "__start__";
inline constexpr std::string_view kEnd = "__end__";
inline constexpr std::size_t kDefaultStepLimit = 100;

/// Shared run state. Metadata keys are only ever added or overwritten.
struct GraphState {
  std::string input_text;
  std::optional<std::string> detected_language;
  std::optional<std::string> intent;
  std::optional<std::string> output_text;
  std::map<std::string, std::string> metadata;

  bool operator==(const GraphState&) const = default;
};

using Handler = std::function<GraphState(GraphState)>;
using Router = std::function<std::string(const GraphState&)>;

struct Node {
  std::string id;
  Handler handler;
};

struct StaticEdge {
  std::string to;
};

struct ConditionalEdge {
  Router router;
  std::set<std::string> allowed_targets;
};

struct Edge {
  std::string from;
  std::variant<StaticEdge, ConditionalEdge> kind;
};

class GraphError : public Error {
 public:
  enum class Code {
    DuplicateNode,
    DanglingEdge,
    UnreachableNode,
    NoPathToEnd,
    StaticCycle,
    InvalidEntry,      // START needs exactly one outgoing edge
    MultipleOutgoing,  // a node with more than one outgoing edge
  };

  GraphError(Code code, const std::string& what) : Error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

std::string_view to_string(GraphError::Code code);

struct Visit {
  std::string node;
  GraphState state;  // snapshot after the node ran

  bool operator==(const Visit&) const = default;
};

struct Completed {
  bool operator==(const Completed&) const = default;
};

struct Failed {
  std::string node;
  std::string error;
  /// The original exception for handler failures; empty for runtime errors
  /// and for traces read back from JSON.
  std::exception_ptr cause;

  bool operator==(const Failed& o) const { return node == o.node && error == o.error; }
};

struct ExecutionTrace {
  std::vector<Visit> visits;
  std::variant<Completed, Failed> status = Completed{};

  bool completed() const { return std::holds_alternative<Completed>(status); }
  std::vector<std::string> node_order() const;

  bool operator==(const ExecutionTrace&) const = default;
};

struct RunResult {
  GraphState state;
  ExecutionTrace trace;
};

/// Raised by run() for step-limit and disallowed-route failures; carries the
/// partial trace.
class GraphRunError : public Error {
 public:
  enum class Code { StepLimitExceeded, DisallowedTarget };

  GraphRunError(Code code, const std::string& what, RunResult partial)
      : Error(what), code_(code), partial_(std::move(partial)) {}

  Code code() const noexcept { return code_; }
  const RunResult& partial() const noexcept { return partial_; }

 private:
  Code code_;
  RunResult partial_;
};

class CompiledGraph;

/// Mutable graph builder.
class StateGraph {
 public:
  /// Throws GraphError(DuplicateNode) when `id` is taken or reserved.
  StateGraph& add_node(std::string id, Handler handler);
  StateGraph& add_edge(std::string from, std::string to);
  StateGraph& add_conditional_edge(std::string from, Router router,
                                   std::set<std::string> allowed_targets);
  StateGraph& add_edge(Edge edge);

  /// Validates topology; every structural error surfaces here.
  CompiledGraph compile() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
};

/// Immutable, validated graph. Safe to share between concurrent runs.
class CompiledGraph {
 public:
  /// Walks from START's successor until END. Handler exceptions end the run
  /// with a Failed status; step-limit and disallowed routes throw GraphRunError.
  RunResult run(GraphState initial, std::size_t step_limit = kDefaultStepLimit) const;

  const std::string& entry() const noexcept { return entry_; }
  bool has_node(std::string_view id) const;
  /// Possible successors of `id` (END included).
  std::set<std::string> successors(std::string_view id) const;

 private:
  friend class StateGraph;
  CompiledGraph() = default;

  std::map<std::string, Handler, std::less<>> handlers_;
  std::map<std::string, Edge, std::less<>> out_edge_;
  std::string entry_;
};

/// One {"node", "state"} object per visit, then a {"status", ...} line.
std::string trace_to_jsonl(const ExecutionTrace& trace);
ExecutionTrace trace_from_jsonl(std::string_view text);

}  // namespace transagent::graph
