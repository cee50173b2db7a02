#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lclab/bits.hpp"
#include "lclab/graph.hpp"
#include "lclab/rng.hpp"

namespace lclab {

struct BandwidthPolicy {
  bool bounded = false;  // false = unbounded message size
  int c = 32;            // budget = c * ceil(log2 declared_n) bits

  static BandwidthPolicy local() { return {}; }
  static BandwidthPolicy congest(int c = 32) { return {true, c}; }
  std::uint64_t budget_bits(std::size_t declared_n) const;
};

enum class NodeStatus : std::uint8_t {
  Active,  // step again next round
  Idle,    // step only when a message arrives
  Done     // never step again
};

// Per-step view of a node. Everything a program may depend on is here: its
// own identity, the declared network size, its random stream and the inbox.
struct Context {
  NodeId node = 0;                  // engine index, stable across runs
  std::uint64_t id = 0;             // assigned identifier
  int degree = 0;
  std::size_t declared_n = 0;
  int round = -1;                   // -1 during init
  Rng* rng = nullptr;
  const std::vector<std::uint64_t>* neighbor_ids = nullptr;  // per port

  const Message* recv(PortId p) const;
  bool has_messages() const;
  void send(PortId p, Message m);
  std::uint64_t neighbor_id(PortId p) const { return (*neighbor_ids)[p]; }

  const std::vector<std::optional<Message>>* inbox = nullptr;
  std::vector<std::pair<PortId, Message>> out;
};

class NodeProgram {
 public:
  virtual ~NodeProgram() = default;
  virtual void init(Context&) {}
  virtual NodeStatus step(Context& ctx) = 0;
};

struct TraceRow {
  int round = -1;
  NodeId src = kNoNode, dst = kNoNode;
  std::uint64_t bits = 0;
};

enum class TraceMode : std::uint8_t { Aggregate, Full };

struct Trace {
  int rounds = 0;        // 1 + last round in which a message was sent
  int steps_rounds = 0;  // synchronous step phases executed
  std::uint64_t messages = 0, total_bits = 0, max_bits = 0;
  TraceRow max_row;
  std::vector<int> done_round;  // per node; -1 = still running at stop
  std::vector<TraceRow> rows;   // TraceMode::Full only
  bool full_rows = false;

  // inline audit against the policy the run was configured with
  bool bounded = false;
  std::uint64_t budget = 0;
  std::vector<TraceRow> violations;  // first few oversized messages
  std::uint64_t violations_total = 0;
};

struct AuditVerdict {
  bool pass = true;
  std::uint64_t budget = 0, max_bits = 0;
  std::uint64_t violations_total = 0;
  std::vector<TraceRow> violations;
  std::string to_string() const;
};

// Re-audits a finished trace. Works from full rows when present; otherwise the
// policy must match the one recorded at run time.
AuditVerdict audit(const Trace& t, const BandwidthPolicy& policy, std::size_t declared_n);

std::string trace_to_csv(const Trace& t);        // needs full rows
std::string trace_summary_json(const Trace& t);  // aggregate stats

// Independent uniform draws over [0, space); collisions are possible and left
// to the caller to detect.
std::vector<std::uint64_t> assign_random_ids(std::size_t n, std::uint64_t space,
                                             std::uint64_t seed);

struct RunOptions {
  BandwidthPolicy policy = BandwidthPolicy::local();
  std::size_t declared_n = 0;  // 0 = actual size
  std::uint64_t seed = 1;
  int max_rounds = 1 << 20;
  TraceMode trace_mode = TraceMode::Aggregate;
  std::uint64_t processing_shuffle = 0;  // 0 = index order within a round
  bool random_ids = true;                // distinct ids from [max(n^3, 2)]
};

// Synchronous round engine: all round-t outboxes are computed from round-(t-1)
// deliveries; processing order within a round cannot affect anything.
class Engine {
 public:
  using Factory = std::function<std::unique_ptr<NodeProgram>(NodeId)>;

  Engine(const Graph& g, RunOptions opts = {});

  bool run(const Factory& make);  // false = stopped by max_rounds

  bool timed_out() const { return timed_out_; }
  const Trace& trace() const { return trace_; }
  const Graph& graph() const { return *g_; }
  std::size_t declared_n() const { return declared_n_; }
  std::uint64_t node_id(NodeId v) const { return ids_[v]; }
  const std::vector<std::uint64_t>& ids() const { return ids_; }

  NodeProgram& program(NodeId v) { return *programs_[v]; }
  template <class T>
  T& program_as(NodeId v) {
    return dynamic_cast<T&>(*programs_[v]);
  }

 private:
  const Graph* g_;
  RunOptions opts_;
  std::size_t declared_n_;
  std::vector<std::uint64_t> ids_;
  std::vector<std::unique_ptr<NodeProgram>> programs_;
  Trace trace_;
  bool timed_out_ = false;
};

}  // namespace lclab
