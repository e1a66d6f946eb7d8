#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "fabricbench/errors.hpp"
#include "fabricbench/linkbench.hpp"
#include "fabricbench/log.hpp"
#include "fabricbench/util.hpp"

namespace fabricbench {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

struct AgentState {
  AgentInfo info;
  std::string data_address;
  Socket control;
  std::thread reader;

  std::mutex mutex;
  std::condition_variable cv;
  std::deque<WireMessage> inbox;
  bool dead = false;
  std::string death_reason;
  bool shutting_down = false;
};

void start_reader(AgentState& agent) {
  agent.reader = std::thread([&agent] {
    while (true) {
      WireMessage msg;
      try {
        msg = agent.control.recv_message();
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(agent.mutex);
        if (!agent.shutting_down) {
          agent.dead = true;
          agent.death_reason = e.what();
        }
        agent.cv.notify_all();
        return;
      }
      std::lock_guard<std::mutex> lock(agent.mutex);
      agent.inbox.push_back(std::move(msg));
      agent.cv.notify_all();
    }
  });
}

bool is_dead(AgentState& agent) {
  std::lock_guard<std::mutex> lock(agent.mutex);
  return agent.dead;
}

// Next inbound frame of the expected type, or nullopt on death/timeout.
// RESULT frames arriving while something else is expected belong to a pair
// that was already flagged as timed out; they are dropped. Any other type
// mismatch is a protocol violation and aborts the run naming the agent.
std::optional<WireMessage> wait_frame(AgentState& agent, MsgType expected, Clock::time_point deadline) {
  std::unique_lock<std::mutex> lock(agent.mutex);
  while (true) {
    agent.cv.wait_until(lock, deadline, [&] { return !agent.inbox.empty() || agent.dead; });
    if (agent.inbox.empty()) return std::nullopt;
    WireMessage msg = std::move(agent.inbox.front());
    agent.inbox.pop_front();
    if (msg.type == expected) return msg;
    if (msg.type == MsgType::Result) {
      log_warn("agent " + agent.info.id + ": discarding late RESULT");
      continue;
    }
    throw ProtocolError("agent " + agent.info.id + ": expected " + msg_type_name(expected) +
                        ", got " + msg_type_name(msg.type));
  }
}

bool send_frame(AgentState& agent, MsgType type, std::uint64_t seq, const std::string& payload) {
  try {
    agent.control.send_message(type, seq, payload);
    return true;
  } catch (const std::exception& e) {
    std::lock_guard<std::mutex> lock(agent.mutex);
    agent.dead = true;
    agent.death_reason = e.what();
    return false;
  }
}

std::string plan_payload(const BenchPlan& plan, std::uint64_t round,
                         const std::vector<std::pair<std::string, std::string>>& assignments) {
  json j;
  j["round"] = round;
  j["mode"] = plan.mode;
  j["msg_size"] = plan.msg_size;
  j["repetitions"] = plan.repetitions;
  j["warmup"] = plan.warmup;
  json list = json::array();
  for (const auto& [peer_id, peer_address] : assignments) {
    list.push_back({{"peer_id", peer_id}, {"peer_address", peer_address}});
  }
  j["initiate"] = list;
  return j.dump();
}

struct PairOutcomeMap {
  std::map<std::pair<std::string, std::string>, PairResult> ok;
  std::map<std::pair<std::string, std::string>, std::string> failed;

  void flag(const std::string& a, const std::string& b, const std::string& reason) {
    const auto key = std::make_pair(a, b);
    if (ok.count(key) || failed.count(key)) return;
    failed[key] = reason;
  }
};

// RESULT payloads carry either a full measurement or {"error": ...}.
void ingest_result(PairOutcomeMap& outcomes, AgentState& agent, const std::string& payload) {
  json j;
  try {
    j = json::parse(payload);
  } catch (const json::parse_error&) {
    throw ProtocolError("agent " + agent.info.id + ": malformed RESULT payload");
  }
  const std::string src = j.value("src", std::string());
  const std::string dst = j.value("dst", std::string());
  if (src.empty() || dst.empty()) {
    throw ProtocolError("agent " + agent.info.id + ": RESULT without pair ids");
  }
  if (j.contains("error")) {
    outcomes.flag(src, dst, j["error"].get<std::string>());
    return;
  }
  PairResult r;
  r.src = src;
  r.dst = dst;
  r.median_rtt = j.value("median_rtt_s", 0.0);
  r.bandwidth_gbps = j.value("bandwidth_gbps", 0.0);
  r.bytes_sent = j.value("bytes_sent", 0ULL);
  r.bytes_received = j.value("bytes_received", 0ULL);
  if (j.contains("samples")) {
    for (const auto& s : j["samples"]) r.samples.push_back(s.get<double>());
  }
  outcomes.ok[{src, dst}] = std::move(r);
}

}  // namespace

CoordinatorOutcome run_coordinator(const BenchPlan& plan, const CoordinatorOptions& opts) {
  if (plan.agents.size() < 2) throw ValidationError("plan needs at least 2 agents");

  Listener listener(opts.listen_address);
  log_info("coordinator listening on " + listener.local_address());

  const auto run_start = Clock::now();
  auto elapsed = [&run_start] {
    return std::chrono::duration<double>(Clock::now() - run_start).count();
  };

  // --- Registration: every planned agent must HELLO before the deadline.
  std::vector<std::unique_ptr<AgentState>> agents;
  for (const AgentInfo& info : plan.agents) {
    auto st = std::make_unique<AgentState>();
    st->info = info;
    st->dead = true;  // until registered
    st->death_reason = "registration timeout";
    agents.push_back(std::move(st));
  }
  auto find_agent = [&](const std::string& id) -> AgentState* {
    for (auto& a : agents) {
      if (a->info.id == id) return a.get();
    }
    return nullptr;
  };

  const auto reg_deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                               std::chrono::duration<double>(opts.registration_timeout_s));
  std::size_t registered = 0;
  while (registered < agents.size() && Clock::now() < reg_deadline) {
    const double remain = std::chrono::duration<double>(reg_deadline - Clock::now()).count();
    auto conn = listener.accept_with_timeout(std::max(remain, 0.0));
    if (!conn) continue;
    conn->set_recv_timeout(5.0);
    WireMessage hello;
    try {
      hello = conn->recv_message();
    } catch (const std::exception& e) {
      log_warn(std::string("registration connection dropped: ") + e.what());
      continue;
    }
    if (hello.type != MsgType::Hello) {
      throw ProtocolError(std::string("agent at ") + conn->peer_address() + ": expected HELLO, got " +
                          msg_type_name(hello.type));
    }
    json j;
    std::string id, data_address;
    try {
      j = json::parse(hello.payload);
      id = j.value("id", std::string());
      data_address = j.value("data_address", std::string());
    } catch (const json::parse_error&) {
      throw ProtocolError("agent at " + conn->peer_address() + ": malformed HELLO payload");
    }

    AgentState* slot = nullptr;
    if (!id.empty()) {
      slot = find_agent(id);
    } else {
      for (auto& a : agents) {
        if (a->dead && a->info.address == data_address) slot = a.get();
      }
      if (slot == nullptr) {
        // Unnamed agent on an ephemeral port: first unclaimed wildcard slot.
        for (auto& a : agents) {
          if (a->dead && a->reader.joinable() == false && a->info.address.ends_with(":0")) {
            slot = a.get();
            break;
          }
        }
      }
    }
    if (slot == nullptr || !slot->dead || slot->reader.joinable()) {
      log_warn("rejecting unexpected agent '" + id + "' from " + conn->peer_address());
      continue;
    }
    slot->control = std::move(*conn);
    slot->control.set_recv_timeout(0);
    slot->data_address = data_address.empty() ? slot->info.address : data_address;
    slot->dead = false;
    slot->death_reason.clear();
    start_reader(*slot);
    ++registered;
    log_info("agent " + slot->info.id + " registered (data " + slot->data_address + ")");
  }

  // --- Pair schedule: lexicographic over agent ids, initiator first.
  std::vector<std::string> ids;
  for (const auto& a : agents) ids.push_back(a->info.id);
  std::sort(ids.begin(), ids.end());
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) pairs.emplace_back(ids[i], ids[j]);
  }

  PairOutcomeMap outcomes;
  std::vector<PairInterval> intervals;
  const auto pair_timeout = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(plan.pair_timeout_s));

  auto flag_if_endpoint_dead = [&](const std::string& a, const std::string& b) -> bool {
    for (const std::string& id : {a, b}) {
      AgentState* st = find_agent(id);
      if (st != nullptr && is_dead(*st)) {
        std::lock_guard<std::mutex> lock(st->mutex);
        outcomes.flag(a, b, "agent " + id + " unreachable: " + st->death_reason);
        return true;
      }
    }
    return false;
  };

  if (plan.mode == "serial") {
    std::uint64_t round = 0;
    for (const auto& [a, b] : pairs) {
      ++round;
      PairInterval interval{a, b, elapsed(), 0, false};
      if (!flag_if_endpoint_dead(a, b)) {
        AgentState& initiator = *find_agent(a);
        AgentState& reflector = *find_agent(b);
        const std::string payload =
            plan_payload(plan, round, {{reflector.info.id, reflector.data_address}});
        if (send_frame(initiator, MsgType::Plan, round, payload)) {
          const auto deadline = Clock::now() + pair_timeout;
          if (wait_frame(initiator, MsgType::Hello, deadline)) {
            if (send_frame(initiator, MsgType::Start, round, "")) {
              if (auto result = wait_frame(initiator, MsgType::Result, deadline)) {
                ingest_result(outcomes, initiator, result->payload);
                interval.ok = outcomes.ok.count({a, b}) > 0;
              }
            }
          }
        }
        if (!interval.ok && !flag_if_endpoint_dead(a, b)) {
          outcomes.flag(a, b, "pair timed out after " + format_double(plan.pair_timeout_s) + " s");
        }
      }
      interval.end_s = elapsed();
      intervals.push_back(interval);
    }
  } else {
    const std::uint64_t round = 1;
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> assignments;
    for (const auto& [a, b] : pairs) assignments[a].emplace_back(b, "");
    for (auto& [initiator_id, list] : assignments) {
      for (auto& [peer_id, peer_address] : list) {
        peer_address = find_agent(peer_id)->data_address;
      }
      AgentState* st = find_agent(initiator_id);
      if (!is_dead(*st)) send_frame(*st, MsgType::Plan, round, plan_payload(plan, round, list));
    }
    // Agents without initiator work still take part in the barrier.
    for (const auto& a : agents) {
      if (assignments.count(a->info.id) == 0 && !is_dead(*a)) {
        send_frame(*a, MsgType::Plan, round, plan_payload(plan, round, {}));
      }
    }
    const auto ready_deadline = Clock::now() + pair_timeout;
    for (const auto& a : agents) {
      if (is_dead(*a)) continue;
      wait_frame(*a, MsgType::Hello, ready_deadline);
    }
    const double barrier_at = elapsed();
    for (const auto& a : agents) {
      if (!is_dead(*a)) send_frame(*a, MsgType::Start, round, "");
    }
    const auto result_deadline = Clock::now() + pair_timeout;
    for (const auto& [initiator_id, list] : assignments) {
      AgentState* st = find_agent(initiator_id);
      for (std::size_t k = 0; k < list.size(); ++k) {
        if (is_dead(*st)) break;
        if (auto result = wait_frame(*st, MsgType::Result, result_deadline)) {
          ingest_result(outcomes, *st, result->payload);
        }
      }
    }
    for (const auto& [a, b] : pairs) {
      if (outcomes.ok.count({a, b}) || outcomes.failed.count({a, b})) continue;
      if (!flag_if_endpoint_dead(a, b)) {
        outcomes.flag(a, b, "no result before deadline");
      }
    }
    for (const auto& [a, b] : pairs) {
      const bool ok = outcomes.ok.count({a, b}) > 0;
      intervals.push_back({a, b, barrier_at, elapsed(), ok});
    }
  }

  for (const auto& a : agents) {
    if (is_dead(*a)) continue;
    {
      std::lock_guard<std::mutex> lock(a->mutex);
      a->shutting_down = true;
    }
    send_frame(*a, MsgType::Bye, 0, "");
  }
  for (auto& a : agents) {
    {
      std::lock_guard<std::mutex> lock(a->mutex);
      a->shutting_down = true;
    }
    a->control.close();
    if (a->reader.joinable()) a->reader.join();
  }

  CoordinatorOutcome outcome;
  outcome.matrix.n = static_cast<int>(plan.agents.size());
  outcome.matrix.mode = plan.mode;
  outcome.matrix.msg_size = plan.msg_size;
  for (const auto& [a, b] : pairs) {
    const auto key = std::make_pair(a, b);
    if (auto it = outcomes.ok.find(key); it != outcomes.ok.end()) {
      const PairResult& r = it->second;
      outcome.matrix.entries.push_back({r.src, r.dst, r.bandwidth_gbps, r.median_rtt});
      outcome.results.push_back(r);
    } else {
      outcome.matrix.failed.push_back({a, b, outcomes.failed[key]});
    }
  }
  outcome.intervals = std::move(intervals);
  outcome.partial = !outcome.matrix.failed.empty();
  return outcome;
}

}  // namespace fabricbench
