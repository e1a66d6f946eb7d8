#include <chrono>
#include <set>

#include <json.hpp>

#include "fabricbench/errors.hpp"
#include "fabricbench/linkbench.hpp"
#include "fabricbench/util.hpp"

namespace fabricbench {

BenchPlan parse_bench_plan(const std::string& json_text, const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("agents") || !doc["agents"].is_array()) {
    throw ValidationError(origin + ": missing top-level 'agents' array");
  }
  BenchPlan plan;
  std::set<std::string> ids;
  for (const auto& a : doc["agents"]) {
    AgentInfo info;
    info.id = a.value("id", std::string());
    info.address = a.value("address", std::string());
    if (info.id.empty()) throw ValidationError(origin + ": agent with empty id");
    if (!ids.insert(info.id).second) throw ValidationError(origin + ": duplicate agent id '" + info.id + "'");
    plan.agents.push_back(std::move(info));
  }
  if (plan.agents.size() < 2) throw ValidationError(origin + ": need at least 2 agents");
  if (doc.contains("msg_size")) {
    if (doc["msg_size"].is_string()) plan.msg_size = parse_size(doc["msg_size"].get<std::string>());
    else plan.msg_size = doc["msg_size"].get<std::uint64_t>();
  }
  plan.repetitions = doc.value("repetitions", 16);
  plan.warmup = doc.value("warmup", 3);
  plan.mode = doc.value("mode", std::string("serial"));
  plan.pair_timeout_s = doc.value("pair_timeout_s", 30.0);
  if (plan.msg_size == 0) throw ValidationError(origin + ": msg_size must be > 0");
  if (plan.repetitions <= plan.warmup) {
    throw ValidationError(origin + ": repetitions must exceed warm-up count");
  }
  if (plan.warmup < 0) throw ValidationError(origin + ": warmup must be >= 0");
  if (plan.mode != "serial" && plan.mode != "parallel") {
    throw ValidationError(origin + ": mode must be serial|parallel");
  }
  return plan;
}

BenchPlan load_bench_plan(const std::string& path) {
  return parse_bench_plan(read_file(path), path);
}

PairResult pingpong(Socket& peer, std::uint64_t msg_size, int repetitions, int warmup) {
  if (msg_size == 0) throw ValidationError("pingpong: msg_size must be > 0");
  if (repetitions <= warmup) throw ValidationError("pingpong: repetitions must exceed warm-up count");

  std::string payload(msg_size, '\0');
  for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(i & 0xff);

  const std::uint64_t sent_before = peer.bytes_sent();
  const std::uint64_t received_before = peer.bytes_received();

  std::vector<double> rtts;
  rtts.reserve(repetitions);
  for (int rep = 0; rep < repetitions; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    peer.send_message(MsgType::Ping, static_cast<std::uint64_t>(rep), payload);
    const WireMessage reply = peer.recv_message();
    const auto t1 = std::chrono::steady_clock::now();
    if (reply.type != MsgType::Pong) {
      throw ProtocolError(std::string("expected PONG, got ") + msg_type_name(reply.type));
    }
    if (reply.seq != static_cast<std::uint64_t>(rep)) {
      throw ProtocolError("seq mismatch: sent " + std::to_string(rep) + ", echoed " +
                          std::to_string(reply.seq));
    }
    if (reply.payload.size() != msg_size) {
      throw ProtocolError("PONG payload length " + std::to_string(reply.payload.size()) +
                          " != " + std::to_string(msg_size));
    }
    rtts.push_back(std::chrono::duration<double>(t1 - t0).count());
  }

  PairResult result;
  result.samples.assign(rtts.begin() + warmup, rtts.end());
  result.median_rtt = median_of(result.samples);
  result.bandwidth_gbps = (static_cast<double>(msg_size) / (result.median_rtt / 2.0)) / 1e9;
  result.bytes_sent = peer.bytes_sent() - sent_before;
  result.bytes_received = peer.bytes_received() - received_before;
  return result;
}

}  // namespace fabricbench
