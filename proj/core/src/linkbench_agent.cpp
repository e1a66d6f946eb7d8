#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fabricbench/errors.hpp"
#include "fabricbench/linkbench.hpp"
#include "fabricbench/log.hpp"

namespace fabricbench {

namespace {

using nlohmann::json;

// Echo service: every PING is answered with a PONG of the same seq/payload.
void reflect_connection(Socket conn) {
  try {
    while (true) {
      const WireMessage msg = conn.recv_message();
      if (msg.type == MsgType::Ping) {
        conn.send_message(MsgType::Pong, msg.seq, msg.payload);
      } else if (msg.type == MsgType::Bye) {
        return;
      } else {
        throw ProtocolError(std::string("reflector: unexpected ") + msg_type_name(msg.type));
      }
    }
  } catch (const ConnectionError&) {
    // peer done
  } catch (const std::exception& e) {
    log_debug(std::string("reflector session ended: ") + e.what());
  }
}

Socket dial_with_retry(const std::string& address, int attempts, double backoff_s) {
  for (int attempt = 1;; ++attempt) {
    try {
      return Socket::connect_to(address);
    } catch (const ConnectionError& e) {
      if (attempt >= attempts) throw;
      log_debug(std::string(e.what()) + "; retrying");
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff_s));
    }
  }
}

struct Assignment {
  std::string peer_id;
  std::string peer_address;
};

struct RoundPlan {
  std::uint64_t round = 0;
  std::uint64_t msg_size = 0;
  int repetitions = 0;
  int warmup = 0;
  std::vector<Assignment> initiate;
};

RoundPlan parse_round_plan(const WireMessage& msg) {
  RoundPlan plan;
  json j;
  try {
    j = json::parse(msg.payload);
  } catch (const json::parse_error&) {
    throw ProtocolError("malformed PLAN payload");
  }
  plan.round = j.value("round", msg.seq);
  plan.msg_size = j.value("msg_size", 0ULL);
  plan.repetitions = j.value("repetitions", 0);
  plan.warmup = j.value("warmup", 0);
  if (j.contains("initiate")) {
    for (const auto& a : j["initiate"]) {
      plan.initiate.push_back({a.value("peer_id", std::string()), a.value("peer_address", std::string())});
    }
  }
  return plan;
}

}  // namespace

int run_agent(const AgentOptions& opts) {
  if (const char* env = std::getenv("FABRICBENCH_SEND_THROTTLE_MBPS")) {
    try {
      set_send_throttle(std::stod(env) * 1e6);
      log_info(std::string("send throttle active: ") + env + " MB/s");
    } catch (const std::exception&) {
      log_warn("ignoring unparsable FABRICBENCH_SEND_THROTTLE_MBPS");
    }
  }

  Listener data_listener(opts.listen_address);
  std::vector<std::thread> reflector_sessions;
  std::mutex sessions_mutex;
  std::thread acceptor([&] {
    while (true) {
      auto conn = data_listener.accept();
      if (!conn) return;  // listener closed
      conn->set_recv_timeout(60.0);  // a stalled peer must not pin shutdown
      std::lock_guard<std::mutex> lock(sessions_mutex);
      reflector_sessions.emplace_back(reflect_connection, std::move(*conn));
    }
  });

  auto shutdown_data_plane = [&] {
    data_listener.close();
    if (acceptor.joinable()) acceptor.join();
    std::lock_guard<std::mutex> lock(sessions_mutex);
    for (std::thread& t : reflector_sessions) {
      if (t.joinable()) t.join();
    }
  };

  Socket control;
  try {
    control = dial_with_retry(opts.coordinator_address, 4, 1.0);
  } catch (const ConnectionError& e) {
    log_error("cannot reach coordinator: " + std::string(e.what()));
    shutdown_data_plane();
    return 2;
  }

  std::mutex control_send_mutex;
  auto send_control = [&](MsgType type, std::uint64_t seq, const std::string& payload) {
    std::lock_guard<std::mutex> lock(control_send_mutex);
    control.send_message(type, seq, payload);
  };

  {
    json hello;
    hello["id"] = opts.id;
    hello["data_address"] = data_listener.local_address();
    send_control(MsgType::Hello, 0, hello.dump());
  }
  if (opts.fail_after == 0) std::_Exit(9);  // fault injection: die right after registering

  std::atomic<int> sessions_completed{0};
  std::atomic<std::uint64_t> started_round{0};
  std::mutex start_mutex;
  std::condition_variable start_cv;
  std::vector<std::thread> workers;

  auto run_round = [&](const RoundPlan& plan) {
    // Dial every peer first so the ready signal means "barrier-ready".
    struct Session {
      Assignment assignment;
      std::optional<Socket> peer;
      std::string dial_error;
    };
    auto sessions = std::make_shared<std::vector<Session>>();
    for (const Assignment& a : plan.initiate) {
      Session s;
      s.assignment = a;
      try {
        s.peer = dial_with_retry(a.peer_address, 4, 0.5);
      } catch (const ConnectionError& e) {
        s.dial_error = e.what();
      }
      sessions->push_back(std::move(s));
    }
    send_control(MsgType::Hello, plan.round, "{\"ready\":true}");

    for (std::size_t i = 0; i < sessions->size(); ++i) {
      workers.emplace_back([&, sessions, plan, i] {
        {
          std::unique_lock<std::mutex> lock(start_mutex);
          start_cv.wait(lock, [&] { return started_round.load() >= plan.round; });
        }
        Session& session = (*sessions)[i];
        json result;
        result["src"] = opts.id;
        result["dst"] = session.assignment.peer_id;
        if (!session.peer) {
          result["error"] = "dial " + session.assignment.peer_address + ": " + session.dial_error;
        } else {
          try {
            PairResult r = pingpong(*session.peer, plan.msg_size, plan.repetitions, plan.warmup);
            result["median_rtt_s"] = r.median_rtt;
            result["bandwidth_gbps"] = r.bandwidth_gbps;
            result["samples"] = r.samples;
            result["bytes_sent"] = r.bytes_sent;
            result["bytes_received"] = r.bytes_received;
            session.peer->send_message(MsgType::Bye, 0, "");
          } catch (const std::exception& e) {
            result["error"] = e.what();
          }
        }
        try {
          send_control(MsgType::Result, plan.round, result.dump());
        } catch (const std::exception& e) {
          log_error(std::string("cannot report result: ") + e.what());
        }
        const int done = sessions_completed.fetch_add(1) + 1;
        if (opts.fail_after > 0 && done >= opts.fail_after) std::_Exit(9);
      });
    }
  };

  int exit_code = 0;
  while (true) {
    WireMessage msg;
    try {
      msg = control.recv_message();
    } catch (const std::exception& e) {
      log_error("control connection lost: " + std::string(e.what()));
      exit_code = 2;
      break;
    }
    if (msg.type == MsgType::Plan) {
      run_round(parse_round_plan(msg));
    } else if (msg.type == MsgType::Start) {
      started_round.store(msg.seq);
      start_cv.notify_all();
    } else if (msg.type == MsgType::Bye) {
      break;
    } else {
      log_error(std::string("unexpected control frame ") + msg_type_name(msg.type));
      exit_code = 2;
      break;
    }
  }

  // Unblock any workers still waiting on a START that will never come.
  started_round.store(~0ULL);
  start_cv.notify_all();
  for (std::thread& w : workers) {
    if (w.joinable()) w.join();
  }
  shutdown_data_plane();
  return exit_code;
}

}  // namespace fabricbench
