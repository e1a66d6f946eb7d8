#include "fabricbench/microbench.hpp"

#include <pthread.h>

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <latch>
#include <memory>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "fabricbench/errors.hpp"
#include "fabricbench/util.hpp"

namespace fabricbench {

namespace {

using Clock = std::chrono::steady_clock;

// Loaded at runtime so the optimizer cannot fold the FMA chains away. The
// multiplier sits just below 1 so accumulators converge instead of overflowing.
volatile double g_fma_mul = 0.999999999;
volatile double g_fma_add = 1e-9;
volatile double g_sink = 0;

bool pin_to_cpu(unsigned cpu) {
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(cpu % std::max(1u, std::thread::hardware_concurrency()), &set);
  return pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0;
}

constexpr int kAccumulators = 16;
constexpr long kChunkIters = 2048;

// One timing window on the calling thread; returns achieved GFlop/s.
double fma_window(double seconds) {
  const double m = g_fma_mul;
  const double a = g_fma_add;
  double acc[kAccumulators];
  for (int k = 0; k < kAccumulators; ++k) acc[k] = 1.0 + k * 1e-3;

  long iters_total = 0;
  const auto t0 = Clock::now();
  auto t1 = t0;
  while (true) {
    for (long i = 0; i < kChunkIters; ++i) {
      for (int k = 0; k < kAccumulators; ++k) acc[k] = acc[k] * m + a;
    }
    iters_total += kChunkIters;
    t1 = Clock::now();
    if (std::chrono::duration<double>(t1 - t0).count() >= seconds) break;
  }
  double sum = 0;
  for (int k = 0; k < kAccumulators; ++k) sum += acc[k];
  g_sink = sum;

  const double elapsed = std::chrono::duration<double>(t1 - t0).count();
  const double flops = 2.0 * kAccumulators * static_cast<double>(iters_total);
  return flops / elapsed / 1e9;
}

double cv_of(const std::vector<double>& values) {
  const double mu = mean_of(values);
  return mu > 0 ? population_stddev(values) / mu : 0.0;
}

void check_timer() {
  // steady_clock must resolve well below the shortest timed window.
  if (static_cast<double>(Clock::period::num) / Clock::period::den > 1e-6) {
    throw ValidationError("steady clock resolution insufficient for benchmarking");
  }
}

}  // namespace

BenchResult fma_peak_bench(const FmaBenchOptions& opts) {
  if (opts.threads < 1) throw ValidationError("fma_peak_bench: threads must be >= 1");
  if (opts.seconds < 0.1) throw ValidationError("fma_peak_bench: seconds must be >= 0.1");
  if (opts.repetitions < 3) throw ValidationError("fma_peak_bench: repetitions must be >= 3");
  check_timer();

  const auto bench_start = Clock::now();
  std::vector<double> rep_gflops;
  std::atomic<bool> all_pinned{true};

  for (int rep = 0; rep < opts.repetitions; ++rep) {
    std::vector<double> per_thread(opts.threads, 0.0);
    std::latch ready(opts.threads + 1);
    std::vector<std::thread> threads;
    threads.reserve(opts.threads);
    for (int t = 0; t < opts.threads; ++t) {
      threads.emplace_back([&, t] {
        if (!pin_to_cpu(static_cast<unsigned>(t))) all_pinned.store(false);
        ready.arrive_and_wait();
        per_thread[t] = fma_window(opts.seconds);
      });
    }
    ready.arrive_and_wait();
    for (std::thread& t : threads) t.join();
    rep_gflops.push_back(std::accumulate(per_thread.begin(), per_thread.end(), 0.0));
  }

  BenchResult result;
  result.name = "fma_peak";
  result.threads = opts.threads;
  result.unit = "GFlop/s";
  result.repetitions = opts.repetitions;
  result.metric_value = *std::max_element(rep_gflops.begin(), rep_gflops.end());
  result.cv = cv_of(rep_gflops);
  result.duration = std::chrono::duration<double>(Clock::now() - bench_start).count();
  result.pinned = all_pinned.load();
  return result;
}

BenchResult fma_peak_bench(int threads, double seconds) {
  FmaBenchOptions opts;
  opts.threads = threads;
  opts.seconds = seconds;
  return fma_peak_bench(opts);
}

BenchResult stream_triad(const TriadOptions& opts) {
  if (opts.threads < 1) throw ValidationError("stream_triad: threads must be >= 1");
  if (opts.repetitions < 5) throw ValidationError("stream_triad: repetitions must be >= 5");
  const std::uint64_t bytes = 3ull * sizeof(double) * opts.array_elems;
  if (bytes <= 4 * opts.cache_bytes) {
    throw ValidationError("stream_triad: array too small for cache criterion (3 arrays must exceed 4x cache)");
  }
  check_timer();

  const std::size_t n = static_cast<std::size_t>(opts.array_elems);
  std::vector<double> a(n), b(n), c(n);

  const int threads = opts.threads;
  std::vector<std::pair<std::size_t, std::size_t>> slices;
  for (int t = 0; t < threads; ++t) {
    slices.emplace_back(n * t / threads, n * (t + 1) / threads);
  }

  // First touch from the workers that will stream each slice.
  {
    std::vector<std::thread> init;
    for (int t = 0; t < threads; ++t) {
      init.emplace_back([&, t] {
        for (std::size_t i = slices[t].first; i < slices[t].second; ++i) {
          a[i] = 0.0;
          b[i] = 1.0;
          c[i] = 2.0;
        }
      });
    }
    for (std::thread& t : init) t.join();
  }

  const double scalar = opts.scalar;
  std::vector<double> sweep_seconds(opts.repetitions, 0.0);
  std::barrier sync(threads + 1);
  std::atomic<bool> all_pinned{true};
  std::vector<std::thread> workers;
  const auto bench_start = Clock::now();

  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      if (!pin_to_cpu(static_cast<unsigned>(t))) all_pinned.store(false);
      for (int rep = 0; rep < opts.repetitions; ++rep) {
        sync.arrive_and_wait();  // sweep start
        for (std::size_t i = slices[t].first; i < slices[t].second; ++i) {
          a[i] = b[i] + scalar * c[i];
        }
        sync.arrive_and_wait();  // sweep end
      }
    });
  }
  for (int rep = 0; rep < opts.repetitions; ++rep) {
    const auto t0 = Clock::now();
    sync.arrive_and_wait();
    sync.arrive_and_wait();
    // Timed from release to the point the slowest worker arrived.
    sweep_seconds[rep] = std::chrono::duration<double>(Clock::now() - t0).count();
  }
  for (std::thread& t : workers) t.join();
  g_sink = a[n / 2];

  std::vector<double> gbps;
  for (double s : sweep_seconds) gbps.push_back(static_cast<double>(bytes) / s / 1e9);

  BenchResult result;
  result.name = "stream_triad";
  result.threads = threads;
  result.unit = "GB/s";
  result.repetitions = opts.repetitions;
  result.metric_value = *std::max_element(gbps.begin(), gbps.end());
  result.cv = cv_of(gbps);
  result.duration = std::chrono::duration<double>(Clock::now() - bench_start).count();
  result.pinned = all_pinned.load();
  return result;
}

BenchResult stream_triad(std::uint64_t array_elems, int threads) {
  TriadOptions opts;
  opts.array_elems = array_elems;
  opts.threads = threads;
  return stream_triad(opts);
}

namespace {

// Builds a single cycle over count slots. Permuted uses Sattolo's algorithm
// (every element is on the one full-length cycle); sequential chains i -> i+1.
std::vector<void*> build_cycle(std::size_t count, ChaseMode mode, std::uint64_t seed) {
  std::vector<void*> buffer(count);
  std::vector<std::size_t> order(count);
  if (mode == ChaseMode::Permuted) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = count - 1; i > 0; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i], order[pick(rng)]);
    }
  } else {
    std::iota(order.begin(), order.end(), 0);
  }
  for (std::size_t i = 0; i + 1 < count; ++i) {
    buffer[order[i]] = &buffer[order[i + 1]];
  }
  buffer[order[count - 1]] = &buffer[order[0]];
  return buffer;
}

double chase_ns_per_load(const std::vector<void*>& buffer, std::size_t loads) {
  void* p = buffer[0];
  // Dependent loads: each iteration needs the previous value.
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < loads; ++i) p = *static_cast<void**>(p);
  const auto t1 = Clock::now();
  g_sink = static_cast<double>(reinterpret_cast<std::uintptr_t>(p) & 0xff);
  return std::chrono::duration<double, std::nano>(t1 - t0).count() / static_cast<double>(loads);
}

}  // namespace

std::vector<LatencyPoint> latency_chase(const LatencyOptions& opts) {
  if (opts.max_buffer < (1u << 20)) {
    throw ValidationError("latency_chase: max_buffer must be >= 1 MiB");
  }
  if (opts.min_buffer < 64) throw ValidationError("latency_chase: min_buffer too small");
  check_timer();

  std::vector<LatencyPoint> points;
  for (std::uint64_t size = opts.min_buffer; size <= opts.max_buffer; size *= 2) {
    const std::size_t count = static_cast<std::size_t>(size / sizeof(void*));
    const std::vector<void*> buffer = build_cycle(count, opts.mode, /*seed=*/size ^ 0x5eedULL);

    // Calibrate the load count so each repetition takes a few milliseconds.
    std::size_t loads = 1 << 15;
    double ns = chase_ns_per_load(buffer, loads);
    const double target_ms = 8.0;
    loads = static_cast<std::size_t>(std::clamp(target_ms * 1e6 / std::max(ns, 0.05),
                                                1e5, 3e7));
    std::vector<double> samples;
    for (int rep = 0; rep < opts.repetitions; ++rep) {
      samples.push_back(chase_ns_per_load(buffer, loads));
    }
    points.push_back({size, median_of(samples)});
  }
  return points;
}

std::vector<LatencyPoint> latency_chase(std::uint64_t max_buffer) {
  LatencyOptions opts;
  opts.max_buffer = max_buffer;
  return latency_chase(opts);
}

}  // namespace fabricbench
