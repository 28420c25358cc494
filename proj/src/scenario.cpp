#include "verisynth/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "json.hpp"
#include "verisynth/checker.hpp"

namespace verisynth {

namespace {

constexpr double kTol = 1e-9;

double log_binom(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// splitmix64: decorrelates (seed, index) pairs into independent streams.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int thread_count() {
  const char* env = std::getenv("VERISYNTH_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

}  // namespace

double confidence_bound(int K, int L, double nu) {
  if (K < 2) throw ScenarioError("sample count K must be >= 2");
  if (L < 0 || L >= K) throw ScenarioError("violation count L must be in [0, K)");
  if (nu < 0.0 || nu >= 1.0 + 1e-15)
    throw ScenarioError("tolerance nu must lie in [0, 1]");
  nu = std::min(nu, 1.0);

  if (nu == 0.0) return std::min(1.0, static_cast<double>(L + 1));
  const int top = L + 1;
  std::vector<double> logs;
  logs.reserve(top + 1);
  for (int i = 0; i <= top; ++i) {
    if (nu == 1.0) {
      if (i == K) logs.push_back(0.0);  // only the nu^K term survives
      continue;
    }
    logs.push_back(log_binom(K, i) + (K - i) * std::log1p(-nu) +
                   i * std::log(nu));
  }
  if (logs.empty()) return 0.0;
  const double m = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double t : logs) sum += std::exp(t - m);
  const double alpha = (L + 1) * std::exp(m) * sum;
  return std::min(1.0, alpha);
}

std::pair<double, double> bisect_nu(int K, int L, double alpha_target) {
  if (alpha_target <= 0.0 || alpha_target > 1.0)
    throw ScenarioError("confidence target must lie in (0, 1]");
  if (alpha_target == 1.0) return {0.0, 0.0};
  if (confidence_bound(K, L, 1.0) > alpha_target)
    throw ScenarioError("no tolerance in [0, 1] meets this confidence target");
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (confidence_bound(K, L, mid) <= alpha_target)
      hi = mid;
    else
      lo = mid;
  }
  return {lo, hi};
}

void ScenarioConfig::validate() const {
  if (K < 2) throw ScenarioError("sample count K must be >= 2");
  if (nu.has_value() && (*nu < 0.0 || *nu >= 1.0))
    throw ScenarioError("tolerance nu must lie in [0, 1)");
  if (alpha.has_value() && (*alpha <= 0.0 || *alpha > 1.0))
    throw ScenarioError("confidence target must lie in (0, 1]");
  if (max_retries < 1) throw ScenarioError("retry budget must be >= 1");
}

Model sample_instantiation(const Model& m, std::uint64_t seed,
                           std::uint64_t index, int max_retries,
                           const ParamSampler& sampler) {
  std::mt19937_64 rng(mix(seed ^ mix(index)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Model out = m;

  if (m.has_params()) {
    std::vector<double> vals(m.params.size());
    bool ok = false;
    for (int attempt = 0; attempt < max_retries && !ok; ++attempt) {
      for (size_t i = 0; i < m.params.size(); ++i) {
        const auto& [lo, hi] = m.param_ranges[i];
        vals[i] = sampler ? sampler(rng, static_cast<int>(i), lo, hi)
                          : lo + (hi - lo) * unit(rng);
      }
      ok = true;
      for (int s = 0; s < m.num_states && ok; ++s)
        for (const Choice& c : m.choices[s])
          for (const Transition& t : c.transitions)
            if (t.prob.is_affine() && t.prob.eval(vals) <= 1e-12) ok = false;
    }
    if (!ok)
      throw ScenarioError(
          "sampler kept drawing graph-breaking parameter values (retry "
          "budget exhausted)");
    for (auto& choices : out.choices)
      for (Choice& c : choices)
        for (Transition& t : c.transitions)
          if (t.prob.is_affine()) t.prob = ProbEntry::point(t.prob.eval(vals));
    out.params.clear();
    out.param_ranges.clear();
  }

  for (int s = 0; s < m.num_states; ++s) {
    for (size_t ci = 0; ci < m.choices[s].size(); ++ci) {
      Choice& c = out.choices[s][ci];
      std::vector<int> ivals;  // indices of interval entries
      double point_mass = 0.0;
      for (size_t i = 0; i < c.transitions.size(); ++i) {
        if (c.transitions[i].prob.is_interval())
          ivals.push_back(static_cast<int>(i));
        else
          point_mass += c.transitions[i].prob.lo;
      }
      if (ivals.empty()) continue;
      // Draw all but the last interval entry; the last takes the residual
      // so the row sums to one. Resample when the residual escapes.
      const Transition& last = c.transitions[ivals.back()];
      bool ok = false;
      std::vector<double> draw(ivals.size() - 1);
      double residual = 0.0;
      for (int attempt = 0; attempt < max_retries && !ok; ++attempt) {
        double mass = point_mass;
        for (size_t j = 0; j + 1 < ivals.size(); ++j) {
          const ProbEntry& e = c.transitions[ivals[j]].prob;
          draw[j] = e.lo + (e.hi - e.lo) * unit(rng);
          mass += draw[j];
        }
        residual = 1.0 - mass;
        ok = residual >= last.prob.lo - kTol && residual <= last.prob.hi + kTol;
      }
      if (!ok)
        throw ScenarioError(m.state_name(s) +
                            ": interval row kept missing its residual budget "
                            "(retry budget exhausted)");
      for (size_t j = 0; j + 1 < ivals.size(); ++j)
        c.transitions[ivals[j]].prob = ProbEntry::point(draw[j]);
      c.transitions[ivals.back()].prob = ProbEntry::point(
          std::min(std::max(residual, last.prob.lo), last.prob.hi));
    }
  }
  out.validate();
  return out;
}

std::string ScenarioReport::to_json() const {
  nlohmann::json j;
  j["samples"] = K;
  j["sat_count"] = sat_count;
  j["viol_count"] = viol_count;
  if (nu.has_value()) j["nu"] = *nu;
  if (alpha.has_value()) j["alpha"] = *alpha;
  if (nu_star.has_value()) j["nu_star"] = *nu_star;
  nlohmann::json table = nlohmann::json::array();
  for (const auto& [n, a] : alpha_table)
    table.push_back({{"nu", n}, {"alpha", a}});
  j["alpha_table"] = table;
  return j.dump(2);
}

ScenarioReport scenario_verify(const Model& m, const Spec& spec,
                               const ScenarioConfig& cfg) {
  cfg.validate();
  if (spec.kind != Spec::Kind::reach)
    throw ScenarioError("scenario verification handles reachability specs");
  m.validate();

  const int threads = std::min(thread_count(), cfg.K);
  std::vector<int> sat_per_thread(threads, 0);
  std::atomic<int> next{0};
  auto worker = [&](int tid) {
    int local = 0;
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.K) break;
      const Model inst = sample_instantiation(m, cfg.seed, i, cfg.max_retries,
                                              cfg.param_sampler);
      if (check(inst, spec).satisfied) ++local;
    }
    sat_per_thread[tid] = local;
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (std::thread& t : pool) t.join();
  }

  ScenarioReport rep;
  rep.K = cfg.K;
  for (int t : sat_per_thread) rep.sat_count += t;
  rep.viol_count = cfg.K - rep.sat_count;

  const int L = rep.viol_count;
  if (L < cfg.K) {
    if (cfg.nu.has_value()) {
      rep.nu = cfg.nu;
      rep.alpha = confidence_bound(cfg.K, L, *cfg.nu);
    }
    if (cfg.alpha.has_value())
      rep.nu_star = bisect_nu(cfg.K, L, *cfg.alpha).second;
    for (double nu : {0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.5})
      rep.alpha_table.push_back({nu, confidence_bound(cfg.K, L, nu)});
  }
  return rep;
}

}  // namespace verisynth
