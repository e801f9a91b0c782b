#include "ropo/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "ropo/model_io.hpp"

namespace ropo {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool is_goal(const TrialConfig& cfg, StateIndex s) {
  return std::find(cfg.goal_states.begin(), cfg.goal_states.end(), s) != cfg.goal_states.end();
}

TrialResult finish(const Pomdp& model, StateIndex start, std::size_t steps, bool declared,
                   bool correct) {
  TrialResult result;
  result.start = start;
  result.steps = steps;
  result.declared = declared;
  result.reward = correct ? std::pow(model.discount(), static_cast<double>(steps)) : 0.0;
  return result;
}

std::pair<StateIndex, ObservationIndex> sample_outcome(const Pomdp& model, StateIndex s,
                                                       ActionIndex a, RandomStream& transitions,
                                                       RandomStream& observations) {
  const StateIndex s_next = sample_index(model.transition_row(a, s), transitions.next());
  std::vector<double> obs(model.num_observations());
  for (ObservationIndex o = 0; o < obs.size(); ++o) obs[o] = model.observation(a, s, s_next, o);
  return {s_next, sample_index(obs, observations.next())};
}

void check_config(const TrialConfig& cfg, const Pomdp& model) {
  if (cfg.max_steps == 0) throw std::invalid_argument("max_steps must be at least 1");
  if (cfg.declare_action >= model.num_actions()) throw std::invalid_argument("declare action out of range");
  for (StateIndex g : cfg.goal_states) {
    if (g >= model.num_states()) throw std::invalid_argument("goal state out of range");
  }
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream)
    : key_(splitmix64(splitmix64(splitmix64(seed) ^ trial) ^ stream)) {}

double RandomStream::next() {
  const std::uint64_t bits = splitmix64(key_ + 0x632be59bd9b4e019ULL * counter_++);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::size_t sample_index(std::span<const double> probs, double u) {
  double cumulative = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last = i;
    if (u < cumulative) return i;
  }
  return last;  // round-off left u above the total
}

StateIndex draw_start(const TrialConfig& cfg, std::size_t num_states, std::uint64_t trial) {
  RandomStream stream(cfg.seed, trial, kStartStream);
  const double u = stream.next();
  if (cfg.initial.empty()) {
    return std::min(num_states - 1, static_cast<std::size_t>(u * static_cast<double>(num_states)));
  }
  if (cfg.initial.size() != num_states) throw std::invalid_argument("initial distribution has the wrong size");
  return sample_index(cfg.initial, u);
}

TrialResult run_trial_m(const Ropomdp& rop, const RegionalValueSets& values,
                        const TrialConfig& cfg, std::uint64_t trial, StateIndex start) {
  const Pomdp& model = rop.base();
  check_config(cfg, model);
  RandomStream transitions(cfg.seed, trial, kTransitionStream);
  RandomStream observations(cfg.seed, trial, kObservationStream);
  Belief b = Belief::point(model.num_states(), start);
  StateIndex s = start;
  for (std::size_t n = 0; n < cfg.max_steps; ++n) {
    const ActionIndex a = approx_action(rop, values, b);
    if (a == cfg.declare_action) return finish(model, start, n, true, is_goal(cfg, s));
    const auto [s_next, o] = sample_outcome(model, s, a, transitions, observations);
    b = belief_update(model, b, a, o);
    s = s_next;
  }
  return finish(model, start, cfg.max_steps, false, false);
}

TrialResult run_trial_m_prime(const Ropomdp& rop, const RegionalValueSets& values,
                              const TrialConfig& cfg, std::uint64_t trial, StateIndex start) {
  const Pomdp& model = rop.base();
  check_config(cfg, model);
  RandomStream transitions(cfg.seed, trial, kTransitionStream);
  RandomStream observations(cfg.seed, trial, kObservationStream);
  // The agent knows the start state, so the first report adds nothing.
  Belief b = Belief::point(model.num_states(), start);
  StateIndex s = start;
  for (std::size_t n = 0; n < cfg.max_steps; ++n) {
    const ActionIndex a = approx_action(rop, values, b);
    if (a == cfg.declare_action) return finish(model, start, n, true, is_goal(cfg, s));
    const auto [s_next, o] = sample_outcome(model, s, a, transitions, observations);
    const RegionalObservation z{o, rop.oracle_region(s_next, o, s, a)};
    b = regional_belief_update(rop, b, a, z);
    s = s_next;
  }
  return finish(model, start, cfg.max_steps, false, false);
}

CampaignStats summarize(const std::vector<TrialResult>& m, const std::vector<TrialResult>& m_prime) {
  if (m.size() != m_prime.size()) throw std::invalid_argument("unpaired trial lists");
  CampaignStats stats;
  stats.trials = m.size();
  if (m.empty()) return stats;
  const double n = static_cast<double>(m.size());
  double sum_m = 0.0;
  double sum_p = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    sum_m += m[i].reward;
    sum_p += m_prime[i].reward;
  }
  stats.mean_m = sum_m / n;
  stats.mean_m_prime = sum_p / n;
  stats.difference = stats.mean_m_prime - stats.mean_m;
  if (m.size() > 1) {
    double ss_m = 0.0;
    double ss_p = 0.0;
    double ss_d = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double dm = m[i].reward - stats.mean_m;
      const double dp = m_prime[i].reward - stats.mean_m_prime;
      ss_m += dm * dm;
      ss_p += dp * dp;
      ss_d += (dp - dm) * (dp - dm);
    }
    stats.se_m = std::sqrt(ss_m / (n - 1.0) / n);
    stats.se_m_prime = std::sqrt(ss_p / (n - 1.0) / n);
    stats.se_difference = std::sqrt(ss_d / (n - 1.0) / n);
  }
  return stats;
}

Campaign run_campaign(const Ropomdp& rop, const RegionalValueSets& values, const TrialConfig& cfg,
                      std::size_t n_trials, std::size_t jobs) {
  if (n_trials == 0) throw std::invalid_argument("a campaign needs at least one trial");
  check_config(cfg, rop.base());
  Campaign campaign;
  campaign.m.resize(n_trials);
  campaign.m_prime.resize(n_trials);
  auto run = [&](std::size_t i) {
    const StateIndex start = draw_start(cfg, rop.base().num_states(), i);
    campaign.m[i] = run_trial_m(rop, values, cfg, i, start);
    campaign.m_prime[i] = run_trial_m_prime(rop, values, cfg, i, start);
  };
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n_trials; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < std::min(jobs, n_trials); ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n_trials; i = next.fetch_add(1)) {
          try {
            run(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(n_trials);
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
  }
  campaign.stats = summarize(campaign.m, campaign.m_prime);
  return campaign;
}

void write_campaign_csv(std::ostream& out, const Campaign& campaign) {
  out << "trial,world,start_state,steps,declared,reward\n";
  auto row = [&](std::size_t i, const char* world, const TrialResult& r) {
    out << i << ',' << world << ',' << r.start << ',' << r.steps << ',' << (r.declared ? 1 : 0)
        << ',' << format_real(r.reward) << '\n';
  };
  for (std::size_t i = 0; i < campaign.m.size(); ++i) {
    row(i, "M", campaign.m[i]);
    row(i, "M'", campaign.m_prime[i]);
  }
  const CampaignStats& s = campaign.stats;
  out << "summary,M," << s.trials << ",,," << format_real(s.mean_m) << '\n';
  out << "summary,M'," << s.trials << ",,," << format_real(s.mean_m_prime) << '\n';
  out << "summary,difference," << s.trials << ",,," << format_real(s.difference) << '\n';
}

}  // namespace ropo
