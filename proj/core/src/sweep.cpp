#include "mmgne/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "mmgne/rng.hpp"

namespace mmgne {

namespace {

MetricStats stats(const std::vector<double>& v) {
  MetricStats s;
  if (v.empty()) {
    s.mean = std::nan("");
    s.std = std::nan("");
    return s;
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

}  // namespace

void SweepConfig::validate() const {
  require(!n_links.empty(), "sweep.n_links must not be empty");
  require(!gamma_db.empty(), "sweep.gamma_db must not be empty");
  require(!schemes.empty(), "sweep.schemes must not be empty");
  require(trials >= 1, "sweep.trials must be >= 1");
  require(jobs >= 1, "jobs must be >= 1");
  for (int n : n_links) require(n >= 1, "sweep.n_links entries must be >= 1");
  for (double g : gamma_db) require(std::isfinite(g), "sweep.gamma_db entries must be finite");
  params.validate();
}

const std::vector<std::string>& sweep_metrics() {
  static const std::vector<std::string> names = {
      "sum_supply_power",         "sum_spectral_efficiency", "outer_rounds",
      "total_power_iterations",   "messages",                "messages_per_outer_round",
      "csi_reports_per_outer_round", "tx_fallbacks"};
  return names;
}

const MetricStats& SweepCell::metric(const std::string& name) const {
  const auto it = metrics.find(name);
  require(it != metrics.end(), "sweep: unknown metric '" + name + "'");
  return it->second;
}

const SweepCell& SweepResult::cell(int n_links, double gamma_db, TxScheme scheme) const {
  for (const auto& c : cells) {
    if (c.n_links == n_links && c.gamma_db == gamma_db && c.scheme == scheme) return c;
  }
  throw InvalidArgument("sweep: no cell for N=" + std::to_string(n_links) + ", gamma_db=" +
                        format_double(gamma_db) + ", scheme=" + to_string(scheme));
}

std::uint64_t trial_seed(std::uint64_t master_seed, int n_links, int trial) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(n_links), static_cast<std::uint64_t>(trial)});
}

TrialMetrics trial_metrics(const RunTrace& trace) {
  TrialMetrics m;
  m.verdict = trace.verdict;
  if (trace.rounds.empty()) return m;
  const auto& last = trace.rounds.back();
  const double rounds = trace.outer_rounds;
  long fallbacks = 0;
  for (const auto& r : trace.rounds) fallbacks += r.tx_fallbacks;
  m.values["sum_supply_power"] = last.sum_supply_power;
  m.values["sum_spectral_efficiency"] = last.sum_spectral_efficiency;
  m.values["outer_rounds"] = rounds;
  m.values["total_power_iterations"] = static_cast<double>(trace.total_power_iterations());
  m.values["messages"] = static_cast<double>(trace.total_messages());
  m.values["messages_per_outer_round"] = static_cast<double>(trace.total_messages()) / rounds;
  m.values["csi_reports_per_outer_round"] = static_cast<double>(trace.total_csi_reports()) / rounds;
  m.values["tx_fallbacks"] = static_cast<double>(fallbacks);
  return m;
}

SweepResult monte_carlo_sweep(const SweepConfig& config) {
  config.validate();
  struct Task {
    int n_links;
    double gamma_db;
    TxScheme scheme;
    int trial;
  };
  std::vector<Task> tasks;
  for (int n : config.n_links) {
    for (double g : config.gamma_db) {
      for (TxScheme s : config.schemes) {
        for (int t = 0; t < config.trials; ++t) tasks.push_back({n, g, s, t});
      }
    }
  }

  std::vector<TrialMetrics> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      try {
        const Task& task = tasks[k];
        InstanceConfig ic = config.base;
        ic.topology.n_links = task.n_links;
        ic.gamma_db = task.gamma_db;
        ic.seed = trial_seed(config.master_seed, task.n_links, task.trial);
        const NetworkInstance inst = build_instance(ic);
        TwoStageParams params = config.params;
        params.solver.seed = derive_seed(ic.seed, {0x6f72646572ULL});
        outcomes[k] = trial_metrics(two_stage(inst, task.scheme, params));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks.size());
      }
    }
  };
  const int jobs = std::min<int>(config.jobs, static_cast<int>(std::max<std::size_t>(1, tasks.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult result;
  result.master_seed = config.master_seed;
  result.trials = config.trials;
  for (std::size_t start = 0; start < tasks.size(); start += static_cast<std::size_t>(config.trials)) {
    const Task& first = tasks[start];
    SweepCell cell;
    cell.n_links = first.n_links;
    cell.gamma_db = first.gamma_db;
    cell.scheme = first.scheme;
    cell.trials = config.trials;
    std::map<std::string, std::vector<double>> samples;
    for (int t = 0; t < config.trials; ++t) {
      const TrialMetrics& m = outcomes[start + static_cast<std::size_t>(t)];
      switch (m.verdict) {
        case Verdict::converged:
          ++cell.converged;
          for (const auto& [name, value] : m.values) samples[name].push_back(value);
          break;
        case Verdict::infeasible: ++cell.infeasible; break;
        case Verdict::iteration_cap: ++cell.capped; break;
      }
    }
    for (const auto& name : sweep_metrics()) cell.metrics[name] = stats(samples[name]);
    result.cells.push_back(std::move(cell));
  }
  return result;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "fit_line: x and y differ in length");
  require(std::set<double>(x.begin(), x.end()).size() >= 2, "fit_line: need at least 2 distinct x values");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (fit.intercept + fit.slope * x[k]);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : (sse == 0.0 ? 1.0 : 0.0);
  return fit;
}

LinearFit fit_iteration_scaling(const SweepResult& sweep, TxScheme scheme) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& c : sweep.cells) {
    if (c.scheme != scheme) continue;
    const double v = c.metric("total_power_iterations").mean;
    if (!std::isfinite(v)) continue;
    x.push_back(c.n_links);
    y.push_back(v);
  }
  require(std::set<double>(x.begin(), x.end()).size() >= 2,
          "fit_iteration_scaling: need converged cells at 2 or more distinct N");
  return fit_line(x, y);
}

LinearFit fit_iteration_scaling(const SweepResult& sweep) {
  require(!sweep.cells.empty(), "fit_iteration_scaling: empty sweep");
  return fit_iteration_scaling(sweep, sweep.cells.front().scheme);
}

std::vector<MessageRatio> message_comparison(const SweepResult& local, const SweepResult& full_csi) {
  const auto axis = [](const SweepResult& s) {
    std::vector<int> ns;
    for (const auto& c : s.cells) {
      if (ns.empty() || ns.back() != c.n_links) ns.push_back(c.n_links);
    }
    return ns;
  };
  const std::vector<int> ns = axis(local);
  require(!ns.empty(), "message_comparison: empty local sweep");
  require(ns == axis(full_csi), "message_comparison: sweeps have different N axes");
  for (const auto& c : full_csi.cells) {
    require(requires_full_csi(c.scheme), "message_comparison: second sweep must use a full-CSI scheme");
  }
  std::vector<MessageRatio> out;
  for (int n : ns) {
    MessageRatio r;
    r.n_links = n;
    std::vector<double> per_round;
    for (const auto& c : local.cells) {
      const double v = c.metric("messages_per_outer_round").mean;
      if (c.n_links == n && std::isfinite(v)) per_round.push_back(v);
    }
    require(!per_round.empty(), "message_comparison: no converged local trials at N=" + std::to_string(n));
    std::vector<double> reports;
    for (const auto& c : full_csi.cells) {
      const double v = c.metric("csi_reports_per_outer_round").mean;
      if (c.n_links == n && std::isfinite(v)) reports.push_back(v);
    }
    require(!reports.empty(), "message_comparison: no converged full-CSI trials at N=" + std::to_string(n));
    r.local_per_round = stats(per_round).mean;
    r.full_per_round = stats(reports).mean;
    r.ratio = r.full_per_round / r.local_per_round;
    out.push_back(r);
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
  os << "n_links,gamma_db,scheme,metric,mean,std,trials,infeasible_frac\n";
  for (const auto& c : sweep.cells) {
    for (const auto& name : sweep_metrics()) {
      const MetricStats& s = c.metric(name);
      os << c.n_links << ',' << format_double(c.gamma_db) << ',' << to_string(c.scheme) << ',' << name << ','
         << format_double(s.mean) << ',' << format_double(s.std) << ',' << c.trials << ','
         << format_double(c.infeasible_frac()) << '\n';
    }
  }
}

}  // namespace mmgne
