#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include "fairguide/eval.hpp"
#include "fairguide/metrics.hpp"

namespace fairguide {

namespace {

struct SeedResult {
  double f1 = 0.0, dsp_cd = 0.0;
  std::optional<double> auc, dsp, deo;
};

// Fairness metrics can be undefined on a small test split (an empty group or
// a group with no positives); such seeds mark the metric undefined instead of
// failing the whole report.
template <class Fn>
std::optional<double> try_metric(Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

SeedResult run_one(const Graph& g, const Split& split, std::uint64_t seed,
                   const GcnConfig& gcn_base) {
  GcnConfig cfg = gcn_base;
  cfg.seed = seed;
  GcnOutput out = train_gcn(g, split, cfg);

  std::vector<int> y_test, p_test, s_test;
  std::vector<double> prob_test;
  for (int i : split.test) {
    y_test.push_back(g.labels[static_cast<std::size_t>(i)]);
    p_test.push_back(out.preds[static_cast<std::size_t>(i)]);
    s_test.push_back(g.sensitive[static_cast<std::size_t>(i)]);
    prob_test.push_back(out.prob1[static_cast<std::size_t>(i)]);
  }

  SeedResult r;
  r.f1 = f1_binary(y_test, p_test);
  r.auc = auc_score(y_test, prob_test);
  r.dsp = try_metric([&] { return delta_sp_binary(p_test, s_test); });
  r.deo = try_metric([&] { return delta_eo(p_test, s_test, y_test); });

  std::vector<int> communities = louvain(g, seed);
  r.dsp_cd = delta_sp_multiclass(communities, g.sensitive);
  return r;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  s.mean = mean;
  s.stddev = std::sqrt(var);
  return s;
}

std::string pct(const MetricSummary& m) {
  if (!m.defined) return "na";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f ± %.1f", m.mean * 100.0,
                m.stddev * 100.0);
  return buf;
}

}  // namespace

std::vector<EvalColumn> evaluate(
    const std::vector<std::pair<std::string, const Graph*>>& graphs,
    const EvalOptions& options) {
  if (graphs.empty()) throw ValidationError("evaluate: no graphs given");
  const Graph& base = *graphs.front().second;
  if (!base.has_labels())
    throw ValidationError("evaluate: graphs carry no labels");
  for (const auto& [name, g] : graphs) {
    if (g->num_nodes != base.num_nodes)
      throw ValidationError("evaluate: node count of '" + name +
                            "' does not match");
    if (g->labels != base.labels)
      throw ValidationError("evaluate: labels of '" + name +
                            "' do not match");
    if (g->sensitive != base.sensitive)
      throw ValidationError("evaluate: sensitive attributes of '" + name +
                            "' do not match");
  }

  const std::size_t n_seeds = options.seeds.size();
  const std::size_t n_graphs = graphs.size();
  std::vector<std::vector<SeedResult>> results(
      n_seeds, std::vector<SeedResult>(n_graphs));

  auto run_seed = [&](std::size_t si) {
    std::uint64_t seed = options.seeds[si];
    Split split = make_split(base.labels, seed);
    for (std::size_t gi = 0; gi < n_graphs; ++gi)
      results[si][gi] = run_one(*graphs[gi].second, split, seed, options.gcn);
  };

  int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    for (std::size_t si = 0; si < n_seeds; ++si) run_seed(si);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    for (int t = 0; t < jobs && next < n_seeds; ++t, ++next) {
      // Static round-robin keeps seed work independent of scheduling.
      pool.emplace_back([&, start = next]() {
        for (std::size_t si = start; si < n_seeds;
             si += static_cast<std::size_t>(jobs))
          run_seed(si);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<EvalColumn> columns;
  for (std::size_t gi = 0; gi < n_graphs; ++gi) {
    EvalColumn col;
    col.name = graphs[gi].first;
    std::vector<double> f1s, cds;
    for (std::size_t si = 0; si < n_seeds; ++si) {
      f1s.push_back(results[si][gi].f1);
      cds.push_back(results[si][gi].dsp_cd);
    }
    col.f1 = summarize(f1s);
    col.dsp_cd = summarize(cds);
    auto optional_summary = [&](std::optional<double> SeedResult::* field) {
      std::vector<double> values;
      for (std::size_t si = 0; si < n_seeds; ++si) {
        const auto& v = results[si][gi].*field;
        if (!v) {
          MetricSummary undef;
          undef.defined = false;
          return undef;
        }
        values.push_back(*v);
      }
      return summarize(values);
    };
    col.auc = optional_summary(&SeedResult::auc);
    col.dsp = optional_summary(&SeedResult::dsp);
    col.deo = optional_summary(&SeedResult::deo);
    columns.push_back(std::move(col));
  }
  return columns;
}

void write_report_table(std::ostream& os, const std::vector<EvalColumn>& cols) {
  std::size_t width = 14;
  for (const auto& c : cols) width = std::max(width, c.name.size() + 2);

  auto cell = [&](const std::string& s) {
    std::string out = s;
    while (out.size() < width) out.insert(out.begin(), ' ');
    return out;
  };

  os << cell("metric");
  for (const auto& c : cols) os << cell(c.name);
  os << '\n';
  auto row = [&](const char* label, MetricSummary EvalColumn::* field) {
    os << cell(label);
    for (const auto& c : cols) os << cell(pct(c.*field));
    os << '\n';
  };
  row("f1 (%)", &EvalColumn::f1);
  row("auc (%)", &EvalColumn::auc);
  row("dsp (%)", &EvalColumn::dsp);
  row("deo (%)", &EvalColumn::deo);
  row("dsp_cd (%)", &EvalColumn::dsp_cd);
}

void write_report_kv(std::ostream& os, const std::vector<EvalColumn>& cols) {
  auto emit = [&](const std::string& col, const char* key,
                  const MetricSummary& m) {
    if (!m.defined) {
      os << col << '.' << key << ".mean=na\n" << col << '.' << key << ".std=na\n";
      return;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", m.mean * 100.0);
    os << col << '.' << key << ".mean=" << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.6f", m.stddev * 100.0);
    os << col << '.' << key << ".std=" << buf << '\n';
  };
  for (const auto& c : cols) {
    emit(c.name, "f1", c.f1);
    emit(c.name, "auc", c.auc);
    emit(c.name, "dsp", c.dsp);
    emit(c.name, "deo", c.deo);
    emit(c.name, "dsp_cd", c.dsp_cd);
  }
}

}  // namespace fairguide
