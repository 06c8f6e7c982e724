#include "lmo_optim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "json.hpp"
#include "lmo_optim/flops.hpp"
#include "lmo_optim/rng.hpp"
#include "lmo_optim/theory.hpp"

namespace lmo {

namespace {

using ojson = nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

ojson opt_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

bool all_finite(const std::vector<ParamGroup>& params, std::string& which) {
  for (const auto& p : params) {
    if (!p.grad.all_finite()) {
      which = p.id;
      return false;
    }
  }
  return true;
}

std::optional<double> safe_ratio(double num_, double den) {
  if (!(den > 0.0)) return std::nullopt;
  return num_ / den;
}

double optimizer_step_flops(const std::vector<ParamGroup>& params, const StepReport& rep,
                            const OptimConfig& cfg) {
  double f = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto r = static_cast<std::uint64_t>(params[i].value.rows());
    const auto c = static_cast<std::uint64_t>(params[i].value.cols());
    const double mn = static_cast<double>(r * c);
    switch (rep.branches[i]) {
      case Branch::muon: f += static_cast<double>(flops::ns_flops(r, c, cfg.ns_steps)); break;
      case Branch::lion: f += mn; break;
      case Branch::adamw: f += 10.0 * mn; break;
    }
    if (cfg.branch_mode == BranchMode::adaptive && params[i].kind == ParamKind::matrix2d)
      f += 4.0 * mn * cfg.power_iters + 2.0 * mn;
  }
  return f;
}

std::string branch_label(const StepReport& rep, const std::vector<ParamGroup>& params) {
  bool muon = false, lion = false;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].kind != ParamKind::matrix2d) continue;
    muon |= rep.branches[i] == Branch::muon;
    lion |= rep.branches[i] == Branch::lion;
  }
  if (muon && lion) return "mixed";
  if (muon) return "muon";
  if (lion) return "lion";
  return "adamw";
}

void write_summary(const std::filesystem::path& dir, const RunRecord& rec) {
  const RunSummary& s = rec.summary;
  ojson j;
  j["status"] = rec.ok() ? "ok" : "failed";
  if (rec.failure)
    j["failure"] = {{"step", rec.failure->step}, {"reason", rec.failure->reason}};
  else
    j["failure"] = nullptr;
  j["initial_loss"] = s.initial_loss;
  j["best_loss"] = s.best_loss;
  j["final_loss"] = s.final_loss;
  j["total_flops"] = s.total_flops;
  j["steps_completed"] = s.steps_completed;
  j["muon_steps"] = s.muon_steps;
  j["lion_steps"] = s.lion_steps;
  j["L2_hat"] = {{"median", opt_json(s.L2_hat_median)}, {"max", opt_json(s.L2_hat_max)}};
  j["Linf_hat"] = {{"median", opt_json(s.Linf_hat_median)}, {"max", opt_json(s.Linf_hat_max)}};
  j["final_running_min_metric"] =
      s.running_min_metric.empty() ? ojson(nullptr) : ojson(s.running_min_metric.back());
  j["wall_time_s"] = s.wall_time_s;
  std::ofstream out(dir / "summary.json");
  out << j.dump(2) << "\n";
}

}  // namespace

std::string csv_header() {
  return std::string(kCsvVersionLine) +
         "\nstep,loss,lr_mult,branch,grad_nuc,grad_l1,period_metric,cum_flops,wnorm_inf,"
         "alpha_ratio,rho_nuc_hat,rho_1_hat,L2_hat,Linf_hat\n";
}

std::string csv_line(const RunRow& r) {
  std::string s = std::to_string(r.step);
  for (const std::string& f :
       {num(r.loss), num(r.lr_mult), r.branch, opt_num(r.grad_nuc), num(r.grad_l1),
        opt_num(r.period_metric), num(r.cum_flops), num(r.wnorm_inf), opt_num(r.alpha_ratio),
        opt_num(r.rho_nuc_hat), opt_num(r.rho_1_hat), opt_num(r.L2_hat), opt_num(r.Linf_hat)}) {
    s += ',';
    s += f;
  }
  s += '\n';
  return s;
}

RunRecord run_training(const RunSpec& spec, const RunOptions& options) {
  spec.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const OptimConfig cfg = spec.effective_optimizer();
  const Problem problem(spec.problem);

  RunRecord rec;
  rec.spec = spec;
  std::vector<ParamGroup> params = problem.initial_params();
  OptimState state = init_state(params);

  std::ofstream csv;
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    csv.open(options.out_dir / "run.csv", std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot write " + (options.out_dir / "run.csv").string());
    csv << csv_header() << std::flush;
  }

  const bool periodic = cfg.branch_mode == BranchMode::periodic;
  std::vector<double> window;
  std::optional<double> pending_metric;
  double running_min = INFINITY;
  QuantileSummary l2q, linfq;
  std::vector<Matrix> prev_exact, prev_values;
  double cum_flops = 0.0;
  const double grad_flops = problem.flops_per_grad();

  auto fail = [&](long t, std::string reason) {
    rec.failure = RunFailure{t, std::move(reason)};
  };

  for (long t = 0; t < spec.total_steps; ++t) {
    const double loss = problem.loss_and_grad(params);
    std::string bad;
    if (!std::isfinite(loss)) {
      fail(t, "non-finite loss");
      break;
    }
    if (!all_finite(params, bad)) {
      fail(t, "non-finite gradient in parameter " + bad);
      break;
    }
    if (t == 0) {
      rec.summary.initial_loss = loss;
      rec.summary.best_loss = loss;
    }
    rec.summary.best_loss = std::min(rec.summary.best_loss, loss);

    std::vector<Matrix> exact;
    exact.reserve(params.size());
    for (const auto& p : params) exact.push_back(p.grad);

    for (std::size_t i = 0; i < params.size(); ++i) {
      auto rng = keyed_engine({spec.seed, static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(t)});
      params[i].grad += sample_noise(spec.noise, params[i].grad.rows(), params[i].grad.cols(), rng);
    }
    if (cfg.clip_global_norm) {
      std::vector<Matrix> g;
      for (auto& p : params) g.push_back(std::move(p.grad));
      clip_global(g, *cfg.clip_global_norm);
      for (std::size_t i = 0; i < params.size(); ++i) params[i].grad = std::move(g[i]);
    }

    RunRow row;
    row.step = t;
    row.loss = loss;
    const bool diag = t % spec.diag_interval == 0;
    if (diag) {
      BlockNorms g, dev;
      for (const auto& p : params) {
        if (p.kind != ParamKind::matrix2d) continue;
        g.add(p.grad, true);
        dev.add(p.grad - state.momentum.at(p.id), true);
      }
      if (g.nuclear > 0.0) row.alpha_ratio = g.l1 / g.nuclear;
      const double dev_fro = std::sqrt(dev.fro_sq);
      row.rho_nuc_hat = safe_ratio(dev.nuclear, dev_fro);
      row.rho_1_hat = safe_ratio(dev.l1, dev_fro);
      if (!prev_exact.empty()) {
        BlockNorms dg, dw;
        for (std::size_t i = 0; i < params.size(); ++i) {
          if (params[i].kind != ParamKind::matrix2d) continue;
          dg.add(exact[i] - prev_exact[i], true);
          dw.add(params[i].value - prev_values[i], true);
        }
        row.L2_hat = safe_ratio(dg.nuclear, dw.spectral);
        row.Linf_hat = safe_ratio(dg.l1, dw.inf);
        if (row.L2_hat) l2q.add(*row.L2_hat);
        if (row.Linf_hat) linfq.add(*row.Linf_hat);
      }
    }
    prev_exact = exact;
    prev_values.clear();
    for (const auto& p : params) prev_values.push_back(p.value);

    StepReport rep;
    try {
      rep = step(state, params, cfg);
    } catch (const InvalidArgument& e) {
      fail(t, e.what());
      break;
    }
    row.lr_mult = rep.lr_mult;
    row.branch = branch_label(rep, params);
    if (row.branch == "muon" || row.branch == "mixed") ++rec.summary.muon_steps;
    if (row.branch == "lion" || row.branch == "mixed") ++rec.summary.lion_steps;

    BlockNorms gn;
    const bool need_nuc = diag || row.branch == "muon" || row.branch == "mixed";
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i].kind == ParamKind::matrix2d) gn.add(exact[i], need_nuc);
    row.grad_l1 = gn.l1;
    if (need_nuc) row.grad_nuc = gn.nuclear;

    if (periodic) {
      std::optional<double> completed;
      if (cfg.period.is_infinite()) {
        const double v = gn.l1;
        completed = period_avg_grad_metric_lion(std::span<const double>(&v, 1));
      } else {
        const long P = cfg.period.value();
        if (t % P == 0) window.clear();
        window.push_back(t % P == 0 ? gn.nuclear : gn.l1);
        if (static_cast<long>(window.size()) == P)
          completed = period_avg_grad_metric(window, cfg.eta_muon, cfg.eta_lion, P);
      }
      if (completed) {
        running_min = std::min(running_min, *completed);
        rec.summary.running_min_metric.push_back(running_min);
        pending_metric = completed;
      }
    }

    cum_flops += grad_flops + optimizer_step_flops(params, rep, cfg);
    row.cum_flops = cum_flops;
    for (const auto& p : params)
      if (p.kind == ParamKind::matrix2d)
        row.wnorm_inf = std::max(row.wnorm_inf, matrix_norm(p.value, Norm::inf_elem));

    bool finite_values = true;
    for (const auto& p : params) finite_values &= p.value.all_finite();

    rec.summary.steps_completed = t + 1;
    if (t % spec.eval_interval == 0 || t + 1 == spec.total_steps || !finite_values) {
      row.period_metric = pending_metric;
      pending_metric.reset();
      if (csv.is_open()) csv << csv_line(row) << std::flush;
      if (options.keep_rows) rec.rows.push_back(std::move(row));
    }
    if (!finite_values) {
      fail(t, "non-finite parameter after update");
      break;
    }
    if (!options.quiet && (t + 1) % std::max<long>(1, spec.total_steps / 10) == 0)
      std::cerr << "step " << t + 1 << "/" << spec.total_steps << " loss " << num(loss) << "\n";
  }

  if (rec.ok()) {
    rec.summary.final_loss = problem.loss(params);
    rec.summary.best_loss = std::min(rec.summary.best_loss, rec.summary.final_loss);
  } else {
    rec.summary.final_loss = NAN;
  }
  rec.summary.total_flops = cum_flops;
  rec.summary.L2_hat_median = l2q.median();
  rec.summary.L2_hat_max = l2q.max();
  rec.summary.Linf_hat_median = linfq.median();
  rec.summary.Linf_hat_max = linfq.max();
  rec.summary.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  rec.params = std::move(params);
  if (!options.out_dir.empty()) write_summary(options.out_dir, rec);
  return rec;
}

std::vector<SweepCell> expand_grid(const SweepSpec& spec) {
  const OptimConfig& b = spec.base.optimizer;
  const auto periods = spec.axes.period.empty() ? std::vector<Period>{b.period} : spec.axes.period;
  const auto em = spec.axes.eta_muon.empty() ? std::vector<double>{b.eta_muon} : spec.axes.eta_muon;
  const auto el = spec.axes.eta_lion.empty() ? std::vector<double>{b.eta_lion} : spec.axes.eta_lion;
  const auto aa = spec.axes.adaptive_alpha.empty() ? std::vector<double>{b.adaptive_alpha}
                                                   : spec.axes.adaptive_alpha;
  std::vector<SweepCell> cells;
  for (Period p : periods)
    for (double m : em)
      for (double l : el)
        for (double a : aa) {
          SweepCell c;
          c.index = cells.size();
          c.period = p;
          c.eta_muon = m;
          c.eta_lion = l;
          c.adaptive_alpha = a;
          c.seed = spec.base.seed + c.index;
          cells.push_back(c);
        }
  return cells;
}

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options) {
  spec.validate();
  SweepResult result;
  result.cells = expand_grid(spec);
  std::vector<std::size_t> order(result.cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (options.order == SweepOrder::reverse) std::reverse(order.begin(), order.end());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < order.size(); k = next++) {
      SweepCell& c = result.cells[order[k]];
      RunSpec rs = spec.base;
      rs.optimizer.period = c.period;
      rs.optimizer.eta_muon = c.eta_muon;
      rs.optimizer.eta_lion = c.eta_lion;
      rs.optimizer.adaptive_alpha = c.adaptive_alpha;
      rs.seed = c.seed;
      RunOptions ro;
      ro.keep_rows = false;
      if (!options.out_dir.empty()) {
        char name[32];
        std::snprintf(name, sizeof name, "cell_%04zu", c.index);
        ro.out_dir = options.out_dir / "cells" / name;
      }
      try {
        const RunRecord rec = run_training(rs, ro);
        c.ok = rec.ok();
        if (rec.failure)
          c.error = "step " + std::to_string(rec.failure->step) + ": " + rec.failure->reason;
        c.best_loss = rec.summary.best_loss;
        c.final_loss = rec.summary.final_loss;
        c.total_flops = rec.summary.total_flops;
        c.muon_steps = rec.summary.muon_steps;
        c.steps = rec.summary.steps_completed;
      } catch (const std::exception& e) {
        c.ok = false;
        c.error = e.what();
      }
      if (!options.quiet)
        std::cerr << "cell " << c.index << (c.ok ? " ok" : " failed") << "\n";
    }
  };
  const int n = std::max(1, std::min<int>(spec.threads, static_cast<int>(order.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  result.best = select_best(result.cells);
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    std::ofstream(options.out_dir / "sweep.csv") << sweep_table_csv(result);
    ojson j;
    if (result.best) {
      const SweepCell& c = result.cells[*result.best];
      j["best"] = {{"cell", c.index},
                   {"period", c.period.to_string()},
                   {"eta_muon", c.eta_muon},
                   {"eta_lion", c.eta_lion},
                   {"adaptive_alpha", c.adaptive_alpha},
                   {"best_loss", c.best_loss},
                   {"scale_ratio", c.eta_muon / c.eta_lion}};
    } else {
      j["best"] = nullptr;
    }
    ojson failed = ojson::array();
    for (const auto& c : result.cells)
      if (!c.ok) failed.push_back({{"cell", c.index}, {"error", c.error}});
    j["failed"] = failed;
    std::ofstream(options.out_dir / "sweep_best.json") << j.dump(2) << "\n";
  }
  return result;
}

std::string sweep_table_csv(const SweepResult& result) {
  std::string s =
      "cell,period,eta_muon,eta_lion,adaptive_alpha,seed,status,best_loss,final_loss,total_flops,"
      "muon_steps\n";
  for (const auto& c : result.cells) {
    s += std::to_string(c.index) + "," + c.period.to_string() + "," + num(c.eta_muon) + "," +
         num(c.eta_lion) + "," + num(c.adaptive_alpha) + "," + std::to_string(c.seed) + "," +
         (c.ok ? "ok" : "failed") + ",";
    if (c.ok)
      s += num(c.best_loss) + "," + num(c.final_loss) + "," + num(c.total_flops) + "," +
           std::to_string(c.muon_steps);
    else
      s += ",,,";
    s += "\n";
  }
  return s;
}

std::optional<std::size_t> select_best(std::span<const SweepCell> cells) {
  auto key = [](const SweepCell& c) {
    const double p = c.period.is_infinite() ? INFINITY : static_cast<double>(c.period.value());
    return std::make_tuple(c.best_loss, c.eta_muon, c.eta_lion, p, c.adaptive_alpha, c.index);
  };
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].ok || !std::isfinite(cells[i].best_loss)) continue;
    if (!best || key(cells[i]) < key(cells[*best])) best = i;
  }
  return best;
}

Report report(std::span<const RunRecord> records, std::optional<double> target_loss,
              std::optional<std::array<double, 3>> phi_inputs, int K_NS) {
  if (records.empty()) throw InvalidArgument("report: need at least one record");
  Report out;
  std::map<std::string, Period> period_of;
  for (const auto& r : records) {
    const OptimConfig& o = r.spec.optimizer;
    ReportRow row;
    row.variant = (o.branch_mode == BranchMode::adaptive
                       ? "adaptive alpha=" + num(o.adaptive_alpha)
                       : "P=" + o.period.to_string()) +
                  " eta_M=" + num(o.eta_muon) + " eta_L=" + num(o.eta_lion) +
                  " seed=" + std::to_string(r.spec.seed);
    row.best_loss = r.summary.best_loss;
    row.final_loss = r.summary.final_loss;
    row.total_flops = r.summary.total_flops;
    if (target_loss) {
      for (const auto& x : r.rows) {
        if (x.loss <= *target_loss) {
          row.flops_to_target = x.cum_flops;
          break;
        }
      }
    }
    if (o.branch_mode == BranchMode::periodic) period_of.emplace(row.variant, o.period);
    out.rows.push_back(std::move(row));
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.total_flops, a.best_loss, a.variant) <
           std::tie(b.total_flops, b.best_loss, b.variant);
  });
  const ReportRow* best = nullptr;
  for (const auto& row : out.rows) {
    if (!row.flops_to_target || !period_of.count(row.variant)) continue;
    if (!best || *row.flops_to_target < *best->flops_to_target) best = &row;
  }
  if (best) out.empirical_P_star = period_of.at(best->variant);
  if (phi_inputs) {
    const auto scan =
        theory::scan_optimal_P((*phi_inputs)[0], (*phi_inputs)[1], (*phi_inputs)[2], K_NS, 20);
    out.predicted_P_star = scan.P_star;
    out.predicted_label = theory::to_string(scan.label);
  }
  return out;
}

std::string report_csv(const Report& r) {
  std::string s = "variant,best_loss,final_loss,total_flops,flops_to_target\n";
  for (const auto& row : r.rows)
    s += row.variant + "," + num(row.best_loss) + "," + num(row.final_loss) + "," +
         num(row.total_flops) + "," + opt_num(row.flops_to_target) + "\n";
  s += "# empirical_P_star=" + (r.empirical_P_star ? r.empirical_P_star->to_string() : "") +
       " predicted_P_star=" + (r.predicted_P_star ? std::to_string(*r.predicted_P_star) : "") +
       " predicted_label=" + r.predicted_label + "\n";
  return s;
}

}  // namespace lmo
