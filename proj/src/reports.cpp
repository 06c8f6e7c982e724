#include <cmath>

#include "json.hpp"
#include "lmo_optim/flops.hpp"
#include "lmo_optim/harness.hpp"
#include "lmo_optim/theory.hpp"

namespace lmo {

namespace {

using ojson = nlohmann::ordered_json;

ojson terms_json(const theory::BoundTerms& b) {
  return {{"initial_gap", b.initial_gap},     {"smoothness", b.smoothness},
          {"noise_momentum", b.noise_momentum}, {"noise_mismatch", b.noise_mismatch},
          {"initial_error", b.initial_error}, {"total", b.total}};
}

}  // namespace

std::string theory_report_json(const TheorySpec& spec) {
  spec.validate();
  const auto& in = spec.inputs;
  const bool wd = spec.variant == theory::SmoothnessVariant::weight_decay;
  const auto opt = theory::optimal_params(in, spec.eps, spec.period, spec.alpha_scale, spec.variant);
  const auto& pc = opt.constants;
  const double emax = theory::eta_max(opt.eta_muon, opt.eta_lion, spec.period);
  const double c2 = theory::c2_factor(spec.period, in.m, in.n);
  const auto terms = wd ? theory::bound_rhs_wd(in, pc, opt.beta2, opt.beta2, opt.T, emax, c2)
                        : theory::bound_rhs(in, pc, opt.beta2, opt.beta2, opt.T, emax);

  const double a = spec.alpha_scale;
  const double rL = spec.rL.value_or(in.Linf / (a * a * in.L2));
  const double rRho = spec.rRho.value_or(in.rho_1 / (a * in.rho_nuc));
  const auto scan = theory::scan_optimal_P(rL, rRho, in.kappa, in.K_NS, spec.P_max);
  const auto scan_approx =
      theory::scan_optimal_P(rL, rRho, in.kappa, in.K_NS, spec.P_max, theory::PhiForm::approx);

  ojson j;
  j["constants"] = {{"period", spec.period.to_string()},
                    {"variant", theory::to_string(spec.variant)},
                    {"eta_bar", pc.eta_bar},
                    {"rho_bar", pc.rho_bar},
                    {"L_bar", pc.L_bar},
                    {"muon_weight", pc.muon_weight},
                    {"lion_weight", pc.lion_weight},
                    {"eta_max", emax},
                    {"C2", c2}};
  j["bound_terms"] = terms_json(terms);
  j["bound_terms"]["eps"] = spec.eps;
  j["bound_terms"]["beta1"] = opt.beta2;
  j["optimal_params"] = {{"beta2", opt.beta2},
                         {"beta1_interval", {opt.beta1_low, opt.beta1_high}},
                         {"eta_lion", opt.eta_lion},
                         {"eta_muon", opt.eta_muon},
                         {"T", opt.T},
                         {"T_initial_gap", opt.T_initial_gap},
                         {"T_initial_error", opt.T_initial_error}};
  ojson table = ojson::array();
  for (long P = 1; P <= spec.P_max; ++P) {
    table.push_back({{"P", P},
                     {"phi_exact", scan.phi[static_cast<std::size_t>(P - 1)]},
                     {"phi_approx", scan_approx.phi[static_cast<std::size_t>(P - 1)]}});
  }
  table.push_back({{"P", "inf"}, {"phi_exact", scan.phi_limit}, {"phi_approx", scan_approx.phi_limit}});
  j["phi_table"] = {{"rL", rL}, {"rRho", rRho}, {"kappa", in.kappa}, {"K_NS", in.K_NS},
                    {"rows", table}};
  j["case_label"] = theory::to_string(scan.label);
  j["P_star"] = scan.P_star;
  j["approx_scan"] = {{"case_label", theory::to_string(scan_approx.label)},
                      {"P_star", scan_approx.P_star}};
  return j.dump(2) + "\n";
}

std::string flops_report_json(const FlopsSpec& spec) {
  spec.validate();
  const auto shape = spec.model_shape();
  const auto& opts = spec.options;
  ojson mats = ojson::array();
  for (const auto& c : flops::optimizer_breakdown(shape, spec.period, spec.ns_steps, opts)) {
    mats.push_back({{"name", c.name},
                    {"rows", c.rows},
                    {"cols", c.cols},
                    {"ns", c.ns},
                    {"sign", c.sign},
                    {"amortized", c.amortized}});
  }
  ojson j;
  j["shape"] = {{"name", shape.name},         {"layers", shape.layers},
                {"dim", shape.dim},           {"seq_len", shape.seq_len},
                {"batch", shape.batch},       {"vocab", shape.vocab},
                {"total_params", shape.total_params},
                {"tokens_per_step", shape.tokens_per_step()}};
  j["options"] = {{"include_embeddings", opts.include_embeddings},
                  {"include_attention", opts.include_attention},
                  {"period", spec.period.to_string()},
                  {"ns_steps", spec.ns_steps}};
  j["train_step_flops"] = flops::train_step_flops(shape, opts);
  j["optimizer_amortized_flops"] =
      flops::optimizer_amortized_flops(shape, spec.period, spec.ns_steps, opts);
  j["ns_share_muon"] = flops::ns_share(shape, spec.ns_steps, opts);
  j["total_flop_reduction"] =
      flops::total_flop_reduction(shape, spec.period, spec.ns_steps, opts);
  j["all_gather_bytes_fp32"] = flops::all_gather_bytes(shape, 4, opts);
  j["matrices"] = mats;
  return j.dump(2) + "\n";
}

}  // namespace lmo
