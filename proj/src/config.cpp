#include "lmo_optim/config.hpp"

#include <array>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace lmo {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

template <class E, std::size_t N>
E enum_from(const std::string& s, const std::array<E, N>& all, const std::string& what) {
  std::string options;
  for (E e : all) {
    if (to_string(e) == s) return e;
    options += (options.empty() ? "" : ", ") + to_string(e);
  }
  throw ConfigError(what + ": unknown value '" + s + "' (expected one of " + options + ")");
}

constexpr std::array kScales{NsOutputScale::none, NsOutputScale::muon_rms};
constexpr std::array kModes{BranchMode::periodic, BranchMode::adaptive};
constexpr std::array kForms{MomentumForm::ema, MomentumForm::heavy_ball};
constexpr std::array kKinds{ConfigKind::run, ConfigKind::sweep, ConfigKind::theory,
                            ConfigKind::flops};
constexpr std::array kFamilies{ProblemFamily::quadratic_diag, ProblemFamily::logistic,
                               ProblemFamily::mlp2};
constexpr std::array kNoise{NoiseFamily::none, NoiseFamily::gaussian, NoiseFamily::student_t};
constexpr std::array kVariants{theory::SmoothnessVariant::plain,
                               theory::SmoothnessVariant::refined,
                               theory::SmoothnessVariant::weight_decay};

std::string type_name(const json& j) { return j.type_name(); }

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object())
      throw ConfigError(where() + "expected an object, got " + type_name(j));
  }

  bool has(const char* key) const { return j_->contains(key); }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_->find(key);
    if (it == j_->end()) return;
    out = convert<T>(*it, key);
  }

  void get_period(const char* key, Period& out) {
    seen_.insert(key);
    auto it = j_->find(key);
    if (it == j_->end()) return;
    out = to_period(*it, key);
  }

  std::vector<Period> get_periods(const char* key) {
    seen_.insert(key);
    std::vector<Period> out;
    auto it = j_->find(key);
    if (it == j_->end()) return out;
    if (!it->is_array()) throw ConfigError(where(key) + "expected an array");
    for (const auto& v : *it) out.push_back(to_period(v, key));
    return out;
  }

  template <class E, std::size_t N>
  void get_enum(const char* key, E& out, const std::array<E, N>& all) {
    std::string s = to_string(out);
    get(key, s);
    out = enum_from(s, all, path_ + key);
  }

  Section child(const char* key) {
    seen_.insert(key);
    auto it = j_->find(key);
    static const json empty = json::object();
    return Section(it == j_->end() ? empty : *it, path_ + key + ".");
  }

  void finish() const {
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + path_ + it.key() + "'");
    }
  }

 private:
  std::string where(const char* key = nullptr) const {
    const std::string p = key ? path_ + key : path_.substr(0, path_.empty() ? 0 : path_.size() - 1);
    return p.empty() ? std::string("config: ") : "key '" + p + "': ";
  }

  template <class T>
  T convert(const json& v, const char* key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where(key) + "expected a number, got " + type_name(v));
        return v.get<double>();
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer())
          throw ConfigError(where(key) + "expected an integer, got " + type_name(v));
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_unsigned()) return v.get<T>();
          if (v.get<long long>() < 0) throw ConfigError(where(key) + "must be non-negative");
        }
        return v.get<T>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where(key) + "expected a boolean, got " + type_name(v));
        return v.get<bool>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where(key) + "expected a string, got " + type_name(v));
        return v.get<std::string>();
      } else if constexpr (std::is_same_v<T, std::optional<double>>) {
        if (v.is_null()) return std::nullopt;
        return convert<double>(v, key);
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array()) throw ConfigError(where(key) + "expected an array");
        std::vector<double> out;
        for (const auto& e : v) out.push_back(convert<double>(e, key));
        return out;
      }
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + e.what());
    }
  }

  Period to_period(const json& v, const char* key) const {
    try {
      if (v.is_string()) return Period::parse(v.get<std::string>());
      if (v.is_number_integer()) return Period::finite(v.get<long>());
    } catch (const InvalidArgument& e) {
      throw ConfigError(where(key) + e.what());
    }
    throw ConfigError(where(key) + "expected a positive integer or \"inf\"");
  }

  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
void wrap_validation(F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("validation: ") + e.what());
  }
}

void read_problem(Section s, ProblemSpec& p) {
  s.get_enum("family", p.family, kFamilies);
  s.get("rows", p.rows);
  s.get("cols", p.cols);
  s.get("features", p.features);
  s.get("classes", p.classes);
  s.get("hidden", p.hidden);
  s.get("outputs", p.outputs);
  s.get("samples", p.samples);
  s.get("data_seed", p.data_seed);
  s.get("h_min", p.h_min);
  s.get("h_max", p.h_max);
  s.get("target_scale", p.target_scale);
  s.get("target_rank", p.target_rank);
  s.finish();
}

void read_noise(Section s, NoiseSpec& n) {
  s.get_enum("family", n.family, kNoise);
  s.get("scale", n.scale);
  s.get("dof", n.dof);
  s.get("kappa_target", n.kappa_target);
  s.finish();
}

void read_optimizer(Section s, OptimConfig& o) {
  s.get_period("period", o.period);
  s.get("eta_muon", o.eta_muon);
  s.get("eta_lion", o.eta_lion);
  s.get("beta1", o.beta1);
  s.get("beta2", o.beta2);
  s.get("weight_decay", o.weight_decay);
  std::string preset = o.ns_preset.name;
  s.get("ns_preset", preset);
  try {
    o.ns_preset = NsPreset::by_name(preset);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("key 'optimizer.ns_preset': ") + e.what());
  }
  o.ns_steps = o.ns_preset.default_iterations;
  s.get("ns_steps", o.ns_steps);
  s.get_enum("ns_output_scale", o.ns_output_scale, kScales);
  s.get("clip_global_norm", o.clip_global_norm);
  {
    Section sch = s.child("schedule");
    sch.get("warmup_steps", o.schedule.warmup_steps);
    sch.get("floor_fraction", o.schedule.floor_fraction);
    sch.finish();
  }
  s.get_enum("branch_mode", o.branch_mode, kModes);
  s.get("adaptive_alpha", o.adaptive_alpha);
  s.get("power_iters", o.power_iters);
  s.get_enum("momentum_form", o.momentum_form, kForms);
  {
    Section a = s.child("adamw");
    a.get("lr", o.adamw.lr);
    a.get("beta1", o.adamw.beta1);
    a.get("beta2", o.adamw.beta2);
    a.get("eps", o.adamw.eps);
    a.get("weight_decay", o.adamw.weight_decay);
    a.finish();
  }
  s.finish();
}

void read_theory(Section s, TheorySpec& t) {
  auto& in = t.inputs;
  s.get("L2", in.L2);
  s.get("Linf", in.Linf);
  s.get("rho_nuc", in.rho_nuc);
  s.get("rho_1", in.rho_1);
  s.get("sigma", in.sigma);
  s.get("kappa", in.kappa);
  s.get("delta0", in.delta0);
  s.get("e0_l1", in.e0_l1);
  s.get("m", in.m);
  s.get("n", in.n);
  s.get("K_NS", in.K_NS);
  s.get("eps", t.eps);
  s.get_period("period", t.period);
  s.get("alpha_scale", t.alpha_scale);
  s.get_enum("variant", t.variant, kVariants);
  s.get("P_max", t.P_max);
  s.get("rL", t.rL);
  s.get("rRho", t.rRho);
  s.finish();
}

void read_flops(Section s, FlopsSpec& f) {
  s.get("shape", f.shape);
  s.get("layers", f.layers);
  s.get("dim", f.dim);
  s.get("seq_len", f.seq_len);
  s.get("batch", f.batch);
  s.get("vocab", f.vocab);
  s.get_period("period", f.period);
  s.get("ns_steps", f.ns_steps);
  s.get("include_embeddings", f.options.include_embeddings);
  s.get("include_attention", f.options.include_attention);
  s.finish();
}

ConfigDoc read_doc(const json& root) {
  Section top(root, "");
  ConfigDoc doc;
  top.get_enum("kind", doc.kind, kKinds);
  switch (doc.kind) {
    case ConfigKind::run:
    case ConfigKind::sweep: {
      RunSpec& r = doc.run;
      read_problem(top.child("problem"), r.problem);
      read_noise(top.child("noise"), r.noise);
      read_optimizer(top.child("optimizer"), r.optimizer);
      top.get("total_steps", r.total_steps);
      top.get("eval_interval", r.eval_interval);
      top.get("diag_interval", r.diag_interval);
      top.get("seed", r.seed);
      top.get("output_path", r.output_path);
      r.optimizer.schedule.total_steps = r.total_steps;
      r.optimizer.base_seed = r.seed;
      if (doc.kind == ConfigKind::sweep) {
        Section sw = top.child("sweep");
        doc.axes.period = sw.get_periods("period");
        sw.get("eta_muon", doc.axes.eta_muon);
        sw.get("eta_lion", doc.axes.eta_lion);
        sw.get("adaptive_alpha", doc.axes.adaptive_alpha);
        sw.get("threads", doc.threads);
        sw.finish();
        wrap_validation([&] { doc.sweep().validate(); });
      } else {
        wrap_validation([&] { r.validate(); });
      }
      break;
    }
    case ConfigKind::theory:
      read_theory(top.child("theory"), doc.theory);
      wrap_validation([&] { doc.theory.validate(); });
      break;
    case ConfigKind::flops:
      read_flops(top.child("flops"), doc.flops);
      wrap_validation([&] { doc.flops.validate(); });
      break;
  }
  top.finish();
  return doc;
}

ojson period_json(Period p) {
  if (p.is_infinite()) return "inf";
  return p.value();
}

ojson optional_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

ojson doc_json(const ConfigDoc& doc) {
  ojson j;
  j["kind"] = to_string(doc.kind);
  if (doc.kind == ConfigKind::run || doc.kind == ConfigKind::sweep) {
    const RunSpec& r = doc.run;
    const ProblemSpec& p = r.problem;
    j["problem"] = {{"family", to_string(p.family)},
                    {"rows", p.rows},
                    {"cols", p.cols},
                    {"features", p.features},
                    {"classes", p.classes},
                    {"hidden", p.hidden},
                    {"outputs", p.outputs},
                    {"samples", p.samples},
                    {"data_seed", p.data_seed},
                    {"h_min", p.h_min},
                    {"h_max", p.h_max},
                    {"target_scale", p.target_scale},
                    {"target_rank", p.target_rank}};
    j["noise"] = {{"family", to_string(r.noise.family)},
                  {"scale", r.noise.scale},
                  {"dof", r.noise.dof},
                  {"kappa_target", r.noise.kappa_target}};
    const OptimConfig& o = r.optimizer;
    j["optimizer"] = {
        {"period", period_json(o.period)},
        {"eta_muon", o.eta_muon},
        {"eta_lion", o.eta_lion},
        {"beta1", o.beta1},
        {"beta2", o.beta2},
        {"weight_decay", o.weight_decay},
        {"ns_preset", o.ns_preset.name},
        {"ns_steps", o.ns_steps},
        {"ns_output_scale", to_string(o.ns_output_scale)},
        {"clip_global_norm", optional_json(o.clip_global_norm)},
        {"schedule",
         {{"warmup_steps", o.schedule.warmup_steps},
          {"floor_fraction", o.schedule.floor_fraction}}},
        {"branch_mode", to_string(o.branch_mode)},
        {"adaptive_alpha", o.adaptive_alpha},
        {"power_iters", o.power_iters},
        {"momentum_form", to_string(o.momentum_form)},
        {"adamw",
         {{"lr", o.adamw.lr},
          {"beta1", o.adamw.beta1},
          {"beta2", o.adamw.beta2},
          {"eps", o.adamw.eps},
          {"weight_decay", o.adamw.weight_decay}}}};
    j["total_steps"] = r.total_steps;
    j["eval_interval"] = r.eval_interval;
    j["diag_interval"] = r.diag_interval;
    j["seed"] = r.seed;
    j["output_path"] = r.output_path;
    if (doc.kind == ConfigKind::sweep) {
      ojson periods = ojson::array();
      for (Period p : doc.axes.period) periods.push_back(period_json(p));
      j["sweep"] = {{"period", periods},
                    {"eta_muon", doc.axes.eta_muon},
                    {"eta_lion", doc.axes.eta_lion},
                    {"adaptive_alpha", doc.axes.adaptive_alpha},
                    {"threads", doc.threads}};
    }
  } else if (doc.kind == ConfigKind::theory) {
    const TheorySpec& t = doc.theory;
    const auto& in = t.inputs;
    j["theory"] = {{"L2", in.L2},
                   {"Linf", in.Linf},
                   {"rho_nuc", in.rho_nuc},
                   {"rho_1", in.rho_1},
                   {"sigma", in.sigma},
                   {"kappa", in.kappa},
                   {"delta0", in.delta0},
                   {"e0_l1", in.e0_l1},
                   {"m", in.m},
                   {"n", in.n},
                   {"K_NS", in.K_NS},
                   {"eps", t.eps},
                   {"period", period_json(t.period)},
                   {"alpha_scale", t.alpha_scale},
                   {"variant", to_string(t.variant)},
                   {"P_max", t.P_max},
                   {"rL", optional_json(t.rL)},
                   {"rRho", optional_json(t.rRho)}};
  } else {
    const FlopsSpec& f = doc.flops;
    j["flops"] = {{"shape", f.shape},
                  {"layers", f.layers},
                  {"dim", f.dim},
                  {"seq_len", f.seq_len},
                  {"batch", f.batch},
                  {"vocab", f.vocab},
                  {"period", period_json(f.period)},
                  {"ns_steps", f.ns_steps},
                  {"include_embeddings", f.options.include_embeddings},
                  {"include_attention", f.options.include_attention}};
  }
  return j;
}

}  // namespace

std::string to_string(ConfigKind k) {
  switch (k) {
    case ConfigKind::run: return "run";
    case ConfigKind::sweep: return "sweep";
    case ConfigKind::theory: return "theory";
    case ConfigKind::flops: return "flops";
  }
  return "?";
}

void RunSpec::validate() const {
  problem.validate();
  noise.validate();
  if (total_steps < 1) throw InvalidArgument("total_steps must be >= 1");
  if (eval_interval < 1 || eval_interval > total_steps)
    throw InvalidArgument("eval_interval must lie in [1, total_steps]");
  if (diag_interval < 1) throw InvalidArgument("diag_interval must be >= 1");
  const OptimConfig o = effective_optimizer();
  o.validate();
  if (o.branch_mode == BranchMode::periodic && !o.period.is_infinite() &&
      total_steps % o.period.value() != 0) {
    throw InvalidArgument("total_steps (" + std::to_string(total_steps) +
                          ") must be divisible by period P = " + o.period.to_string());
  }
}

OptimConfig RunSpec::effective_optimizer() const {
  OptimConfig o = optimizer;
  o.schedule.total_steps = total_steps;
  o.base_seed = seed;
  return o;
}

void SweepSpec::validate() const {
  base.validate();
  if (threads < 1) throw InvalidArgument("sweep.threads must be >= 1");
  for (double v : axes.eta_muon)
    if (!(v > 0.0)) throw InvalidArgument("sweep.eta_muon entries must be > 0");
  for (double v : axes.eta_lion)
    if (!(v > 0.0)) throw InvalidArgument("sweep.eta_lion entries must be > 0");
  for (double v : axes.adaptive_alpha)
    if (!(v > 0.0 && v <= 1.0)) throw InvalidArgument("sweep.adaptive_alpha entries must lie in (0, 1]");
}

void TheorySpec::validate() const {
  inputs.validate();
  if (!(eps > 0.0)) throw InvalidArgument("theory.eps must be > 0");
  if (!(alpha_scale > 0.0)) throw InvalidArgument("theory.alpha_scale must be > 0");
  if (variant == theory::SmoothnessVariant::refined)
    throw InvalidArgument("theory.variant must be plain or weight_decay");
  if (P_max < 2) throw InvalidArgument("theory.P_max must be >= 2");
  if (rL && !(*rL > 0.0)) throw InvalidArgument("theory.rL must be > 0");
  if (rRho && !(*rRho > 0.0)) throw InvalidArgument("theory.rRho must be > 0");
}

flops::ModelShape FlopsSpec::model_shape() const {
  if (shape == "custom") return flops::transformer_shape("custom", layers, dim, seq_len, batch, vocab);
  return flops::shape_by_name(shape);
}

void FlopsSpec::validate() const {
  if (ns_steps < 1) throw InvalidArgument("flops.ns_steps must be >= 1");
  model_shape().validate();
}

ConfigDoc parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
  return read_doc(root);
}

ConfigDoc parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ConfigDoc& doc) { return doc_json(doc).dump(2) + "\n"; }

std::string config_reference() {
  static const std::map<std::string, std::string> notes = {
      {"kind", "run | sweep | theory | flops"},
      {"problem.family", "quadratic_diag | logistic | mlp2"},
      {"problem.rows", "quadratic parameter rows (>= 1)"},
      {"problem.cols", "quadratic parameter cols (>= 1)"},
      {"problem.features", "input dimension (logistic, mlp2)"},
      {"problem.classes", "number of classes (logistic, >= 2)"},
      {"problem.hidden", "hidden width (mlp2)"},
      {"problem.outputs", "regression outputs (mlp2)"},
      {"problem.samples", "dataset size (logistic, mlp2)"},
      {"problem.data_seed", "seed of the dataset, curvature and initial weights"},
      {"problem.h_min", "curvature drawn log-uniform in [h_min, h_max], h_min > 0"},
      {"problem.h_max", "upper end of the curvature range"},
      {"problem.target_scale", "scale of the quadratic minimizer W*"},
      {"problem.target_rank", "rank of W* (0 = dense Gaussian)"},
      {"noise.family", "none | gaussian | student_t"},
      {"noise.scale", "noise scale (>= 0)"},
      {"noise.dof", "student_t degrees of freedom (> 1 and > kappa_target)"},
      {"noise.kappa_target", "moment order in (1, 2]"},
      {"optimizer.period", "positive integer or \"inf\"; total_steps must be a multiple"},
      {"optimizer.eta_muon", "spectral-step learning rate (> 0)"},
      {"optimizer.eta_lion", "sign-step learning rate (> 0)"},
      {"optimizer.beta1", "interpolation coefficient in [0, 1)"},
      {"optimizer.beta2", "momentum coefficient in [0, 1)"},
      {"optimizer.weight_decay", "decoupled decay (>= 0)"},
      {"optimizer.ns_preset", "muon-quintic | cubic-exact"},
      {"optimizer.ns_steps", "Newton-Schulz iterations (defaults to the preset's count)"},
      {"optimizer.ns_output_scale", "none | muon_rms (0.2*sqrt(max(m,n)) on spectral steps)"},
      {"optimizer.clip_global_norm", "null or max joint gradient norm (> 0)"},
      {"optimizer.schedule.warmup_steps", "linear warmup length (< total_steps)"},
      {"optimizer.schedule.floor_fraction", "cosine floor in [0, 1]; 1 = constant"},
      {"optimizer.branch_mode", "periodic | adaptive"},
      {"optimizer.adaptive_alpha", "stable-rank threshold in (0, 1]"},
      {"optimizer.power_iters", "power iterations for the stable rank (>= 1)"},
      {"optimizer.momentum_form", "ema | heavy_ball"},
      {"optimizer.adamw.lr", "fixed learning rate for 1D parameters"},
      {"optimizer.adamw.beta1", "AdamW first-moment coefficient"},
      {"optimizer.adamw.beta2", "AdamW second-moment coefficient"},
      {"optimizer.adamw.eps", "AdamW denominator epsilon"},
      {"optimizer.adamw.weight_decay", "AdamW decoupled decay"},
      {"total_steps", "number of optimizer steps (>= 1)"},
      {"eval_interval", "CSV row every this many steps, in [1, total_steps]"},
      {"diag_interval", "constant estimates every this many steps"},
      {"seed", "gradient-noise seed; overridden by --seed"},
      {"output_path", "output directory; overridden by --out"},
      {"sweep.period", "grid over the period (empty = base value)"},
      {"sweep.eta_muon", "grid over eta_muon"},
      {"sweep.eta_lion", "grid over eta_lion"},
      {"sweep.adaptive_alpha", "grid over adaptive_alpha"},
      {"sweep.threads", "worker threads (results do not depend on it)"},
      {"theory.L2", "spectral smoothness constant"},
      {"theory.Linf", "element-wise smoothness constant, L2 <= Linf <= m*n*L2"},
      {"theory.rho_nuc", "nuclear noise ratio"},
      {"theory.rho_1", "l1 noise ratio"},
      {"theory.sigma", "noise moment scale (>= 0)"},
      {"theory.kappa", "moment order in (1, 2]"},
      {"theory.delta0", "initial suboptimality f(W0) - f*"},
      {"theory.e0_l1", "initial momentum error in l1"},
      {"theory.m", "matrix rows"},
      {"theory.n", "matrix cols"},
      {"theory.K_NS", "Newton-Schulz iterations in the cost model"},
      {"theory.eps", "target accuracy (> 0)"},
      {"theory.period", "period for constants and optimal parameters"},
      {"theory.alpha_scale", "eta_muon / eta_lion"},
      {"theory.variant", "plain | weight_decay"},
      {"theory.P_max", "upper end of the phi scan (>= 2)"},
      {"theory.rL", "null or measured Linf/(alpha^2 L2)"},
      {"theory.rRho", "null or measured rho_1/(alpha rho_nuc)"},
      {"flops.shape", "124M | 355M | 720M | custom"},
      {"flops.layers", "custom shape: transformer blocks"},
      {"flops.dim", "custom shape: model width"},
      {"flops.seq_len", "custom shape: sequence length"},
      {"flops.batch", "custom shape: sequences per step"},
      {"flops.vocab", "custom shape: vocabulary size"},
      {"flops.period", "period for the amortized optimizer cost"},
      {"flops.ns_steps", "Newton-Schulz iterations"},
      {"flops.include_embeddings", "embeddings take the orthogonalized update"},
      {"flops.include_attention", "count the 12*L*B*S^2*d attention term"},
  };

  std::string out =
      "# Configuration reference\n\n"
      "Generated by `lmo-optim config-reference`. Every key is optional; absent keys take the\n"
      "default shown. Unknown keys are rejected.\n";
  for (ConfigKind kind : kKinds) {
    ConfigDoc doc;
    doc.kind = kind;
    out += "\n## kind = " + to_string(kind) + "\n\n| key | default | meaning |\n|---|---|---|\n";
    std::function<void(const ojson&, const std::string&)> walk = [&](const ojson& j,
                                                                      const std::string& prefix) {
      for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix + it.key();
        if (it->is_object()) {
          walk(*it, key + ".");
          continue;
        }
        auto note = notes.find(key);
        out += "| `" + key + "` | `" + it->dump() + "` | " +
               (note == notes.end() ? "" : note->second) + " |\n";
      }
    };
    walk(doc_json(doc), "");
  }
  return out;
}

}  // namespace lmo
