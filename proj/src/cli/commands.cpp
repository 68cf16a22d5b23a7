#include <cinttypes>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include "stochavg/cli.hpp"
#include "stochavg/error.hpp"
#include "stochavg/rng.hpp"

namespace stochavg::cli {

namespace fs = std::filesystem;

const char* to_string(Status s) {
  switch (s) {
    case Status::Satisfied: return "satisfied";
    case Status::Violated: return "violated";
    case Status::Undecidable: return "undecidable";
  }
  return "?";
}

Status TheoremCheck::status() const {
  Status out = Status::Satisfied;
  for (const auto& h : items) {
    if (h.status == Status::Violated) return Status::Violated;
    if (h.status == Status::Undecidable) out = Status::Undecidable;
  }
  return out;
}

int CheckReport::exit_code() const {
  bool undecidable = false;
  for (const auto& t : theorems) {
    if (t.status() == Status::Satisfied) return kOk;
    if (t.status() == Status::Undecidable) undecidable = true;
  }
  return undecidable ? kUndecidable : kViolated;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Hypothesis yes_no(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok ? Status::Satisfied : Status::Violated, std::move(detail)};
}

Hypothesis tabulated_envelope(const noise::IntensityFunction& f) {
  // |f| is piecewise linear and the envelope is linear on each half-line, so
  // the knots and the origin decide it; beyond the ends f is constant.
  std::vector<double> points = f.table_x();
  points.push_back(0.0);
  for (double x : points) {
    const double bound = f.sigma() * std::abs(x) + f.b();
    if (std::abs(f(x)) > bound * (1.0 + 1e-12) + 1e-15) {
      return {"A1 intensity envelope", Status::Violated,
              f.label() + " exceeds sigma|x| + b at x = " + short_num(x)};
    }
  }
  return {"A1 intensity envelope", Status::Satisfied, f.label() + " checked at every knot"};
}

Hypothesis check_a1(const Config& cfg) {
  const auto& field = cfg.sim.intensities;
  if (field.all_affine()) return {"A1 intensity envelope", Status::Satisfied, "affine intensities"};
  Hypothesis out{"A1 intensity envelope", Status::Satisfied, "tabulated intensities checked at every knot"};
  const rng::CounterStream probe(cfg.sim.base_seed, 0, rng::Substream::Probe);
  for (const auto& f : field.functions()) {
    if (f.form() == noise::IntensityFunction::Form::Tabulated) {
      auto h = tabulated_envelope(f);
      if (h.status == Status::Violated) return h;
    } else if (f.form() == noise::IntensityFunction::Form::Custom) {
      const auto rep = noise::certify_envelope(f, 10000, 100.0, probe);
      if (!rep.ok) {
        return {"A1 intensity envelope", Status::Violated,
                f.label() + " exceeds sigma|x| + b at x = " + short_num(rep.worst_x)};
      }
      out = {"A1 intensity envelope", Status::Undecidable,
             f.label() + " passed 10000 probes on [-100, 100] but is not certifiable"};
    }
  }
  return out;
}

std::vector<Hypothesis> common_items(const Config& cfg, const Hypothesis& a1, const gain::GainFlags& g) {
  std::vector<Hypothesis> v;
  v.push_back(a1);
  v.push_back({"A2 martingale-difference noise", Status::Satisfied,
               std::string(noise::to_string(cfg.sim.noise.kind())) + ", beta = " + short_num(cfg.sim.noise.beta())});
  v.push_back(yes_no("A3 sum c = inf, sum c^2 < inf", g.a3, "gamma = " + short_num(cfg.sim.gain.gamma)));
  v.push_back(yes_no("A4 c decreasing, c(k) = O(c(k+h))", g.a4, "gamma = " + short_num(cfg.sim.gain.gamma)));
  v.push_back({"A5 graphs independent of noise", Status::Satisfied, "separate random substreams"});
  return v;
}

std::string classes_of(const flows::FlowCertificate& c) {
  std::string s;
  for (auto k : c.classes) s += (s.empty() ? "" : ",") + std::string(flows::to_string(k));
  return s.empty() ? "none" : s;
}

bool balanced_refinement_applies(const Config& cfg) {
  const auto kind = cfg.sim.noise.kind();
  if (kind != noise::NoiseKind::IidGaussian && kind != noise::NoiseKind::IidUniform) return false;
  for (const auto& g : cfg.sim.flow.graphs())
    if (!graph::is_balanced(g)) return false;
  return true;
}

void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + p.string());
  out << content;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const fs::path& config, const json& source,
                    const std::string& started, const std::vector<fs::path>& outputs) {
  json m;
  m["command"] = command;
  m["config_path"] = config.string();
  m["config_hash"] = hex64(config_hash(source));
  m["base_seed"] = source.value("seed", std::uint64_t{0});
  m["version"] = kVersion;
  m["started"] = started;
  m["finished"] = utc_now();
  json files = json::array();
  for (const auto& p : outputs) files.push_back(p.string());
  m["outputs"] = files;
  write_file(out_dir / "manifest.json", m.dump(2) + "\n");
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error at " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Divergent || e.kind() == ErrorKind::NonFinite) {
      err << "diverged: " << e.what() << "\n";
      return kDiverged;
    }
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kConfigError;
  }
}

Config load(const fs::path& path, const Overrides* o = nullptr) {
  json j = load_json_file(path);
  if (o) apply_overrides(j, *o);
  return parse_config(j);
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json terms_json(const analysis::BoundTerms& t) {
  return {{"additive", t.additive}, {"multiplicative", t.multiplicative}, {"unbalance", t.unbalance}};
}

}  // namespace

CheckReport check(const Config& cfg) {
  CheckReport r;
  r.flow = flows::certify(cfg.sim.flow, cfg.h);
  r.gain = gain::validate(cfg.sim.gain);
  r.a1 = check_a1(cfg);
  const auto& c = r.flow;
  const auto common = common_items(cfg, r.a1, r.gain);
  const bool markov = c.kind == flows::FlowKind::Markov;
  const bool finite_support = true;

  TheoremCheck t1{1, common};
  t1.items.push_back(yes_no("flow in Gamma1 (conditionally balanced, nonnegative mean)", c.conditionally_balanced,
                            "classes " + classes_of(c)));
  t1.items.push_back(yes_no("(b.1) joint connectivity theta > 0", c.b1_satisfied,
                            "h = " + std::to_string(c.h) + ", theta = " + short_num(c.theta)));
  t1.items.push_back(yes_no("(b.2) Laplacian moment rho0 finite", std::isfinite(c.rho0), "rho0 = " + short_num(c.rho0)));

  TheoremCheck t2{2, common};
  t2.items.push_back(yes_no("flow in Gamma2 (Markov, conditionally balanced, ergodic)", c.member_of(flows::FlowClass::Gamma2),
                            markov ? "uniformly ergodic = " + std::string(c.uniformly_ergodic.value_or(false) ? "yes" : "no") +
                                         ", unique stationary = " + (c.pi ? "yes" : "no")
                                   : "flow is not Markov"));
  t2.items.push_back(yes_no("stationary mean Laplacian has a spanning tree", markov && c.mean_spanning_tree.value_or(false),
                            markov ? "" : "flow is not Markov"));
  t2.items.push_back(yes_no("sup ||sym L_j|| finite", finite_support, "= " + short_num(c.sup_sym_laplacian_norm)));

  TheoremCheck t3{3, common};
  t3.items.push_back(yes_no("flow in Gamma3 (independent, conditionally balanced)", c.member_of(flows::FlowClass::Gamma3),
                            "classes " + classes_of(c)));
  t3.items.push_back(yes_no("windowed lambda2 of E[sym L] > 0", !markov && c.b1_satisfied,
                            "h = " + std::to_string(c.h) + ", theta = " + short_num(c.theta)));
  t3.items.push_back(yes_no("sup E||L||^2 finite", finite_support, "finite support"));

  TheoremCheck t4{4, common};
  t4.items.push_back(yes_no("flow in Gamma4 (i.i.d., conditionally balanced)", c.member_of(flows::FlowClass::Gamma4),
                            "classes " + classes_of(c)));
  t4.items.push_back(yes_no("E[L] has a spanning tree", c.iid && c.mean_spanning_tree.value_or(false),
                            c.iid ? "lambda2(E[sym L]) = " + short_num(c.iid->lambda2_mean) : "flow is not i.i.d."));
  t4.items.push_back(yes_no("E||L||^2 finite", finite_support, c.iid ? "= " + short_num(c.iid->l2_moment) : ""));

  r.theorems = {std::move(t1), std::move(t2), std::move(t3), std::move(t4)};
  return r;
}

void print_check(const Config& cfg, const CheckReport& r, std::ostream& os) {
  const auto& c = r.flow;
  os << "flow: kind=" << flows::to_string(c.kind) << " n=" << cfg.sim.n() << " graphs=" << cfg.sim.flow.graphs().size()
     << " classes=" << classes_of(c) << "\n";
  os << "  h=" << c.h << " theta=" << short_num(c.theta) << " rho0=" << short_num(c.rho0)
     << " rho1=" << short_num(c.rho1) << " rho2=" << short_num(c.rho2) << "\n";
  if (c.pi) {
    os << "  stationary pi =";
    for (double p : *c.pi) os << " " << short_num(p);
    os << "\n";
  }
  if (c.uniformly_ergodic) os << "  uniformly ergodic: " << (*c.uniformly_ergodic ? "yes" : "no") << "\n";
  if (c.mean_spanning_tree) os << "  mean graph spanning tree: " << (*c.mean_spanning_tree ? "yes" : "no") << "\n";
  os << "gain: a=" << short_num(cfg.sim.gain.a) << " k0=" << cfg.sim.gain.k0 << " gamma=" << short_num(cfg.sim.gain.gamma)
     << " a3=" << (r.gain.a3 ? "yes" : "no") << " a4=" << (r.gain.a4 ? "yes" : "no") << "\n";
  os << "noise: " << noise::to_string(cfg.sim.noise.kind()) << " beta=" << short_num(cfg.sim.noise.beta()) << "\n";
  os << "intensity: max sigma=" << short_num(cfg.sim.intensities.max_sigma())
     << " max b=" << short_num(cfg.sim.intensities.max_b()) << " (" << to_string(r.a1.status) << ": " << r.a1.detail
     << ")\n";
  for (const auto& t : r.theorems) {
    os << "theorem " << t.theorem << ": " << to_string(t.status()) << "\n";
    for (const auto& h : t.items) {
      os << "  [" << to_string(h.status) << "] " << h.name;
      if (!h.detail.empty()) os << " (" << h.detail << ")";
      os << "\n";
    }
  }
}

json bounds_json(const analysis::BoundReport& r, const analysis::BoundInputs& in) {
  json inputs = {{"sigma", in.sigma}, {"b", in.b},       {"beta", in.beta},         {"rho0", in.rho0},
                 {"rho1", in.rho1},   {"rho2", in.rho2}, {"n", in.n},               {"V0", in.v0},
                 {"X0_norm_sq", in.x0_norm_sq},          {"c_sum", in.c_sum},       {"c3_sum", in.c3_sum},
                 {"lambda2_mean", opt_json(in.lambda2_mean)}, {"L2_moment", opt_json(in.l2_moment)},
                 {"rho1_bar", opt_json(in.rho1_bar)},   {"rho2_bar", opt_json(in.rho2_bar)},
                 {"rho1_entry", opt_json(in.rho1_entry)}};
  json j;
  j["inputs"] = inputs;
  j["q_v"] = r.q_v;
  j["q_x"] = r.q_x;
  j["var_bound_thm1"] = r.var_bound_thm1;
  j["terms_thm1"] = terms_json(r.thm1_terms);
  j["var_bound_remark6"] = opt_json(r.var_bound_remark6);
  j["small_gain_ok"] = r.small_gain_ok ? json(*r.small_gain_ok) : json(nullptr);
  j["small_gain_limit"] = opt_json(r.small_gain_limit);
  j["c_tilde_thm4"] = opt_json(r.c_tilde_thm4);
  j["var_bound_thm4"] = opt_json(r.var_bound_thm4);
  j["terms_thm4"] = r.thm4_terms ? terms_json(*r.thm4_terms) : json(nullptr);
  return j;
}

Summary summarize(const Config& cfg, std::vector<engine::TrialResult>* kept) {
  Summary s;
  s.stats = engine::run_ensemble(cfg.sim, {}, kept);
  try {
    const auto cert = flows::certify(cfg.sim.flow, cfg.h);
    auto in = analysis::make_bound_inputs(cfg.sim, cert);
    const auto r = analysis::full_report(in, cfg.sim.gain(0));
    s.var_bound_thm1 = r.var_bound_thm1;
    s.var_bound_thm4 = r.var_bound_thm4;
  } catch (const Error&) {
    // No bound for uncertified gains or overflowing constants.
  }
  return s;
}

std::string summary_csv(const Summary& s) {
  std::string out = "k,mean_V,se_V\n";
  const auto& st = s.stats;
  for (std::size_t i = 0; i < st.times.size(); ++i) {
    out += std::to_string(st.times[i]) + "," + num(st.mean_v[i]) + "," + num(st.se_v[i]) + "\n";
  }
  out += "\nmean_xstar,se_mean,var_xstar,var_bound_thm1";
  if (s.var_bound_thm4) out += ",var_bound_thm4";
  out += ",rate_r_at_end\n";
  out += num(st.mean_centroid) + "," + num(st.se_centroid) + "," + num(st.var_centroid) + "," +
         (s.var_bound_thm1 ? num(*s.var_bound_thm1) : "nan");
  if (s.var_bound_thm4) out += "," + num(*s.var_bound_thm4);
  out += "," + num(st.mean_rate_end) + "\n";
  return out;
}

std::string trajectory_csv(const std::vector<engine::TrialResult>& trials, bool full_state) {
  std::string out = "trial,k,V,centroid";
  const std::size_t n = trials.empty() ? 0 : trials.front().final_x.size();
  if (full_state)
    for (std::size_t i = 0; i < n; ++i) out += ",x_" + std::to_string(i);
  out += "\n";
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const auto& r = trials[t];
    for (std::size_t s = 0; s < r.times.size(); ++s) {
      out += std::to_string(t) + "," + std::to_string(r.times[s]) + "," + num(r.v[s]) + "," + num(r.centroid[s]);
      if (full_state)
        for (std::size_t i = 0; i < n; ++i) out += "," + num(r.states[s * n + i]);
      out += "\n";
    }
  }
  return out;
}

SweepSpec parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("--sweep", "expected param=v1,v2,...");
  SweepSpec s;
  s.param = text.substr(0, eq);
  if (s.param != "n" && s.param != "sigma" && s.param != "b" && s.param != "gamma" && s.param != "a") {
    throw ConfigError("--sweep", "unknown parameter '" + s.param + "' (n, sigma, b, gamma, a)");
  }
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) throw ConfigError("--sweep", "bad value '" + item + "'");
    s.values.push_back(v);
  }
  if (s.values.empty()) throw ConfigError("--sweep", "no values given");
  if (s.param == "n")
    for (double v : s.values)
      if (v < 1.0 || v != std::floor(v)) throw ConfigError("--sweep", "n must be a positive integer");
  return s;
}

int cmd_check(const fs::path& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Config cfg = load(config);
    const auto r = check(cfg);
    print_check(cfg, r, out);
    return r.exit_code();
  });
}

int cmd_bound(const fs::path& config, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string started = utc_now();
    const Config cfg = load(config);
    const auto r = check(cfg);
    const auto t1 = r.theorems[0].status(), t4 = r.theorems[3].status();
    if (t1 != Status::Satisfied && t4 != Status::Satisfied) {
      err << "bound needs the hypotheses of theorem 1 or 4:\n";
      print_check(cfg, r, err);
      return (t1 == Status::Undecidable || t4 == Status::Undecidable) ? int(kUndecidable) : int(kViolated);
    }
    auto in = analysis::make_bound_inputs(cfg.sim, r.flow);
    if (!balanced_refinement_applies(cfg)) in.rho1_entry.reset();
    const auto rep = analysis::full_report(in, cfg.sim.gain(0));
    const json j = bounds_json(rep, in);
    out << j.dump(2) << "\n";
    std::string csv = "q_v,q_x,var_bound_thm1,additive,multiplicative,unbalance,var_bound_remark6,small_gain_ok,"
                      "c_tilde_thm4,var_bound_thm4\n";
    auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
    csv += num(rep.q_v) + "," + num(rep.q_x) + "," + num(rep.var_bound_thm1) + "," + num(rep.thm1_terms.additive) + "," +
           num(rep.thm1_terms.multiplicative) + "," + num(rep.thm1_terms.unbalance) + "," + opt(rep.var_bound_remark6) +
           "," + (rep.small_gain_ok ? (*rep.small_gain_ok ? "1" : "0") : "") + "," + opt(rep.c_tilde_thm4) + "," +
           opt(rep.var_bound_thm4) + "\n";
    write_file(out_dir / "bounds.json", j.dump(2) + "\n");
    write_file(out_dir / "bounds.csv", csv);
    write_manifest(out_dir, "bound", config, cfg.source, started, {out_dir / "bounds.json", out_dir / "bounds.csv"});
    return int(kOk);
  });
}

int cmd_simulate(const fs::path& config, const Overrides& o, const fs::path& out_dir, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const std::string started = utc_now();
    const Config cfg = load(config, &o);
    std::vector<engine::TrialResult> kept;
    const auto s = summarize(cfg, &kept);
    write_file(out_dir / "trajectory.csv", trajectory_csv(kept, cfg.sim.record_state));
    write_file(out_dir / "summary.csv", summary_csv(s));
    write_manifest(out_dir, "simulate", config, cfg.source, started,
                   {out_dir / "trajectory.csv", out_dir / "summary.csv"});
    out << "trials=" << s.stats.trials << " horizon=" << cfg.sim.horizon << " mean_V(K)=" << short_num(s.stats.mean_v.back())
        << " mean_xstar=" << short_num(s.stats.mean_centroid) << " var_xstar=" << short_num(s.stats.var_centroid);
    if (s.var_bound_thm1) out << " var_bound_thm1=" << short_num(*s.var_bound_thm1);
    out << "\n";
    if (s.stats.mean_final_v > cfg.mean_v_epsilon) {
      out << "note: mean final V " << short_num(s.stats.mean_final_v) << " exceeds mean_v_epsilon "
          << short_num(cfg.mean_v_epsilon) << "; the final centroid is a poor proxy for x*\n";
    }
    return int(kOk);
  });
}

int cmd_sweep(const fs::path& config, const Overrides& o, const std::string& sweep, const fs::path& out_dir,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string started = utc_now();
    const SweepSpec spec = parse_sweep(sweep);
    json base = load_json_file(config);
    apply_overrides(base, o);
    std::string csv =
        "param,value,n,trials,horizon,mean_final_V,mean_xstar,se_mean,var_xstar,var_xstar_lo,var_xstar_hi,"
        "var_bound_thm1,var_bound_thm4,rate_r_at_end\n";
    for (double v : spec.values) {
      json j = base;
      if (spec.param == "n") {
        j["n"] = static_cast<std::uint64_t>(v);
      } else if (spec.param == "sigma" || spec.param == "b") {
        if (!j.contains("intensity")) j["intensity"] = json::object();
        j["intensity"][spec.param] = v;
      } else {
        if (!j.contains("gain")) j["gain"] = json::object();
        j["gain"][spec.param] = v;
      }
      const Config cfg = parse_config(j);
      const auto s = summarize(cfg);
      const auto& st = s.stats;
      double lo = 0.0, hi = 0.0;
      if (st.trials >= 2) {
        const auto e = analysis::empirical_var_xstar(st);
        lo = e.variance.lo;
        hi = e.variance.hi;
      }
      csv += spec.param + "," + num(v) + "," + std::to_string(cfg.sim.n()) + "," + std::to_string(st.trials) + "," +
             std::to_string(cfg.sim.horizon) + "," + num(st.mean_final_v) + "," + num(st.mean_centroid) + "," +
             num(st.se_centroid) + "," + num(st.var_centroid) + "," + num(lo) + "," + num(hi) + "," +
             (s.var_bound_thm1 ? num(*s.var_bound_thm1) : "nan") + "," +
             (s.var_bound_thm4 ? num(*s.var_bound_thm4) : "nan") + "," + num(st.mean_rate_end) + "\n";
      out << spec.param << "=" << short_num(v) << " var_xstar=" << short_num(st.var_centroid)
          << " mean_final_V=" << short_num(st.mean_final_v) << "\n";
    }
    write_file(out_dir / "sweep.csv", csv);
    write_manifest(out_dir, "sweep", config, base, started, {out_dir / "sweep.csv"});
    return int(kOk);
  });
}

}  // namespace stochavg::cli
