#include "floq/floq.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "floq/errors.hpp"
#include "floq/floquet.hpp"
#include "floq/flow.hpp"
#include "floq/growth.hpp"
#include "floq/params.hpp"
#include "floq/potential.hpp"
#include "floq/torus_field.hpp"
#include "json.hpp"

using nlohmann::json;

struct floq_field {
  floq::TorusField v;
};
struct floq_potential {
  floq::AnalyticPotential v;
};
struct floq_table {
  floq::TruncatedPotential v2;
};
struct floq_operator {
  floq::FloquetOperator v;
};
struct floq_spectrum {
  floq::Spectrum v;
};

namespace {

thread_local std::string g_error;

void set_error(const std::string& msg) { g_error = msg; }

template <typename F>
floq_status guard(F&& fn) {
  try {
    fn();
    return FLOQ_OK;
  } catch (const floq::InvariantViolation& e) {
    set_error(e.what());
    return FLOQ_ERR_INVARIANT;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return FLOQ_ERR_INVALID;
  } catch (const std::out_of_range& e) {
    set_error(e.what());
    return FLOQ_ERR_INVALID;
  } catch (const std::exception& e) {
    set_error(e.what());
    return FLOQ_ERR_RUNTIME;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit_summary(char** summary, const json& doc) {
  if (summary) *summary = dup_string(doc.dump(2));
}

std::filesystem::path prepare_out_dir(const char* out_dir) {
  if (!out_dir || !*out_dir) return {};
  std::filesystem::path p(out_dir);
  std::filesystem::create_directories(p);
  return p;
}

json parse_config(const char* config_json) {
  if (!config_json) throw std::invalid_argument("config_json is null");
  return json::parse(config_json);
}

std::shared_ptr<floq::AnalyticPotential> potential_from_doc(const json& doc) {
  std::string scenario = doc.value("scenario", "analytic3");
  if (scenario == "file") {
    if (doc.contains("potential"))
      return std::make_shared<floq::AnalyticPotential>(
          floq::AnalyticPotential::from_json_text(doc["potential"].dump()));
    return std::make_shared<floq::AnalyticPotential>(
        floq::AnalyticPotential::from_json_file(
            doc.at("potential_file").get<std::string>()));
  }
  return std::make_shared<floq::AnalyticPotential>(
      floq::builtin_potential(scenario));
}

floq::ParamPack pack_from(const json& doc, const char* params) {
  if (params && *params) return floq::param_pack(params);
  return floq::param_pack(doc.value("pack", "default"));
}

/// Everything the floquet/localize commands need, built from one config.
struct FloquetBundle {
  std::shared_ptr<floq::AnalyticPotential> pot;
  floq::SpaceTimeField v1_table;
  floq::TruncatedPotential v2;
  floq::Lattice lat;
  floq::ParamPack pack;
  double epsilon = 1e-2;
  long dense_budget = 20000;
};

FloquetBundle build_floquet_bundle(const json& doc, const char* params) {
  FloquetBundle b;
  b.pack = pack_from(doc, params);
  b.pack.validate();
  double T = doc.value("T", 8.0);
  int J_cap = doc.value("J_cap", 16);
  b.epsilon = doc.value("epsilon", 1e-2);
  b.dense_budget = doc.value("dense_budget", 20000L);
  double alias_tol = doc.value("alias_tol", 1e-8);
  int n_margin = doc.value("n_margin", 112);

  b.pot = potential_from_doc(doc);
  floq::GevreyCutoff cutoff(b.pack.alpha);
  double lg = floq::log_scale(T);
  int k_x = static_cast<int>(std::ceil(std::pow(lg, b.pack.sigma)));
  int k_t = static_cast<int>(std::ceil(T * std::pow(lg, b.pack.sigma)));
  floq::PeriodizedPotential V1 =
      floq::periodize(*b.pot, T, cutoff, std::max(k_x, b.pot->max_k() + 1),
                      k_t + n_margin, alias_tol);
  b.v1_table = V1.table();
  b.v2 = floq::truncate(V1, b.pack.sigma, b.pack.delta);
  b.lat = floq::Lattice::make(T, J_cap, b.pack.A, b.pack.sigma);
  return b;
}

void write_spectrum_csv(const floq::Spectrum& spec,
                        const floq::LocalizationReport& rep,
                        std::ostream& os) {
  os << "# floq-spectrum v1\n";
  os << "index,E,mass_outside_omega0,best_j0,best_n0,mass_outside_omega_prime,"
        "verdict\n";
  char buf[128];
  for (size_t k = 0; k < rep.entries.size(); ++k) {
    const auto& e = rep.entries[k];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%d,%d,%.17g,", k, e.E,
                  e.mass_outside_omega0, e.best_j0, e.best_n0,
                  e.mass_outside_best_omega_prime);
    os << buf << floq::to_string(e.verdict) << "\n";
  }
  (void)spec;
}

std::uint64_t effective_seed(const json& doc, int64_t seed) {
  if (seed >= 0) return static_cast<std::uint64_t>(seed);
  return doc.value("seed", 1ULL);
}

floq::ExperimentConfig experiment_from(const json& doc, int64_t seed,
                                       const char* params) {
  floq::ExperimentConfig cfg = floq::ExperimentConfig::from_json_text(doc.dump());
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (params && *params) cfg.pack = floq::param_pack(params);
  cfg.validate();
  return cfg;
}

}  // namespace

extern "C" {

const char* floq_version(void) { return "floq 1.0.0"; }

const char* floq_last_error(void) { return g_error.c_str(); }

void floq_string_free(char* s) { std::free(s); }

floq_status floq_field_create(int j_max, floq_field** out) {
  return guard([&] {
    if (!out) throw std::invalid_argument("out is null");
    *out = new floq_field{floq::TorusField(j_max)};
  });
}

floq_status floq_field_set_coeff(floq_field* f, int j, double re, double im) {
  return guard([&] {
    if (!f) throw std::invalid_argument("field is null");
    f->v.set_coeff(j, floq::cd(re, im));
  });
}

floq_status floq_field_coeff(const floq_field* f, int j, double* re,
                             double* im) {
  return guard([&] {
    if (!f || !re || !im) throw std::invalid_argument("null argument");
    floq::cd c = f->v.coeff(j);
    *re = c.real();
    *im = c.imag();
  });
}

floq_status floq_field_hs_norm(const floq_field* f, double s, double* out) {
  return guard([&] {
    if (!f || !out) throw std::invalid_argument("null argument");
    *out = floq::hs_norm(f->v, s);
  });
}

floq_status floq_field_apply_multiplier(const floq_field* f, int J,
                                        floq_field** out) {
  return guard([&] {
    if (!f || !out) throw std::invalid_argument("null argument");
    *out = new floq_field{floq::apply_multiplier(f->v, J)};
  });
}

void floq_field_destroy(floq_field* f) { delete f; }

floq_status floq_potential_parse(const char* json_text, floq_potential** out) {
  return guard([&] {
    if (!json_text || !out) throw std::invalid_argument("null argument");
    *out = new floq_potential{floq::AnalyticPotential::from_json_text(json_text)};
  });
}

floq_status floq_potential_builtin(const char* name, floq_potential** out) {
  return guard([&] {
    if (!name || !out) throw std::invalid_argument("null argument");
    *out = new floq_potential{floq::builtin_potential(name)};
  });
}

floq_status floq_potential_eval(const floq_potential* p, double x, double t,
                                double* out) {
  return guard([&] {
    if (!p || !out) throw std::invalid_argument("null argument");
    *out = p->v.eval(x, t);
  });
}

void floq_potential_destroy(floq_potential* p) { delete p; }

floq_status floq_table_build(const floq_potential* p, double T, double alpha,
                             double sigma, double delta, floq_table** out) {
  return guard([&] {
    if (!p || !out) throw std::invalid_argument("null argument");
    floq::GevreyCutoff cutoff(alpha);
    double lg = floq::log_scale(T);
    int k_x = static_cast<int>(std::ceil(std::pow(lg, sigma)));
    int k_t = static_cast<int>(std::ceil(T * std::pow(lg, sigma)));
    floq::PeriodizedPotential v1 = floq::periodize(
        p->v, T, cutoff, std::max(k_x, p->v.max_k() + 1), k_t + 112);
    *out = new floq_table{floq::truncate(v1, sigma, delta)};
  });
}

floq_status floq_table_coeff(const floq_table* t, int j, int n, double* re,
                             double* im) {
  return guard([&] {
    if (!t || !re || !im) throw std::invalid_argument("null argument");
    floq::cd c = t->v2.table().coeff(j, n);
    *re = c.real();
    *im = c.imag();
  });
}

floq_status floq_table_extent(const floq_table* t, int* j_max, int* n_max) {
  return guard([&] {
    if (!t || !j_max || !n_max) throw std::invalid_argument("null argument");
    *j_max = t->v2.table().j_max();
    *n_max = t->v2.table().n_max();
  });
}

floq_status floq_table_gap(const floq_table* t, double* out) {
  return guard([&] {
    if (!t || !out) throw std::invalid_argument("null argument");
    *out = t->v2.measured_gap();
  });
}

void floq_table_destroy(floq_table* t) { delete t; }

floq_status floq_operator_assemble(const floq_table* v2, int J_cap, double A,
                                   double sigma, floq_operator** out) {
  return guard([&] {
    if (!v2 || !out) throw std::invalid_argument("null argument");
    floq::Lattice lat = floq::Lattice::make(v2->v2.T(), J_cap, A, sigma);
    *out = new floq_operator{floq::assemble(v2->v2, lat)};
  });
}

floq_status floq_operator_sites(const floq_operator* h, long* out) {
  return guard([&] {
    if (!h || !out) throw std::invalid_argument("null argument");
    *out = h->v.lattice().site_count();
  });
}

floq_status floq_operator_entry(const floq_operator* h, int j, int n, int jp,
                                int np, double* re, double* im) {
  return guard([&] {
    if (!h || !re || !im) throw std::invalid_argument("null argument");
    floq::cd c = h->v.entry(j, n, jp, np);
    *re = c.real();
    *im = c.imag();
  });
}

void floq_operator_destroy(floq_operator* h) { delete h; }

floq_status floq_eigensolve(const floq_operator* h, long dense_budget,
                            floq_spectrum** out) {
  return guard([&] {
    if (!h || !out) throw std::invalid_argument("null argument");
    floq::EigOptions opts;
    if (dense_budget > 0) opts.dense_budget = dense_budget;
    *out = new floq_spectrum{floq::eigensolve(h->v, opts)};
  });
}

floq_status floq_spectrum_count(const floq_spectrum* s, int* out) {
  return guard([&] {
    if (!s || !out) throw std::invalid_argument("null argument");
    *out = s->v.count();
  });
}

floq_status floq_spectrum_complete(const floq_spectrum* s, int* out) {
  return guard([&] {
    if (!s || !out) throw std::invalid_argument("null argument");
    *out = s->v.complete() ? 1 : 0;
  });
}

floq_status floq_spectrum_eigenvalue(const floq_spectrum* s, int k,
                                     double* out) {
  return guard([&] {
    if (!s || !out) throw std::invalid_argument("null argument");
    *out = s->v.eigenvalue(k);
  });
}

void floq_spectrum_destroy(floq_spectrum* s) { delete s; }

floq_status floq_cmd_simulate(const char* config_json, const char* out_dir,
                              int64_t seed, const char* params, char** summary) {
  floq::GrowthRecord partial;
  floq_status st = guard([&] {
    json doc = parse_config(config_json);
    floq::ExperimentConfig cfg = experiment_from(doc, seed, params);
    auto dir = prepare_out_dir(out_dir);
    floq::GrowthRecord rec = floq::run_growth(cfg, &partial);
    std::string file;
    if (!dir.empty()) {
      file = (dir / (cfg.label + "_growth.csv")).string();
      std::ofstream os(file);
      floq::write_growth_csv(rec, os);
    }
    json out = {{"label", rec.label},
                {"samples", rec.times.size()},
                {"J_used", rec.J_used},
                {"J_schedule_gap", rec.J_schedule_gap},
                {"csv", file}};
    out["fits"] = json::array();
    for (size_t i = 0; i < rec.fits.size(); ++i) {
      const auto& f = rec.fits[i];
      out["fits"].push_back({{"s", rec.s_list[i]},
                             {"C", f.C},
                             {"varsigma", f.varsigma},
                             {"ci", {f.ci_lo, f.ci_hi}},
                             {"resid", f.resid},
                             {"eps", f.eps},
                             {"resid_poly", f.resid_poly},
                             {"model", f.log_selected ? "log" : "poly"}});
    }
    emit_summary(summary, out);
  });
  if (st == FLOQ_ERR_INVARIANT && out_dir && *out_dir) {
    // keep whatever the aborted run produced
    auto dir = prepare_out_dir(out_dir);
    std::ofstream os(dir / (partial.label + "_growth_partial.csv"));
    floq::write_growth_csv(partial, os);
  }
  return st;
}

floq_status floq_cmd_floquet(const char* config_json, const char* out_dir,
                             int64_t seed, const char* params, char** summary) {
  return guard([&] {
    json doc = parse_config(config_json);
    (void)effective_seed(doc, seed);
    FloquetBundle b = build_floquet_bundle(doc, params);
    auto dir = prepare_out_dir(out_dir);
    floq::FloquetOperator H = floq::assemble(b.v2, b.lat);
    floq::EigOptions opts;
    opts.dense_budget = b.dense_budget;
    floq::Spectrum spec = floq::eigensolve(H, opts);

    std::string evals_file, op_file;
    if (!dir.empty()) {
      evals_file = (dir / "eigenvalues.csv").string();
      std::ofstream os(evals_file);
      os << "# floq-eigenvalues v1\nindex,E\n";
      char buf[64];
      for (int k = 0; k < spec.count(); ++k) {
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", k, spec.eigenvalue(k));
        os << buf;
      }
      if (doc.value("export_operator", false)) {
        op_file = (dir / "operator.txt").string();
        std::ofstream ot(op_file);
        H.export_triplets(ot);
      }
    }
    json out = {{"sites", b.lat.site_count()},
                {"J_cap", b.lat.J_cap},
                {"N_cap", b.lat.N_cap},
                {"count", spec.count()},
                {"complete", spec.complete()},
                {"kernel_gap", b.v2.measured_gap()},
                {"eigenvalues_csv", evals_file},
                {"operator_txt", op_file}};
    if (spec.count() > 0) {
      out["E_min"] = spec.eigenvalue(0);
      out["E_max"] = spec.eigenvalue(spec.count() - 1);
    }
    emit_summary(summary, out);
  });
}

floq_status floq_cmd_localize(const char* config_json, const char* out_dir,
                              int64_t seed, const char* params, char** summary) {
  return guard([&] {
    json doc = parse_config(config_json);
    (void)effective_seed(doc, seed);
    FloquetBundle b = build_floquet_bundle(doc, params);
    auto dir = prepare_out_dir(out_dir);
    floq::FloquetOperator H = floq::assemble(b.v2, b.lat);
    floq::EigOptions opts;
    opts.dense_budget = b.dense_budget;
    floq::Spectrum spec = floq::eigensolve(H, opts);
    floq::LocalizationReport rep =
        floq::localization_report(spec, b.lat, b.pack.sigma, b.epsilon);

    // case (ii) separation: above the energy floor every resonant set lives
    // on a single |j| shell
    double lg = floq::log_scale(b.lat.T);
    double floor_E =
        5.0 * b.lat.A * b.lat.A * std::pow(lg, 2.0 * b.pack.sigma);
    double thr = std::pow(lg, b.pack.sigma);
    int resonance_violations = 0;
    if (doc.value("check_resonance", true)) {
      for (const auto& e : rep.entries) {
        if (e.E <= floor_E) continue;
        auto sites = floq::resonant_set(e.E, b.lat, thr);
        for (const auto& [j, n] : sites)
          if (std::abs(j) != std::abs(sites.front().first)) {
            ++resonance_violations;
            break;
          }
      }
    }

    std::string file;
    if (!dir.empty()) {
      file = (dir / "spectrum.csv").string();
      std::ofstream os(file);
      write_spectrum_csv(spec, rep, os);
    }
    json out = {{"pairs", rep.entries.size()},
                {"n_fail", rep.n_fail},
                {"epsilon", rep.epsilon},
                {"omega0_radius", rep.omega0_radius},
                {"shell_halfwidth", rep.shell_halfwidth},
                {"n_halfwidth", rep.n_halfwidth},
                {"resonance_violations", resonance_violations},
                {"spectrum_csv", file}};
    emit_summary(summary, out);
    if (resonance_violations > 0)
      throw floq::InvariantViolation(
          "localize: resonant sites above the energy floor span multiple |j| "
          "shells (" +
          std::to_string(resonance_violations) + " pairs)");
    if (doc.value("assert_dichotomy", false) && rep.n_fail > 0)
      throw floq::InvariantViolation(
          "localize: " + std::to_string(rep.n_fail) +
          " eigenvectors fail the localization dichotomy at epsilon=" +
          std::to_string(rep.epsilon));
  });
}

floq_status floq_cmd_estimates(const char* config_json, const char* out_dir,
                               int64_t seed, const char* params, char** summary) {
  return guard([&] {
    json doc = parse_config(config_json);
    std::uint64_t sd = effective_seed(doc, seed);
    (void)params;
    auto dir = prepare_out_dir(out_dir);
    auto pot = potential_from_doc(doc);
    floq::AnalyticSampler sampler(*pot);

    double s = doc.value("s", 1.0);
    double t = doc.value("t", 4.0);
    std::vector<int> J_list = doc.value("J_list", std::vector<int>{16, 32, 64, 128});
    floq::FlowConfig fcfg;
    fcfg.dt = doc.value("dt", 0.002);
    fcfg.band = doc.value("band", 256);

    json rows = json::array();
    for (int J : J_list) {
      double cn = floq::commutator_norm(&sampler, 0.0, J, s, fcfg.band);
      rows.push_back({{"metric", "commutator_norm"}, {"J", J}, {"value", cn}});
    }
    floq::TorusField u0 = floq::random_probe(fcfg.band / 4, s, sd);
    for (int J : J_list) {
      auto tp = floq::tail_persistence(u0, &sampler, J, s, t, fcfg);
      rows.push_back({{"metric", "tail_persistence_minus_1"},
                      {"J", J},
                      {"value", tp.ratio - 1.0},
                      {"regime_ok", tp.regime_ok}});
      double fc = floq::flow_commutator(u0, &sampler, J, s, t, fcfg);
      rows.push_back({{"metric", "flow_commutator"}, {"J", J}, {"value", fc}});
    }
    for (double tt : doc.value("t_list", std::vector<double>{1.0, 10.0})) {
      double fn = floq::measure_flow_norm(&sampler, s, tt, fcfg, sd, 5);
      rows.push_back({{"metric", "flow_norm_probe"}, {"t", tt}, {"value", fn}});
    }

    std::string file;
    if (!dir.empty()) {
      file = (dir / "estimates.csv").string();
      std::ofstream os(file);
      os << "# floq-estimates v1\nmetric,J_or_t,value\n";
      char buf[96];
      for (const auto& r : rows) {
        double key = r.contains("J") ? r["J"].get<double>() : r["t"].get<double>();
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n",
                      r["metric"].get<std::string>().c_str(), key,
                      r["value"].get<double>());
        os << buf;
      }
    }
    emit_summary(summary, json{{"s", s}, {"t", t}, {"rows", rows}, {"csv", file}});
  });
}

floq_status floq_cmd_compare(const char* config_json, const char* out_dir,
                             int64_t seed, const char* params, char** summary) {
  return guard([&] {
    json doc = parse_config(config_json);
    auto dir = prepare_out_dir(out_dir);
    std::vector<floq::ExperimentConfig> cfgs;
    for (const auto& jc : doc.at("scenarios"))
      cfgs.push_back(experiment_from(jc, seed, params));
    auto rows = floq::scenario_compare(cfgs);

    std::string file;
    if (!dir.empty()) {
      file = (dir / "compare.csv").string();
      std::ofstream os(file);
      floq::write_compare_csv(rows, os);
    }
    json out = {{"csv", file}, {"rows", json::array()}};
    for (const auto& r : rows)
      out["rows"].push_back({{"label", r.label},
                             {"varsigma_hat", r.varsigma_hat},
                             {"tail_score", r.tail_score},
                             {"bounded", r.bounded},
                             {"model", r.log_selected ? "log" : "poly"},
                             {"status", r.failed ? r.error : "ok"}});
    emit_summary(summary, out);
  });
}

floq_status floq_cmd_plot_data(const char* config_json, const char* out_dir,
                               int64_t seed, const char* params, char** summary) {
  return guard([&] {
    json doc = parse_config(config_json);
    floq::ExperimentConfig cfg = experiment_from(doc, seed, params);
    auto dir = prepare_out_dir(out_dir);
    if (dir.empty())
      throw std::invalid_argument("plot-data requires an output directory");
    floq::GrowthRecord rec = floq::run_growth(cfg);

    json files = json::array();
    char buf[64];
    for (size_t si = 0; si < rec.s_list.size(); ++si) {
      std::string base = cfg.label + "_s" + std::to_string(si);
      std::string raw = (dir / (base + ".dat")).string();
      std::string scaled = (dir / (base + "_logscaled.dat")).string();
      std::ofstream os(raw), ss(scaled);
      for (size_t i = 0; i < rec.times.size(); ++i) {
        double t = rec.times[i], v = rec.norms[si][i];
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", t, v);
        os << buf;
        double denom = std::pow(std::log(t + 2.0), 4.0 * rec.s_list[si]);
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", t, v / denom);
        ss << buf;
      }
      files.push_back(raw);
      files.push_back(scaled);
    }
    emit_summary(summary, json{{"label", cfg.label}, {"files", files}});
  });
}

}  // extern "C"
