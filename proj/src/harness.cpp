// SPDX-License-Identifier: Apache-2.0
#include "doafoundry/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "doafoundry/analysis.hpp"
#include "doafoundry/coarray.hpp"
#include "doafoundry/detection.hpp"
#include "doafoundry/error.hpp"
#include "doafoundry/estimators.hpp"
#include "doafoundry/had.hpp"
#include "doafoundry/localization.hpp"
#include "doafoundry/quantization.hpp"
#include "doafoundry/random.hpp"

namespace doafoundry {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) { return fmt::format("{:.10g}", v); }
std::string num(int v) { return fmt::format("{}", v); }

json range(double lo, double hi, double step) {
  json out = json::array();
  for (int i = 0; lo + i * step <= hi + 1e-9; ++i) out.push_back(lo + i * step);
  return out;
}

[[noreturn]] void bad_field(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::Configuration, fmt::format("config field '{}': {}", field, what));
}

json normalize(const json& def, const json& user, const std::string& field) {
  if (def.is_number_float()) {
    if (!user.is_number()) bad_field(field, "expected a number");
    return user.get<double>();
  }
  if (def.is_number_integer()) {
    if (!user.is_number()) bad_field(field, "expected an integer");
    const double v = user.get<double>();
    if (v != std::floor(v)) bad_field(field, "expected an integer");
    return static_cast<std::int64_t>(v);
  }
  if (def.is_string()) {
    if (!user.is_string()) bad_field(field, "expected a string");
    return user;
  }
  if (def.is_boolean()) {
    if (!user.is_boolean()) bad_field(field, "expected true or false");
    return user;
  }
  if (def.is_array()) {
    if (!user.is_array()) bad_field(field, "expected an array");
    json out = json::array();
    for (std::size_t i = 0; i < user.size(); ++i) {
      out.push_back(def.empty() ? user[i] : normalize(def[0], user[i], fmt::format("{}[{}]", field, i)));
    }
    return out;
  }
  if (def.is_object()) {
    if (!user.is_object()) bad_field(field, "expected an object");
    json out = def;
    for (const auto& [key, value] : user.items()) {
      if (!def.contains(key)) bad_field(field + "." + key, "unknown field");
      out[key] = normalize(def[key], value, field + "." + key);
    }
    return out;
  }
  return user;
}

int as_int(const json& p, const char* key) { return p.at(key).get<int>(); }
double as_double(const json& p, const char* key) { return p.at(key).get<double>(); }
std::string as_string(const json& p, const char* key) { return p.at(key).get<std::string>(); }
std::vector<double> as_doubles(const json& p, const char* key) { return p.at(key).get<std::vector<double>>(); }
std::vector<int> as_ints(const json& p, const char* key) { return p.at(key).get<std::vector<int>>(); }
std::vector<std::string> as_strings(const json& p, const char* key) {
  return p.at(key).get<std::vector<std::string>>();
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) bad_field("params." + field, what);
}

void require_positive(const json& p, const char* key) {
  require(p.at(key).get<double>() > 0.0, key, "must be positive");
}

void require_nonempty(const json& p, const char* key) { require(!p.at(key).empty(), key, "must not be empty"); }

SignalModel signal_model_from(const json& p) {
  const auto s = as_string(p, "signal_model");
  if (s == "gaussian-iid") return SignalModel::GaussianIID;
  if (s == "constant-modulus") return SignalModel::ConstantModulusRandomPhase;
  bad_field("params.signal_model", "expected gaussian-iid or constant-modulus");
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns, std::string hash)
      : out_(path), hash_(std::move(hash)), width_(columns.size()) {
    if (!out_) throw Error(ErrorCode::Configuration, "cannot write " + path.string());
    for (const auto& c : columns) out_ << c << ',';
    out_ << "config_hash\n";
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw Error(ErrorCode::Numerical, "CSV row width mismatch");
    for (const auto& c : cells) out_ << c << ',';
    out_ << hash_ << '\n';
  }

 private:
  std::ofstream out_;
  std::string hash_;
  std::size_t width_;
};

struct Context {
  const ScenarioConfig& cfg;
  std::string hash;
  RunSummary summary;

  CsvWriter csv(const std::string& name, std::vector<std::string> columns) {
    const auto path = cfg.output_dir / name;
    summary.files.push_back(path);
    return CsvWriter(path, std::move(columns), hash);
  }
  void headline(std::string key, std::string value) {
    summary.headline.emplace_back(std::move(key), std::move(value));
  }
  std::uint64_t seed(std::uint64_t stream) const { return derive_seed(cfg.seed, stream); }
};

double gap_db(double rmse, double bound_rmse) { return 20.0 * std::log10(rmse / bound_rmse); }

// ---------------------------------------------------------------- detect

void run_detect(Context& ctx) {
  const auto& p = ctx.cfg.params;
  for (const char* k : {"elements", "snapshots", "pfa", "calibration_trials"}) require_positive(p, k);
  require_nonempty(p, "snr_db");
  require_nonempty(p, "statistics");
  DetectionSetup setup;
  setup.elements = as_int(p, "elements");
  setup.snapshots = as_int(p, "snapshots");
  setup.source_angle_deg = as_double(p, "source_angle_deg");
  setup.signal_model = signal_model_from(p);
  std::vector<DetectionStatistic> stats;
  for (const auto& s : as_strings(p, "statistics")) {
    try {
      stats.push_back(statistic_from_string(s));
    } catch (const Error&) {
      bad_field("params.statistics", "unknown statistic '" + s + "'");
    }
  }
  const double pfa = as_double(p, "pfa");
  const int calib = as_int(p, "calibration_trials");
  const auto snr = as_doubles(p, "snr_db");

  const auto thresholds = calibrate_thresholds(stats, setup, pfa, calib, ctx.seed(1));
  const auto pfa_emp = empirical_false_alarm(stats, thresholds, setup, calib, ctx.seed(2));
  const auto curves = pd_curves(stats, thresholds, setup, pfa, snr, ctx.cfg.trials, ctx.seed(3));

  auto pd = ctx.csv("detect_pd.csv", {"snr_db", "statistic", "pd", "pd_stderr", "pfa_target", "threshold"});
  for (const auto& c : curves) {
    for (const auto& pt : c.points) {
      pd.row({num(pt.snr_db), to_string(c.statistic), num(pt.pd), num(pt.pd_stderr), num(c.pfa_target),
              num(c.threshold)});
    }
  }
  auto fa = ctx.csv("detect_pfa.csv", {"statistic", "threshold", "pfa_target", "pfa_empirical", "trials"});
  for (std::size_t i = 0; i < stats.size(); ++i) {
    fa.row({to_string(stats[i]), num(thresholds[i]), num(pfa), num(pfa_emp[i]), num(calib)});
  }
  const double ref = as_double(p, "reference_snr_db");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < snr.size(); ++i) {
    if (std::abs(snr[i] - ref) < std::abs(snr[idx] - ref)) idx = i;
  }
  for (std::size_t i = 0; i < curves.size(); ++i) {
    ctx.headline(fmt::format("P_d {} @ {} dB", to_string(curves[i].statistic), num(snr[idx])),
                 num(curves[i].points[idx].pd));
    ctx.headline(fmt::format("P_fa {}", to_string(curves[i].statistic)), num(pfa_emp[i]));
  }
}

// ---------------------------------------------------------------- estimate

ArrayGeometry geometry_from(const json& p) {
  const auto kind = as_string(p, "array");
  if (kind == "ula") {
    require(as_int(p, "elements") >= 2, "elements", "must be >= 2");
    return ArrayGeometry::ula(as_int(p, "elements"), as_double(p, "spacing"));
  }
  if (kind == "coprime") return coprime_positions(as_int(p, "p"), as_int(p, "q"));
  bad_field("params.array", "expected ula or coprime");
}

EstimateReport run_method(const std::string& method, const CovarianceEstimate& r, int n,
                          const std::vector<double>& grid, const json& p) {
  EstimateReport rep;
  if (method == "beamforming" || method == "capon") {
    rep.method = method;
    rep.spectrum = method == "beamforming" ? beamform_spectrum(r, grid)
                                           : capon_spectrum(r, grid, as_double(p, "capon_loading"));
    const auto picks = pick_peaks(*rep.spectrum, n);
    rep.angles_deg = picks.angles();
    if (picks.shortfall) rep.flags.emplace_back("peak-shortfall");
    return rep;
  }
  if (method == "music") return music_estimate(r, n, grid);
  if (method == "root-music") return root_music(r, n);
  if (method == "esprit") return esprit(r, n);
  if (method == "monopulse") return monopulse_estimate(r, grid, as_double(p, "monopulse_delta_deg"));
  bad_field("params.methods", "unknown method '" + method + "'");
}

void run_estimate(Context& ctx) {
  const auto& p = ctx.cfg.params;
  require_positive(p, "snapshots");
  require_positive(p, "grid_step_deg");
  require_nonempty(p, "angles_deg");
  require_nonempty(p, "methods");
  const auto geometry = geometry_from(p);
  const auto angles = as_doubles(p, "angles_deg");
  const auto methods = as_strings(p, "methods");
  const int n = static_cast<int>(angles.size());
  for (const auto& m : methods) {
    const bool known = m == "beamforming" || m == "capon" || m == "music" || m == "root-music" ||
                       m == "esprit" || m == "monopulse";
    require(known, "methods", "unknown method '" + m + "'");
    require(geometry.is_uniform() || (m != "root-music" && m != "esprit"), "methods",
            m + " needs a uniform array");
    require(m != "monopulse" || n == 1, "methods", "monopulse handles a single source");
  }
  const double snr = as_double(p, "snr_db");
  const int snapshots = as_int(p, "snapshots");
  const auto grid = make_grid(-90.0, 90.0, as_double(p, "grid_step_deg"));
  const int trials = ctx.cfg.trials;
  const auto model = signal_model_from(p);

  std::vector<std::vector<std::optional<std::vector<double>>>> est(
      static_cast<std::size_t>(trials), std::vector<std::optional<std::vector<double>>>(methods.size()));
  std::vector<SpectrumCurve> first_spectra;
  parallel_for(est.size(), [&](std::size_t t) {
    auto sc = EmitterScenario::equal_power(angles, snr, snapshots, derive_seed(ctx.cfg.seed, 11, t));
    sc.signal_model = model;
    const auto r = sample_covariance(synthesize_snapshots(sc, geometry));
    for (std::size_t m = 0; m < methods.size(); ++m) {
      try {
        auto rep = run_method(methods[m], r, n, grid, p);
        if (static_cast<int>(rep.angles_deg.size()) == n) est[t][m] = rep.angles_deg;
        if (t == 0 && rep.spectrum) first_spectra.push_back(*rep.spectrum);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::Configuration) throw;
      }
    }
  });

  auto spec = ctx.csv("estimate_spectrum.csv", {"angle_deg", "value", "method"});
  for (const auto& s : first_spectra) {
    for (std::size_t i = 0; i < s.grid_deg.size(); ++i) spec.row({num(s.grid_deg[i]), num(s.values[i]), s.method});
  }
  auto rows = ctx.csv("estimate_trials.csv", {"trial", "method", "source", "true_deg", "estimate_deg"});
  std::vector<double> sq(methods.size(), 0.0);
  std::vector<int> ok(methods.size(), 0), failed(methods.size(), 0);
  auto sorted_truth = angles;
  std::sort(sorted_truth.begin(), sorted_truth.end());
  for (int t = 0; t < trials; ++t) {
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto& e = est[static_cast<std::size_t>(t)][m];
      if (!e) {
        ++failed[m];
        rows.row({num(t), methods[m], "", "", "nan"});
        continue;
      }
      ++ok[m];
      for (int k = 0; k < n; ++k) {
        const double d = (*e)[static_cast<std::size_t>(k)] - sorted_truth[static_cast<std::size_t>(k)];
        sq[m] += d * d;
        rows.row({num(t), methods[m], num(k), num(sorted_truth[static_cast<std::size_t>(k)]),
                  num((*e)[static_cast<std::size_t>(k)])});
      }
    }
  }
  double bound = kNaN;
  if (n == 1) {
    bound = crlb_numeric_fim(geometry, EmitterScenario::single(angles[0], snr, snapshots, 0), FimModel::exact())
                .rmse_deg();
  }
  auto sum = ctx.csv("estimate_summary.csv",
                     {"method", "rmse_deg", "crlb_rmse_deg", "gap_db", "failures", "time_blocks", "flops"});
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const double rmse = ok[m] > 0 ? std::sqrt(sq[m] / (ok[m] * n)) : kNaN;
    sum.row({methods[m], num(rmse), num(bound), num(gap_db(rmse, bound)), num(failed[m]), "1", "0"});
    ctx.headline("RMSE " + methods[m] + " [deg]", num(rmse));
    if (n == 1) ctx.headline("RMSE-CRLB gap " + methods[m] + " [dB]", num(gap_db(rmse, bound)));
  }
}

// ---------------------------------------------------------------- had

void run_had(Context& ctx) {
  const auto& p = ctx.cfg.params;
  for (const char* k : {"subarrays", "per_subarray", "snapshots", "coarse_step_deg", "fine_step_deg"}) {
    require_positive(p, k);
  }
  require_nonempty(p, "methods");
  const int k = as_int(p, "subarrays"), m = as_int(p, "per_subarray"), l = as_int(p, "snapshots");
  const double snr = as_double(p, "snr_db"), theta = as_double(p, "theta_deg");
  const auto methods = as_strings(p, "methods");
  for (const auto& name : methods) {
    require(name == "root-music-hdapa" || name == "fast" || name == "hdapa" || name == "dapa", "methods",
            "unknown method '" + name + "'");
    if (name == "fast" && k < m) {
      throw Error(ErrorCode::Precondition,
                  fmt::format("fast elimination requires K≥M (K={}, M={})", k, m));
    }
  }
  const double coarse = as_double(p, "coarse_step_deg"), fine = as_double(p, "fine_step_deg");
  const int trials = ctx.cfg.trials;
  const auto n_methods = methods.size();
  std::vector<double> est(static_cast<std::size_t>(trials) * n_methods, kNaN);
  std::vector<int> blocks(n_methods, 0);
  std::vector<double> flops(n_methods, 0.0);
  const auto model = signal_model_from(p);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    auto sc = EmitterScenario::single(theta, snr, l, derive_seed(ctx.cfg.seed, 21, t));
    sc.signal_model = model;
    for (std::size_t i = 0; i < n_methods; ++i) {
      EmitterStream stream(sc, k, m);
      EstimateReport rep;
      try {
        if (methods[i] == "root-music-hdapa") rep = root_music_hdapa(stream);
        else if (methods[i] == "fast") rep = fast_ambiguity_elimination(stream);
        else if (methods[i] == "hdapa") rep = hdapa_estimate(stream, coarse, fine);
        else rep = dapa_estimate(stream, fine);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::Precondition) throw;
        continue;
      }
      est[t * n_methods + i] = rep.angles_deg.front();
      if (t == 0) {
        blocks[i] = rep.time_blocks;
        flops[i] = rep.flops;
      }
    }
  });

  auto rows = ctx.csv("had_trials.csv", {"trial", "method", "true_deg", "estimate_deg"});
  std::vector<double> sq(n_methods, 0.0);
  std::vector<int> ok(n_methods, 0);
  for (int t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < n_methods; ++i) {
      const double e = est[static_cast<std::size_t>(t) * n_methods + i];
      rows.row({num(t), methods[i], num(theta), num(e)});
      if (std::isfinite(e)) {
        sq[i] += (e - theta) * (e - theta);
        ++ok[i];
      }
    }
  }
  const double bound = crlb_hybrid(k, m, snr, l, theta).rmse_deg();
  auto sum = ctx.csv("had_summary.csv",
                     {"method", "rmse_deg", "crlb_rmse_deg", "gap_db", "failures", "time_blocks", "flops"});
  for (std::size_t i = 0; i < n_methods; ++i) {
    const double rmse = ok[i] > 0 ? std::sqrt(sq[i] / ok[i]) : kNaN;
    sum.row({methods[i], num(rmse), num(bound), num(gap_db(rmse, bound)), num(trials - ok[i]), num(blocks[i]),
             num(flops[i])});
    ctx.headline("RMSE " + methods[i] + " [deg]", num(rmse));
    ctx.headline("RMSE-CRLB gap " + methods[i] + " [dB]", num(gap_db(rmse, bound)));
    ctx.headline("time_blocks " + methods[i], num(blocks[i]));
  }
  auto cx = ctx.csv("had_complexity.csv", {"method", "K", "M", "L", "N", "flops", "savings_vs_original"});
  const double original = complexity_flops(HadMethod::Original, k, m, l, k * m);
  for (auto method : {HadMethod::Original, HadMethod::Fast}) {
    const double f = complexity_flops(method, k, m, l, k * m);
    cx.row({to_string(method), num(k), num(m), num(l), num(k * m), num(f), num(original - f)});
  }
}

// ---------------------------------------------------------------- quantize-sweep

PowerModel power_model_from(const json& p) {
  const auto& j = p.at("power");
  PowerModel pm;
  pm.p_rf_chain = as_double(j, "p_rf_chain");
  pm.p_adc_ref = as_double(j, "p_adc_ref");
  pm.p_phase_shifter = as_double(j, "p_phase_shifter");
  pm.p_lna = as_double(j, "p_lna");
  pm.p_baseband = as_double(j, "p_baseband");
  try {
    pm.validate();
  } catch (const Error&) {
    bad_field("params.power", "component powers must be finite and non-negative");
  }
  return pm;
}

void run_quantize(Context& ctx) {
  const auto& p = ctx.cfg.params;
  const auto mode = as_string(p, "mode");
  const int l = as_int(p, "snapshots");
  const double theta = as_double(p, "theta_deg");
  require_positive(p, "snapshots");
  if (mode == "tradeoff") {
    require_positive(p, "elements");
    require_nonempty(p, "bits");
    const int n = as_int(p, "elements");
    auto out = ctx.csv("quantize_tradeoff.csv", {"bits", "snr_db", "bound", "loss_db"});
    for (int b : as_ints(p, "bits")) {
      require(b >= 1, "bits", "must be >= 1");
      for (double snr : as_doubles(p, "snr_db")) {
        out.row({num(b), num(snr), num(crlb_quantized(n, snr, l, theta, b).variance_deg2),
                 num(performance_loss_db(n, snr, l, theta, b))});
      }
    }
    const double ref = as_double(p, "reference_snr_db");
    for (int b : as_ints(p, "bits")) {
      ctx.headline(fmt::format("loss {} bit @ {} dB [dB]", b, num(ref)), num(performance_loss_db(n, ref, l, theta, b)));
    }
    return;
  }
  if (mode == "efficiency") {
    require_positive(p, "antennas");
    const auto pm = power_model_from(p);
    const double snr = as_double(p, "efficiency_snr_db");
    auto out = ctx.csv("quantize_efficiency.csv",
                       {"crlb", "eta", "m0", "M_a", "bits", "high_fraction", "p_total_w"});
    for (int ma : as_ints(p, "subarray_sizes")) {
      for (double frac : as_doubles(p, "high_fractions")) {
        require(frac >= 0.0 && frac <= 1.0, "high_fractions", "must lie in [0, 1]");
        MixedAdcConfig cfg;
        cfg.antennas = as_int(p, "antennas");
        cfg.subarray_size = ma;
        try {
          cfg.validate();
        } catch (const Error&) {
          bad_field("params.subarray_sizes", "must divide the antenna count");
        }
        cfg.m0 = static_cast<int>(std::lround(frac * cfg.chains()));
        cfg.low_bits = as_int(p, "low_bits");
        cfg.high_bits = as_int(p, "high_bits");
        const auto bound = crlb_mixed(cfg, snr, l, theta);
        const double power = power_total(cfg, pm);
        const double eta = energy_efficiency(bound, power);
        out.row({num(bound.variance_deg2), num(eta), num(cfg.m0), num(ma), num(cfg.low_bits), num(frac),
                 num(power)});
        ctx.headline(fmt::format("eta M_a={} high={} [1/deg/W]", ma, num(frac)), num(eta));
      }
    }
    return;
  }
  bad_field("params.mode", "expected tradeoff or efficiency");
}

// ---------------------------------------------------------------- coarray

std::vector<double> spread_angles(int count, double span) {
  std::vector<double> out;
  for (int i = 1; i <= count; ++i) out.push_back(-span + 2.0 * span * i / (count + 1));
  return out;
}

void run_coarray(Context& ctx) {
  const auto& p = ctx.cfg.params;
  for (const char* k : {"n_sources", "angle_span_deg", "snapshots", "tolerance_deg", "grid_step_deg"}) {
    require_positive(p, k);
  }
  const auto geometry = coprime_positions(as_int(p, "p"), as_int(p, "q"));
  const auto structure = difference_coarray(geometry);
  const int n = as_int(p, "n_sources");
  if (n > structure.contiguous_v) {
    throw Error(ErrorCode::OverCapacity,
                fmt::format("{} sources exceed the coarray capacity V={}", n, structure.contiguous_v));
  }
  const auto angles = spread_angles(n, as_double(p, "angle_span_deg"));
  const double snr = as_double(p, "snr_db"), tol = as_double(p, "tolerance_deg");
  const int l = as_int(p, "snapshots");
  const auto grid = make_grid(-90.0, 90.0, as_double(p, "grid_step_deg"));
  const int trials = ctx.cfg.trials;
  std::vector<double> max_err(static_cast<std::size_t>(trials), kNaN);
  std::optional<SpectrumCurve> first;
  parallel_for(max_err.size(), [&](std::size_t t) {
    const auto sc = EmitterScenario::equal_power(angles, snr, l, derive_seed(ctx.cfg.seed, 31, t));
    try {
      const auto rep = coarray_music(synthesize_snapshots(sc, geometry), n, grid);
      if (t == 0) first = rep.spectrum;
      if (static_cast<int>(rep.angles_deg.size()) != n) return;
      double worst = 0.0;
      for (int k = 0; k < n; ++k) {
        worst = std::max(worst, std::abs(rep.angles_deg[static_cast<std::size_t>(k)] -
                                         angles[static_cast<std::size_t>(k)]));
      }
      max_err[t] = worst;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::OverCapacity) throw;
    }
  });
  if (first) {
    auto spec = ctx.csv("coarray_spectrum.csv", {"angle_deg", "value", "method"});
    for (std::size_t i = 0; i < first->grid_deg.size(); ++i) {
      spec.row({num(first->grid_deg[i]), num(first->values[i]), first->method});
    }
  }
  auto rows = ctx.csv("coarray_trials.csv", {"trial", "resolved", "max_error_deg"});
  int success = 0;
  for (int t = 0; t < trials; ++t) {
    const double e = max_err[static_cast<std::size_t>(t)];
    const bool ok = std::isfinite(e) && e <= tol;
    success += ok ? 1 : 0;
    rows.row({num(t), ok ? "1" : "0", num(e)});
  }
  const int ula = as_int(p, "compare_ula_elements");
  ctx.headline("physical sensors", num(geometry.size()));
  ctx.headline("contiguous coarray V", num(structure.contiguous_v));
  ctx.headline("success rate", num(static_cast<double>(success) / trials));
  ctx.headline(fmt::format("{}-element ULA MUSIC model-order cap", ula), num(ula - 1));
}

// ---------------------------------------------------------------- localize

void run_localize(Context& ctx) {
  const auto& p = ctx.cfg.params;
  for (const char* k : {"spacing_m", "mast_height_m"}) require_positive(p, k);
  require_nonempty(p, "distances_m");
  require_nonempty(p, "angle_variances_deg2");
  const auto solver_name = as_string(p, "solver");
  require(solver_name == "lp" || solver_name == "irls", "solver", "expected lp or irls");
  const auto solver = solver_name == "lp" ? L1Solver::LinearProgram : L1Solver::Irls;
  auto out = ctx.csv("localize_rmse.csv",
                     {"angle_variance_deg2", "distance_m", "rmse_m", "crlb_rmse_m", "solver"});
  std::uint64_t series = 0;
  for (double d : as_doubles(p, "distances_m")) {
    require(d > 0.0, "distances_m", "must be positive");
    const auto sc = mast_scenario(d, as_double(p, "spacing_m"), as_double(p, "mast_height_m"),
                                  as_double(p, "target_height_m"));
    for (double v : as_doubles(p, "angle_variances_deg2")) {
      require(v > 0.0, "angle_variances_deg2", "must be positive");
      const double rmse =
          localization_rmse(sc.origins, sc.target, v, ctx.cfg.trials, derive_seed(ctx.cfg.seed, 41, series++), solver);
      const double bound = std::sqrt(crlb_position(sc.origins, sc.target, v).trace);
      out.row({num(v), num(d), num(rmse), num(bound), solver_name});
      ctx.headline(fmt::format("RMSE/CRLB d={} m var={} deg^2", num(d), num(v)), num(rmse / bound));
    }
  }
}

// ---------------------------------------------------------------- crlb

void run_crlb(Context& ctx) {
  const auto& p = ctx.cfg.params;
  require_positive(p, "snapshots");
  const int l = as_int(p, "snapshots");
  const auto kinds = as_strings(p, "kinds");
  auto out = ctx.csv("crlb_curves.csv",
                     {"x_variable", "x", "elements", "theta_deg", "kind", "bits", "variance_deg2"});
  const int m = as_int(p, "per_subarray");
  for (int n : as_ints(p, "elements")) {
    require(n >= 2, "elements", "must be >= 2");
    for (double theta : as_doubles(p, "theta_deg")) {
      for (double snr : as_doubles(p, "snr_db")) {
        const auto sc = EmitterScenario::single(theta, snr, l, 0);
        for (const auto& kind : kinds) {
          if (kind == "full-digital-ula") {
            out.row({"snr_db", num(snr), num(n), num(theta), kind, "", num(crlb_ula_single(n, snr, l, theta).variance_deg2)});
          } else if (kind == "numeric-fim") {
            out.row({"snr_db", num(snr), num(n), num(theta), kind, "",
                     num(crlb_numeric_fim(ArrayGeometry::ula(n), sc, FimModel::exact()).variance_deg2)});
          } else if (kind == "quantized") {
            for (int b : as_ints(p, "bits")) {
              out.row({"snr_db", num(snr), num(n), num(theta), kind, num(b),
                       num(crlb_quantized(n, snr, l, theta, b).variance_deg2)});
            }
          } else if (kind == "hybrid") {
            require(m >= 1 && n % m == 0, "per_subarray", "must divide every element count");
            out.row({"snr_db", num(snr), num(n), num(theta), kind, "",
                     num(crlb_hybrid(n / m, m, snr, l, theta).variance_deg2)});
          } else {
            bad_field("params.kinds", "unknown bound kind '" + kind + "'");
          }
        }
      }
    }
  }
  ctx.headline("bound kinds", std::to_string(kinds.size()));
}

// ---------------------------------------------------------------- resolution

void run_resolution(Context& ctx) {
  const auto& p = ctx.cfg.params;
  for (const char* k : {"elements", "snapshots", "grid_step_deg"}) require_positive(p, k);
  const int n = as_int(p, "elements"), l = as_int(p, "snapshots");
  const auto angles = as_doubles(p, "angles_deg");
  require(angles.size() == 2, "angles_deg", "expects exactly two sources");
  const double step = as_double(p, "grid_step_deg");
  const auto grid = make_grid(-90.0, 90.0, step);
  const auto geometry = ArrayGeometry::ula(n);
  std::vector<ResolvingEstimator> estimators;
  std::vector<std::string> names = as_strings(p, "estimators");
  for (const auto& e : names) {
    if (e == "beamforming") estimators.push_back(ResolvingEstimator::Beamforming);
    else if (e == "music") estimators.push_back(ResolvingEstimator::Music);
    else bad_field("params.estimators", "unknown estimator '" + e + "'");
  }
  const double sep = std::abs(angles[1] - angles[0]);

  auto spec = ctx.csv("resolution_spectrum.csv", {"angle_deg", "value", "method", "snr_db"});
  auto rates = ctx.csv("resolution_rates.csv", {"snr_db", "estimator", "separation_deg", "success_rate", "trials"});
  auto emp = ctx.csv("resolution_empirical.csv",
                     {"snr_db", "estimator", "empirical_deg", "predicted_deg", "beamwidth_deg"});
  const int trials = ctx.cfg.trials;
  for (double snr : as_doubles(p, "snr_db")) {
    const auto sc = EmitterScenario::equal_power(angles, snr, l, derive_seed(ctx.cfg.seed, 51));
    const auto r = sample_covariance(synthesize_snapshots(sc, geometry));
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      const auto curve = estimators[e] == ResolvingEstimator::Beamforming ? beamform_spectrum(r, grid)
                                                                          : music_spectrum(r, 2, grid);
      for (std::size_t i = 0; i < curve.grid_deg.size(); ++i) {
        spec.row({num(curve.grid_deg[i]), num(curve.values[i]), curve.method, num(snr)});
      }
      std::vector<char> ok(static_cast<std::size_t>(trials), 0);
      parallel_for(ok.size(), [&](std::size_t t) {
        const auto s = EmitterScenario::equal_power(angles, snr, l, derive_seed(ctx.cfg.seed, 52, t));
        const auto rt = sample_covariance(synthesize_snapshots(s, geometry));
        const auto c = estimators[e] == ResolvingEstimator::Beamforming ? beamform_spectrum(rt, grid)
                                                                        : music_spectrum(rt, 2, grid);
        ok[t] = resolves_pair(c, angles[0], angles[1]);
      });
      const double rate = static_cast<double>(std::count(ok.begin(), ok.end(), 1)) / trials;
      rates.row({num(snr), names[e], num(sep), num(rate), num(trials)});
      ctx.headline(fmt::format("resolved {} @ {} dB", names[e], num(snr)), num(rate));

      if (p.at("empirical").get<bool>()) {
        ResolutionOptions opt;
        opt.grid_step_deg = step;
        opt.tolerance_deg = as_double(p, "resolution_tolerance_deg");
        opt.max_separation_deg = as_double(p, "max_separation_deg");
        double value = kNaN;
        try {
          value = empirical_resolution(estimators[e], as_int(p, "empirical_elements"), as_int(p, "empirical_snapshots"),
                                       snr, as_int(p, "empirical_trials"), ctx.seed(53), opt);
        } catch (const Error& err) {
          if (err.code() != ErrorCode::EstimationFailed) throw;
        }
        const double bw_e = beamwidth_deg(as_int(p, "empirical_elements"));
        emp.row({num(snr), names[e], num(value), num(resolution_predict(bw_e, snr)), num(bw_e)});
      }
    }
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

const char* to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::Detect: return "detect";
    case ExperimentKind::Estimate: return "estimate";
    case ExperimentKind::Had: return "had";
    case ExperimentKind::QuantizeSweep: return "quantize-sweep";
    case ExperimentKind::Coarray: return "coarray";
    case ExperimentKind::Localize: return "localize";
    case ExperimentKind::Crlb: return "crlb";
    case ExperimentKind::Resolution: return "resolution";
  }
  return "unknown";
}

const std::vector<ExperimentKind>& all_kinds() {
  static const std::vector<ExperimentKind> kinds = {
      ExperimentKind::Detect,  ExperimentKind::Estimate, ExperimentKind::Had,  ExperimentKind::QuantizeSweep,
      ExperimentKind::Coarray, ExperimentKind::Localize, ExperimentKind::Crlb, ExperimentKind::Resolution};
  return kinds;
}

ExperimentKind kind_from_string(const std::string& name) {
  for (auto k : all_kinds()) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorCode::Configuration, "unknown experiment kind '" + name + "'");
}

json kind_defaults(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Detect:
      return {{"elements", 8},
              {"snapshots", 100},
              {"pfa", 0.01},
              {"source_angle_deg", 10.0},
              {"signal_model", "gaussian-iid"},
              {"snr_db", range(-30.0, 0.0, 2.0)},
              {"statistics", {"eig_ratio", "eig_over_noise", "eig_mean", "glrt_energy"}},
              {"calibration_trials", 100000},
              {"reference_snr_db", -10.0}};
    case ExperimentKind::Estimate:
      return {{"array", "ula"},
              {"elements", 16},
              {"spacing", 1.0},
              {"p", 3},
              {"q", 5},
              {"angles_deg", {10.0}},
              {"snr_db", 10.0},
              {"snapshots", 500},
              {"signal_model", "gaussian-iid"},
              {"methods", {"beamforming", "music", "root-music", "esprit"}},
              {"grid_step_deg", 0.1},
              {"capon_loading", 0.0},
              {"monopulse_delta_deg", 4.0}};
    case ExperimentKind::Had:
      return {{"subarrays", 16},
              {"per_subarray", 4},
              {"snr_db", 10.0},
              {"snapshots", 100},
              {"theta_deg", 20.0},
              {"signal_model", "gaussian-iid"},
              {"methods", {"root-music-hdapa", "fast"}},
              {"coarse_step_deg", 5.0},
              {"fine_step_deg", 0.05}};
    case ExperimentKind::QuantizeSweep: {
      const PowerModel pm;
      return {{"mode", "tradeoff"},
              {"elements", 32},
              {"snapshots", 100},
              {"theta_deg", 10.0},
              {"bits", {1, 2, 3, 4, 5, 6, 7, 8}},
              {"snr_db", range(-20.0, 20.0, 5.0)},
              {"reference_snr_db", 0.0},
              {"antennas", 64},
              {"efficiency_snr_db", -10.0},
              {"subarray_sizes", {1, 4}},
              {"high_fractions", {1.0, 0.75, 0.5, 0.25, 0.0}},
              {"low_bits", 1},
              {"high_bits", 12},
              {"power",
               {{"p_rf_chain", pm.p_rf_chain},
                {"p_adc_ref", pm.p_adc_ref},
                {"p_phase_shifter", pm.p_phase_shifter},
                {"p_lna", pm.p_lna},
                {"p_baseband", pm.p_baseband}}}};
    }
    case ExperimentKind::Coarray:
      return {{"p", 3},
              {"q", 5},
              {"n_sources", 16},
              {"angle_span_deg", 60.0},
              {"snr_db", 10.0},
              {"snapshots", 2000},
              {"tolerance_deg", 1.0},
              {"grid_step_deg", 0.1},
              {"compare_ula_elements", 10}};
    case ExperimentKind::Localize:
      return {{"distances_m", {10.0, 20.0, 30.0}},
              {"angle_variances_deg2", {0.001, 0.01, 0.1, 1.0}},
              {"spacing_m", 1.0},
              {"mast_height_m", 10.0},
              {"target_height_m", 1.5},
              {"solver", "lp"}};
    case ExperimentKind::Crlb:
      return {{"elements", {16}},
              {"snr_db", range(-10.0, 30.0, 5.0)},
              {"theta_deg", {0.0}},
              {"snapshots", 100},
              {"kinds", {"full-digital-ula", "numeric-fim", "quantized", "hybrid"}},
              {"bits", {1, 2, 3, 4}},
              {"per_subarray", 4}};
    case ExperimentKind::Resolution:
      return {{"elements", 16},
              {"snapshots", 500},
              {"angles_deg", {0.0, 5.0}},
              {"snr_db", {10.0, 0.0}},
              {"estimators", {"beamforming", "music"}},
              {"grid_step_deg", 0.05},
              {"empirical", true},
              {"empirical_elements", 16},
              {"empirical_snapshots", 100},
              {"empirical_trials", 100},
              {"resolution_tolerance_deg", 0.1},
              {"max_separation_deg", 30.0}};
  }
  return json::object();
}

int default_trials(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Detect: return 2000;
    case ExperimentKind::Localize: return 2000;
    case ExperimentKind::Crlb: return 1;
    default: return 200;
  }
}

ScenarioConfig parse_config(const json& doc, std::optional<ExperimentKind> kind_override) {
  if (!doc.is_object()) throw Error(ErrorCode::Configuration, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "kind" && key != "seed" && key != "trials" && key != "output" && key != "params") {
      bad_field(key, "unknown field");
    }
  }
  ScenarioConfig cfg;
  if (doc.contains("kind")) {
    if (!doc["kind"].is_string()) bad_field("kind", "expected a string");
    cfg.kind = kind_from_string(doc["kind"].get<std::string>());
    if (kind_override && *kind_override != cfg.kind) {
      bad_field("kind", fmt::format("file says {} but {} was requested", to_string(cfg.kind),
                                    to_string(*kind_override)));
    }
  } else if (kind_override) {
    cfg.kind = *kind_override;
  } else {
    bad_field("kind", "missing");
  }
  if (!doc.contains("seed")) bad_field("seed", "missing (a master seed is required)");
  if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<std::int64_t>() >= 0)) {
    bad_field("seed", "expected a non-negative integer");
  }
  cfg.seed = doc["seed"].get<std::uint64_t>();
  cfg.trials = default_trials(cfg.kind);
  if (doc.contains("trials")) {
    if (!doc["trials"].is_number_integer() || doc["trials"].get<std::int64_t>() < 1) {
      bad_field("trials", "expected a positive integer");
    }
    cfg.trials = doc["trials"].get<int>();
  }
  if (doc.contains("output")) {
    if (!doc["output"].is_string()) bad_field("output", "expected a string");
    cfg.output_dir = doc["output"].get<std::string>();
  }
  cfg.params = normalize(kind_defaults(cfg.kind), doc.value("params", json::object()), "params");
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> kind_override) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Configuration, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Configuration, path.string() + ": " + e.what());
  }
  return parse_config(doc, kind_override);
}

std::string config_hash(const ScenarioConfig& cfg) {
  const json canonical = {{"kind", to_string(cfg.kind)},
                          {"seed", cfg.seed},
                          {"trials", cfg.trials},
                          {"params", cfg.params}};
  return fmt::format("{:016x}", fnv1a(canonical.dump()));
}

RunSummary run_experiment(const ScenarioConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  Context ctx{cfg, config_hash(cfg), {}};
  ctx.headline("kind", to_string(cfg.kind));
  ctx.headline("config_hash", ctx.hash);
  try {
    switch (cfg.kind) {
      case ExperimentKind::Detect: run_detect(ctx); break;
      case ExperimentKind::Estimate: run_estimate(ctx); break;
      case ExperimentKind::Had: run_had(ctx); break;
      case ExperimentKind::QuantizeSweep: run_quantize(ctx); break;
      case ExperimentKind::Coarray: run_coarray(ctx); break;
      case ExperimentKind::Localize: run_localize(ctx); break;
      case ExperimentKind::Crlb: run_crlb(ctx); break;
      case ExperimentKind::Resolution: run_resolution(ctx); break;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Configuration, std::string("malformed parameters: ") + e.what());
  }
  return ctx.summary;
}

const std::vector<Preset>& builtin_presets() {
  static const std::vector<Preset> presets = [] {
    std::vector<Preset> v;
    v.push_back({"detection-curves", "P_d curves of the four eigenvalue statistics, N=32, L=100, P_fa=0.01",
                 {{"kind", "detect"},
                  {"seed", 3},
                  {"trials", 2000},
                  {"output", "out/detection-curves"},
                  {"params", {{"elements", 32}, {"snapshots", 100}, {"snr_db", range(-30.0, 0.0, 2.0)}}}}});
    v.push_back({"two-source-resolution", "beamforming vs MUSIC, sources at 0 and 5 deg, N=16, L=500",
                 {{"kind", "resolution"},
                  {"seed", 5},
                  {"trials", 500},
                  {"output", "out/two-source-resolution"},
                  {"params", {{"snr_db", {10.0, 0.0}}}}}});
    v.push_back({"hybrid-fast-vs-original", "root-MUSIC-HDAPA vs fast elimination, K=16, M=4, L=100 per block",
                 {{"kind", "had"},
                  {"seed", 7},
                  {"trials", 2000},
                  {"output", "out/hybrid-fast-vs-original"},
                  {"params", {{"methods", {"root-music-hdapa", "fast", "hdapa", "dapa"}}}}}});
    v.push_back({"coprime-16-sources", "16 sources on a 12-sensor (3,5) co-prime array, SNR 10 dB, L=2000",
                 {{"kind", "coarray"}, {"seed", 10}, {"trials", 200}, {"output", "out/coprime-16-sources"}}});
    v.push_back({"bits-tradeoff", "quantized bound and loss versus bits and SNR, N=32",
                 {{"kind", "quantize-sweep"},
                  {"seed", 11},
                  {"trials", 1},
                  {"output", "out/bits-tradeoff"},
                  {"params", {{"mode", "tradeoff"}}}}});
    v.push_back({"mast-localization", "3 subarrays 1 m apart, targets at 10/20/30 m, N_t=12000",
                 {{"kind", "localize"}, {"seed", 13}, {"trials", 12000}, {"output", "out/mast-localization"}}});
    v.push_back({"mixed-adc-efficiency", "energy efficiency versus high-resolution ADC share, 64 antennas",
                 {{"kind", "quantize-sweep"},
                  {"seed", 14},
                  {"trials", 1},
                  {"output", "out/mixed-adc-efficiency"},
                  {"params", {{"mode", "efficiency"}}}}});
    v.push_back({"crlb-curves", "closed-form, numeric, quantized and hybrid bounds versus SNR",
                 {{"kind", "crlb"}, {"seed", 1}, {"output", "out/crlb-curves"}}});
    v.push_back({"estimate-single", "MUSIC, root-MUSIC, ESPRIT and beamforming at 10 deg, N=16, L=500",
                 {{"kind", "estimate"}, {"seed", 2}, {"trials", 200}, {"output", "out/estimate-single"}}});
    return v;
  }();
  return presets;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : builtin_presets()) {
    if (p.name == name) return p;
  }
  throw Error(ErrorCode::Configuration, "unknown preset '" + name + "'");
}

std::string list_builtin_scenarios() {
  std::ostringstream os;
  os << fmt::format("{:<20} {:<15} {}\n", "preset", "kind", "description");
  for (const auto& p : builtin_presets()) {
    os << fmt::format("{:<20} {:<15} {}\n", p.name, p.config.at("kind").get<std::string>(), p.description);
  }
  return os.str();
}

}  // namespace doafoundry
