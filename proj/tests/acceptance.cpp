// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// status if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "rfa/experiment.hpp"
#include "rfa/verification.hpp"

using namespace rfa;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [miss]");
  }
};

std::string num(double v, const char* f = "%.4g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int failures = 0;

void report(int id, const char* title, const Outcome& o) {
  std::printf("criterion %d: %s  %s\n    %s\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str());
  std::fflush(stdout);
  failures += !o.pass;
}

const PointResult* find(const std::vector<PointResult>& v, double voltage, double ratio) {
  for (const auto& p : v)
    if (p.point.voltage == voltage && p.point.ratio == ratio) return &p;
  return nullptr;
}

double assembly_order_difference() {
  const Mesh mesh = build_geometry(ModelGeometry{});
  const MaterialTable mat;
  const auto K1 = assemble_stiffness(mesh, mat.conductivity());
  const auto M1 = assemble_mass(mesh, mat.rho_c());
  Mesh shuffled = mesh;
  std::mt19937 rng(2024);
  std::shuffle(shuffled.triangles.begin(), shuffled.triangles.end(), rng);
  const auto K2 = assemble_stiffness(shuffled, mat.conductivity());
  const auto M2 = assemble_mass(shuffled, mat.rho_c());
  double worst = 0.0;
  for (const auto& t : K1.triplets()) worst = std::max(worst, std::abs(K2(t.row, t.col) - t.value) / K1.max_abs());
  for (const auto& t : M1.triplets()) worst = std::max(worst, std::abs(M2(t.row, t.col) - t.value) / M1.max_abs());
  if (K1.nonzeros() != K2.nonzeros() || M1.nonzeros() != M2.nonzeros()) worst = 1.0;
  return worst;
}

}  // namespace

int main() {
  const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const SimulationConfig base;

  {
    Outcome o;
    Stopwatch w;
    const double d = tau_zero_difference(base, 10.0, 0.0);
    const double s = w.seconds();
    o.require(d < 1e-6, "max |T_HBE(tau=0) - T_BE| = " + num(d) + " K < 1e-6");
    o.require(s < 30.0, "runtime " + num(s, "%.1f") + " s < 30");
    report(1, "tau = 0 equivalence", o);
  }
  {
    Outcome o;
    Stopwatch w;
    const auto c = check_slab_series();
    const double s = w.seconds();
    o.require(c.measured < 0.01, "relative L2 = " + num(c.measured) + " < 0.01");
    o.require(s < 10.0, "runtime " + num(s, "%.1f") + " s < 10");
    report(2, "1D parabolic oracle", o);
  }
  {
    Outcome o;
    Stopwatch w;
    const auto f = measure_front_speed();
    const double s = w.seconds();
    const double rel = std::abs(f.fem - f.expected) / f.expected;
    o.require(rel < 0.05, "front speed " + num(f.fem) + " m/s vs " + num(f.expected) + " m/s, error " +
                              num(100 * rel, "%.2f") + " % < 5 %");
    o.require(s < 30.0, "runtime " + num(s, "%.1f") + " s < 30");
    report(3, "hyperbolic front speed", o);
  }

  SweepSpec conv;
  conv.group = SweepGroup::Convection;
  SweepSpec volt;
  volt.group = SweepGroup::Voltage;
  Stopwatch sweep_clock;
  const auto conv_res = run_sweep(conv, base, jobs);
  const double conv_seconds = sweep_clock.seconds();
  const auto volt_res = run_sweep(volt, base, jobs);
  std::printf("(sweeps: %zu + %zu points, %.1f s total)\n", conv_res.size(), volt_res.size(), sweep_clock.seconds());

  const PointResult* ref = find(conv_res, 30.0, 1.0);
  {
    Outcome o;
    if (!ref || !ref->comparison) {
      o.require(false, "reference run failed: " + (ref ? ref->error : std::string("missing")));
    } else {
      const auto& c = *ref->comparison;
      // first sample after 5 s where either lesion exists
      std::size_t k = 0;
      while (k < c.t.size() && (c.t[k] < 5.0 || (c.volume_be[k] == 0.0 && c.volume_hbe[k] == 0.0))) ++k;
      const bool early = k < c.t.size() && c.volume_be[k] > c.volume_hbe[k];
      o.require(early, "BE > HBE early (first lesion sample t = " + (k < c.t.size() ? num(c.t[k]) : "none") + " s)");
      o.require(c.crossover_time && *c.crossover_time > 15.0 && *c.crossover_time < 50.0 && c.crossover_count == 1,
                "lesion crossover " + (c.crossover_time ? num(*c.crossover_time) : "none") + " s, " +
                    std::to_string(c.crossover_count) + " sign change(s), need one in (15, 50)");
      o.require(c.T_max_crossover_time && *c.T_max_crossover_time > 5.0 && *c.T_max_crossover_time < 45.0,
                "T_max crossover " + (c.T_max_crossover_time ? num(*c.T_max_crossover_time) : "none") +
                    " s in (5, 45)");
      // each sweep point is two runs; the whole group bounds the per-method time
      o.require(conv_seconds < 300.0, "runtime per method <= " + num(conv_seconds, "%.1f") + " s < 300");
    }
    report(4, "crossover reproduction (30 V, ratio 1.0)", o);
  }
  {
    Outcome o;
    for (const auto& p : conv_res) {
      if (p.point.ratio == 0.0) continue;
      const double peak = p.comparison ? p.comparison->peak_ratio : 0.0;
      o.require(peak >= 0.15, "ratio " + num(p.point.ratio) + ": peak " + num(peak, "%.3f") +
                                  (p.comparison ? " at " + num(p.comparison->t_peak) + " s" : std::string()));
    }
    report(5, "difference-ratio magnitude >= 0.15 on [30, 120] s", o);
  }
  {
    Outcome o;
    const PointResult* p = find(conv_res, 30.0, 0.0);
    if (!p || !p->comparison) {
      o.require(false, "ratio-0 run failed: " + (p ? p->error : std::string("missing")));
    } else {
      const auto& c = *p->comparison;
      double worst = 0.0;
      bool ordered = true;
      for (std::size_t k = 0; k < c.t.size(); ++k) {
        ordered = ordered && c.volume_be[k] >= c.volume_hbe[k];
        worst = std::min(worst, c.volume_be[k] - c.volume_hbe[k]);
      }
      o.require(ordered, "min(V_BE - V_HBE) = " + num(worst * 1e9) + " mm^3 >= 0");
      o.require(c.T_max_be.back() > 100.0, "BE T_max at 120 s = " + num(c.T_max_be.back()) + " C > 100");
    }
    report(6, "ratio-0 ordering", o);
  }
  {
    Outcome o;
    auto final_volume = [](const PointResult& p) {
      return p.be.records.empty() ? std::nan("") : p.be.records.back().lesion_volume;
    };
    auto final_volume_hbe = [](const PointResult& p) {
      return p.hbe.records.empty() ? std::nan("") : p.hbe.records.back().lesion_volume;
    };
    auto trend = [&](const std::vector<PointResult>& res, bool increasing, const std::string& name) {
      bool ok = true;
      std::string s;
      for (std::size_t i = 0; i < res.size(); ++i) {
        const double vb = final_volume(res[i]), vh = final_volume_hbe(res[i]);
        s += (i ? ", " : "") + num(vb * 1e9, "%.1f") + "/" + num(vh * 1e9, "%.1f");
        if (i == 0) continue;
        const double pb = final_volume(res[i - 1]), ph = final_volume_hbe(res[i - 1]);
        ok = ok && (increasing ? (vb >= pb && vh >= ph) : (vb <= pb && vh <= ph));
      }
      o.require(ok, name + " (BE/HBE mm^3: " + s + ")");
    };
    trend(conv_res, false, "lesion volume at 120 s non-increasing in ratio");
    trend(volt_res, true, "lesion volume at 120 s non-decreasing in voltage");
    auto crossover_trend = [&](const std::vector<PointResult>& res, bool by_ratio, const std::string& name) {
      bool ok = true;
      std::string s;
      double prev = std::numeric_limits<double>::infinity();
      for (const auto& p : res) {
        const double x = by_ratio ? p.point.ratio : p.point.voltage;
        const auto t = p.comparison ? p.comparison->crossover_time : std::nullopt;
        s += (s.empty() ? "" : ", ") + num(x) + ": " + (t ? num(*t, "%.1f") : std::string("none"));
        // a point without any crossover (ratio 0) has nothing to order
        if (!t) continue;
        ok = ok && *t <= prev;
        prev = *t;
      }
      o.require(ok, name + " (" + s + " s)");
    };
    crossover_trend(conv_res, true, "crossover time non-increasing in ratio");
    crossover_trend(volt_res, false, "crossover time non-increasing in voltage");
    report(7, "monotone trends", o);
  }
  {
    Outcome o;
    if (!ref || ref->be.records.empty()) {
      o.require(false, "reference run failed");
    } else {
      const auto& e = ref->be.records.back().E_joule;
      const double frac = e[2] / (e[0] + e[1] + e[2]);
      o.require(frac > 0.5, "blood share of Joule energy at 120 s = " + num(frac, "%.3f") + " > 0.5");
    }
    report(8, "energy partition", o);
  }
  {
    Outcome o;
    const auto bal = energy_balance(base, 200);
    o.require(bal.worst_relative_residual <= 1e-6,
              "energy residual " + num(bal.worst_relative_residual) + " <= 1e-6 per step");
    o.require(bal.min_temperature >= 36.95, "BE minimum temperature " + num(bal.min_temperature, "%.6f") + " C");
    const double order_diff = assembly_order_difference();
    o.require(order_diff <= 1e-13, "assembly order difference " + num(order_diff) + " <= 1e-13");
    const auto mms = check_manufactured_order();
    o.require(mms.measured >= 1.8, "manufactured order " + num(mms.measured, "%.3f") + " >= 1.8");

    SimulationConfig fine = base;
    fine.dt = 0.05;
    fine.output_stride = 20;
    const auto fine_run = run_transient(fine);
    if (ref && !ref->be.records.empty() && fine_run.ok()) {
      const double v0 = ref->be.records.back().lesion_volume, v1 = fine_run.records.back().lesion_volume;
      const double rel = std::abs(v1 - v0) / v0;
      o.require(rel < 0.01, "dt halving changes 120 s lesion by " + num(100 * rel, "%.3f") + " % < 1 %");
    } else {
      o.require(false, "dt halving run failed");
    }
    SimulationConfig rerun = base;
    rerun.applied_voltage = 30.0;
    const std::string a = run_csv(rerun, run_transient(rerun));
    const std::string b = ref ? run_csv(ref->be_config, ref->be) : std::string();
    o.require(a == b, "rerun CSV byte-identical to the sweep's run (" + std::to_string(a.size()) + " bytes)");
    report(9, "property suite", o);
  }

  std::printf("%d of 9 criteria failed\n", failures);
  return failures ? 1 : 0;
}
