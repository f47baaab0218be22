#include "uavrsma/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace uavrsma {

namespace {

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_num(const std::string& tok, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw std::runtime_error("spec line " + std::to_string(line_no) + ": bad number '" + tok + "'");
  return v;
}

/// Deterministic double formatting used for every persisted artifact.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

const char* axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Trace: return "trace";
    case SweepAxis::Users: return "num_users";
    case SweepAxis::Antennas: return "num_antennas";
    case SweepAxis::Slots: return "num_slots";
    case SweepAxis::PMax: return "p_max_dbm";
    case SweepAxis::Omega: return "omega_mbit";
  }
  return "?";
}

ExperimentSpec parse_spec(std::istream& is) {
  ExperimentSpec spec;
  std::string section;
  std::string line;
  int line_no = 0;
  bool have_values = false;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("spec line " + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "scenario" && section != "qoe" && section != "channel" &&
          section != "sweep" && section != "output")
        fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail("empty key or value");
    const auto toks = split_ws(value);
    auto num = [&](size_t i = 0) { return parse_num(toks.at(i), line_no); };
    auto count = [&]() {
      const double v = num();
      if (v != std::floor(v) || v < 0) fail("'" + key + "' must be a nonnegative integer");
      return static_cast<int>(v);
    };
    auto pair2 = [&]() {
      if (toks.size() != 2) fail("'" + key + "' needs two numbers");
      return Vec2(num(0), num(1));
    };

    if (section == "scenario") {
      if (key == "num_users") spec.cfg.num_users = count();
      else if (key == "num_eves") spec.cfg.num_eves = count();
      else if (key == "num_antennas") spec.cfg.num_antennas = count();
      else if (key == "num_slots") spec.cfg.num_slots = count();
      else if (key == "slot_seconds") spec.cfg.slot_seconds = num();
      else if (key == "p_max_dbm") spec.cfg.p_max_watt = dbm_to_watt(num());
      else if (key == "eta_bit_s_hz") spec.cfg.eta = num();
      else if (key == "conv_eps") spec.cfg.conv_eps = num();
      else if (key == "max_outer_iters") spec.cfg.max_outer_iters = count();
      else if (key == "max_inner_iters") spec.cfg.max_inner_iters = count();
      else if (key == "uav_speed_mps") spec.cfg.uav_speed = num();
      else if (key == "uav_altitude_m") spec.cfg.uav_altitude = num();
      else if (key == "q_start_m") spec.cfg.q_start = pair2();
      else if (key == "q_final_m") spec.cfg.q_final = pair2();
      else if (key == "square_side_m") spec.square_side_m = num();
      else fail("unknown scenario key '" + key + "'");
    } else if (section == "qoe") {
      if (key == "lambda1") spec.qoe.lambda1 = num();
      else if (key == "lambda2") spec.qoe.lambda2 = num();
      else if (key == "bandwidth_khz") spec.qoe.bandwidth_hz = num() * 1e3;
      else if (key == "omega_mbit") spec.qoe.content_bits = num() * 1e6;
      else if (key == "mos_floor") spec.qoe.mos_floor = num();
      else fail("unknown qoe key '" + key + "'");
    } else if (section == "channel") {
      if (key == "alpha") spec.params.alpha = num();
      else if (key == "rician") spec.params.rician = num();
      else if (key == "noise_dbm") spec.params.noise_power = dbm_to_watt(num());
      else if (key == "csi_eps") spec.params.csi_eps = num();
      else if (key == "carrier_wavelength_m") spec.params.carrier_wavelength = num();
      else if (key == "shadowing_db") spec.params.shadowing_sigma_db = num();
      else fail("unknown channel key '" + key + "'");
    } else if (section == "sweep") {
      if (key == "axis") {
        bool found = false;
        for (SweepAxis a : {SweepAxis::Trace, SweepAxis::Users, SweepAxis::Antennas,
                            SweepAxis::Slots, SweepAxis::PMax, SweepAxis::Omega})
          if (value == axis_name(a)) {
            spec.axis = a;
            found = true;
          }
        if (!found) fail("unknown sweep axis '" + value + "'");
      } else if (key == "values") {
        spec.values.clear();
        for (size_t i = 0; i < toks.size(); ++i) spec.values.push_back(num(i));
        have_values = true;
      } else if (key == "seeds") {
        spec.seeds.clear();
        for (size_t i = 0; i < toks.size(); ++i) {
          const double v = num(i);
          if (v != std::floor(v) || v < 0) fail("seeds must be nonnegative integers");
          spec.seeds.push_back(static_cast<unsigned long>(v));
        }
      } else {
        fail("unknown sweep key '" + key + "'");
      }
    } else if (section == "output") {
      if (key == "dir") spec.output_dir = value;
      else fail("unknown output key '" + key + "'");
    } else {
      fail("key outside any section");
    }
  }
  if (spec.axis == SweepAxis::Trace && !have_values)
    spec.values = {static_cast<double>(spec.cfg.num_slots)};
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open spec file '" + path + "'");
  return parse_spec(f);
}

void apply_sweep_value(const ExperimentSpec& spec, double value, NetworkConfig& cfg,
                       QoEParams& qoe) {
  switch (spec.axis) {
    case SweepAxis::Trace:
    case SweepAxis::Slots: cfg.num_slots = static_cast<int>(std::lround(value)); break;
    case SweepAxis::Users: cfg.num_users = static_cast<int>(std::lround(value)); break;
    case SweepAxis::Antennas: cfg.num_antennas = static_cast<int>(std::lround(value)); break;
    case SweepAxis::PMax: cfg.p_max_watt = dbm_to_watt(value); break;
    case SweepAxis::Omega: qoe.content_bits = value * 1e6; break;
  }
}

std::vector<std::string> validate_spec(const ExperimentSpec& spec) {
  std::vector<std::string> problems;
  if (spec.values.empty()) problems.push_back("sweep values list is empty");
  if (spec.seeds.empty()) problems.push_back("seed list is empty");
  if (spec.output_dir.empty()) problems.push_back("output dir is empty");
  if (!(spec.square_side_m > 0)) problems.push_back("square_side_m must be positive");
  const bool counts = spec.axis == SweepAxis::Trace || spec.axis == SweepAxis::Users ||
                      spec.axis == SweepAxis::Antennas || spec.axis == SweepAxis::Slots;
  for (double v : spec.values) {
    if (counts && (v != std::floor(v) || v < 1)) {
      problems.push_back("value " + fmt(v) + ": " + std::string(axis_name(spec.axis)) +
                         " must be a positive integer");
      continue;
    }
    NetworkConfig cfg = spec.cfg;
    QoEParams qoe = spec.qoe;
    apply_sweep_value(spec, v, cfg, qoe);
    for (const auto& p : validate_config(cfg, qoe, spec.params))
      problems.push_back("value " + fmt(v) + ": " + p);
  }
  return problems;
}

namespace {

std::string canonical_dump(const ExperimentSpec& s) {
  std::ostringstream os;
  os << axis_name(s.axis) << ' ' << s.output_dir << ' ' << s.square_side_m << ' ';
  for (double v : s.values) os << fmt(v) << ' ';
  for (unsigned long v : s.seeds) os << v << ' ';
  const NetworkConfig& c = s.cfg;
  for (double v : {static_cast<double>(c.num_users), static_cast<double>(c.num_eves),
                   static_cast<double>(c.num_antennas), static_cast<double>(c.num_slots),
                   c.slot_seconds, c.p_max_watt, c.eta, c.conv_eps,
                   static_cast<double>(c.max_outer_iters), c.uav_speed, c.uav_altitude,
                   c.q_start.x(), c.q_start.y(), c.q_final.x(), c.q_final.y(), s.qoe.lambda1,
                   s.qoe.lambda2, s.qoe.bandwidth_hz, s.qoe.content_bits, s.qoe.mos_floor,
                   s.params.alpha, s.params.rician, s.params.noise_power, s.params.csi_eps,
                   s.params.carrier_wavelength, s.params.shadowing_sigma_db})
    os << fmt(v) << ' ';
  return os.str();
}

struct RunOut {
  RunStatus st;
  std::vector<OuterRecord> history;
};

bool looks_like_solver_failure(const std::string& msg) {
  return msg.find("convex restriction") != std::string::npos ||
         msg.find("conic") != std::string::npos;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, std::ostream& log) {
  const auto problems = validate_spec(spec);
  if (!problems.empty()) {
    std::string msg = "invalid experiment spec:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
  }
  namespace fs = std::filesystem;
  fs::create_directories(spec.output_dir);

  std::vector<std::pair<double, unsigned long>> jobs;
  for (double v : spec.values)
    for (unsigned long s : spec.seeds) jobs.emplace_back(v, s);
  std::vector<RunOut> outs(jobs.size());

  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("UAVRSMA_WORKERS")) workers = std::atoi(env);
  workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      auto& out = outs[i];
      out.st.sweep_value = jobs[i].first;
      out.st.seed = jobs[i].second;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        NetworkConfig cfg = spec.cfg;
        QoEParams qoe = spec.qoe;
        apply_sweep_value(spec, jobs[i].first, cfg, qoe);
        const Geometry geo = sample_geometry(cfg, spec.square_side_m, jobs[i].second);
        SolutionState sol = run_aom(spec.params, geo, cfg, qoe, jobs[i].second, spec.ao);
        out.st.ok = true;
        out.st.converged = sol.converged;
        out.st.outer_iters = static_cast<int>(sol.history.size());
        out.st.sum_mos = sol.sum_mos;
        out.history = std::move(sol.history);
      } catch (const std::exception& e) {
        out.st.error = e.what();
        out.st.solver_failure = looks_like_solver_failure(out.st.error);
      }
      out.st.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  ExperimentResult result;
  for (auto& out : outs) {
    result.runs.push_back(out.st);
    result.all_ok = result.all_ok && out.st.ok;
    result.any_solver_failure = result.any_solver_failure || out.st.solver_failure;
    log << "value " << fmt(out.st.sweep_value) << " seed " << out.st.seed << ": "
        << (out.st.ok ? "sum_mos " + fmt(out.st.sum_mos) + " in " +
                            std::to_string(out.st.outer_iters) + " outer iters"
                      : "FAILED " + out.st.error)
        << '\n';
  }

  {
    std::ofstream hist(fs::path(spec.output_dir) / "history.csv");
    hist << "sweep_value,seed,outer_iter,sum_mos,wall_ms\n";
    for (const auto& out : outs)
      for (const auto& h : out.history)
        hist << fmt(out.st.sweep_value) << ',' << out.st.seed << ',' << h.outer_iter << ','
             << fmt(h.sum_mos) << ',' << fmt(h.wall_ms) << '\n';
  }
  {
    std::ofstream sum(fs::path(spec.output_dir) / "summary.csv");
    sum << "sweep_value,mean_sum_mos,std_sum_mos\n";
    for (double v : spec.values) {
      std::vector<double> xs;
      for (const auto& out : outs)
        if (out.st.ok && out.st.sweep_value == v) xs.push_back(out.st.sum_mos);
      if (xs.empty()) continue;
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      const double stddev = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
      sum << fmt(v) << ',' << fmt(mean) << ',' << fmt(stddev) << '\n';
    }
  }
  {
    std::ofstream man(fs::path(spec.output_dir) / "MANIFEST");
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical_dump(spec))));
    man << "uavrsma " << kLibraryVersion << "\n";
    man << "spec_hash " << hash << "\n";
    man << "axis " << axis_name(spec.axis) << "\n";
    man << "values";
    for (double v : spec.values) man << ' ' << fmt(v);
    man << "\nseeds";
    for (unsigned long s : spec.seeds) man << ' ' << s;
    size_t ok = 0;
    for (const auto& out : outs) ok += out.st.ok ? 1 : 0;
    man << "\nruns " << ok << "/" << outs.size() << "\n";
    for (const auto& out : outs) {
      man << "run value=" << fmt(out.st.sweep_value) << " seed=" << out.st.seed
          << " status=" << (out.st.ok ? "ok" : "failed")
          << " converged=" << (out.st.converged ? 1 : 0)
          << " outer_iters=" << out.st.outer_iters << " sum_mos=" << fmt(out.st.sum_mos)
          << " wall_ms=" << fmt(out.st.wall_ms);
      if (!out.st.ok) man << " error=" << out.st.error;
      man << "\n";
    }
  }
  return result;
}

}  // namespace uavrsma
