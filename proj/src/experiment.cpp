#include "ehaoi/experiment.hpp"

#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ehaoi/aoi_formulas.hpp"
#include "ehaoi/aoi_optimizer.hpp"
#include "ehaoi/energy_chain.hpp"
#include "ehaoi/fbl_coding.hpp"
#include "ehaoi/net_sim.hpp"

namespace ehaoi {

using json = nlohmann::ordered_json;

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::SteadyState: return "SteadyState";
    case ExperimentKind::Threshold: return "Threshold";
    case ExperimentKind::AoiCurve: return "AoiCurve";
    case ExperimentKind::Optimize: return "Optimize";
    case ExperimentKind::Simulate: return "Simulate";
    case ExperimentKind::Sweep: return "Sweep";
  }
  return "?";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadConfig: return 2;
    case ErrorKind::NonConvergence:
    case ErrorKind::IterationBudgetExceeded: return 4;
    case ErrorKind::Io: return 5;
    default: return 3;
  }
}

const char* error_category(ErrorKind kind) {
  switch (exit_code(kind)) {
    case 2: return "bad-config";
    case 4: return "non-convergence";
    case 5: return "io";
    default: return "out-of-regime";
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string fmt_int(long long v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

json default_params() {
  json p;
  p["network"] = {{"lambda", 0.01}, {"N", 1}, {"B", 1}, {"xi", 0.5}, {"eta", 0.5}};
  p["link"] = {{"alpha", 3.8},   {"r", 3.0},       {"tx_snr_db", 13.0},
               {"noise_free", false}, {"R_t", 0.825}, {"eps", 1e-6},
               {"k", 100},       {"approx_threshold", false}, {"theta", 0.0}};
  p["coding"] = {{"k", 100}, {"N", 1}, {"R_t", 0.825}, {"eps", 1e-6}};
  p["optimizer"] = {{"tol", 1e-6}, {"max_iter", 50}, {"n_upper", 200}};
  p["sim"] = {{"enabled", true},  {"slots", 100000}, {"warmup", -1},      {"realizations", 20},
              {"seed", 1},        {"census", 1.0},   {"side", 100.0},     {"boundary", "torus"},
              {"cutoff", 0.0},    {"threads", 1},    {"single_link", false}};
  p["sim"]["arrival"] = {{"kind", "bernoulli"}, {"e_max", 1},  {"xi_hat", 0.5}, {"xi_good", 0.0},
                         {"xi_bad", 0.0},       {"p_gb", 0.0}, {"p_bg", 0.0}};
  p["sim"]["update"] = {{"kind", "bernoulli"}, {"period", 1}};
  return p;
}

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::BadConfig, msg); }

bool integral(const json& v) {
  return v.is_number_integer() || (v.is_number_float() && std::isfinite(v.get<double>()) &&
                                   std::floor(v.get<double>()) == v.get<double>());
}

// Copies a user value onto a default slot, keeping the default's type.
void assign(json& slot, const json& v, const std::string& path) {
  if (slot.is_boolean()) {
    if (!v.is_boolean()) bad(path + " must be a boolean");
    slot = v;
  } else if (slot.is_string()) {
    if (!v.is_string()) bad(path + " must be a string");
    slot = v;
  } else if (slot.is_number_integer()) {
    if (!v.is_number() || !integral(v)) bad(path + " must be an integer");
    slot = static_cast<long long>(v.get<double>());
    if (v.is_number_integer()) slot = v.get<long long>();
  } else {
    if (!v.is_number() || !std::isfinite(v.get<double>())) bad(path + " must be a finite number");
    slot = v.get<double>();
  }
}

void merge(json& base, const json& user, const std::string& prefix) {
  if (!user.is_object()) bad(prefix + " must be an object");
  for (const auto& [key, v] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) bad("unknown parameter " + path);
    if (base[key].is_object())
      merge(base[key], v, path);
    else
      assign(base[key], v, path);
  }
}

json* lookup(json& root, const std::string& path) {
  json* cur = &root;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!cur->is_object() || !cur->contains(part)) return nullptr;
    cur = &(*cur)[part];
  }
  return cur->is_object() ? nullptr : cur;
}

ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::SteadyState, ExperimentKind::Threshold, ExperimentKind::AoiCurve,
                 ExperimentKind::Optimize, ExperimentKind::Simulate, ExperimentKind::Sweep})
    if (s == to_string(k)) return k;
  bad("unknown kind " + s);
}

LinkConfig link_from(const json& p) {
  const json& l = p["link"];
  LinkConfig link;
  link.alpha = l["alpha"].get<double>();
  link.r = l["r"].get<double>();
  link.tx_snr = l["noise_free"].get<bool>() ? std::numeric_limits<double>::infinity()
                                            : db_to_linear(l["tx_snr_db"].get<double>());
  link.R_t = l["R_t"].get<double>();
  link.eps = l["eps"].get<double>();
  link.k = l["k"].get<int>();
  link.approx_threshold = l["approx_threshold"].get<bool>();
  link.theta = l["theta"].get<double>();
  if (!(link.alpha > 2.0) || !(link.r > 0.0) || link.k < 1 || !(link.eps >= 0.0 && link.eps < 1.0))
    bad("link parameters out of range");
  return link;
}

NetworkConfig network_from(const json& p) {
  const json& n = p["network"];
  NetworkConfig net;
  net.lambda = n["lambda"].get<double>();
  net.N = n["N"].get<int>();
  net.B = n["B"].get<int>();
  net.xi = n["xi"].get<double>();
  net.eta = n["eta"].get<double>();
  if (!(net.lambda >= 0.0)) bad("network.lambda must be non-negative");
  return net;
}

SimConfig sim_from(const json& p) {
  const json& s = p["sim"];
  SimConfig sim;
  sim.slots = s["slots"].get<long long>();
  sim.warmup = s["warmup"].get<long long>();
  sim.realizations = s["realizations"].get<int>();
  sim.seed = s["seed"].get<std::uint64_t>();
  sim.census = s["census"].get<double>();
  sim.side = s["side"].get<double>();
  const std::string boundary = s["boundary"].get<std::string>();
  if (boundary == "torus")
    sim.boundary = Boundary::Torus;
  else if (boundary == "planar")
    sim.boundary = Boundary::Planar;
  else
    bad("sim.boundary must be torus or planar");
  sim.cutoff = s["cutoff"].get<double>();
  sim.threads = s["threads"].get<int>();
  sim.single_link = s["single_link"].get<bool>();
  const json& a = s["arrival"];
  const std::string ak = a["kind"].get<std::string>();
  if (ak == "binomial")
    sim.arrival = ArrivalPattern::binomial(a["e_max"].get<int>(), a["xi_hat"].get<double>());
  else if (ak == "markov")
    sim.arrival = ArrivalPattern::markov(a["xi_good"].get<double>(), a["xi_bad"].get<double>(),
                                         a["p_gb"].get<double>(), a["p_bg"].get<double>());
  else if (ak != "bernoulli")
    bad("sim.arrival.kind must be bernoulli, binomial or markov");
  const json& u = s["update"];
  const std::string uk = u["kind"].get<std::string>();
  if (uk == "periodic")
    sim.update = UpdatePattern::periodic(u["period"].get<int>());
  else if (uk != "bernoulli")
    bad("sim.update.kind must be bernoulli or periodic");
  return sim;
}

OptimizerSettings optimizer_from(const json& p) {
  const json& o = p["optimizer"];
  return {o["tol"].get<double>(), o["max_iter"].get<int>(), o["n_upper"].get<int>()};
}

using Rows = std::vector<std::vector<std::string>>;

std::vector<std::string> columns_for(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::SteadyState: return {"level", "closed_form", "numeric", "abs_diff"};
    case ExperimentKind::Threshold: return {"c_N", "theta_exact", "theta_approx", "shannon_limit"};
    case ExperimentKind::AoiCurve: return {"analytic_aoi", "sim_aoi", "sim_ci"};
    case ExperimentKind::Optimize: return {"eta_star", "n_star", "aoi_star", "regime"};
    case ExperimentKind::Simulate:
      return {"network_aoi", "ci_halfwidth", "empirical_mu", "empirical_ET", "empirical_ET2",
              "analytic_aoi", "links"};
    case ExperimentKind::Sweep: break;
  }
  return {};
}

double analytic_aoi(const LinkConfig& link, const NetworkConfig& net) {
  const SteadyState ss = steady_state(net.chain());
  return network_aoi_general(ss, resolve_phy(link, net.N), net);
}

Rows evaluate(ExperimentKind k, const json& p) {
  Rows rows;
  switch (k) {
    case ExperimentKind::SteadyState: {
      const NetworkConfig net = network_from(p);
      const SteadyState closed = steady_state(net.chain());
      const SteadyState numeric = solve_steady_numeric(build_transition_matrix(net.chain()));
      for (std::size_t i = 0; i < numeric.probs.size(); ++i)
        rows.push_back({fmt_int(static_cast<long long>(i)), format_number(closed.probs[i]),
                        format_number(numeric.probs[i]),
                        format_number(std::abs(closed.probs[i] - numeric.probs[i]))});
      break;
    }
    case ExperimentKind::Threshold: {
      const json& c = p["coding"];
      CodingConfig cfg{c["k"].get<int>(), c["N"].get<int>(), c["R_t"].get<double>(),
                       c["eps"].get<double>()};
      if (cfg.k < 1 || cfg.N < 1 || !(cfg.eps > 0.0 && cfg.eps < 1.0)) bad("coding parameters out of range");
      rows.push_back({format_number(cfg.c_N()), format_number(effective_threshold_exact(cfg)),
                      format_number(effective_threshold_approx(cfg)),
                      format_number(std::exp2(cfg.R_t) - 1.0)});
      break;
    }
    case ExperimentKind::AoiCurve: {
      const LinkConfig link = link_from(p);
      const NetworkConfig net = network_from(p);
      std::vector<std::string> row{format_number(analytic_aoi(link, net)), "", ""};
      if (p["sim"]["enabled"].get<bool>()) {
        const SimReport rep = run(sim_from(p), resolve_phy(link, net.N), net);
        row[1] = format_number(rep.network_aoi);
        row[2] = format_number(rep.ci_halfwidth);
      }
      rows.push_back(row);
      break;
    }
    case ExperimentKind::Optimize: {
      const NetworkConfig net = network_from(p);
      const OptimumResult opt = optimize(link_from(p), net.lambda, net.xi, optimizer_from(p));
      rows.push_back({format_number(opt.eta_star), fmt_int(opt.n_star), format_number(opt.aoi_star),
                      to_string(opt.regime)});
      break;
    }
    case ExperimentKind::Simulate: {
      const LinkConfig link = link_from(p);
      const NetworkConfig net = network_from(p);
      const SimReport rep = run(sim_from(p), resolve_phy(link, net.N), net);
      std::string analytic;
      try {
        analytic = format_number(analytic_aoi(link, net));
      } catch (const Error&) {
        analytic = "";  // no analytic value in this regime
      }
      rows.push_back({format_number(rep.network_aoi), format_number(rep.ci_halfwidth),
                      format_number(rep.empirical_mu), format_number(rep.empirical_ET),
                      format_number(rep.empirical_ET2), analytic, fmt_int(rep.links)});
      break;
    }
    case ExperimentKind::Sweep: bad("nested sweep");
  }
  return rows;
}

std::string leaf_name(const std::string& path) {
  const auto pos = path.rfind('.');
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string());
  out << text;
  out.close();
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

}  // namespace

ExperimentResult run_experiment(const std::string& spec_json, const RunOptions& opts) {
  json spec;
  try {
    spec = json::parse(spec_json);
  } catch (const json::exception& e) {
    bad(std::string("spec is not valid JSON: ") + e.what());
  }
  if (!spec.is_object()) bad("spec must be a JSON object");
  for (const auto& [key, v] : spec.items())
    if (key != "kind" && key != "inner" && key != "params" && key != "sweep" &&
        key != "output_path" && key != "description")
      bad("unknown spec field " + key);
  if (!spec.contains("kind") || !spec["kind"].is_string()) bad("spec.kind is required");

  ExperimentResult result;
  result.kind = parse_kind(spec["kind"].get<std::string>());
  ExperimentKind inner = result.kind;
  if (result.kind == ExperimentKind::Sweep) {
    if (!spec.contains("inner") || !spec["inner"].is_string()) bad("Sweep needs an inner kind");
    inner = parse_kind(spec["inner"].get<std::string>());
    if (inner == ExperimentKind::Sweep) bad("nested sweep");
    if (!spec.contains("sweep")) bad("Sweep needs a sweep block");
  }

  json params = default_params();
  if (spec.contains("params")) merge(params, spec["params"], "params");
  if (opts.seed) params["sim"]["seed"] = *opts.seed;
  if (opts.threads) {
    if (*opts.threads < 1) bad("threads must be >= 1");
    params["sim"]["threads"] = *opts.threads;
  }
  const int threads = params["sim"]["threads"].get<int>();
  if (threads < 1) bad("sim.threads must be >= 1");

  std::string sweep_path;
  std::vector<json> points;
  if (spec.contains("sweep")) {
    const json& sw = spec["sweep"];
    if (!sw.is_object() || !sw.contains("parameter") || !sw["parameter"].is_string() ||
        !sw.contains("values") || !sw["values"].is_array() || sw["values"].empty())
      bad("sweep needs a parameter name and a non-empty values list");
    sweep_path = sw["parameter"].get<std::string>();
    json probe = params;
    if (!lookup(probe, sweep_path)) bad("unknown sweep parameter " + sweep_path);
    const bool signed_ok = leaf_name(sweep_path) == "tx_snr_db" || leaf_name(sweep_path) == "warmup";
    for (const json& v : sw["values"]) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) bad("sweep values must be finite numbers");
      if (!signed_ok && !(v.get<double>() > 0.0)) bad("sweep values must be positive");
      json pt = params;
      assign(*lookup(pt, sweep_path), v, sweep_path);
      points.push_back(std::move(pt));
    }
  } else {
    points.push_back(params);
  }

  // Sweep points run on the pool; a lone point hands the threads to the simulator.
  std::vector<Rows> per_point(points.size());
  std::vector<std::exception_ptr> failures(points.size());
  const int pool = std::min<int>(threads, static_cast<int>(points.size()));
  if (pool > 1)
    for (auto& pt : points) pt["sim"]["threads"] = 1;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        per_point[i] = evaluate(inner, points[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> ths;
    for (int t = 0; t < pool; ++t) ths.emplace_back(worker);
    for (auto& th : ths) th.join();
  }
  for (auto& f : failures)
    if (f) {
      try {
        std::rethrow_exception(f);
      } catch (const json::exception& e) {
        bad(std::string("parameter type error: ") + e.what());
      }
    }

  result.columns = columns_for(inner);
  if (!sweep_path.empty()) result.columns.insert(result.columns.begin(), leaf_name(sweep_path));
  for (std::size_t i = 0; i < points.size(); ++i)
    for (auto& row : per_point[i]) {
      if (!sweep_path.empty()) {
        const json& v = *lookup(points[i], sweep_path);
        row.insert(row.begin(), v.is_number_integer() ? fmt_int(v.get<long long>())
                                                      : format_number(v.get<double>()));
      }
      result.rows.push_back(std::move(row));
    }

  std::string csv;
  for (std::size_t c = 0; c < result.columns.size(); ++c) csv += (c ? "," : "") + result.columns[c];
  csv += '\n';
  for (const auto& row : result.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) csv += (c ? "," : "") + row[c];
    csv += '\n';
  }

  std::string stem = std::string(to_string(inner));
  for (auto& ch : stem) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  std::filesystem::path rel = stem + ".csv";
  if (spec.contains("output_path")) {
    if (!spec["output_path"].is_string() || spec["output_path"].get<std::string>().empty())
      bad("output_path must be a non-empty string");
    rel = spec["output_path"].get<std::string>();
  }
  result.csv_path = opts.out_dir / rel;
  result.sidecar_path = result.csv_path;
  result.sidecar_path.replace_extension(".json");
  if (result.sidecar_path == result.csv_path) bad("output_path must not end in .json");

  json side;
  side["kind"] = to_string(result.kind);
  if (result.kind == ExperimentKind::Sweep) side["inner"] = to_string(inner);
  side["version"] = EHAOI_VERSION;
  side["seed"] = params["sim"]["seed"];
  side["threads"] = threads;
  side["params"] = params;
  if (!sweep_path.empty()) side["sweep"] = spec["sweep"];
  side["columns"] = result.columns;
  side["rows"] = result.rows.size();
  side["csv"] = rel.string();
  result.resolved = side.dump(2) + "\n";

  std::error_code ec;
  std::filesystem::create_directories(result.csv_path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + result.csv_path.parent_path().string());
  write_text(result.csv_path, csv);
  write_text(result.sidecar_path, result.resolved);
  if (!opts.quiet)
    std::cout << "wrote " << result.csv_path.string() << " (" << result.rows.size() << " rows)\n";
  return result;
}

ExperimentResult run_experiment_file(const std::filesystem::path& spec_path, const RunOptions& opts) {
  std::ifstream in(spec_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + spec_path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return run_experiment(ss.str(), opts);
}

}  // namespace ehaoi
