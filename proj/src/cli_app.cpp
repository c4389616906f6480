#include "persistwalk/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <json.hpp>

#include "persistwalk/estimators.hpp"
#include "persistwalk/exactdp.hpp"
#include "persistwalk/excursion.hpp"
#include "persistwalk/io.hpp"
#include "persistwalk/parallel.hpp"
#include "persistwalk/series.hpp"

namespace pw {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

unsigned resolve_workers(unsigned flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("PERSISTWALK_WORKERS")) {
    const long v = std::atol(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return default_workers();
}

json envelope(const std::string& op, const std::string& law, json params) {
  return json{{"schema_version", kSchemaVersion},
              {"op", op},
              {"law", law},
              {"params", std::move(params)}};
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  long long ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

json estimate_json(const MCEstimate& e) {
  return json{{"value", e.value},
              {"stderr", e.stderr_},
              {"n", e.n},
              {"seed", e.seed},
              {"description", e.description}};
}

std::vector<long long> parse_grid(const std::string& spec) {
  // "lo:hi" doubles from lo to hi; "a,b,c" is an explicit list.
  std::vector<long long> grid;
  if (spec.find(':') != std::string::npos) {
    const auto sep = spec.find(':');
    long long lo = std::stoll(spec.substr(0, sep));
    long long hi = std::stoll(spec.substr(sep + 1));
    if (lo < 1 || hi < lo) fail(errc::parse_error, "bad grid '" + spec + "'");
    for (long long n = lo; n <= hi; n *= 2) grid.push_back(n);
    return grid;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) grid.push_back(std::stoll(tok));
  if (grid.empty()) fail(errc::parse_error, "empty grid");
  return grid;
}

std::vector<double> parse_real_list(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  if (out.empty()) fail(errc::parse_error, "empty list");
  return out;
}

void write_plot(const std::string& prefix, const std::string& name,
                const std::vector<std::pair<double, double>>& points) {
  if (prefix.empty()) return;
  std::ofstream out(prefix + "." + name + ".dat");
  for (const auto& [x, y] : points) out << x << " " << y << "\n";
}

struct CommonOpts {
  std::string law_spec;
  std::string out_path = "-";
  std::string plot_prefix;
  std::string format;  // per-command default when empty
  unsigned workers = 0;
  std::uint64_t seed = 0;
};

// Flattens the top-level scalar fields of a record into a two-column CSV;
// the JSON form stays the lossless one.
void record_as_csv(std::ostream& out, const json& rec) {
  out << "key,value\n";
  for (const auto& [key, value] : rec.items()) {
    if (value.is_structured()) continue;
    out << key << "," << (value.is_string() ? value.get<std::string>() : value.dump())
        << "\n";
  }
}

void emit_record(OutputSink& sink, const json& rec, const std::string& format) {
  if (format == "csv")
    record_as_csv(sink.stream(), rec);
  else
    sink.stream() << rec.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"persistwalk: exact and Monte Carlo analysis of integrated random walks"};
  app.require_subcommand(1);

  CommonOpts opt;

  std::string config_path;
  auto add_common = [&](CLI::App* cmd, bool needs_law, bool needs_seed) {
    cmd->add_option("--config", config_path, "key=value config file; flags override it");
    if (needs_law) cmd->add_option("--law", opt.law_spec, "law spec string")->required();
    cmd->add_option("--out", opt.out_path, "output path or - for stdout");
    cmd->add_option("--format", opt.format, "csv or json (per-command default)");
    cmd->add_option("--plot-data", opt.plot_prefix, "prefix for gnuplot two-column files");
    cmd->add_option("--workers", opt.workers,
                    "worker threads (default: PERSISTWALK_WORKERS or hardware)");
    if (needs_seed) cmd->add_option("--seed", opt.seed, "RNG seed")->required();
  };

  // pn-exact
  auto* pn_exact = app.add_subcommand("pn-exact", "exact persistence probabilities by DP");
  long long pe_n = 8;
  bool pe_tilted = false;
  std::size_t pe_budget = kDefaultStateBudget;
  add_common(pn_exact, true, false);
  pn_exact->add_option("--N", pe_n, "horizon (emits rows N=1..N)")->required();
  pn_exact->add_flag("--tilted", pe_tilted, "condition on a positive first step");
  pn_exact->add_option("--state-budget", pe_budget, "DP state budget");

  // pn-mc
  auto* pn_mc = app.add_subcommand("pn-mc", "persistence probability by Monte Carlo");
  long long pm_n = 256;
  std::uint64_t pm_reps = 100000;
  bool pm_tilted = false;
  std::string pm_functional = "min-a";
  add_common(pn_mc, true, true);
  pn_mc->add_option("--N", pm_n, "horizon")->required();
  pn_mc->add_option("--reps", pm_reps, "trajectories");
  pn_mc->add_flag("--tilted", pm_tilted, "condition on a positive first step");
  pn_mc->add_option("--functional", pm_functional, "min-a (integrated) or min-s (walk)");

  // fit-exponent
  auto* fit = app.add_subcommand("fit-exponent", "log-log slope of p_N over a dyadic grid");
  std::string fe_grid = "256:16384";
  std::uint64_t fe_reps = 1000000;
  std::string fe_functional = "min-a";
  add_common(fit, true, true);
  fit->add_option("--grid", fe_grid, "lo:hi dyadic grid or explicit list");
  fit->add_option("--reps", fe_reps, "trajectories per grid point");
  fit->add_option("--functional", fe_functional, "min-a (integrated) or min-s (walk)");

  // cycle-law
  auto* cyc = app.add_subcommand("cycle-law", "exact bivariate cycle law, or sampled cycles");
  long long cl_trunc = 16;
  std::string cl_kind = "zero";
  std::uint64_t cl_sample = 0;
  std::size_t cl_budget = kDefaultStateBudget;
  add_common(cyc, true, false);
  cyc->add_option("--L", cl_trunc, "duration truncation");
  cyc->add_option("--kind", cl_kind, "zero or overshoot");
  cyc->add_option("--sample", cl_sample, "emit this many simulated cycles instead");
  cyc->add_option("--seed", opt.seed, "RNG seed (required with --sample)");
  cyc->add_option("--state-budget", cl_budget, "DP state budget");

  // series-check
  auto* ser = app.add_subcommand("series-check", "factorization identities on exact series");
  long long sc_order = 16;
  std::string sc_identity = "lattice-H";
  std::string sc_kind;
  std::size_t sc_budget = kDefaultStateBudget;
  add_common(ser, true, false);
  ser->add_option("--L", sc_order, "series order");
  ser->add_option("--identity", sc_identity, "xi-zeta or lattice-H");
  ser->add_option("--kind", sc_kind, "cycle kind override: zero or overshoot");
  ser->add_option("--state-budget", sc_budget, "DP state budget");

  // tauberian
  auto* tau = app.add_subcommand("tauberian", "power-law fit of a positive tail");
  std::string tb_input;
  add_common(tau, false, false);
  tau->add_option("--input", tb_input, "CSV with columns n,value[,stderr]")->required();

  // tails
  auto* tails = app.add_subcommand("tails", "scaled joint tails of cycle variables");
  double tl_s = 0.0, tl_t = 1.0;
  std::string tl_grid = "1024";
  std::uint64_t tl_reps = 100000;
  std::string tl_which = "theta";
  long long tl_cap = 1'000'000;
  std::size_t tl_mesh = 1024, tl_fsamples = 20000;
  add_common(tails, true, true);
  tails->add_option("--s", tl_s, "area scale");
  tails->add_option("--t", tl_t, "duration scale");
  tails->add_option("--grid", tl_grid, "n grid (list or lo:hi)");
  tails->add_option("--reps", tl_reps, "cycles per grid point");
  tails->add_option("--which", tl_which, "xi+ | xi- | xi | theta | zero");
  tails->add_option("--cap", tl_cap, "per-cycle step cap (censoring)");
  tails->add_option("--mesh", tl_mesh, "excursion mesh for the F factor");
  tails->add_option("--fsamples", tl_fsamples, "excursion samples for the F factor");

  // fcurve
  auto* fc = app.add_subcommand("fcurve", "excursion-area functional F on a grid");
  std::string fc_grid = "0,0.125,0.25,0.5,1,2,4,8";
  std::size_t fc_mesh = 1024;
  std::size_t fc_samples = 100000;
  add_common(fc, false, true);
  fc->add_option("--xgrid", fc_grid, "x values");
  fc->add_option("--mesh", fc_mesh, "excursion mesh");
  fc->add_option("--samples", fc_samples, "excursion draws");

  // assoc
  auto* assoc = app.add_subcommand("assoc", "association scan over indicator thresholds");
  std::size_t as_grid = 10;
  std::uint64_t as_reps = 1000000;
  long long as_cap = 10'000'000;
  add_common(assoc, true, true);
  assoc->add_option("--grid", as_grid, "grid size per axis");
  assoc->add_option("--reps", as_reps, "cycles");
  assoc->add_option("--cap", as_cap, "per-cycle step cap (censoring)");

  // symmetry
  auto* sym = app.add_subcommand("symmetry", "cycle-area symmetry tests");
  std::uint64_t sy_reps = 1000000;
  long long sy_cap = 1'000'000;
  double sy_level = 1e-3;
  add_common(sym, true, true);
  sym->add_option("--reps", sy_reps, "cycles");
  sym->add_option("--cap", sy_cap, "per-phase step cap (censoring)");
  sym->add_option("--level", sy_level, "test level");

  // chain-check
  auto* chain = app.add_subcommand("chain-check", "sandwich and bound chains at one horizon");
  long long ch_n = 1024;
  std::uint64_t ch_reps = 1000000;
  long long ch_cap = 300'000;
  add_common(chain, true, true);
  chain->add_option("--N", ch_n, "horizon");
  chain->add_option("--reps", ch_reps, "trajectories / cycle sequences");
  chain->add_option("--cap", ch_cap, "per-cycle step cap (censoring)");

  // ladder
  auto* lad = app.add_subcommand("ladder", "ladder constants and exact tails");
  long long ld_depth = 2048;
  std::size_t ld_budget = kDefaultStateBudget;
  add_common(lad, true, false);
  lad->add_option("--depth", ld_depth, "table depth");
  lad->add_option("--state-budget", ld_budget, "DP state budget");

  // Flat key=value config files mirror the flags; the command line wins on
  // conflicts, so file entries are appended only when the flag is absent.
  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] != "--config") continue;
    std::ifstream cfg(args[i + 1]);
    if (!cfg) {
      std::cerr << "usage error: cannot open config file '" << args[i + 1] << "'\n";
      return 2;
    }
    std::string line;
    std::vector<std::string> extra;
    while (std::getline(cfg, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        std::cerr << "usage error: config line '" << line << "' is not key=value\n";
        return 2;
      }
      const std::string flag = "--" + line.substr(0, eq);
      if (std::find(args.begin(), args.end(), flag) == args.end()) {
        extra.push_back(flag);
        extra.push_back(line.substr(eq + 1));
      }
    }
    args.insert(args.end(), extra.begin(), extra.end());
    break;
  }
  std::vector<const char*> cargv;
  cargv.push_back(argv[0]);
  for (const auto& a : args) cargv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  Stopwatch watch;
  try {
    const unsigned workers = resolve_workers(opt.workers);

    if (*pn_exact) {
      IncrementLaw law = parse_law(opt.law_spec);
      OutputSink sink(opt.out_path);
      std::vector<std::pair<double, double>> plot;
      json rows = json::array();
      Rat last;
      for (long long n = 1; n <= pe_n; ++n) {
        Rat p = exact_pN(law, n, pe_tilted, pe_budget);
        rows.push_back({{"N", n},
                        {"p_num", p.get_num().get_str()},
                        {"p_den", p.get_den().get_str()},
                        {"p_float", to_double(p)}});
        plot.emplace_back(static_cast<double>(n), to_double(p));
        last = p;
      }
      if (opt.format == "json") {
        json rec = envelope("pn-exact", opt.law_spec, {{"N", pe_n}, {"tilted", pe_tilted}});
        rec["rows"] = rows;
        rec["elapsed_ms"] = watch.ms();
        sink.stream() << rec.dump() << "\n";
      } else {
        sink.stream() << "N,p_num,p_den,p_float\n";
        for (const auto& r : rows)
          sink.stream() << r["N"] << "," << r["p_num"].get<std::string>() << ","
                        << r["p_den"].get<std::string>() << "," << r["p_float"].dump() << "\n";
      }
      write_plot(opt.plot_prefix, "pn_exact", plot);
      std::cerr << "pn-exact law=" << opt.law_spec << " N=" << pe_n << " p_N=" << rat_str(last)
                << " elapsed_ms=" << watch.ms() << "\n";
      return 0;
    }

    if (*pn_mc) {
      IncrementLaw law = parse_law(opt.law_spec);
      const PathFunctional functional =
          pm_functional == "min-s" ? PathFunctional::walk_min : PathFunctional::integrated_min;
      MCEstimate est = mc_p(law, pm_n, pm_reps, pm_tilted, opt.seed, workers, functional);
      json rec = envelope("pn-mc", opt.law_spec,
                          {{"N", pm_n},
                           {"reps", pm_reps},
                           {"tilted", pm_tilted},
                           {"functional", pm_functional}});
      rec["value"] = est.value;
      rec["stderr"] = est.stderr_;
      rec["n"] = est.n;
      rec["seed"] = opt.seed;
      rec["elapsed_ms"] = watch.ms();
      OutputSink sink(opt.out_path);
      emit_record(sink, rec, opt.format);
      std::cerr << "pn-mc law=" << opt.law_spec << " N=" << pm_n << " p=" << est.value
                << " se=" << est.stderr_ << " elapsed_ms=" << watch.ms() << "\n";
      return 0;
    }

    if (*fit) {
      IncrementLaw law = parse_law(opt.law_spec);
      const PathFunctional functional =
          fe_functional == "min-s" ? PathFunctional::walk_min : PathFunctional::integrated_min;
      auto grid = parse_grid(fe_grid);
      std::vector<ExponentPoint> points;
      json jpoints = json::array();
      std::vector<std::pair<double, double>> plot;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        MCEstimate est =
            mc_p(law, grid[i], fe_reps, false, opt.seed + i, workers, functional);
        points.push_back({static_cast<double>(grid[i]), est.value, est.stderr_});
        jpoints.push_back(
            {{"N", grid[i]}, {"value", est.value}, {"stderr", est.stderr_}, {"n", est.n}});
        plot.emplace_back(std::log(static_cast<double>(grid[i])), std::log(est.value));
      }
      ExponentFit f = exponent_fit(points);
      json rec = envelope("fit-exponent", opt.law_spec,
                          {{"grid", fe_grid}, {"reps", fe_reps}, {"functional", fe_functional}});
      rec["points"] = jpoints;
      rec["slope"] = f.slope;
      rec["slope_se"] = f.slope_se;
      rec["ci"] = {f.ci_lo, f.ci_hi};
      rec["seed"] = opt.seed;
      rec["elapsed_ms"] = watch.ms();
      OutputSink sink(opt.out_path);
      emit_record(sink, rec, opt.format);
      write_plot(opt.plot_prefix, "loglog", plot);
      std::cerr << "fit-exponent law=" << opt.law_spec << " slope=" << f.slope << " ci=["
                << f.ci_lo << "," << f.ci_hi << "] elapsed_ms=" << watch.ms() << "\n";
      return 0;
    }

    if (*cyc) {
      IncrementLaw law = parse_law(opt.law_spec);
      OutputSink sink(opt.out_path);
      if (cl_sample > 0) {
        if (!cyc->count("--seed")) fail(errc::parse_error, "--sample requires --seed");
        Rng rng(opt.seed, 0);
        CycleStream stream(law, rng);
        sink.stream() << "idx,theta_plus,xi_plus,theta_minus,xi_minus\n";
        for (std::uint64_t i = 0; i < cl_sample; ++i) {
          Cycle c = stream.next();
          sink.stream() << i << "," << c.theta_plus << "," << json(c.xi_plus).dump() << ","
                        << c.theta_minus << "," << json(c.xi_minus).dump() << "\n";
        }
        std::cerr << "cycle-law sample law=" << opt.law_spec << " n=" << cl_sample
                  << " elapsed_ms=" << watch.ms() << "\n";
        return 0;
      }
      const CycleKind kind =
          cl_kind == "overshoot" ? CycleKind::overshoot_cycle : CycleKind::zero_cycle;
      BivariateCycleLaw cl = exact_cycle_law(law, cl_trunc, kind, cl_budget);
      if (opt.format == "json") {
        json entries = json::array();
        for (const auto& [key, mass] : cl.entries)
          entries.push_back({{"theta", key.first},
                             {"xi", key.second},
                             {"prob", rat_str(mass)},
                             {"prob_float", to_double(mass)}});
        json rec = envelope("cycle-law", opt.law_spec, {{"L", cl_trunc}, {"kind", cl_kind}});
        rec["entries"] = entries;
        rec["defect"] = rat_str(cl.defect);
        rec["elapsed_ms"] = watch.ms();
        sink.stream() << rec.dump() << "\n";
      } else {
        sink.stream() << "theta,xi,prob_num,prob_den\n";
        for (const auto& [key, mass] : cl.entries)
          sink.stream() << key.first << "," << key.second << "," << mass.get_num().get_str()
                        << "," << mass.get_den().get_str() << "\n";
      }
      std::cerr << "cycle-law law=" << opt.law_spec << " kind=" << cl_kind << " L=" << cl_trunc
                << " entries=" << cl.entries.size() << " defect=" << rat_str(cl.defect)
                << " elapsed_ms=" << watch.ms() << "\n";
      return 0;
    }

    if (*ser) {
      IncrementLaw law = parse_law(opt.law_spec);
      CycleKind kind = sc_identity == "xi-zeta" ? CycleKind::overshoot_cycle
                                                : CycleKind::zero_cycle;
      if (sc_kind == "zero") kind = CycleKind::zero_cycle;
      if (sc_kind == "overshoot") kind = CycleKind::overshoot_cycle;
      BivariateCycleLaw cl = exact_cycle_law(law, sc_order, kind, sc_budget);
      SeriesIdentityReport report = check_factorization(cl, sc_order, sc_identity);
      json coeffs = json::array();
      for (long long l = 0; l <= report.order; ++l)
        coeffs.push_back({{"l", l},
                          {"one_minus_chi", rat_str(report.lhs[l])},
                          {"factorized", rat_str(report.rhs[l])},
                          {"diff", rat_str(report.diff[l])}});
      json rec = envelope("series-check", opt.law_spec,
                          {{"L", sc_order},
                           {"identity", sc_identity},
                           {"kind", kind == CycleKind::zero_cycle ? "zero" : "overshoot"}});
      rec["max_abs_coeff_diff"] = rat_str(report.max_abs_diff);
      rec["max_abs_coeff_diff_float"] = to_double(report.max_abs_diff);
      rec["exact"] = report.exact();
      rec["coefficients"] = coeffs;
      rec["elapsed_ms"] = watch.ms();
      OutputSink sink(opt.out_path);
      emit_record(sink, rec, opt.format);
      std::cerr << "series-check law=" << opt.law_spec << " identity=" << sc_identity
                << " max_abs_coeff_diff=" << rat_str(report.max_abs_diff)
                << " elapsed_ms=" << watch.ms() << "\n";
      return 0;
    }

    if (*tau) {
      CsvTable table = read_csv_file(tb_input);
      if (table.header.size() < 2 || table.header[0] != "n")
        fail(errc::parse_error, "tauberian input needs columns n,value[,stderr]");
      std::vector<TailPoint> pts;
      for (const auto& row : table.rows) {
        TailPoint p;
        p.n = std::stod(row.at(0));
        p.value = std::stod(row.at(1));
        if (row.size() > 2) p.stderr_ = std::stod(row.at(2));
        pts.push_back(p);
      }
      TailFit f = tauberian_fit(pts);
      json rec = envelope("tauberian", "", {{"input", tb_input}, {"points", pts.size()}});
      rec["slope"] = f.slope;
      rec["slope_se"] = f.slope_se;
      rec["p"] = f.p;
      rec["prefactor"] = f.prefactor;
      rec["r2"] = f.r2;
      rec["degenerate"] = f.degenerate;
      rec["elapsed_ms"] = watch.ms();
      OutputSink sink(opt.out_path);
      emit_record(sink, rec, opt.format);
      std::cerr << "tauberian slope=" << f.slope << " p=" << f.p << " prefactor=" << f.prefactor
                << " elapsed_ms=" << watch.ms() << "\n";
      return 0;
    }

    if (*tails) {
      IncrementLaw law = parse_law(opt.law_spec);
      TailEvent which = TailEvent::theta_only;
      if (tl_which == "xi+")
        which = TailEvent::xi_plus;
      else if (tl_which == "xi-")
        which = TailEvent::xi_minus;
      else if (tl_which == "xi")
        which = TailEvent::xi_full;
      else if (tl_which == "zero")
        which = TailEvent::zero_cycle;
      else if (tl_which != "theta")
        fail(errc::parse_error, "unknown tail event '" + tl_which + "'");
      std::vector<double> xi_ex;
      if (tl_s > 0)
        xi_ex = sample_xi_ex_bulk(tl_mesh, tl_fsamples, opt.seed ^ 0x5eedULL, workers);
      TailCurve curve = joint_tail(law, tl_s, tl_t, parse_grid(tl_grid), tl_reps, which,
                                   opt.seed, workers, tl_cap, xi_ex);
      OutputSink sink(opt.out_path);
      std::vector<std::pair<double, double>> plot;
      for (const auto& p : curve.points) plot.emplace_back(p.n, p.scaled);
      if (opt.format == "json") {
        json pts = json::array();
        for (const auto& p : curve.points)
          pts.push_back({{"n", p.n},
                         {"scaled", p.scaled},
                         {"stderr", p.stderr_},
                         {"raw", p.raw},
                         {"decided", p.decided},
                         {"censored", p.censored}});
        json rec = envelope("tails", opt.law_spec,
                            {{"s", tl_s}, {"t", tl_t}, {"which", tl_which}, {"reps", tl_reps},
                             {"cap", tl_cap}});
        rec["points"] = pts;
        rec["theory_attached"] = curve.theory_attached;
        if (curve.theory_attached) rec["theory"] = curve.theory;
        rec["seed"] = opt.seed;
        rec["elapsed_ms"] = watch.ms();
        sink.stream() << rec.dump() << "\n";
      } else {
        sink.stream() << "n,scaled,stderr,raw,decided,censored\n";
        for (const auto& p : curve.points)
          sink.stream() << p.n << "," << json(p.scaled).dump() << "," << json(p.stderr_).dump()
                        << "," << json(p.raw).dump() << "," << p.decided << "," << p.censored
                        << "\n";
      }
      write_plot(opt.plot_prefix, "tails", plot);
      std::cerr << "tails law=" << opt.law_spec << " which=" << tl_which
                << " theory=" << (curve.theory_attached ? std::to_string(curve.theory) : "n/a")
                << " elapsed_ms=" << watch.ms() << "\n";
      return 0;
    }

    if (*fc) {
      auto xs = parse_real_list(fc_grid);
      auto areas = sample_xi_ex_bulk(fc_mesh, fc_samples, opt.seed, workers);
      FCurve curve = f_curve(xs, areas, fc_mesh);
      OutputSink sink(opt.out_path);
      std::vector<std::pair<double, double>> plot;
      for (std::size_t i = 0; i < curve.x.size(); ++i) plot.emplace_back(curve.x[i], curve.f[i]);
      if (opt.format == "json") {
        json pts = json::array();
        for (std::size_t i = 0; i < curve.x.size(); ++i)
          pts.push_back({{"x", curve.x[i]}, {"F", curve.f[i]}, {"stderr", curve.stderr_[i]}});
        json rec = envelope("fcurve", "", {{"mesh", fc_mesh}, {"samples", fc_samples}});
        rec["points"] = pts;
        rec["seed"] = opt.seed;
        rec["elapsed_ms"] = watch.ms();
        sink.stream() << rec.dump() << "\n";
      } else {
        sink.stream() << "x,F,stderr,n_samples,mesh\n";
        for (std::size_t i = 0; i < curve.x.size(); ++i)
          sink.stream() << json(curve.x[i]).dump() << "," << json(curve.f[i]).dump() << ","
                        << json(curve.stderr_[i]).dump() << "," << curve.n_samples << ","
                        << curve.mesh << "\n";
      }
      write_plot(opt.plot_prefix, "fcurve", plot);
      std::cerr << "fcurve mesh=" << fc_mesh << " samples=" << fc_samples
                << " elapsed_ms=" << watch.ms() << "\n";
      return 0;
    }

    if (*assoc) {
      IncrementLaw law = parse_law(opt.law_spec);
      AssociationReport rep =
          association_scan(law, as_grid, as_reps, opt.seed, workers, as_cap);
      json cells = json::array();
      for (const auto& c : rep.cells)
        cells.push_back({{"a", c.a}, {"b", c.b}, {"cov", c.cov}, {"stderr", c.stderr_}});
      json rec = envelope("assoc", opt.law_spec,
                          {{"grid", as_grid}, {"reps", as_reps}, {"cap", as_cap}});
      rec["xi_thresholds"] = rep.xi_thresholds;
      rec["theta_thresholds"] = rep.theta_thresholds;
      rec["cells"] = cells;
      rec["violations"] = rep.violations;
      rec["n"] = rep.n_used;
      rec["censored"] = rep.censored;
      rec["seed"] = opt.seed;
      rec["elapsed_ms"] = watch.ms();
      OutputSink sink(opt.out_path);
      if (opt.format == "csv") {
        sink.stream() << "a,b,cov,stderr\n";
        for (const auto& c : rep.cells)
          sink.stream() << json(c.a).dump() << "," << json(c.b).dump() << ","
                        << json(c.cov).dump() << "," << json(c.stderr_).dump() << "\n";
      } else {
        sink.stream() << rec.dump() << "\n";
      }
      std::cerr << "assoc law=" << opt.law_spec << " violations=" << rep.violations
                << " censored=" << rep.censored << " elapsed_ms=" << watch.ms() << "\n";
      return 0;
    }

    if (*sym) {
      IncrementLaw law = parse_law(opt.law_spec);
      SymmetryReport rep = xi_symmetry_test(law, sy_reps, opt.seed, workers, sy_cap, sy_level);
      json rec = envelope("symmetry", opt.law_spec,
                          {{"reps", sy_reps}, {"cap", sy_cap}, {"level", sy_level}});
      rec["n"] = rep.n_used;
      rec["n_pos"] = rep.n_pos;
      rec["n_neg"] = rep.n_neg;
      rec["n_zero"] = rep.n_zero;
      rec["censored"] = rep.censored;
      rec["sign_z"] = rep.sign_z;
      rec["sign_z_crit"] = rep.sign_z_crit;
      rec["ks_stat"] = rep.ks_stat;
      rec["ks_threshold"] = rep.ks_threshold;
      rec["max_stratum_z"] = rep.max_stratum_z;
      rec["stratum_z_crit"] = rep.stratum_z_crit;
      rec["upper_exponential"] = rep.upper_exponential;
      rec["pass"] = rep.pass;
      rec["seed"] = opt.seed;
      rec["elapsed_ms"] = watch.ms();
      OutputSink sink(opt.out_path);
      emit_record(sink, rec, opt.format);
      std::cerr << "symmetry law=" << opt.law_spec << " pass=" << (rep.pass ? "yes" : "no")
                << " sign_z=" << rep.sign_z << " elapsed_ms=" << watch.ms() << "\n";
      return 0;
    }

    if (*chain) {
      IncrementLaw law = parse_law(opt.law_spec);
      ChainReport rep = chain_checks(law, ch_n, ch_reps, opt.seed, workers, ch_cap);
      json rec = envelope("chain-check", opt.law_spec,
                          {{"N", ch_n}, {"reps", ch_reps}, {"cap", ch_cap}});
      rec["p_tilde"] = estimate_json(rep.upper.lhs);
      rec["tau_nu_tail"] = estimate_json(rep.upper.rhs);
      rec["upper_ok"] = rep.upper.ok;
      rec["upper_margin_sigmas"] = rep.upper.margin_sigmas;
      rec["min_xi_prefix"] = estimate_json(rep.min_xi_prefix);
      rec["theta_sum_tail"] = estimate_json(rep.theta_sum_tail);
      rec["product"] = rep.product;
      rec["product_stderr"] = rep.product_se;
      rec["lower_ok"] = rep.lower.ok;
      rec["lower_margin_sigmas"] = rep.lower.margin_sigmas;
      if (rep.upper_zero) {
        rec["p_plain"] = estimate_json(rep.upper_zero->lhs);
        rec["tau_nu0_tail"] = estimate_json(rep.upper_zero->rhs);
        rec["upper_zero_ok"] = rep.upper_zero->ok;
        rec["upper_zero_margin_sigmas"] = rep.upper_zero->margin_sigmas;
      }
      rec["egorov_partial_sums"] = rep.egorov_partial_sums;
      rec["censored_reps"] = rep.censored_reps;
      rec["seed"] = opt.seed;
      rec["elapsed_ms"] = watch.ms();
      OutputSink sink(opt.out_path);
      emit_record(sink, rec, opt.format);
      std::cerr << "chain-check law=" << opt.law_spec << " upper_ok=" << rep.upper.ok
                << " lower_ok=" << rep.lower.ok << " elapsed_ms=" << watch.ms() << "\n";
      return 0;
    }

    if (*lad) {
      IncrementLaw law = parse_law(opt.law_spec);
      LadderConstants lc = ladder_constants(law, ld_depth, ld_budget);
      OutputSink sink(opt.out_path);
      sink.stream() << "n,c_plus,c_zero,c_minus,tau_plus_tail,tau_minus_tail,theta0_tail\n";
      std::vector<std::pair<double, double>> plot;
      for (long long n = 1; n <= ld_depth; ++n) {
        const std::size_t i = static_cast<std::size_t>(n - 1);
        sink.stream() << n << "," << json(static_cast<double>(lc.c_plus[i])).dump() << ","
                      << json(static_cast<double>(lc.c_zero[i])).dump() << ","
                      << json(static_cast<double>(lc.c_minus[i])).dump() << ","
                      << json(static_cast<double>(lc.tau_plus_tail[i])).dump() << ","
                      << json(static_cast<double>(lc.tau_minus_tail[i])).dump() << ","
                      << json(static_cast<double>(lc.theta0_tail[i])).dump() << "\n";
        plot.emplace_back(static_cast<double>(n),
                          static_cast<double>(lc.tau_plus_tail[i]) * std::sqrt(n));
      }
      write_plot(opt.plot_prefix, "ladder", plot);
      std::cerr << "ladder law=" << opt.law_spec << " depth=" << ld_depth
                << " c_plus=" << static_cast<double>(lc.c_plus.back())
                << " c_zero=" << static_cast<double>(lc.c_zero.back())
                << " elapsed_ms=" << watch.ms() << "\n";
      return 0;
    }

    fail(errc::parse_error, "no subcommand selected");
  } catch (const Error& e) {
    if (e.code() == errc::parse_error) {
      std::cerr << "usage error: " << e.what() << "\n";
      return 2;
    }
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace pw
