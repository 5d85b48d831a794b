#include "onearm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "onearm/errors.hpp"
#include "onearm/ising_mc.hpp"
#include "onearm/percolation.hpp"
#include "onearm/scaling.hpp"
#include "onearm/verify_suite.hpp"
#include "onearm/version.hpp"
#include "onearm/worm.hpp"

namespace onearm {

namespace {

void apply_workers(const ExperimentConfig& cfg) {
#ifdef _OPENMP
  long long workers = cfg.integer("workers", 0);
  if (const char* env = std::getenv("ONEARM_WORKERS"))
    workers = std::atoll(env);
  if (workers > 0) omp_set_num_threads(int(workers));
#else
  (void)cfg;
#endif
}

struct Sink {
  std::string results_path;
  std::string runs_path;
  RunRecord record;
  bool enabled = true;

  void row(Json j) {
    if (enabled && !results_path.empty()) append_jsonl(results_path, j);
    record.rows.push_back(std::move(j));
  }
  void check(bool pass) {
    ++record.checks_total;
    if (pass) ++record.checks_passed;
  }
};

Sink make_sink(const ExperimentConfig& cfg, const std::string& kind) {
  Sink sink;
  sink.results_path = cfg.str("out", "results.jsonl");
  sink.runs_path = cfg.str("runs", "runs.jsonl");
  sink.enabled = !cfg.flag("dry_run", false);
  sink.record.config_hash = cfg.hash();
  sink.record.kind = kind;
  sink.record.version = kVersion;
  sink.record.started_ms = now_ms();
  return sink;
}

void finish_sink(Sink& sink) {
  sink.record.finished_ms = now_ms();
  if (sink.enabled && !sink.runs_path.empty())
    append_jsonl(sink.runs_path, sink.record.to_json());
}

Json estimate_fields(Json row, const Estimate& e) {
  row["mean"] = e.mean;
  row["stderr"] = e.std_err;
  row["tau"] = e.tau;
  row["n"] = e.count;
  if (e.warn_thermalization) row["warn"] = "thermalization";
  return row;
}

// optional adjacency-list dump of the run's geometry, for debugging
void maybe_dump_geometry(const ExperimentConfig& cfg, const BallGeometry& g) {
  std::string path = cfg.str("dump_geometry", "");
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot open dump_geometry path " + path);
  g.dump_adjacency(out);
}

void emit_check_lines(Sink& sink, std::ostream& log, const std::string& kind,
                      const std::vector<CheckLine>& lines) {
  for (const auto& line : lines) {
    log << (line.pass ? "PASS " : "FAIL ") << line.name << " lhs=" << line.lhs
        << " rhs=" << line.rhs << " rel=" << line.rel_err << "\n";
    Json row = make_row(sink.record.config_hash, kind, line.anchor, line.name);
    row["lhs"] = line.lhs;
    row["rhs"] = line.rhs;
    row["rel_err"] = line.rel_err;
    row["pass"] = line.pass;
    sink.row(std::move(row));
    sink.check(line.pass);
  }
}

// ---------------------------------------------------------------------------

RunOutcome run_verify(const ExperimentConfig& cfg, std::ostream& log) {
  Sink sink = make_sink(cfg, "verify-exact");
  double tol = cfg.num("tolerance", 1e-10);
  std::uint64_t seed = std::uint64_t(cfg.integer("seed", 1));
  int n_repr = int(cfg.integer("n_representation", 50));
  int n_switch = int(cfg.integer("n_switching", 100));
  int n_moment = int(cfg.integer("n_moment", 20));
  std::set<std::string> checks;
  {
    std::stringstream ss(cfg.str(
        "checks", "representation,switching,moment,correlation,percolation"));
    std::string tok;
    while (std::getline(ss, tok, ',')) checks.insert(tok);
  }

  if (checks.count("representation"))
    emit_check_lines(sink, log, "verify-exact",
                     representation_identity_suite(n_repr, seed, tol));
  if (checks.count("switching"))
    emit_check_lines(sink, log, "verify-exact",
                     switching_identity_suite(n_switch, seed, tol));
  if (checks.count("moment"))
    emit_check_lines(sink, log, "verify-exact", moment_chain_suite(n_moment, seed, tol));
  if (checks.count("correlation"))
    emit_check_lines(sink, log, "verify-exact", correlation_inequality_suite());
  if (checks.count("percolation"))
    emit_check_lines(sink, log, "verify-exact", percolation_exact_suite());

  finish_sink(sink);
  RunOutcome out;
  out.record = sink.record;
  out.pass = sink.record.all_pass();
  log << (out.pass ? "verify: all checks passed" : "verify: CHECK FAILURES") << " ("
      << sink.record.checks_passed << "/" << sink.record.checks_total << ")\n";
  return out;
}

// ---------------------------------------------------------------------------

ChainConfig chain_from_config(const ExperimentConfig& cfg, const std::string& def_sampler) {
  ChainConfig chain;
  chain.sampler = sampler_from_string(cfg.str("sampler", def_sampler));
  chain.therm = int(cfg.integer("therm", 2000));
  chain.sweeps = int(cfg.integer("sweeps", 20000));
  chain.stride = int(cfg.integer("stride", 2));
  chain.replicas = int(cfg.integer("replicas", 2));
  chain.seed = std::uint64_t(cfg.integer("seed", 1));
  chain.validate();
  return chain;
}

RunOutcome run_ising_arm(const ExperimentConfig& cfg, std::ostream& log) {
  Sink sink = make_sink(cfg, "ising-arm");
  CouplingSpec coupling = coupling_from_config(cfg);
  ChainConfig chain = chain_from_config(cfg, "full-lattice-cluster-sweep");
  double pad = cfg.num("r_pad", 0.25);
  for (double r : cfg.num_list("r_list")) {
    double R = cfg.num("R", r + coupling.range + pad);
    BallGeometry g = build_ball(coupling, R, r, norm_from_string(cfg.str("norm", "euclidean")));
    maybe_dump_geometry(cfg, g);
    std::int64_t t0 = now_ms();
    Estimate e = estimate_one_arm_plus(g, coupling, chain);
    Json row = estimate_fields(
        make_row(sink.record.config_hash, "ising-arm", "one-arm-decay", "one_arm"), e);
    row["d"] = coupling.dim;
    row["r"] = r;
    row["R"] = R;
    row["beta"] = coupling.beta;
    row["seed"] = chain.seed;
    row["wall_ms"] = double(now_ms() - t0);
    log << "one_arm r=" << r << " mean=" << e.mean << " err=" << e.std_err << "\n";
    sink.row(std::move(row));
  }
  finish_sink(sink);
  return {sink.record, true};
}

std::vector<std::pair<std::vector<int>, std::vector<int>>> axis_pairs(int dim, int x) {
  std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
  std::vector<int> origin(dim, 0);
  for (int axis = 0; axis < dim; ++axis)
    for (int sign : {1, -1}) {
      std::vector<int> p(dim, 0);
      p[axis] = sign * x;
      out.emplace_back(origin, p);
    }
  return out;
}

RunOutcome run_ising_twopoint(const ExperimentConfig& cfg, std::ostream& log) {
  Sink sink = make_sink(cfg, "ising-twopoint");
  CouplingSpec coupling = coupling_from_config(cfg);
  ChainConfig chain = chain_from_config(cfg, "single-cluster-flip");
  double margin = cfg.num("margin", 2.0);
  auto xs = cfg.num_list("x_list");
  double R = cfg.num("R", margin * *std::max_element(xs.begin(), xs.end()));
  BallGeometry g = build_ball(coupling, R, cfg.num("r", R / 2.0),
                              norm_from_string(cfg.str("norm", "euclidean")));

  std::vector<std::vector<std::pair<std::vector<int>, std::vector<int>>>> groups;
  for (double x : xs) groups.push_back(axis_pairs(coupling.dim, int(x)));
  std::int64_t t0 = now_ms();
  auto estimates = estimate_two_point_grouped(g, coupling, chain, groups, margin);
  double wall = double(now_ms() - t0) / double(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Json row = estimate_fields(
        make_row(sink.record.config_hash, "ising-twopoint", "two-point-decay", "two_point"),
        estimates[i]);
    row["d"] = coupling.dim;
    row["r"] = xs[i];
    row["R"] = R;
    row["beta"] = coupling.beta;
    row["seed"] = chain.seed;
    row["wall_ms"] = wall;
    log << "two_point |x|=" << xs[i] << " mean=" << estimates[i].mean
        << " err=" << estimates[i].std_err << "\n";
    sink.row(std::move(row));
  }
  finish_sink(sink);
  return {sink.record, true};
}

// ---------------------------------------------------------------------------

RunOutcome run_worm(const ExperimentConfig& cfg, std::ostream& log) {
  Sink sink = make_sink(cfg, "worm");
  CouplingSpec coupling = coupling_from_config(cfg);
  double R = cfg.num("R", 2.0);
  double r = cfg.num("r", 1.0);
  double h = cfg.num("h", 0.5);
  BallGeometry g = build_ball(coupling, R, r, norm_from_string(cfg.str("norm", "euclidean")));
  maybe_dump_geometry(cfg, g);

  WormConfig worm;
  worm.steps = std::uint64_t(cfg.integer("steps", 200000));
  worm.burnin = std::uint64_t(cfg.integer("burnin", 0));
  worm.stride = int(cfg.integer("stride", 4));
  worm.replicas = int(cfg.integer("replicas", 4));
  worm.seed = std::uint64_t(cfg.integer("seed", 1));
  worm.validate();

  WeightedGraph graph = current_graph(g, coupling, h);
  bool enumerable = graph.total_bonds() <= int(cfg.integer("budget_bonds", 16));

  // connection frequency between the origin and the first shell vertex under
  // the free source set
  std::vector<int> origin_pt(g.dim, 0);
  int o = g.index_of(origin_pt);
  int target = g.boundary.front();
  SourceMask allowed = (SourceMask(1) << g.n()) - 1;

  std::vector<Estimate> reps;
  for (int rep = 0; rep < worm.replicas; ++rep) {
    std::vector<double> hits;
    worm_sample(graph, 0, worm, rep, [&](const WormChain& chain) {
      SupportMask support = 0;
      for (std::size_t b = 0; b < chain.labels().size(); ++b)
        if (chain.labels()[b] > 0) support |= SupportMask(1) << b;
      hits.push_back(mask_connected(graph, support, o, target, allowed) ? 1.0 : 0.0);
    });
    reps.push_back(blocked_estimate(hits));
  }
  Estimate freq = merge_estimates(reps);
  Json row = estimate_fields(
      make_row(sink.record.config_hash, "worm", "current-connectivity", "connect_prob"),
      freq);
  row["d"] = coupling.dim;
  row["r"] = r;
  row["R"] = R;
  row["beta"] = coupling.beta;
  row["h"] = h;
  row["seed"] = worm.seed;
  if (enumerable) {
    double z = current_partition(graph, 0);
    double exact = current_event_measure(graph, 0, [&](SupportMask m) {
      return mask_connected(graph, m, o, target, allowed);
    }) / z;
    bool pass = std::fabs(freq.mean - exact) <= 3.0 * std::max(freq.std_err, 1e-12);
    row["exact"] = exact;
    row["pass"] = pass;
    sink.check(pass);
    log << "worm connect_prob mean=" << freq.mean << " err=" << freq.std_err
        << " exact=" << exact << (pass ? " PASS" : " FAIL") << "\n";
  } else {
    log << "worm connect_prob mean=" << freq.mean << " err=" << freq.std_err << "\n";
  }
  sink.row(std::move(row));

  if (cfg.flag("second_moment", true)) {
    SecondMomentStats sm = second_moment_stats(g, coupling, h, worm);
    for (auto& [obs, est] : {std::pair<const char*, Estimate>{"m1", sm.m1},
                             {"m2", sm.m2},
                             {"ratio", sm.ratio}}) {
      Json mrow = estimate_fields(
          make_row(sink.record.config_hash, "worm", "current-second-moment", obs), est);
      mrow["d"] = coupling.dim;
      mrow["r"] = r;
      mrow["R"] = R;
      mrow["beta"] = coupling.beta;
      mrow["h"] = h;
      mrow["seed"] = worm.seed;
      log << "worm " << obs << " mean=" << est.mean << " err=" << est.std_err << "\n";
      sink.row(std::move(mrow));
    }
  }

  finish_sink(sink);
  return {sink.record, sink.record.all_pass()};
}

// ---------------------------------------------------------------------------

RunOutcome run_percolation(const ExperimentConfig& cfg, std::ostream& log) {
  Sink sink = make_sink(cfg, "percolation");
  CouplingSpec coupling = coupling_from_config(cfg);
  double p = cfg.num("p");
  std::uint64_t samples = std::uint64_t(cfg.integer("samples", 100000));
  std::uint64_t seed = std::uint64_t(cfg.integer("seed", 1));
  std::string mode = cfg.str("mode", "theta");

  auto geometry = [&](double R, double r) {
    return build_ball(coupling, R, r, norm_from_string(cfg.str("norm", "euclidean")));
  };

  if (mode == "theta") {
    auto radii = cfg.num_list("r_list");
    double R = cfg.num("R", 2.0 * *std::max_element(radii.begin(), radii.end()));
    BallGeometry g = geometry(R, radii.front());
    std::int64_t t0 = now_ms();
    auto thetas = sample_theta_nested(g, coupling, p, radii, samples, seed);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      Json row = estimate_fields(
          make_row(sink.record.config_hash, "percolation", "one-arm-percolation", "theta_r"),
          thetas[i]);
      row["d"] = coupling.dim;
      row["r"] = radii[i];
      row["R"] = R;
      row["p"] = p;
      row["seed"] = seed;
      row["wall_ms"] = double(now_ms() - t0) / double(radii.size());
      log << "theta_r r=" << radii[i] << " mean=" << thetas[i].mean
          << " err=" << thetas[i].std_err << "\n";
      sink.row(std::move(row));
    }
  } else if (mode == "twopoint") {
    auto xs = cfg.num_list("x_list");
    double R = cfg.num("R", 2.0 * *std::max_element(xs.begin(), xs.end()));
    BallGeometry g = geometry(R, R / 2.0);
    std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
    for (double x : xs) pairs.push_back(axis_pairs(coupling.dim, int(x)).front());
    auto ests = sample_two_point_perc(g, coupling, p, pairs, samples, seed);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      Json row = estimate_fields(
          make_row(sink.record.config_hash, "percolation", "two-point-percolation", "G"),
          ests[i]);
      row["d"] = coupling.dim;
      row["r"] = xs[i];
      row["R"] = R;
      row["p"] = p;
      row["seed"] = seed;
      log << "G |x|=" << xs[i] << " mean=" << ests[i].mean << " err=" << ests[i].std_err
          << "\n";
      sink.row(std::move(row));
    }
  } else if (mode == "correlation") {
    auto radii = cfg.num_list("r_list");
    double R = cfg.num("R", 2.0 * *std::max_element(radii.begin(), radii.end()));
    BallGeometry g = geometry(R, radii.front());
    auto reports = perc_correlation_check(g, coupling, p, radii, samples, seed,
                                          int(cfg.integer("blocks", 16)));
    for (auto& rep : reports) {
      for (auto& [obs, est] : {std::pair<const char*, const Estimate&>{"perc_lhs", rep.lhs},
                               {"perc_rhs", rep.rhs}}) {
        Json side = estimate_fields(
            make_row(sink.record.config_hash, "percolation", "perc-second-moment", obs),
            est);
        side["d"] = coupling.dim;
        side["r"] = rep.r;
        side["R"] = R;
        side["p"] = p;
        side["seed"] = seed;
        sink.row(std::move(side));
      }
      Json row = make_row(sink.record.config_hash, "percolation", "perc-second-moment",
                          "perc_bound");
      row["d"] = coupling.dim;
      row["r"] = rep.r;
      row["R"] = R;
      row["p"] = p;
      row["seed"] = seed;
      row["lhs"] = rep.lhs.mean;
      row["lhs_err"] = rep.lhs.std_err;
      row["rhs"] = rep.rhs.mean;
      row["rhs_err"] = rep.rhs.std_err;
      row["tail"] = rep.tail_estimate;
      row["pass"] = rep.pass_3sigma;
      sink.check(rep.pass_3sigma);
      log << "perc corr r=" << rep.r << " lhs=" << rep.lhs.mean << " rhs=" << rep.rhs.mean
          << (rep.pass_3sigma ? " PASS" : " FAIL") << "\n";
      sink.row(std::move(row));
    }
  } else if (mode == "tree-graph" || mode == "exact") {
    double R = cfg.num("R", 1.5);
    double r = cfg.num("r", 1.0);
    BallGeometry g = geometry(R, r);
    if (mode == "tree-graph") {
      TreeGraphReport rep = tree_graph_check(g, coupling, p);
      bool pass = rep.max_violation <= 1e-12;
      Json row = make_row(sink.record.config_hash, "percolation", "tree-graph-inequality",
                          "tree_graph");
      row["d"] = coupling.dim;
      row["R"] = R;
      row["r"] = r;
      row["p"] = p;
      row["max_violation"] = rep.max_violation;
      row["pairs"] = rep.rows.size();
      row["pass"] = pass;
      sink.check(pass);
      log << "tree-graph max_violation=" << rep.max_violation
          << (pass ? " PASS" : " FAIL") << "\n";
      sink.row(std::move(row));
    } else {
      PercExact ex = perc_exact_check(g, coupling, p);
      bool pass = ex.theta + 1e-12 >= ex.rhs;
      Json row = make_row(sink.record.config_hash, "percolation", "perc-second-moment",
                          "exact");
      row["d"] = coupling.dim;
      row["R"] = R;
      row["r"] = r;
      row["p"] = p;
      row["lhs"] = ex.theta;
      row["rhs"] = ex.rhs;
      row["pass"] = pass;
      sink.check(pass);
      log << "perc exact theta=" << ex.theta << " rhs=" << ex.rhs
          << (pass ? " PASS" : " FAIL") << "\n";
      sink.row(std::move(row));
    }
  } else {
    throw ConfigError("config: unknown percolation mode '" + mode + "'");
  }

  finish_sink(sink);
  return {sink.record, sink.record.all_pass()};
}

// ---------------------------------------------------------------------------

RunOutcome run_scaling(const ExperimentConfig& cfg, std::ostream& log) {
  Sink sink = make_sink(cfg, "scaling");
  std::string variant = cfg.str("variant", "ising");
  int d = int(cfg.integer("dimension", variant == "ising" ? 5 : 7));
  CouplingSpec coupling = CouplingSpec::nearest_neighbor(d, 1.0, 1.0);
  PowerLawKernel kernel{d, cfg.num("exponent", 2.0 - double(d))};
  ArmWeight arm;
  arm.eps = cfg.num("eps", 0.5);
  if (cfg.flag("arm_degenerate", false)) arm = ArmWeight::one();

  ScalingBudget budget;
  budget.exact_ops = std::uint64_t(cfg.integer("exact_ops", 50'000'000));
  budget.replicates = int(cfg.integer("replicates", 16));
  budget.xpool = std::uint64_t(cfg.integer("xpool", 2048));
  budget.xsamples = std::uint64_t(cfg.integer("xsamples", 4096));
  budget.usamples = std::uint64_t(cfg.integer("usamples", 24000));
  budget.umax_factor = cfg.num("umax_factor", 8.0);
  budget.seed = std::uint64_t(cfg.integer("seed", 1));

  auto radii = cfg.num_list("r_list");
  std::string csv_path = cfg.str("csv", "");
  std::ofstream csv;
  if (!csv_path.empty()) {
    csv.open(csv_path);
    csv << "d,r,term,mode,value,stderr,tail_bound\n";
  }

  std::map<std::string, std::vector<std::pair<double, SumEstimate>>> series;
  auto emit = [&](double r, const std::string& term, const SumEstimate& se) {
    Json row = make_row(sink.record.config_hash, "scaling", "shell-sum-scaling", term);
    row["d"] = d;
    row["r"] = r;
    row["value"] = se.value;
    row["stderr"] = se.std_err;
    row["tail"] = std::isfinite(se.tail_bound) ? se.tail_bound : -1.0;
    row["mode"] = se.sampled ? "sampled" : "exact";
    row["terms"] = se.terms;
    row["seed"] = budget.seed;
    sink.row(std::move(row));
    if (csv.is_open())
      csv << d << "," << r << "," << term << "," << (se.sampled ? "sampled" : "exact")
          << "," << se.value << "," << se.std_err << "," << se.tail_bound << "\n";
    series[term].emplace_back(r, se);
    log << "scaling r=" << r << " " << term << " = " << se.value << " +- " << se.std_err
        << "\n";
  };

  for (double r : radii) {
    if (variant == "ising") {
      emit(r, "boundary_sum", boundary_kernel_sum(kernel, coupling, r));
      emit(r, "numerator", numerator_sum(kernel, coupling, r));
      emit(r, "term1", denominator_term1(kernel, coupling, r, budget));
      Term2 t2 = denominator_term2(kernel, coupling, r, arm, budget);
      emit(r, "case_i", t2.case_i);
      emit(r, "case_ii", t2.case_ii);
      emit(r, "case_iii", t2.case_iii);
      emit(r, "term2", t2.total);
      emit(r, "rhs", rhs_lower_bound(kernel, coupling, r, arm, budget));
    } else if (variant == "perc") {
      emit(r, "boundary_sum", boundary_kernel_sum(kernel, coupling, r));
      emit(r, "numerator", numerator_sum(kernel, coupling, r));
      emit(r, "rhs", perc_rhs_bound(kernel, coupling, r, budget));
    } else {
      throw ConfigError("config: unknown scaling variant '" + variant + "'");
    }
  }

  if (cfg.flag("fit", true) && radii.size() >= 4) {
    for (auto& [term, pts] : series) {
      FitResult fit = fit_exponent(pts);
      Json row = make_row(sink.record.config_hash, "scaling", "shell-sum-scaling",
                          "slope_" + term);
      row["d"] = d;
      row["slope"] = fit.slope;
      row["slope_err"] = fit.slope_err;
      row["curvature"] = fit.curvature;
      row["curved"] = fit.curvature_flag;
      row["seed"] = budget.seed;
      log << "slope " << term << " = " << fit.slope << " +- " << fit.slope_err
          << (fit.curvature_flag ? " (curved)" : "") << "\n";
      sink.row(std::move(row));
    }
  }

  finish_sink(sink);
  return {sink.record, true};
}

// ---------------------------------------------------------------------------

RunOutcome run_fit(const ExperimentConfig& cfg, std::ostream& log) {
  Sink sink = make_sink(cfg, "fit");
  std::string source = cfg.require("source");
  std::string mode = cfg.str("fit_mode", "slope");
  auto rows = read_jsonl(source);

  auto series_of = [&](const std::string& obs) {
    std::map<double, Estimate> latest;
    for (auto& row : rows) {
      if (row.value("obs", "") != obs) continue;
      if (cfg.has("select_kind") && row.value("kind", "") != cfg.str("select_kind", ""))
        continue;
      Estimate e;
      e.mean = row.value("mean", 0.0);
      e.std_err = row.value("stderr", 0.0);
      e.count = row.value("n", std::uint64_t(0));
      latest[row.value("r", 0.0)] = e;
    }
    std::vector<std::pair<double, Estimate>> out(latest.begin(), latest.end());
    return out;
  };

  if (mode == "rho") {
    auto series = series_of(cfg.str("select_obs", "one_arm"));
    FitResult fit = estimate_rho(series);
    Json row = make_row(sink.record.config_hash, "fit", "one-arm-decay", "rho_fit");
    row["slope"] = fit.slope;
    row["slope_err"] = fit.slope_err;
    row["rho"] = -fit.slope;
    row["curved"] = fit.curvature_flag;
    row["note"] = fit.note;
    row["points"] = series.size();
    log << "rho fit: slope=" << fit.slope << " +- " << fit.slope_err
        << " (rate estimate " << -fit.slope << ")\n";
    sink.row(std::move(row));
  } else if (mode == "slope") {
    auto series = series_of(cfg.require("select_obs"));
    std::vector<FitPoint> pts;
    for (auto& [r, e] : series) pts.push_back({r, e.mean, e.std_err});
    FitResult fit = fit_loglog(pts);
    Json row = make_row(sink.record.config_hash, "fit", "plumbing", "slope_fit");
    row["slope"] = fit.slope;
    row["slope_err"] = fit.slope_err;
    row["curved"] = fit.curvature_flag;
    row["points"] = pts.size();
    log << "slope fit: " << fit.slope << " +- " << fit.slope_err << "\n";
    sink.row(std::move(row));
  } else if (mode == "tasaki") {
    auto arm = series_of("one_arm");
    auto two_point = series_of("two_point");
    double range = cfg.num("range", 1.0);
    TasakiReport rep = tasaki_check(arm, two_point, range);
    for (auto& r : rep.rows) {
      Json row = make_row(sink.record.config_hash, "fit", "arm-vs-two-point-bound",
                          "tasaki");
      row["x"] = r.x_norm;
      row["r"] = r.r;
      row["lhs"] = r.lhs.mean;
      row["lhs_err"] = r.lhs.std_err;
      row["rhs"] = r.rhs;
      row["rhs_err"] = r.rhs_err;
      row["margin_sigma"] = r.margin_sigma;
      row["pass"] = !r.violation;
      sink.check(!r.violation);
      log << "tasaki |x|=" << r.x_norm << " lhs=" << r.lhs.mean << " rhs=" << r.rhs
          << " margin=" << r.margin_sigma << " sigma" << (r.violation ? " FAIL" : " PASS")
          << "\n";
      sink.row(std::move(row));
    }
  } else {
    throw ConfigError("config: unknown fit_mode '" + mode + "'");
  }

  finish_sink(sink);
  return {sink.record, sink.record.all_pass()};
}

// ---------------------------------------------------------------------------

RunOutcome run_report(const ExperimentConfig& cfg, std::ostream& log) {
  Sink sink = make_sink(cfg, "report");
  sink.enabled = false;  // the report reads results; it does not append rows
  std::string out_dir = cfg.str("report_dir", "report");
  std::vector<Json> rows;
  if (cfg.has("inputs")) {
    std::stringstream ss(cfg.require("inputs"));
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) {
        auto part = read_jsonl(tok);
        rows.insert(rows.end(), part.begin(), part.end());
      }
  }

  std::filesystem::create_directories(out_dir);
  std::ofstream summary(out_dir + "/summary.txt");

  std::set<std::string> versions;
  for (auto& row : rows) versions.insert(row.value("v", "?"));
  if (versions.size() > 1) {
    log << "warning: mixed artifact versions in report inputs\n";
    summary << "warning: mixed artifact versions\n";
  }

  std::map<std::string, std::pair<int, int>> anchor_counts;  // anchor -> (pass, flagged)
  std::map<std::string, int> anchor_rows;
  std::map<std::string, std::vector<Json>> by_obs;
  for (auto& row : rows) {
    std::string anchor = row.value("anchor", "plumbing");
    ++anchor_rows[anchor];
    if (row.contains("pass")) {
      ++anchor_counts[anchor].second;
      if (row["pass"].get<bool>()) ++anchor_counts[anchor].first;
    }
    if (row.contains("r") && row.contains("mean"))
      by_obs[row.value("obs", "value")].push_back(row);
  }

  summary << "rows: " << rows.size() << "\n";
  for (auto& [anchor, count] : anchor_rows) {
    summary << anchor << ": " << count << " rows";
    auto it = anchor_counts.find(anchor);
    if (it != anchor_counts.end())
      summary << ", " << it->second.first << "/" << it->second.second << " checks pass";
    summary << "\n";
    log << "report " << anchor << ": " << count << " rows\n";
  }

  for (auto& [obs, obs_rows] : by_obs) {
    std::ofstream csv(out_dir + "/" + obs + ".csv");
    csv << "r,value,stderr\n";
    std::vector<Json> sorted = obs_rows;
    std::sort(sorted.begin(), sorted.end(), [](const Json& a, const Json& b) {
      return a.value("r", 0.0) < b.value("r", 0.0);
    });
    for (auto& row : sorted)
      csv << row.value("r", 0.0) << "," << row.value("mean", 0.0) << ","
          << row.value("stderr", 0.0) << "\n";
  }

  bool pass = true;
  for (auto& [anchor, counts] : anchor_counts)
    if (counts.first != counts.second) pass = false;
  log << "report written to " << out_dir << "\n";
  finish_sink(sink);
  return {sink.record, pass};
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  apply_workers(cfg);
  std::string kind = cfg.require("kind");
  if (kind == "verify-exact") return run_verify(cfg, log);
  if (kind == "ising-arm") return run_ising_arm(cfg, log);
  if (kind == "ising-twopoint") return run_ising_twopoint(cfg, log);
  if (kind == "worm") return run_worm(cfg, log);
  if (kind == "percolation") return run_percolation(cfg, log);
  if (kind == "scaling") return run_scaling(cfg, log);
  if (kind == "fit") return run_fit(cfg, log);
  if (kind == "report") return run_report(cfg, log);
  throw ConfigError("config: unknown kind '" + kind + "'");
}

}  // namespace onearm
