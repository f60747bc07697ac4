#include "tmest/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "tmest/csv.hpp"
#include "tmest/dist.hpp"
#include "tmest/error.hpp"
#include "tmest/eval.hpp"
#include "tmest/gan.hpp"
#include "tmest/projd.hpp"
#include "tmest/topology.hpp"

namespace tmest {

TrafficVector synth_tm(std::size_t p, double alpha, double max_mbps, Rng& rng) {
  if (p < 1) throw Error(ErrorCode::InvalidInput, "p must be at least 1");
  if (!(max_mbps > 0.0) || !std::isfinite(max_mbps)) {
    throw Error(ErrorCode::InvalidInput, "max demand must be positive and finite");
  }
  const auto y = sample_normalized_power_law(p, alpha, rng);
  Eigen::VectorXd x(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) x[static_cast<Eigen::Index>(j)] = max_mbps * y[j];
  return TrafficVector(std::move(x));
}

namespace {

using nlohmann::json;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string topology;
  std::string support;
  std::string mode = "sp";
  int format_version = 1;
};

struct MethodOptions {
  std::string method;
  // projd
  std::optional<double> alpha;
  std::vector<std::string> target_tms;
  int cycles = 20;
  int inner = 50;
  int retries = 8;
  std::string row_order = "cyclic";
  std::optional<int> polish;
  double tolerance = 1e-9;
  // gan
  std::string weights;
  int inits = 100;
  int steps = 10000;
  double learning_rate = 1e-3;
};

struct Network {
  Topology topo;
  SupportSet support;
  RoutingMatrix routing;
};

std::uint64_t resolve_seed(const GlobalOptions& g) {
  if (g.seed) return *g.seed;
  if (const char* env = std::getenv("TMEST_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidInput, std::string("TMEST_SEED is not an integer: ") + env);
  }
  return 0;
}

Topology load_topology(const GlobalOptions& g) {
  if (g.topology.empty()) {
    throw CLI::RequiredError("--topology");
  }
  return read_topology_csv(g.topology);
}

Network load_network(const GlobalOptions& g) {
  auto topo = load_topology(g);
  auto support = g.support.empty() ? SupportSet::all_pairs(topo.node_count())
                                   : read_support_csv(g.support, topo);
  auto routing = build_routing_matrix(topo, support, parse_routing_mode(g.mode));
  return Network{std::move(topo), std::move(support), std::move(routing)};
}

/// Writes to `path`, or to `fallback` when the path is empty or "-".
void emit(const std::string& path, std::ostream& fallback,
          const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  body(f);
  if (!f) throw Error(ErrorCode::Io, "write failed for " + path);
}

std::vector<double> read_demand_column(const std::string& path) {
  const auto table = csv::read(path);
  csv::expect_header(table, {"src", "dst", "demand_mbps"}, {}, path);
  std::vector<double> d;
  d.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    d.push_back(csv::parse_double(table.rows[r][2], path, table.lines[r]));
  }
  return d;
}

NormalizedCdf resolve_target(const MethodOptions& m) {
  if (m.alpha && !m.target_tms.empty()) {
    throw CLI::ValidationError("--alpha and --target-tm are mutually exclusive");
  }
  if (m.alpha) return NormalizedCdf::power_law(*m.alpha);
  if (!m.target_tms.empty()) {
    std::vector<double> pooled;
    for (const auto& path : m.target_tms) {
      const auto y = normalize_positive(read_demand_column(path));
      pooled.insert(pooled.end(), y.begin(), y.end());
    }
    return NormalizedCdf::tabulated(pooled);
  }
  throw CLI::ValidationError("a target distribution is required: --alpha or --target-tm");
}

ProjDConfig projd_config(const MethodOptions& m, std::uint64_t seed) {
  ProjDConfig c;
  c.cycles = m.cycles;
  c.inner_cycles = m.inner;
  c.retries = m.retries;
  c.row_order = parse_row_order(m.row_order);
  c.polish_cycles = m.polish;
  c.tolerance = m.tolerance;
  c.seed = seed;
  return c;
}

GanEstimateConfig gan_config(const MethodOptions& m, std::uint64_t seed) {
  GanEstimateConfig c;
  c.init_candidates = m.inits;
  c.steps = m.steps;
  c.adam.learning_rate = m.learning_rate;
  c.seed = seed;
  return c;
}

std::shared_ptr<const GeneratorNet> load_weights(const MethodOptions& m) {
  if (m.weights.empty()) throw CLI::RequiredError("--weights");
  return std::make_shared<const GeneratorNet>(load_generator(m.weights));
}

void add_method_options(CLI::App* cmd, MethodOptions& m) {
  cmd->add_option("--method", m.method, "projd or gan")
      ->required()
      ->check(CLI::IsMember({"projd", "gan"}));
  cmd->add_option("--alpha", m.alpha, "power-law target exponent")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--target-tm", m.target_tms,
                  "TM files whose pooled normalized cdf is the target");
  cmd->add_option("--cycles", m.cycles, "Proj-D outer iterations K")
      ->check(CLI::Range(1, 1000000));
  cmd->add_option("--inner", m.inner, "Proj-D projection sweeps per snap t")
      ->check(CLI::Range(1, 1000000));
  cmd->add_option("--retries", m.retries, "Proj-D candidate draws per snap R")
      ->check(CLI::Range(1, 100000));
  cmd->add_option("--row-order", m.row_order, "cyclic or random")
      ->check(CLI::IsMember({"cyclic", "random"}));
  cmd->add_option("--polish", m.polish, "projection sweeps after the last snap")
      ->check(CLI::Range(0, 1000000));
  cmd->add_option("--tolerance", m.tolerance, "relative residual stop threshold")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--weights", m.weights, "generator weight file (gan)");
  cmd->add_option("--inits", m.inits, "GAN-D initial latent candidates N_i")
      ->check(CLI::Range(1, 10000000));
  cmd->add_option("--steps", m.steps, "GAN-D Adam steps N_2")
      ->check(CLI::Range(0, 100000000));
  cmd->add_option("--lr", m.learning_rate, "GAN-D Adam learning rate")
      ->check(CLI::PositiveNumber);
}

json snap_json(const SnapReport& s) {
  return {{"lambda", s.lambda}, {"deviation", s.deviation},
          {"candidate_index", s.candidate_index}};
}

std::vector<TrafficVector> read_tms(const std::vector<std::string>& paths,
                                    const Network& net) {
  std::vector<TrafficVector> tms;
  tms.reserve(paths.size());
  for (const auto& p : paths) tms.push_back(read_tm_csv(p, net.topo, net.support));
  return tms;
}

std::string sibling_name(const std::string& out, std::size_t index, std::size_t count) {
  if (count == 1) return out;
  std::filesystem::path p(out);
  std::ostringstream name;
  name << p.stem().string() << '_' << index << p.extension().string();
  return (p.parent_path() / name.str()).string();
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic-matrix estimation from link loads under a demand-size "
               "distribution constraint",
               "tmest"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file; flags override it");

  GlobalOptions g;
  app.add_option("--seed", g.seed, "random seed (fallback: TMEST_SEED, then 0)");
  app.add_option("--topology", g.topology, "topology CSV src,dst,weight[,capacity]");
  app.add_option("--support", g.support, "support CSV src,dst (default: all pairs)");
  app.add_option("--mode", g.mode, "routing: sp or ecmp")
      ->check(CLI::IsMember({"sp", "ecmp"}));
  app.add_option("--format-version", g.format_version, "weight file format version")
      ->check(CLI::Range(1, 1));

  std::string out_path;
  std::string tm_path;
  std::vector<std::string> tm_paths;
  std::vector<std::string> est_paths;
  std::string loads_path;
  std::string diag_path;
  std::string out_dir;
  double alpha = 0.0;
  double max_mbps = 1000.0;
  std::optional<std::size_t> p_opt;
  std::size_t count = 1;
  int jobs = 1;
  std::size_t scatter_tms = 10;
  MethodOptions method;
  std::optional<double> plot_alpha;
  std::vector<std::string> plot_target_tms;

  auto* routes = app.add_subcommand("routes", "write the routing matrix as sparse CSV");
  routes->add_option("--out", out_path, "output CSV (default stdout)");

  auto* loads = app.add_subcommand("loads", "compute link loads b = A x for a TM");
  loads->add_option("--tm", tm_path, "TM CSV src,dst,demand_mbps")->required();
  loads->add_option("--out", out_path, "output CSV (default stdout)");

  auto* synth = app.add_subcommand("synth", "draw synthetic power-law TMs");
  synth->add_option("--alpha", alpha, "power-law exponent")
      ->required()
      ->check(CLI::PositiveNumber);
  synth->add_option("--max-mbps,--total-mbps", max_mbps, "largest demand in Mbps")
      ->check(CLI::PositiveNumber);
  synth->add_option("--p", p_opt, "number of demands (first p support pairs)");
  synth->add_option("--count", count, "number of TMs; TM i uses seed + i")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  synth->add_option("--out", out_path,
                    "output CSV; with --count > 1 a _<i> suffix is added");

  auto* fit = app.add_subcommand("fit-dist", "fit the power-law exponent to TMs");
  fit->add_option("--tm", tm_paths, "TM CSV files")->required();
  fit->add_option("--out", out_path, "output JSON (default stdout)");

  auto* estimate = app.add_subcommand("estimate", "estimate a TM from link loads");
  add_method_options(estimate, method);
  estimate->add_option("--loads", loads_path, "link-load CSV src,dst,load_mbps")->required();
  estimate->add_option("--out", out_path, "estimated TM CSV")->required();
  estimate->add_option("--diagnostics", diag_path,
                       "diagnostics JSON (default <out>.diagnostics.json)");

  auto* eval = app.add_subcommand("eval", "run an estimator over TMs and score it");
  add_method_options(eval, method);
  eval->add_option("--tm", tm_paths, "ground-truth TM CSV files")->required();
  eval->add_option("--out-dir", out_dir, "directory for report.json and plot CSVs")
      ->required();
  eval->add_option("--jobs", jobs, "parallel TM estimations")->check(CLI::Range(1, 1024));
  eval->add_option("--scatter-tms", scatter_tms, "TMs included in demand/link plots");

  auto* plot = app.add_subcommand("export-plot", "write plot data for existing estimates");
  plot->add_option("--truth", tm_paths, "ground-truth TM CSV files")->required();
  plot->add_option("--est", est_paths, "estimated TM CSV files, same order")->required();
  plot->add_option("--alpha", plot_alpha, "power-law target exponent")
      ->check(CLI::PositiveNumber);
  plot->add_option("--target-tm", plot_target_tms, "TM files defining the target cdf");
  plot->add_option("--out-dir", out_dir, "output directory")->required();
  plot->add_option("--scatter-tms", scatter_tms, "TMs included in demand/link plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    const auto seed = resolve_seed(g);

    if (*routes) {
      const auto net = load_network(g);
      emit(out_path, out, [&](std::ostream& o) {
        csv::write_row(o, {"link_src", "link_dst", "src", "dst", "fraction"});
        const auto& a = net.routing.matrix();
        for (Eigen::Index i = 0; i < a.outerSize(); ++i) {
          const auto& l = net.topo.link(static_cast<std::size_t>(i));
          for (SparseRowMatrix::InnerIterator it(a, i); it; ++it) {
            const auto& pair = net.support[static_cast<std::size_t>(it.col())];
            csv::write_row(o, {net.topo.node_name(l.src), net.topo.node_name(l.dst),
                               net.topo.node_name(pair.src),
                               net.topo.node_name(pair.dst),
                               csv::format_double(it.value())});
          }
        }
      });
    } else if (*loads) {
      const auto net = load_network(g);
      const auto x = read_tm_csv(tm_path, net.topo, net.support);
      const auto b = simulate_loads(net.routing, x);
      emit(out_path, out, [&](std::ostream& o) { write_loads_csv(o, net.topo, b); });
    } else if (*synth) {
      const auto topo = load_topology(g);
      const auto support = g.support.empty() ? SupportSet::all_pairs(topo.node_count())
                                             : read_support_csv(g.support, topo);
      const auto p = p_opt.value_or(support.size());
      if (p < 1 || p > support.size()) {
        throw CLI::ValidationError("--p must be between 1 and the support size (" +
                                   std::to_string(support.size()) + ")");
      }
      if (count > 1 && (out_path.empty() || out_path == "-")) {
        throw CLI::ValidationError("--count > 1 needs --out");
      }
      const SupportSet used(std::vector<OdPair>(support.pairs().begin(),
                                                support.pairs().begin() +
                                                    static_cast<std::ptrdiff_t>(p)),
                            topo.node_count());
      for (std::size_t k = 0; k < count; ++k) {
        Rng rng(seed + k);
        const auto x = synth_tm(p, alpha, max_mbps, rng);
        emit(sibling_name(out_path, k, count), out,
             [&](std::ostream& o) { write_tm_csv(o, topo, used, x); });
      }
    } else if (*fit) {
      std::vector<std::vector<double>> tms;
      for (const auto& path : tm_paths) tms.push_back(read_demand_column(path));
      const double a_hat = fit_alpha_mle(tms);
      std::vector<double> pooled;
      for (const auto& tm : tms) {
        const auto y = normalize_positive(tm);
        pooled.insert(pooled.end(), y.begin(), y.end());
      }
      const json doc{{"alpha", a_hat},
                     {"n_positive", pooled.size()},
                     {"ks_to_fit", ks_distance(pooled, NormalizedCdf::power_law(a_hat))}};
      emit(out_path, out, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
    } else if (*estimate) {
      const auto net = load_network(g);
      const auto b = read_loads_csv(loads_path, net.topo);
      json diag{{"method", method.method}, {"seed", seed},
                {"routing_mode", to_string(net.routing.mode())}};
      std::optional<TrafficVector> x;
      if (method.method == "projd") {
        const auto target = resolve_target(method);
        const auto config = projd_config(method, seed);
        auto r = proj_d_estimate(net.routing, b, target, config);
        const auto& d = r.diagnostics;
        json snaps = json::array();
        for (const auto& s : d.snaps) snaps.push_back(snap_json(s));
        diag["cycles"] = config.cycles;
        diag["inner_cycles"] = config.inner_cycles;
        diag["retries"] = config.retries;
        diag["polish_cycles"] = config.effective_polish_cycles();
        diag["row_order"] = to_string(config.row_order);
        diag["snaps"] = std::move(snaps);
        diag["residual_trace"] = d.residual_trace;
        diag["change_trace"] = d.change_trace;
        diag["ks_to_target"] = d.final_ks ? json(*d.final_ks) : json(nullptr);
        x = std::move(r.estimate);
      } else {
        const auto weights = load_weights(method);
        const auto config = gan_config(method, seed);
        auto r = gan_estimate(*weights, net.routing, b, config);
        const auto& d = r.diagnostics;
        diag["init_candidates"] = config.init_candidates;
        diag["steps"] = config.steps;
        diag["chosen_candidate"] = d.chosen_candidate;
        diag["best_loss"] = d.best_loss;
        diag["best_step"] = d.best_step;
        diag["loss_trace"] = d.loss_trace;
        x = std::move(r.estimate);
      }
      const auto res = residual(net.routing, *x, b);
      diag["relative_residual"] = res.relative;
      diag["l2_residual"] = res.l2;
      emit(out_path, out, [&](std::ostream& o) { write_tm_csv(o, net.topo, net.support, *x); });
      emit(diag_path.empty() ? out_path + ".diagnostics.json" : diag_path, out,
           [&](std::ostream& o) { o << diag.dump(2) << '\n'; });
    } else if (*eval) {
      const auto net = load_network(g);
      const auto tms = read_tms(tm_paths, net);
      const auto target = resolve_target(method);
      const auto estimator =
          method.method == "projd"
              ? make_projd_estimator(target, projd_config(method, seed))
              : make_gan_estimator(load_weights(method), gan_config(method, seed));
      const auto result = run_experiment(net.routing, tms, target, estimator,
                                         ExperimentOptions{seed, jobs});
      std::filesystem::create_directories(out_dir);
      emit((std::filesystem::path(out_dir) / "report.json").string(), out,
           [&](std::ostream& o) { o << report_to_json(result.report) << '\n'; });
      write_plot_data(out_dir, net.topo, net.routing, tms, result.estimates, target,
                      PlotOptions{scatter_tms, 1001});
      for (std::size_t k = 0; k < tms.size(); ++k) {
        const auto name = (std::filesystem::path(out_dir) /
                           ("estimate_" + std::to_string(k) + ".csv"))
                              .string();
        emit(name, out, [&](std::ostream& o) {
          write_tm_csv(o, net.topo, net.support, result.estimates[k]);
        });
      }
    } else if (*plot) {
      if (tm_paths.size() != est_paths.size()) {
        throw CLI::ValidationError("--truth and --est need the same number of files");
      }
      const auto net = load_network(g);
      const auto truths = read_tms(tm_paths, net);
      const auto ests = read_tms(est_paths, net);
      MethodOptions target_opts;
      target_opts.alpha = plot_alpha;
      target_opts.target_tms = plot_target_tms;
      const auto target = resolve_target(target_opts);
      write_plot_data(out_dir, net.topo, net.routing, truths, ests, target,
                      PlotOptions{scatter_tms, 1001});
      emit((std::filesystem::path(out_dir) / "report.json").string(), out,
           [&](std::ostream& o) {
             o << report_to_json(score(net.routing, truths, ests, target)) << '\n';
           });
    }
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace tmest
