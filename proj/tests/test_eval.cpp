#include <doctest.h>

#include <Eigen/Dense>
#include <filesystem>
#include <json.hpp>
#include <mutex>
#include <numeric>
#include <random>

#include "support.hpp"
#include "tmest/csv.hpp"
#include "tmest/error.hpp"
#include "tmest/eval.hpp"

using namespace tmest;
namespace fs = std::filesystem;

namespace {

TrafficVector tv(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return TrafficVector(x);
}

double num(const std::string& field) { return std::stod(field); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

std::vector<TrafficVector> power_law_tms(std::size_t count, std::size_t p, double alpha,
                                         std::uint64_t seed) {
  std::vector<TrafficVector> tms;
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng(seed + k);
    const auto y = sample_normalized_power_law(p, alpha, rng);
    tms.emplace_back(100.0 * Eigen::Map<const Eigen::VectorXd>(y.data(), Eigen::Index(p)));
  }
  return tms;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("metric hand cases") {
  const auto truth = tv({2.0, 2.0});
  CHECK(nmae(truth, truth) == 0.0);
  CHECK(nmae(truth, tv({0.0, 0.0})) == 1.0);
  CHECK(nmae(truth, tv({1.0, 3.0})) == doctest::Approx(0.5));
  CHECK(rmse(truth, truth) == 0.0);

  CHECK(rmse(tv({0.0, 4.0}), tv({9.0, 1.0})) == doctest::Approx(3.0));
  CHECK(rmse(tv({0.0, 4.0}), tv({9.0, 1.0}), Mask::All) == doctest::Approx(std::sqrt(45.0)));
  CHECK(nmae(tv({0.0, 4.0}), tv({9.0, 1.0})) == doctest::Approx(0.75));

  CHECK(code_of([&] { nmae(tv({0.0, 0.0}), tv({1.0, 1.0})); }) == ErrorCode::ZeroTruth);
  CHECK(code_of([&] { rmse(tv({0.0, 0.0}), tv({1.0, 1.0})); }) == ErrorCode::EmptyMask);
  CHECK(code_of([&] { nmae(tv({1.0}), tv({1.0, 1.0})); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("metrics match loop implementations and ignore ordering") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  std::bernoulli_distribution zero(0.2);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index p = 40;
    Eigen::VectorXd x(p), e(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      x[j] = zero(gen) ? 0.0 : u(gen);
      e[j] = u(gen);
    }
    x[0] = 1.0;
    long double abs_err = 0, abs_truth = 0, sq = 0;
    int count = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (x[j] <= 0.0) continue;
      abs_err += std::fabs((long double)x[j] - e[j]);
      abs_truth += x[j];
      sq += ((long double)x[j] - e[j]) * ((long double)x[j] - e[j]);
      ++count;
    }
    const double n_oracle = double(abs_err / abs_truth);
    const double r_oracle = double(std::sqrt(sq / count));
    CHECK(std::abs(nmae(TrafficVector(x), TrafficVector(e)) - n_oracle) <= 1e-12 * n_oracle);
    CHECK(std::abs(rmse(TrafficVector(x), TrafficVector(e)) - r_oracle) <= 1e-12 * r_oracle);

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(p));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    Eigen::VectorXd xp(p), ep(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      xp[j] = x[perm[std::size_t(j)]];
      ep[j] = e[perm[std::size_t(j)]];
    }
    CHECK(nmae(TrafficVector(xp), TrafficVector(ep)) ==
          doctest::Approx(nmae(TrafficVector(x), TrafficVector(e))).epsilon(1e-12));
    CHECK(rmse(TrafficVector(xp), TrafficVector(ep)) ==
          doctest::Approx(rmse(TrafficVector(x), TrafficVector(e))).epsilon(1e-12));
  }
}

TEST_CASE("identity estimator scores zero") {
  const auto inst = tmest::testing::synthetic_instance(12, 40, 0.5, 100.0, RoutingMode::Ecmp, 2);
  const auto tms = power_law_tms(4, 40, 0.5, 7);
  std::size_t calls = 0;
  std::mutex mu;
  const Estimator oracle = [&](const RoutingMatrix& a, const LinkLoadVector& b, std::uint64_t) {
    {
      std::lock_guard lock(mu);
      ++calls;
    }
    // Recover the truth whose loads these are.
    for (const auto& x : tms) {
      if ((simulate_loads(a, x).values() - b.values()).norm() == 0.0) return x;
    }
    FAIL("loads do not belong to any TM");
    return TrafficVector::zero(a.cols());
  };
  const auto r = run_experiment(inst.a, tms, NormalizedCdf::power_law(0.5), oracle, {0, 2});
  CHECK(calls == 4);
  CHECK(r.report.nmae == 0.0);
  CHECK(r.report.rmse_mbps == 0.0);
  CHECK(r.report.relative_link_residual == 0.0);
  CHECK(r.report.per_tm.size() == 4);
  CHECK(r.loads.size() == 4);
}

TEST_CASE("Proj-D experiment on synthetic TMs") {
  const auto inst = tmest::testing::synthetic_instance(20, 80, 0.5, 100.0, RoutingMode::ShortestPath, 3);
  const auto tms = power_law_tms(3, 80, 0.5, 100);
  const auto target = NormalizedCdf::power_law(0.5);
  ProjDConfig cfg;
  cfg.polish_cycles = 2000;
  const auto est = make_projd_estimator(target, cfg);
  const auto r1 = run_experiment(inst.a, tms, target, est, {5, 1});
  CHECK(r1.report.relative_link_residual < 1e-3);
  REQUIRE(r1.report.ks_to_target.has_value());
  CHECK(*r1.report.ks_to_target >= 0.0);
  CHECK(r1.report.nmae > 0.0);
  for (const auto& s : r1.report.per_tm) CHECK(s.relative_link_residual < 1e-3);

  const auto r3 = run_experiment(inst.a, tms, target, est, {5, 3});
  for (std::size_t k = 0; k < tms.size(); ++k) {
    CHECK(r1.estimates[k].values() == r3.estimates[k].values());
  }
  CHECK(r1.report.nmae == r3.report.nmae);

  // TM k uses seed base + k.
  ProjDConfig single = cfg;
  single.seed = 6;
  const auto direct = proj_d_estimate(inst.a, simulate_loads(inst.a, tms[1]), target, single);
  CHECK(direct.estimate.values() == r1.estimates[1].values());

  const auto again = score(inst.a, tms, r1.estimates, target);
  CHECK(again.nmae == r1.report.nmae);
  CHECK(again.rmse_mbps == r1.report.rmse_mbps);

  const auto doc = nlohmann::json::parse(report_to_json(r1.report));
  CHECK(doc.at("nmae").get<double>() == r1.report.nmae);
  CHECK(doc.at("per_tm").size() == 3);
  CHECK(doc.contains("relative_link_residual"));
  CHECK(doc.contains("rmse_mbps_mean"));
}

TEST_CASE("pooled and per-TM aggregates") {
  const auto inst = tmest::testing::synthetic_instance(6, 4, 1.0, 10.0, RoutingMode::ShortestPath, 4);
  const std::vector<TrafficVector> truths{tv({1, 1, 1, 1}), tv({10, 10, 10, 10})};
  const std::vector<TrafficVector> ests{tv({2, 2, 2, 2}), tv({10, 10, 10, 10})};
  const auto r = score(inst.a, truths, ests, NormalizedCdf::power_law(1.0));
  CHECK(r.nmae == doctest::Approx(4.0 / 44.0));
  CHECK(r.nmae_mean == doctest::Approx(0.5));
  CHECK(r.rmse_mbps == doctest::Approx(std::sqrt(4.0 / 8.0)));
  CHECK(r.rmse_mbps_mean == doctest::Approx(0.5));
}

TEST_CASE("estimator errors propagate") {
  const auto inst = tmest::testing::synthetic_instance(6, 10, 1.0, 10.0, RoutingMode::ShortestPath, 5);
  const auto tms = power_law_tms(3, 10, 1.0, 1);
  const Estimator bad = [](const RoutingMatrix&, const LinkLoadVector&, std::uint64_t seed) -> TrafficVector {
    if (seed == 1) throw Error(ErrorCode::DegenerateCandidate, "boom");
    return TrafficVector::zero(10);
  };
  CHECK(code_of([&] { run_experiment(inst.a, tms, NormalizedCdf::power_law(1.0), bad, {0, 2}); }) ==
        ErrorCode::DegenerateCandidate);
}

TEST_CASE("plot data files") {
  const auto inst = tmest::testing::synthetic_instance(10, 30, 0.5, 100.0, RoutingMode::Ecmp, 6);
  const auto truths = power_law_tms(3, 30, 0.5, 50);
  std::vector<TrafficVector> ests;
  for (const auto& x : truths) ests.emplace_back(0.5 * x.values());
  const auto dir = fs::temp_directory_path() / "tmest_plot_test";
  fs::remove_all(dir);
  PlotOptions opts;
  opts.scatter_tms = 2;
  opts.cdf_points = 11;
  write_plot_data(dir, inst.topo, inst.a, truths, ests, NormalizedCdf::power_law(0.5), opts);

  const auto cdf = csv::read(dir / "cdf.csv");
  CHECK(cdf.header == std::vector<std::string>{"value", "cdf_truth", "cdf_est", "cdf_target"});
  REQUIRE(cdf.rows.size() == 11);
  CHECK(num(cdf.rows.back()[1]) == 1.0);
  CHECK(num(cdf.rows.back()[2]) == 1.0);
  CHECK(num(cdf.rows[4][3]) == doctest::Approx(std::sqrt(0.4)));
  // Both series are scaled by their own batch maximum, so halving every
  // estimate leaves the estimate cdf equal to the truth cdf.
  for (const auto& row : cdf.rows) CHECK(row[1] == row[2]);
  double prev = 0.0;
  for (const auto& row : cdf.rows) {
    CHECK(num(row[1]) >= prev);
    prev = num(row[1]);
  }

  const auto demands = csv::read(dir / "demands.csv");
  CHECK(demands.header == std::vector<std::string>{"tm", "pair", "truth", "est"});
  CHECK(demands.rows.size() == 60);
  CHECK(num(demands.rows[0][3]) ==
        doctest::Approx(0.5 * num(demands.rows[0][2])));

  const auto links = csv::read(dir / "links.csv");
  CHECK(links.header == std::vector<std::string>{"tm", "link", "given", "fitted"});
  CHECK(links.rows.size() == 2 * std::size_t(inst.a.rows()));
  fs::remove_all(dir);
}

}  // TEST_SUITE
