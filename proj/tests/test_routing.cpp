#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "grpde/error.hpp"
#include "grpde/losses.hpp"
#include "grpde/metrics.hpp"
#include "grpde/routing.hpp"
#include "grpde/spectral.hpp"
#include "grpde/theory.hpp"
#include "oracles.hpp"

using namespace grpde;
using namespace grpde::test;

namespace {

Errc error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

std::vector<double> random_costs(std::size_t k, Rng& rng) {
  std::vector<double> c(k);
  for (double& v : c) v = rng.uniform();
  return c;
}

Field zero_mean_rhs(const GridSpec& g, Rng& rng) { return project_zero_mean(random_field(g, rng)); }

}  // namespace

TEST_CASE("ensemble construction") {
  const DiscreteOperator op = build_operator(GridSpec{1, 8}, OperatorKind::Poisson);
  CHECK(error_code([&] { (void)make_ensemble(op, {}); }) == Errc::InvalidArgument);
  CHECK(error_code([&] { (void)make_ensemble(op, {make_jacobi(2, 1.0)}); }) == Errc::BadId);
  const Ensemble ens = make_ensemble(op, {make_jacobi(1, 1.0), make_gauss_seidel(2)});
  CHECK(ens.at(2).label.size() > 0);
  CHECK(error_code([&] { (void)ens.at(3); }) == Errc::BadId);
  CHECK(error_code([&] { validate_policy(ens, SingleSolver{3}); }) == Errc::BadId);
  CHECK(error_code([&] { validate_policy(ens, Hints{2, 1, 1}); }) == Errc::BadTau);
  validate_policy(ens, Hints{2, 1, 2});
}

TEST_CASE("step costs") {
  const GridSpec g{1, 8};
  const DiscreteOperator op = build_operator(g, OperatorKind::Poisson);
  const Ensemble ens = make_ensemble(op, {make_jacobi(1, 1.0), make_gauss_seidel(2)});
  for (double c : step_costs(ens, Field(g))) CHECK(c == 0.0);

  const Ensemble exact = make_ensemble(diagonal_operator(g, 4.0), {make_jacobi(1, 1.0)});
  Rng rng(1);
  CHECK(step_costs(exact, random_field(g, rng))[0] == doctest::Approx(0.0));

  Field mode4(g);
  for (std::size_t i = 0; i < 8; ++i) mode4[i] = (i % 2 == 0) ? 1.0 : -1.0;
  const auto costs = step_costs(ens, mode4);
  const Eigen::MatrixXd a = dense_operator(op);
  const Eigen::VectorXd e = to_eigen(mode4);
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd p0 = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  CHECK(std::abs(costs[0] - (p0 * dense_jacobi_error(a, 1.0) * e).squaredNorm()) < 1e-9);
  CHECK(std::abs(costs[1] - (p0 * dense_gauss_seidel_error(a) * e).squaredNorm()) < 1e-9);
  CHECK(costs[0] == doctest::Approx(8.0));  // undamped Jacobi flips the alternating mode
}

TEST_CASE("greedy selection") {
  const std::vector<double> tie{0.5, 0.5};
  CHECK(greedy_select(tie) == 1);
  const std::vector<double> c{3.0, 1.0, 2.0};
  CHECK(greedy_select(c) == 2);
  CHECK(error_code([] { (void)greedy_select(std::vector<double>{}); }) == Errc::EmptyCosts);
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> v(1 + rng.below(6));
    for (double& x : v) x = static_cast<double>(rng.below(4));  // frequent ties
    int best = 1;
    for (std::size_t j = 1; j < v.size(); ++j)
      if (v[j] < v[static_cast<std::size_t>(best - 1)]) best = static_cast<int>(j) + 1;
    CHECK(greedy_select(v) == best);
  }
}

TEST_CASE("hints schedule") {
  const Hints h{2, 1, 25};
  CHECK(hints_select(25, h) == 2);
  for (int t = 1; t < 25; ++t) CHECK(hints_select(t, h) == 1);
  CHECK(hints_select(50, h) == 2);
  CHECK(hints_select(30, Hints{2, 1, 15}) == 2);
  CHECK(hints_select(31, Hints{2, 1, 15}) == 1);
  CHECK(error_code([] { (void)hints_select(3, Hints{2, 1, 1}); }) == Errc::BadTau);
}

TEST_CASE("argmax and learned selection") {
  CHECK(argmax_select(std::vector<double>{0.1, 2.0}) == 2);
  CHECK(argmax_select(std::vector<double>{1.0, 1.0, 0.5}) == 1);
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> g(2 + rng.below(4));
    for (double& x : g) x = rng.normal();
    std::vector<double> shifted = g;
    const double s = 100.0 * rng.normal();
    for (double& x : shifted) x += s;
    CHECK(argmax_select(g) == argmax_select(shifted));
  }

  nn::LstmRouter zero(nn::LstmRouterSpec{16, 4, 4, 2, 3});
  nn::LstmState state = zero.initial_state(1);
  const GridSpec g{1, 8};
  const Eigen::VectorXd feats = router_features(random_field(g, rng), random_field(g, rng));
  CHECK(feats.size() == 16);
  CHECK(learned_select(zero, feats, state) == 1);
  CHECK(error_code([&] { (void)learned_select(zero, Eigen::VectorXd::Zero(5), state); }) == Errc::ShapeMismatch);
}

TEST_CASE("router features are scale free") {
  const GridSpec g{1, 8};
  Rng rng(4);
  const Field r = random_field(g, rng), f = random_field(g, rng);
  const Eigen::VectorXd a = router_features(r, f);
  const Eigen::VectorXd b = router_features(1e-6 * r, 3.0 * f);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXd z = router_features(Field(g), f);
  CHECK(z.head(8).cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.tail(8).squaredNorm() == doctest::Approx(8.0));
}

TEST_CASE("run_hybrid basics") {
  const GridSpec g{1, 16};
  const DiscreteOperator op = build_operator(g, OperatorKind::Poisson);
  Rng rng(5);
  const Field f = zero_mean_rhs(g, rng);
  const Field u = reference_solution(op, f);
  const Ensemble one = make_ensemble(op, {make_jacobi(1, 0.8)});

  const RouteTrace t0 = run_hybrid(one, SingleSolver{1}, f, 0);
  CHECK(t0.steps() == 0);
  REQUIRE(t0.error_norm.size() == 1);
  CHECK(t0.error_norm[0] == doctest::Approx(u.norm()));

  const RouteTrace single = run_hybrid(one, SingleSolver{1}, f, 12);
  const RouteTrace greedy = run_hybrid(one, GreedyOracle{}, f, 12);
  CHECK(single.error_norm == greedy.error_norm);
  CHECK(single.chosen == greedy.chosen);
  CHECK(greedy.costs.size() == 12);

  // Iteration by hand.
  Field it(g);
  for (int t = 0; t < 12; ++t) it += jacobi_apply(op, residual(op, it, f), 0.8);
  CHECK(single.final_iterate.data() == it.data());
  CHECK(single.residual_norm.back() == doctest::Approx(residual(op, it, f).norm()));
  CHECK(single.error_norm.back() == doctest::Approx(project_zero_mean(it - u).norm()));

  // A nonzero initial iterate.
  RunOptions opts;
  opts.u0 = &u;
  const RouteTrace from_exact = run_hybrid(one, SingleSolver{1}, f, 3, opts);
  for (double e : from_exact.error_norm) CHECK(e < 1e-12);
}

TEST_CASE("greedy oracle equals the two-branch lookahead") {
  const GridSpec g{1, 16};
  const DiscreteOperator op = build_operator(g, OperatorKind::Poisson);
  const Ensemble ens = make_ensemble(op, {make_jacobi(1, 1.0), make_gauss_seidel(2)});
  const Eigen::MatrixXd a = dense_operator(op);
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd p0 = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd m1 = p0 * dense_jacobi_error(a, 1.0), m2 = p0 * dense_gauss_seidel_error(a);
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const Field f = zero_mean_rhs(g, rng);
    const RouteTrace tr = run_hybrid(ens, GreedyOracle{}, f, 5);
    Eigen::VectorXd e = p0 * -to_eigen(reference_solution(op, f));
    for (int t = 0; t < 5; ++t) {
      const Eigen::VectorXd a1 = m1 * e, a2 = m2 * e;
      const bool pick2 = a2.squaredNorm() < a1.squaredNorm();
      e = pick2 ? a2 : a1;
      CHECK(tr.chosen[static_cast<std::size_t>(t)] == (pick2 ? 2 : 1));
      CHECK(std::abs(tr.error_norm[static_cast<std::size_t>(t) + 1] - e.norm()) < 1e-9 * (1.0 + e.norm()));
    }
  }
}

TEST_CASE("greedy one-step dominance and monotone decay") {
  for (GridSpec g : {GridSpec{1, 32}, GridSpec{2, 8}}) {
    for (bool helmholtz : {false, true}) {
      const DiscreteOperator op = helmholtz ? build_operator(g, OperatorKind::Helmholtz, 1.0)
                                            : build_operator(g, OperatorKind::Poisson);
      const Ensemble ens = make_ensemble(op, {make_jacobi(1, 0.67), make_gauss_seidel(2), make_jacobi(3, 0.5)});
      Rng rng(7);
      Field f = random_field(g, rng);
      if (!helmholtz) f = project_zero_mean(f);
      const RouteTrace tr = run_hybrid(ens, GreedyOracle{}, f, 40);
      for (std::size_t t = 0; t < tr.steps(); ++t) {
        // Equal up to rounding of the iterate itself (about eps * |u|).
        const double best = *std::min_element(tr.costs[t].begin(), tr.costs[t].end());
        CHECK(std::abs(tr.error_norm[t + 1] - std::sqrt(best)) <= 1e-10 * std::sqrt(best) + 1e-14 * tr.error_norm[0]);
        // Only the Poisson ensemble is contractive (see the next test).
        if (!helmholtz) CHECK(tr.error_norm[t + 1] <= tr.error_norm[t]);
      }
    }
  }
}

TEST_CASE("classical smoothers amplify the constant mode of the shifted operator") {
  // -Δ - a² has eigenvalue -a² on constants, so a Jacobi step multiplies the
  // constant mode by 1 + ω a² / d_ii > 1.
  const GridSpec g{1, 32};
  const DiscreteOperator op = build_operator(g, OperatorKind::Helmholtz, 1.0);
  Field ones(g);
  for (std::size_t i = 0; i < ones.size(); ++i) ones[i] = 1.0;
  const Field next = ones - jacobi_apply(op, apply_operator(op, ones), 0.67);
  CHECK(next[0] == doctest::Approx(1.0 + 0.67 / op.center).epsilon(1e-14));
  CHECK(next[0] > 1.0);
}

TEST_CASE("divergence aborts with the partial trace") {
  // Jacobi on a nearly singular diagonal amplifies errors by ~700 per step.
  const GridSpec g{1, 6};
  const DiscreteOperator op = build_operator(g, OperatorKind::Helmholtz, 71.9);
  const Ensemble ens = make_ensemble(op, {make_jacobi(1, 1.0)});
  Rng rng(8);
  const Field f = random_field(g, rng);
  try {
    (void)run_hybrid(ens, SingleSolver{1}, f, 300);
    FAIL("expected divergence");
  } catch (const DivergedError& e) {
    CHECK(e.code() == Errc::DivergedIterate);
    CHECK(e.trace().steps() > 10);
    CHECK(e.trace().steps() < 300);
    CHECK(e.trace().error_norm.size() == e.trace().steps() + 1);
  }
}

TEST_CASE("trace csv") {
  const GridSpec g{1, 8};
  const DiscreteOperator op = build_operator(g, OperatorKind::Poisson);
  const Ensemble ens = make_ensemble(op, {make_jacobi(1, 0.8), make_gauss_seidel(2)});
  Rng rng(9);
  const RouteTrace tr = run_hybrid(ens, GreedyOracle{}, zero_mean_rhs(g, rng), 7);
  std::ostringstream os;
  tr.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "step,chosen_id,error_norm,residual_norm,cost_1,cost_2");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 8);

  const RouteTrace plain = run_hybrid(ens, SingleSolver{2}, zero_mean_rhs(g, rng), 4);
  std::ostringstream os2;
  plain.write_csv(os2);
  CHECK(os2.str().substr(0, os2.str().find('\n')) == "step,chosen_id,error_norm,residual_norm");
}

TEST_CASE("routing and surrogate losses") {
  const std::vector<double> c{1.0, 3.0};
  CHECK(routing_loss(c, 1) == 1.0);
  CHECK(routing_loss(c, greedy_select(c)) == 1.0);
  CHECK(error_code([&] { (void)routing_loss(c, 3); }) == Errc::BadId);
  CHECK(error_code([&] { (void)routing_loss(c, 0); }) == Errc::BadId);

  const std::vector<double> uniform{0.0, 0.0};
  CHECK(surrogate_loss(c, uniform) == doctest::Approx(4.0 * std::log(2.0)));
  CHECK(surrogate_loss(c, uniform) == doctest::Approx(2.7726).epsilon(1e-4));
  const auto grad = surrogate_grad(c, uniform);
  CHECK(grad[0] == doctest::Approx(-1.0));
  CHECK(grad[1] == doctest::Approx(1.0));
  const std::vector<double> zeros{0.0, 0.0, 0.0};
  CHECK(surrogate_loss(zeros, std::vector<double>{3.0, -1.0, 7.0}) == 0.0);
  const std::vector<double> equal{2.0, 2.0, 2.0};
  for (double gj : surrogate_grad(equal, zeros)) CHECK(std::abs(gj) < 1e-15);
  CHECK(error_code([&] { (void)surrogate_loss(c, zeros); }) == Errc::LengthMismatch);
  CHECK(error_code([&] { (void)surrogate_grad(c, zeros); }) == Errc::LengthMismatch);

  // Huge logits stay finite.
  CHECK(std::isfinite(surrogate_loss(c, std::vector<double>{1000.0, -1000.0})));
  const auto sm = softmax(std::vector<double>{1000.0, 1000.0});
  CHECK(sm[0] == doctest::Approx(0.5));
  const auto w = surrogate_weights(std::vector<double>{1.0, 2.0, 4.0});
  CHECK(w == std::vector<double>{6.0, 5.0, 3.0});
}

TEST_CASE("surrogate gradient matches finite differences") {
  Rng rng(10);
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 2 + rng.below(4);
    const auto c = random_costs(k, rng);
    std::vector<double> g(k);
    for (double& x : g) x = 2.0 * rng.normal();
    const auto an = surrogate_grad(c, g);
    double diff2 = 0.0, ref2 = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double h = 1e-5;
      auto gp = g, gm = g;
      gp[j] += h;
      gm[j] -= h;
      const double num = (surrogate_loss(c, gp) - surrogate_loss(c, gm)) / (2 * h);
      diff2 += (num - an[j]) * (num - an[j]);
      ref2 += num * num;
    }
    CHECK(std::sqrt(diff2 / ref2) < 1e-7);
  }
}

TEST_CASE("loss identities on random inputs") {
  Rng rng(11);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 2 + rng.below(4);
    const auto c = random_costs(k, rng);
    std::vector<double> g(k);
    for (double& x : g) x = 3.0 * rng.normal();
    // Surrogate dominates the routing loss of the argmax decision.
    CHECK(surrogate_loss(c, g) >= std::log(2.0) * routing_loss(c, argmax_select(g)) - 1e-12);
    CHECK(surrogate_bound_holds(c, g));
    // Rewriting identity.
    const int chosen = 1 + static_cast<int>(rng.below(k));
    double direct = 0.0, total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      total += c[j];
      if (static_cast<int>(j) + 1 == chosen) continue;
      for (std::size_t kk = 0; kk < k; ++kk)
        if (kk != j) direct += c[kk];
    }
    direct -= (static_cast<double>(k) - 2.0) * total;
    CHECK(direct == doctest::Approx(routing_loss(c, chosen)).epsilon(1e-12));
    CHECK(route_loss_rewrite(c, chosen) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(route_loss_rewrite_holds(c, chosen));
    // The decision minimizing the routing loss is the greedy one.
    int best = 1;
    for (int j = 2; j <= static_cast<int>(k); ++j)
      if (routing_loss(c, j) < routing_loss(c, best)) best = j;
    CHECK(best == greedy_select(c));
  }
  // Worked example: K = 2, c = (1, 3), chosen = 1.
  CHECK(route_loss_rewrite(std::vector<double>{1.0, 3.0}, 1) == doctest::Approx(1.0));
  CHECK(surrogate_bound_holds(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 2.0}));
  CHECK(surrogate_bound_holds(std::vector<double>{2.0, 2.0, 2.0}, std::vector<double>{0.0, 0.5, -1.0}));
}

TEST_CASE("gradient descent on logits reaches the closed-form minimizer") {
  Rng rng(12);
  for (int t = 0; t < 30; ++t) {
    const std::size_t k = 2 + rng.below(4);
    std::vector<double> c(k);
    for (double& x : c) x = 0.1 + rng.uniform();
    std::vector<double> g(k, 0.0);
    const auto w = surrogate_weights(c);
    double total = 0.0;
    for (double x : w) total += x;
    double gnorm = 1.0;
    int iters = 0;
    while (gnorm >= 1e-8 && iters < 1000000) {
      const auto grad = surrogate_grad(c, g);
      gnorm = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        g[j] -= grad[j] / total;
        gnorm += grad[j] * grad[j];
      }
      gnorm = std::sqrt(gnorm);
      ++iters;
    }
    CHECK(gnorm < 1e-8);
    const auto p = softmax(g);
    for (std::size_t j = 0; j < k; ++j) CHECK(std::abs(p[j] - w[j] / total) < 1e-8);
    CHECK(argmax_select(g) == greedy_select(c));
  }
}

TEST_CASE("mode errors") {
  const GridSpec g{1, 64};
  Field e(g);
  for (int i = 0; i < 64; ++i) e[static_cast<std::size_t>(i)] = std::cos(2.0 * std::numbers::pi * i / 64);
  CHECK(mode_error(e, 1) == doctest::Approx(e.norm()));
  CHECK(mode_error(e, 5) < 1e-12);
  CHECK(mode_error(e, 10) < 1e-12);
  CHECK(mode_error(Field(g), 3) == 0.0);
  CHECK(error_code([&] { (void)mode_error(e, 33); }) == Errc::BadMode);
  CHECK(error_code([&] { (void)mode_error(e, -1); }) == Errc::BadMode);

  Rng rng(13);
  for (GridSpec gg : {GridSpec{1, 64}, GridSpec{1, 15}, GridSpec{2, 8}, GridSpec{2, 7}}) {
    const Field v = random_field(gg, rng);
    double sum = 0.0;
    for (int m = 0; m <= gg.n / 2; ++m) sum += mode_error(v, m) * mode_error(v, m);
    CHECK(std::abs(sum - v.squared_norm()) < 1e-9 * v.squared_norm());
  }
}

TEST_CASE("trace metrics") {
  RouteTrace tr;
  tr.chosen = {1, 2, 1};
  tr.error_norm = {4.0, 2.0, 3.0, 0.5};
  tr.residual_norm = {10.0, 1.0, 2.0, 0.25};
  CHECK(final_error(tr) == 0.5);
  CHECK(error_auc(tr) == doctest::Approx(2.0 + 3.0 + 0.5));
  CHECK(error_auc(tr, true) == doctest::Approx(4.0 + 9.0 + 0.25));
  const ResidualMetrics rm = residual_metrics(tr);
  CHECK(rm.final_residual == 0.25);
  CHECK(rm.auc == doctest::Approx(1.0 + 4.0 + 0.0625));
  CHECK(error_increases(tr) == 1);

  RouteTrace one;
  one.chosen = {1};
  one.error_norm = {1.0, 0.5};
  one.residual_norm = {3.0, 2.0};
  CHECK(residual_metrics(one).auc == doctest::Approx(4.0));

  const std::vector<double> vals{1.0, 2.0, 3.0, 4.0};
  const MeanSe ms = mean_se(vals);
  CHECK(ms.mean == doctest::Approx(2.5));
  CHECK(ms.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(mean_se(std::vector<double>{7.0}).se == 0.0);
}
