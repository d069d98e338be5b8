#include "grpde/theory.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "grpde/losses.hpp"
#include "grpde/spectral.hpp"

namespace grpde {

namespace {

Field start_error(const Ensemble& ens, const Field& e0) {
  require_same_grid(ens.op.grid, e0.grid(), "sequence evaluation");
  return ens.op.singular() ? project_zero_mean(e0) : e0;
}

std::string format_seq(std::span<const int> s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ')';
  return os.str();
}

// All sequences of length `len` over 1..k in lexicographic order.
std::vector<Sequence> all_sequences(int k, int len) {
  std::vector<Sequence> out{Sequence{}};
  for (int l = 0; l < len; ++l) {
    std::vector<Sequence> next;
    next.reserve(out.size() * static_cast<std::size_t>(k));
    for (const Sequence& s : out) {
      for (int j = 1; j <= k; ++j) {
        Sequence t = s;
        t.push_back(j);
        next.push_back(std::move(t));
      }
    }
    out = std::move(next);
  }
  return out;
}

double count_sequences(int k, int max_len) {
  double total = 0.0;
  for (int l = 0; l <= max_len; ++l) total += std::pow(static_cast<double>(k), l);
  return total;
}

class ValueCache {
 public:
  ValueCache(const Ensemble& ens, const Field& e0) : ens_(ens), e0_(start_error(ens, e0)) {}

  double operator()(const Sequence& s) {
    auto it = values_.find(s);
    if (it != values_.end()) return it->second;
    const double v = sequence_value(ens_, s, e0_);
    values_.emplace(s, v);
    return v;
  }

 private:
  const Ensemble& ens_;
  Field e0_;
  std::map<Sequence, double> values_;
};

Sequence concat(const Sequence& a, const Sequence& b) {
  Sequence out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void record(PropertyReport& rep, double margin, double slack, const std::string& what) {
  ++rep.checks;
  rep.worst_slack = std::min(rep.worst_slack, margin);
  if (margin < -slack) {
    if (rep.violations == 0) rep.first_violation = what;
    ++rep.violations;
  }
}

}  // namespace

double sequence_value(const Ensemble& ens, std::span<const int> seq, const Field& e0) {
  Field e = start_error(ens, e0);
  for (int id : seq) e = propagate_error(ens, id, e);
  return e.squared_norm();
}

Sequence greedy_sequence(const Ensemble& ens, const Field& e0, int T) {
  Field e = start_error(ens, e0);
  Sequence s;
  for (int t = 0; t < T; ++t) {
    const int id = greedy_select(step_costs(ens, e));
    s.push_back(id);
    e = propagate_error(ens, id, e);
  }
  return s;
}

OptimalSequence brute_force_optimal(const Ensemble& ens, const Field& e0, int T) {
  if (T < 0) throw Error(Errc::InvalidArgument, "horizon must be non-negative");
  const int k = static_cast<int>(ens.size());
  if (std::pow(static_cast<double>(k), T) > 1e6) {
    throw Error(Errc::SearchTooLarge, std::to_string(k) + "^" + std::to_string(T) + " sequences exceed 1e6");
  }
  OptimalSequence best;
  best.value = std::numeric_limits<double>::infinity();
  std::vector<Field> errors{start_error(ens, e0)};
  Sequence current;
  // Depth-first in lexicographic order with one cached error per depth.
  auto visit = [&](auto&& self, int depth) -> void {
    if (depth == T) {
      const double v = errors.back().squared_norm();
      if (v < best.value) {
        best.value = v;
        best.sequence = current;
      }
      return;
    }
    for (int j = 1; j <= k; ++j) {
      current.push_back(j);
      errors.push_back(propagate_error(ens, j, errors.back()));
      self(self, depth + 1);
      errors.pop_back();
      current.pop_back();
    }
  };
  visit(visit, 0);
  return best;
}

double lipschitz_constant(const SolverHandle& handle, const DiscreteOperator& op) {
  Eigen::MatrixXd m = error_propagation_matrix(handle, op);
  const auto n = m.rows();
  if (op.singular()) {
    const Eigen::MatrixXd p =
        Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    m = p * m * p;
  }
  const Eigen::MatrixXd a = m.transpose() * m;
  if (a.norm() == 0.0) return 0.0;

  Rng rng(0x5eed, 17);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 200000; ++it) {
    Eigen::VectorXd w = a * v;
    const double next = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (it > 0 && std::abs(next - lambda) <= 1e-14 * std::abs(next)) return std::sqrt(std::max(next, 0.0));
    lambda = next;
  }
  throw Error(Errc::NoConvergence, "power iteration for " + handle.label + " did not converge");
}

double alpha_of(std::span<const double> rho, int T) {
  if (T < 1) throw Error(Errc::InvalidArgument, "horizon must be at least 1");
  if (rho.size() != static_cast<std::size_t>(T)) {
    throw Error(Errc::LengthMismatch, "need one Lipschitz constant per step of the optimal sequence");
  }
  double s = 0.0;
  for (double r : rho) {
    if (!(r >= 0.0)) throw Error(Errc::InvalidArgument, "Lipschitz constants must be non-negative");
    s += r * r;
  }
  const double denom = static_cast<double>(T) - s;
  if (denom <= 0.0) {
    throw Error(Errc::DegenerateDenominator, "T - sum(rho^2) = " + std::to_string(denom) + " is not positive");
  }
  return std::max(4.0 / denom, 1.0);
}

double phi(double alpha, int T) {
  if (std::isinf(alpha)) return 1.0;
  return std::pow(1.0 - 1.0 / (alpha * static_cast<double>(T)), T);
}

BoundReport greedy_bound_check(const Ensemble& ens, const Field& e0, int T) {
  if (T < 1) throw Error(Errc::InvalidArgument, "horizon must be at least 1");
  BoundReport rep;
  rep.greedy = greedy_sequence(ens, e0, T);
  rep.greedy_value = sequence_value(ens, rep.greedy, e0);
  const OptimalSequence opt = brute_force_optimal(ens, e0, T);
  rep.optimal = opt.sequence;
  rep.optimal_value = opt.value;
  rep.empty_value = sequence_value(ens, Sequence{}, e0);

  std::map<int, double> rho_cache;
  std::vector<double> rho;
  for (int id : rep.optimal) {
    auto it = rho_cache.find(id);
    if (it == rho_cache.end()) it = rho_cache.emplace(id, lipschitz_constant(ens.at(id), ens.op)).first;
    rho.push_back(it->second);
    if (!(it->second < 1.0)) rep.contractive = false;
  }
  try {
    rep.alpha = alpha_of(rho, T);
  } catch (const Error& e) {
    if (e.code() != Errc::DegenerateDenominator) throw;
    rep.alpha = std::numeric_limits<double>::infinity();
  }
  rep.phi = phi(rep.alpha, T);
  rep.bound = (1.0 - rep.phi) * rep.optimal_value + rep.phi * rep.empty_value;
  rep.satisfied = rep.greedy_value <= rep.bound + 1e-12;
  return rep;
}

double spectral_value(const Ensemble& ens, std::span<const int> seq, const Field& e0) {
  for (const SolverHandle& h : ens.solvers) {
    if (!std::holds_alternative<WeightedJacobi>(h.kind)) {
      throw Error(Errc::NotSimultaneouslyDiagonalizable,
                  h.label + " is not diagonal in the Fourier basis; only weighted Jacobi qualifies");
    }
  }
  require_same_grid(ens.op.grid, e0.grid(), "spectral_value");
  std::vector<int> counts(ens.size(), 0);
  for (int id : seq) {
    ens.at(id);
    ++counts[static_cast<std::size_t>(id - 1)];
  }
  const SpectralDecomposition spec = operator_spectrum(ens.op);
  const std::vector<Complex> z = dft(e0);
  double h = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (i == 0 && ens.op.singular()) continue;
    double factor = 1.0;
    for (std::size_t j = 0; j < ens.size(); ++j) {
      if (counts[j] == 0) continue;
      const double omega = std::get<WeightedJacobi>(ens.solvers[j].kind).omega;
      const double lambda = 1.0 - omega * spec.eigenvalues[i] / ens.op.center;
      factor *= std::pow(lambda * lambda, counts[j]);
    }
    h += std::norm(z[i]) * factor;
  }
  return h;
}

std::vector<PropertyReport> supermodularity_check(const Ensemble& ens, const Field& e0, int T, double slack) {
  const int k = static_cast<int>(ens.size());
  if (count_sequences(k, 2 * T) > 1e6) throw Error(Errc::SearchTooLarge, "supermodularity enumeration too large");
  ValueCache h(ens, e0);
  PropertyReport strict_rep{"sequence_supermodularity"};
  PropertyReport weak_rep{"weak_supermodularity_alpha1"};

  for (int len = 0; len <= T; ++len) {
    for (const Sequence& s_long : all_sequences(k, len)) {
      for (int p = 0; p <= len; ++p) {
        const Sequence s_short(s_long.begin(), s_long.begin() + p);
        for (int w = 1; w <= k; ++w) {
          const double lhs = h(s_short) - h(concat(s_short, {w}));
          const double rhs = h(s_long) - h(concat(s_long, {w}));
          record(strict_rep, lhs - rhs, slack,
                 "S=" + format_seq(s_short) + " S'=" + format_seq(s_long) + " w=" + std::to_string(w));
        }
      }
    }
  }

  for (int len = 1; len <= T; ++len) {
    const std::vector<Sequence> seqs = all_sequences(k, len);
    for (const Sequence& s : seqs) {
      const double hs = h(s);
      for (const Sequence& s2 : seqs) {
        const double lhs = hs - h(concat(s, s2));
        double rhs = 0.0;
        for (int step : s2) rhs += hs - h(concat(s, {step}));
        record(weak_rep, rhs - lhs, slack, "S=" + format_seq(s) + " S'=" + format_seq(s2));
      }
    }
  }
  return {strict_rep, weak_rep};
}

PropertyReport postfix_monotonicity_check(const Ensemble& ens, const Field& e0, int T, double slack) {
  const int k = static_cast<int>(ens.size());
  if (count_sequences(k, T) > 1e6) throw Error(Errc::SearchTooLarge, "postfix enumeration too large");
  ValueCache h(ens, e0);
  PropertyReport rep{"postfix_monotonicity"};
  for (int a = 0; a <= T; ++a) {
    for (const Sequence& s : all_sequences(k, a)) {
      const double hs = h(s);
      for (int b = 0; a + b <= T; ++b) {
        for (const Sequence& pre : all_sequences(k, b)) {
          record(rep, hs - h(concat(pre, s)), slack, "S'=" + format_seq(pre) + " S=" + format_seq(s));
        }
      }
    }
  }
  return rep;
}

double route_loss_rewrite(std::span<const double> costs, int chosen) {
  routing_loss(costs, chosen);
  const std::size_t k = costs.size();
  double total = 0.0;
  for (double c : costs) total += c;
  double s = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (static_cast<int>(j + 1) == chosen) continue;
    for (std::size_t m = 0; m < k; ++m) {
      if (m != j) s += costs[m];
    }
  }
  return s - (static_cast<double>(k) - 2.0) * total;
}

bool route_loss_rewrite_holds(std::span<const double> costs, int chosen, double tol) {
  const double lhs = route_loss_rewrite(costs, chosen);
  const double rhs = routing_loss(costs, chosen);
  double scale = 1.0;
  for (double c : costs) scale = std::max(scale, std::abs(c));
  return std::abs(lhs - rhs) <= tol * scale;
}

bool surrogate_bound_holds(std::span<const double> costs, std::span<const double> logits, double tol) {
  const double psi = surrogate_loss(costs, logits);
  const double l = routing_loss(costs, argmax_select(logits));
  return std::numbers::ln2 * l <= psi + tol * std::max(1.0, std::abs(psi));
}

}  // namespace grpde
