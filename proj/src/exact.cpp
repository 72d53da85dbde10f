#include "mpmcmc/exact.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "mpmcmc/numeric.hpp"
#include "mpmcmc/rng.hpp"
#include "mpmcmc/selection.hpp"

namespace mpmcmc {

namespace {

// Off-diagonal accumulation in extended precision: tolerances down at
// 1e-12 over up to 10^7 enumerated terms.
using Accum = long double;

void check_enumeration_budget(const DiscreteProposalTable& table) {
  const std::size_t tuples = table.joint().size();
  std::size_t shadows = 1;
  if (table.k() > 1) shadows = table.conditional(0).size();
  if (tuples * shadows * static_cast<std::size_t>(std::max(1, table.k())) > 10'000'000)
    throw SizeError("exact kernel: enumeration budget exceeded");
}

}  // namespace

KernelMatrix build_exact_kernel(const DiscreteSamplerSpec& spec,
                                const DiscreteTarget& target) {
  spec.validate();
  const int n = target.size();
  const DiscreteProposalTable table =
      DiscreteProposalTable::build(spec.kind, spec.num_candidates);
  check_enumeration_budget(table);

  KernelMatrix km;
  km.states = target.points;
  km.P = Matrix::Zero(n, n);
  const auto pi = target.stationary();
  km.stationary = Eigen::Map<const Vector>(pi.data(), n);

  for (int a = 0; a < n; ++a) {
    const long x = target.points[static_cast<std::size_t>(a)];
    const double logpi_x = target.logmass[static_cast<std::size_t>(a)];
    std::vector<Accum> row(static_cast<std::size_t>(n), 0.0L);

    if (spec.algorithm == Algorithm::Mh) {
      for (const auto& [offset, q] : table.marginal()) {
        const long y = x + offset;
        const int b = target.index_of(y);
        if (b < 0 || b == a) continue;  // zero-mass or self: stays
        const double alpha =
            std::min(1.0, std::exp(target.logmass[static_cast<std::size_t>(b)] - logpi_x));
        row[static_cast<std::size_t>(b)] += static_cast<Accum>(q * alpha);
      }
    } else {
      for (const auto& entry : table.joint()) {
        const int k = table.k();
        std::vector<long> ys(static_cast<std::size_t>(k));
        std::vector<double> logpi(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
          ys[static_cast<std::size_t>(i)] = x + entry.offsets[static_cast<std::size_t>(i)];
          logpi[static_cast<std::size_t>(i)] =
              target.log_mass(ys[static_cast<std::size_t>(i)]);
        }

        if (spec.algorithm == Algorithm::Gmh) {
          const SelectionProbabilities h = gmh_probabilities(logpi_x, logpi, spec.kind);
          for (int i = 0; i < k; ++i) {
            const int b = target.index_of(ys[static_cast<std::size_t>(i)]);
            if (b < 0 || b == a) continue;
            row[static_cast<std::size_t>(b)] +=
                static_cast<Accum>(entry.prob * h.move[static_cast<std::size_t>(i)]);
          }
          continue;
        }

        // MTM: h_i(x, y) = wbar_i * integral of alpha_i over the shadow
        // conditional, realized as an exhaustive sum.
        const WeightRule& rule = *spec.weights;
        std::vector<double> logw(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j)
          logw[static_cast<std::size_t>(j)] =
              rule.log_weight(logpi[static_cast<std::size_t>(j)] - logpi_x);
        const auto wbar = normalized_weights(logw);
        if (!wbar) continue;  // all candidates outside support: stays

        for (int i = 0; i < k; ++i) {
          const double wb = (*wbar)[static_cast<std::size_t>(i)];
          if (wb <= 0.0) continue;
          const long yi = ys[static_cast<std::size_t>(i)];
          const int b = target.index_of(yi);
          if (b < 0) continue;  // zero-mass candidate never has weight
          const double logpi_yi = logpi[static_cast<std::size_t>(i)];
          const double logw_rev_x = rule.log_weight(logpi_x - logpi_yi);
          const int delta = static_cast<int>(x - yi);

          Accum h_i = 0.0L;
          for (const auto& shadow : table.conditional(delta)) {
            if (shadow.prob <= 0.0) continue;
            std::vector<double> logw_rev(shadow.offsets.size());
            for (std::size_t j = 0; j < shadow.offsets.size(); ++j)
              logw_rev[j] =
                  rule.log_weight(target.log_mass(yi + shadow.offsets[j]) - logpi_yi);
            const double la = mtm_log_alpha(logw, i, logpi_x, logpi_yi, logw_rev_x,
                                            logw_rev, 0.0);
            h_i += static_cast<Accum>(shadow.prob * std::exp(la));
          }
          if (b != a)
            row[static_cast<std::size_t>(b)] +=
                static_cast<Accum>(entry.prob) * static_cast<Accum>(wb) * h_i;
        }
      }
    }

    Accum off = 0.0L;
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      km.P(a, b) = static_cast<double>(row[static_cast<std::size_t>(b)]);
      off += row[static_cast<std::size_t>(b)];
    }
    km.P(a, a) = static_cast<double>(1.0L - off);
  }
  return km;
}

double max_row_sum_error(const KernelMatrix& km) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < km.P.rows(); ++i)
    worst = std::max(worst, std::abs(km.P.row(i).sum() - 1.0));
  return worst;
}

double stationarity_error(const KernelMatrix& km) {
  const Vector err = km.P.transpose() * km.stationary - km.stationary;
  return err.cwiseAbs().maxCoeff();
}

std::optional<BalanceViolation> detailed_balance_check(const KernelMatrix& km,
                                                       double tol) {
  BalanceViolation worst;
  for (Eigen::Index x = 0; x < km.P.rows(); ++x) {
    for (Eigen::Index y = x + 1; y < km.P.cols(); ++y) {
      const double v = std::abs(km.stationary[x] * km.P(x, y) -
                                km.stationary[y] * km.P(y, x));
      if (v > worst.magnitude)
        worst = {static_cast<int>(x), static_cast<int>(y), v};
    }
  }
  if (worst.magnitude <= tol) return std::nullopt;
  return worst;
}

double spectral_gap(const KernelMatrix& km, double reversibility_tol) {
  if (auto v = detailed_balance_check(km, reversibility_tol))
    throw ContractError("spectral_gap: kernel is not reversible (violation " +
                        std::to_string(v->magnitude) + ")");
  const Eigen::Index n = km.P.rows();
  Matrix s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      s(i, j) = std::sqrt(km.stationary[i] / km.stationary[j]) * km.P(i, j);
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error("spectral_gap: eigensolver failed");
  const Vector ev = solver.eigenvalues();  // ascending
  return 1.0 - ev[n - 2];
}

std::optional<PeskunViolation> peskun_check(const KernelMatrix& pk,
                                            const KernelMatrix& pt, int k,
                                            double tol) {
  if (pk.states != pt.states)
    throw ContractError("peskun_check: state sets differ");
  for (Eigen::Index x = 0; x < pk.P.rows(); ++x)
    for (Eigen::Index y = 0; y < pk.P.cols(); ++y) {
      if (x == y) continue;
      const double lhs = pk.P(x, y);
      const double rhs = static_cast<double>(k) * pt.P(x, y);
      if (lhs > rhs + tol)
        return PeskunViolation{static_cast<int>(x), static_cast<int>(y), lhs, rhs};
    }
  return std::nullopt;
}

GapDomination gap_domination_check(const KernelMatrix& pk, const KernelMatrix& pt,
                                   int k, double tol) {
  GapDomination out;
  out.gap_k = spectral_gap(pk);
  out.gap_tilde = spectral_gap(pt);
  if (out.gap_tilde <= 0.0)
    throw DegenerateError("gap_domination_check: baseline chain has zero gap");
  out.ratio = out.gap_k / out.gap_tilde;
  out.ok = out.gap_k <= static_cast<double>(k) * out.gap_tilde + tol;
  return out;
}

ConductanceResult conductance(const KernelMatrix& km) {
  const int n = static_cast<int>(km.P.rows());
  if (n > 25) throw SizeError("conductance: exhaustive enumeration capped at 25 states");
  ConductanceResult out;
  out.phi = std::numeric_limits<double>::infinity();
  const std::uint32_t full = (1u << n) - 1u;
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    double pa = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) pa += km.stationary[i];
    if (pa <= 0.0 || pa > 0.5) continue;
    double flow = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!(mask & (1u << i))) continue;
      for (int j = 0; j < n; ++j)
        if (!(mask & (1u << j))) flow += km.stationary[i] * km.P(i, j);
    }
    out.phi = std::min(out.phi, flow / pa);
  }
  double min_leave = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    min_leave = std::min(min_leave, 1.0 - km.P(i, i));
  out.essinf_form = 2.0 * min_leave;
  return out;
}

KernelMatrix random_reversible_chain(int n, std::uint64_t seed) {
  RngStream rng(derive_key(seed, static_cast<std::uint64_t>(Purpose::Generic), n));
  Vector pi(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    pi[i] = 0.05 + rng.next_double();
    total += pi[i];
  }
  pi /= total;
  Matrix flows = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double f = rng.next_double();
      flows(i, j) = f;
      flows(j, i) = f;
    }
  // Scale so every row is substochastic, then close the diagonal; the
  // symmetric flow matrix makes pi_x P(x,y) = pi_y P(y,x) by construction.
  double scale = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double s = flows.row(i).sum();
    if (s > 0) scale = std::min(scale, pi[i] / s);
  }
  scale *= 0.5 + 0.5 * rng.next_double();
  KernelMatrix km;
  km.states.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) km.states[static_cast<std::size_t>(i)] = i;
  km.stationary = pi;
  km.P = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      km.P(i, j) = scale * flows(i, j) / pi[i];
      off += km.P(i, j);
    }
    km.P(i, i) = 1.0 - off;
  }
  return km;
}

std::optional<GmhCounterexample> gmh_condition_check(
    const DiscreteSelectionRule& h, const DiscreteTarget& target,
    const DiscreteProposalTable& proposal, double tol) {
  const int k = proposal.k();
  for (std::size_t a = 0; a < target.points.size(); ++a) {
    const long x = target.points[a];
    const double pix = std::exp(target.logmass[a]);
    for (const auto& entry : proposal.joint()) {
      if (entry.prob <= 0.0) continue;
      std::vector<long> ys(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i)
        ys[static_cast<std::size_t>(i)] = x + entry.offsets[static_cast<std::size_t>(i)];
      const SelectionProbabilities hx = h(x, ys);

      // the rule must land in the selection simplex before the pointwise
      // identity even makes sense
      if (const auto v = validate_selection(hx, std::max(tol, 1e-12)))
        return GmhCounterexample{x, ys, v->index, v->value, 1.0};

      for (int i = 0; i < k; ++i) {
        const long yi = ys[static_cast<std::size_t>(i)];
        const double lhs = hx.move[static_cast<std::size_t>(i)];
        const double piyi = std::exp(target.log_mass(yi));
        if (piyi == 0.0) {
          if (std::abs(lhs) > tol)
            return GmhCounterexample{x, ys, i, lhs, 0.0};
          continue;
        }
        // swapped configuration (x, y_{-i}) proposed from y_i
        std::vector<long> swapped = ys;
        swapped[static_cast<std::size_t>(i)] = x;
        std::vector<int> swapped_offsets(static_cast<std::size_t>(k));
        bool in_stencil = true;
        for (int j = 0; j < k; ++j) {
          const long o = swapped[static_cast<std::size_t>(j)] - yi;
          if (o < -2 || o > 2) in_stencil = false;
          swapped_offsets[static_cast<std::size_t>(j)] = static_cast<int>(o);
        }
        const double q_rev = in_stencil ? proposal.joint_pmf(swapped_offsets) : 0.0;
        const double r_i = piyi * q_rev / (pix * entry.prob);
        const double rhs =
            r_i == 0.0 ? 0.0 : r_i * h(yi, swapped).move[static_cast<std::size_t>(i)];
        if (std::abs(lhs - rhs) > tol)
          return GmhCounterexample{x, ys, i, lhs, rhs};
      }
    }
  }
  return std::nullopt;
}

DiscreteSelectionRule gmh_discrete_rule(const DiscreteTarget& target,
                                        ProposalKind kind) {
  return [&target, kind](long x, const std::vector<long>& ys) {
    std::vector<double> logpi(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) logpi[i] = target.log_mass(ys[i]);
    return gmh_probabilities(target.log_mass(x), logpi, kind);
  };
}

void write_kernel_csv(const std::string& path, const KernelMatrix& km) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "state";
  for (long s : km.states) out << ',' << s;
  out << ",stationary\n";
  for (Eigen::Index i = 0; i < km.P.rows(); ++i) {
    out << km.states[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < km.P.cols(); ++j) out << ',' << km.P(i, j);
    out << ',' << km.stationary[i] << '\n';
  }
}

}  // namespace mpmcmc
