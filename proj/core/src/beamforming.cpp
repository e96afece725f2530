#include "mmgne/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mmgne {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_link(int n, const ChannelRealization& ch) {
  require(n >= 0 && n < ch.n_links, "beamforming: link index out of range");
}

}  // namespace

std::string to_string(TxScheme scheme) {
  switch (scheme) {
    case TxScheme::matched_filter: return "matched_filter";
    case TxScheme::local_mse: return "local_mse";
    case TxScheme::coordinated_mse: return "coordinated_mse";
    case TxScheme::zero_forcing: return "zero_forcing";
    case TxScheme::coordinated_txbf: return "coordinated_txbf";
    case TxScheme::fixed: return "fixed";
  }
  return "unknown";
}

TxScheme parse_tx_scheme(const std::string& s) {
  for (auto scheme : {TxScheme::matched_filter, TxScheme::local_mse, TxScheme::coordinated_mse,
                      TxScheme::zero_forcing, TxScheme::coordinated_txbf, TxScheme::fixed}) {
    if (to_string(scheme) == s) return scheme;
  }
  throw InvalidArgument("unknown tx_scheme '" + s + "'");
}

bool requires_full_csi(TxScheme scheme) {
  return scheme == TxScheme::coordinated_mse || scheme == TxScheme::zero_forcing ||
         scheme == TxScheme::coordinated_txbf;
}

CVector canonical_phase(const CVector& v) {
  if (v.size() == 0) return v;
  Eigen::Index best = 0;
  double mag = -1.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double a = std::abs(v(k));
    if (a > mag * (1.0 + 1e-12)) {
      mag = a;
      best = k;
    }
  }
  if (mag == 0.0) return v;
  const Complex rot = std::conj(v(best)) / mag;
  CVector out = v * rot;
  out(best) = Complex(std::abs(out(best)), 0.0);
  return out;
}

CVector canonicalize(const CVector& v) {
  const double nrm = v.norm();
  if (nrm == 0.0) throw NumericalError("canonicalize: zero vector");
  return canonical_phase(v / nrm);
}

CVector mmse_rx(int n, const RVector& p, const std::vector<CVector>& w_all, const ChannelRealization& ch) {
  check_link(n, ch);
  require(p(n) > 0.0, "mmse_rx: P_n must be > 0");
  const double sigma2 = ch.noise_variance(n);
  if (!(sigma2 > 0.0)) throw NumericalError("mmse_rx: noise variance must be > 0 (singular system)");
  const Eigen::Index l = ch.l_rx;
  CMatrix r = sigma2 * CMatrix::Identity(l, l);
  for (int i = 0; i < ch.n_links; ++i) {
    const CVector h = ch.at(i, n) * w_all[static_cast<std::size_t>(i)];
    r.noalias() += p(i) * h * h.adjoint();
  }
  const CVector h_direct = ch.at(n, n) * w_all[static_cast<std::size_t>(n)];
  Eigen::LDLT<CMatrix> ldlt(r);
  if (ldlt.info() != Eigen::Success) throw NumericalError("mmse_rx: covariance factorization failed");
  return std::sqrt(p(n)) * ldlt.solve(h_direct);
}

double mse(int n, const CVector& u, const RVector& p, const std::vector<CVector>& w_all,
           const ChannelRealization& ch) {
  check_link(n, ch);
  double quad = 0.0;
  for (int i = 0; i < ch.n_links; ++i) {
    quad += p(i) * std::norm(u.dot(ch.at(i, n) * w_all[static_cast<std::size_t>(i)]));
  }
  const Complex cross = u.dot(ch.at(n, n) * w_all[static_cast<std::size_t>(n)]);
  return quad - 2.0 * std::sqrt(p(n)) * cross.real() + 1.0 + ch.noise_variance(n) * u.squaredNorm();
}

CVector mse_stationarity(int n, const CVector& u, const RVector& p, const std::vector<CVector>& w_all,
                         const ChannelRealization& ch) {
  check_link(n, ch);
  CVector g = ch.noise_variance(n) * u;
  for (int i = 0; i < ch.n_links; ++i) {
    const CVector h = ch.at(i, n) * w_all[static_cast<std::size_t>(i)];
    g += p(i) * h * h.dot(u);
  }
  g -= std::sqrt(p(n)) * (ch.at(n, n) * w_all[static_cast<std::size_t>(n)]);
  return g;
}

CVector matched_tx(int n, const CVector& u_n, const ChannelRealization& ch) {
  check_link(n, ch);
  const CVector b = ch.at(n, n).adjoint() * u_n;
  if (!(b.norm() > 0.0)) throw NumericalError("matched_tx: receive filter is orthogonal to the channel");
  return canonicalize(b);
}

LocalMseSolution local_mse_solve(int n, double power, const CVector& u_n, const ChannelRealization& ch) {
  check_link(n, ch);
  require(power > 0.0, "local_mse_tx: P_n must be > 0");
  const CVector b = ch.at(n, n).adjoint() * u_n;
  const double total = b.squaredNorm();
  if (!(total > 0.0)) throw NumericalError("local_mse_tx: receive filter is orthogonal to the channel");

  const CMatrix m = power * b * b.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(m);
  const RVector& mu = eig.eigenvalues();
  const CVector proj = eig.eigenvectors().adjoint() * b;
  RVector g = proj.cwiseAbs2();
  // Components with negligible weight carry no information about lambda.
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    if (g(j) <= 1e-14 * total) g(j) = 0.0;
  }
  const auto f = [&](double lambda) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      if (g(j) == 0.0) continue;
      const double den = mu(j) + lambda;
      if (den <= 0.0) return kInf;
      s += g(j) / (den * den);
    }
    return s - 1.0;
  };

  LocalMseSolution sol;
  const double f0 = f(0.0);
  if (f0 < 0.0) {
    sol.fallback = true;
    sol.lambda = 0.0;
    sol.w = canonicalize(b);
    sol.w_raw = b;
    return sol;
  }
  double lo = 0.0;
  double hi = std::sqrt(total);  // sum g / lambda^2 <= 1 there
  while (f(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double lambda = std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;
  CVector coeff(g.size());
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    coeff(j) = g(j) == 0.0 ? Complex(0.0) : proj(j) / (mu(j) + lambda);
  }
  sol.lambda = lambda;
  sol.w_raw = std::sqrt(power) * (eig.eigenvectors() * coeff);
  sol.norm_residual = std::abs(f(lambda));
  sol.stationarity_residual =
      (m * sol.w_raw + lambda * sol.w_raw - std::sqrt(power) * b).norm();
  sol.w = canonicalize(sol.w_raw);
  return sol;
}

CVector local_mse_tx(int n, double power, const CVector& u_n, const ChannelRealization& ch) {
  return local_mse_solve(n, power, u_n, ch).w;
}

RVector leakage(int n, double power, const CVector& w, const std::vector<CVector>& u_all,
                const ChannelRealization& ch) {
  check_link(n, ch);
  RVector out = RVector::Zero(ch.n_links);
  for (int i = 0; i < ch.n_links; ++i) {
    if (i != n) out(i) = power * std::norm(u_all[static_cast<std::size_t>(i)].dot(ch.at(n, i) * w));
  }
  return out;
}

LeakageBudget current_leakage(const RVector& p, const std::vector<CVector>& w_all,
                              const std::vector<CVector>& u_all, const ChannelRealization& ch) {
  LeakageBudget budget{RMatrix::Zero(ch.n_links, ch.n_links)};
  for (int n = 0; n < ch.n_links; ++n) {
    budget.r_tilde.row(n) = leakage(n, p(n), w_all[static_cast<std::size_t>(n)], u_all, ch).transpose();
  }
  return budget;
}

namespace {

// Real embedding z = [Re w; Im w] of w^H a a^H w.
RMatrix real_outer(const CVector& a) {
  const CMatrix m = a * a.adjoint();
  const Eigen::Index k = a.size();
  RMatrix q(2 * k, 2 * k);
  q.topLeftCorner(k, k) = m.real();
  q.topRightCorner(k, k) = -m.imag();
  q.bottomLeftCorner(k, k) = m.imag();
  q.bottomRightCorner(k, k) = m.real();
  return q;
}

}  // namespace

namespace {
constexpr int kMaxCenteringSteps = 100;
constexpr double kInexactBallSlack = 1e-6;
constexpr int kTighteningAttempts = 3;
}  // namespace

CoordinatedMseSolution coordinated_mse_solve(int n, const RVector& p, const std::vector<CVector>& u_all,
                                             const ChannelRealization& ch, const LeakageBudget& budget,
                                             const CoordinatedMseOptions& options) {
  check_link(n, ch);
  const double power = p(n);
  require(power > 0.0, "coordinated_mse_tx: P_n must be > 0");
  require(budget.r_tilde.rows() == ch.n_links && budget.r_tilde.cols() == ch.n_links,
          "coordinated_mse_tx: budget must be N x N");
  const CVector b = ch.at(n, n).adjoint() * u_all[static_cast<std::size_t>(n)];
  const double b_norm = b.norm();
  if (!(b_norm > 0.0)) throw NumericalError("coordinated_mse_tx: receive filter is orthogonal to the channel");

  // The direction of the MSE solution does not depend on the own-link term
  // P b b^H (Sherman-Morrison), so the update is the convex program
  //   max Re(b^H w)  s.t.  ||w|| <= 1,  P |c_i^H w|^2 <= r_i  (i != n),
  // solved by a log-barrier Newton method from the interior point w = 0.
  const int n_links = ch.n_links;
  const Eigen::Index k_tx = ch.k_tx;
  std::vector<int> bounded;
  std::vector<CVector> zero_budget;
  std::vector<CVector> c(static_cast<std::size_t>(n_links));
  for (int i = 0; i < n_links; ++i) {
    if (i == n) continue;
    const double r = budget.r_tilde(n, i);
    require(r >= 0.0, "coordinated_mse_tx: budgets must be nonnegative");
    c[static_cast<std::size_t>(i)] = ch.at(n, i).adjoint() * u_all[static_cast<std::size_t>(i)];
    if (!std::isfinite(r) || c[static_cast<std::size_t>(i)].squaredNorm() == 0.0) continue;
    if (r == 0.0) {
      zero_budget.push_back(c[static_cast<std::size_t>(i)]);
    } else {
      bounded.push_back(i);
    }
  }

  // Zero budgets are equalities c_i^H w = 0: optimize over their null space.
  CMatrix basis = CMatrix::Identity(k_tx, k_tx);
  if (!zero_budget.empty()) {
    CMatrix a(k_tx, static_cast<Eigen::Index>(zero_budget.size()));
    for (std::size_t j = 0; j < zero_budget.size(); ++j) a.col(static_cast<Eigen::Index>(j)) = zero_budget[j];
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU);
    const double tol = 1e-12 * svd.singularValues()(0);
    Eigen::Index rank = 0;
    while (rank < svd.singularValues().size() && svd.singularValues()(rank) > tol) ++rank;
    if (rank >= k_tx) {
      throw DimensionError("coordinated_mse_tx: zero leakage budgets leave no transmit dimension for link " +
                           std::to_string(n));
    }
    basis = svd.matrixU().rightCols(k_tx - rank);
  }
  const Eigen::Index dim = basis.cols();
  const CVector b_red = basis.adjoint() * b;
  const double b_red_norm = b_red.norm();
  if (!(b_red_norm > 0.0)) {
    throw DimensionError("coordinated_mse_tx: zero leakage budgets null the direct channel of link " +
                         std::to_string(n));
  }

  CoordinatedMseSolution sol;
  sol.kappa = RVector::Zero(n_links);
  if (bounded.empty()) {
    sol.w = canonical_phase(basis * (b_red / b_red_norm));
    sol.lambda = 0.5 * b_red_norm;
    return sol;
  }

  // Normalized data: objective g^T z with ||g|| = 1, constraints z^T q_j z <= 1.
  // Budgets are tightened by feasibility_tol to absorb the final normalization,
  // and again by any excess that normalization still leaves.
  RVector g(2 * dim);
  g.head(dim) = b_red.real() / b_red_norm;
  g.tail(dim) = b_red.imag() / b_red_norm;
  int newton_steps = 0;
  double tighten = options.feasibility_tol;
  for (int attempt = 0;; ++attempt) {
    std::vector<RMatrix> q;
    for (int i : bounded) {
      const double r = budget.r_tilde(n, i) * (1.0 - tighten);
      q.push_back(real_outer(basis.adjoint() * c[static_cast<std::size_t>(i)]) * (power / r));
    }
    const auto m = static_cast<double>(q.size() + 1);

    RVector z = RVector::Zero(2 * dim);
    const auto slacks = [&](const RVector& x, RVector& sl) {
      sl.resize(static_cast<Eigen::Index>(q.size()) + 1);
      sl(0) = 1.0 - x.squaredNorm();
      for (std::size_t j = 0; j < q.size(); ++j) sl(static_cast<Eigen::Index>(j) + 1) = 1.0 - x.dot(q[j] * x);
      return (sl.array() > 0.0).all();
    };
    const auto barrier = [&](double t, const RVector& x, const RVector& sl) {
      return -t * g.dot(x) - sl.array().log().sum();
    };

    RVector sl;
    sol.max_violation = 0.0;
    sol.max_slackness = 0.0;
    slacks(z, sl);
    double t = 1.0;
    const double t_final = m / (0.5 * std::min(options.slackness_tol, options.feasibility_tol));
    const auto last_iterate = [&]() {
      CoordinatedMseSolution s;
      const CVector w_red = z.head(dim).cast<Complex>() + Complex(0.0, 1.0) * z.tail(dim).cast<Complex>();
      s.w = w_red.norm() > 0.0 ? canonical_phase(basis * w_red) : CVector::Zero(k_tx);
      s.sweeps = newton_steps;
      return s;
    };
    while (true) {
      // Centering by damped Newton steps.
      for (int inner = 0; inner < kMaxCenteringSteps; ++inner) {
        if (newton_steps >= options.max_sweeps) {
          throw DualAscentError("coordinated_mse_tx: barrier method hit its iteration cap", last_iterate());
        }
        RVector grad = -t * g + 2.0 * z / sl(0);
        RMatrix hess = (2.0 / sl(0)) * RMatrix::Identity(2 * dim, 2 * dim) + (4.0 / (sl(0) * sl(0))) * z * z.transpose();
        for (std::size_t j = 0; j < q.size(); ++j) {
          const double s_j = sl(static_cast<Eigen::Index>(j) + 1);
          const RVector qz = q[j] * z;
          grad += (2.0 / s_j) * qz;
          hess += (2.0 / s_j) * q[j] + (4.0 / (s_j * s_j)) * qz * qz.transpose();
        }
        const RVector step = -hess.ldlt().solve(grad);
        const double decrement = -grad.dot(step);
        ++newton_steps;
        if (decrement * 0.5 <= 1e-10) break;
        double alpha = 1.0;
        RVector trial_sl;
        const double f0 = barrier(t, z, sl);
        while (true) {
          const RVector trial = z + alpha * step;
          if (slacks(trial, trial_sl) && barrier(t, trial, trial_sl) <= f0 - 0.25 * alpha * decrement) {
            z = trial;
            sl = trial_sl;
            break;
          }
          alpha *= 0.5;
          if (alpha < 1e-20) break;
        }
        if (alpha < 1e-20) break;
      }
      if (t >= t_final) break;
      t = std::min(t * 20.0, t_final);
    }

    // Multipliers from the central path: 1 / (t s_j).
    const CVector w_red = z.head(dim).cast<Complex>() + Complex(0.0, 1.0) * z.tail(dim).cast<Complex>();
    const double norm = w_red.norm();
    // A slack ball means the budgets bound every direction before unit norm:
    // the relaxation is not tight and the unit-norm problem is left unsolved.
    if (sl(0) > kInexactBallSlack) {
      throw DualAscentError("coordinated_mse_tx: leakage budgets bind before unit norm", last_iterate());
    }
    sol.w = canonical_phase(basis * (w_red / norm));
    sol.lambda = b_red_norm / (t * sl(0));
    const RVector leak = leakage(n, power, sol.w, u_all, ch);
    for (std::size_t j = 0; j < bounded.size(); ++j) {
      const int i = bounded[j];
      const double mult = 1.0 / (t * sl(static_cast<Eigen::Index>(j) + 1));
      sol.kappa(i) = mult * b_red_norm / budget.r_tilde(n, i);
      const double rel = (leak(i) - budget.r_tilde(n, i)) / budget.r_tilde(n, i);
      sol.max_violation = std::max(sol.max_violation, rel);
      sol.max_slackness = std::max(sol.max_slackness, mult * std::abs(rel));
    }
    sol.max_slackness = std::max(sol.max_slackness, 1.0 / t);
    sol.sweeps = newton_steps;
    if (sol.max_violation <= options.feasibility_tol) return sol;
    if (attempt + 1 >= kTighteningAttempts) {
      throw DualAscentError("coordinated_mse_tx: leakage exceeds its budget after normalization", sol);
    }
    tighten += 2.0 * sol.max_violation;
  }
}

CVector coordinated_mse_tx(int n, const RVector& p, const std::vector<CVector>& u_all,
                           const ChannelRealization& ch, const LeakageBudget& budget) {
  return coordinated_mse_solve(n, p, u_all, ch, budget).w;
}

LinkPairs zf_pairs(const ChannelRealization& ch, const ZfOptions& options) {
  const int n_links = ch.n_links;
  LinkPairs pairs;
  if (!options.max_nulled) {
    for (int i = 0; i < n_links; ++i) {
      for (int n = 0; n < n_links; ++n) {
        if (i != n) pairs.emplace_back(i, n);
      }
    }
    return pairs;
  }
  const int cap = *options.max_nulled;
  require(cap >= 0, "zf: max_nulled must be >= 0");
  struct Candidate {
    double strength;
    int i;
    int n;
  };
  std::vector<Candidate> candidates;
  for (int i = 0; i < n_links; ++i) {
    for (int n = 0; n < n_links; ++n) {
      if (i != n) candidates.push_back({ch.at(i, n).squaredNorm(), i, n});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.strength > b.strength; });
  std::vector<int> tx_count(static_cast<std::size_t>(n_links), 0);
  std::vector<int> rx_count(static_cast<std::size_t>(n_links), 0);
  for (const auto& cand : candidates) {
    auto& tc = tx_count[static_cast<std::size_t>(cand.i)];
    auto& rc = rx_count[static_cast<std::size_t>(cand.n)];
    if (tc < cap && rc < cap) {
      pairs.emplace_back(cand.i, cand.n);
      ++tc;
      ++rc;
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

namespace {

// Orthogonal projection of v onto the complement of span(columns).
CVector project_out(const CVector& v, const std::vector<CVector>& columns) {
  if (columns.empty()) return v;
  CMatrix a(v.size(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) a.col(static_cast<Eigen::Index>(j)) = columns[j];
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  const double tol = 1e-12 * std::max(1.0, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
  CVector out = v;
  for (Eigen::Index j = 0; j < svd.singularValues().size(); ++j) {
    if (svd.singularValues()(j) > tol) {
      const auto q = svd.matrixU().col(j);
      out -= q * q.dot(out);
    }
  }
  return out;
}

}  // namespace

BeamformerSet zf_tx_rx(const ChannelRealization& ch, const BeamformerSet& init, const ZfOptions& options) {
  const int n_links = ch.n_links;
  init.validate(n_links, ch.k_tx, ch.l_rx);
  const LinkPairs pairs = zf_pairs(ch, options);
  std::vector<std::vector<int>> victims(static_cast<std::size_t>(n_links));     // by tx
  std::vector<std::vector<int>> aggressors(static_cast<std::size_t>(n_links));  // by rx
  for (auto [i, n] : pairs) {
    victims[static_cast<std::size_t>(i)].push_back(n);
    aggressors[static_cast<std::size_t>(n)].push_back(i);
  }
  for (int n = 0; n < n_links; ++n) {
    const auto tx_nulls = static_cast<int>(victims[static_cast<std::size_t>(n)].size());
    const auto rx_nulls = static_cast<int>(aggressors[static_cast<std::size_t>(n)].size());
    if (tx_nulls >= ch.k_tx) {
      throw DimensionError("zf_tx_rx: link " + std::to_string(n) + " transmitter has K=" +
                           std::to_string(ch.k_tx) + " antennas but must null " + std::to_string(tx_nulls) +
                           " receivers");
    }
    if (rx_nulls >= ch.l_rx) {
      throw DimensionError("zf_tx_rx: link " + std::to_string(n) + " receiver has L=" +
                           std::to_string(ch.l_rx) + " antennas but must null " + std::to_string(rx_nulls) +
                           " transmitters");
    }
  }

  BeamformerSet bf;
  for (int n = 0; n < n_links; ++n) {
    bf.w.push_back(canonicalize(init.w[static_cast<std::size_t>(n)]));
    bf.u.push_back(canonicalize(init.u[static_cast<std::size_t>(n)]));
  }
  const auto fallback = [](const CVector& v, const CVector& previous) {
    return v.norm() > 1e-300 ? canonicalize(v) : previous;
  };
  for (int it = 0; it < options.max_iters; ++it) {
    double change = 0.0;
    for (int n = 0; n < n_links; ++n) {
      std::vector<CVector> dirs;
      for (int i : aggressors[static_cast<std::size_t>(n)]) dirs.push_back(ch.at(i, n) * bf.w[static_cast<std::size_t>(i)]);
      const CVector u = fallback(project_out(ch.at(n, n) * bf.w[static_cast<std::size_t>(n)], dirs),
                                 bf.u[static_cast<std::size_t>(n)]);
      change = std::max(change, (u - bf.u[static_cast<std::size_t>(n)]).norm());
      bf.u[static_cast<std::size_t>(n)] = u;
    }
    for (int n = 0; n < n_links; ++n) {
      std::vector<CVector> dirs;
      for (int i : victims[static_cast<std::size_t>(n)]) {
        dirs.push_back(ch.at(n, i).adjoint() * bf.u[static_cast<std::size_t>(i)]);
      }
      const CVector w = fallback(project_out(ch.at(n, n).adjoint() * bf.u[static_cast<std::size_t>(n)], dirs),
                                 bf.w[static_cast<std::size_t>(n)]);
      change = std::max(change, (w - bf.w[static_cast<std::size_t>(n)]).norm());
      bf.w[static_cast<std::size_t>(n)] = w;
    }
    if (change <= options.tol) break;
  }
  return bf;
}

double zf_residual(const BeamformerSet& bf, const ChannelRealization& ch, const LinkPairs& pairs) {
  double worst = 0.0;
  for (auto [i, n] : pairs) {
    const CVector& u = bf.u[static_cast<std::size_t>(n)];
    worst = std::max(worst, std::abs(u.dot(ch.at(i, n) * bf.w[static_cast<std::size_t>(i)])) / u.norm());
  }
  return worst;
}

}  // namespace mmgne
