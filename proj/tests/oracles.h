#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <complex>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "regsyn/specan.h"

namespace regsyn::testing {

// Detectability via the Kalman observability decomposition: the pair is
// detectable iff A restricted to the unobservable subspace is Hurwitz.
inline bool kalman_detectable(const Eigen::RowVectorXd& c, const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd obs(n, n);
  Eigen::RowVectorXd row = c;
  for (Eigen::Index k = 0; k < n; ++k) {
    obs.row(k) = row;
    row = row * a;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(obs, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double tol = 1e-9 * std::max(1.0, sv(0));
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  if (rank == n) return true;
  const Eigen::MatrixXd basis = svd.matrixV().rightCols(n - rank);
  const Eigen::MatrixXd restricted = basis.transpose() * a * basis;
  Eigen::EigenSolver<Eigen::MatrixXd> es(restricted);
  return es.eigenvalues().real().maxCoeff() < 0.0;
}

inline Eigen::MatrixXd random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = nd(rng);
  }
  return Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
}

// Direct resolvent evaluation c (zI - a)^{-1} b.
inline std::complex<double> resolvent(const Eigen::RowVectorXd& c, const Eigen::MatrixXd& a,
                                      const Eigen::VectorXd& b, std::complex<double> z) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXcd m = z * Eigen::MatrixXcd::Identity(n, n) - a.cast<std::complex<double>>();
  const Eigen::VectorXcd x = m.fullPivLu().solve(b.cast<std::complex<double>>());
  return (c.cast<std::complex<double>>() * x)(0);
}

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = nd(rng);
  }
  return m;
}

struct Pair {
  Eigen::RowVectorXd c;
  Eigen::MatrixXd a;
};

// (C, A) in observability staircase form under a random orthogonal change of
// coordinates; the unobservable block has real eigenvalues of either sign
// with |Re| >= 0.2.
inline Pair random_staircase_pair(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> re(0.2, 2.0);
  std::normal_distribution<double> nd;
  const int n = 2 + static_cast<int>(rng() % 4);
  const int nu = static_cast<int>(rng() % n);
  const int no = n - nu;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  a.topLeftCorner(no, no) = random_matrix(no, no, rng);
  a.bottomLeftCorner(nu, no) = random_matrix(nu, no, rng);
  for (int k = 0; k < nu; ++k) {
    const double sign = (rng() % 3 == 0) ? 1.0 : -1.0;
    a(no + k, no + k) = sign * re(rng);
    if (k + 1 < nu) a(no + k, no + k + 1) = nd(rng);
  }
  Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(n);
  for (int k = 0; k < no; ++k) c(k) = nd(rng);
  const Eigen::MatrixXd q = random_orthogonal(n, rng);
  return {c * q.transpose(), q * a * q.transpose()};
}

// Internal model with Jordan blocks of size m0 at 0 and m1 at +-i alpha,
// hidden by an orthogonal change of coordinates, and a random output row.
inline Pair random_internal_model(int m0, int m1, double alpha, std::mt19937_64& rng) {
  const int n = m0 + 2 * m1;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < m0; ++k) s(k, k + 1) = 1.0;
  for (int k = 0; k < m1; ++k) {
    const int o = m0 + 2 * k;
    s(o, o + 1) = alpha;
    s(o + 1, o) = -alpha;
    if (k + 1 < m1) {
      s(o, o + 2) = 1.0;
      s(o + 1, o + 3) = 1.0;
    }
  }
  const Eigen::MatrixXd q = random_orthogonal(n, rng);
  return {random_matrix(1, n, rng), q * s * q.transpose()};
}

// Largest relative deviation, over `points` random z, between the resolvent
// Lambda (zI - Phi)^{-1} Bc and -sum_jk a_jk eps^k / (z - lambda_j)^k.
inline double transfer_identity_error(const Pair& model, const JordanData& jd,
                                      const std::vector<std::vector<Complex>>& coeffs, double eps,
                                      const Eigen::VectorXd& bc, int points, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int s = 0; s < points; ++s) {
    const Complex z(nd(rng), 2.0 * nd(rng));
    Complex expected = 0.0;
    for (std::size_t j = 0; j < jd.blocks.size(); ++j) {
      const JordanBlock& blk = jd.blocks[j];
      const bool mirror = blk.alpha < 0.0;
      const auto& a = mirror ? coeffs[static_cast<std::size_t>(blk.conjugate)] : coeffs[j];
      for (int k = 1; k <= blk.size; ++k) {
        Complex ak = a[static_cast<std::size_t>(k - 1)];
        if (mirror) ak = std::conj(ak);
        expected -= ak * std::pow(eps, k) / std::pow(z - blk.lambda, k);
      }
    }
    const Complex got = resolvent(model.c, model.a, bc, z);
    worst = std::max(worst, std::abs(got - expected) / std::max(1e-3, std::abs(expected)));
  }
  return worst;
}

// Random coefficients per block (real on the zero block); conjugate blocks
// get zeros since build_bc mirrors them.
inline std::vector<std::vector<Complex>> random_coefficients(const JordanData& jd,
                                                             std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<std::vector<Complex>> coeffs;
  for (const JordanBlock& blk : jd.blocks) {
    std::vector<Complex> a;
    for (int k = 0; k < blk.size; ++k) {
      if (blk.alpha < 0.0) {
        a.emplace_back(0.0);
      } else {
        a.emplace_back(nd(rng), blk.alpha == 0.0 ? 0.0 : nd(rng));
      }
    }
    coeffs.push_back(std::move(a));
  }
  return coeffs;
}

}  // namespace regsyn::testing
