#include "regsyn/specan.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace regsyn {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

void check_square(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw SpectralError(std::string(what) + ": matrix must be square and nonempty");
  }
  if (!m.allFinite()) throw SpectralError(std::string(what) + ": matrix has non-finite entries");
}

double complex_inf_norm(const Eigen::MatrixXcd& m) {
  return m.rows() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

// Columns spanning the numerical null space of a complex matrix.
Eigen::JacobiSVD<Eigen::MatrixXcd> full_svd(const Eigen::MatrixXcd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

// Swaps diagonal entries k and k+1 of the upper-triangular t, updating u so
// that u t u^H is unchanged.
void swap_adjacent(Eigen::MatrixXcd& t, Eigen::MatrixXcd& u, Eigen::Index k) {
  const Complex a = t(k, k);
  const Complex b = t(k, k + 1);
  const Complex c = t(k + 1, k + 1);
  Eigen::Vector2cd x(b, c - a);
  const double nx = x.norm();
  if (nx == 0.0) return;
  x /= nx;
  Eigen::Matrix2cd g;
  g << x(0), -std::conj(x(1)), x(1), std::conj(x(0));
  const Eigen::Index r = t.rows();
  t.block(k, 0, 2, r) = g.adjoint() * t.block(k, 0, 2, r);
  t.block(0, k, r, 2) = t.block(0, k, r, 2) * g;
  u.block(0, k, r, 2) = u.block(0, k, r, 2) * g;
  t(k + 1, k) = 0.0;
}

}  // namespace

double inf_norm(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

double clustering_radius(const Eigen::MatrixXd& m) { return 1e-6 * (1.0 + inf_norm(m)); }

Spectrum eigen(const Eigen::MatrixXd& m) {
  check_square(m, "eigen");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  if (solver.info() != Eigen::Success) {
    throw SpectralError("eigen: QR iteration did not converge");
  }
  Spectrum spec;
  const Eigen::VectorXcd ev = solver.eigenvalues();
  spec.raw.assign(ev.data(), ev.data() + ev.size());

  const int k = spec.size();
  const double scale = 1.0 + inf_norm(m);
  const double radius = clustering_radius(m);
  UnionFind uf(k);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (std::abs(spec.raw[static_cast<std::size_t>(i)] - spec.raw[static_cast<std::size_t>(j)]) <=
          radius) {
        uf.unite(i, j);
      }
    }
  }
  // A defective eigenvalue of multiplicity q splits into roots spread over
  // about u^(1/q) |M|; exactly q roots inside that radius form one cluster.
  for (int q = k; q >= 2; --q) {
    const double bound = 10.0 * std::pow(std::numeric_limits<double>::epsilon(), 1.0 / q) * scale;
    for (int i = 0; i < k; ++i) {
      std::vector<int> near;
      for (int j = 0; j < k; ++j) {
        if (std::abs(spec.raw[static_cast<std::size_t>(i)] - spec.raw[static_cast<std::size_t>(j)]) <=
            bound) {
          near.push_back(j);
        }
      }
      if (static_cast<int>(near.size()) != q) continue;
      for (int j : near) uf.unite(i, j);
    }
  }
  std::vector<int> root_index(static_cast<std::size_t>(k), -1);
  for (int i = 0; i < k; ++i) {
    const int r = uf.find(i);
    int& slot = root_index[static_cast<std::size_t>(r)];
    if (slot < 0) {
      slot = static_cast<int>(spec.values.size());
      spec.values.emplace_back(0.0);
      spec.multiplicities.push_back(0);
    }
    spec.values[static_cast<std::size_t>(slot)] += spec.raw[static_cast<std::size_t>(i)];
    ++spec.multiplicities[static_cast<std::size_t>(slot)];
  }
  for (std::size_t c = 0; c < spec.values.size(); ++c) {
    spec.values[c] /= static_cast<double>(spec.multiplicities[c]);
  }

  std::vector<std::size_t> order(spec.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Complex& x = spec.values[a];
    const Complex& y = spec.values[b];
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  Spectrum sorted;
  sorted.raw = spec.raw;
  for (std::size_t i : order) {
    sorted.values.push_back(spec.values[i]);
    sorted.multiplicities.push_back(spec.multiplicities[i]);
  }
  return sorted;
}

double spectral_abscissa(const Eigen::MatrixXd& m) {
  const Spectrum spec = eigen(m);
  double best = -std::numeric_limits<double>::infinity();
  for (const Complex& z : spec.raw) best = std::max(best, z.real());
  return best;
}

bool is_hurwitz(const Eigen::MatrixXd& m, double margin) {
  if (margin < 0.0) throw SpectralError("is_hurwitz: margin must be nonnegative");
  return spectral_abscissa(m) < -margin;
}

bool hautus_detectable(const Eigen::RowVectorXd& cm, const Eigen::MatrixXd& m, double tol) {
  check_square(m, "hautus_detectable");
  if (cm.size() != m.cols()) throw SpectralError("hautus_detectable: dimension mismatch");
  const Eigen::Index k = m.rows();
  const Spectrum spec = eigen(m);
  const double radius = clustering_radius(m);
  const double threshold = tol * std::max(1.0, inf_norm(m));
  for (const Complex& lambda : spec.values) {
    if (lambda.real() < -radius) continue;
    Eigen::MatrixXcd stacked(k + 1, k);
    stacked.topRows(k) = m.cast<Complex>();
    stacked.topRows(k).diagonal().array() -= lambda;
    stacked.row(k) = cm.cast<Complex>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked);
    if (!(svd.singularValues()(k - 1) > threshold)) return false;
  }
  return true;
}

Eigen::VectorXcd solve_complex(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b,
                               double min_rcond) {
  const Eigen::Index k = a.rows();
  if (a.cols() != k || b.size() != k) throw SpectralError("solve_complex: dimension mismatch");
  Eigen::MatrixXd big(2 * k, 2 * k);
  big.topLeftCorner(k, k) = a.real();
  big.topRightCorner(k, k) = -a.imag();
  big.bottomLeftCorner(k, k) = a.imag();
  big.bottomRightCorner(k, k) = a.real();
  Eigen::VectorXd rhs(2 * k);
  rhs.head(k) = b.real();
  rhs.tail(k) = b.imag();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(big);
  const double rcond = lu.rcond();
  if (!(rcond >= min_rcond)) {
    throw SpectralError("solve_complex: matrix is singular to working precision (rcond " +
                        std::to_string(rcond) + ")");
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  Eigen::VectorXcd x(k);
  x.real() = sol.head(k);
  x.imag() = sol.tail(k);
  return x;
}

Complex transfer_function(const Eigen::RowVectorXd& c, const Eigen::MatrixXd& a,
                          const Eigen::VectorXd& b, double d, Complex z) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n || c.size() != n) {
    throw SpectralError("transfer_function: dimension mismatch");
  }
  Eigen::MatrixXcd m = -a.cast<Complex>();
  m.diagonal().array() += z;
  Eigen::VectorXcd x;
  try {
    x = solve_complex(m, b.cast<Complex>());
  } catch (const SpectralError&) {
    throw SpectralError("transfer_function: z is too close to an eigenvalue of A");
  }
  return (c.cast<Complex>() * x)(0) + d;
}

Complex transfer_function(const LinearizedData& lin, Complex z) {
  return transfer_function(lin.C, lin.A, lin.B, lin.D, z);
}

JordanData jordan_structure(const Eigen::MatrixXd& s, double tol) {
  check_square(s, "jordan_structure");
  const Eigen::Index p = s.rows();
  const double norm = inf_norm(s);
  const double radius = clustering_radius(s);
  const Spectrum spec = eigen(s);

  struct Freq {
    double alpha;
    int mult;
  };
  std::vector<Freq> zero;
  std::vector<Freq> positive;
  std::vector<Freq> negative;
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    const Complex z = spec.values[i];
    if (std::fabs(z.real()) > tol * (1.0 + norm)) {
      throw SpectralError("jordan_structure: eigenvalue " + std::to_string(z.real()) + " + " +
                          std::to_string(z.imag()) + "i is off the imaginary axis");
    }
    const Freq f{z.imag(), spec.multiplicities[i]};
    if (std::fabs(z.imag()) <= radius) {
      zero.push_back({0.0, f.mult});
    } else if (z.imag() > 0) {
      positive.push_back(f);
    } else {
      negative.push_back(f);
    }
  }
  std::sort(positive.begin(), positive.end(),
            [](const Freq& a, const Freq& b) { return a.alpha < b.alpha; });
  if (positive.size() != negative.size()) {
    throw SpectralError("jordan_structure: eigenvalues do not occur in conjugate pairs");
  }
  for (const Freq& f : positive) {
    const auto it = std::find_if(negative.begin(), negative.end(), [&](const Freq& g) {
      return std::fabs(g.alpha + f.alpha) <= radius && g.mult == f.mult;
    });
    if (it == negative.end()) {
      throw SpectralError("jordan_structure: eigenvalues do not occur in conjugate pairs");
    }
  }

  JordanData jd;
  jd.T = Eigen::MatrixXcd::Zero(p, p);
  jd.J = Eigen::MatrixXcd::Zero(p, p);
  const Eigen::MatrixXcd sc = s.cast<Complex>();
  const double null_threshold = 1e-8 * std::max(1.0, norm);

  auto build_chain = [&](Complex lambda, int size, int offset) {
    Eigen::MatrixXcd shifted = sc;
    shifted.diagonal().array() -= lambda;
    auto svd = full_svd(shifted);
    const Eigen::VectorXd sv = svd.singularValues();
    int nullity = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) <= null_threshold) ++nullity;
    }
    if (nullity > 1) {
      throw SpectralError("jordan_structure: eigenvalue at " + std::to_string(lambda.imag()) +
                          "i has geometric multiplicity " + std::to_string(nullity));
    }
    Eigen::VectorXcd v = svd.matrixV().col(p - 1);
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    v *= std::conj(v(big)) / std::abs(v(big));
    svd.setThreshold(null_threshold / std::max(sv(0), 1e-300));
    for (int k = 0; k < size; ++k) {
      if (k > 0) v = svd.solve(v);
      if (lambda.imag() == 0.0) v = v.real().cast<Complex>();
      jd.T.col(offset + k) = v;
      jd.J(offset + k, offset + k) = lambda;
      if (k > 0) jd.J(offset + k - 1, offset + k) = 1.0;
    }
  };

  int offset = 0;
  for (const Freq& f : zero) {
    jd.blocks.push_back({Complex(0.0, 0.0), 0.0, f.mult, offset, -1});
    build_chain(Complex(0.0, 0.0), f.mult, offset);
    offset += f.mult;
  }
  for (const Freq& f : positive) {
    const int index = static_cast<int>(jd.blocks.size());
    jd.blocks.push_back({Complex(0.0, f.alpha), f.alpha, f.mult, offset, index + 1});
    build_chain(Complex(0.0, f.alpha), f.mult, offset);
    const int mirror = offset + f.mult;
    jd.blocks.push_back({Complex(0.0, -f.alpha), -f.alpha, f.mult, mirror, index});
    jd.T.middleCols(mirror, f.mult) = jd.T.middleCols(offset, f.mult).conjugate();
    jd.J.block(mirror, mirror, f.mult, f.mult) =
        jd.J.block(offset, offset, f.mult, f.mult).conjugate();
    offset = mirror + f.mult;
  }
  if (offset != p) throw SpectralError("jordan_structure: multiplicities do not sum to p");

  const double residual = complex_inf_norm(sc * jd.T - jd.T * jd.J);
  if (residual > 1e-8 * norm) {
    throw SpectralError("jordan_structure: residual |ST - TJ| = " + std::to_string(residual) +
                        " exceeds tolerance");
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> tsvd(jd.T);
  const double smin = tsvd.singularValues()(p - 1);
  const double smax = tsvd.singularValues()(0);
  if (!(smin > 0.0) || smax / smin > 1e12) {
    throw SpectralError("jordan_structure: generalized eigenvector matrix is ill-conditioned");
  }
  return jd;
}

CenterProjector center_projector(const Eigen::MatrixXd& m, double tol) {
  check_square(m, "center_projector");
  const Eigen::Index r = m.rows();
  Eigen::ComplexSchur<Eigen::MatrixXd> schur(m);
  if (schur.info() != Eigen::Success) {
    throw SpectralError("center_projector: Schur iteration did not converge");
  }
  Eigen::MatrixXcd t = schur.matrixT();
  Eigen::MatrixXcd u = schur.matrixU();

  auto is_center = [&](Eigen::Index i) { return std::fabs(t(i, i).real()) <= tol; };
  for (Eigen::Index i = 0; i < r; ++i) {
    const double re = std::fabs(t(i, i).real());
    if (re > tol && re < 2.0 * tol) {
      throw SpectralError("center_projector: eigenvalue with real part " +
                          std::to_string(t(i, i).real()) + " lies in the ambiguous band");
    }
  }
  // Bubble center eigenvalues to the leading positions.
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < r; ++i) {
    if (!is_center(i)) continue;
    for (Eigen::Index j = i; j > k; --j) swap_adjacent(t, u, j - 1);
    ++k;
  }

  CenterProjector cp;
  if (k == 0) {
    cp.P = Eigen::MatrixXd::Zero(r, r);
    cp.basis = Eigen::MatrixXd(r, 0);
    cp.reduced = Eigen::MatrixXd(0, 0);
    return cp;
  }

  // T11 X - X T22 = -T12, column by column.
  const Eigen::Index rest = r - k;
  Eigen::MatrixXcd x(k, rest);
  const Eigen::MatrixXcd t11 = t.topLeftCorner(k, k);
  for (Eigen::Index j = 0; j < rest; ++j) {
    Eigen::VectorXcd rhs = -t.block(0, k + j, k, 1);
    for (Eigen::Index i = 0; i < j; ++i) rhs += x.col(i) * t(k + i, k + j);
    Eigen::MatrixXcd shifted = t11;
    shifted.diagonal().array() -= t(k + j, k + j);
    x.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  Eigen::MatrixXcd ps = Eigen::MatrixXcd::Zero(r, r);
  ps.topLeftCorner(k, k).setIdentity();
  ps.topRightCorner(k, rest) = -x;
  const Eigen::MatrixXcd pc = u * ps * u.adjoint();
  cp.P = pc.real();

  Eigen::MatrixXd span(r, 2 * k);
  span.leftCols(k) = u.leftCols(k).real();
  span.rightCols(k) = u.leftCols(k).imag();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(span, Eigen::ComputeThinU);
  cp.basis = svd.matrixU().leftCols(k);
  cp.reduced = cp.basis.transpose() * m * cp.basis;
  return cp;
}

}  // namespace regsyn
