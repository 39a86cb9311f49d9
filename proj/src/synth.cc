#include "regsyn/synth.h"

#include <cmath>
#include <numbers>

#include <Eigen/SVD>

namespace regsyn {

namespace {

void check_internal_model(const InternalModel& im) {
  if (im.Phi.rows() != im.nu || im.Phi.cols() != im.nu || im.Lambda.size() != im.nu) {
    throw SynthesisError("internal model: inconsistent dimensions");
  }
}

}  // namespace

std::vector<Expr> linear_map_exprs(const Eigen::MatrixXd& coeffs, const std::string& prefix) {
  const auto names = indexed_names(prefix, static_cast<int>(coeffs.cols()));
  std::vector<Expr> out;
  for (Eigen::Index i = 0; i < coeffs.rows(); ++i) {
    std::optional<Expr> sum;
    for (Eigen::Index j = 0; j < coeffs.cols(); ++j) {
      const double c = coeffs(i, j);
      if (c == 0.0) continue;
      const Expr var = Expr::variable(names[static_cast<std::size_t>(j)]);
      const Expr term = std::fabs(c) == 1.0 ? var : Expr::number(std::fabs(c)) * var;
      if (!sum) {
        sum = c < 0 ? Expr::neg(term) : term;
      } else {
        sum = c < 0 ? *sum - term : *sum + term;
      }
    }
    out.push_back(sum ? *sum : Expr::number(0.0));
  }
  return out;
}

InternalModel internal_model_from_maps(std::vector<Expr> phi, Expr lambda,
                                       std::optional<Eigen::VectorXd> bc) {
  const int nu = static_cast<int>(phi.size());
  if (nu < 1) throw SynthesisError("internal model: empty phi");
  const auto names = indexed_names("xi", nu);
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(nu);
  InternalModel im;
  im.nu = nu;
  im.Phi = jacobian(phi, origin, names);
  im.Lambda = jacobian({lambda}, origin, names).row(0);
  im.phi = std::move(phi);
  im.lambda = std::move(lambda);
  if (bc && bc->size() != nu) throw SynthesisError("internal model: Bc has wrong length");
  im.bc = std::move(bc);
  return im;
}

InternalModel linear_internal_model(const Eigen::MatrixXd& Phi, const Eigen::RowVectorXd& Lambda,
                                    std::optional<Eigen::VectorXd> bc) {
  InternalModel im;
  im.nu = static_cast<int>(Phi.rows());
  im.Phi = Phi;
  im.Lambda = Lambda;
  check_internal_model(im);
  im.phi = linear_map_exprs(Phi, "xi");
  im.lambda = linear_map_exprs(Lambda, "xi").front();
  if (bc && bc->size() != im.nu) throw SynthesisError("internal model: Bc has wrong length");
  im.bc = std::move(bc);
  return im;
}

InternalModel internal_model_from_controller(const ControllerModel& controller) {
  return internal_model_from_maps(controller.phi, controller.lambda, controller.bc);
}

ControllerModel to_controller(const InternalModel& im) {
  if (!im.bc) throw SynthesisError("internal model has no Bc");
  return make_controller(im.nu, im.phi, im.lambda, *im.bc);
}

InternalModel center_reduce(const InternalModel& im, double tol) {
  check_internal_model(im);
  const CenterProjector cp = center_projector(im.Phi, tol);
  if (cp.order() == 0) throw SynthesisError("center_reduce: no imaginary-axis eigenvalues");
  return linear_internal_model(cp.reduced, im.Lambda * cp.basis);
}

Eigen::MatrixXd closed_loop_matrix(const LinearizedData& lin, const InternalModel& im) {
  check_internal_model(im);
  if (!im.bc) throw SynthesisError("closed_loop_matrix: Bc is not set");
  const Eigen::Index n = lin.A.rows();
  const Eigen::Index nu = im.nu;
  const Eigen::VectorXd& bc = *im.bc;
  if (lin.B.size() != n || lin.C.size() != n || bc.size() != nu) {
    throw SynthesisError("closed_loop_matrix: dimension mismatch");
  }
  Eigen::MatrixXd a(n + nu, n + nu);
  a.topLeftCorner(n, n) = lin.A;
  a.topRightCorner(n, nu) = lin.B * im.Lambda;
  a.bottomLeftCorner(nu, n) = bc * lin.C;
  a.bottomRightCorner(nu, nu) = im.Phi + bc * lin.D * im.Lambda;
  return a;
}

std::string VerificationFlags::failure() const {
  if (!a_hurwitz) return "A is not Hurwitz";
  if (!detectable) return "(Lambda, Phi) is not detectable";
  if (!transfer_nonzero) return "plant transfer function vanishes at an internal-model eigenvalue";
  if (!spectrum_on_axis) {
    return "internal-model spectrum is off the imaginary axis; apply center reduction";
  }
  return {};
}

VerificationFlags verify_conditions(const LinearizedData& lin, const InternalModel& im,
                                    double transfer_tol, double axis_tol) {
  check_internal_model(im);
  VerificationFlags flags;
  flags.a_abscissa = spectral_abscissa(lin.A);
  flags.a_hurwitz = flags.a_abscissa < 0.0;
  flags.detectable = hautus_detectable(im.Lambda, im.Phi);

  const Spectrum spec = eigen(im.Phi);
  const double band = axis_tol * (1.0 + inf_norm(im.Phi));
  flags.spectrum_on_axis = true;
  flags.transfer_nonzero = true;
  for (const Complex& z : spec.values) {
    if (std::fabs(z.real()) > band) {
      flags.spectrum_on_axis = false;
      continue;
    }
    const Complex point(0.0, z.imag());
    Complex value;
    try {
      value = transfer_function(lin, point);
    } catch (const SpectralError&) {
      flags.transfer_nonzero = false;
      continue;
    }
    flags.transfer_values.push_back({point, value});
    if (!(std::abs(value) > transfer_tol)) flags.transfer_nonzero = false;
  }
  return flags;
}

std::vector<Complex> choose_block_coefficients(int m, Complex g) {
  if (m < 1) throw SynthesisError("choose_block_coefficients: block size must be positive");
  if (!(std::abs(g) > 0.0)) throw SynthesisError("choose_block_coefficients: G vanishes");
  // Monic polynomial with roots exp(i pi (2k + m - 1) / (2m)), k = 1..m.
  std::vector<Complex> poly{1.0};
  for (int k = 1; k <= m; ++k) {
    const Complex root = std::polar(1.0, std::numbers::pi * (2.0 * k + m - 1) / (2.0 * m));
    std::vector<Complex> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= root * poly[i];
    }
    poly = std::move(next);
  }
  const bool real = g.imag() == 0.0;
  std::vector<Complex> a(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) {
    Complex c = poly[static_cast<std::size_t>(k)];
    if (real) c = c.real();
    a[static_cast<std::size_t>(k - 1)] = c / g;
  }
  return a;
}

Eigen::VectorXd build_bc(const JordanData& jd, const Eigen::RowVectorXd& cc, double eps,
                         const std::vector<std::vector<Complex>>& coeffs, Eigen::VectorXcd* bhat) {
  const Eigen::Index p = jd.T.rows();
  if (cc.size() != p) throw SynthesisError("build_bc: Cc has wrong length");
  if (coeffs.size() != jd.blocks.size()) throw SynthesisError("build_bc: one coefficient list per block");
  const Eigen::RowVectorXcd chat = cc.cast<Complex>() * jd.T;
  const double chat_scale = std::max(1.0, chat.cwiseAbs().maxCoeff());
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(p);

  for (std::size_t j = 0; j < jd.blocks.size(); ++j) {
    const JordanBlock& blk = jd.blocks[j];
    const bool mirrored = blk.conjugate >= 0 && blk.alpha < 0.0;
    if (mirrored) continue;
    const int m = blk.size;
    const auto& a = coeffs[j];
    if (static_cast<int>(a.size()) != m) {
      throw SynthesisError("build_bc: block " + std::to_string(j) + " needs " + std::to_string(m) +
                           " coefficients");
    }
    auto c = [&](int l) { return chat(blk.offset + l - 1); };
    const Complex c1 = c(1);
    if (!(std::abs(c1) > 1e-12 * chat_scale)) {
      throw SynthesisError("build_bc: leading Jordan-coordinate entry of Cc vanishes; "
                           "(Cc, S) is not detectable");
    }
    std::vector<Complex> bj(static_cast<std::size_t>(m + 1));
    for (int k = m; k >= 1; --k) {
      Complex acc = a[static_cast<std::size_t>(k - 1)] * std::pow(eps, k);
      for (int l = 2; l <= m - k + 1; ++l) acc += c(l) * bj[static_cast<std::size_t>(l + k - 1)];
      bj[static_cast<std::size_t>(k)] = -acc / c1;
    }
    for (int k = 1; k <= m; ++k) b(blk.offset + k - 1) = bj[static_cast<std::size_t>(k)];
    if (blk.conjugate >= 0) {
      const JordanBlock& mirror = jd.blocks[static_cast<std::size_t>(blk.conjugate)];
      for (int k = 1; k <= m; ++k) {
        b(mirror.offset + k - 1) = std::conj(bj[static_cast<std::size_t>(k)]);
      }
    }
  }

  const Eigen::VectorXcd bc = jd.T * b;
  const double scale = std::max(1.0, bc.cwiseAbs().maxCoeff());
  const double residue = bc.imag().cwiseAbs().maxCoeff();
  if (residue > 1e-8 * scale) {
    throw SynthesisError("build_bc: Bc has imaginary residue " + std::to_string(residue));
  }
  if (bhat) *bhat = b;
  return bc.real();
}

SynthesisReport synthesize(const LinearizedData& lin, const InternalModel& im,
                           const SynthesisOptions& options) {
  if (!(options.eps0 > 0.0) || !(options.factor > 0.0 && options.factor < 1.0) ||
      options.max_halvings < 0 || options.margin < 0.0) {
    throw SynthesisError("synthesize: invalid scan options");
  }
  SynthesisReport report;
  report.flags = verify_conditions(lin, im);
  const std::string failure = report.flags.failure();
  if (!failure.empty()) throw SynthesisError("synthesize: " + failure);

  report.jordan = jordan_structure(im.Phi);
  for (const JordanBlock& blk : report.jordan.blocks) {
    if (blk.alpha < 0.0) {
      report.coefficients.emplace_back();
      continue;
    }
    Complex g = transfer_function(lin, blk.lambda);
    if (blk.alpha == 0.0) g = g.real();
    report.coefficients.push_back(choose_block_coefficients(blk.size, g));
  }
  for (std::size_t j = 0; j < report.jordan.blocks.size(); ++j) {
    const JordanBlock& blk = report.jordan.blocks[j];
    if (blk.alpha < 0.0) {
      auto mirrored = report.coefficients[static_cast<std::size_t>(blk.conjugate)];
      for (Complex& a : mirrored) a = std::conj(a);
      report.coefficients[j] = std::move(mirrored);
    }
  }

  InternalModel trial = im;
  double eps = options.eps0;
  for (int k = 0; k <= options.max_halvings; ++k, eps *= options.factor) {
    ++report.attempts;
    trial.bc = build_bc(report.jordan, im.Lambda, eps, report.coefficients, &report.bhat);
    const Eigen::MatrixXd a_cl = closed_loop_matrix(lin, trial);
    const double abscissa = spectral_abscissa(a_cl);
    report.eps = eps;
    report.bc = *trial.bc;
    report.a_cl = a_cl;
    report.abscissa = abscissa;
    if (abscissa < -options.margin) {
      report.success = true;
      return report;
    }
  }
  return report;
}

LinearRegulator solve_linear_regulator(const LinearizedData& lin) {
  const Eigen::Index n = lin.A.rows();
  const Eigen::Index p = lin.S.rows();
  if (lin.P.rows() != n || lin.P.cols() != p || lin.Q.size() != p) {
    throw SynthesisError("solve_linear_regulator: dimension mismatch");
  }
  const Eigen::Index np = n * p;
  const Eigen::MatrixXd in = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd ip = Eigen::MatrixXd::Identity(p, p);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(np + p, np + p);
  Eigen::VectorXd rhs(np + p);

  // vec(Pi S - A Pi) = (S^T kron I_n - I_p kron A) vec(Pi); vec(B Gamma) = (I_p kron B) Gamma^T.
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      k.block(i * n, j * n, n, n) = lin.S(j, i) * in - ip(i, j) * lin.A;
    }
    k.block(i * n, np + i, n, 1) = -lin.B;
    k.block(np + i, i * n, 1, n) = lin.C;
    k(np + i, np + i) = lin.D;
  }
  rhs.head(np) = Eigen::Map<const Eigen::VectorXd>(lin.P.data(), np);
  rhs.tail(p) = -lin.Q.transpose();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(k, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                                   : std::numeric_limits<double>::infinity();
  if (!(condition < 1e12)) {
    throw SynthesisError("solve_linear_regulator: system is singular or ill-conditioned "
                         "(condition estimate " + std::to_string(condition) + ")");
  }
  const Eigen::VectorXd sol = svd.solve(rhs);

  LinearRegulator out;
  out.Pi = Eigen::Map<const Eigen::MatrixXd>(sol.data(), n, p);
  out.Gamma = sol.tail(p).transpose();
  out.condition = condition;
  out.residual_state =
      (out.Pi * lin.S - lin.A * out.Pi - lin.B * out.Gamma - lin.P).cwiseAbs().maxCoeff();
  out.residual_output = (lin.C * out.Pi + lin.D * out.Gamma + lin.Q).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace regsyn
