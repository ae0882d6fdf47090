#include "abclab/verify.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace abclab {

namespace {

Eigen::VectorXd evaluate_functional(NoiseFunctional functional,
                                    std::span<const Vec3> base_points, const Vec3& direction,
                                    std::span<const NoiseSample> omega) {
  switch (functional) {
    case NoiseFunctional::kFlow: {
      Vec3 x = base_points[0];
      for (const NoiseSample& w : omega) x = step<double>(x, w);
      return x;
    }
    case NoiseFunctional::kProjective: {
      Vec3 x = base_points[0];
      Mat3 j = Mat3::Identity();
      for (const NoiseSample& w : omega) {
        j = (jacobian_step<double>(x, w) * j).eval();
        x = step<double>(x, w);
      }
      const Vec3 image = j * direction;
      Eigen::VectorXd out(6);
      out << x, image / image.norm();
      return out;
    }
    case NoiseFunctional::kTwoPoint: {
      Vec3 x1 = base_points[0], x2 = base_points[1];
      for (const NoiseSample& w : omega) {
        x1 = step<double>(x1, w);
        x2 = step<double>(x2, w);
      }
      Eigen::VectorXd out(6);
      out << x1, x2;
      return out;
    }
    case NoiseFunctional::kJacobianEntries: {
      Vec3 x = base_points[0];
      Mat3 j = Mat3::Identity();
      for (const NoiseSample& w : omega) {
        j = (jacobian_step<double>(x, w) * j).eval();
        x = step<double>(x, w);
      }
      Eigen::VectorXd out(9);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out[3 * r + c] = j(r, c);
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

bool row_is_angular(NoiseFunctional functional, int row) {
  switch (functional) {
    case NoiseFunctional::kFlow:
      return true;
    case NoiseFunctional::kProjective:
      return row < 3;
    case NoiseFunctional::kTwoPoint:
      return true;
    case NoiseFunctional::kJacobianEntries:
      return false;
  }
  return false;
}

double& coordinate(NoiseSample& w, int c) {
  switch (c) {
    case 0: return w.amp_a;
    case 1: return w.amp_b;
    case 2: return w.amp_c;
    case 3: return w.phase_a;
    case 4: return w.phase_b;
    default: return w.phase_c;
  }
}

}  // namespace

Eigen::MatrixXd fd_noise_jacobian(NoiseFunctional functional, std::span<const Vec3> base_points,
                                  const Vec3& direction, std::span<const NoiseSample> omega,
                                  double h) {
  if (!(h >= 1e-7 && h <= 1e-3))
    throw std::invalid_argument("fd_noise_jacobian: h must lie in [1e-7, 1e-3]");
  const int n_steps = static_cast<int>(omega.size());
  const Eigen::VectorXd center = evaluate_functional(functional, base_points, direction, omega);
  const int rows = static_cast<int>(center.size());
  Eigen::MatrixXd jac(rows, 6 * n_steps);
  std::vector<NoiseSample> work(omega.begin(), omega.end());
  for (int s = 0; s < n_steps; ++s) {
    for (int c = 0; c < 6; ++c) {
      const double saved = coordinate(work[s], c);
      coordinate(work[s], c) = saved + h;
      const Eigen::VectorXd plus = evaluate_functional(functional, base_points, direction, work);
      coordinate(work[s], c) = saved - h;
      const Eigen::VectorXd minus = evaluate_functional(functional, base_points, direction, work);
      coordinate(work[s], c) = saved;
      for (int r = 0; r < rows; ++r) {
        const double diff = row_is_angular(functional, r)
                                ? wrap_signed(plus[r] - minus[r])
                                : plus[r] - minus[r];
        jac(r, 6 * s + c) = diff / (2.0 * h);
      }
    }
  }
  return jac;
}

int numerical_rank(const Eigen::MatrixXd& m, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("numerical_rank: tol must be > 0");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > tol * sv[0]) ++rank;
  return rank;
}

namespace reference {

namespace {
const double P = pi<double>();
const double P2 = P * P;
const double P3 = P2 * P;
const double P4 = P2 * P2;
const double IP = 1.0 / P;
const double IP2 = 1.0 / P2;
const double R2 = std::sqrt(2.0);
}  // namespace

Eigen::MatrixXd one_point_submersion_matrix() {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 6);
  m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
  return m;
}

Eigen::MatrixXd projective_submersion_matrix() {
  Eigen::MatrixXd m(6, 6);
  m << 0, 0, -1, P, 0, 0,
       1, 0, 0, 0, 0, 0,
       -1, 1, 0, 0, 0, -1,
       1 / R2, 0, 0, 0, 0, 1 / R2,
       0, 0, -1 / (2 * R2), 0, 0, 0,
       0, 0, -1 / (2 * R2), 0, 0, 0;
  return m;
}

Eigen::MatrixXd two_point_submersion_matrix() {
  Eigen::MatrixXd m(6, 6);
  m << 0, 0, -1, P, 0, 0,
       1, 0, 0, P2, P, 0,
       -1, 1, 0, -P2, -P, -1,
       1, -1, 0, -P, 0, 1,
       0, -1, 0, -P, 0, 0,
       P, 0, -1, 0, P, 0;
  return m;
}

Eigen::MatrixXd surjectivity_flow_matrix() {
  Eigen::MatrixXd m(3, 12);
  m << 1 - P2, 0, -P, 0, P, 1, -P2, -P, -P2, 0, P, 0,
       P2 - 1, -1, P - 1, 0, -P, 0, P2 - P, P, P2, -1, -P, 0,
       P, 0, 0, -1, -1, 0, 0, 0, P, 0, 0, 0;
  return m;
}

Eigen::MatrixXd surjectivity_kernel_matrix() {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(12, 9);
  k.row(0) << 0, 0, 0, -1, 0, 0, 0, IP, IP;
  k.row(1) << 0, -1, -1, IP, 1, 0, 1 - IP, -IP2, 1 - IP2;
  k.row(2) << 0, 1, 0, -IP, -1, -P, IP, IP2, -1 + IP2;
  // anti-diagonal unit rows: kernel vector j pins coordinate 12 - j
  for (int j = 0; j < 9; ++j) k(11 - j, j) = 1.0;
  return k;
}

Eigen::MatrixXd surjectivity_a_matrix() {
  Eigen::MatrixXd a1(9, 6), a2(9, 6);
  a1 << P2, -P, -P, 0, 0, 0,
        0, 0, P2, 0, 1, 0,
        -P, -1, -P3, 0, -P, 0,
        P3 - P2 + P, P, P, P2 - 1, -P2, 0,
        0, 0, -P2, -P, -1, 0,
        P2 + P - 1, 1, P3, P2 + P, 0, 0,
        (P2 - 1) * (P2 - 1), 0, P3 - P + 1, 0, -P3 + P, P2 - 1,
        -P3 + P, 0, -P2 - P, 0, P2, -P + 1,
        P * (P + 1) * (P + 1) * (P - 1), 0, P2 * (P + 2), 0, -P2 * (P + 1), P2;
  a2 << 0, 0, P2, 0, 0, 0,
        P3, 0, 0, 0, -P2, 0,
        -P4 + P3 - P, 0, 0, 0, P3, 0,
        0, P2, P3 - P2 + P, 0, 0, 0,
        -P3, 0, 0, 0, P2, 0,
        P4 - P3 + P, P, P2, 0, -P3, 0,
        P2 * (P2 - 1), P3 - P, P2 * (P2 - 1), -P2 + 1, -P3 + P, 0,
        -P3 - P2, -P2, -P3, P, P2 + P, 0,
        P4 + 2 * P3 - P2, P3 + P2, P4 + P3, -P2 - P, -P3 - 2 * P2, 0;
  Eigen::MatrixXd a(9, 12);
  a << a1, a2;
  return a;
}

Eigen::MatrixXd surjectivity_ak_matrix() {
  Eigen::MatrixXd ak1(9, 5), ak2(9, 4);
  ak1 << 0, 0, P, 0, 0,
         0, 0, 0, -P2, -P2,
         0, 1, 1, P2 + P - IP, P3 - 1,
         0, 0, -P, 0, P2,
         0, 0, 0, P, P2,
         0, -1, -1, IP * (P - 1) * (P + 1) * (P + 1), -P3 + P + 1,
         0, 1, 1 - P2, -IP, -1,
         0, 0, P, 1, P,
         0, 0, -P2 - P, -P, -P2;
  ak2 << P2, -P, P, P,
         0, P, 2, -P2 + 1,
         P3 - P, -P2 - 1 + IP, -2 * P - 1 + IP2, P3 - P - 2 + IP2,
         -P2, P, -P + 1, 2 * P2 - P,
         0, -P, -2, P2 - P - 1,
         -P3 + P, P2 + 1 - IP, 2 * P + 1 - IP - IP2, -P3 + P2 + 3 * P + 2 - IP - IP2,
         -P, 2 * P2 - 2 + IP, IP2, -1 + IP2,
         0, -2 * P, -IP, P - IP,
         -P2, 2 * P * (P + 1), 1, -P2 + 1;
  Eigen::MatrixXd ak(9, 9);
  ak << ak1, ak2;
  return ak;
}

Eigen::MatrixXd surjectivity_column_permutation() {
  Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(12, 12);
  for (int s = 0; s < 2; ++s)
    for (int c = 0; c < 6; ++c) perm(6 * s + c, 2 * c + s) = 1.0;
  return perm;
}

}  // namespace reference

namespace {

CertificateCheck make_check(const std::string& what, double value, double target,
                            double tolerance) {
  return {what, std::abs(value - target) <= tolerance, value, target, tolerance};
}

CertificateCheck make_rank_check(const std::string& what, int rank, int target) {
  return {what, rank == target, static_cast<double>(rank), static_cast<double>(target), 0.0};
}

void finalize(CertificateReport& rep) {
  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
}

std::string describe_mismatch(const std::string& label, const Eigen::MatrixXd& got,
                              const Eigen::MatrixXd& want, double tol) {
  double worst = 0.0;
  int wr = 0, wc = 0;
  for (int r = 0; r < got.rows(); ++r)
    for (int c = 0; c < got.cols(); ++c) {
      const double d = std::abs(got(r, c) - want(r, c));
      if (d > worst) {
        worst = d;
        wr = r;
        wc = c;
      }
    }
  if (worst <= tol) return {};
  std::ostringstream os;
  os << label << ": worst entry deviation " << worst << " at (" << wr << "," << wc
     << "): computed " << got(wr, wc) << " vs printed " << want(wr, wc);
  return os.str();
}

}  // namespace

CertificateReport verify_volume_preservation(int trials, std::uint64_t seed, double u_max) {
  CertificateReport rep;
  rep.name = "volume-preservation";
  NoiseConfig cfg{u_max, seed};
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    CounterRng rng(seed, streams::domain(streams::kChain, 1), static_cast<std::uint64_t>(i));
    const Vec3 p(rng.next_angle(), rng.next_angle(), rng.next_angle());
    const NoiseSample w = sample_noise(cfg, streams::domain(streams::kChain, 2),
                                       static_cast<std::uint64_t>(i));
    worst = std::max(worst, std::abs(jacobian_step<double>(p, w).determinant() - 1.0));
  }
  rep.checks.push_back(
      {"max |det(D f) - 1| over " + std::to_string(trials) + " random (p, w)",
       worst <= 1e-12, worst, 0.0, 1e-12});
  finalize(rep);
  return rep;
}

CertificateReport verify_one_point_submersion(double h) {
  CertificateReport rep;
  rep.name = "one-point-submersion";
  const Vec3 x(0.0, 0.0, 0.0);
  NoiseSample w;
  w.phase_a = w.phase_b = w.phase_c = pi<double>() / 2.0;
  const Eigen::MatrixXd fd =
      fd_noise_jacobian(NoiseFunctional::kFlow, std::span<const Vec3>(&x, 1), Vec3::UnitX(),
                        std::span<const NoiseSample>(&w, 1), h);
  const Eigen::MatrixXd ref = reference::one_point_submersion_matrix();
  const double dev = (fd - ref).cwiseAbs().maxCoeff();
  rep.checks.push_back(make_check("max |FD - [I|0]| entry", dev, 0.0, 1e-6));
  rep.checks.push_back(make_rank_check("rank", numerical_rank(fd), 3));
  finalize(rep);
  return rep;
}

CertificateReport verify_projective_submersion(double h) {
  CertificateReport rep;
  rep.name = "projective-submersion";
  const Vec3 x(0.0, 0.0, 0.0);
  const Vec3 v(0.0, 1.0, 0.0);
  NoiseSample w;
  w.amp_a = pi<double>();
  w.amp_b = 0.0;
  w.amp_c = 1.0;
  const Eigen::MatrixXd fd =
      fd_noise_jacobian(NoiseFunctional::kProjective, std::span<const Vec3>(&x, 1), v,
                        std::span<const NoiseSample>(&w, 1), h);
  const int rank = numerical_rank(fd);
  rep.checks.push_back({"rank >= 5", rank >= 5, static_cast<double>(rank), 5.0, 0.0});
  const std::string warn = describe_mismatch("printed 6x6 matrix", fd,
                                             reference::projective_submersion_matrix(), 1e-4);
  if (!warn.empty()) rep.warnings.push_back(warn);
  finalize(rep);
  return rep;
}

CertificateReport verify_two_point_submersion(double h) {
  CertificateReport rep;
  rep.name = "two-point-submersion";
  const Vec3 pts[2] = {Vec3(0.0, 0.0, 0.0),
                       Vec3(pi<double>() / 2, pi<double>() / 2, pi<double>() / 2)};
  NoiseSample w;
  w.amp_a = pi<double>();
  w.amp_b = pi<double>();
  w.amp_c = 1.0;
  const Eigen::MatrixXd fd =
      fd_noise_jacobian(NoiseFunctional::kTwoPoint, std::span<const Vec3>(pts, 2), Vec3::UnitX(),
                        std::span<const NoiseSample>(&w, 1), h);
  const double det = fd.determinant();
  const double target = 2.0 * pi<double>() * pi<double>();
  rep.checks.push_back(
      {"|det| vs 2*pi^2 (relative)", std::abs(std::abs(det) - target) / target <= 1e-3,
       std::abs(det), target, 1e-3 * target});
  rep.checks.push_back(make_rank_check("rank", numerical_rank(fd), 6));
  const std::string warn = describe_mismatch("printed 6x6 matrix", fd,
                                             reference::two_point_submersion_matrix(), 1e-4);
  if (!warn.empty()) rep.warnings.push_back(warn);
  finalize(rep);
  return rep;
}

CertificateReport verify_lyapunov_surjectivity(double h) {
  CertificateReport rep;
  rep.name = "lyapunov-surjectivity";
  const Vec3 x(0.0, 0.0, 0.0);
  NoiseSample w1, w2;
  w1.amp_a = w1.amp_b = w1.amp_c = pi<double>();
  w1.phase_a = w1.phase_b = w1.phase_c = pi<double>() / 2.0;
  w2.amp_a = pi<double>();
  w2.amp_b = 1.0;
  w2.amp_c = 0.0;
  const NoiseSample omega[2] = {w1, w2};
  const Eigen::MatrixXd perm = reference::surjectivity_column_permutation();

  // (a) flow derivative vs the printed 3x12 matrix
  const Eigen::MatrixXd d_phi =
      fd_noise_jacobian(NoiseFunctional::kFlow, std::span<const Vec3>(&x, 1), Vec3::UnitX(),
                        std::span<const NoiseSample>(omega, 2), h);
  const Eigen::MatrixXd d_phi_ref_order = d_phi * perm;
  rep.checks.push_back(make_rank_check("rank(D Phi)", numerical_rank(d_phi), 3));
  std::string warn = describe_mismatch("printed D Phi", d_phi_ref_order,
                                       reference::surjectivity_flow_matrix(), 1e-3);
  if (!warn.empty()) rep.warnings.push_back(warn);

  // (b) printed kernel: D Phi . K = 0 and rank(K) = 9
  const Eigen::MatrixXd kernel = reference::surjectivity_kernel_matrix();
  const double kernel_residual = (d_phi_ref_order * kernel).cwiseAbs().maxCoeff();
  rep.checks.push_back(make_check("max |D Phi . K| entry", kernel_residual, 0.0, 1e-3));
  rep.checks.push_back(make_rank_check("rank(K)", numerical_rank(kernel), 9));

  // (c) A = derivative of the Jacobian-entries functional vs printed A1|A2
  const Eigen::MatrixXd a_fd =
      fd_noise_jacobian(NoiseFunctional::kJacobianEntries, std::span<const Vec3>(&x, 1),
                        Vec3::UnitX(), std::span<const NoiseSample>(omega, 2), h);
  const Eigen::MatrixXd a_fd_ref_order = a_fd * perm;
  warn = describe_mismatch("printed A", a_fd_ref_order, reference::surjectivity_a_matrix(), 1e-2);
  if (!warn.empty()) rep.warnings.push_back(warn);

  // (d) load-bearing: rank of A restricted to the FD kernel of D Phi
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d_phi, Eigen::ComputeFullV);
  const Eigen::MatrixXd kernel_basis = svd.matrixV().rightCols(12 - 3);
  const Eigen::MatrixXd restricted = a_fd * kernel_basis;
  rep.checks.push_back(make_rank_check("rank(A restricted to ker D Phi)",
                                       numerical_rank(restricted), 8));

  // (e) cross-checks on the printed product
  const Eigen::MatrixXd ak_printed = reference::surjectivity_ak_matrix();
  const Eigen::MatrixXd ak_computed = reference::surjectivity_a_matrix() * kernel;
  warn = describe_mismatch("printed A.K vs hard-coded product", ak_computed, ak_printed, 1e-9);
  if (!warn.empty()) rep.warnings.push_back(warn);
  if (numerical_rank(ak_printed) != 8)
    rep.warnings.push_back("printed A.K matrix does not have rank 8");
  if (numerical_rank(ak_computed) != 8)
    rep.warnings.push_back("hard-coded product A.K does not have rank 8");

  finalize(rep);
  return rep;
}

std::vector<CertificateReport> run_all_certificates() {
  return {verify_volume_preservation(), verify_one_point_submersion(),
          verify_projective_submersion(), verify_two_point_submersion(),
          verify_lyapunov_surjectivity()};
}

}  // namespace abclab
