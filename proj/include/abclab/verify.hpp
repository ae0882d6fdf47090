#ifndef ABCLAB_VERIFY_HPP
#define ABCLAB_VERIFY_HPP

#include "abclab/noise.hpp"
#include "abclab/torus_map.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace abclab {

/// Functionals of an n-step parameter vector differentiated with respect to
/// the stacked noise coordinates (A_1,B_1,C_1,alpha_1,beta_1,gamma_1, ...,
/// step-major).
enum class NoiseFunctional {
  kFlow,             // 3 rows: f_{w^n}(x)
  kProjective,       // 6 rows: (f_{w^n}(x), D_x f_{w^n} v / |.|)
  kTwoPoint,         // 6 rows: (f_{w^n}(x1), f_{w^n}(x2))
  kJacobianEntries,  // 9 rows: D_x f_{w^n}, row-major
};

/// Central finite differences with step h in [1e-7, 1e-3].  Position rows are
/// differenced on the torus (wrapped); direction and matrix-entry rows in the
/// ambient space.
Eigen::MatrixXd fd_noise_jacobian(NoiseFunctional functional, std::span<const Vec3> base_points,
                                  const Vec3& direction, std::span<const NoiseSample> omega,
                                  double h = 1e-5);

/// Number of singular values exceeding tol * sigma_max.
int numerical_rank(const Eigen::MatrixXd& m, double tol = 1e-6);

struct CertificateCheck {
  std::string what;
  bool pass = false;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
};

struct CertificateReport {
  std::string name;
  bool pass = false;                     // all load-bearing checks met
  std::vector<CertificateCheck> checks;  // load-bearing assertions
  std::vector<std::string> warnings;     // printed-entry mismatches etc.
};

/// Reference matrices evaluated in double precision from their exact
/// expressions in pi.  The two-step matrices use coordinate-major column
/// order (A1,A2,B1,B2,C1,C2,alpha1,alpha2,...); see
/// surjectivity_column_permutation.
namespace reference {
Eigen::MatrixXd one_point_submersion_matrix();    // 3 x 6, [I | 0]
Eigen::MatrixXd projective_submersion_matrix();   // 6 x 6, rank 5
Eigen::MatrixXd two_point_submersion_matrix();    // 6 x 6, |det| = 2 pi^2
Eigen::MatrixXd surjectivity_flow_matrix();       // 3 x 12
Eigen::MatrixXd surjectivity_kernel_matrix();     // 12 x 9
Eigen::MatrixXd surjectivity_a_matrix();          // 9 x 12
Eigen::MatrixXd surjectivity_ak_matrix();         // 9 x 9, rank 8

/// Permutation taking our step-major column (6*s + c) to the reference
/// coordinate-major column (2*c + s) for two-step matrices.
Eigen::MatrixXd surjectivity_column_permutation();
}  // namespace reference

CertificateReport verify_volume_preservation(int trials = 10000, std::uint64_t seed = 42,
                                             double u_max = pi<double>());
CertificateReport verify_one_point_submersion(double h = 1e-5);
CertificateReport verify_projective_submersion(double h = 1e-5);
CertificateReport verify_two_point_submersion(double h = 1e-5);
CertificateReport verify_lyapunov_surjectivity(double h = 1e-5);

std::vector<CertificateReport> run_all_certificates();

}  // namespace abclab

#endif
