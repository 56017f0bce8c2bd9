#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pphi2/error.hpp"
#include "pphi2/wick.hpp"

namespace pphi2 {

// Truncated bosonic Fock space on the circle of circumference beta: modes
// n in [-N, N] with k_n = 2 pi n / beta, nu_n = sqrt(k_n^2 + m^2), occupation
// basis restricted to total occupation <= T.
struct FockModel {
  double beta = 0;
  double mass = 0;
  int mode_cut = 0;  // N
  int occ_cut = 0;   // T
  int dim = 0;

  std::vector<int> mode_numbers;       // n, size 2N+1
  std::vector<double> momenta;         // k_n
  std::vector<double> frequencies;     // nu_n
  std::vector<std::vector<int>> basis; // occupation vectors
  std::vector<int> total_occupation;   // per basis state

  std::vector<Eigen::MatrixXd> annihilators;
  std::vector<Eigen::MatrixXd> creators;
  Eigen::VectorXd h0_diagonal;         // dGamma(nu)
  Eigen::VectorXd momentum_diagonal;   // dGamma(k)

  bool has_interaction = false;
  Eigen::MatrixXd interaction;         // V
  double ground_energy = 0;            // E_C
  Eigen::MatrixXd hamiltonian;         // H_C = H0 + V - E_C (or H0)
  Eigen::VectorXd ground_state;        // Omega_C in the occupation basis
  double vacuum_overlap = 1.0;         // (Omega_C, Fock vacuum)

  // Coincident-point circle covariance at this mode cutoff,
  // (1/beta) sum_n 1/(2 nu_n); the ordering constant the truncation realises.
  double circle_wick_constant() const;
};

// N <= 6, T <= 6, dim <= 20000.
FockModel build_fock(double beta, double mass, int mode_cut, int occ_cut);

// phi_C(g) = sum_n g_n / sqrt(2 nu_n) (a_n + a^dag_n) for a real
// mode-coefficient vector g; its free two-point function is the circle
// covariance sum_n g_n h_n / (2 nu_n).
Eigen::MatrixXd fock_field_operator(const FockModel& model,
                                    const Eigen::VectorXd& g);

// Sobolev norm ||g||^2_{H^{-1/2 - eps/2}} = sum_n g_n^2 nu_n^{-1-eps}.
double sobolev_norm(const FockModel& model, const Eigen::VectorXd& g,
                    double eps);

struct PhiBoundResult {
  double min_eig_upper = 0;  // c1 ||g|| (H + c2)^{1/2+eps} - phi_C(g)
  double min_eig_lower = 0;  // c1 ||g|| (H + c2)^{1/2+eps} + phi_C(g)
  bool ok = false;
};

// Field bound as a matrix inequality, compressed onto occupation <= T-2.
// linear_form swaps in the H^{-1} norm with first power of (H + c2).
PhiBoundResult phi_bound_check(const FockModel& model, const Eigen::VectorXd& g,
                               double eps, double c1, double c2,
                               bool use_interacting = false,
                               bool linear_form = false,
                               double tolerance = 1e-10);

struct PhiBoundSearch {
  double c1 = 0, c2 = 0;
  PhiBoundResult result;
};

// Smallest grid pair (c1, c2) in {1,2,5,10,20,50,100}^2 satisfying the
// bound; throws NoConstantsFound if the scan fails.
PhiBoundSearch phi_bound_search(const FockModel& model,
                                const Eigen::VectorXd& g, double eps,
                                bool use_interacting = false,
                                bool linear_form = false);

// V = integral over the circle of the normal-ordered polynomial of the
// field; the polynomial is rewick-converted to the cutoff constant first.
// Installs V, E_C, H_C and the ground state on the model.
void build_interaction(FockModel& model, const WickPolynomial& poly);

struct GibbsSpec {
  Eigen::MatrixXd hamiltonian;
  double beta = 0;
};

GibbsSpec make_gibbs_spec(Eigen::MatrixXd hamiltonian, double beta);

// ||A||_p = (tr((e^{-beta H / p} A)^p) / tr(e^{-beta H}))^{1/p}, p even.
double gibbs_lp_norm(const GibbsSpec& spec, const Eigen::MatrixXd& a, int p);

struct GibbsHolderReport {
  double lhs = 0;
  double rhs = 0;
  std::vector<int> exponents;
  bool ok = false;
};

// | tr(e^{-(1 - sum z) beta H} A_n e^{-z_n beta H} ... A_1 e^{-z_1 beta H}
//   A_0) | / tr(e^{-beta H})  <=  prod_j ||A_j||_{p_j},
// with p_j the smallest even integer with 1/p_j <= min(z_j, z_{j+1}),
// z_0 := z_1 and z_{n+1} := z_n.
GibbsHolderReport gibbs_holder_check(const GibbsSpec& spec,
                                     const std::vector<Eigen::MatrixXd>& a_list,
                                     const std::vector<double>& z_list);

}  // namespace pphi2
