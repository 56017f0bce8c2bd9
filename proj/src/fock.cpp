#include "pphi2/fock.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace pphi2 {

namespace {

void enumerate_occupations(int modes, int budget, std::vector<int>& current,
                           std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == modes) {
    out.push_back(current);
    return;
  }
  for (int t = 0; t <= budget; ++t) {
    current.push_back(t);
    enumerate_occupations(modes, budget - t, current, out);
    current.pop_back();
  }
}

double binomial(int n, int k) {
  double r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

}  // namespace

double FockModel::circle_wick_constant() const {
  double sum = 0;
  for (double nu : frequencies) sum += 1.0 / (2.0 * nu);
  return sum / beta;
}

FockModel build_fock(double beta, double mass, int mode_cut, int occ_cut) {
  require(beta > 0 && mass > 0, ErrorCode::NonPositiveParameter,
          "beta and mass must be > 0");
  require(mode_cut >= 0 && mode_cut <= 6 && occ_cut >= 1 && occ_cut <= 6,
          ErrorCode::ValidationError, "desk scale: N <= 6, T <= 6");

  FockModel model;
  model.beta = beta;
  model.mass = mass;
  model.mode_cut = mode_cut;
  model.occ_cut = occ_cut;
  const int modes = 2 * mode_cut + 1;
  for (int n = -mode_cut; n <= mode_cut; ++n) {
    double k = 2.0 * std::numbers::pi * n / beta;
    model.mode_numbers.push_back(n);
    model.momenta.push_back(k);
    model.frequencies.push_back(std::sqrt(k * k + mass * mass));
  }

  std::vector<int> scratch;
  enumerate_occupations(modes, occ_cut, scratch, model.basis);
  model.dim = static_cast<int>(model.basis.size());
  require(model.dim <= 20000, ErrorCode::DimensionTooLarge,
          "truncated Fock dimension above 20000");

  std::map<std::vector<int>, int> index;
  for (int i = 0; i < model.dim; ++i) index[model.basis[i]] = i;
  model.total_occupation.resize(model.dim);
  for (int i = 0; i < model.dim; ++i) {
    int tot = 0;
    for (int t : model.basis[i]) tot += t;
    model.total_occupation[i] = tot;
  }

  model.annihilators.assign(modes, Eigen::MatrixXd::Zero(model.dim, model.dim));
  for (int m = 0; m < modes; ++m) {
    for (int i = 0; i < model.dim; ++i) {
      if (model.basis[i][m] == 0) continue;
      std::vector<int> lowered = model.basis[i];
      lowered[m] -= 1;
      model.annihilators[m](index[lowered], i) =
          std::sqrt(static_cast<double>(model.basis[i][m]));
    }
  }
  model.creators.reserve(modes);
  for (int m = 0; m < modes; ++m)
    model.creators.push_back(model.annihilators[m].transpose());

  model.h0_diagonal.resize(model.dim);
  model.momentum_diagonal.resize(model.dim);
  for (int i = 0; i < model.dim; ++i) {
    double e = 0, p = 0;
    for (int m = 0; m < modes; ++m) {
      e += model.basis[i][m] * model.frequencies[m];
      p += model.basis[i][m] * model.momenta[m];
    }
    model.h0_diagonal(i) = e;
    model.momentum_diagonal(i) = p;
  }
  model.hamiltonian = model.h0_diagonal.asDiagonal();
  model.ground_state = Eigen::VectorXd::Zero(model.dim);
  model.ground_state(index[std::vector<int>(modes, 0)]) = 1.0;
  return model;
}

Eigen::MatrixXd fock_field_operator(const FockModel& model,
                                    const Eigen::VectorXd& g) {
  require(g.size() == static_cast<int>(model.frequencies.size()),
          ErrorCode::ValidationError, "mode vector has wrong length");
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(model.dim, model.dim);
  for (int m = 0; m < g.size(); ++m)
    if (g(m) != 0)
      phi += g(m) / std::sqrt(2.0 * model.frequencies[m]) *
             (model.annihilators[m] + model.creators[m]);
  return phi;
}

double sobolev_norm(const FockModel& model, const Eigen::VectorXd& g,
                    double eps) {
  double sum = 0;
  for (int m = 0; m < g.size(); ++m)
    sum += g(m) * g(m) * std::pow(model.frequencies[m], -1.0 - eps);
  return std::sqrt(sum);
}

PhiBoundResult phi_bound_check(const FockModel& model, const Eigen::VectorXd& g,
                               double eps, double c1, double c2,
                               bool use_interacting, bool linear_form,
                               double tolerance) {
  require(eps >= 0 && eps <= 1, ErrorCode::ValidationError,
          "eps must lie in [0, 1]");
  require(c1 > 0 && c2 > 0, ErrorCode::ValidationError,
          "constants must be positive");
  const Eigen::MatrixXd h = use_interacting && model.has_interaction
                                ? model.hamiltonian
                                : Eigen::MatrixXd(model.h0_diagonal.asDiagonal());
  const double power = linear_form ? 1.0 : 0.5 + eps;
  const double norm = linear_form ? sobolev_norm(model, g, 1.0)
                                  : sobolev_norm(model, g, eps);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hsolver(
      h + c2 * Eigen::MatrixXd::Identity(model.dim, model.dim));
  Eigen::VectorXd powered = hsolver.eigenvalues();
  for (int i = 0; i < powered.size(); ++i)
    powered(i) = std::pow(powered(i), power);
  Eigen::MatrixXd bound_op = hsolver.eigenvectors() * powered.asDiagonal() *
                             hsolver.eigenvectors().transpose();
  Eigen::MatrixXd phi = fock_field_operator(model, g);

  // Compression onto occupation <= T-2 keeps the hard cutoff from polluting
  // the inequality.
  std::vector<int> keep;
  for (int i = 0; i < model.dim; ++i)
    if (model.total_occupation[i] <= model.occ_cut - 2) keep.push_back(i);
  const int nk = static_cast<int>(keep.size());
  Eigen::MatrixXd upper(nk, nk), lower(nk, nk);
  for (int a = 0; a < nk; ++a)
    for (int b = 0; b < nk; ++b) {
      double base = c1 * norm * bound_op(keep[a], keep[b]);
      upper(a, b) = base - phi(keep[a], keep[b]);
      lower(a, b) = base + phi(keep[a], keep[b]);
    }
  PhiBoundResult result;
  result.min_eig_upper =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(upper).eigenvalues()
          .minCoeff();
  result.min_eig_lower =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(lower).eigenvalues()
          .minCoeff();
  result.ok = result.min_eig_upper >= -tolerance &&
              result.min_eig_lower >= -tolerance;
  return result;
}

PhiBoundSearch phi_bound_search(const FockModel& model,
                                const Eigen::VectorXd& g, double eps,
                                bool use_interacting, bool linear_form) {
  const double grid[] = {1, 2, 5, 10, 20, 50, 100};
  for (double c1 : grid)
    for (double c2 : grid) {
      PhiBoundResult r =
          phi_bound_check(model, g, eps, c1, c2, use_interacting, linear_form);
      if (r.ok) return PhiBoundSearch{c1, c2, r};
    }
  fail(ErrorCode::NoConstantsFound,
       "no (c1, c2) on the grid satisfies the field bound");
}

void build_interaction(FockModel& model, const WickPolynomial& poly) {
  require(poly.degree() <= 4, ErrorCode::ValidationError,
          "interaction degree above 4 not supported on the Fock side");
  const int modes = 2 * model.mode_cut + 1;
  const WickPolynomial ordered = rewick(poly, model.circle_wick_constant());

  std::map<std::vector<int>, int> index;
  for (int i = 0; i < model.dim; ++i) index[model.basis[i]] = i;

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(model.dim, model.dim);

  // V = sum_j c_j beta^{1-j/2} sum_{r} C(j,r)
  //       sum_{momentum-conserving tuples} prod (2 nu)^{-1/2}
  //       a^dag_{n_1} .. a^dag_{n_r} a_{m_1} .. a_{m_{j-r}}
  for (int j = 1; j < static_cast<int>(ordered.coefficients.size()); ++j) {
    const double cj = ordered.coefficients[j];
    if (cj == 0.0) continue;
    const double volume_factor = std::pow(model.beta, 1.0 - 0.5 * j);
    for (int r = 0; r <= j; ++r) {
      const double comb = binomial(j, r);
      // Iterate over all j-tuples of modes, first r create, rest annihilate.
      std::vector<int> tuple(j, 0);
      while (true) {
        int net = 0;
        for (int q = 0; q < j; ++q)
          net += (q < r ? model.mode_numbers[tuple[q]]
                        : -model.mode_numbers[tuple[q]]);
        if (net == 0) {
          double kernel = 1.0;
          for (int q = 0; q < j; ++q)
            kernel /= std::sqrt(2.0 * model.frequencies[tuple[q]]);
          const double amp = cj * volume_factor * comb * kernel;
          // Apply to every basis state: annihilate then create.
          for (int col = 0; col < model.dim; ++col) {
            std::vector<int> occ = model.basis[col];
            double factor = amp;
            bool dead = false;
            for (int q = j - 1; q >= r; --q) {
              int m = tuple[q];
              if (occ[m] == 0) {
                dead = true;
                break;
              }
              factor *= std::sqrt(static_cast<double>(occ[m]));
              occ[m] -= 1;
            }
            if (dead) continue;
            for (int q = r - 1; q >= 0; --q) {
              int m = tuple[q];
              occ[m] += 1;
              factor *= std::sqrt(static_cast<double>(occ[m]));
            }
            auto it = index.find(occ);
            if (it == index.end()) continue;  // outside the truncation
            v(it->second, col) += factor;
          }
        }
        // next tuple
        int pos = j - 1;
        while (pos >= 0 && tuple[pos] == modes - 1) tuple[pos--] = 0;
        if (pos < 0) break;
        ++tuple[pos];
      }
    }
    // constant term handled below through coefficients[0]
  }
  if (!ordered.coefficients.empty() && ordered.coefficients[0] != 0.0)
    v += ordered.coefficients[0] * model.beta *
         Eigen::MatrixXd::Identity(model.dim, model.dim);

  v = 0.5 * (v + Eigen::MatrixXd(v.transpose()));  // symmetrise rounding

  Eigen::MatrixXd h_full = Eigen::MatrixXd(model.h0_diagonal.asDiagonal()) + v;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h_full);
  const Eigen::VectorXd& evals = solver.eigenvalues();
  double gap = evals(1) - evals(0);
  require(gap > 1e-10 * std::max(1.0, std::abs(evals(0))),
          ErrorCode::DegenerateGround, "ground state is degenerate");

  model.interaction = v;
  model.ground_energy = evals(0);
  model.hamiltonian =
      h_full - evals(0) * Eigen::MatrixXd::Identity(model.dim, model.dim);
  Eigen::VectorXd ground = solver.eigenvectors().col(0);
  // Fock vacuum is the all-zero occupation state.
  int vac = 0;
  for (int i = 0; i < model.dim; ++i)
    if (model.total_occupation[i] == 0) vac = i;
  if (ground(vac) < 0) ground = -ground;
  model.ground_state = ground;
  model.vacuum_overlap = ground(vac);
  model.has_interaction = true;
}

GibbsSpec make_gibbs_spec(Eigen::MatrixXd hamiltonian, double beta) {
  require(beta > 0, ErrorCode::NonPositiveParameter, "beta must be > 0");
  double scale = std::max(1.0, hamiltonian.norm());
  require((hamiltonian - Eigen::MatrixXd(hamiltonian.transpose())).norm() <=
              1e-12 * scale,
          ErrorCode::ValidationError, "hamiltonian must be symmetric");
  return GibbsSpec{std::move(hamiltonian), beta};
}

namespace {

struct GibbsCache {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd shifted;  // eigenvalues minus the ground energy
  double z;                 // tr e^{-beta (H - E0)}

  GibbsCache(const GibbsSpec& spec) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(spec.hamiltonian);
    vectors = solver.eigenvectors();
    shifted = solver.eigenvalues().array() - solver.eigenvalues().minCoeff();
    z = (-spec.beta * shifted.array()).exp().sum();
  }

  Eigen::MatrixXd propagator(double weight, double beta) const {
    Eigen::VectorXd d = (-weight * beta * shifted.array()).exp();
    return vectors * d.asDiagonal() * vectors.transpose();
  }
};

int smallest_even_exponent(double gap) {
  require(gap > 0, ErrorCode::ExponentInfeasible,
          "zero weight gap leaves no admissible Hoelder exponent");
  int p = 2;
  while (1.0 / p > gap) {
    p += 2;
    require(p <= 1 << 20, ErrorCode::ExponentInfeasible,
            "weight gap too small");
  }
  return p;
}

}  // namespace

double gibbs_lp_norm(const GibbsSpec& spec, const Eigen::MatrixXd& a, int p) {
  require(p >= 2 && p % 2 == 0, ErrorCode::ValidationError,
          "p must be a positive even integer");
  GibbsCache cache(spec);
  Eigen::MatrixXd step = cache.propagator(1.0 / p, spec.beta) * a;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  for (int i = 0; i < p; ++i) acc = acc * step;
  return std::pow(acc.trace() / cache.z, 1.0 / p);
}

GibbsHolderReport gibbs_holder_check(const GibbsSpec& spec,
                                     const std::vector<Eigen::MatrixXd>& a_list,
                                     const std::vector<double>& z_list) {
  const int n = static_cast<int>(a_list.size()) - 1;
  require(n >= 0 && static_cast<int>(z_list.size()) == n,
          ErrorCode::ValidationError,
          "need one weight per propagator between factors");
  double z_sum = 0;
  for (double z : z_list) {
    require(z >= 0, ErrorCode::ValidationError, "weights must be >= 0");
    z_sum += z;
  }
  require(z_sum <= 1.0 + 1e-12, ErrorCode::ValidationError,
          "weights must sum to at most 1");
  for (const auto& a : a_list) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(a);
    require(s.eigenvalues().minCoeff() >= -1e-10 *
                std::max(1.0, s.eigenvalues().cwiseAbs().maxCoeff()),
            ErrorCode::ValidationError, "factors must be PSD");
  }

  GibbsCache cache(spec);
  // LHS = |tr(e^{-(1-sum z) beta H} A_n e^{-z_n beta H} ... A_0)| / Z
  Eigen::MatrixXd acc = cache.propagator(1.0 - z_sum, spec.beta);
  for (int j = n; j >= 1; --j)
    acc = acc * a_list[j] * cache.propagator(z_list[j - 1], spec.beta);
  acc = acc * a_list[0];
  const double lhs = std::abs(acc.trace()) / cache.z;

  GibbsHolderReport report;
  report.lhs = lhs;
  report.rhs = 1.0;
  for (int j = 0; j <= n; ++j) {
    double z_here = n == 0 ? 1.0 : (j == 0 ? z_list[0] : z_list[j - 1]);
    double z_next = n == 0 ? 1.0 : (j == n ? z_list[n - 1] : z_list[j]);
    int p = smallest_even_exponent(std::min(z_here, z_next));
    report.exponents.push_back(p);
    report.rhs *= gibbs_lp_norm(spec, a_list[j], p);
  }
  report.ok = report.lhs <= report.rhs * (1.0 + 1e-10);
  return report;
}

}  // namespace pphi2
