/**
 * @file   integrand.hh
 *
 * @brief  Energy densities f(x, A) of the symmetrized gradient. The space
 *         dependence enters only through a region tag (bulk volume or
 *         interface), each region scaling a common convex form.
 */
#ifndef HOMLAB_INTEGRAND_HH_
#define HOMLAB_INTEGRAND_HH_

#include "homlab/tensor.hh"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace homlab {

enum class Region { volume, interface };

std::string to_string(Region r);
//! throws std::invalid_argument for an unknown tag
Region region_from_string(const std::string & s);

//! w·|A|^p
struct PurePower {
  double exponent{2.0};
  double weight{1.0};
};

//! a·C·a with a the Mandel coordinates of A, i.e. (C:A):A
struct QuadraticForm {
  Matrix stiffness;
};

class Integrand {
 public:
  using Form = std::variant<PurePower, QuadraticForm>;

  //! growth constants default to the tight ones implied by the form
  explicit Integrand(Form form, std::map<Region, double> region_weights = {{Region::volume, 1.0},
                                                                          {Region::interface, 1.0}},
                     std::optional<double> alpha = std::nullopt,
                     std::optional<double> beta = std::nullopt);

  static Integrand pure_power(double p, double weight = 1.0);
  static Integrand quadratic_form(const Matrix & stiffness);

  const Form & form() const { return form_; }
  const std::map<Region, double> & region_weights() const { return region_weights_; }
  double exponent() const;
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  bool is_pure_power() const { return std::holds_alternative<PurePower>(form_); }
  //! true when the energy is a homogeneous quadratic in A
  bool is_quadratic() const;
  //! dimension fixed by a quadratic form's stiffness, nullopt for pure powers
  std::optional<int> dimension() const;
  bool is_convex() const;

  Integrand with_region_weight(Region r, double w) const;
  Integrand with_growth(double alpha, double beta) const;

  double region_weight(Region r) const;

  //! f(region, A); throws for a region without a weight
  double evaluate(Region r, const SymMatrix & A) const;

  /**
   * Value and gradient ∂f/∂A (as a symmetric matrix, so that
   * f(A + dA) ≈ f(A) + G:dA). For p == 1 and huber_delta > 0 the norm is
   * replaced by its Huber smoothing, which is below |A| by at most δ/2.
   */
  double value_and_gradient(Region r, const SymMatrix & A, SymMatrix & gradient,
                            double huber_delta = 0.0) const;

  friend bool operator==(const Integrand & a, const Integrand & b);

 private:
  double form_value(const SymMatrix & A) const;
  std::pair<double, double> tight_growth() const;

  Form form_;
  std::map<Region, double> region_weights_;
  double alpha_{};
  double beta_{};
};

struct GrowthReport {
  double alpha{};
  double beta{};
  //! min over samples of f / |A|^p
  double worst_lower_ratio{};
  //! max over samples of f / (1 + |A|^p)
  double worst_upper_ratio{};
  //! min(worst_lower_ratio - alpha, beta - worst_upper_ratio)
  double margin{};
  std::size_t samples{};
  bool lower_ok{};
  bool upper_ok{};
  bool passed() const { return lower_ok && upper_ok; }
};

/**
 * Checks α|A|^p ≤ f(x,A) ≤ β(1+|A|^p) on random strains of varied
 * magnitude plus deterministic probes (coordinate directions and, for a
 * quadratic form, its eigen-directions) in every weighted region.
 */
GrowthReport growth_check(const Integrand & f, int samples, std::uint64_t seed, int n = 0);

struct RecessionEstimate {
  bool infinite{};
  double value{};
};

std::vector<double> default_recession_ladder();

/**
 * Estimate of f^∞(ξ) = lim f(tξ)/t on an increasing ladder of t. Reports
 * divergence as soon as two successive quotients grow by more than 0.1%.
 * Throws std::invalid_argument for non-convex integrands or a bad ladder.
 */
RecessionEstimate recession_estimate(const Integrand & f, const SymMatrix & xi,
                                     const std::vector<double> & t_ladder = default_recession_ladder(),
                                     Region r = Region::volume);

}  // namespace homlab

#endif  // HOMLAB_INTEGRAND_HH_
