#include "homlab/integrand.hh"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace homlab {

std::string to_string(Region r) {
  switch (r) {
    case Region::volume: return "volume";
    case Region::interface: return "interface";
  }
  return "unknown";
}

Region region_from_string(const std::string & s) {
  if (s == "volume") return Region::volume;
  if (s == "interface") return Region::interface;
  throw std::invalid_argument("unknown region tag '" + s + "'");
}

namespace {

int dim_from_mandel_size(Eigen::Index size) {
  if (size == sym_size(2)) return 2;
  if (size == sym_size(3)) return 3;
  throw std::invalid_argument("quadratic form: stiffness must be 3x3 (2D) or 6x6 (3D) in Mandel notation");
}

Eigen::VectorXd stiffness_eigenvalues(const Matrix & C) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(C, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

Integrand::Integrand(Form form, std::map<Region, double> region_weights, std::optional<double> alpha,
                     std::optional<double> beta)
    : form_(std::move(form)), region_weights_(std::move(region_weights)) {
  if (region_weights_.empty()) throw std::invalid_argument("integrand: no region weights");
  for (const auto & [r, w] : region_weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("integrand: region weight for " + to_string(r) + " must be finite and >= 0");
    }
  }
  if (const auto * pp = std::get_if<PurePower>(&form_)) {
    if (!(pp->exponent >= 1.0) || !std::isfinite(pp->exponent)) {
      throw std::invalid_argument("integrand: exponent p must be >= 1");
    }
    if (!(pp->weight >= 0.0) || !std::isfinite(pp->weight)) {
      throw std::invalid_argument("integrand: weight must be finite and >= 0");
    }
  } else {
    const auto & C = std::get<QuadraticForm>(form_).stiffness;
    if (C.rows() != C.cols()) throw std::invalid_argument("quadratic form: stiffness not square");
    dim_from_mandel_size(C.rows());
    const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
    if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale) {
      throw std::invalid_argument("quadratic form: stiffness not symmetric");
    }
  }
  const auto [a, b] = tight_growth();
  alpha_ = alpha.value_or(a);
  beta_ = beta.value_or(b);
}

Integrand Integrand::pure_power(double p, double weight) { return Integrand(PurePower{p, weight}); }

Integrand Integrand::quadratic_form(const Matrix & stiffness) { return Integrand(QuadraticForm{stiffness}); }

double Integrand::exponent() const {
  if (const auto * pp = std::get_if<PurePower>(&form_)) return pp->exponent;
  return 2.0;
}

bool Integrand::is_quadratic() const { return exponent() == 2.0; }

std::optional<int> Integrand::dimension() const {
  if (const auto * q = std::get_if<QuadraticForm>(&form_)) return dim_from_mandel_size(q->stiffness.rows());
  return std::nullopt;
}

bool Integrand::is_convex() const {
  if (const auto * pp = std::get_if<PurePower>(&form_)) return pp->exponent >= 1.0 && pp->weight >= 0.0;
  const auto & C = std::get<QuadraticForm>(form_).stiffness;
  const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
  return stiffness_eigenvalues(C).minCoeff() >= -1e-12 * scale;
}

Integrand Integrand::with_region_weight(Region r, double w) const {
  auto weights = region_weights_;
  weights[r] = w;
  return Integrand(form_, weights);
}

Integrand Integrand::with_growth(double alpha, double beta) const {
  return Integrand(form_, region_weights_, alpha, beta);
}

double Integrand::region_weight(Region r) const {
  const auto it = region_weights_.find(r);
  if (it == region_weights_.end()) {
    throw std::invalid_argument("integrand has no weight for region '" + to_string(r) + "'");
  }
  return it->second;
}

std::pair<double, double> Integrand::tight_growth() const {
  double wmin = std::numeric_limits<double>::infinity();
  double wmax = 0.0;
  for (const auto & [r, w] : region_weights_) {
    wmin = std::min(wmin, w);
    wmax = std::max(wmax, w);
  }
  if (const auto * pp = std::get_if<PurePower>(&form_)) return {pp->weight * wmin, pp->weight * wmax};
  const auto ev = stiffness_eigenvalues(std::get<QuadraticForm>(form_).stiffness);
  return {ev.minCoeff() * wmin, ev.maxCoeff() * wmax};
}

double Integrand::form_value(const SymMatrix & A) const {
  if (const auto * pp = std::get_if<PurePower>(&form_)) {
    if (pp->exponent == 2.0) return pp->weight * A.norm_sq();
    return pp->weight * std::pow(A.norm(), pp->exponent);
  }
  const auto & C = std::get<QuadraticForm>(form_).stiffness;
  if (dim_from_mandel_size(C.rows()) != A.dim()) {
    throw std::invalid_argument("quadratic form: strain dimension does not match stiffness");
  }
  const Vector a = A.mandel();
  return a.dot(C * a);
}

double Integrand::evaluate(Region r, const SymMatrix & A) const { return region_weight(r) * form_value(A); }

double Integrand::value_and_gradient(Region r, const SymMatrix & A, SymMatrix & gradient,
                                     double huber_delta) const {
  const double rw = region_weight(r);
  const int n = A.dim();
  if (const auto * pp = std::get_if<PurePower>(&form_)) {
    const double w = rw * pp->weight;
    const double p = pp->exponent;
    if (p == 2.0) {
      gradient = (2.0 * w) * A;
      return w * A.norm_sq();
    }
    const double s = A.norm();
    if (p == 1.0) {
      if (huber_delta > 0.0 && s <= huber_delta) {
        gradient = (w / huber_delta) * A;
        return w * s * s / (2.0 * huber_delta);
      }
      if (s == 0.0) {
        gradient = SymMatrix(n);
        return 0.0;
      }
      gradient = (w / s) * A;
      return w * (huber_delta > 0.0 ? s - 0.5 * huber_delta : s);
    }
    if (s == 0.0) {
      gradient = SymMatrix(n);
      return 0.0;
    }
    const double sp2 = std::pow(s, p - 2.0);
    gradient = (w * p * sp2) * A;
    return w * sp2 * s * s;
  }
  const auto & C = std::get<QuadraticForm>(form_).stiffness;
  if (dim_from_mandel_size(C.rows()) != n) {
    throw std::invalid_argument("quadratic form: strain dimension does not match stiffness");
  }
  const Vector a = A.mandel();
  const Vector Ca = C * a;
  // d(a·Ca)/da = 2Ca, and G:dA == (∂f/∂a)·da makes G the Mandel image of 2Ca
  gradient = SymMatrix::from_mandel(n, (2.0 * rw) * Ca);
  return rw * a.dot(Ca);
}

bool operator==(const Integrand & a, const Integrand & b) {
  if (a.region_weights_ != b.region_weights_ || a.alpha_ != b.alpha_ || a.beta_ != b.beta_) return false;
  if (a.form_.index() != b.form_.index()) return false;
  if (const auto * pa = std::get_if<PurePower>(&a.form_)) {
    const auto & pb = std::get<PurePower>(b.form_);
    return pa->exponent == pb.exponent && pa->weight == pb.weight;
  }
  const auto & ca = std::get<QuadraticForm>(a.form_).stiffness;
  const auto & cb = std::get<QuadraticForm>(b.form_).stiffness;
  return ca.rows() == cb.rows() && ca.cols() == cb.cols() && ca == cb;
}

/* ---------------------------------------------------------------------- */
GrowthReport growth_check(const Integrand & f, int samples, std::uint64_t seed, int n) {
  if (samples < 1) throw std::invalid_argument("growth_check: samples must be >= 1");
  if (n == 0) n = f.dimension().value_or(2);
  require_supported_dim(n);
  if (f.dimension() && *f.dimension() != n) throw std::invalid_argument("growth_check: dimension mismatch");

  const int m = sym_size(n);
  std::vector<Vector> directions;
  for (int i = 0; i < m; ++i) directions.push_back(Vector::Unit(m, i));
  if (const auto * q = std::get_if<QuadraticForm>(&f.form())) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(q->stiffness);
    for (int i = 0; i < m; ++i) directions.emplace_back(es.eigenvectors().col(i));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> log_mag(-2.0, 2.0);

  std::vector<SymMatrix> strains;
  for (const auto & d : directions) {
    for (const double mag : {1e-2, 1.0, 1e2}) strains.push_back(SymMatrix::from_mandel(n, mag * d));
  }
  for (int s = 0; s < samples; ++s) {
    Vector a(m);
    for (int i = 0; i < m; ++i) a(i) = normal(rng);
    if (a.norm() == 0.0) continue;
    const double mag = std::pow(10.0, log_mag(rng));
    strains.push_back(SymMatrix::from_mandel(n, (mag / a.norm()) * a));
  }

  const double p = f.exponent();
  GrowthReport rep;
  rep.alpha = f.alpha();
  rep.beta = f.beta();
  rep.worst_lower_ratio = std::numeric_limits<double>::infinity();
  rep.worst_upper_ratio = 0.0;
  for (const auto & [region, w] : f.region_weights()) {
    for (const auto & A : strains) {
      const double val = f.evaluate(region, A);
      const double ap = std::pow(A.norm(), p);
      rep.worst_lower_ratio = std::min(rep.worst_lower_ratio, val / ap);
      rep.worst_upper_ratio = std::max(rep.worst_upper_ratio, val / (1.0 + ap));
      ++rep.samples;
    }
  }
  // ratios such as |A|^p/|A|^p may land one ulp off the exact constant
  constexpr double rel = 1e-12;
  rep.lower_ok = rep.alpha > 0.0 && rep.worst_lower_ratio >= rep.alpha * (1.0 - rel);
  rep.upper_ok = rep.beta >= rep.alpha && rep.worst_upper_ratio <= rep.beta * (1.0 + rel);
  rep.margin = std::min(rep.worst_lower_ratio - rep.alpha, rep.beta - rep.worst_upper_ratio);
  return rep;
}

std::vector<double> default_recession_ladder() { return {1e2, 1e3, 1e4, 1e5, 1e6}; }

RecessionEstimate recession_estimate(const Integrand & f, const SymMatrix & xi,
                                     const std::vector<double> & t_ladder, Region r) {
  if (!f.is_convex()) throw std::invalid_argument("recession_estimate: integrand is not convex");
  if (t_ladder.empty()) throw std::invalid_argument("recession_estimate: empty ladder");
  for (std::size_t i = 0; i < t_ladder.size(); ++i) {
    if (!(t_ladder[i] > 0.0) || (i > 0 && !(t_ladder[i] > t_ladder[i - 1]))) {
      throw std::invalid_argument("recession_estimate: ladder must be positive and increasing");
    }
  }
  constexpr double growth_threshold = 1.0 + 1e-3;
  double prev = 0.0;
  for (std::size_t i = 0; i < t_ladder.size(); ++i) {
    const double t = t_ladder[i];
    const double q = f.evaluate(r, t * xi) / t;
    if (i > 0 && prev > 0.0 && q > growth_threshold * prev) return {true, std::numeric_limits<double>::infinity()};
    prev = q;
  }
  return {false, prev};
}

}  // namespace homlab
