#include "addkit/nd_validator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "addkit/error.hpp"
#include "addkit/parallel.hpp"

namespace addkit {

namespace {

constexpr std::size_t max_points = 64;

std::string format_point(const Point& p) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

// Psi_ij = psi(xi_i - xi_j)
Eigen::MatrixXd difference_matrix(const FieldFunction& f, const PointSet& ps) {
  const auto m = ps.size();
  const auto n = static_cast<std::size_t>(ps.dimension);
  Eigen::MatrixXd M(m, m);
  Point d(n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < n; ++k) d[k] = ps.points[i][k] - ps.points[j][k];
      const double v = f(d);
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::evaluation, "non-finite value at difference " + format_point(d));
      }
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return M;
}

double min_eigenvalue(const Eigen::MatrixXd& M) {
  // symmetrize away rounding asymmetry of f
  const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Largest value of c* Psi c over unit vectors c with sum c = 0.
double projected_max_eigenvalue(const Eigen::MatrixXd& Psi) {
  const auto m = Psi.rows();
  if (m < 2) return 0.0;
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
  const Eigen::MatrixXd S = P * (0.5 * (Psi + Psi.transpose())) * P;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(m - 1);
}

double form_value(const Eigen::MatrixXd& Psi, std::span<const std::complex<double>> c) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < Psi.rows(); ++i) {
    for (Eigen::Index j = 0; j < Psi.cols(); ++j) {
      sum += (c[static_cast<std::size_t>(i)] * std::conj(c[static_cast<std::size_t>(j)])).real() * Psi(i, j);
    }
  }
  return sum;
}

}  // namespace

void PointSet::validate() const {
  if (dimension < 1) throw Error(ErrorCode::domain, "point set dimension must be positive");
  if (points.empty() || points.size() > max_points) throw Error(ErrorCode::domain, "point sets hold 1 to 64 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != static_cast<std::size_t>(dimension)) {
      throw Error(ErrorCode::domain, "point " + format_point(points[i]) + " has the wrong dimension");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (points[i] == points[j]) throw Error(ErrorCode::domain, "repeated point " + format_point(points[i]));
    }
  }
}

PointSet lattice_point_set(int dimension) {
  PointSet ps;
  ps.dimension = dimension;
  if (dimension == 1) {
    ps.points = {{0.0}, {1.0}, {2.0}};
  } else if (dimension == 2) {
    for (double a : {0.0, 1.0, 2.0}) {
      for (double b : {0.0, 1.0, 2.0}) ps.points.push_back({b, a});
    }
  } else {
    ps.points.push_back(Point(static_cast<std::size_t>(dimension), 0.0));
    for (int k = 0; k < dimension; ++k) {
      for (double v : {1.0, 2.0}) {
        Point p(static_cast<std::size_t>(dimension), 0.0);
        p[static_cast<std::size_t>(k)] = v;
        ps.points.push_back(p);
      }
    }
  }
  ps.validate();
  return ps;
}

PointSet random_point_set(int dimension, std::size_t m, double radius, std::uint64_t seed) {
  if (m < 1 || m > max_points) throw Error(ErrorCode::domain, "point sets hold 1 to 64 points");
  PointSet ps;
  ps.dimension = dimension;
  ps.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-radius, radius);
  ps.points.push_back(Point(static_cast<std::size_t>(dimension), 0.0));
  while (ps.points.size() < m) {
    Point p(static_cast<std::size_t>(dimension));
    for (auto& v : p) v = coord(rng);
    if (std::find(ps.points.begin(), ps.points.end(), p) == ps.points.end()) ps.points.push_back(std::move(p));
  }
  ps.validate();
  return ps;
}

double pd_min_eigenvalue(const FieldFunction& f, const PointSet& ps) {
  ps.validate();
  return min_eigenvalue(difference_matrix(f, ps));
}

double constrained_nd_form(const FieldFunction& psi, const PointSet& ps, std::span<const std::complex<double>> c) {
  ps.validate();
  if (c.size() != ps.size()) throw Error(ErrorCode::domain, "one weight per point is required");
  std::complex<double> total = 0.0;
  double scale = 0.0;
  for (const auto& ci : c) {
    total += ci;
    scale = std::max(scale, std::abs(ci));
  }
  if (std::abs(total) > 1e-14 * std::max(1.0, scale)) {
    throw Error(ErrorCode::weight_sum, "weights of a constrained form must sum to zero");
  }
  return form_value(difference_matrix(psi, ps), c);
}

std::vector<double> NdConfig::default_scales() {
  std::vector<double> s(8);
  for (int i = 0; i < 8; ++i) s[static_cast<std::size_t>(i)] = std::pow(10.0, -3.0 + 6.0 * i / 7.0);
  return s;
}

std::string NdReport::verdict() const { return pass ? "no violation found" : "violation found"; }

nlohmann::ordered_json NdReport::to_json() const {
  nlohmann::ordered_json j;
  j["t"] = t;
  j["verdict"] = verdict();
  j["pass"] = pass;
  j["tol"] = tol;
  auto& sc = j["scales"] = nlohmann::ordered_json::array();
  for (const auto& s : scales) {
    sc.push_back({{"scale", s.scale}, {"min_eigenvalue", s.min_eigenvalue}, {"threshold", s.threshold}, {"pass", s.pass}});
  }
  j["worst_constrained_form"] = worst_form;
  j["constrained_form_threshold"] = worst_form_threshold;
  j["projected_max"] = projected_max;
  j["projected_threshold"] = projected_threshold;
  auto& w = j["witnesses"] = nlohmann::ordered_json::array();
  for (const auto& wit : witnesses) {
    nlohmann::ordered_json e;
    e["points"] = wit.points;
    auto& ws = e["weights"] = nlohmann::ordered_json::array();
    for (const auto& c : wit.weights) ws.push_back(c.imag() == 0.0 ? nlohmann::ordered_json(c.real()) : nlohmann::ordered_json{c.real(), c.imag()});
    e["value"] = wit.value;
    w.push_back(std::move(e));
  }
  auto& ex = j["extra"] = nlohmann::ordered_json::array();
  for (const auto& i : extra) {
    ex.push_back({{"name", i.name}, {"value", i.value}, {"threshold", i.threshold}, {"pass", i.pass}, {"note", i.note}});
  }
  return j;
}

NdReport is_negative_definite(const FieldFunction& psi, int dimension, const NdConfig& cfg) {
  if (cfg.set_size < 2 || cfg.set_size > max_points) throw Error(ErrorCode::config, "set_size must lie in [2, 64]");
  NdReport rep;
  rep.tol = cfg.tol;

  // lattice first, then random sets alternating between R = 1 and R = 10
  std::vector<PointSet> sets{lattice_point_set(dimension)};
  for (std::size_t k = 0; k < cfg.num_point_sets; ++k) {
    sets.push_back(random_point_set(dimension, cfg.set_size, k % 2 == 0 ? 1.0 : 10.0, cfg.seed + 1000003ULL * (k + 1)));
  }
  std::vector<Eigen::MatrixXd> psi_matrices(sets.size());
  parallel_for(sets.size(), [&](std::size_t k) { psi_matrices[k] = difference_matrix(psi, sets[k]); });

  // Schoenberg sweep
  for (double s : cfg.s_scales) {
    ScaleResult res;
    res.scale = s;
    res.min_eigenvalue = std::numeric_limits<double>::infinity();
    std::vector<double> mins(sets.size()), thresholds(sets.size());
    parallel_for(sets.size(), [&](std::size_t k) {
      const Eigen::MatrixXd E = (-s * psi_matrices[k].array()).exp().matrix();
      mins[k] = min_eigenvalue(E);
      thresholds[k] = cfg.tol * static_cast<double>(E.rows()) * E.cwiseAbs().maxCoeff();
    });
    for (std::size_t k = 0; k < sets.size(); ++k) {
      if (mins[k] < -thresholds[k]) res.pass = false;
      if (mins[k] < res.min_eigenvalue) {
        res.min_eigenvalue = mins[k];
        res.threshold = thresholds[k];
      }
    }
    rep.scales.push_back(res);
  }

  // direct constrained forms: the second-difference witness, then random zero-sum weights
  bool forms_ok = true;
  rep.worst_form = -std::numeric_limits<double>::infinity();
  auto record = [&](const PointSet& ps, const Eigen::MatrixXd& Psi, std::vector<std::complex<double>> c) {
    double norm2 = 0.0;
    for (const auto& ci : c) norm2 += std::norm(ci);
    const double value = form_value(Psi, c);
    const double threshold = cfg.tol * static_cast<double>(Psi.rows()) * std::max(Psi.cwiseAbs().maxCoeff(), 1e-300) * norm2;
    if (value > threshold) {
      forms_ok = false;
      if (rep.witnesses.size() < 8) rep.witnesses.push_back({ps.points, c, value});
    }
    if (value > rep.worst_form) {
      rep.worst_form = value;
      rep.worst_form_threshold = threshold;
    }
  };
  {
    PointSet line;
    line.dimension = dimension;
    for (double v : {0.0, 1.0, 2.0}) {
      Point p(static_cast<std::size_t>(dimension), 0.0);
      p[0] = v;
      line.points.push_back(p);
    }
    record(line, difference_matrix(psi, line), {1.0, -2.0, 1.0});
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  for (std::size_t w = 0; w < cfg.num_weight_vectors; ++w) {
    const std::size_t k = w % sets.size();
    std::vector<std::complex<double>> c(sets[k].size());
    std::complex<double> mean = 0.0;
    for (auto& ci : c) {
      ci = {normal(rng), normal(rng)};
      mean += ci;
    }
    mean /= static_cast<double>(c.size());
    for (auto& ci : c) ci -= mean;
    record(sets[k], psi_matrices[k], std::move(c));
  }

  // the optimal unit zero-sum weights on every set
  bool projected_ok = true;
  rep.projected_max = -std::numeric_limits<double>::infinity();
  for (const auto& Psi : psi_matrices) {
    const double top = projected_max_eigenvalue(Psi);
    const double threshold = cfg.tol * static_cast<double>(Psi.rows()) * Psi.cwiseAbs().maxCoeff();
    if (top > threshold) projected_ok = false;
    if (top > rep.projected_max) {
      rep.projected_max = top;
      rep.projected_threshold = threshold;
    }
  }

  rep.pass = forms_ok && projected_ok &&
             std::all_of(rep.scales.begin(), rep.scales.end(), [](const ScaleResult& r) { return r.pass; });
  return rep;
}

std::vector<NdReport> validate_basic_assumption_I(const SymbolFamily& family, std::span<const double> t_grid,
                                                  const NdConfig& cfg) {
  std::vector<NdReport> out;
  const int n = family.dimension();
  for (double t : t_grid) {
    if (!(t > 0.0)) throw Error(ErrorCode::domain, "Basic Assumption I is tested at t > 0");
    auto A = [&family, t](std::span<const double> xi) { return adjoint_exponent(family, t, xi); };
    NdReport rep = is_negative_definite(A, n, cfg);
    rep.t = t;
    const Point origin(static_cast<std::size_t>(n), 0.0);
    const double a0 = A(origin);
    // scale for A(t, 0) = 0: typical size of A at unit distance
    Point unit(static_cast<std::size_t>(n), 0.0);
    unit[0] = 1.0;
    const double a1 = std::abs(A(unit));
    rep.extra.push_back({"A(t,0)", std::abs(a0), cfg.tol * std::max(1.0, a1), std::abs(a0) <= cfg.tol * std::max(1.0, a1), ""});
    double min_a = std::numeric_limits<double>::infinity();
    std::string where;
    std::mt19937_64 rng(cfg.seed ^ 0x5bd1e995ULL);
    std::uniform_real_distribution<double> coord(-10.0, 10.0);
    Point x(static_cast<std::size_t>(n));
    for (int k = 0; k < 256; ++k) {
      for (auto& v : x) v = coord(rng);
      const double a = A(x);
      if (a < min_a) {
        min_a = a;
        where = format_point(x);
      }
    }
    rep.extra.push_back({"A_nonnegative", -min_a, cfg.tol * std::max(1.0, a1), -min_a <= cfg.tol * std::max(1.0, a1), "minimum at " + where});
    rep.pass = rep.pass && std::all_of(rep.extra.begin(), rep.extra.end(), [](const CheckItem& i) { return i.pass; });
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace addkit
