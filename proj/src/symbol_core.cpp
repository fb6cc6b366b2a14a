#include "addkit/symbol_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "addkit/error.hpp"
#include "addkit/quadrature.hpp"

namespace addkit {

namespace {

double norm(std::span<const double> xi) {
  if (xi.size() == 1) return std::abs(xi[0]);
  if (xi.size() == 2) return std::hypot(xi[0], xi[1]);
  double s = 0.0;
  for (double v : xi) s += v * v;
  return std::sqrt(s);
}

double norm_squared(std::span<const double> xi) {
  double s = 0.0;
  for (double v : xi) s += v * v;
  return s;
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  const int decades = static_cast<int>(std::round(std::log10(hi / lo)));
  const int count = decades * per_decade + 1;
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo * std::pow(10.0, static_cast<double>(i) / per_decade);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// TimeProfile

TimeProfile::TimeProfile(ScalarFunction h, ScalarFunction hprime, std::string description)
    : h_(std::move(h)), hprime_(std::move(hprime)), description_(std::move(description)) {
  if (!h_) throw Error(ErrorCode::config, "time profile needs an evaluation function");
  config_ = {{"form", "function"}, {"name", description_}};
}

TimeProfile TimeProfile::linear(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::domain, "linear profile needs c > 0");
  if (c == 1.0) {
    TimeProfile p([](double t) { return t; }, [](double) { return 1.0; }, "t");
    p.config_ = {{"form", "t"}};
    return p;
  }
  return polynomial({0.0, c});
}

TimeProfile TimeProfile::power(double e) {
  if (!(e > 0.0) || !std::isfinite(e)) throw Error(ErrorCode::domain, "power profile needs a positive exponent");
  if (e == 1.0) return linear();
  TimeProfile p([e](double t) { return std::pow(t, e); },
                [e](double t) { return e * std::pow(t, e - 1.0); }, "t^" + nlohmann::json(e).dump());
  if (e == 2.0) {
    p.description_ = "t^2";
    p.config_ = {{"form", "t^2"}};
  } else if (e == 0.5) {
    p.description_ = "sqrt(t)";
    p.config_ = {{"form", "sqrt(t)"}};
  } else {
    p.config_ = {{"form", "power"}, {"exponent", e}};
  }
  return p;
}

TimeProfile TimeProfile::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty() || coeffs[0] != 0.0) {
    throw Error(ErrorCode::domain, "polynomial profile needs coeffs[0] = 0 so that h(0) = 0");
  }
  auto h = [coeffs](double t) {
    double v = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) v = v * t + coeffs[k];
    return v;
  };
  auto hp = [coeffs](double t) {
    double v = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 1;) v = v * t + static_cast<double>(k) * coeffs[k];
    return v;
  };
  std::string desc = "poly" + nlohmann::json(coeffs).dump();
  TimeProfile p(h, hp, desc);
  p.config_ = {{"form", "poly"}, {"coeffs", coeffs}};
  p.validate();
  return p;
}

TimeProfile TimeProfile::from_expressions(const std::string& h, const std::string& hprime) {
  Expression eh = Expression::parse(h);
  ScalarFunction fp;
  if (!hprime.empty()) {
    Expression ep = Expression::parse(hprime);
    fp = [ep](double t) { return ep(0.0, t); };
  }
  TimeProfile p([eh](double t) { return eh(0.0, t); }, fp, h);
  p.config_ = {{"form", "expr"}, {"h", h}};
  if (!hprime.empty()) p.config_["hprime"] = hprime;
  p.validate();
  return p;
}

double TimeProfile::operator()(double t) const {
  if (!(t >= 0.0)) throw Error(ErrorCode::domain, "time must be nonnegative");
  return h_(t);
}

double TimeProfile::derivative(double t) const {
  if (!hprime_) throw Error(ErrorCode::missing_derivative, "profile '" + description_ + "' has no derivative");
  if (!(t >= 0.0)) throw Error(ErrorCode::domain, "time must be nonnegative");
  return hprime_(t);
}

void TimeProfile::validate() const {
  if (std::abs(h_(0.0)) > 0.0) throw Error(ErrorCode::domain, "profile '" + description_ + "': h(0) != 0");
  double prev = 0.0;
  for (double t : log_grid(1e-6, 1e6, 64)) {
    const double v = h_(t);
    if (!std::isfinite(v)) throw Error(ErrorCode::domain, "profile '" + description_ + "' is not finite");
    if (!(v > prev)) {
      throw Error(ErrorCode::domain, "profile '" + description_ + "' is not strictly increasing near t = " +
                                         std::to_string(t));
    }
    prev = v;
  }
}

// ---------------------------------------------------------------------------
// SymbolFamily

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::poisson: return "poisson";
    case FamilyKind::coshlog: return "coshlog";
    case FamilyKind::direct_sum: return "direct_sum";
    case FamilyKind::custom: return "custom";
  }
  return "unknown";
}

struct SymbolFamily::Impl {
  FamilyKind kind = FamilyKind::custom;
  int dimension = 1;
  std::string description;
  std::optional<TimeProfile> profile;
  FieldFunction base;             // psi_0 on R^n (product families)
  ScalarFunction radial_base;     // psi_0 as a function of |xi| (radial product families)
  std::optional<Expression> rate;  // q(t, |xi|) for custom rate families
  std::vector<SymbolFamily> components;
  std::vector<int> offsets;
  FieldFunction reference;
  std::string reference_description;
  bool radial = false;
  bool monotone = false;
  nlohmann::ordered_json config;
};

namespace {

void check_dimension(int n) {
  if (n < 1) throw Error(ErrorCode::domain, "dimension must be positive");
}

// Radial base must vanish at 0 and be positive elsewhere; returns whether it
// is nondecreasing on the sample grid.
bool check_radial(const ScalarFunction& f, const std::string& what) {
  const double at0 = f(0.0);
  if (!std::isfinite(at0) || std::abs(at0) > 1e-14) {
    throw Error(ErrorCode::domain, what + ": base exponent must vanish at the origin");
  }
  bool monotone = true;
  double prev = 0.0;
  for (double r : log_grid(1e-6, 1e6, 16)) {
    const double v = f(r);
    if (!std::isfinite(v)) throw Error(ErrorCode::evaluation, what + ": base exponent is not finite at r = " + std::to_string(r));
    if (!(v > 0.0)) throw Error(ErrorCode::degenerate_family, what + ": base exponent vanishes away from the origin");
    if (v < prev) monotone = false;
    prev = v;
  }
  return monotone;
}

}  // namespace

SymbolFamily SymbolFamily::gaussian(int dimension, TimeProfile profile) {
  check_dimension(dimension);
  profile.validate();
  auto impl = std::make_shared<Impl>();
  impl->kind = FamilyKind::gaussian;
  impl->dimension = dimension;
  impl->description = "gaussian(n=" + std::to_string(dimension) + ", h=" + profile.description() + ")";
  impl->base = [](std::span<const double> xi) { return norm_squared(xi); };
  impl->radial_base = [](double r) { return r * r; };
  impl->radial = impl->monotone = true;
  impl->config = {{"kind", "gaussian"}, {"dimension", dimension}, {"profile", profile.to_json()}};
  impl->profile = std::move(profile);
  impl->reference = impl->base;
  impl->reference_description = "|xi|^2";
  return SymbolFamily(impl);
}

SymbolFamily SymbolFamily::poisson(int dimension, TimeProfile profile) {
  check_dimension(dimension);
  profile.validate();
  auto impl = std::make_shared<Impl>();
  impl->kind = FamilyKind::poisson;
  impl->dimension = dimension;
  impl->description = "poisson(n=" + std::to_string(dimension) + ", h=" + profile.description() + ")";
  impl->base = [](std::span<const double> xi) { return norm(xi); };
  impl->radial_base = [](double r) { return r; };
  impl->radial = impl->monotone = true;
  impl->config = {{"kind", "poisson"}, {"dimension", dimension}, {"profile", profile.to_json()}};
  impl->profile = std::move(profile);
  impl->reference = impl->base;
  impl->reference_description = "|xi|";
  return SymbolFamily(impl);
}

SymbolFamily SymbolFamily::coshlog(TimeProfile profile) {
  profile.validate();
  auto impl = std::make_shared<Impl>();
  impl->kind = FamilyKind::coshlog;
  impl->dimension = 1;
  impl->description = "coshlog(h=" + profile.description() + ")";
  impl->base = [](std::span<const double> xi) { return log_cosh(xi[0]); };
  impl->radial_base = [](double r) { return log_cosh(r); };
  impl->radial = impl->monotone = true;
  impl->config = {{"kind", "coshlog"}, {"dimension", 1}, {"profile", profile.to_json()}};
  impl->profile = std::move(profile);
  impl->reference = impl->base;
  impl->reference_description = "ln cosh xi";
  return SymbolFamily(impl);
}

SymbolFamily SymbolFamily::custom_product(int dimension, TimeProfile profile, const std::string& base) {
  check_dimension(dimension);
  profile.validate();
  Expression e = Expression::parse(base);
  if (e.uses_t()) throw Error(ErrorCode::config, "custom base exponent must not depend on t");
  auto impl = std::make_shared<Impl>();
  impl->kind = FamilyKind::custom;
  impl->dimension = dimension;
  impl->description = "custom(n=" + std::to_string(dimension) + ", psi0=" + base + ", h=" + profile.description() + ")";
  impl->radial_base = [e](double r) { return e(r); };
  impl->base = [e](std::span<const double> xi) { return e(norm(xi)); };
  impl->radial = true;
  impl->monotone = check_radial(impl->radial_base, "custom family");
  impl->config = {{"kind", "custom"}, {"dimension", dimension}, {"base", base}, {"profile", profile.to_json()}};
  impl->profile = std::move(profile);
  impl->reference = impl->base;
  impl->reference_description = base;
  return SymbolFamily(impl);
}

SymbolFamily SymbolFamily::custom_rate(int dimension, const std::string& rate) {
  check_dimension(dimension);
  Expression e = Expression::parse(rate);
  auto impl = std::make_shared<Impl>();
  impl->kind = FamilyKind::custom;
  impl->dimension = dimension;
  impl->description = "custom(n=" + std::to_string(dimension) + ", q=" + rate + ")";
  impl->rate = e;
  impl->radial = true;
  impl->config = {{"kind", "custom"}, {"dimension", dimension}, {"q", rate}};
  SymbolFamily f(impl);
  // q(1, .) serves as the default reference and for the sanity checks.
  impl->monotone = check_radial([e](double r) { return e(r, 1.0); }, "custom rate family") &&
                   check_radial([f](double r) { return f.Q_radial(0.0, 1.0, r); }, "custom rate family");
  impl->reference = [e](std::span<const double> xi) { return e(norm(xi), 1.0); };
  impl->reference_description = "q(1, xi)";
  return f;
}

SymbolFamily SymbolFamily::with_reference(FieldFunction psi, std::string description) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->reference = std::move(psi);
  impl->reference_description = description;
  impl->config["reference"] = description;
  return SymbolFamily(impl);
}

FamilyKind SymbolFamily::kind() const noexcept { return impl_->kind; }
int SymbolFamily::dimension() const noexcept { return impl_->dimension; }
const std::string& SymbolFamily::description() const noexcept { return impl_->description; }
bool SymbolFamily::is_product() const noexcept { return impl_->profile.has_value(); }

const TimeProfile& SymbolFamily::profile() const {
  if (!impl_->profile) throw Error(ErrorCode::domain, description() + " is not of product form");
  return *impl_->profile;
}

const std::vector<SymbolFamily>& SymbolFamily::components() const noexcept { return impl_->components; }
bool SymbolFamily::radial() const noexcept { return impl_->radial; }
bool SymbolFamily::radial_monotone() const noexcept { return impl_->radial && impl_->monotone; }

bool SymbolFamily::has_derivative() const noexcept {
  if (impl_->kind == FamilyKind::direct_sum) {
    return std::all_of(impl_->components.begin(), impl_->components.end(),
                       [](const SymbolFamily& c) { return c.has_derivative(); });
  }
  if (impl_->rate) return true;
  return impl_->profile && impl_->profile->has_derivative();
}

namespace {

void check_point(const SymbolFamily& f, std::span<const double> xi) {
  if (static_cast<int>(xi.size()) != f.dimension()) {
    throw Error(ErrorCode::domain, "point of dimension " + std::to_string(xi.size()) + " passed to " +
                                       f.description());
  }
}

}  // namespace

double SymbolFamily::base(std::span<const double> xi) const {
  check_point(*this, xi);
  if (impl_->kind == FamilyKind::direct_sum) {
    double v = 0.0;
    for (std::size_t i = 0; i < impl_->components.size(); ++i) {
      const auto& c = impl_->components[i];
      v += c.base(xi.subspan(static_cast<std::size_t>(impl_->offsets[i]), static_cast<std::size_t>(c.dimension())));
    }
    return v;
  }
  if (impl_->rate) return (*impl_->rate)(norm(xi), 1.0);
  return impl_->base(xi);
}

double SymbolFamily::reference(std::span<const double> xi) const {
  check_point(*this, xi);
  return impl_->reference(xi);
}

const std::string& SymbolFamily::reference_description() const noexcept { return impl_->reference_description; }

double SymbolFamily::q(double t, std::span<const double> xi) const {
  check_point(*this, xi);
  if (!(t >= 0.0)) throw Error(ErrorCode::domain, "time must be nonnegative");
  if (impl_->kind == FamilyKind::direct_sum) {
    double v = 0.0;
    for (std::size_t i = 0; i < impl_->components.size(); ++i) {
      const auto& c = impl_->components[i];
      v += c.q(t, xi.subspan(static_cast<std::size_t>(impl_->offsets[i]), static_cast<std::size_t>(c.dimension())));
    }
    return v;
  }
  if (impl_->rate) return (*impl_->rate)(norm(xi), t);
  return impl_->profile->derivative(t) * impl_->base(xi);
}

double SymbolFamily::Q(double s, double t, std::span<const double> xi) const {
  check_point(*this, xi);
  if (!(s >= 0.0) || !(t >= 0.0)) throw Error(ErrorCode::domain, "times must be nonnegative");
  if (s > t) throw Error(ErrorCode::reversed_time, "Q_{t,s} requires s <= t");
  if (s == t) return 0.0;
  if (impl_->kind == FamilyKind::direct_sum) {
    double v = 0.0;
    for (std::size_t i = 0; i < impl_->components.size(); ++i) {
      const auto& c = impl_->components[i];
      v += c.Q(s, t, xi.subspan(static_cast<std::size_t>(impl_->offsets[i]), static_cast<std::size_t>(c.dimension())));
    }
    return v;
  }
  if (impl_->rate) return Q_radial(s, t, norm(xi));
  const TimeProfile& h = *impl_->profile;
  return (h(t) - h(s)) * impl_->base(xi);
}

double SymbolFamily::Q_radial(double s, double t, double r) const {
  if (!impl_->radial) throw Error(ErrorCode::domain, description() + " is not radial");
  if (!(s >= 0.0) || !(t >= 0.0)) throw Error(ErrorCode::domain, "times must be nonnegative");
  if (s > t) throw Error(ErrorCode::reversed_time, "Q_{t,s} requires s <= t");
  if (s == t) return 0.0;
  if (impl_->rate) {
    const Expression& e = *impl_->rate;
    return quad::integrate([&](double tau) { return e(r, tau); }, s, t, {0.0, 1e-10}).value;
  }
  const TimeProfile& h = *impl_->profile;
  return (h(t) - h(s)) * impl_->radial_base(r);
}

nlohmann::ordered_json SymbolFamily::to_json() const { return impl_->config; }

SymbolFamily direct_sum(const SymbolFamily& f1, const SymbolFamily& f2) {
  auto impl = std::make_shared<SymbolFamily::Impl>();
  impl->kind = FamilyKind::direct_sum;
  impl->dimension = f1.dimension() + f2.dimension();
  impl->description = "direct_sum(" + f1.description() + ", " + f2.description() + ")";
  for (const SymbolFamily* f : {&f1, &f2}) {
    // Degenerate summands would make the sum's base vanish on a whole subspace.
    std::vector<double> probe(static_cast<std::size_t>(f->dimension()), 0.0);
    probe[0] = 1.0;
    if (!(f->base(probe) > 0.0)) {
      throw Error(ErrorCode::degenerate_family, "direct_sum: summand " + f->description() + " has a vanishing base");
    }
    if (f->kind() == FamilyKind::direct_sum) {
      for (const auto& c : f->components()) impl->components.push_back(c);
    } else {
      impl->components.push_back(*f);
    }
  }
  int offset = 0;
  for (const auto& c : impl->components) {
    impl->offsets.push_back(offset);
    offset += c.dimension();
  }
  auto components = impl->components;
  auto offsets = impl->offsets;
  impl->reference = [components, offsets](std::span<const double> xi) {
    double v = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
      v += components[i].reference(
          xi.subspan(static_cast<std::size_t>(offsets[i]), static_cast<std::size_t>(components[i].dimension())));
    }
    return v;
  };
  impl->reference_description = "sum of component references";
  impl->config = {{"kind", "direct_sum"}, {"dimension", impl->dimension}, {"components", nlohmann::ordered_json::array()}};
  for (const auto& c : impl->components) impl->config["components"].push_back(c.to_json());
  return SymbolFamily(impl);
}

// ---------------------------------------------------------------------------
// JSON

TimeProfile profile_from_json(const nlohmann::json& config) {
  if (config.is_string()) {
    nlohmann::json wrapped = {{"form", config}};
    return profile_from_json(wrapped);
  }
  if (!config.is_object()) throw Error(ErrorCode::config, "profile must be an object");
  const std::string form = config.value("form", "t");
  if (form == "t") return TimeProfile::linear();
  if (form == "t^2") return TimeProfile::power(2.0);
  if (form == "sqrt(t)") return TimeProfile::power(0.5);
  if (form == "power") return TimeProfile::power(config.at("exponent").get<double>());
  if (form == "poly") {
    if (!config.contains("coeffs") || !config["coeffs"].is_array()) {
      throw Error(ErrorCode::config, "poly profile needs a coeffs array");
    }
    return TimeProfile::polynomial(config["coeffs"].get<std::vector<double>>());
  }
  if (form == "expr") return TimeProfile::from_expressions(config.at("h").get<std::string>(), config.value("hprime", ""));
  throw Error(ErrorCode::config, "unknown profile form '" + form + "'");
}

SymbolFamily family_from_json(const nlohmann::json& config) {
  try {
    if (!config.is_object()) throw Error(ErrorCode::config, "family config must be a JSON object");
    const std::string kind = config.value("kind", "");
    const int n = config.value("dimension", 1);
    const nlohmann::json profile_cfg = config.contains("profile") ? config["profile"] : nlohmann::json("t");
    SymbolFamily family = [&]() -> SymbolFamily {
      if (kind == "gaussian") return SymbolFamily::gaussian(n, profile_from_json(profile_cfg));
      if (kind == "poisson") return SymbolFamily::poisson(n, profile_from_json(profile_cfg));
      if (kind == "coshlog") {
        if (n != 1) throw Error(ErrorCode::config, "coshlog family is defined for dimension 1 only");
        return SymbolFamily::coshlog(profile_from_json(profile_cfg));
      }
      if (kind == "direct_sum") {
        const auto& comps = config.at("components");
        if (!comps.is_array() || comps.size() < 2) {
          throw Error(ErrorCode::config, "direct_sum needs at least two components");
        }
        SymbolFamily acc = family_from_json(comps[0]);
        for (std::size_t i = 1; i < comps.size(); ++i) acc = direct_sum(acc, family_from_json(comps[i]));
        if (config.contains("dimension") && acc.dimension() != n) {
          throw Error(ErrorCode::config, "direct_sum dimension does not match its components");
        }
        return acc;
      }
      if (kind == "custom") {
        if (config.contains("q")) return SymbolFamily::custom_rate(n, config["q"].get<std::string>());
        if (config.contains("base")) {
          return SymbolFamily::custom_product(n, profile_from_json(profile_cfg), config["base"].get<std::string>());
        }
        throw Error(ErrorCode::config, "custom family needs a 'q' or 'base' expression");
      }
      throw Error(ErrorCode::config, "unknown family kind '" + kind + "'");
    }();
    if (config.contains("reference")) {
      const std::string text = config["reference"].get<std::string>();
      Expression e = Expression::parse(text);
      family = family.with_reference(
          [e](std::span<const double> xi) {
            double s = 0.0;
            for (double v : xi) s += v * v;
            return e(std::sqrt(s));
          },
          text);
    }
    return family;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::config, std::string("family config: ") + ex.what());
  }
}

SymbolFamily builtin_family(const std::string& name) {
  std::string key = name;
  if (key.rfind("builtin:", 0) == 0) key = key.substr(8);
  if (key == "gaussian") return SymbolFamily::gaussian();
  if (key == "poisson") return SymbolFamily::poisson();
  if (key == "coshlog") return SymbolFamily::coshlog();
  throw Error(ErrorCode::config, "unknown builtin family '" + name + "'");
}

// ---------------------------------------------------------------------------
// Comparability

ComparabilityReport comparability_bounds(const SymbolFamily& family, const FieldFunction& psi,
                                         std::span<const std::vector<double>> xi_samples,
                                         std::span<const double> t_samples, double max_condition) {
  if (xi_samples.empty() || t_samples.empty()) throw Error(ErrorCode::domain, "comparability needs samples");
  ComparabilityReport rep;
  rep.max_condition = max_condition;
  rep.kappa0 = std::numeric_limits<double>::infinity();
  rep.kappa1 = 0.0;
  for (const auto& xi : xi_samples) {
    if (std::all_of(xi.begin(), xi.end(), [](double v) { return v == 0.0; })) {
      throw Error(ErrorCode::domain, "comparability samples must avoid the origin");
    }
    const double ref = psi(xi);
    if (!(ref > 0.0)) throw Error(ErrorCode::reference_not_positive, "reference not locally positive");
    for (double t : t_samples) {
      const double ratio = family.q(t, xi) / ref;
      rep.kappa0 = std::min(rep.kappa0, ratio);
      rep.kappa1 = std::max(rep.kappa1, ratio);
    }
  }
  if (!(rep.kappa0 > 0.0)) {
    rep.message = "kappa0 estimate is not positive";
  } else if (!std::isfinite(rep.kappa1)) {
    rep.message = "kappa1 estimate is not finite";
  } else if (rep.kappa1 / rep.kappa0 > max_condition) {
    rep.message = "kappa1/kappa0 exceeds " + nlohmann::json(max_condition).dump() + ": not comparable on the samples";
  } else {
    rep.pass = true;
    rep.message = "comparable on the samples";
  }
  return rep;
}

ComparabilityReport comparability_bounds(const SymbolFamily& family,
                                         std::span<const std::vector<double>> xi_samples,
                                         std::span<const double> t_samples, double max_condition) {
  return comparability_bounds(
      family, [&family](std::span<const double> xi) { return family.reference(xi); }, xi_samples, t_samples,
      max_condition);
}

}  // namespace addkit
