#include "hsns/closed_form.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "hsns/error.hpp"

namespace hsns {

ClosedFormProfile::ClosedFormProfile(std::vector<ExpPolyTerm> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (t.m < 0) throw DomainError("closed form term with negative power");
    if (!(t.a.real() > 0.0)) throw DomainError("closed form term must decay (Re a > 0)");
  }
}

cd ClosedFormProfile::operator()(cd z) const {
  cd s = 0.0;
  for (const auto& t : terms_) s += t.c * std::pow(z, t.m) * std::exp(-t.a * z);
  return s;
}

ClosedFormProfile ClosedFormProfile::derivative() const {
  std::vector<ExpPolyTerm> out;
  out.reserve(2 * terms_.size());
  for (const auto& t : terms_) {
    if (t.m > 0) out.push_back({t.c * static_cast<double>(t.m), t.m - 1, t.a});
    out.push_back({-t.c * t.a, t.m, t.a});
  }
  return ClosedFormProfile(std::move(out));
}

ClosedFormProfile ClosedFormProfile::conjugate() const {
  std::vector<ExpPolyTerm> out = terms_;
  for (auto& t : out) {
    t.c = std::conj(t.c);
    t.a = std::conj(t.a);
  }
  return ClosedFormProfile(std::move(out));
}

ClosedFormProfile ClosedFormProfile::scaled(cd s) const {
  std::vector<ExpPolyTerm> out = terms_;
  for (auto& t : out) t.c *= s;
  return ClosedFormProfile(std::move(out));
}

double ClosedFormProfile::decay_rate() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) r = std::min(r, t.a.real());
  return r;
}

int ClosedFormField::truncation() const { return modes.empty() ? 0 : modes.rbegin()->first; }

ClosedFormProfile ClosedFormField::mode(int alpha) const {
  const auto it = modes.find(alpha < 0 ? -alpha : alpha);
  if (it == modes.end()) return {};
  if (alpha >= 0) return it->second;
  return it->second.conjugate();
}

SpectralField ClosedFormField::sample(std::shared_ptr<const GradedGrid> grid, int truncation) const {
  if (truncation < this->truncation()) throw DomainError("truncation below the highest nonzero mode of " + name);
  SpectralField w(grid, truncation, true);
  for (const auto& [alpha, prof] : modes) {
    auto& m = w.mode(alpha);
    for (std::size_t j = 0; j < m.size(); ++j) m[j] = prof(cd(w.grid().nodes[j], 0.0));
  }
  if (modes.count(0)) {
    for (auto& v : w.mode(0)) v = cd(v.real(), 0.0);
  }
  w.enforce_reality();
  return w;
}

namespace {

ClosedFormProfile term(cd c, int m, cd a) { return ClosedFormProfile({{c, m, a}}); }

ClosedFormProfile sum(std::initializer_list<ExpPolyTerm> ts) { return ClosedFormProfile(std::vector<ExpPolyTerm>(ts)); }

ClosedFormField field(std::string name, std::map<int, ClosedFormProfile> modes) {
  return ClosedFormField{std::move(name), std::move(modes)};
}

// (z - 1/(1+alpha)) e^{-z}: zero wall slip for mode alpha.
ClosedFormProfile no_slip_profile(int alpha, double amplitude) {
  const double c = 1.0 / (1.0 + alpha);
  return sum({{amplitude, 1, 1.0}, {-amplitude * c, 0, 1.0}});
}

}  // namespace

std::vector<ClosedFormField> closed_form_corpus() {
  const cd i(0.0, 1.0);
  std::vector<ClosedFormField> c;
  c.push_back(field("exp1", {{1, term(1.0, 0, 1.0)}}));
  c.push_back(field("exp_mean", {{0, term(1.0, 0, 1.0)}}));
  c.push_back(field("zexp", {{1, term(1.0, 1, 1.0)}}));
  c.push_back(field("two_mode", {{1, term(1.0, 0, 1.0)}, {2, term(0.5, 0, 2.0)}}));
  c.push_back(field("oscillating", {{1, term(1.0, 0, 1.0 + 2.0 * i)}}));
  c.push_back(field("z2exp", {{2, term(1.0, 2, 1.5)}}));
  c.push_back(field("layer_0.1", {{1, sum({{1.0, 0, 1.0}, {0.5, 0, 10.0}})}}));
  c.push_back(field("layer_0.03", {{1, sum({{1.0, 0, 1.0}, {0.2, 0, 1.0 / 0.03}})}}));
  c.push_back(field("wall_mode", {{1, no_slip_profile(1, 0.5)}}));
  c.push_back(field("three_mode", {{0, term(0.5, 0, 1.0)}, {1, term(1.0, 1, 1.0)}, {3, term(0.25, 0, 1.5)}}));
  c.push_back(field("slow_decay", {{1, term(1.0, 0, 0.6)}}));
  c.push_back(field("cubic", {{1, term(1.0, 3, 2.0)}}));
  c.push_back(field("signed", {{1, sum({{1.0, 0, 1.0}, {-2.0, 0, 3.0}})}}));
  c.push_back(field("high_mode", {{5, term(1.0, 0, 1.0)}}));
  c.push_back(field("spread", {{1, term(1.0, 0, 1.0)}, {2, term(0.5, 0, 1.0)}, {3, term(0.25, 0, 1.0)},
                               {4, term(0.125, 0, 1.0)}}));
  c.push_back(field("oscillating2", {{2, term(1.0, 0, 2.0 - 3.0 * i)}}));
  c.push_back(field("mean_layer", {{0, sum({{1.0, 0, 1.0}, {1.0, 0, 20.0}})}}));
  c.push_back(field("poly_oscillating", {{1, term(1.0 + i, 1, 1.0 + i)}}));
  c.push_back(field("shear_noslip", {{0, sum({{1.0, 1, 1.0}, {-1.0, 0, 1.0}})}}));
  c.push_back(field("dipole", {{1, sum({{1.0, 1, 1.0}, {-1.0, 1, 2.0}})}, {2, term(0.3 * i, 1, 1.5)}}));
  return c;
}

std::vector<std::string> datum_names() {
  return {"wall_mode", "two_mode", "shear", "shear_noslip", "stokes_mode"};
}

ClosedFormField named_datum(const std::string& name, const std::map<std::string, double>& params) {
  std::set<std::string> allowed;
  double amplitude = 1.0;
  if (name == "wall_mode" || name == "two_mode") amplitude = 0.2;
  auto get = [&](const std::string& key, double def) {
    allowed.insert(key);
    const auto it = params.find(key);
    return it == params.end() ? def : it->second;
  };
  ClosedFormField f;
  f.name = name;
  if (name == "wall_mode") {
    // amplitude * cos(x) * (z - 1/2) e^{-z}
    const double a = get("amplitude", amplitude);
    f.modes[1] = no_slip_profile(1, 0.5 * a);
  } else if (name == "two_mode") {
    const double a = get("amplitude", amplitude);
    const double r = get("ratio", 0.5);
    f.modes[1] = no_slip_profile(1, 0.5 * a);
    f.modes[2] = no_slip_profile(2, 0.5 * a * r);
  } else if (name == "shear") {
    const double a = get("amplitude", amplitude);
    const double s = get("scale", 1.0);
    if (!(s > 0.0)) throw ConfigError("shear datum scale must be positive");
    f.modes[0] = term(a, 0, 1.0 / s);
  } else if (name == "shear_noslip") {
    const double a = get("amplitude", amplitude);
    f.modes[0] = sum({{a, 1, 1.0}, {-a, 0, 1.0}});
  } else if (name == "stokes_mode") {
    const double a = get("amplitude", amplitude);
    const double al = get("alpha", 1.0);
    const int alpha = static_cast<int>(std::lround(al));
    if (alpha < 1 || std::abs(al - alpha) > 0) throw ConfigError("stokes_mode alpha must be a positive integer");
    // amplitude * |alpha| e^{-|alpha| z} as the real field cos(alpha x)
    f.modes[alpha] = term(0.5 * a * alpha, 0, static_cast<double>(alpha));
  } else {
    throw ConfigError("unknown datum '" + name + "'");
  }
  for (const auto& [k, v] : params) {
    if (!allowed.count(k)) throw ConfigError("unknown parameter '" + k + "' for datum '" + name + "'");
    if (!std::isfinite(v)) throw ConfigError("non-finite parameter '" + k + "'");
  }
  return f;
}

}  // namespace hsns
