#pragma once

// Closed-form analytic fields built from terms c z^m e^{-a z}. They can be
// evaluated anywhere in the complex half-plane, so norms on pencil contours
// are exact up to path quadrature.

#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hsns/fieldkit.hpp"

namespace hsns {

/// c z^m e^{-a z} with Re a > 0.
struct ExpPolyTerm {
  cd c;
  int m = 0;
  cd a;
};

class ClosedFormProfile {
 public:
  ClosedFormProfile() = default;
  explicit ClosedFormProfile(std::vector<ExpPolyTerm> terms);

  cd operator()(cd z) const;
  ClosedFormProfile derivative() const;
  /// Profile whose values at real z are the complex conjugates of this one.
  ClosedFormProfile conjugate() const;
  ClosedFormProfile scaled(cd s) const;
  /// Smallest Re a over the terms (inf when empty).
  double decay_rate() const;

  const std::vector<ExpPolyTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

 private:
  std::vector<ExpPolyTerm> terms_;
};

/// Real field sum_alpha f_alpha(z) e^{i alpha x}; alpha >= 0 stored, negative
/// modes follow from conjugate symmetry.
struct ClosedFormField {
  std::string name;
  std::map<int, ClosedFormProfile> modes;

  int truncation() const;
  /// Profile of mode alpha (empty when absent).
  ClosedFormProfile mode(int alpha) const;
  SpectralField sample(std::shared_ptr<const GradedGrid> grid, int truncation) const;
};

/// The fixed 20-field corpus used by the norm and lemma checks.
std::vector<ClosedFormField> closed_form_corpus();

/// Named initial data with parameters ("wall_mode", "shear", ...).
/// Unknown names or parameters raise ConfigError.
ClosedFormField named_datum(const std::string& name, const std::map<std::string, double>& params = {});
std::vector<std::string> datum_names();

}  // namespace hsns
