#pragma once

// Analytic and boundary-layer norms of vorticity fields, the iterative norms
// of the nonlinear scheme, and numerical exercises of the elementary norm
// inequalities on closed-form fields.

#include <string>
#include <vector>

#include "json.hpp"

#include "hsns/closed_form.hpp"
#include "hsns/fieldkit.hpp"

namespace hsns {

struct Trajectory;

inline constexpr double kDefaultBeta = 0.5;
inline constexpr double kDefaultP = 2.0;

struct BLWeightParams {
  double beta = kDefaultBeta;
  double P = kDefaultP;
  double delta = 0.0;    // sqrt(nu)
  double delta_t = 0.0;  // sqrt(nu t)

  static BLWeightParams at(double nu, double t, double beta = kDefaultBeta, double P = kDefaultP);
  void validate() const;
};

/// phi_P(s) = 1 / (1 + |s|^P).
double phi_P(double s, double P);

/// 1 + delta_t^{-1} phi_P(z / delta_t) + delta^{-1} phi_P(z / delta). The
/// delta_t term is dropped at t = 0 and either term is dropped when its
/// thickness is zero.
double bl_weight(double z, double t, const BLWeightParams& p);

struct ModeSum {
  double value = 0.0;
  /// Contribution of the outermost nonzero mode pair relative to the total.
  double last_mode_fraction = 0.0;
};

/// sum_alpha e^{rho |alpha|} sum_{j + l <= k} sup_z |alpha^j (psi dz)^l w_alpha| e^{beta z} / weight(z, t)
/// over grid nodes.
ModeSum bl_norm_detail(const SpectralField& w, double t, double rho, const BLWeightParams& p, int k = 0);
double bl_norm(const SpectralField& w, double t, double rho, const BLWeightParams& p, int k = 0);

struct AnalyticNormSpec {
  double rho = 0.0;
  double sigma = 0.0;
  std::vector<double> theta_samples{0.0};
  int k = 1;

  void validate() const;
  /// {0, sigma/4, sigma/2, 3 sigma/4} (or {0} when sigma = 0).
  static std::vector<double> default_thetas(double sigma);
};

struct AnalyticNorms {
  double l1 = 0.0;    // L^1_{rho,sigma}
  double wk1 = 0.0;   // W^{k,1}_{rho,sigma}
  double linf = 0.0;  // L^inf_{rho,sigma}
};

/// Grid fields: theta = 0 only.
AnalyticNorms analytic_norms(const SpectralField& w, const AnalyticNormSpec& spec);

/// Points and |dz| weights on one branch s -> s + i sign theta min(s, 1) of
/// the pencil boundary, s in [0, s_max], composite Gauss-Legendre.
struct PencilPath {
  double theta = 0.0;
  int sign = 1;
  std::vector<double> s;
  std::vector<cd> z;
  std::vector<cd> dz_ds;
  std::vector<double> w;  // |dz| weights
  std::vector<double> edges;
  int points_per_panel = 0;
};

PencilPath make_pencil_path(double theta, int sign, int points_per_panel = 12, double s_max = 64.0);

/// Closed-form fields: sup over theta samples and both branches.
AnalyticNorms analytic_norms(const ClosedFormField& f, const AnalyticNormSpec& spec, int points_per_panel = 12);

/// sup over the sampled strip of |f_alpha| e^{beta Re z} / weight(Re z, t), summed with e^{rho |alpha|}.
double bl_norm(const ClosedFormField& f, double t, const AnalyticNormSpec& spec, const BLWeightParams& p,
               int points_per_panel = 12);

/// sup over the sampled strip of int_{path} e^{-beta Re z} weight(Re z, t) |dz|: the constant turning the
/// pointwise weight bound into an L^1 bound.
double embedding_constant(double t, const AnalyticNormSpec& spec, const BLWeightParams& p, int points_per_panel = 12);

struct IterativeNormSpec {
  double gamma = 1.0;
  double zeta = 0.1;
  double rho0 = 1.0;
  int ladder = 16;

  void validate() const;
  /// rho_j = r (1 - 2^{-j}), j = 1..ladder, r = rho0 - gamma t.
  std::vector<double> rho_ladder(double t) const;
};

struct IterativeNorms {
  double A = 0.0;
  double B = 0.0;
  std::vector<double> times;  // stored times with 0 < gamma t < rho0
  std::vector<double> a_curve;
  std::vector<double> b_curve;
};

/// A: W^{1,1}_{rho,rho} + W^{2,1}_{rho,rho} (rho0 - rho - gamma t)^zeta; B: the same with
/// boundary-layer norms of thickness sqrt(nu), sqrt(nu t). Grid fields use theta = 0.
IterativeNorms iterative_norms(const Trajectory& traj, const IterativeNormSpec& spec, double nu,
                               double beta = kDefaultBeta, double P = kDefaultP);

/// sup_{x,z} |w(t, x, z)| e^{beta z} / weight(z, t) at each stored time, in physical space.
std::vector<double> bl_profile_fit(const Trajectory& traj, double nu, double beta = kDefaultBeta,
                                   double P = kDefaultP, std::size_t nx = 0);

struct LemmaCheck {
  std::string name;
  double max_ratio = 0.0;
  double refined_max_ratio = 0.0;  // same check with doubled path resolution
  double bound = 0.0;              // 0 when only finiteness is asserted
  std::string worst_field;
  bool finite = true;
  bool within_bound = true;
  double refinement_change() const;
};

struct NormLemmaReport {
  std::vector<LemmaCheck> checks;
  std::size_t corpus_size = 0;
  double rho = 0.0;
  double sigma = 0.0;
  const LemmaCheck& get(const std::string& name) const;
};

struct LemmaSuiteParams {
  double rho = 0.5;
  double sigma = 0.5;
  double nu = 1e-3;
  double t = 0.5;
  int points_per_panel = 12;
};

NormLemmaReport verify_norm_lemmas(const std::vector<ClosedFormField>& corpus, const LemmaSuiteParams& params = {});

/// Grid version of the elliptic ratios: ||u||_inf / ||w||_1 at theta = 0 for each corpus field on
/// n and 2n nodes, returning the largest relative change.
double elliptic_ratio_refinement_change(const std::vector<ClosedFormField>& corpus, std::size_t n_nodes);

nlohmann::json to_json(const NormLemmaReport& r);
nlohmann::json to_json(const IterativeNorms& r);

}  // namespace hsns
