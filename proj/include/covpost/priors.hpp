#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "covpost/linalg.hpp"
#include "covpost/randmat.hpp"

namespace covpost {

/// Diagonal scale-mixed inverse-Wishart prior:
///   Σ | Δ ~ IW(ν + q − 1, c_ν Δ),  Δ = diag(δ₁..δ_q),  δ_i ~ π_i independently.
struct DsiwPrior {
  double nu = 2.0;
  double c_nu = 1.0;
  std::vector<MixingDensity> mixing;  // one per response
  std::string name = "DSIW";

  Index q() const { return static_cast<Index>(mixing.size()); }
  void validate() const;
};

/// Matrix-F prior: Σ | Δ̄ ~ IW(ν + q − 1, Δ̄),  Δ̄ ~ W(ν_q*, Ψ).
struct MatrixFPrior {
  double nu = 1.0;
  double nu_q_star;
  PDMatrix Psi;
  std::string name = "MATRIX_F";

  MatrixFPrior(double nu, double nu_q_star, PDMatrix psi, std::string name = "MATRIX_F");
  Index q() const { return Psi.dim(); }
  void validate() const;
};

using Prior = std::variant<DsiwPrior, MatrixFPrior>;

enum class PresetName { IgDsiw, LnDsiw, TnDsiw, UDsiw, MatrixF };

PresetName parse_preset(std::string_view name);  // throws UnknownPreset
std::string to_string(PresetName name);

/// Optional replacements for preset defaults. `gamma_scale_root` is A in the
/// IG-DSIW mixing Gamma(½, A²).
struct PresetOverrides {
  std::optional<double> nu;
  std::optional<double> c_nu;
  std::optional<double> nu_q_star;
  std::optional<double> gamma_scale_root;
  std::optional<MixingDensity> mixing;
  std::optional<Matrix> psi;
};

/// IG_DSIW: ν=2, c_ν=2ν, Gamma(½, A²) with A=10
/// LN_DSIW: ν=2, c_ν=1, LogNormal(0, 1)
/// TN_DSIW: ν=2, c_ν=1, TruncatedNormalPositive(0, 10)
/// U_DSIW:  ν=2, c_ν=1, Uniform(0, 100)
/// MATRIX_F: ν=1, ν_q*=q, Ψ=I_q
Prior preset(PresetName name, Index q, const PresetOverrides& overrides = {});

std::string prior_name(const Prior& prior);
double prior_nu(const Prior& prior);
Index prior_q(const Prior& prior);

/// Exact log density, -inf outside the support.
double log_mixing_density(const MixingDensity& spec, double x);

/// True iff the density is non-increasing on a log-spaced grid over
/// [k, 10⁶k].
bool check_tail_monotone(const MixingDensity& spec, double k, int grid_size = 2000);

}  // namespace covpost
