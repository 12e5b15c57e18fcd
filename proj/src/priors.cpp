#include "covpost/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace covpost {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_normal_upper_tail(double z) { return std::log(0.5 * std::erfc(z / std::numbers::sqrt2)); }

}  // namespace

void DsiwPrior::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ParameterOutOfRange("DSIW prior needs nu > 0");
  if (!(c_nu > 0.0) || !std::isfinite(c_nu)) throw ParameterOutOfRange("DSIW prior needs c_nu > 0");
  if (mixing.empty()) throw ParameterOutOfRange("DSIW prior needs one mixing density per response");
  for (const auto& m : mixing) covpost::validate(m);
}

MatrixFPrior::MatrixFPrior(double nu_, double nu_q_star_, PDMatrix psi, std::string name_)
    : nu(nu_), nu_q_star(nu_q_star_), Psi(std::move(psi)), name(std::move(name_)) {
  validate();
}

void MatrixFPrior::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ParameterOutOfRange("matrix-F prior needs nu > 0");
  if (!(nu_q_star > static_cast<double>(q()) - 1.0)) {
    throw DegreesOfFreedomTooSmall("matrix-F prior needs nu_q_star > q - 1");
  }
}

PresetName parse_preset(std::string_view name) {
  if (name == "IG_DSIW") return PresetName::IgDsiw;
  if (name == "LN_DSIW") return PresetName::LnDsiw;
  if (name == "TN_DSIW") return PresetName::TnDsiw;
  if (name == "U_DSIW") return PresetName::UDsiw;
  if (name == "MATRIX_F") return PresetName::MatrixF;
  throw UnknownPreset("unknown prior preset '" + std::string(name) +
                      "' (expected IG_DSIW, LN_DSIW, TN_DSIW, U_DSIW or MATRIX_F)");
}

std::string to_string(PresetName name) {
  switch (name) {
    case PresetName::IgDsiw: return "IG_DSIW";
    case PresetName::LnDsiw: return "LN_DSIW";
    case PresetName::TnDsiw: return "TN_DSIW";
    case PresetName::UDsiw: return "U_DSIW";
    case PresetName::MatrixF: return "MATRIX_F";
  }
  return "?";
}

Prior preset(PresetName name, Index q, const PresetOverrides& o) {
  if (q < 1) throw ParameterOutOfRange("preset: q must be >= 1");
  if (name == PresetName::MatrixF) {
    const Matrix psi = o.psi ? *o.psi : Matrix(Matrix::Identity(q, q));
    if (psi.rows() != q || psi.cols() != q) throw DimensionMismatch("preset: Psi must be q x q");
    return MatrixFPrior(o.nu.value_or(1.0), o.nu_q_star.value_or(static_cast<double>(q)), PDMatrix(psi));
  }

  DsiwPrior p;
  p.name = to_string(name);
  p.nu = o.nu.value_or(2.0);
  MixingDensity mix;
  switch (name) {
    case PresetName::IgDsiw: {
      const double a = o.gamma_scale_root.value_or(10.0);
      mix = GammaMixing{0.5, a * a};
      p.c_nu = o.c_nu.value_or(2.0 * p.nu);
      break;
    }
    case PresetName::LnDsiw:
      mix = LogNormalMixing{0.0, 1.0};
      p.c_nu = o.c_nu.value_or(1.0);
      break;
    case PresetName::TnDsiw:
      mix = TruncatedNormalMixing{0.0, 10.0};
      p.c_nu = o.c_nu.value_or(1.0);
      break;
    case PresetName::UDsiw:
      mix = UniformMixing{0.0, 100.0};
      p.c_nu = o.c_nu.value_or(1.0);
      break;
    case PresetName::MatrixF: break;
  }
  if (o.mixing) mix = *o.mixing;
  p.mixing.assign(static_cast<std::size_t>(q), mix);
  p.validate();
  return p;
}

std::string prior_name(const Prior& prior) {
  return std::visit([](const auto& p) { return p.name; }, prior);
}

double prior_nu(const Prior& prior) {
  return std::visit([](const auto& p) { return p.nu; }, prior);
}

Index prior_q(const Prior& prior) {
  return std::visit([](const auto& p) { return p.q(); }, prior);
}

double log_mixing_density(const MixingDensity& spec, double x) {
  validate(spec);
  if (!(x > 0.0)) return kNegInf;
  return std::visit(
      [x](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaMixing>) {
          return (m.shape - 1.0) * std::log(x) - x / m.scale - std::lgamma(m.shape) - m.shape * std::log(m.scale);
        } else if constexpr (std::is_same_v<T, LogNormalMixing>) {
          const double z = (std::log(x) - m.mu) / m.sigma;
          return -0.5 * z * z - std::log(x * m.sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
        } else if constexpr (std::is_same_v<T, TruncatedNormalMixing>) {
          const double z = (x - m.mu) / m.sigma;
          return -0.5 * z * z - std::log(m.sigma) - 0.5 * std::log(2.0 * std::numbers::pi) -
                 log_normal_upper_tail(-m.mu / m.sigma);
        } else {
          if (x < m.lo || x > m.hi) return kNegInf;
          return -std::log(m.hi - m.lo);
        }
      },
      spec);
}

bool check_tail_monotone(const MixingDensity& spec, double k, int grid_size) {
  if (!(k > 0.0) || grid_size < 2) throw ParameterOutOfRange("check_tail_monotone: need k > 0, grid_size >= 2");
  const double log_lo = std::log(k);
  const double log_hi = std::log(k * 1e6);
  double prev = log_mixing_density(spec, k);
  for (int i = 1; i < grid_size; ++i) {
    const double x = std::exp(log_lo + (log_hi - log_lo) * i / (grid_size - 1));
    const double cur = log_mixing_density(spec, x);
    if (prev == kNegInf) {
      if (cur > kNegInf) return false;
      continue;
    }
    if (cur > prev + 1e-12 * std::max(1.0, std::abs(prev))) return false;
    prev = cur;
  }
  return true;
}

}  // namespace covpost
