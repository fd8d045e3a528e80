#include "polaron/profile.hpp"

#include <cmath>
// Boost 1.74 pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <memory>
#include <sstream>

#include "polaron/errors.hpp"

namespace polaron {

std::string_view to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Gaussian:
      return "closed-form-gaussian";
    case ProfileKind::PowerWithCutoff:
      return "closed-form-power-with-cutoff";
    case ProfileKind::GappedLinear:
      return "closed-form-gapped-linear";
    case ProfileKind::Tabulated:
      return "tabulated";
  }
  return "unknown";
}

ProfileKind profile_kind_from_string(std::string_view name) {
  if (name == "closed-form-gaussian" || name == "gaussian") return ProfileKind::Gaussian;
  if (name == "closed-form-power-with-cutoff" || name == "power") return ProfileKind::PowerWithCutoff;
  if (name == "closed-form-gapped-linear" || name == "gapped-linear") return ProfileKind::GappedLinear;
  if (name == "tabulated") return ProfileKind::Tabulated;
  throw PolaronError(ErrorCode::InvalidModel, "unknown profile kind '" + std::string(name) + "'");
}

RadialProfile::RadialProfile(ProfileKind kind, std::vector<double> params, double decay_scale,
                             std::vector<std::pair<double, double>> table)
    : kind_(kind), params_(std::move(params)), decay_scale_(decay_scale), table_(std::move(table)) {
  if (!(decay_scale_ > 0.0) || !std::isfinite(decay_scale_)) {
    throw PolaronError(ErrorCode::InvalidModel, "decay_scale must be positive");
  }
  auto need = [&](std::size_t n) {
    if (params_.size() < n) {
      std::ostringstream os;
      os << to_string(kind_) << " profile needs " << n << " parameters, got " << params_.size();
      throw PolaronError(ErrorCode::InvalidModel, os.str());
    }
  };
  switch (kind_) {
    case ProfileKind::Gaussian:
      need(2);
      if (!(params_[1] > 0.0)) throw PolaronError(ErrorCode::InvalidModel, "gaussian width must be positive");
      break;
    case ProfileKind::PowerWithCutoff:
      need(2);
      if (params_.size() == 2) params_.push_back(0.0);
      break;
    case ProfileKind::GappedLinear:
      need(2);
      break;
    case ProfileKind::Tabulated: {
      if (table_.size() < 4) throw PolaronError(ErrorCode::InvalidModel, "tabulated profile needs at least 4 knots");
      std::vector<double> xs;
      std::vector<double> ys;
      for (const auto& [r, y] : table_) {
        if (!xs.empty() && !(r > xs.back())) {
          throw PolaronError(ErrorCode::InvalidModel, "tabulated radii must be strictly increasing");
        }
        if (r < 0.0) throw PolaronError(ErrorCode::InvalidModel, "tabulated radii must be nonnegative");
        xs.push_back(r);
        ys.push_back(y);
      }
      auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
          std::move(xs), std::move(ys));
      interp_ = [spline](double r) { return (*spline)(r); };
      break;
    }
  }
}

RadialProfile RadialProfile::gaussian(double amplitude, double width) {
  return RadialProfile(ProfileKind::Gaussian, {amplitude, width}, width);
}

RadialProfile RadialProfile::constant(double value) {
  return RadialProfile(ProfileKind::PowerWithCutoff, {value, 0.0, 0.0}, 1.0);
}

RadialProfile RadialProfile::power(double amplitude, double exponent, double cutoff, double decay_scale) {
  return RadialProfile(ProfileKind::PowerWithCutoff, {amplitude, exponent, cutoff}, decay_scale);
}

RadialProfile RadialProfile::gapped_linear(double gap, double slope, double decay_scale) {
  return RadialProfile(ProfileKind::GappedLinear, {gap, slope}, decay_scale);
}

RadialProfile RadialProfile::tabulated(std::vector<std::pair<double, double>> table, double decay_scale) {
  return RadialProfile(ProfileKind::Tabulated, {}, decay_scale, std::move(table));
}

double RadialProfile::operator()(double r) const {
  double value = 0.0;
  switch (kind_) {
    case ProfileKind::Gaussian: {
      const double w = params_[1];
      value = params_[0] * std::exp(-0.5 * r * r / (w * w));
      break;
    }
    case ProfileKind::PowerWithCutoff: {
      const double p = params_[1];
      const double cutoff = params_[2];
      value = params_[0] * (p == 0.0 ? 1.0 : std::pow(r, p));
      if (cutoff > 0.0) value *= std::exp(-(r / cutoff) * (r / cutoff));
      break;
    }
    case ProfileKind::GappedLinear:
      value = std::sqrt(params_[0] * params_[0] + params_[1] * params_[1] * r * r);
      break;
    case ProfileKind::Tabulated: {
      const double last = table_.back().first;
      if (r > 1.5 * last) {
        std::ostringstream os;
        os << "tabulated profile evaluated at r = " << r << " beyond 1.5 x last knot " << last;
        throw PolaronError(ErrorCode::InvalidArgument, os.str());
      }
      if (r >= last) {
        value = table_.back().second;
      } else if (r <= table_.front().first) {
        value = table_.front().second;
      } else {
        value = interp_(r);
      }
      break;
    }
  }
  return scale_ * value;
}

RadialProfile RadialProfile::scaled(double s) const {
  RadialProfile copy = *this;
  copy.scale_ *= s;
  return copy;
}

double RadialProfile::support_limit() const {
  if (kind_ == ProfileKind::Tabulated) return 1.5 * table_.back().first;
  return std::numeric_limits<double>::infinity();
}

bool RadialProfile::is_zero() const {
  if (scale_ == 0.0) return true;
  switch (kind_) {
    case ProfileKind::Gaussian:
    case ProfileKind::PowerWithCutoff:
      return params_[0] == 0.0;
    case ProfileKind::GappedLinear:
      return params_[0] == 0.0 && params_[1] == 0.0;
    case ProfileKind::Tabulated:
      return std::all_of(table_.begin(), table_.end(), [](const auto& kv) { return kv.second == 0.0; });
  }
  return false;
}

}  // namespace polaron
