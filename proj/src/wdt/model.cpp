#include "model.hpp"

#include <algorithm>
#include <cmath>

namespace wdt {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void QuenchSpec::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("quench: tau must be positive and finite");
  if (!std::isfinite(lambda_i) || !std::isfinite(lambda_f))
    throw ConfigError("quench: lambda endpoints must be finite");
  if (shape == QuenchShape::PiecewiseTable) {
    if (table.size() < 2) throw ConfigError("quench: piecewise table needs at least two knots");
    if (table.front().first != 0.0)
      throw ConfigError("quench: piecewise table must start at t = 0");
    if (std::abs(table.back().first - tau) > 1e-12 * tau)
      throw ConfigError("quench: piecewise table must end at t = tau");
    for (size_t i = 0; i + 1 < table.size(); ++i) {
      if (!(table[i].first < table[i + 1].first))
        throw ConfigError("quench: piecewise table times must be strictly increasing");
    }
    for (const auto& [t, v] : table) {
      if (!std::isfinite(t) || !std::isfinite(v))
        throw ConfigError("quench: piecewise table entries must be finite");
    }
  } else if (!table.empty()) {
    throw ConfigError("quench: table given but shape is not piecewise");
  }
}

double QuenchSpec::lambda_at(double t) const {
  const double slack = 1e-12 * tau;
  if (t < -slack || t > tau + slack)
    throw ConfigError("quench: lambda_at evaluated outside [0, tau]");
  t = std::clamp(t, 0.0, tau);
  switch (shape) {
    case QuenchShape::SinSquaredRamp: {
      const double s = std::sin(kPi * t / (2.0 * tau));
      return lambda_i + (lambda_f - lambda_i) * s * s;
    }
    case QuenchShape::Linear:
      return lambda_i + (lambda_f - lambda_i) * (t / tau);
    case QuenchShape::PiecewiseTable: {
      auto it = std::upper_bound(table.begin(), table.end(), t,
                                 [](double x, const auto& knot) { return x < knot.first; });
      if (it == table.begin()) return table.front().second;
      if (it == table.end()) return table.back().second;
      const auto& [t1, v1] = *it;
      const auto& [t0, v0] = *(it - 1);
      return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }
  }
  throw ConfigError("quench: unknown shape");
}

double QuenchSpec::lambda_start() const {
  return shape == QuenchShape::PiecewiseTable ? table.front().second : lambda_i;
}

double QuenchSpec::lambda_end() const {
  return shape == QuenchShape::PiecewiseTable ? table.back().second : lambda_f;
}

QuenchSpec QuenchSpec::reversed() const {
  QuenchSpec r = *this;
  // Both analytic shapes satisfy lambda(tau - t) == same shape with swapped
  // endpoints; tables are mirrored explicitly.
  std::swap(r.lambda_i, r.lambda_f);
  if (shape == QuenchShape::PiecewiseTable) {
    r.table.clear();
    r.table.reserve(table.size());
    for (auto it = table.rbegin(); it != table.rend(); ++it)
      r.table.emplace_back(tau - it->first, it->second);
    if (!r.table.empty()) r.table.front().first = 0.0;  // kill 1 ulp residue
  }
  return r;
}

void BhmParams::validate() const {
  if (m_sites < 2) throw ConfigError("bhm: m_sites must be >= 2");
  if (!(hopping > 0.0)) throw ConfigError("bhm: hopping must be positive");
  if (interaction < 0.0) throw ConfigError("bhm: interaction must be non-negative");
  if (!(density > 0.0)) throw ConfigError("bhm: density must be positive");
  if (eta == 0.0) throw ConfigError("bhm: eta must be nonzero");
  if (impurity_site < 0 || impurity_site >= m_sites)
    throw ConfigError("bhm: impurity_site out of range");
  if (!(lattice_const > 0.0)) throw ConfigError("bhm: lattice_const must be positive");
}

void QubitConfig::validate() const {
  const double norm = std::norm(s_down) + std::norm(s_up);
  if (std::abs(norm - 1.0) > 1e-10)
    throw ConfigError("qubit: |s_down|^2 + |s_up|^2 must equal 1");
  if (std::abs(estimate_factor()) < 1e-12)
    throw ConfigError("qubit: s_up^* s_down must be nonzero");
  if (!std::isfinite(delta)) throw ConfigError("qubit: delta must be finite");
}

}  // namespace wdt
