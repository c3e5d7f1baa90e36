#include "lipsum/dictionary.hpp"

#include <cmath>

#include "lipsum/errors.hpp"

namespace lipsum {

Dictionary::Dictionary(std::shared_ptr<const FormGauge> gauge, std::size_t form_length)
    : gauge_(std::move(gauge)), length_(form_length) {
  if (!gauge_) throw ArgumentError("dictionary needs a gauge");
}

bool Dictionary::add(const Eigen::VectorXd& phi) {
  if (static_cast<std::size_t>(phi.size()) != length_) {
    throw ShapeError("dictionary form has the wrong length");
  }
  if (!phi.allFinite()) return false;
  const double fn = phi.norm();
  if (fn == 0.0) return false;
  const Eigen::VectorXd dir = phi / fn;
  for (const auto& d : directions_) {
    if (std::abs(d.dot(dir)) > 1.0 - 1e-12) return false;
  }
  const double upper = gauge_->upper(phi);
  if (!(upper > 0.0) || !std::isfinite(upper)) return false;
  forms_.push_back(phi / upper);
  directions_.push_back(dir);
  return true;
}

}  // namespace lipsum
