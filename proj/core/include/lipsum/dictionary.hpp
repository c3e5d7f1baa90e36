#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "lipsum/gauge.hpp"

namespace lipsum {

/// Finite set of forms, each scaled so that its certified gauge norm is 1.
class Dictionary {
 public:
  Dictionary(std::shared_ptr<const FormGauge> gauge, std::size_t form_length);

  /// Scales phi by the gauge's certified upper bound and appends it. Zero
  /// forms and near-duplicates (|cos| > 1 - 1e-12 with an existing form) are
  /// skipped. Returns true when the form was added.
  bool add(const Eigen::VectorXd& phi);

  const std::vector<Eigen::VectorXd>& forms() const { return forms_; }
  std::size_t size() const { return forms_.size(); }
  bool empty() const { return forms_.empty(); }
  std::size_t form_length() const { return length_; }
  const FormGauge& gauge() const { return *gauge_; }

 private:
  std::shared_ptr<const FormGauge> gauge_;
  std::size_t length_;
  std::vector<Eigen::VectorXd> forms_;
  std::vector<Eigen::VectorXd> directions_;
};

}  // namespace lipsum
