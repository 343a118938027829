#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "nia/errors.hpp"

namespace nia {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Shared tabular data: one row per sample, column l holds feature x_{l+1}.
///
/// Labels are stored as doubles restricted to {0, 1} so they enter the
/// BCE kernels without conversion. Generators may attach the latent columns
/// and the known optimal logit.
struct Dataset {
  Matrix features;                      // n x d
  Vector labels;                        // n, values in {0,1}
  std::optional<Matrix> latents;        // n x k
  std::optional<Vector> optimal_logits; // n

  [[nodiscard]] std::size_t n() const { return static_cast<std::size_t>(features.rows()); }
  [[nodiscard]] std::size_t d() const { return static_cast<std::size_t>(features.cols()); }

  /// Feature column for a 1-based feature index.
  [[nodiscard]] auto column(std::size_t feature) const {
    if (feature < 1 || feature > d()) {
      throw IndexOutOfRange("feature index " + std::to_string(feature) + " outside 1.." +
                            std::to_string(d()));
    }
    return features.col(static_cast<Eigen::Index>(feature - 1));
  }

  /// Throws on malformed content. Called by every loader and generator.
  void validate() const {
    if (labels.size() != features.rows()) {
      throw LengthMismatch("labels have " + std::to_string(labels.size()) + " rows, features " +
                           std::to_string(features.rows()));
    }
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
      if (labels[i] != 0.0 && labels[i] != 1.0) {
        throw DomainError("label at row " + std::to_string(i) + " is not 0 or 1");
      }
    }
    if (!features.allFinite()) throw NonFinite("feature matrix contains non-finite entries");
    if (latents && latents->rows() != features.rows()) {
      throw LengthMismatch("latent rows differ from feature rows");
    }
    if (optimal_logits && optimal_logits->size() != features.rows()) {
      throw LengthMismatch("optimal logit length differs from feature rows");
    }
  }
};

}  // namespace nia
