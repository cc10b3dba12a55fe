#include "fracspde/grid_spectral.hpp"

namespace fracspde {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidLevel: return "invalid level";
    case ErrorKind::InvalidParameter: return "invalid parameter";
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::Aliasing: return "aliasing";
    case ErrorKind::QuadratureFailure: return "quadrature failure";
    case ErrorKind::TruncationFailure: return "truncation failure";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::InsufficientNoise: return "insufficient noise modes";
    case ErrorKind::TimeGridMismatch: return "time grid mismatch";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::Config: return "config";
  }
  return "error";
}

std::vector<double> GridSpec::interior_points() const {
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(n - 1));
  for (Index k = 1; k < n; ++k) xs.push_back(point(k));
  return xs;
}

GridSpec make_grid(Index n) {
  require_level(n);
  return GridSpec{n, 1.0 / static_cast<double>(n)};
}

SpectralField SpectralField::basis(Index j, Index truncation) {
  if (j < 1 || j > truncation) {
    throw Error(ErrorKind::InvalidParameter, "basis index outside truncation");
  }
  SpectralField f{Eigen::VectorXd::Zero(truncation)};
  f.coeffs(j - 1) = 1.0;
  return f;
}

SineTransform::SineTransform(Index modes, Index m) : modes_(modes), m_(m) {
  if (modes < 0 || m < 2) {
    throw Error(ErrorKind::InvalidParameter, "sine transform needs m >= 2");
  }
  if (modes > m - 1) {
    throw Error(ErrorKind::Aliasing, std::to_string(modes) + " modes cannot be resolved on " +
                                         std::to_string(m - 1) + " points (m=" +
                                         std::to_string(m) + ")");
  }
  table_.resize(m - 1, modes);
  for (Index j = 1; j <= modes; ++j) {
    for (Index k = 1; k < m; ++k) {
      const Index r = (j * k) % (2 * m);
      table_(k - 1, j - 1) = std::numbers::sqrt2 *
                             std::sin(static_cast<double>(r) * std::numbers::pi /
                                      static_cast<double>(m));
    }
  }
}

Eigen::VectorXd SineTransform::synthesize(const Eigen::Ref<const Eigen::VectorXd>& coeffs) const {
  if (coeffs.size() > modes_) {
    throw Error(ErrorKind::Aliasing, "more coefficients than transform modes");
  }
  return table_.leftCols(coeffs.size()) * coeffs;
}

Eigen::MatrixXd SineTransform::synthesize_columns(const Eigen::Ref<const Eigen::MatrixXd>& coeffs) const {
  if (coeffs.rows() > modes_) {
    throw Error(ErrorKind::Aliasing, "more coefficients than transform modes");
  }
  return table_.leftCols(coeffs.rows()) * coeffs;
}

Eigen::VectorXd SineTransform::analyze(const Eigen::Ref<const Eigen::VectorXd>& values) const {
  if (values.size() != m_ - 1) {
    throw Error(ErrorKind::DimensionMismatch, "analyze expects m-1 point values");
  }
  return (table_.transpose() * values) / static_cast<double>(m_);
}

Eigen::VectorXd synthesize(const SpectralField& field, Index m) {
  return SineTransform(field.truncation(), m).synthesize(field.coeffs);
}

SpectralField analyze(const Eigen::Ref<const Eigen::VectorXd>& values, Index modes) {
  const Index m = values.size() + 1;
  return SpectralField{SineTransform(modes, m).analyze(values)};
}

Eigen::VectorXd synthesize(const GridField& field, Index m) {
  const auto es = eigen_system<double>(field.n);
  const Eigen::VectorXd coeffs = es.vectors.transpose() * field.values;
  return SineTransform(coeffs.size(), m).synthesize(coeffs);
}

}  // namespace fracspde
