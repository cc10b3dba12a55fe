#include "fracspde/lifting.hpp"

#include <cmath>

namespace fracspde {

GridField project_Pn(const SpectralField& f, Index n) {
  const auto es = eigen_system<double>(n);
  return GridField{n, project_coefficients(es, f.coeffs)};
}

SpectralField interpolate_En(const GridField& x) {
  const auto es = eigen_system<double>(x.n);
  if (x.values.size() != es.size()) {
    throw Error(ErrorKind::DimensionMismatch, "grid field size does not match its level");
  }
  return SpectralField{interpolate_coefficients(es, x.values)};
}

NemytskiiMap constant_map(double c) {
  NemytskiiMap g;
  g.name = "constant";
  g.fn = [c](double) { return c; };
  g.b0 = std::abs(c);
  g.lipschitz = 0.0;
  g.delta = 0.75;
  g.identically_zero = (c == 0.0);
  return g;
}

NemytskiiMap nemytskii_catalogue(const std::string& name) {
  NemytskiiMap g;
  g.name = name;
  // Smoothness tag 0.75 sits inside the admissible delta window for alpha in (1, 2].
  g.delta = 0.75;
  if (name == "cos") {
    g.fn = [](double x) { return std::cos(x); };
    g.b0 = 1.0;
    g.lipschitz = 1.0;
  } else if (name == "one") {
    g.fn = [](double) { return 1.0; };
    g.b0 = 1.0;
    g.lipschitz = 0.0;
  } else if (name == "tanh-scaled") {
    g.fn = [](double x) { return std::tanh(x); };
    g.b0 = 1.0;
    g.lipschitz = 1.0;
  } else if (name == "zero") {
    g.fn = [](double) { return 0.0; };
    g.identically_zero = true;
  } else {
    throw Error(ErrorKind::Config, "unknown diffusion map '" + name + "'");
  }
  return g;
}

std::vector<std::string> nemytskii_names() { return {"cos", "one", "tanh-scaled", "zero"}; }

Eigen::VectorXd nemytskii_eval(const NemytskiiMap& g, const SpectralField& f, Index m) {
  if (m < 2 * f.truncation()) {
    throw Error(ErrorKind::Aliasing, "oversampling m=" + std::to_string(m) +
                                         " below twice the truncation " +
                                         std::to_string(f.truncation()));
  }
  Eigen::VectorXd values = SineTransform(f.truncation(), m).synthesize(f.coeffs);
  for (auto& v : values) v = g(v);
  return values;
}

namespace {

void require_oversampling(Index n, Index m) {
  if (m < 4 * n) {
    throw Error(ErrorKind::Aliasing,
                "diffusion matrix needs m >= 4n (n=" + std::to_string(n) + ", m=" +
                    std::to_string(m) + ")");
  }
}

}  // namespace

Eigen::MatrixXd diffusion_matrix_gn(const NemytskiiMap& g, const GridField& y, Index m) {
  require_oversampling(y.n, m);
  const auto es = eigen_system<double>(y.n);
  const SineTransform st(es.size(), m);
  const Eigen::VectorXd coeffs = interpolate_coefficients(es, y.values);
  Eigen::VectorXd mult = st.synthesize(coeffs);
  for (auto& v : mult) v = g(v);
  // <g(E_n y) e_j, e_l> for l, j < n
  const Eigen::MatrixXd inner =
      st.table().transpose() * mult.asDiagonal() * st.table() / static_cast<double>(m);
  return es.vectors * inner;
}

Eigen::VectorXd diffusion_apply(const NemytskiiMap& g, const GridField& y,
                                const Eigen::Ref<const Eigen::VectorXd>& dw, Index m) {
  require_oversampling(y.n, m);
  const auto es = eigen_system<double>(y.n);
  if (dw.size() != es.size()) {
    throw Error(ErrorKind::DimensionMismatch, "noise vector must have n-1 entries");
  }
  const SineTransform st(es.size(), m);
  Eigen::VectorXd mult = st.synthesize(interpolate_coefficients(es, y.values));
  for (auto& v : mult) v = g(v);
  const Eigen::VectorXd noise = st.synthesize(dw);
  return es.vectors * st.analyze(mult.cwiseProduct(noise));
}

}  // namespace fracspde
