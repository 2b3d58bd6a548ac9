#include "subheat/model.hpp"

#include <cmath>

namespace subheat {

Model make_two_step(const std::string& name, const std::vector<Eigen::MatrixXd>& B) {
  Model m;
  m.name = name;
  m.z_dim = static_cast<int>(B.size());
  m.x_dim = static_cast<int>(B[0].rows());
  m.k = m.x_dim;
  m.n = m.x_dim + m.z_dim;
  m.hausdorff_q = m.x_dim + 2 * m.z_dim;
  m.bracket_B = B;

  for (int i = 0; i < m.k; ++i) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m.n);
    c[i] = 1.0;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m.n, m.n);
    // z_h row: -(1/2) (B_h x)_i = -(1/2) sum_j B_h(i,j) x_j
    for (int h = 0; h < m.z_dim; ++h)
      for (int j = 0; j < m.x_dim; ++j) A(m.x_dim + h, j) = -0.5 * B[h](i, j);
    m.frame_c.push_back(c);
    m.frame_A.push_back(A);
  }
  return m;
}

Model make_heisenberg() {
  Eigen::MatrixXd B(2, 2);
  B << 0, 1, -1, 0;
  Model m = make_two_step("heisenberg", {B});
  // Chart (theta, w): horizontal direction (-sin theta, cos theta), vertical
  // momentum w; p_x solves <p, X_i(base)> = u_i.
  m.covector_chart = [](const Eigen::VectorXd& base, const Eigen::VectorXd& th) {
    double theta = th[0], w = th[1];
    Eigen::VectorXd p(3);
    double ux = -std::sin(theta), uy = std::cos(theta);
    // u = p_x - (1/2) w B x  =>  p_x = u + (1/2) w B x
    p[0] = ux + 0.5 * w * base[1];
    p[1] = uy - 0.5 * w * base[0];
    p[2] = w;
    return p;
  };
  m.chart_dims = {{true, 1.0}, {false, 1.0}};
  return m;
}

Model make_free36() {
  Eigen::MatrixXd B1(3, 3), B2(3, 3), B3(3, 3);
  B1 << 0, 0, 0, 0, 0, 1, 0, -1, 0;
  B2 << 0, 0, -1, 0, 0, 0, 1, 0, 0;
  B3 << 0, 1, 0, -1, 0, 0, 0, 0, 0;
  Model m = make_two_step("free36", {B1, B2, B3});
  // Chart (a, b, w1, w2, w3): stereographic S^2 for the unit horizontal
  // direction, free vertical momentum.
  m.covector_chart = [](const Eigen::VectorXd& base, const Eigen::VectorXd& th) {
    double a = th[0], b = th[1];
    double s = 1.0 + a * a + b * b;
    Eigen::Vector3d u(2 * a / s, 2 * b / s, (2.0 - s) / s);
    Eigen::Vector3d w(th[2], th[3], th[4]);
    Eigen::VectorXd p(6);
    Eigen::Vector3d x = base.head<3>();
    Eigen::Vector3d px = u;
    // p_x = u + (1/2) sum_h w_h B_h x
    Eigen::MatrixXd B1m(3, 3), B2m(3, 3), B3m(3, 3);
    B1m << 0, 0, 0, 0, 0, 1, 0, -1, 0;
    B2m << 0, 0, -1, 0, 0, 0, 1, 0, 0;
    B3m << 0, 1, 0, -1, 0, 0, 0, 0, 0;
    px += 0.5 * (w[0] * B1m * x + w[1] * B2m * x + w[2] * B3m * x);
    p.head<3>() = px;
    p.tail<3>() = w;
    return p;
  };
  m.chart_dims = {{false, 1.0}, {false, 1.0}, {false, 1.0}, {false, 1.0}, {false, 1.0}};
  return m;
}

Model make_grushin() {
  Model m;
  m.name = "grushin";
  m.n = 2;
  m.k = 2;
  m.hausdorff_q = 3;  // homogeneous dimension at the singular line x = 0
  Eigen::VectorXd c1(2), c2(2);
  c1 << 1, 0;
  c2 << 0, 0;
  Eigen::MatrixXd A1 = Eigen::MatrixXd::Zero(2, 2), A2 = Eigen::MatrixXd::Zero(2, 2);
  A2(1, 0) = 1;  // X_2 = x d/dy
  m.frame_c = {c1, c2};
  m.frame_A = {A1, A2};
  m.covector_chart = [](const Eigen::VectorXd& base, const Eigen::VectorXd& th) {
    double x = base[0];
    if (std::abs(x) < 1e-9)
      throw std::domain_error("grushin covector chart undefined on the line x = 0");
    // At |x| = 1 this is (cos th, sin th); dividing by |x| keeps H = 1/2
    // at any off-line base while preserving that orientation convention.
    Eigen::VectorXd p(2);
    p[0] = std::cos(th[0]);
    p[1] = std::sin(th[0]) / std::abs(x);
    return p;
  };
  m.chart_dims = {{true, 1.0}};
  return m;
}

const Model& model_by_name(const std::string& name) {
  static const Model heis = make_heisenberg();
  static const Model gru = make_grushin();
  static const Model f36 = make_free36();
  if (name == "heisenberg") return heis;
  if (name == "grushin") return gru;
  if (name == "free36") return f36;
  throw std::invalid_argument("unknown model: " + name);
}

}  // namespace subheat
