// subheat CLI: geodesics, distances, midpoints, hinged-energy analysis,
// kernel evaluation, semigroup checks, exponent fits, and verdict records
// for the catalogue models.
#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "subheat/asymfit.hpp"
#include "subheat/flow.hpp"
#include "subheat/heat.hpp"
#include "subheat/hinged.hpp"
#include "subheat/laplace.hpp"
#include "subheat/model.hpp"
#include "subheat/shoot.hpp"
#include "subheat/util.hpp"

using namespace subheat;

namespace {

Eigen::VectorXd parse_vec(const std::string& s, const std::string& what) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t pos = 0;
      vals.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw std::invalid_argument(what + ": cannot parse component '" + tok + "'");
    }
  }
  if (vals.empty()) throw std::invalid_argument(what + ": empty point");
  Eigen::VectorXd v(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
  return v;
}

std::vector<double> parse_tgrid(const std::string& s) {
  auto split = [](const std::string& str, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(str);
    std::string tok;
    while (std::getline(ss, tok, sep)) parts.push_back(tok);
    return parts;
  };
  if (s.rfind("log:", 0) == 0 || s.rfind("lin:", 0) == 0) {
    const auto parts = split(s, ':');
    if (parts.size() != 4)
      throw std::invalid_argument("t-grid: expected " + parts[0] + ":start:stop:count");
    const double a = std::stod(parts[1]), b = std::stod(parts[2]);
    const int n = std::stoi(parts[3]);
    if (n < 1 || a <= 0 || b <= 0 || a > b)
      throw std::invalid_argument("t-grid: need 0 < start <= stop and count >= 1");
    return parts[0] == "log" ? log_grid(a, b, n) : lin_grid(a, b, n);
  }
  std::vector<double> ts;
  for (const auto& p : split(s, ',')) ts.push_back(std::stod(p));
  if (ts.empty()) throw std::invalid_argument("t-grid: empty");
  return ts;
}

std::vector<std::array<double, 2>> parse_box(const std::string& s) {
  std::vector<std::array<double, 2>> box;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("box: expected lo:hi per axis, comma separated");
    const double lo = std::stod(tok.substr(0, colon)), hi = std::stod(tok.substr(colon + 1));
    if (!(lo < hi)) throw std::invalid_argument("box: lo must be below hi");
    box.push_back({lo, hi});
  }
  if (box.empty()) throw std::invalid_argument("box: empty");
  return box;
}

std::string vec_json(const Eigen::VectorXd& v) {
  std::string s = "[";
  for (int i = 0; i < v.size(); ++i) {
    s += fmt17(v[i]);
    if (i + 1 < v.size()) s += ",";
  }
  return s + "]";
}

std::string mat_json(const Eigen::MatrixXd& m) {
  std::string s = "[";
  for (int i = 0; i < m.rows(); ++i) {
    s += vec_json(m.row(i).transpose());
    if (i + 1 < m.rows()) s += ",";
  }
  return s + "]";
}

void emit(const std::string& out_path, std::string content) {
  if (content.empty() || content.back() != '\n') content += '\n';
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw std::invalid_argument("cannot open output file " + out_path);
  f << content;
}

// shared sampling spec for heat-eval and fit
struct SampleSpec {
  std::string model, method = "auto", target, from, to, tgrid;
  double rel_tol = 0;  // 0 = per-method default
};

std::vector<KernelSample> run_samples(const SampleSpec& sp) {
  const auto ts = parse_tgrid(sp.tgrid);
  std::string method = sp.method;
  if (sp.model == "heisenberg") {
    if (sp.target.empty()) throw std::invalid_argument("heisenberg sampling needs --target x,y,z");
    const Eigen::VectorXd q = parse_vec(sp.target, "--target");
    if (q.size() != 3) throw std::invalid_argument("--target: heisenberg points have 3 components");
    const bool vertical = std::abs(q[0]) < 1e-14 && std::abs(q[1]) < 1e-14;
    if (method == "auto") method = vertical ? "closed" : "gaveau";
    if (method == "closed") {
      if (!vertical)
        throw std::invalid_argument("closed form requires a vertical target (x = y = 0)");
      return heisenberg_vertical_samples(q[2], ts);
    }
    if (method == "gaveau") {
      const Model& m = model_by_name("heisenberg");
      std::vector<KernelSample> out;
      for (double t : ts) out.push_back(gaveau_kernel(m, q, t, sp.rel_tol > 0 ? sp.rel_tol : 1e-10));
      return out;
    }
    throw std::invalid_argument("heisenberg methods: closed, gaveau");
  }
  if (sp.model == "free36") {
    if (method == "auto") method = sp.target.empty() ? "closed" : "gaveau";
    if (method == "closed" || method == "radial") {
      if (!sp.target.empty()) {
        const Eigen::VectorXd q = parse_vec(sp.target, "--target");
        if (q.size() != 6 || q.head(3).norm() > 1e-12 ||
            std::abs(q.tail(3).norm() - 1.0) > 1e-12)
          throw std::invalid_argument(
              "free36 closed/radial forms are for the unit vertical point (0,0,0,z), |z| = 1");
      }
      if (method == "closed") return free36_vertical_samples(ts);
      std::vector<KernelSample> out;
      for (double t : ts) out.push_back(free36_vertical_radial(t, sp.rel_tol > 0 ? sp.rel_tol : 1e-9));
      return out;
    }
    if (method == "gaveau") {
      if (sp.target.empty()) throw std::invalid_argument("free36 gaveau needs --target (6 components)");
      const Eigen::VectorXd q = parse_vec(sp.target, "--target");
      if (q.size() != 6) throw std::invalid_argument("--target: free36 points have 6 components");
      const Model& m = model_by_name("free36");
      std::vector<KernelSample> out;
      for (double t : ts) out.push_back(gaveau_kernel(m, q, t, sp.rel_tol > 0 ? sp.rel_tol : 1e-8));
      return out;
    }
    throw std::invalid_argument("free36 methods: closed, radial, gaveau");
  }
  if (sp.model == "grushin") {
    if (method == "auto") method = "mehler";
    if (method != "mehler") throw std::invalid_argument("grushin methods: mehler");
    if (sp.from.empty() || sp.to.empty())
      throw std::invalid_argument("grushin sampling needs --from x,y and --to x,y");
    const Eigen::VectorXd a = parse_vec(sp.from, "--from"), b = parse_vec(sp.to, "--to");
    if (a.size() != 2 || b.size() != 2)
      throw std::invalid_argument("grushin points have 2 components");
    return grushin_samples(Eigen::Vector2d(a), Eigen::Vector2d(b), ts,
                           sp.rel_tol > 0 ? sp.rel_tol : 1e-6);
  }
  throw std::invalid_argument("kernel sampling supports models: heisenberg, free36, grushin");
}

std::vector<std::pair<double, double>> read_sample_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot read samples file " + path);
  std::vector<std::pair<double, double>> out;
  std::string line;
  int log_col = 1;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    if (first) {
      first = false;
      if (line.rfind("t,value,log_value", 0) == 0) {
        log_col = 2;
        continue;  // header of a samples CSV
      }
      if (!line.empty() && !(std::isdigit(line[0]) || line[0] == '-' || line[0] == '+' ||
                             line[0] == '.'))
        continue;  // some other header
    }
    if (static_cast<int>(cols.size()) <= log_col)
      throw std::invalid_argument("samples file: need t and log p columns");
    out.push_back({std::stod(cols[0]), std::stod(cols[log_col])});
  }
  return out;
}

std::string fit_json(const std::string& model, const std::string& method, size_t n_samples,
                     const AsymptoticFit& fit) {
  JsonWriter w;
  w.begin_object();
  if (!model.empty()) w.field("model", model);
  if (!method.empty()) w.field("method", method);
  w.field("n_samples", static_cast<long long>(n_samples))
      .field("d2_hat", fit.d2_hat)
      .field("alpha_hat", fit.alpha_hat)
      .field("C_hat", fit.C_hat)
      .field("residual_rms", fit.residual_rms)
      .field("t_min", fit.t_min)
      .field("t_max", fit.t_max)
      .end_object();
  return w.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"small-time heat kernel asymptotics toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; [subcommand] sections; flags override");

  // ---- geodesic ----
  struct {
    std::string model, from, covector, out;
    double time = 1.0;
    int samples = 200;
  } geo;
  auto* sc_geo = app.add_subcommand("geodesic", "integrate a normal geodesic, write t,q,p CSV");
  sc_geo->add_option("--model", geo.model, "model name")->required();
  sc_geo->add_option("--from", geo.from, "start point (comma separated; default origin)");
  sc_geo->add_option("--covector", geo.covector, "initial covector p0")->required();
  sc_geo->add_option("--time", geo.time, "integration time")->check(CLI::PositiveNumber);
  sc_geo->add_option("--samples", geo.samples, "sample rows")->check(CLI::PositiveNumber);
  sc_geo->add_option("--out", geo.out, "output file (default stdout)");
  sc_geo->callback([&] {
    const Model& m = model_by_name(geo.model);
    Eigen::VectorXd x = geo.from.empty() ? Eigen::VectorXd::Zero(m.n).eval()
                                         : parse_vec(geo.from, "--from");
    const Eigen::VectorXd p0 = parse_vec(geo.covector, "--covector");
    if (x.size() != m.n || p0.size() != m.n)
      throw std::invalid_argument("point/covector dimension must equal " + std::to_string(m.n));
    const Trajectory tr = integrate_hamilton(m, x, p0, geo.time);
    std::string csv = "t";
    for (int i = 1; i <= m.n; ++i) csv += ",q" + std::to_string(i);
    for (int i = 1; i <= m.n; ++i) csv += ",p" + std::to_string(i);
    csv += "\n";
    for (int s = 0; s <= geo.samples; ++s) {
      const double t = geo.time * s / geo.samples;
      const Eigen::VectorXd st = tr.state_at(t);
      csv += fmt17(t);
      for (int i = 0; i < 2 * m.n; ++i) csv += "," + fmt17(st[i]);
      csv += "\n";
    }
    emit(geo.out, csv);
  });

  // ---- distance ----
  struct {
    std::string model, from, to, out;
    int starts = 64;
    double newton_tol = 1e-10;
  } dist;
  auto* sc_dist = app.add_subcommand("distance", "multistart shooting distance, JSON");
  sc_dist->add_option("--model", dist.model, "model name")->required();
  sc_dist->add_option("--from", dist.from, "start point")->required();
  sc_dist->add_option("--to", dist.to, "end point")->required();
  sc_dist->add_option("--starts", dist.starts, "starts per angular dimension")
      ->check(CLI::PositiveNumber);
  sc_dist->add_option("--newton-tol", dist.newton_tol, "endpoint residual tolerance")
      ->check(CLI::PositiveNumber);
  sc_dist->add_option("--out", dist.out, "output file (default stdout)");
  sc_dist->callback([&] {
    const Model& m = model_by_name(dist.model);
    ShootOptions opts;
    opts.n_start = dist.starts;
    opts.newton_tol = dist.newton_tol;
    const DistanceResult r =
        distance(m, parse_vec(dist.from, "--from"), parse_vec(dist.to, "--to"), opts);
    JsonWriter w;
    w.begin_object()
        .field("model", dist.model)
        .field("d", r.d)
        .field("d2", r.d * r.d)
        .field("best_residual", r.best_residual)
        .field("n_solutions", static_cast<long long>(r.solutions.size()));
    std::string sols = "[";
    for (size_t i = 0; i < r.solutions.size(); ++i) {
      const auto& s = r.solutions[i];
      sols += "{\"T\":" + fmt17(s.T) + ",\"residual\":" + fmt17(s.residual) +
              ",\"is_minimizing\":" + (s.is_minimizing ? "true" : "false") +
              ",\"theta\":" + vec_json(s.theta) + ",\"p0\":" + vec_json(s.p0) + "}";
      if (i + 1 < r.solutions.size()) sols += ",";
    }
    w.field_raw("solutions", sols + "]").end_object();
    emit(dist.out, w.str());
  });

  // ---- midpoints ----
  struct {
    std::string model, from, to, out;
  } mid;
  auto* sc_mid = app.add_subcommand("midpoints", "midpoints of minimizing geodesics, JSON");
  sc_mid->add_option("--model", mid.model, "model name")->required();
  sc_mid->add_option("--from", mid.from, "start point")->required();
  sc_mid->add_option("--to", mid.to, "end point")->required();
  sc_mid->add_option("--out", mid.out, "output file (default stdout)");
  sc_mid->callback([&] {
    const Model& m = model_by_name(mid.model);
    const MidpointSet r = midpoints(m, parse_vec(mid.from, "--from"), parse_vec(mid.to, "--to"));
    JsonWriter w;
    w.begin_object()
        .field("model", mid.model)
        .field("d", r.d)
        .field("dim_estimate", r.dim_estimate)
        .field("n_midpoints", static_cast<long long>(r.points.size()));
    std::string pts = "[";
    for (size_t i = 0; i < r.points.size(); ++i) {
      pts += vec_json(r.points[i]);
      if (i + 1 < r.points.size()) pts += ",";
    }
    w.field_raw("midpoints", pts + "]").end_object();
    emit(mid.out, w.str());
  });

  // ---- hessian ----
  struct {
    std::string model, from, to, midpt, out;
    double hess_step = 1e-3, kernel_rel_tol = 1e-6;
  } hes;
  auto* sc_hes = app.add_subcommand("hessian", "hinged-energy Hessian at a midpoint, JSON");
  sc_hes->add_option("--model", hes.model, "model name")->required();
  sc_hes->add_option("--from", hes.from, "start point")->required();
  sc_hes->add_option("--to", hes.to, "end point")->required();
  sc_hes->add_option("--mid", hes.midpt, "midpoint (default: first computed midpoint)");
  sc_hes->add_option("--hess-step", hes.hess_step, "finite-difference step")
      ->check(CLI::PositiveNumber);
  sc_hes->add_option("--kernel-rel-tol", hes.kernel_rel_tol, "kernel eigenvalue threshold")
      ->check(CLI::PositiveNumber);
  sc_hes->add_option("--out", hes.out, "output file (default stdout)");
  sc_hes->callback([&] {
    const Model& m = model_by_name(hes.model);
    const Eigen::VectorXd x = parse_vec(hes.from, "--from"), y = parse_vec(hes.to, "--to");
    Eigen::VectorXd z0;
    if (!hes.midpt.empty()) {
      z0 = parse_vec(hes.midpt, "--mid");
    } else {
      const MidpointSet ms = midpoints(m, x, y);
      if (ms.points.empty()) throw std::runtime_error("no midpoint found to anchor the Hessian");
      z0 = ms.points.front();
    }
    HingedOptions opts;
    opts.hess_step = hes.hess_step;
    opts.kernel_rel_tol = hes.kernel_rel_tol;
    HingedField f(m, x, y, z0, Eigen::MatrixXd(), opts);
    const HingedHessian& H = f.hessian();
    JsonWriter w;
    w.begin_object()
        .field("model", hes.model)
        .field("d", f.d())
        .field("d2", f.d2())
        .field("h0", f.h0())
        .field("kernel_dim", H.kernel_dim)
        .field("gamma_dim", f.gamma_dim())
        .field("fd_uncertainty", H.fd_uncertainty)
        .field_raw("midpoint", vec_json(z0))
        .field_raw("gradient", vec_json(f.grad()))
        .field_raw("eigenvalues", vec_json(H.eigenvalues))
        .field_raw("matrix", mat_json(H.matrix))
        .end_object();
    emit(hes.out, w.str());
  });

  // ---- taylor ----
  struct {
    std::string model, from, to, midpt, out;
    double step = 5e-2;
  } tay;
  auto* sc_tay = app.add_subcommand("taylor", "quartic Taylor table of the hinged energy, CSV");
  sc_tay->add_option("--model", tay.model, "model name")->required();
  sc_tay->add_option("--from", tay.from, "start point")->required();
  sc_tay->add_option("--to", tay.to, "end point")->required();
  sc_tay->add_option("--mid", tay.midpt, "midpoint (default: first computed midpoint)");
  sc_tay->add_option("--step", tay.step, "stencil step")->check(CLI::PositiveNumber);
  sc_tay->add_option("--out", tay.out, "output file (default stdout)");
  sc_tay->callback([&] {
    const Model& m = model_by_name(tay.model);
    const Eigen::VectorXd x = parse_vec(tay.from, "--from"), y = parse_vec(tay.to, "--to");
    Eigen::VectorXd z0;
    if (!tay.midpt.empty()) {
      z0 = parse_vec(tay.midpt, "--mid");
    } else {
      const MidpointSet ms = midpoints(m, x, y);
      if (ms.points.empty()) throw std::runtime_error("no midpoint found to anchor the table");
      z0 = ms.points.front();
    }
    HingedOptions opts;
    opts.quartic_step = tay.step;
    HingedField f(m, x, y, z0, Eigen::MatrixXd(), opts);
    std::string csv = "powers,value,uncertainty,reliable\n";
    for (const auto& c : f.taylor4()) {
      std::string p;
      for (size_t i = 0; i < c.powers.size(); ++i) {
        p += std::to_string(c.powers[i]);
        if (i + 1 < c.powers.size()) p += ":";
      }
      csv += p + "," + fmt17(c.value) + "," + fmt17(c.uncertainty) + "," +
             (c.reliable ? "true" : "false") + "\n";
    }
    emit(tay.out, csv);
  });

  // ---- heat-eval ----
  SampleSpec he;
  std::string he_out;
  auto* sc_he = app.add_subcommand("heat-eval", "kernel samples over a t grid, CSV");
  sc_he->add_option("--model", he.model, "heisenberg | free36 | grushin")->required();
  sc_he->add_option("--method", he.method, "auto | closed | gaveau | radial | mehler");
  sc_he->add_option("--target", he.target, "target point (group models)");
  sc_he->add_option("--from", he.from, "start point (grushin)");
  sc_he->add_option("--to", he.to, "end point (grushin)");
  sc_he->add_option("--t-grid", he.tgrid, "log:a:b:n | lin:a:b:n | comma list")->required();
  sc_he->add_option("--rel-tol", he.rel_tol, "quadrature relative tolerance")
      ->check(CLI::PositiveNumber);
  sc_he->add_option("--out", he_out, "output file (default stdout)");
  sc_he->callback([&] { emit(he_out, samples_csv(run_samples(he))); });

  // ---- glue ----
  struct {
    std::string model, from, to, box, out;
    double time = 0.5, rel_tol = 1e-3, inner_rel_tol = 1e-7;
  } gl;
  auto* sc_gl = app.add_subcommand("glue", "semigroup identity check via midpoint integration, JSON");
  sc_gl->add_option("--model", gl.model, "model name (heisenberg)")->required();
  sc_gl->add_option("--from", gl.from, "start point")->required();
  sc_gl->add_option("--to", gl.to, "end point")->required();
  sc_gl->add_option("--time", gl.time, "total time t")->check(CLI::PositiveNumber);
  sc_gl->add_option("--box", gl.box, "integration box lo:hi per axis, comma separated")->required();
  sc_gl->add_option("--rel-tol", gl.rel_tol, "glue quadrature tolerance")
      ->check(CLI::PositiveNumber);
  sc_gl->add_option("--inner-rel-tol", gl.inner_rel_tol, "kernel evaluation tolerance")
      ->check(CLI::PositiveNumber);
  sc_gl->add_option("--out", gl.out, "output file (default stdout)");
  sc_gl->callback([&] {
    if (gl.model != "heisenberg")
      throw std::invalid_argument("glue: point-kernel evaluation is available for heisenberg");
    const Eigen::VectorXd x = parse_vec(gl.from, "--from"), y = parse_vec(gl.to, "--to");
    if (x.size() != 3 || y.size() != 3)
      throw std::invalid_argument("heisenberg points have 3 components");
    const double inner = gl.inner_rel_tol;
    const PointKernel kern = [inner](const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                     double t) {
      return heisenberg_kernel(Eigen::Vector3d(a), Eigen::Vector3d(b), t, inner);
    };
    const auto box = parse_box(gl.box);
    const double glued = semigroup_glue(kern, x, y, gl.time, box, gl.rel_tol);
    const double direct = heisenberg_kernel(Eigen::Vector3d(x), Eigen::Vector3d(y), gl.time, 1e-10);
    JsonWriter w;
    w.begin_object()
        .field("model", gl.model)
        .field("t", gl.time)
        .field("glued", glued)
        .field("direct", direct)
        .field("rel_diff", std::abs(glued / direct - 1.0));
    std::string bx = "[";
    for (size_t i = 0; i < box.size(); ++i) {
      bx += "[" + fmt17(box[i][0]) + "," + fmt17(box[i][1]) + "]";
      if (i + 1 < box.size()) bx += ",";
    }
    w.field_raw("box", bx + "]").end_object();
    emit(gl.out, w.str());
  });

  // ---- fit ----
  SampleSpec ft;
  std::string ft_out, ft_samples;
  auto* sc_ft = app.add_subcommand("fit", "two-stage exponent fit, JSON");
  sc_ft->add_option("--model", ft.model, "heisenberg | free36 | grushin");
  sc_ft->add_option("--method", ft.method, "auto | closed | gaveau | radial | mehler");
  sc_ft->add_option("--target", ft.target, "target point (group models)");
  sc_ft->add_option("--from", ft.from, "start point (grushin)");
  sc_ft->add_option("--to", ft.to, "end point (grushin)");
  sc_ft->add_option("--t-grid", ft.tgrid, "log:a:b:n | lin:a:b:n | comma list");
  sc_ft->add_option("--rel-tol", ft.rel_tol, "quadrature relative tolerance")
      ->check(CLI::PositiveNumber);
  sc_ft->add_option("--samples", ft_samples, "read (t, log p) from a CSV file instead");
  sc_ft->add_option("--out", ft_out, "output file (default stdout)");
  sc_ft->callback([&] {
    std::vector<std::pair<double, double>> data;
    std::string method = "file";
    if (!ft_samples.empty()) {
      data = read_sample_file(ft_samples);
    } else {
      if (ft.model.empty() || ft.tgrid.empty())
        throw std::invalid_argument("fit: need --samples or --model with --t-grid");
      const auto samples = run_samples(ft);
      for (const auto& s : samples) data.push_back({s.t, s.log_value});
      method = samples.empty() ? ft.method : samples.front().method;
    }
    emit(ft_out, fit_json(ft.model, method, data.size(), fit_exponential(data)));
  });

  // ---- verdict ----
  struct {
    std::string fit_file, out;
    int n = 0, kernel_dim = 0;
    double predicted_alpha = std::numeric_limits<double>::quiet_NaN();
    double eps = 0.05;
  } vd;
  auto* sc_vd = app.add_subcommand("verdict", "bound-clause verdict from a prior fit, JSON");
  sc_vd->add_option("--fit", vd.fit_file, "fit JSON file (from the fit subcommand)")->required();
  sc_vd->add_option("--n", vd.n, "manifold dimension")->required()->check(CLI::PositiveNumber);
  sc_vd->add_option("--kernel-dim", vd.kernel_dim, "hinged-Hessian kernel dimension")
      ->required()
      ->check(CLI::NonNegativeNumber);
  sc_vd->add_option("--predicted-alpha", vd.predicted_alpha, "normal-form power for comparison");
  sc_vd->add_option("--eps", vd.eps, "clause tolerance")->check(CLI::PositiveNumber);
  sc_vd->add_option("--out", vd.out, "output file (default stdout)");
  sc_vd->callback([&] {
    std::ifstream f(vd.fit_file);
    if (!f) throw std::invalid_argument("cannot read fit file " + vd.fit_file);
    nlohmann::json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("fit file is not valid JSON: " + std::string(e.what()));
    }
    AsymptoticFit fit;
    try {
      fit.d2_hat = j.at("d2_hat").get<double>();
      fit.alpha_hat = j.at("alpha_hat").get<double>();
      fit.C_hat = j.at("C_hat").get<double>();
      fit.residual_rms = j.value("residual_rms", 0.0);
      fit.t_min = j.value("t_min", 0.0);
      fit.t_max = j.value("t_max", 0.0);
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument("fit file lacks d2_hat/alpha_hat/C_hat fields");
    }
    emit(vd.out, corollary_verdict(fit, vd.n, vd.kernel_dim, vd.predicted_alpha, vd.eps).json());
  });

  // ---- reproduce-table ----
  std::string rt_out;
  auto* sc_rt = app.add_subcommand("reproduce-table",
                                   "grushin-plane asymptotic summary table, CSV");
  sc_rt->add_option("--out", rt_out, "output file (default stdout)");
  sc_rt->callback([&] {
    const Model& gr = model_by_name("grushin");
    // powers of 1/t per regime; the conjugate-cut entry comes from the quartic
    // normal form 8 u^2 + (alpha/24) v^4 through the exponent formula
    LaplaceForm form;
    form.exponents = {1, 2};
    form.diag_coeffs = {8.0, 1.5 * M_PI * M_PI / 24.0};
    const Rational conj = heat_exponent(gr.n, form);
    const Rational half(gr.n, 2);
    const Rational diag_deg(gr.hausdorff_q, 2);
    std::string csv = "base_point,regime,alpha,alpha_exact,gaussian_factor,source\n";
    auto row = [&](const std::string& base, const std::string& regime, const Rational& a,
                   bool gauss, const std::string& src) {
      csv += base + "," + regime + "," + fmt17(a.to_double()) + "," + a.str() + "," +
             (gauss ? "true" : "false") + "," + src + "\n";
    };
    row("riemannian", "diagonal", half, false, "local_dimension_half");
    row("riemannian", "off_cut", half, true, "nondegenerate_hinge");
    row("riemannian", "cut_nonconjugate", half, true, "nondegenerate_hinge");
    row("riemannian", "cut_conjugate", conj, true, "quartic_normal_form");
    row("degenerate", "diagonal", diag_deg, false, "hausdorff_dimension_half");
    row("degenerate", "off_cut", half, true, "nondegenerate_hinge");
    row("degenerate", "cut_nonconjugate", half, true, "nondegenerate_hinge");
    csv += "degenerate,cut_conjugate,,,,not_applicable\n";
    emit(rt_out, csv);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const KernelError& e) {
    std::cerr << "{\"error\":\"kernel\",\"message\":" << nlohmann::json(e.what()).dump() << "}\n";
    return 2;
  } catch (const ShootError& e) {
    std::cerr << "{\"error\":\"shoot\",\"message\":" << nlohmann::json(e.what()).dump()
              << ",\"best_residual\":" << fmt17(e.best_residual) << "}\n";
    return 2;
  } catch (const UnsupportedDegeneracy& e) {
    std::cerr << "{\"error\":\"degeneracy\",\"message\":" << nlohmann::json(e.what()).dump()
              << "}\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"numeric\",\"message\":" << nlohmann::json(e.what()).dump() << "}\n";
    return 2;
  }
  return 0;
}
