#include "mflqg/model.hpp"

#include <sstream>

#include "mflqg/ode.hpp"

namespace mflqg {

Coefficient::Coefficient(Mat constant) { samples_.push_back(std::move(constant)); }

Coefficient::Coefficient(std::vector<Mat> samples) : samples_(std::move(samples)) {}

Mat Coefficient::at(const TimeGrid& grid, double t) const {
  if (is_constant()) return samples_.front();
  auto [k, w] = grid.locate(t);
  if (w == 0.0) return samples_[k];
  return (1.0 - w) * samples_[k] + w * samples_[k + 1];
}

double Coefficient::max_abs() const {
  double out = 0.0;
  for (const auto& s : samples_) out = std::max(out, detail::max_abs(s));
  return out;
}

bool Coefficient::operator==(const Coefficient& other) const {
  if (samples_.size() != other.samples_.size()) return false;
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    const Mat& a = samples_[k];
    const Mat& b = other.samples_[k];
    if (a.rows() != b.rows() || a.cols() != b.cols() || a != b) return false;
  }
  return true;
}

CoefficientSlice ModelParams::at(double t) const {
  return {A.at(grid, t), B.at(grid, t), C.at(grid, t), D.at(grid, t), F.at(grid, t), Ftilde.at(grid, t),
          Q.at(grid, t), R.at(grid, t), Gamma.at(grid, t), eta.at(grid, t).col(0)};
}

CoefficientSlice ModelParams::node(int k) const {
  return {A.node(k), B.node(k), C.node(k), D.node(k), F.node(k), Ftilde.node(k),
          Q.node(k), R.node(k), Gamma.node(k), eta.node(k).col(0)};
}

bool ModelParams::time_varying() const {
  for (const Coefficient* c : {&A, &B, &C, &D, &F, &Ftilde, &Q, &R, &Gamma, &eta}) {
    if (!c->is_constant()) return true;
  }
  return false;
}

namespace {
bool same_shape(const Mat& a, const Mat& b) { return a.rows() == b.rows() && a.cols() == b.cols(); }
}  // namespace

bool ModelParams::operator==(const ModelParams& o) const {
  return n == o.n && m == o.m && grid == o.grid && A == o.A && B == o.B && C == o.C && D == o.D && F == o.F &&
         Ftilde == o.Ftilde && Q == o.Q && R == o.R && Gamma == o.Gamma && eta == o.eta && same_shape(G, o.G) &&
         G == o.G && same_shape(GammaBar, o.GammaBar) && GammaBar == o.GammaBar && etaBar.size() == o.etaBar.size() &&
         etaBar == o.etaBar && xi0.size() == o.xi0.size() && xi0 == o.xi0;
}

std::vector<std::string> validate(const ModelParams& p) {
  std::vector<std::string> report;
  auto add = [&](const std::string& line) { report.push_back(line); };
  if (p.n < 1) add("n must be >= 1");
  if (p.m < 1) add("m must be >= 1");

  struct Entry {
    const char* name;
    const Coefficient* coeff;
    int rows, cols;
    bool symmetric;
  };
  const Entry entries[] = {
      {"A", &p.A, p.n, p.n, false},      {"B", &p.B, p.n, p.m, false},          {"C", &p.C, p.n, p.n, false},
      {"D", &p.D, p.n, p.m, false},      {"F", &p.F, p.n, p.n, false},          {"Ftilde", &p.Ftilde, p.n, p.n, false},
      {"Q", &p.Q, p.n, p.n, true},       {"R", &p.R, p.m, p.m, true},           {"Gamma", &p.Gamma, p.n, p.n, false},
      {"eta", &p.eta, p.n, 1, false},
  };
  for (const auto& e : entries) {
    const auto& samples = e.coeff->samples();
    if (samples.empty()) {
      add(std::string(e.name) + ": missing");
      continue;
    }
    if (samples.size() != 1 && samples.size() != p.grid.size()) {
      add(std::string(e.name) + ": expected 1 or " + std::to_string(p.grid.size()) + " samples, got " +
          std::to_string(samples.size()));
    }
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const Mat& s = samples[k];
      std::string where = std::string(e.name) + (samples.size() > 1 ? "[" + std::to_string(k) + "]" : "");
      if (s.rows() != e.rows || s.cols() != e.cols) {
        std::ostringstream os;
        os << where << ": dimension mismatch, expected " << e.rows << "x" << e.cols << ", got " << s.rows() << "x"
           << s.cols();
        add(os.str());
        break;
      }
      if (!s.allFinite()) {
        add(where + ": non-finite entry");
        break;
      }
      if (e.symmetric && asymmetry(s) > symmetry_tolerance(s)) {
        add(where + ": asymmetry " + std::to_string(asymmetry(s)) + " exceeds tolerance");
        break;
      }
    }
  }

  auto check_fixed = [&](const char* name, const Mat& mtx, int rows, int cols, bool symmetric) {
    if (mtx.rows() != rows || mtx.cols() != cols) {
      std::ostringstream os;
      os << name << ": dimension mismatch, expected " << rows << "x" << cols << ", got " << mtx.rows() << "x"
         << mtx.cols();
      add(os.str());
      return;
    }
    if (!mtx.allFinite()) add(std::string(name) + ": non-finite entry");
    if (symmetric && asymmetry(mtx) > symmetry_tolerance(mtx)) {
      add(std::string(name) + ": asymmetry " + std::to_string(asymmetry(mtx)) + " exceeds tolerance");
    }
  };
  check_fixed("G", p.G, p.n, p.n, true);
  check_fixed("GammaBar", p.GammaBar, p.n, p.n, false);
  check_fixed("etaBar", p.etaBar, p.n, 1, false);
  check_fixed("xi0", p.xi0, p.n, 1, false);
  return report;
}

void require_valid(const ModelParams& params, const char* stage) {
  auto report = validate(params);
  if (report.empty()) return;
  std::string joined;
  for (const auto& line : report) joined += (joined.empty() ? "" : "; ") + line;
  throw Error(ErrorKind::InvalidArgument, stage, joined);
}

ModelParams make_constant_model(const ConstantModel& s) {
  ModelParams p;
  p.n = s.n;
  p.m = s.m;
  p.grid = TimeGrid(s.T, s.steps);
  auto or_zero = [](const Mat& m, int r, int c) { return m.size() == 0 ? Mat(Mat::Zero(r, c)) : m; };
  auto vor_zero = [](const Vec& v, int r) { return v.size() == 0 ? Vec(Vec::Zero(r)) : v; };
  p.A = Coefficient(or_zero(s.A, s.n, s.n));
  p.B = Coefficient(or_zero(s.B, s.n, s.m));
  p.C = Coefficient(or_zero(s.C, s.n, s.n));
  p.D = Coefficient(or_zero(s.D, s.n, s.m));
  p.F = Coefficient(or_zero(s.F, s.n, s.n));
  p.Ftilde = Coefficient(or_zero(s.Ftilde, s.n, s.n));
  p.Q = Coefficient(or_zero(s.Q, s.n, s.n));
  p.R = Coefficient(s.R.size() == 0 ? Mat(Mat::Identity(s.m, s.m)) : s.R);
  p.Gamma = Coefficient(or_zero(s.Gamma, s.n, s.n));
  p.eta = Coefficient(Mat(vor_zero(s.eta, s.n)));
  p.G = or_zero(s.G, s.n, s.n);
  p.GammaBar = or_zero(s.GammaBar, s.n, s.n);
  p.etaBar = vor_zero(s.etaBar, s.n);
  p.xi0 = vor_zero(s.xi0, s.n);
  return p;
}

ModelParams make_scalar_model(const ScalarModel& s) {
  auto one = [](double v) { return Mat::Constant(1, 1, v).eval(); };
  ConstantModel c;
  c.n = c.m = 1;
  c.T = s.T;
  c.steps = s.steps;
  c.A = one(s.A);
  c.B = one(s.B);
  c.C = one(s.C);
  c.D = one(s.D);
  c.F = one(s.F);
  c.Ftilde = one(s.Ftilde);
  c.Q = one(s.Q);
  c.R = one(s.R);
  c.G = one(s.G);
  c.Gamma = one(s.Gamma);
  c.GammaBar = one(s.GammaBar);
  c.eta = Vec::Constant(1, s.eta);
  c.etaBar = Vec::Constant(1, s.etaBar);
  c.xi0 = Vec::Constant(1, s.xi0);
  return make_constant_model(c);
}

ModelParams builtin_example_params(int steps) {
  auto m2 = [](double a, double b, double c, double d) {
    Mat out(2, 2);
    out << a, b, c, d;
    return out;
  };
  ConstantModel c;
  c.n = c.m = 2;
  c.T = 1.0;
  c.steps = steps;
  c.A = m2(0.9723, 0.9707, 0.7409, 0.0118);
  c.B = m2(0.7310, 0.7980, 0.2814, 0.6108);
  c.F = m2(0.2077, 0.4383, 0.5265, 0.2515);
  c.C = m2(0.5469, 0.9669, 0.3363, 0.8207);
  c.D = m2(0.9051, 0.8551, 0.8856, 0.4914);
  c.Ftilde = m2(0.4969, 0.5103, 0.4094, 0.2017);
  c.xi0 = Vec(2);
  c.xi0 << 0.1627, 0.6570;
  c.Gamma = m2(0.7420, 0.9669, 0.2016, 0.1553);
  c.eta = Vec(2);
  c.eta << 0.8740, 0.7733;
  c.Q = m2(0.1845, 0, 0, 0.1785);
  c.R = m2(0.6587, 0, 0, 0.8763);
  return make_constant_model(c);
}

}  // namespace mflqg
