#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wirebill/numeric/interpolate.hpp"
#include "wirebill/numeric/quadrature.hpp"
#include "wirebill/types.hpp"

namespace wirebill {

enum class CurveKind {
  Circle,
  PlanarEllipse,
  FourierConvex,
  Coil,
  SubgroupOrbit,
  FlatPoint,
  RawSamples,
};

inline const char* to_string(CurveKind k) {
  switch (k) {
    case CurveKind::Circle: return "circle";
    case CurveKind::PlanarEllipse: return "planar-ellipse";
    case CurveKind::FourierConvex: return "fourier-convex";
    case CurveKind::Coil: return "coil";
    case CurveKind::SubgroupOrbit: return "subgroup-orbit";
    case CurveKind::FlatPoint: return "flat-point";
    case CurveKind::RawSamples: return "raw-samples";
  }
  return "?";
}

/// Additive vector-valued trigonometric perturbation in the raw parameter:
/// sum over harmonics j >= 1 of cos_coeffs[j-1] cos(j w t) + sin_coeffs[j-1]
/// sin(j w t), with w = 2 pi / raw period.
struct TrigPerturbation {
  std::vector<Vec> cos_coeffs;
  std::vector<Vec> sin_coeffs;
  bool empty() const { return cos_coeffs.empty() && sin_coeffs.empty(); }
};

struct CurveSpec {
  CurveKind kind = CurveKind::Circle;
  int dimension = 2;
  bool closed = true;

  double radius = 1.0;                       // circle
  double semi_axis_a = 2.0;                  // planar-ellipse
  double semi_axis_b = 1.0;
  double base_radius = 1.0;                  // fourier-convex support function
  std::vector<double> support_cos;
  std::vector<double> support_sin;
  double coil_epsilon = 0.05;                // coil (e^{it}, eps e^{imt})
  int coil_m = 2;
  Mat subgroup_generator;                    // subgroup-orbit e^{At} seed
  Vec subgroup_seed;
  double raw_period = kTwoPi;
  double scale = 1.0;                        // flat-point
  std::vector<Vec> samples;                  // raw-samples

  TrigPerturbation perturbation;

  static CurveSpec circle(double r, int dim = 2) {
    CurveSpec s;
    s.kind = CurveKind::Circle;
    s.radius = r;
    s.dimension = dim;
    return s;
  }
  static CurveSpec ellipse(double a, double b) {
    CurveSpec s;
    s.kind = CurveKind::PlanarEllipse;
    s.semi_axis_a = a;
    s.semi_axis_b = b;
    return s;
  }
  static CurveSpec fourier(double r0, std::vector<double> cos_c,
                           std::vector<double> sin_c) {
    CurveSpec s;
    s.kind = CurveKind::FourierConvex;
    s.base_radius = r0;
    s.support_cos = std::move(cos_c);
    s.support_sin = std::move(sin_c);
    return s;
  }
  static CurveSpec coil(double eps, int m) {
    CurveSpec s;
    s.kind = CurveKind::Coil;
    s.coil_epsilon = eps;
    s.coil_m = m;
    s.dimension = 4;
    return s;
  }
  static CurveSpec subgroup_orbit(Mat a, Vec seed, double period = kTwoPi) {
    CurveSpec s;
    s.kind = CurveKind::SubgroupOrbit;
    s.subgroup_generator = std::move(a);
    s.subgroup_seed = std::move(seed);
    s.raw_period = period;
    s.dimension = static_cast<int>(s.subgroup_seed.size());
    return s;
  }
  static CurveSpec flat_point(double scale = 1.0) {
    CurveSpec s;
    s.kind = CurveKind::FlatPoint;
    s.scale = scale;
    return s;
  }
  static CurveSpec raw_samples(std::vector<Vec> pts, bool closed = true) {
    CurveSpec s;
    s.kind = CurveKind::RawSamples;
    s.samples = std::move(pts);
    s.closed = closed;
    s.dimension = s.samples.empty() ? 0 : static_cast<int>(s.samples[0].size());
    return s;
  }

  void validate() const;
};

struct CurvePoint {
  Vec position;
  std::array<Vec, 4> deriv;  // d^k gamma / dx^k for k = 1..4
  double curvature = 0.0;
  Vec normal;
  bool normal_defined = false;
  int order = 0;
};

namespace detail {

/// Raw-parameter evaluator: fills out[0..order] with position and
/// t-derivatives.
class RawCurve {
 public:
  virtual ~RawCurve() = default;
  virtual void eval(double t, int order, Vec out[5]) const = 0;
  virtual bool constant_speed() const { return false; }
};

class CircleRaw final : public RawCurve {
 public:
  CircleRaw(double r, int dim) : r_(r), dim_(dim) {}
  void eval(double t, int order, Vec out[5]) const override {
    double c = std::cos(t), s = std::sin(t);
    for (int k = 0; k <= order; ++k) {
      out[k] = Vec::Zero(dim_);
      out[k][0] = r_ * c;
      out[k][1] = r_ * s;
      const double nc = -s, ns = c;
      c = nc;
      s = ns;
    }
  }
  bool constant_speed() const override { return true; }

 private:
  double r_;
  int dim_;
};

class EllipseRaw final : public RawCurve {
 public:
  EllipseRaw(double a, double b) : a_(a), b_(b) {}
  void eval(double t, int order, Vec out[5]) const override {
    double c = std::cos(t), s = std::sin(t);
    for (int k = 0; k <= order; ++k) {
      out[k] = Vec::Zero(2);
      out[k][0] = a_ * c;
      out[k][1] = b_ * s;
      const double nc = -s, ns = c;
      c = nc;
      s = ns;
    }
  }

 private:
  double a_, b_;
};

class CoilRaw final : public RawCurve {
 public:
  CoilRaw(double eps, int m) : eps_(eps), m_(m) {}
  void eval(double t, int order, Vec out[5]) const override {
    double c1 = std::cos(t), s1 = std::sin(t);
    double cm = std::cos(m_ * t), sm = std::sin(m_ * t);
    double fm = 1.0;
    for (int k = 0; k <= order; ++k) {
      out[k] = Vec::Zero(4);
      out[k][0] = c1;
      out[k][1] = s1;
      out[k][2] = eps_ * fm * cm;
      out[k][3] = eps_ * fm * sm;
      const double n1c = -s1, n1s = c1;
      c1 = n1c;
      s1 = n1s;
      const double nmc = -sm, nms = cm;
      cm = nmc;
      sm = nms;
      fm *= static_cast<double>(m_);
    }
  }
  bool constant_speed() const override { return true; }

 private:
  double eps_;
  int m_;
};

/// Support-function curve gamma = h e_r + h' e_t. With e_r' = e_t and
/// e_t' = -e_r, writing gamma^(k) = f_k e_r + g_k e_t gives the recursion
/// (f, g) -> (f' - g, g' + f), which closes over derivatives of h:
///   f: h,  0,  -(h + h''),  -2(h' + h'''),  h - 2 h'' - 3 h''''
///   g: h', h + h'', h' + h''', h'''' - h,   h''''' - 3 h' - 2 h'''
class SupportRaw final : public RawCurve {
 public:
  SupportRaw(double r0, std::vector<double> ac, std::vector<double> as)
      : r0_(r0), ac_(std::move(ac)), as_(std::move(as)) {}

  double h_deriv(double t, int order) const {
    double v = (order == 0) ? r0_ : 0.0;
    const std::size_t terms = std::max(ac_.size(), as_.size());
    for (std::size_t idx = 0; idx < terms; ++idx) {
      const double j = static_cast<double>(idx + 1);
      const double a = idx < ac_.size() ? ac_[idx] : 0.0;
      const double b = idx < as_.size() ? as_[idx] : 0.0;
      const double jt = j * t;
      const double scale = std::pow(j, order);
      switch (order % 4) {
        case 0: v += scale * (a * std::cos(jt) + b * std::sin(jt)); break;
        case 1: v += scale * (-a * std::sin(jt) + b * std::cos(jt)); break;
        case 2: v += scale * (-a * std::cos(jt) - b * std::sin(jt)); break;
        case 3: v += scale * (a * std::sin(jt) - b * std::cos(jt)); break;
      }
    }
    return v;
  }

  void eval(double t, int order, Vec out[5]) const override {
    double h[6];
    for (int k = 0; k < 6; ++k) h[k] = (k <= order + 1) ? h_deriv(t, k) : 0.0;
    const double fs[5] = {h[0], 0.0, -(h[0] + h[2]), -2.0 * (h[1] + h[3]),
                          h[0] - 2.0 * h[2] - 3.0 * h[4]};
    const double gs[5] = {h[1], h[0] + h[2], h[1] + h[3], h[4] - h[0],
                          h[5] - 3.0 * h[1] - 2.0 * h[3]};
    const double c = std::cos(t), s = std::sin(t);
    for (int k = 0; k <= order; ++k) {
      out[k] = Vec::Zero(2);
      out[k][0] = fs[k] * c - gs[k] * s;
      out[k][1] = fs[k] * s + gs[k] * c;
    }
  }
  bool constant_speed() const override { return ac_.empty() && as_.empty(); }

 private:
  double r0_;
  std::vector<double> ac_, as_;
};

class SubgroupRaw final : public RawCurve {
 public:
  SubgroupRaw(const Mat& a, const Vec& seed) {
    const int n = static_cast<int>(seed.size());
    Eigen::MatrixXd af = a;
    Eigen::RealSchur<Eigen::MatrixXd> schur(af);
    const Eigen::MatrixXd& tmat = schur.matrixT();
    q_ = schur.matrixU();
    // skew-symmetric input: T is block diagonal with 2x2 rotation generators
    int i = 0;
    while (i < n) {
      if (i + 1 < n && std::abs(tmat(i, i + 1)) > 1e-12) {
        blocks_.push_back({i, tmat(i, i + 1)});
        i += 2;
      } else {
        i += 1;
      }
    }
    Eigen::VectorXd w = seed;
    for (int k = 0; k <= 4; ++k) {
      z_[k] = q_.transpose() * w;
      w = af * w;
    }
    dim_ = n;
  }

  void eval(double t, int order, Vec out[5]) const override {
    for (int k = 0; k <= order; ++k) {
      Vec rotated = z_[k];
      for (const auto& b : blocks_) {
        const double c = std::cos(b.omega * t), s = std::sin(b.omega * t);
        const double u = rotated[b.row], v = rotated[b.row + 1];
        rotated[b.row] = c * u + s * v;
        rotated[b.row + 1] = -s * u + c * v;
      }
      out[k] = q_ * rotated;
    }
  }
  bool constant_speed() const override { return true; }

 private:
  struct Block {
    int row;
    double omega;
  };
  Mat q_;
  std::vector<Block> blocks_;
  Vec z_[5];
  int dim_ = 0;
};

/// Planar closed curve with tangent angle theta(x) = x/s - sin(2x/s)/2.
/// Its curvature k(x) = (1 - cos(2x/s))/s vanishes quadratically at x = 0
/// and x = pi s, and the closure integral of e^{i theta} over the period
/// is exactly zero (the phase carries only even harmonics under e^{ix}).
/// The raw parameter is already arc length.
class FlatPointRaw final : public RawCurve {
 public:
  explicit FlatPointRaw(double scale) : s_(scale) {
    const int cells = 1024;
    const double period = kTwoPi * s_;
    nodes_.resize(cells + 1);
    cum_x_.assign(cells + 1, 0.0);
    cum_y_.assign(cells + 1, 0.0);
    for (int j = 0; j <= cells; ++j) nodes_[j] = period * j / cells;
    for (int j = 0; j < cells; ++j) {
      cum_x_[j + 1] = cum_x_[j] + gauss16([this](double x) { return std::cos(theta(x)); },
                                          nodes_[j], nodes_[j + 1]);
      cum_y_[j + 1] = cum_y_[j] + gauss16([this](double x) { return std::sin(theta(x)); },
                                          nodes_[j], nodes_[j + 1]);
    }
  }

  double theta(double x) const { return x / s_ - 0.5 * std::sin(2.0 * x / s_); }

  void eval(double t, int order, Vec out[5]) const override {
    out[0] = position(t);
    if (order < 1) return;
    const double th = theta(t);
    const double c = std::cos(th), sn = std::sin(th);
    const double k = (1.0 - std::cos(2.0 * t / s_)) / s_;
    const double kp = 2.0 * std::sin(2.0 * t / s_) / (s_ * s_);
    const double kpp = 4.0 * std::cos(2.0 * t / s_) / (s_ * s_ * s_);
    out[1] = Vec::Zero(2);
    out[1][0] = c;
    out[1][1] = sn;
    if (order >= 2) {
      out[2] = Vec::Zero(2);
      out[2][0] = -k * sn;
      out[2][1] = k * c;
    }
    if (order >= 3) {
      out[3] = Vec::Zero(2);
      out[3][0] = -kp * sn - k * k * c;
      out[3][1] = kp * c - k * k * sn;
    }
    if (order >= 4) {
      out[4] = Vec::Zero(2);
      out[4][0] = -(kpp - k * k * k) * sn - 3.0 * k * kp * c;
      out[4][1] = (kpp - k * k * k) * c - 3.0 * k * kp * sn;
    }
  }
  bool constant_speed() const override { return true; }

 private:
  Vec position(double t) const {
    const double w = nodes_[1] - nodes_[0];
    const auto j = static_cast<std::size_t>(std::clamp(
        t / w, 0.0, static_cast<double>(nodes_.size() - 2)));
    Vec p = Vec::Zero(2);
    p[0] = cum_x_[j] +
           gauss16([this](double x) { return std::cos(theta(x)); }, nodes_[j], t);
    p[1] = cum_y_[j] +
           gauss16([this](double x) { return std::sin(theta(x)); }, nodes_[j], t);
    return p;
  }

  double s_;
  std::vector<double> nodes_, cum_x_, cum_y_;
};

/// Vector trigonometric polynomial A0 + sum_j A_j cos(j w t) + B_j sin(j w t).
/// Exact derivatives of every order; closed raw-sample curves are fit to
/// this form with a DFT.
class TrigRaw final : public RawCurve {
 public:
  TrigRaw(Vec a0, std::vector<Vec> ac, std::vector<Vec> as, double omega0)
      : a0_(std::move(a0)), ac_(std::move(ac)), as_(std::move(as)), w0_(omega0) {}

  void eval(double t, int order, Vec out[5]) const override {
    const int dim = static_cast<int>(a0_.size());
    for (int k = 0; k <= order; ++k) out[k] = Vec::Zero(dim);
    out[0] = a0_;
    const double c1 = std::cos(w0_ * t), s1 = std::sin(w0_ * t);
    double cj = 1.0, sj = 0.0;
    for (std::size_t idx = 0; idx < ac_.size(); ++idx) {
      const double next_c = cj * c1 - sj * s1;
      const double next_s = sj * c1 + cj * s1;
      cj = next_c;
      sj = next_s;
      const double jw = static_cast<double>(idx + 1) * w0_;
      double c = cj, s = sj, fac = 1.0;
      for (int k = 0; k <= order; ++k) {
        out[k] += fac * (c * ac_[idx] + s * as_[idx]);
        const double nc = -s, ns = c;
        c = nc;
        s = ns;
        fac *= jw;
      }
    }
  }

 private:
  Vec a0_;
  std::vector<Vec> ac_, as_;
  double w0_;
};

/// Open raw-sample curve: natural cubic splines per coordinate on the
/// chord-length parameter. Orders above 3 are zero within the spline and
/// are reported as such.
class SplineRaw final : public RawCurve {
 public:
  explicit SplineRaw(const std::vector<Vec>& pts) {
    const int dim = static_cast<int>(pts[0].size());
    std::vector<double> t(pts.size());
    t[0] = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      t[i] = t[i - 1] + (pts[i] - pts[i - 1]).norm();
    t_end_ = t.back();
    coords_.reserve(dim);
    for (int d = 0; d < dim; ++d) {
      std::vector<double> y(pts.size());
      for (std::size_t i = 0; i < pts.size(); ++i) y[i] = pts[i][d];
      coords_.emplace_back(t, std::move(y));
    }
  }
  void eval(double t, int order, Vec out[5]) const override {
    const int dim = static_cast<int>(coords_.size());
    for (int k = 0; k <= order; ++k) {
      out[k] = Vec::Zero(dim);
      for (int d = 0; d < dim; ++d) out[k][d] = coords_[d].eval(t, k);
    }
  }
  double parameter_end() const { return t_end_; }

 private:
  std::vector<CubicSpline> coords_;
  double t_end_ = 1.0;
};

class PerturbedRaw final : public RawCurve {
 public:
  PerturbedRaw(std::shared_ptr<const RawCurve> base, TrigPerturbation pert,
               double omega0, int dim)
      : base_(std::move(base)), pert_(std::move(pert)), w0_(omega0), dim_(dim) {}

  void eval(double t, int order, Vec out[5]) const override {
    base_->eval(t, order, out);
    const std::size_t terms =
        std::max(pert_.cos_coeffs.size(), pert_.sin_coeffs.size());
    const Vec zero = Vec::Zero(dim_);
    for (std::size_t idx = 0; idx < terms; ++idx) {
      const double jw = static_cast<double>(idx + 1) * w0_;
      double c = std::cos(jw * t), s = std::sin(jw * t), fac = 1.0;
      const Vec& a = idx < pert_.cos_coeffs.size() ? pert_.cos_coeffs[idx] : zero;
      const Vec& b = idx < pert_.sin_coeffs.size() ? pert_.sin_coeffs[idx] : zero;
      for (int k = 0; k <= order; ++k) {
        out[k] += fac * (c * a + s * b);
        const double nc = -s, ns = c;
        c = nc;
        s = ns;
        fac *= jw;
      }
    }
  }

 private:
  std::shared_ptr<const RawCurve> base_;
  TrigPerturbation pert_;
  double w0_;
  int dim_;
};

/// Minimum distance between segments [a0,a1] and [b0,b1] in R^n.
inline double segment_distance(const Vec& a0, const Vec& a1, const Vec& b0,
                               const Vec& b1) {
  const Vec d1 = a1 - a0, d2 = b1 - b0, r = a0 - b0;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  const double c = d1.dot(r);
  const double b = d1.dot(d2);
  const double denom = a * e - b * b;
  if (denom > 1e-300) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
  t = (e > 1e-300) ? std::clamp((b * s + f) / e, 0.0, 1.0) : 0.0;
  s = (a > 1e-300) ? std::clamp((b * t - c) / a, 0.0, 1.0) : 0.0;
  return (a0 + s * d1 - (b0 + t * d2)).norm();
}

inline void check_polyline_embedding(const std::vector<Vec>& pts, bool closed,
                                     double scale) {
  const std::size_t n = pts.size();
  const std::size_t segs = closed ? n : n - 1;
  auto seg = [&](std::size_t i, Vec& p0, Vec& p1) {
    p0 = pts[i];
    p1 = pts[(i + 1) % n];
  };
  const double tol = 1e-9 * scale;
  for (std::size_t i = 0; i + 1 < segs; ++i) {
    for (std::size_t j = i + 2; j < segs; ++j) {
      if (closed && i == 0 && j == segs - 1) continue;  // adjacent around wrap
      Vec a0, a1, b0, b1;
      seg(i, a0, a1);
      seg(j, b0, b1);
      if (segment_distance(a0, a1, b0, b1) < tol)
        throw std::invalid_argument(
            "CurveSpec.samples: self-intersecting polyline (segments " +
            std::to_string(i) + " and " + std::to_string(j) + ")");
    }
  }
}

inline std::shared_ptr<const RawCurve> fit_closed_samples(
    const std::vector<Vec>& pts) {
  const std::size_t n = pts.size();
  const int dim = static_cast<int>(pts[0].size());
  const std::size_t j_max = std::min<std::size_t>(n / 2 - 1, 512);
  Vec a0 = Vec::Zero(dim);
  for (const auto& p : pts) a0 += p;
  a0 /= static_cast<double>(n);
  std::vector<Vec> ac(j_max, Vec(Vec::Zero(dim))), as(j_max, Vec(Vec::Zero(dim)));
  for (std::size_t j = 1; j <= j_max; ++j) {
    Vec cj = Vec::Zero(dim), sj = Vec::Zero(dim);
    for (std::size_t k = 0; k < n; ++k) {
      const double ang =
          kTwoPi * static_cast<double>(j) * static_cast<double>(k) /
          static_cast<double>(n);
      cj += pts[k] * std::cos(ang);
      sj += pts[k] * std::sin(ang);
    }
    ac[j - 1] = cj * (2.0 / static_cast<double>(n));
    as[j - 1] = sj * (2.0 / static_cast<double>(n));
  }
  return std::make_shared<TrigRaw>(a0, std::move(ac), std::move(as), 1.0);
}

}  // namespace detail

inline void CurveSpec::validate() const {
  if (dimension < 2 || dimension > kMaxDim)
    throw std::invalid_argument("CurveSpec.dimension: must be in [2, " +
                                std::to_string(kMaxDim) + "]");
  switch (kind) {
    case CurveKind::Circle:
      if (!(radius > 0.0))
        throw std::invalid_argument("CurveSpec.radius: must be positive");
      break;
    case CurveKind::PlanarEllipse:
      if (!(semi_axis_a > 0.0) || !(semi_axis_b > 0.0))
        throw std::invalid_argument("CurveSpec.semi_axis_a/b: must be positive");
      break;
    case CurveKind::FourierConvex:
      if (!(base_radius > 0.0))
        throw std::invalid_argument("CurveSpec.base_radius: must be positive");
      break;
    case CurveKind::Coil:
      if (coil_m < 2)
        throw std::invalid_argument("CurveSpec.coil_m: must be an integer >= 2");
      if (!(coil_epsilon >= 0.0 && coil_epsilon < 1.0))
        throw std::invalid_argument(
            "CurveSpec.coil_epsilon: must satisfy 0 <= eps < 1");
      break;
    case CurveKind::SubgroupOrbit: {
      if (subgroup_seed.size() < 2)
        throw std::invalid_argument("CurveSpec.subgroup_seed: missing or too short");
      if (subgroup_generator.rows() != subgroup_seed.size() ||
          subgroup_generator.cols() != subgroup_seed.size())
        throw std::invalid_argument(
            "CurveSpec.subgroup_generator: shape must match the seed dimension");
      const double skew = (subgroup_generator + subgroup_generator.transpose())
                              .cwiseAbs()
                              .maxCoeff();
      if (skew > 1e-12)
        throw std::invalid_argument(
            "CurveSpec.subgroup_generator: not skew-symmetric (|A + A^T|_max = " +
            std::to_string(skew) + ")");
      if (!(raw_period > 0.0))
        throw std::invalid_argument("CurveSpec.raw_period: must be positive");
      break;
    }
    case CurveKind::FlatPoint:
      if (!(scale > 0.0))
        throw std::invalid_argument("CurveSpec.scale: must be positive");
      break;
    case CurveKind::RawSamples: {
      if (samples.size() < 8)
        throw std::invalid_argument("CurveSpec.samples: need at least 8 points");
      const auto dim = samples[0].size();
      if (dim < 2 || dim > kMaxDim)
        throw std::invalid_argument("CurveSpec.samples: dimension must be in [2, " +
                                    std::to_string(kMaxDim) + "]");
      for (const auto& p : samples)
        if (p.size() != dim)
          throw std::invalid_argument("CurveSpec.samples: inconsistent dimensions");
      break;
    }
  }
  for (const auto* list : {&perturbation.cos_coeffs, &perturbation.sin_coeffs})
    for (const auto& v : *list)
      if (static_cast<int>(v.size()) != dimension)
        throw std::invalid_argument(
            "CurveSpec.perturbation: coefficient dimension mismatch");
}

/// Arc-length-parameterized curve. Immutable after construction; all
/// evaluations are pure and safe to call concurrently.
class Curve {
 public:
  static Curve build(CurveSpec spec, int resolution = 256);

  const CurveSpec& spec() const { return impl_->spec; }
  int dimension() const { return impl_->dim; }
  bool closed() const { return impl_->spec.closed; }
  double length() const { return impl_->length; }
  double raw_period() const { return impl_->raw_period; }
  bool constant_raw_speed() const { return impl_->constant_speed; }
  double raw_speed() const { return impl_->speed; }

  double arc_from_raw(double t) const {
    if (impl_->constant_speed) return impl_->speed * t;
    return impl_->chart.value(t);
  }
  double raw_from_arc(double x) const {
    if (impl_->constant_speed) return x / impl_->speed;
    return impl_->chart.inverse(x);
  }

  double reduce(double x) const {
    if (!closed()) return std::clamp(x, 0.0, length());
    const double period = length();
    double r = std::fmod(x, period);
    if (r < 0.0) r += period;
    return r;
  }

  double circular_distance(double x, double y) const {
    if (!closed()) return std::abs(y - x);
    const double d = std::abs(reduce(y) - reduce(x));
    return std::min(d, length() - d);
  }

  CurvePoint eval(double x, int order = 2) const;

  Vec position(double x) const { return eval(x, 0).position; }
  Vec tangent(double x) const { return eval(x, 1).deriv[0]; }
  double curvature(double x) const { return eval(x, 2).curvature; }

  double min_curvature() const { return impl_->min_curvature; }
  double max_curvature() const { return impl_->max_curvature; }

  /// Uniform arc-length cache of positions and tangents for grid scans.
  struct ScanTable {
    std::vector<Vec> position;
    std::vector<Vec> tangent;
    double step = 0.0;
    std::size_t size() const { return position.size(); }
  };
  const ScanTable& scan_table() const { return impl_->scan; }

 private:
  struct Impl {
    CurveSpec spec;
    std::shared_ptr<const detail::RawCurve> raw;
    int dim = 2;
    double raw_period = kTwoPi;
    bool constant_speed = false;
    double speed = 1.0;
    CumulativeChart chart;
    double length = 0.0;
    double min_curvature = 0.0, max_curvature = 0.0;
    ScanTable scan;
  };

  std::shared_ptr<const Impl> impl_;
};

inline Curve Curve::build(CurveSpec spec, int resolution) {
  spec.validate();
  if (resolution < 64)
    throw std::invalid_argument("build_curve: resolution must be >= 64");

  auto impl = std::make_shared<Impl>();
  std::shared_ptr<const detail::RawCurve> raw;
  double raw_period = kTwoPi;
  int dim = spec.dimension;

  switch (spec.kind) {
    case CurveKind::Circle:
      raw = std::make_shared<detail::CircleRaw>(spec.radius, dim);
      break;
    case CurveKind::PlanarEllipse:
      dim = 2;
      raw = std::make_shared<detail::EllipseRaw>(spec.semi_axis_a, spec.semi_axis_b);
      break;
    case CurveKind::FourierConvex: {
      dim = 2;
      auto sup = std::make_shared<detail::SupportRaw>(
          spec.base_radius, spec.support_cos, spec.support_sin);
      double min_rho = std::numeric_limits<double>::max();
      for (int i = 0; i < 2048; ++i) {
        const double t = kTwoPi * i / 2048;
        min_rho = std::min(min_rho, sup->h_deriv(t, 0) + sup->h_deriv(t, 2));
      }
      if (!(min_rho > 1e-9))
        throw std::invalid_argument(
            "CurveSpec.support_cos/support_sin: support function is not "
            "convex (min h + h'' = " + std::to_string(min_rho) + ")");
      raw = sup;
      break;
    }
    case CurveKind::Coil:
      dim = 4;
      raw = std::make_shared<detail::CoilRaw>(spec.coil_epsilon, spec.coil_m);
      break;
    case CurveKind::SubgroupOrbit:
      raw = std::make_shared<detail::SubgroupRaw>(spec.subgroup_generator,
                                                  spec.subgroup_seed);
      raw_period = spec.raw_period;
      break;
    case CurveKind::FlatPoint:
      dim = 2;
      raw = std::make_shared<detail::FlatPointRaw>(spec.scale);
      raw_period = kTwoPi * spec.scale;
      break;
    case CurveKind::RawSamples: {
      dim = static_cast<int>(spec.samples[0].size());
      double scale = 1e-12;
      for (const auto& p : spec.samples) scale = std::max(scale, p.norm());
      for (std::size_t i = 1; i < spec.samples.size(); ++i)
        if ((spec.samples[i] - spec.samples[i - 1]).norm() < 1e-12 * scale)
          throw std::invalid_argument(
              "CurveSpec.samples: zero-length segment at index " +
              std::to_string(i));
      detail::check_polyline_embedding(spec.samples, spec.closed, scale);
      if (spec.closed) {
        raw = detail::fit_closed_samples(spec.samples);
        raw_period = kTwoPi;
      } else {
        auto spl = std::make_shared<detail::SplineRaw>(spec.samples);
        raw_period = spl->parameter_end();
        raw = spl;
      }
      break;
    }
  }

  if (!spec.perturbation.empty())
    raw = std::make_shared<detail::PerturbedRaw>(raw, spec.perturbation,
                                                 kTwoPi / raw_period, dim);

  impl->spec = std::move(spec);
  impl->raw = raw;
  impl->dim = dim;
  impl->raw_period = raw_period;

  auto speed_at = [raw](double t) {
    Vec out[5];
    raw->eval(t, 1, out);
    return out[1].norm();
  };

  double min_speed = std::numeric_limits<double>::max(), max_speed = 0.0;
  for (int i = 0; i < 2048; ++i) {
    const double s = speed_at(raw_period * i / 2048);
    min_speed = std::min(min_speed, s);
    max_speed = std::max(max_speed, s);
  }
  if (!(min_speed > 1e-10 * std::max(1.0, max_speed)))
    throw std::invalid_argument(std::string("build_curve: degenerate ") +
                                to_string(impl->spec.kind) +
                                " parameterization (vanishing speed)");

  impl->constant_speed = impl->spec.perturbation.empty() && raw->constant_speed();
  if (impl->constant_speed) {
    impl->speed = speed_at(0.0);
    impl->length = impl->speed * raw_period;
  } else {
    impl->chart = CumulativeChart::build(speed_at, 0.0, raw_period, resolution);
    impl->length = impl->chart.total();
  }

  if (impl->spec.closed) {
    Vec a[5], b[5];
    raw->eval(0.0, 0, a);
    raw->eval(raw_period, 0, b);
    if ((b[0] - a[0]).norm() > 1e-8 * std::max(1.0, a[0].norm()))
      throw std::invalid_argument(std::string("build_curve: ") +
                                  to_string(impl->spec.kind) +
                                  " does not close at its raw period");
  }

  Curve curve;
  curve.impl_ = impl;
  const std::size_t scan_n =
      static_cast<std::size_t>(std::max(2048, 4 * resolution));
  impl->scan.position.resize(scan_n);
  impl->scan.tangent.resize(scan_n);
  impl->scan.step = impl->length / static_cast<double>(scan_n);
  double kmin = std::numeric_limits<double>::max(), kmax = 0.0;
  for (std::size_t i = 0; i < scan_n; ++i) {
    const auto cp = curve.eval(static_cast<double>(i) * impl->scan.step, 2);
    impl->scan.position[i] = cp.position;
    impl->scan.tangent[i] = cp.deriv[0];
    kmin = std::min(kmin, cp.curvature);
    kmax = std::max(kmax, cp.curvature);
  }
  impl->min_curvature = kmin;
  impl->max_curvature = kmax;
  return curve;
}

inline CurvePoint Curve::eval(double x, int order) const {
  if (order < 0 || order > 4)
    throw std::invalid_argument("Curve::eval: derivative order must be 0..4");
  x = reduce(x);
  const double t = raw_from_arc(x);
  Vec raw[5];
  impl_->raw->eval(t, order, raw);

  CurvePoint cp;
  cp.order = order;
  cp.position = raw[0];
  if (order == 0) return cp;

  const Vec& g1 = raw[1];
  const double s = g1.norm();
  const double tx = 1.0 / s;
  cp.deriv[0] = g1 * tx;
  if (order >= 2) {
    const Vec& g2 = raw[2];
    const double sp = g1.dot(g2) / s;
    const double txx = -sp / (s * s * s);
    cp.deriv[1] = g2 * (tx * tx) + g1 * txx;
    cp.curvature = cp.deriv[1].norm();
    if (cp.curvature > 1e-14) {
      cp.normal = cp.deriv[1] / cp.curvature;
      cp.normal_defined = true;
    } else {
      cp.curvature = 0.0;
      cp.normal = Vec::Zero(impl_->dim);
      cp.normal_defined = false;
    }
    if (order >= 3) {
      const Vec& g3 = raw[3];
      const double spp = (g2.squaredNorm() + g1.dot(g3) - sp * sp) / s;
      const double txxx = (3.0 * sp * sp - s * spp) / std::pow(s, 5);
      cp.deriv[2] = g3 * (tx * tx * tx) + 3.0 * g2 * (tx * txx) + g1 * txxx;
      if (order >= 4) {
        const Vec& g4 = raw[4];
        const double sppp = (3.0 * g2.dot(g3) + g1.dot(g4) - 3.0 * sp * spp) / s;
        const double txxxx =
            (10.0 * s * sp * spp - 15.0 * sp * sp * sp - s * s * sppp) /
            std::pow(s, 7);
        cp.deriv[3] = g4 * std::pow(tx, 4) + 6.0 * g3 * (tx * tx * txx) +
                      g2 * (3.0 * txx * txx + 4.0 * tx * txxx) + g1 * txxxx;
      }
    }
  }
  return cp;
}

}  // namespace wirebill
