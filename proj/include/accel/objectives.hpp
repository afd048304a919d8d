#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "rng.hpp"

namespace accel {

/// Oracle interface behind an Objective. Implementations are immutable.
class SmoothFunction {
public:
    virtual ~SmoothFunction() = default;
    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;
    virtual Vector hess_vec(const Vector& x, const Vector& v) const = 0;
};

namespace detail {

inline std::string fmt_real(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

template <class Range>
std::string fmt_list(const Range& values) {
    std::string out = "[";
    bool first = true;
    for (double v : values) {
        if (!first) out += ',';
        out += fmt_real(v);
        first = false;
    }
    return out + "]";
}

} // namespace detail

/// A smooth objective with its curvature constants.
///
/// `mu` is the strong-convexity modulus (0 for merely convex instances) and `lip` the
/// gradient Lipschitz constant. The tag identifies the instance for cross-trajectory checks.
class Objective {
public:
    Objective(std::shared_ptr<const SmoothFunction> fn, Eigen::Index dim, double mu, double lip,
              std::optional<Vector> minimizer, std::optional<double> fmin, std::string tag)
        : fn_(std::move(fn)), dim_(dim), mu_(mu), lip_(lip), minimizer_(std::move(minimizer)),
          fmin_(fmin), tag_(std::move(tag)) {
        if (dim_ <= 0) throw InvalidSpec("objective dimension must be positive");
        if (!(lip_ > 0.0)) throw InvalidSpec("lip must be > 0");
        if (!(mu_ >= 0.0) || mu_ > lip_) throw InvalidSpec("need lip >= mu >= 0");
        if (minimizer_ && minimizer_->size() != dim_)
            throw InvalidSpec("minimizer dimension mismatch");
    }

    double value(const Vector& x) const { return fn_->value(x); }
    Vector gradient(const Vector& x) const { return fn_->gradient(x); }
    Vector hess_vec(const Vector& x, const Vector& v) const { return fn_->hess_vec(x, v); }

    Eigen::Index dim() const noexcept { return dim_; }
    double mu() const noexcept { return mu_; }
    double lip() const noexcept { return lip_; }
    bool strongly_convex() const noexcept { return mu_ > 0.0; }
    const std::optional<Vector>& minimizer() const noexcept { return minimizer_; }
    const std::optional<double>& fmin() const noexcept { return fmin_; }
    const std::string& tag() const noexcept { return tag_; }

    /// f(x) - f*, or NaN when f* is unknown.
    double f_gap(const Vector& x) const {
        return fmin_ ? value(x) - *fmin_ : std::numeric_limits<double>::quiet_NaN();
    }

    /// Copy of this objective with a (numerically located) minimizer attached.
    Objective with_minimizer(Vector xstar) const {
        const double fstar = value(xstar);
        return Objective(fn_, dim_, mu_, lip_, std::move(xstar), fstar, tag_);
    }

    template <class T>
    const T* model_as() const {
        return dynamic_cast<const T*>(fn_.get());
    }

private:
    std::shared_ptr<const SmoothFunction> fn_;
    Eigen::Index dim_;
    double mu_;
    double lip_;
    std::optional<Vector> minimizer_;
    std::optional<double> fmin_;
    std::string tag_;
};

// ---------------------------------------------------------------------------
// Quadratics

struct QuadraticSpec {
    std::vector<double> eigenvalues;
    std::uint64_t rotation_seed = 0;
    Vector offset; ///< empty means the origin
};

/// f(x) = ½ (x − c)ᵀ A (x − c) with A stored densely.
class QuadraticFunction final : public SmoothFunction {
public:
    QuadraticFunction(Matrix a, Vector offset) : a_(std::move(a)), offset_(std::move(offset)) {}

    double value(const Vector& x) const override {
        const Vector d = x - offset_;
        return 0.5 * d.dot(a_ * d);
    }
    Vector gradient(const Vector& x) const override { return a_ * (x - offset_); }
    Vector hess_vec(const Vector&, const Vector& v) const override { return a_ * v; }

    const Matrix& matrix() const noexcept { return a_; }
    const Vector& offset() const noexcept { return offset_; }

private:
    Matrix a_;
    Vector offset_;
};

inline Objective make_quadratic(const QuadraticSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.eigenvalues.size());
    if (n == 0) throw InvalidSpec("quadratic needs at least one eigenvalue");
    for (double ev : spec.eigenvalues)
        if (!(ev > 0.0) || !std::isfinite(ev))
            throw InvalidSpec("quadratic eigenvalues must be finite and > 0");
    if (n > 512) throw InvalidSpec("dense quadratics are limited to n <= 512");
    Vector offset = spec.offset.size() == 0 ? Vector::Zero(n) : spec.offset;
    if (offset.size() != n) throw InvalidSpec("quadratic offset dimension mismatch");

    const Matrix q = random_orthogonal(n, spec.rotation_seed);
    const Vector lambda = Eigen::Map<const Vector>(spec.eigenvalues.data(), n);
    Matrix a = q.transpose() * lambda.asDiagonal() * q;
    a = 0.5 * (a + a.transpose()).eval();

    const auto [lo, hi] = std::minmax_element(spec.eigenvalues.begin(), spec.eigenvalues.end());
    std::string tag = "quadratic:eig=" + detail::fmt_list(spec.eigenvalues) +
                      ":seed=" + std::to_string(spec.rotation_seed) +
                      ":offset=" + detail::fmt_list(offset);
    return Objective(std::make_shared<QuadraticFunction>(std::move(a), offset), n, *lo, *hi,
                     offset, 0.0, std::move(tag));
}

/// Eigenvector of the rotated quadratic for eigenvalue index `i` (row i of the rotation).
inline Vector quadratic_eigenvector(const QuadraticSpec& spec, Eigen::Index i) {
    const auto n = static_cast<Eigen::Index>(spec.eigenvalues.size());
    const Matrix q = random_orthogonal(n, spec.rotation_seed);
    return q.row(i).transpose();
}

/// n eigenvalues linearly spaced on [1, kappa].
inline std::vector<double> linspace_spectrum(double kappa, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {kappa};
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = 1.0 + (kappa - 1.0) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.back() = kappa;
    return out;
}

// ---------------------------------------------------------------------------
// Log-sum-exp

/// f(x) = s · log Σᵢ exp((aᵢᵀx + bᵢ)/s), evaluated with the max shift.
class LogSumExpFunction final : public SmoothFunction {
public:
    LogSumExpFunction(Matrix rows, Vector shifts, double smoothing)
        : rows_(std::move(rows)), shifts_(std::move(shifts)), smoothing_(smoothing) {}

    double value(const Vector& x) const override {
        const Vector z = scaled(x);
        const double zmax = z.maxCoeff();
        return smoothing_ * (zmax + std::log((z.array() - zmax).exp().sum()));
    }

    Vector gradient(const Vector& x) const override { return rows_.transpose() * weights(x); }

    Vector hess_vec(const Vector& x, const Vector& v) const override {
        const Vector p = weights(x);
        const Vector av = rows_ * v;
        const Vector inner = p.cwiseProduct(av) - p * p.dot(av);
        return rows_.transpose() * inner / smoothing_;
    }

    const Matrix& rows() const noexcept { return rows_; }

private:
    Vector scaled(const Vector& x) const { return (rows_ * x + shifts_) / smoothing_; }

    Vector weights(const Vector& x) const {
        const Vector z = scaled(x);
        Vector p = (z.array() - z.maxCoeff()).exp().matrix();
        return p / p.sum();
    }

    Matrix rows_;
    Vector shifts_;
    double smoothing_;
};

/// Convex (mu = 0) log-sum-exp. `lip` is the bound max‖aᵢ‖²/s.
inline Objective make_log_sum_exp(const Matrix& rows, const Vector& shifts, double smoothing) {
    if (!(smoothing > 0.0)) throw InvalidSpec("log-sum-exp smoothing must be > 0");
    if (rows.rows() < 2) throw InvalidSpec("log-sum-exp needs at least two rows");
    if (shifts.size() != rows.rows()) throw InvalidSpec("log-sum-exp shifts length mismatch");
    if (rows.cols() < 1) throw InvalidSpec("log-sum-exp needs at least one column");
    const double lip = rows.rowwise().squaredNorm().maxCoeff() / smoothing;
    if (!(lip > 0.0)) throw InvalidSpec("log-sum-exp rows must not all vanish");

    std::string tag = "log_sum_exp:rows=";
    for (Eigen::Index i = 0; i < rows.rows(); ++i) tag += detail::fmt_list(rows.row(i));
    tag += ":shifts=" + detail::fmt_list(shifts) + ":s=" + detail::fmt_real(smoothing);
    return Objective(std::make_shared<LogSumExpFunction>(rows, shifts, smoothing), rows.cols(),
                     0.0, lip, std::nullopt, std::nullopt, std::move(tag));
}

/// Seeded log-sum-exp: Gaussian rows plus their negations (bounded below), Gaussian shifts.
inline Objective make_seeded_log_sum_exp(Eigen::Index dim, Eigen::Index half_rows,
                                         std::uint64_t seed, double smoothing) {
    Rng rng(seed);
    const Matrix half = rng.normal_matrix(half_rows, dim);
    Matrix rows(2 * half_rows, dim);
    rows << half, -half;
    const Vector shifts = rng.normal_vector(2 * half_rows);
    return make_log_sum_exp(rows, shifts, smoothing);
}

// ---------------------------------------------------------------------------
// Piecewise-linear gradient in one dimension

struct PiecewiseGradient1DSpec {
    std::vector<double> breakpoints;
    std::vector<double> slopes;
    /// Per-segment gradient intercepts. When absent they follow from continuity with g(0) = 0
    /// on the first segment.
    std::optional<std::vector<double>> intercepts;
};

/// Segment i covers [b_{i−1}, b_i); gradient sᵢx + cᵢ, value sᵢx²/2 + cᵢx + dᵢ with d₀ = 0 and
/// dᵢ chosen so f is continuous. The second derivative at a breakpoint uses the left segment.
class PiecewiseGradient1DFunction final : public SmoothFunction {
public:
    PiecewiseGradient1DFunction(std::vector<double> breakpoints, std::vector<double> slopes,
                                std::vector<double> intercepts)
        : breaks_(std::move(breakpoints)), slopes_(std::move(slopes)),
          intercepts_(std::move(intercepts)), consts_(slopes_.size(), 0.0) {
        for (std::size_t i = 1; i < slopes_.size(); ++i) {
            const double b = breaks_[i - 1];
            const double left = 0.5 * slopes_[i - 1] * b * b + intercepts_[i - 1] * b + consts_[i - 1];
            consts_[i] = left - (0.5 * slopes_[i] * b * b + intercepts_[i] * b);
        }
    }

    double value(const Vector& x) const override {
        const double t = x[0];
        const std::size_t i = segment(t);
        return 0.5 * slopes_[i] * t * t + intercepts_[i] * t + consts_[i];
    }

    Vector gradient(const Vector& x) const override {
        const double t = x[0];
        return Vector::Constant(1, piece_gradient(segment(t), t));
    }

    Vector hess_vec(const Vector& x, const Vector& v) const override {
        const double t = x[0];
        std::size_t i = segment(t);
        if (i > 0 && t == breaks_[i - 1]) --i;
        return Vector::Constant(1, slopes_[i] * v[0]);
    }

    double piece_gradient(std::size_t segment_index, double t) const {
        return slopes_[segment_index] * t + intercepts_[segment_index];
    }

    /// Largest jump |g_right(b) − g_left(b)| over the breakpoints.
    double max_gradient_jump() const {
        double jump = 0.0;
        for (std::size_t i = 0; i < breaks_.size(); ++i) {
            const double b = breaks_[i];
            jump = std::max(jump, std::abs(piece_gradient(i + 1, b) - piece_gradient(i, b)));
        }
        return jump;
    }

    const std::vector<double>& breakpoints() const noexcept { return breaks_; }
    const std::vector<double>& slopes() const noexcept { return slopes_; }
    const std::vector<double>& intercepts() const noexcept { return intercepts_; }

    /// Zero of the gradient if some segment contains one.
    std::optional<double> stationary_point() const {
        for (std::size_t i = 0; i < slopes_.size(); ++i) {
            const double root = -intercepts_[i] / slopes_[i];
            const double lo = i == 0 ? -std::numeric_limits<double>::infinity() : breaks_[i - 1];
            const double hi = i == breaks_.size() ? std::numeric_limits<double>::infinity() : breaks_[i];
            if (root >= lo && root < hi) return root;
        }
        return std::nullopt;
    }

private:
    std::size_t segment(double t) const {
        return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), t) -
                                        breaks_.begin());
    }

    std::vector<double> breaks_;
    std::vector<double> slopes_;
    std::vector<double> intercepts_;
    std::vector<double> consts_;
};

inline Objective make_piecewise_1d(const PiecewiseGradient1DSpec& spec) {
    const auto& b = spec.breakpoints;
    const auto& s = spec.slopes;
    if (s.size() != b.size() + 1) throw InvalidSpec("piecewise spec needs one more slope than breakpoints");
    for (double v : s)
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidSpec("piecewise slopes must be finite and > 0");
    for (std::size_t i = 1; i < b.size(); ++i)
        if (!(b[i] > b[i - 1])) throw InvalidSpec("piecewise breakpoints must be strictly increasing");

    std::vector<double> c;
    if (spec.intercepts) {
        c = *spec.intercepts;
        if (c.size() != s.size()) throw InvalidSpec("piecewise intercepts length mismatch");
    } else {
        c.assign(s.size(), 0.0);
        for (std::size_t i = 1; i < s.size(); ++i) c[i] = c[i - 1] + (s[i - 1] - s[i]) * b[i - 1];
    }

    auto fn = std::make_shared<PiecewiseGradient1DFunction>(b, s, c);
    std::optional<Vector> xstar;
    std::optional<double> fstar;
    if (auto root = fn->stationary_point()) {
        xstar = Vector::Constant(1, *root);
        fstar = fn->value(*xstar);
    }
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    std::string tag = "piecewise_1d:b=" + detail::fmt_list(b) + ":s=" + detail::fmt_list(s) +
                      ":c=" + detail::fmt_list(c);
    return Objective(std::move(fn), 1, *lo, *hi, std::move(xstar), fstar, std::move(tag));
}

/// Slopes of the canonical heavy-ball counterexample.
inline constexpr double kCounterexampleSlopes[3] = {25.0, 1.0, 25.0};

/// ∇f = 25x (x<1), x+24 (1≤x<2), 25x−24 (x≥2): mu = 1, lip = 25, x* = 0.
///
/// The gradient intercepts are pinned at (0, 24, −24); passing other slopes keeps them, so
/// a corrupted slope triple yields a discontinuous gradient (used as a negative control).
inline Objective make_counterexample_1d(std::vector<double> slopes = {25.0, 1.0, 25.0}) {
    return make_piecewise_1d({{1.0, 2.0}, std::move(slopes), std::vector<double>{0.0, 24.0, -24.0}});
}

// ---------------------------------------------------------------------------

inline double condition_number(const Objective& obj) {
    if (!obj.strongly_convex())
        throw Inapplicable("condition number is not well defined for mu = 0");
    return obj.lip() / obj.mu();
}

/// Max relative deviation of the gradient and Hessian-vector oracles from central differences.
///
/// The difference step is h·(1 + ‖x‖). Gradient: |fd − g| / (1 + |g|) per coordinate.
/// Hessian: the i-th column (∇f(x + δeᵢ) − ∇f(x − δeᵢ))/2δ against H·eᵢ, same scaling.
inline double check_gradient(const Objective& obj, const Vector& x, double h) {
    if (!(h > 0.0)) throw InvalidSpec("finite-difference step must be > 0");
    const Eigen::Index n = obj.dim();
    const double delta = h * (1.0 + x.norm());
    const Vector g = obj.gradient(x);
    double worst = 0.0;
    Vector xp = x, xm = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        xp[i] = x[i] + delta;
        xm[i] = x[i] - delta;
        const double fd = (obj.value(xp) - obj.value(xm)) / (xp[i] - xm[i]);
        worst = std::max(worst, std::abs(fd - g[i]) / (1.0 + std::abs(g[i])));

        const Vector hfd = (obj.gradient(xp) - obj.gradient(xm)) / (xp[i] - xm[i]);
        const Vector hv = obj.hess_vec(x, Vector::Unit(n, i));
        const Vector dev = (hfd - hv).cwiseAbs().cwiseQuotient((1.0 + hv.array().abs()).matrix());
        worst = std::max(worst, dev.maxCoeff());

        xp[i] = x[i];
        xm[i] = x[i];
    }
    return worst;
}

/// Attach a minimizer found by gradient descent (step 1/lip) from `start`.
/// Stops once ‖∇f‖ ≤ grad_tol or after max_iters steps.
inline Objective locate_minimizer(const Objective& obj, const Vector& start,
                                  std::size_t max_iters = 1'000'000, double grad_tol = 1e-13) {
    Vector x = start;
    const double step = 1.0 / obj.lip();
    for (std::size_t k = 0; k < max_iters; ++k) {
        const Vector g = obj.gradient(x);
        if (g.norm() <= grad_tol) break;
        x -= step * g;
    }
    return obj.with_minimizer(std::move(x));
}

} // namespace accel
