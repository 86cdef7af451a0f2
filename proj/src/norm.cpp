#include "iamcf/norm.hpp"

#include "iamcf/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace iamcf {

namespace {

constexpr int kSamplesPerDim = 64;

void require_nondegenerate(const Vec& xi)
{
    if (!(xi.norm() >= kGradFloor)) {
        std::ostringstream os;
        os << "derivative requested at |xi| = " << xi.norm() << " below floor " << kGradFloor;
        throw DegenerateGradient(os.str());
    }
}

double sgn(double x) { return (x > 0) - (x < 0); }

/// Quasi-uniform points on S^2 (Fibonacci lattice).
Vec fibonacci_dir(int k, int count)
{
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    double z = 1.0 - 2.0 * (k + 0.5) / count;
    double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden * k;
    Vec d(3);
    d << rad * std::cos(phi), rad * std::sin(phi), z;
    return d;
}

} // namespace

std::string to_string(NormKind k)
{
    switch (k) {
    case NormKind::euclidean: return "euclidean";
    case NormKind::ellipsoidal: return "ellipsoidal";
    case NormKind::lq: return "lq";
    case NormKind::custom: return "custom";
    }
    return "unknown";
}

std::string to_string(PolarMode m)
{
    return m == PolarMode::closed_form ? "closed_form" : "numeric_sup";
}

MinkowskiNorm MinkowskiNorm::euclidean(int n)
{
    if (n < 2 || n > kMaxDim) throw DimensionMismatch("norm dimension must be 2 or 3");
    MinkowskiNorm f;
    f.kind_ = NormKind::euclidean;
    f.n_ = n;
    f.A_ = Mat::Identity(n, n);
    f.Ainv_ = Mat::Identity(n, n);
    f.label_ = "euclidean";
    return f;
}

MinkowskiNorm MinkowskiNorm::ellipsoidal(const Mat& A)
{
    const int n = static_cast<int>(A.rows());
    if (A.rows() != A.cols() || n < 2 || n > kMaxDim)
        throw DimensionMismatch("ellipsoidal norm needs a square 2x2 or 3x3 matrix");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * A.cwiseAbs().maxCoeff())
        throw Error("ellipsoidal norm matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw Error("ellipsoidal norm matrix must be positive definite");
    MinkowskiNorm f;
    f.kind_ = NormKind::ellipsoidal;
    f.n_ = n;
    f.A_ = A;
    f.Ainv_ = A.inverse();
    f.label_ = "ellipsoidal";
    return f;
}

MinkowskiNorm MinkowskiNorm::lq(int n, double q, double delta)
{
    if (n < 2 || n > kMaxDim) throw DimensionMismatch("norm dimension must be 2 or 3");
    if (!(q > 1.0)) throw Error("lq norm needs q > 1");
    if (!(delta >= 0.0 && delta <= 1.0)) throw Error("lq smoothing must lie in [0, 1]");
    MinkowskiNorm f;
    f.kind_ = NormKind::lq;
    f.n_ = n;
    f.q_ = q;
    f.delta_ = delta;
    f.A_ = Mat::Identity(n, n);
    f.polar_mode_ = PolarMode::numeric_sup;
    f.label_ = "lq";
    return f;
}

MinkowskiNorm MinkowskiNorm::custom(int n, CustomNormFunctions fns, std::string label)
{
    if (n < 2 || n > kMaxDim) throw DimensionMismatch("norm dimension must be 2 or 3");
    if (!fns.eval || !fns.grad) throw Error("custom norm must supply eval and grad");
    MinkowskiNorm f;
    f.kind_ = NormKind::custom;
    f.n_ = n;
    f.A_ = Mat::Identity(n, n);
    f.polar_mode_ = fns.polar ? PolarMode::closed_form : PolarMode::numeric_sup;
    f.custom_ = std::make_shared<const CustomNormFunctions>(std::move(fns));
    f.label_ = std::move(label);
    return f;
}

bool MinkowskiNorm::has_closed_form_polar() const noexcept
{
    switch (kind_) {
    case NormKind::euclidean:
    case NormKind::ellipsoidal: return true;
    case NormKind::lq: return false;
    case NormKind::custom: return static_cast<bool>(custom_->polar);
    }
    return false;
}

MinkowskiNorm MinkowskiNorm::with_polar_mode(PolarMode mode) const
{
    if (mode == PolarMode::closed_form && !has_closed_form_polar())
        throw Error("norm '" + label_ + "' has no closed-form polar");
    MinkowskiNorm f = *this;
    f.polar_mode_ = mode;
    return f;
}

std::string MinkowskiNorm::describe() const
{
    std::ostringstream os;
    os << label_ << "(n=" << n_;
    if (kind_ == NormKind::ellipsoidal) {
        os << ", A=[";
        for (int i = 0; i < n_; ++i) {
            os << (i ? ";" : "");
            for (int j = 0; j < n_; ++j) os << (j ? "," : "") << A_(i, j);
        }
        os << "]";
    }
    if (kind_ == NormKind::lq) os << ", q=" << q_ << ", delta=" << delta_;
    os << ", polar=" << to_string(polar_mode_) << ")";
    return os.str();
}

void MinkowskiNorm::check_dim(const Vec& v, const char* what) const
{
    if (v.size() != n_) {
        std::ostringstream os;
        os << what << ": vector of size " << v.size() << " given to a norm on R^" << n_;
        throw DimensionMismatch(os.str());
    }
}

double MinkowskiNorm::eval(const Vec& xi) const
{
    check_dim(xi, "eval");
    switch (kind_) {
    case NormKind::euclidean: return xi.norm();
    case NormKind::ellipsoidal: return std::sqrt(std::max(0.0, xi.dot(A_ * xi)));
    case NormKind::lq: {
        double s = 0.0;
        const double m = xi.cwiseAbs().maxCoeff();
        if (m == 0.0) return 0.0;
        for (int i = 0; i < n_; ++i) s += std::pow(std::abs(xi[i]) / m, q_);
        const double N = m * std::pow(s, 1.0 / q_);
        return std::sqrt((1.0 - delta_) * N * N + delta_ * xi.squaredNorm());
    }
    case NormKind::custom:
        if (xi.isZero(0.0)) return 0.0;
        return custom_->eval(xi);
    }
    return 0.0;
}

Vec MinkowskiNorm::lq_grad_N(const Vec& xi, double N) const
{
    Vec g(n_);
    for (int i = 0; i < n_; ++i) g[i] = sgn(xi[i]) * std::pow(std::abs(xi[i]) / N, q_ - 1.0);
    return g;
}

Vec MinkowskiNorm::grad(const Vec& xi) const
{
    check_dim(xi, "grad");
    require_nondegenerate(xi);
    switch (kind_) {
    case NormKind::euclidean: return xi / xi.norm();
    case NormKind::ellipsoidal: {
        Vec Ax = A_ * xi;
        return Ax / std::sqrt(xi.dot(Ax));
    }
    case NormKind::lq: {
        Vec a = xi.cwiseAbs();
        const double F = eval(xi);
        const double Nq = [&] {
            const double m = a.maxCoeff();
            double s = 0.0;
            for (int i = 0; i < n_; ++i) s += std::pow(a[i] / m, q_);
            return m * std::pow(s, 1.0 / q_);
        }();
        Vec dPhi = 2.0 * (1.0 - delta_) * Nq * lq_grad_N(xi, Nq) + 2.0 * delta_ * xi;
        return dPhi / (2.0 * F);
    }
    case NormKind::custom: return custom_->grad(xi);
    }
    return xi;
}

Mat MinkowskiNorm::hess(const Vec& xi) const
{
    check_dim(xi, "hess");
    require_nondegenerate(xi);
    switch (kind_) {
    case NormKind::euclidean: {
        const double r = xi.norm();
        Vec e = xi / r;
        return (Mat::Identity(n_, n_) - e * e.transpose()) / r;
    }
    case NormKind::ellipsoidal: {
        const double F = eval(xi);
        Vec g = A_ * xi / F;
        return (A_ - g * g.transpose()) / F;
    }
    case NormKind::lq: {
        Vec a = xi.cwiseAbs();
        const double m = a.maxCoeff();
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += std::pow(a[i] / m, q_);
        const double Nq = m * std::pow(s, 1.0 / q_);
        Vec gN = lq_grad_N(xi, Nq);
        // D^2 N = (q-1)/N [diag(|xi_i/N|^(q-2)) - gN gN^T]
        Mat HN = -gN * gN.transpose();
        const double tiny = 1e-12 * m;
        for (int i = 0; i < n_; ++i) HN(i, i) += std::pow(std::max(a[i], tiny) / Nq, q_ - 2.0);
        HN *= (q_ - 1.0) / Nq;
        Mat HPhi = 2.0 * (1.0 - delta_) * (gN * gN.transpose() + Nq * HN)
                   + 2.0 * delta_ * Mat::Identity(n_, n_);
        const double F = eval(xi);
        Vec gF = (2.0 * (1.0 - delta_) * Nq * gN + 2.0 * delta_ * xi) / (2.0 * F);
        return (0.5 * HPhi - gF * gF.transpose()) / F;
    }
    case NormKind::custom: {
        if (custom_->hess) return custom_->hess(xi);
        const double eps = 1e-6 * xi.norm();
        Mat H(n_, n_);
        for (int j = 0; j < n_; ++j) {
            Vec e = Vec::Zero(n_);
            e[j] = eps;
            H.col(j) = (custom_->grad(xi + e) - custom_->grad(xi - e)) / (2.0 * eps);
        }
        return 0.5 * (H + H.transpose());
    }
    }
    return Mat::Zero(n_, n_);
}

double MinkowskiNorm::numeric_polar(const Vec& x, Vec* argmax) const
{
    const double xn = x.norm();
    if (xn == 0.0) {
        if (argmax) throw DegenerateGradient("polar gradient requested at the origin");
        return 0.0;
    }
    if (n_ == 2) {
        // f(theta) = <d, x> / F(d) on the unit circle; refine the best sample by
        // bisection on f'(theta), which changes sign across the maximum.
        auto dir = [](double t) {
            Vec d(2);
            d << std::cos(t), std::sin(t);
            return d;
        };
        auto fval = [&](double t) {
            Vec d = dir(t);
            return d.dot(x) / eval(d);
        };
        auto fder = [&](double t) {
            Vec d = dir(t);
            Vec dd(2);
            dd << -d[1], d[0];
            const double F = eval(d);
            const double f = d.dot(x) / F;
            return (dd.dot(x) - f * grad(d).dot(dd)) / F;
        };
        const int count = 2 * n_ * kSamplesPerDim;
        const double step = 2.0 * std::numbers::pi / count;
        int best = 0;
        double bestv = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < count; ++k) {
            const double v = fval(k * step);
            if (v > bestv) {
                bestv = v;
                best = k;
            }
        }
        double lo = (best - 1) * step, hi = (best + 1) * step;
        double flo = fder(lo);
        double t = best * step;
        if (flo > 0.0 && fder(hi) < 0.0) {
            for (int it = 0; it < 80 && hi - lo > 1e-17 * std::max(1.0, std::abs(lo)); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = fder(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                (fm > 0.0 ? lo : hi) = mid;
            }
            t = 0.5 * (lo + hi);
        }
        Vec d = dir(t);
        const double F = eval(d);
        if (argmax) *argmax = d / F;
        return std::max(bestv, d.dot(x) / F);
    }

    // n = 3: best Fibonacci sample, then tangential gradient ascent.
    const int count = 2 * n_ * kSamplesPerDim;
    Vec d = fibonacci_dir(0, count);
    double bestv = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < count; ++k) {
        Vec c = fibonacci_dir(k, count);
        const double v = c.dot(x) / eval(c);
        if (v > bestv) {
            bestv = v;
            d = c;
        }
    }
    auto value = [&](const Vec& c) { return c.dot(x) / eval(c); };
    double f = value(d);
    double lr = 0.1 / xn;
    for (int it = 0; it < 400; ++it) {
        const double F = eval(d);
        Vec g = (x * F - d.dot(x) * grad(d)) / (F * F);
        g -= g.dot(d) * d;
        if (g.norm() <= 1e-15 * xn) break;
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls) {
            Vec c = (d + lr * g).normalized();
            const double fc = value(c);
            if (fc > f) {
                d = c;
                f = fc;
                lr *= 2.0;
                moved = true;
                break;
            }
            lr *= 0.5;
        }
        if (!moved) break;
    }
    if (argmax) *argmax = d / eval(d);
    return f;
}

double MinkowskiNorm::polar(const Vec& x) const
{
    check_dim(x, "polar");
    if (polar_mode_ == PolarMode::numeric_sup) return numeric_polar(x, nullptr);
    switch (kind_) {
    case NormKind::euclidean: return x.norm();
    case NormKind::ellipsoidal: return std::sqrt(std::max(0.0, x.dot(Ainv_ * x)));
    case NormKind::custom: return custom_->polar(x);
    case NormKind::lq: break;
    }
    return numeric_polar(x, nullptr);
}

Vec MinkowskiNorm::polar_grad(const Vec& x) const
{
    check_dim(x, "polar_grad");
    require_nondegenerate(x);
    if (polar_mode_ == PolarMode::closed_form) {
        switch (kind_) {
        case NormKind::euclidean: return x / x.norm();
        case NormKind::ellipsoidal: {
            Vec Bx = Ainv_ * x;
            return Bx / std::sqrt(x.dot(Bx));
        }
        case NormKind::custom:
            if (custom_->polar_grad) return custom_->polar_grad(x);
            break;
        case NormKind::lq: break;
        }
    }
    // The maximiser of <xi, x> over {F <= 1} is the gradient of F° at x.
    Vec xi;
    numeric_polar(x, &xi);
    return xi;
}

double MinkowskiNorm::ellipticity_constant(int samples, std::uint64_t seed) const
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    double lam = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        Vec xi(n_);
        for (int i = 0; i < n_; ++i) xi[i] = nd(rng);
        xi.normalize();
        const double F = eval(xi);
        Vec g = grad(xi);
        Mat M = F * hess(xi) + g * g.transpose();
        Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
        lam = std::min(lam, es.eigenvalues().minCoeff());
    }
    return lam;
}

double MinkowskiNorm::eval2(double x, double y) const
{
    switch (kind_) {
    case NormKind::euclidean: return std::hypot(x, y);
    case NormKind::ellipsoidal:
        return std::sqrt(std::max(0.0, A_(0, 0) * x * x + 2.0 * A_(0, 1) * x * y + A_(1, 1) * y * y));
    default: {
        Vec v(2);
        v << x, y;
        return eval(v);
    }
    }
}

void MinkowskiNorm::derivs2(double x, double y, double& F, double g[2], double H[4]) const
{
    switch (kind_) {
    case NormKind::euclidean: {
        F = std::hypot(x, y);
        g[0] = x / F;
        g[1] = y / F;
        H[0] = (1.0 - g[0] * g[0]) / F;
        H[1] = H[2] = -g[0] * g[1] / F;
        H[3] = (1.0 - g[1] * g[1]) / F;
        return;
    }
    case NormKind::ellipsoidal: {
        const double a = A_(0, 0), b = A_(0, 1), c = A_(1, 1);
        const double ax = a * x + b * y, ay = b * x + c * y;
        F = std::sqrt(x * ax + y * ay);
        g[0] = ax / F;
        g[1] = ay / F;
        H[0] = (a - g[0] * g[0]) / F;
        H[1] = H[2] = (b - g[0] * g[1]) / F;
        H[3] = (c - g[1] * g[1]) / F;
        return;
    }
    default: {
        // Evaluated on the unit circle and rescaled by homogeneity.
        const double r = std::hypot(x, y);
        Vec v(2);
        v << x, y;
        if (r > 0.0) v /= r;
        F = r * eval(v);
        Vec gv = grad(v);
        Mat Hv = hess(v) / r;
        g[0] = gv[0];
        g[1] = gv[1];
        H[0] = Hv(0, 0);
        H[1] = Hv(0, 1);
        H[2] = Hv(1, 0);
        H[3] = Hv(1, 1);
        return;
    }
    }
}

} // namespace iamcf
