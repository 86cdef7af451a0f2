#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

namespace iamcf {

/// Small vectors and matrices with inline storage (n <= 3), so norm calls in
/// the assembly loops never touch the heap.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline constexpr int kMaxDim = 3;
/// Euclidean length below which F_xi and D^2 F are reported as degenerate.
inline constexpr double kGradFloor = 1e-14;

enum class NormKind { euclidean, ellipsoidal, lq, custom };
enum class PolarMode { closed_form, numeric_sup };

std::string to_string(NormKind k);
std::string to_string(PolarMode m);

/// User-supplied anisotropy. `eval` and `grad` are mandatory; a missing
/// `hess` is replaced by central differences of `grad`, a missing `polar`
/// by the sampled supremum.
struct CustomNormFunctions {
    std::function<double(const Vec&)> eval;
    std::function<Vec(const Vec&)> grad;
    std::function<Mat(const Vec&)> hess;
    std::function<double(const Vec&)> polar;
    std::function<Vec(const Vec&)> polar_grad;
};

/// An even, 1-homogeneous, uniformly elliptic anisotropy F on R^n together
/// with its polar F°. Instances are immutable and cheap to copy.
class MinkowskiNorm {
public:
    static MinkowskiNorm euclidean(int n);
    static MinkowskiNorm ellipsoidal(const Mat& A);
    /// F(xi) = ((1-delta) |xi|_q^2 + delta |xi|^2)^(1/2).
    static MinkowskiNorm lq(int n, double q, double delta = 0.05);
    static MinkowskiNorm custom(int n, CustomNormFunctions fns, std::string label = "custom");

    int dim() const noexcept { return n_; }
    NormKind kind() const noexcept { return kind_; }
    PolarMode polar_mode() const noexcept { return polar_mode_; }
    bool has_closed_form_polar() const noexcept;

    /// Same norm with the requested polar evaluation mode. Asking for
    /// closed_form on a norm without one throws.
    MinkowskiNorm with_polar_mode(PolarMode mode) const;

    const Mat& matrix() const noexcept { return A_; }
    double q() const noexcept { return q_; }
    double smoothing() const noexcept { return delta_; }
    std::string describe() const;

    double eval(const Vec& xi) const;
    Vec grad(const Vec& xi) const;
    /// D^2 F (not D^2 of F^2/2).
    Mat hess(const Vec& xi) const;

    double polar(const Vec& x) const;
    Vec polar_grad(const Vec& x) const;

    /// Smallest eigenvalue of D^2(F^2/2) = F D^2F + F_xi F_xi^T over `samples`
    /// random unit directions.
    double ellipticity_constant(int samples = 2000, std::uint64_t seed = 7) const;

    // Fast paths for the planar assembly kernels. No dimension checks.
    double eval2(double x, double y) const;
    /// Writes F, F_xi and D^2F (row-major 2x2) for a nonzero planar argument.
    void derivs2(double x, double y, double& F, double g[2], double H[4]) const;

private:
    MinkowskiNorm() = default;
    void check_dim(const Vec& v, const char* what) const;
    double numeric_polar(const Vec& x, Vec* argmax) const;
    Vec lq_grad_N(const Vec& xi, double N) const;

    NormKind kind_ = NormKind::euclidean;
    PolarMode polar_mode_ = PolarMode::closed_form;
    int n_ = 2;
    Mat A_;
    Mat Ainv_;
    double q_ = 2.0;
    double delta_ = 0.0;
    std::string label_;
    std::shared_ptr<const CustomNormFunctions> custom_;
};

} // namespace iamcf
