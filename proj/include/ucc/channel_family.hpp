#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucc/rng.hpp"

namespace ucc {

enum class OutputKind { Finite, RealLine, RealVector };

struct OutputSpace {
    OutputKind kind = OutputKind::Finite;
    int cardinality = 2;  // finite only: m + 1 symbols
    int dim = 1;          // components per observation (1 unless RealVector)

    bool finite() const { return kind == OutputKind::Finite; }

    static OutputSpace finite_symbols(int card) {
        if (card < 2) throw std::invalid_argument("OutputSpace: finite cardinality must be >= 2");
        return {OutputKind::Finite, card, 1};
    }
    static OutputSpace real_line() { return {OutputKind::RealLine, 0, 1}; }
    static OutputSpace real_vector(int r) {
        if (r < 1) throw std::invalid_argument("OutputSpace: vector dimension must be >= 1");
        return {OutputKind::RealVector, 0, r};
    }
};

// Axis-aligned parameter box.
struct Box {
    std::vector<double> lo, hi;

    int dim() const { return int(lo.size()); }
    bool contains(std::span<const double> theta, double slack = 0.0) const {
        if (theta.size() != lo.size()) return false;
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (theta[i] < lo[i] - slack || theta[i] > hi[i] + slack) return false;
        return true;
    }
    bool interior(std::span<const double> theta, double margin) const {
        if (theta.size() != lo.size()) return false;
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (theta[i] < lo[i] + margin || theta[i] > hi[i] - margin) return false;
        return true;
    }
    double volume() const {
        double v = 1;
        for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
        return v;
    }
    static Box cube(int k, double half_width) {
        Box b;
        b.lo.assign(k, -half_width);
        b.hi.assign(k, half_width);
        return b;
    }
};

enum class ConditionTag { A, B, C };

// Gaussian evaluation frame for continuous-output quadrature: y = center + L u
// with L lower-triangular (dim x dim, row-major); |det L| supplied.
struct GaussFrame {
    std::vector<double> center;
    std::vector<double> chol;  // row-major lower triangular
    double log_det = 0.0;
    int dim = 1;
};

// Small symmetric matrix stored dense row-major.
struct SymMatrix {
    int n = 0;
    std::vector<double> a;  // n*n row-major

    double& at(int i, int j) { return a[std::size_t(i) * n + j]; }
    double at(int i, int j) const { return a[std::size_t(i) * n + j]; }
    static SymMatrix zero(int n) { return {n, std::vector<double>(std::size_t(n) * n, 0.0)}; }
};

// In-place Cholesky; returns false when the matrix is not positive definite.
bool cholesky(SymMatrix& m);
// Solve L L^T x = b given the Cholesky factor in m (lower triangle).
std::vector<double> chol_solve(const SymMatrix& chol, std::span<const double> b);
double chol_log_det(const SymMatrix& chol);  // log det of the original matrix

// Parametric channel family with per-input exponential-family structure:
// log W_theta(y|x) = log_base(x,y) + sum_j theta_sel[j] * g_j(x,y) - potential(x, theta_sel).
class ChannelFamily {
public:
    virtual ~ChannelFamily() = default;

    int input_count() const { return d_; }
    const OutputSpace& output_space() const { return space_; }
    int param_dim() const { return k_; }
    const Box& param_box() const { return box_; }
    const std::vector<Box>& nested_boxes() const { return nested_; }
    ConditionTag tag() const { return tag_; }
    const std::string& name() const { return name_; }

    int component_dim(int x) const { return int(selectors_[x].size()); }
    std::span<const int> component_selector(int x) const { return selectors_[x]; }

    // Exponential-family pieces. theta_sel has component_dim(x) entries.
    virtual void generators(int x, std::span<const double> y, std::span<double> g_out) const = 0;
    virtual double log_base(int x, std::span<const double> y) const = 0;
    virtual double potential(int x, std::span<const double> theta_sel) const = 0;

    virtual void sample(std::span<const double> theta, int x, RngStream& rng, std::span<double> y_out) const = 0;

    // theta admissibility beyond the box (e.g. positive definiteness).
    virtual bool theta_valid(std::span<const double> theta) const { return box_.contains(theta, 1e-12); }

    double log_density(std::span<const double> theta, int x, std::span<const double> y) const;

    // Finite-output fast path: per-symbol log pmf, out has `cardinality` entries.
    virtual void log_pmf(std::span<const double> theta, int x, std::span<double> out) const;

    // Fisher information of input x at theta: Hessian of the potential in the
    // selected coordinates. Default central finite differences.
    virtual SymMatrix fisher_information(std::span<const double> theta, int x) const;

    // Quadrature frame covering W_theta(.|x); finite-output families do not provide one.
    virtual GaussFrame quad_frame(std::span<const double> theta, int x) const;

    std::vector<double> select(std::span<const double> theta, int x) const {
        std::vector<double> t(selectors_[x].size());
        for (std::size_t j = 0; j < t.size(); ++j) t[j] = theta[selectors_[x][j]];
        return t;
    }

protected:
    ChannelFamily(std::string name, int d, OutputSpace space, int k, Box box, ConditionTag tag)
        : name_(std::move(name)), d_(d), space_(space), k_(k), box_(std::move(box)), tag_(tag) {}

    std::string name_;
    int d_;
    OutputSpace space_;
    int k_;
    Box box_;
    std::vector<Box> nested_;
    ConditionTag tag_;
    std::vector<std::vector<int>> selectors_;
};

// Channel family plus a parameter point inside its box.
struct ChannelPoint {
    std::shared_ptr<const ChannelFamily> family;
    std::vector<double> theta;

    ChannelPoint() = default;
    ChannelPoint(std::shared_ptr<const ChannelFamily> fam, std::vector<double> th);
};

// Example 1: finite output, logistic parametrization, k = d*m, tag A.
std::shared_ptr<ChannelFamily> make_dmc_family(int d, int m, double box_half_width = 6.0);

// Example 2: scalar Gaussian with scale/offset noise; k = 3, tag B.
// Natural parameters (1/v, a/v, b/v); precision bounded to [eps0, 1/eps0].
std::shared_ptr<ChannelFamily> make_gaussian_fading(std::vector<double> signal_points, double eps0 = 0.05,
                                                    double linear_half_width = 6.0);

// Example 3: vector Gaussian, r outputs, t-dim signal vectors; tag B.
std::shared_ptr<ChannelFamily> make_mimo_gaussian(std::vector<std::vector<double>> signal_vectors, int r,
                                                  double eps0 = 0.05, double linear_half_width = 6.0);

// Convenience: the DMC parameter vector realizing given per-input pmfs.
std::vector<double> dmc_theta_for_rows(const std::vector<std::vector<double>>& rows);
// Binary symmetric channel with crossover p as a point of make_dmc_family(2,1).
ChannelPoint make_bsc(double crossover, double box_half_width = 6.0);

}  // namespace ucc
