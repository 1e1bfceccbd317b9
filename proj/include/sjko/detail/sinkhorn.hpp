#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "sjko/measures.hpp"
#include "sjko/ot.hpp"

namespace sjko::detail {

// Log-domain kernel operations for the squared-distance cost between a
// source and a target point set.
//   softmin_rows(h)_i = -eps log sum_j exp((h_j - C_ij)/eps)
//   softmin_cols(h)_j = -eps log sum_i exp((h_i - C_ij)/eps)
class GibbsOperator {
public:
    virtual ~GibbsOperator() = default;
    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;
    virtual double cost(std::size_t i, std::size_t j) const = 0;
    virtual double max_cost() const = 0;
    virtual void softmin_rows(std::span<const double> h, double eps, std::span<double> out) const = 0;
    virtual void softmin_cols(std::span<const double> h, double eps, std::span<double> out) const = 0;
    // Conditional mean of (y - x) given source i under weights exp((h_j - C_ij)/eps).
    virtual void mean_displacement(std::span<const double> h, double eps,
                                   std::vector<std::array<double, 2>>& out) const = 0;
    virtual std::array<double, 2> source_point(std::size_t i) const = 0;
};

// Same grid on both sides; the cost separates across axes, with the
// nearest-image distance on periodic axes.
class GridGibbs final : public GibbsOperator {
public:
    explicit GridGibbs(const Domain& d);

    std::size_t rows() const override { return n_; }
    std::size_t cols() const override { return n_; }
    double cost(std::size_t i, std::size_t j) const override;
    double max_cost() const override { return max_cost_; }
    void softmin_rows(std::span<const double> h, double eps, std::span<double> out) const override;
    void softmin_cols(std::span<const double> h, double eps, std::span<double> out) const override {
        softmin_rows(h, eps, out);
    }
    void mean_displacement(std::span<const double> h, double eps,
                           std::vector<std::array<double, 2>>& out) const override;
    std::array<double, 2> source_point(std::size_t i) const override { return d_.point(i); }

private:
    Domain d_;
    std::size_t n_;
    int nx_, ny_;
    std::vector<double> cx_, cy_;  // cx_[ix*nx + jx]
    std::vector<double> dx_, dy_;  // signed displacement y - x per axis
    double max_cost_ = 0.0;
    mutable std::vector<double> scratch_, stage_;
};

class DenseGibbs final : public GibbsOperator {
public:
    DenseGibbs(const std::vector<std::array<double, 2>>& x, const std::vector<std::array<double, 2>>& y);

    std::size_t rows() const override { return n_; }
    std::size_t cols() const override { return m_; }
    double cost(std::size_t i, std::size_t j) const override { return c_[i * m_ + j]; }
    double max_cost() const override { return max_cost_; }
    void softmin_rows(std::span<const double> h, double eps, std::span<double> out) const override;
    void softmin_cols(std::span<const double> h, double eps, std::span<double> out) const override;
    void mean_displacement(std::span<const double> h, double eps,
                           std::vector<std::array<double, 2>>& out) const override;
    std::array<double, 2> source_point(std::size_t i) const override { return x_[i]; }

private:
    std::vector<std::array<double, 2>> x_, y_;
    std::size_t n_, m_;
    std::vector<double> c_;
    double max_cost_ = 0.0;
};

struct SinkhornState {
    std::vector<double> f, g;
    int iterations = 0;
    double marginal_error = 0.0;
    bool converged = false;
    double value = 0.0;  // dual objective <a,f> + <b,g>
};

// Balanced problem between weights a (rows) and b (cols).
SinkhornState sinkhorn(const GibbsOperator& K, std::span<const double> a, std::span<const double> b,
                       double eps, const EntropicOptions& opt, const SinkhornState* warm = nullptr);

// OT_eps(a, a) through the averaged symmetric fixed point; only f is filled.
SinkhornState sinkhorn_symmetric(const GibbsOperator& K, std::span<const double> a, double eps,
                                 const EntropicOptions& opt);

// Decreasing eps schedule ending exactly at eps.
std::vector<double> eps_schedule(double eps, double start, const EntropicOptions& opt);

// Stable log-sum-exp of the given arguments (-inf entries allowed).
double log_sum_exp(std::span<const double> args);

}  // namespace sjko::detail
