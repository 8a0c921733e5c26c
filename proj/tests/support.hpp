#pragma once

// Test-side generators and oracles. Randomness here comes from std::mt19937_64,
// independent of the library's keyed generator.

#include "ampsdp/ensembles.hpp"
#include "ampsdp/forest.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace support {

struct gen {
    explicit gen(std::uint64_t seed) : eng(seed) {}

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
    bool coin() { return integer(0, 1) == 1; }

    std::mt19937_64 eng;
};

// Dense copy read entry by entry through operator().
inline Eigen::MatrixXd dense_of(const ampsdp::symmetric_matrix& x)
{
    Eigen::MatrixXd m(x.size(), x.size());
    for (int i = 0; i < x.size(); ++i)
        for (int j = 0; j < x.size(); ++j)
            m(i, j) = x(i, j);
    return m;
}

// Gaussian Wigner matrix with entry variance 1/n drawn from the test generator.
inline ampsdp::symmetric_matrix wigner(int n, gen& g)
{
    ampsdp::symmetric_matrix x(n);
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            x.set(i, j, s * g.normal());
    return x;
}

// Random rooted tree with exactly `degree` edges, built through the public constructors.
inline ampsdp::tree random_tree(gen& g, int degree)
{
    using ampsdp::tree;
    if (degree == 0)
        return tree::empty();
    if (degree == 1 || g.coin())
        return tree::reroot(random_tree(g, degree - 1));
    const int left = g.integer(1, degree - 1);
    return tree::graft(random_tree(g, left), random_tree(g, degree - left));
}

// Value of a tree from its branch structure: the entrywise product over branches of X * value(branch).
inline Eigen::VectorXd tree_value_oracle(const ampsdp::tree& t, const Eigen::MatrixXd& x)
{
    Eigen::VectorXd out = Eigen::VectorXd::Ones(x.rows());
    for (const auto& b : t.branches())
        out = out.cwiseProduct(x * tree_value_oracle(b, x));
    return out;
}

inline double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

inline double std_error(const std::vector<double>& v)
{
    const double m = mean(v);
    double s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

inline double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return (a - b).norm() / std::max(1e-300, std::max(a.norm(), b.norm()));
}

}  // namespace support
