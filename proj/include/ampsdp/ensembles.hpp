#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ampsdp {

enum class family { gaussian, rademacher };

std::string to_string(family f);
family parse_family(const std::string& s);

struct ensemble_spec {
    int n = 0;
    family fam = family::gaussian;
    double subgaussian_K = 1.0;

    void validate() const;
};

// Symmetric matrix stored once as the row-major upper triangle.
class symmetric_matrix {
public:
    symmetric_matrix() = default;
    explicit symmetric_matrix(int n);

    static symmetric_matrix from_dense(const Eigen::MatrixXd& m);

    int size() const { return n_; }
    double operator()(int i, int j) const { return data_[index(i, j)]; }
    void set(int i, int j, double v) { data_[index(i, j)] = v; }

    std::size_t index(int i, int j) const
    {
        if (i > j)
            std::swap(i, j);
        return static_cast<std::size_t>(i) * n_ - static_cast<std::size_t>(i) * (i - 1) / 2 + (j - i);
    }

    const std::vector<double>& packed() const { return data_; }
    std::vector<double>& packed() { return data_; }

    Eigen::MatrixXd dense() const;
    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd multiply(const Eigen::MatrixXd& x) const;
    double operator_norm() const;

    bool operator==(const symmetric_matrix& o) const { return n_ == o.n_ && data_ == o.data_; }

private:
    int n_ = 0;
    std::vector<double> data_;
};

symmetric_matrix sample_symmetric(const ensemble_spec& spec, std::uint64_t seed);

enum class adversary { none, rank_one_spike, random_replace, zero_rowsum };

std::string to_string(adversary a);
adversary parse_adversary(const std::string& s);

struct corruption_spec {
    double epsilon = 0.0;
    adversary adv = adversary::none;
    std::uint64_t seed = 0;
};

struct corruption_record {
    std::vector<int> support;
    symmetric_matrix corrupted;
    long long entries_changed = 0;
    bool strong_contamination = false;
    std::vector<std::string> warnings;
};

// |S| = ceil(epsilon * n); the random_replace adversary redraws from `fam`.
int corruption_size(double epsilon, int n);
corruption_record corrupt_minor(const symmetric_matrix& x, const corruption_spec& spec,
                                family fam = family::gaussian);
corruption_record zero_rowsum_contamination(const symmetric_matrix& x, std::uint64_t seed);

void write_symmat(std::ostream& os, const symmetric_matrix& m);
symmetric_matrix read_symmat(std::istream& is);
void save_symmat(const std::string& path, const symmetric_matrix& m);
symmetric_matrix load_symmat(const std::string& path);

}  // namespace ampsdp
