#include "ampsdp/ensembles.hpp"

#include "ampsdp/error.hpp"
#include "ampsdp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace ampsdp {

std::string to_string(family f)
{
    return f == family::gaussian ? "gaussian" : "rademacher";
}

family parse_family(const std::string& s)
{
    if (s == "gaussian")
        return family::gaussian;
    if (s == "rademacher")
        return family::rademacher;
    throw config_error("unknown ensemble family '" + s + "'");
}

void ensemble_spec::validate() const
{
    if (n < 1)
        throw config_error("ensemble.n >= 1 required");
    if (!(subgaussian_K > 0))
        throw config_error("ensemble.subgaussian_K > 0 required");
}

symmetric_matrix::symmetric_matrix(int n) : n_(n)
{
    if (n < 0)
        throw input_error("negative matrix dimension");
    data_.assign(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0);
}

symmetric_matrix symmetric_matrix::from_dense(const Eigen::MatrixXd& m)
{
    if (m.rows() != m.cols())
        throw input_error("matrix is not square");
    const int n = static_cast<int>(m.rows());
    symmetric_matrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            if (m(i, j) != m(j, i))
                throw input_error("matrix is not symmetric");
            out.set(i, j, m(i, j));
        }
    return out;
}

Eigen::MatrixXd symmetric_matrix::dense() const
{
    Eigen::MatrixXd m(n_, n_);
    std::size_t k = 0;
    for (int i = 0; i < n_; ++i)
        for (int j = i; j < n_; ++j, ++k) {
            m(i, j) = data_[k];
            m(j, i) = data_[k];
        }
    return m;
}

Eigen::VectorXd symmetric_matrix::multiply(const Eigen::VectorXd& x) const
{
    if (x.size() != n_)
        throw input_error("dimension mismatch in matrix-vector product");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
    const double* a = data_.data();
    for (int i = 0; i < n_; ++i) {
        const double xi = x[i];
        double acc = a[0] * xi;
        for (int j = i + 1; j < n_; ++j) {
            acc += a[j - i] * x[j];
            y[j] += a[j - i] * xi;
        }
        y[i] += acc;
        a += n_ - i;
    }
    return y;
}

Eigen::MatrixXd symmetric_matrix::multiply(const Eigen::MatrixXd& x) const
{
    if (x.rows() != n_)
        throw input_error("dimension mismatch in matrix product");
    Eigen::MatrixXd y(n_, x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        y.col(c) = multiply(Eigen::VectorXd(x.col(c)));
    return y;
}

double symmetric_matrix::operator_norm() const
{
    if (n_ == 0)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(), Eigen::EigenvaluesOnly);
    return std::max(std::abs(es.eigenvalues()[0]), std::abs(es.eigenvalues()[n_ - 1]));
}

symmetric_matrix sample_symmetric(const ensemble_spec& spec, std::uint64_t seed)
{
    spec.validate();
    const int n = spec.n;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    keyed_rng gen(seed);
    symmetric_matrix x(n);
    auto& d = x.packed();
    std::size_t k = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j, ++k) {
            const std::uint64_t c = static_cast<std::uint64_t>(i) * n + j;
            d[k] = scale * (spec.fam == family::gaussian ? gen.normal(c) : gen.sign(c));
        }
    return x;
}

std::string to_string(adversary a)
{
    switch (a) {
    case adversary::none: return "none";
    case adversary::rank_one_spike: return "rank_one_spike";
    case adversary::random_replace: return "random_replace";
    case adversary::zero_rowsum: return "zero_rowsum";
    }
    return "none";
}

adversary parse_adversary(const std::string& s)
{
    if (s == "none")
        return adversary::none;
    if (s == "rank_one_spike")
        return adversary::rank_one_spike;
    if (s == "random_replace")
        return adversary::random_replace;
    if (s == "zero_rowsum")
        return adversary::zero_rowsum;
    throw config_error("unknown adversary '" + s + "'");
}

int corruption_size(double epsilon, int n)
{
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw config_error("corruption.epsilon must lie in [0, 1]");
    const double en = epsilon * n;
    // Guard against 0.1 * 30 evaluating to 3.0000000000000004.
    const double rounded = std::round(en);
    const double k = std::abs(en - rounded) < 1e-9 ? rounded : std::ceil(en);
    return static_cast<int>(std::min<double>(k, n));
}

namespace {

std::vector<int> random_subset(int n, int k, std::uint64_t seed)
{
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng_stream rng(keyed_rng(seed).derive(1));
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

corruption_record corrupt_minor(const symmetric_matrix& x, const corruption_spec& spec, family fam)
{
    if (spec.adv == adversary::zero_rowsum)
        throw unsupported_error("zero_rowsum is not a principal-minor adversary; use zero_rowsum_contamination");
    const int n = x.size();
    corruption_record rec;
    rec.corrupted = x;
    const int k = corruption_size(spec.epsilon, n);
    if (spec.adv == adversary::none || spec.epsilon == 0.0)
        return rec;
    if (spec.epsilon * n < 1.0) {
        rec.warnings.push_back("degenerate corruption: epsilon * n < 1, no entries changed");
        return rec;
    }
    rec.support = random_subset(n, k, spec.seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    keyed_rng gen = keyed_rng(spec.seed).derive(2);
    for (int a = 0; a < k; ++a)
        for (int b = a; b < k; ++b) {
            const int i = rec.support[a], j = rec.support[b];
            double v = x(i, j);
            if (spec.adv == adversary::rank_one_spike) {
                v += scale;
            } else {
                const std::uint64_t c = static_cast<std::uint64_t>(i) * n + j;
                v = scale * (fam == family::gaussian ? gen.normal(c) : gen.sign(c));
            }
            if (v != x(i, j))
                rec.entries_changed += (i == j) ? 1 : 2;
            rec.corrupted.set(i, j, v);
        }
    return rec;
}

corruption_record zero_rowsum_contamination(const symmetric_matrix& x, std::uint64_t seed)
{
    const int n = x.size();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    // Work in integer units of 1/sqrt(n); zero entries are accepted so the map is idempotent.
    std::vector<int> unit(x.packed().size());
    for (std::size_t k = 0; k < unit.size(); ++k) {
        const double v = x.packed()[k];
        if (v == scale)
            unit[k] = 1;
        else if (v == -scale)
            unit[k] = -1;
        else if (v == 0.0)
            unit[k] = 0;
        else
            throw unsupported_error("zero_rowsum_contamination requires entries in {+-1/sqrt(n)}");
    }
    auto at = [&](int i, int j) -> int& { return unit[x.index(i, j)]; };
    auto row_sum = [&](int i) {
        long s = 0;
        for (int j = 0; j < n; ++j)
            s += at(i, j);
        return s;
    };

    corruption_record rec;
    rec.strong_contamination = true;
    rng_stream rng(keyed_rng(seed).derive(3));
    std::vector<char> fixed(n, 0);

    // Rows are fixed in index order using unprocessed columns first; a row only
    // reaches into processed columns when the suffix runs out of same-sign entries,
    // and any row disturbed that way is queued again.
    std::vector<int> queue(n);
    std::iota(queue.begin(), queue.end(), 0);
    std::size_t head = 0;
    while (head < queue.size()) {
        const int i = queue[head++];
        const long b = row_sum(i);
        fixed[i] = 1;
        if (b == 0)
            continue;
        const int sgn = b > 0 ? 1 : -1;
        std::vector<int> fresh, used;
        for (int j = 0; j < n; ++j)
            if (at(i, j) == sgn)
                (j >= i && (j == i || !fixed[j]) ? fresh : used).push_back(j);
        std::shuffle(fresh.begin(), fresh.end(), rng);
        std::shuffle(used.begin(), used.end(), rng);
        fresh.insert(fresh.end(), used.begin(), used.end());
        const long need = std::labs(b);
        for (long c = 0; c < need; ++c) {
            const int j = fresh[c];
            at(i, j) = 0;
            rec.entries_changed += (i == j) ? 1 : 2;
            if (j != i && fixed[j])
                queue.push_back(j);
        }
    }

    rec.corrupted = symmetric_matrix(n);
    for (std::size_t k = 0; k < unit.size(); ++k)
        rec.corrupted.packed()[k] = unit[k] * scale;
    return rec;
}

void write_symmat(std::ostream& os, const symmetric_matrix& m)
{
    os << "symmat " << m.size() << '\n';
    os << std::setprecision(17);
    const int n = m.size();
    std::size_t k = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j, ++k)
            os << (j > i ? " " : "") << m.packed()[k];
        os << '\n';
    }
}

symmetric_matrix read_symmat(std::istream& is)
{
    std::string tag;
    long n = -1;
    if (!(is >> tag >> n) || tag != "symmat" || n < 0)
        throw input_error("not a symmat stream");
    symmetric_matrix m(static_cast<int>(n));
    for (auto& v : m.packed()) {
        std::string tok;
        if (!(is >> tok))
            throw input_error("truncated symmat stream");
        v = std::stod(tok);
    }
    return m;
}

void save_symmat(const std::string& path, const symmetric_matrix& m)
{
    std::ofstream os(path);
    if (!os)
        throw input_error("cannot write " + path);
    write_symmat(os, m);
}

symmetric_matrix load_symmat(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw input_error("cannot read " + path);
    return read_symmat(is);
}

}  // namespace ampsdp
