#include "sizzle/basis.hpp"

#include <cmath>
#include <numeric>

#include "sizzle/errors.hpp"

namespace sizzle {

FockBasis::FockBasis(std::vector<int> dims, int max_excitations) : dims_(std::move(dims)), cap_(max_excitations)
{
    if (dims_.empty()) throw ValidationError("basis needs at least one mode");
    long full = 1;
    stride_.assign(dims_.size(), 1);
    for (std::size_t m = dims_.size(); m-- > 0;) {
        if (dims_[m] < 1) throw ValidationError("mode dimension must be positive");
        stride_[m] = full;
        full *= dims_[m];
        if (full > (1L << 28)) throw ValidationError("product space too large to index");
    }
    lookup_.assign(static_cast<std::size_t>(full), -1);

    std::vector<int> occ(dims_.size(), 0);
    for (long code = 0; code < full; ++code) {
        long rem = code;
        int total = 0;
        for (std::size_t m = 0; m < dims_.size(); ++m) {
            occ[m] = static_cast<int>(rem / stride_[m]);
            rem %= stride_[m];
            total += occ[m];
        }
        if (cap_ >= 0 && total > cap_) continue;
        lookup_[code] = static_cast<long>(states_.size());
        states_.push_back(occ);
    }
}

long FockBasis::index_of(const std::vector<int>& occupations) const
{
    if (occupations.size() != dims_.size()) return -1;
    long code = 0;
    for (std::size_t m = 0; m < dims_.size(); ++m) {
        if (occupations[m] < 0 || occupations[m] >= dims_[m]) return -1;
        code += occupations[m] * stride_[m];
    }
    return lookup_[code];
}

long FockBasis::raised(std::size_t i, std::size_t mode) const
{
    const auto& s = states_[i];
    if (s[mode] + 1 >= dims_[mode]) return -1;
    long code = 0;
    for (std::size_t m = 0; m < dims_.size(); ++m) code += s[m] * stride_[m];
    return lookup_[code + stride_[mode]];
}

Eigen::MatrixXcd FockBasis::lowering(std::size_t mode) const
{
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t i = 0; i < size(); ++i) {
        long j = raised(i, mode);
        if (j >= 0) a(static_cast<Eigen::Index>(i), j) = std::sqrt(static_cast<double>(states_[i][mode] + 1));
    }
    return a;
}

Eigen::VectorXd FockBasis::number(std::size_t mode) const
{
    Eigen::VectorXd n(size());
    for (std::size_t i = 0; i < size(); ++i) n(static_cast<Eigen::Index>(i)) = states_[i][mode];
    return n;
}

}  // namespace sizzle
