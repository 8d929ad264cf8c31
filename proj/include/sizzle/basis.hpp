#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace sizzle {

/// Occupation-number basis over several truncated modes, optionally capped in total excitations.
/// States are ordered lexicographically with mode 0 most significant, so the uncapped basis
/// matches Kronecker ordering.
class FockBasis {
public:
    FockBasis() = default;
    explicit FockBasis(std::vector<int> dims, int max_excitations = -1);

    std::size_t size() const { return states_.size(); }
    std::size_t modes() const { return dims_.size(); }
    const std::vector<int>& dims() const { return dims_; }
    int max_excitations() const { return cap_; }

    const std::vector<int>& state(std::size_t i) const { return states_[i]; }
    int occupation(std::size_t i, std::size_t mode) const { return states_[i][mode]; }

    /// -1 when the tuple is outside the truncated space.
    long index_of(const std::vector<int>& occupations) const;

    /// Index of the state with `mode` raised by one, or -1.
    long raised(std::size_t i, std::size_t mode) const;

    Eigen::MatrixXcd lowering(std::size_t mode) const;
    Eigen::VectorXd number(std::size_t mode) const;

private:
    std::vector<int> dims_;
    int cap_ = -1;
    std::vector<std::vector<int>> states_;
    std::vector<long> lookup_;  // mixed-radix code -> index
    std::vector<long> stride_;
};

}  // namespace sizzle
