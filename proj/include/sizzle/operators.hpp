#pragma once

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sizzle/basis.hpp"
#include "sizzle/errors.hpp"
#include "sizzle/system.hpp"

namespace sizzle {

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

/// Entries are linear frequencies (GHz) for Hamiltonians.
using OperatorMatrix = ComplexMatrix<double>;

/// Truncated annihilation and creation operators.
template <typename Scalar = double>
std::pair<ComplexMatrix<Scalar>, ComplexMatrix<Scalar>> ladder_ops(int levels)
{
    if (levels < 2) throw ValidationError("ladder_ops: levels must be >= 2");
    ComplexMatrix<Scalar> a = ComplexMatrix<Scalar>::Zero(levels, levels);
    for (int n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(static_cast<Scalar>(n));
    ComplexMatrix<Scalar> adag = a.adjoint();
    return {std::move(a), std::move(adag)};
}

/// I (x) ... (x) op (x) ... (x) I with op in `slot`.
template <typename Derived>
ComplexMatrix<typename Derived::RealScalar> embed(const Eigen::MatrixBase<Derived>& op, int slot,
                                                  const std::vector<int>& dims)
{
    using Scalar = typename Derived::RealScalar;
    if (slot < 0 || slot >= static_cast<int>(dims.size())) throw ValidationError("embed: slot out of range");
    if (op.rows() != dims[slot] || op.cols() != dims[slot]) throw ValidationError("embed: dimension mismatch");
    Eigen::Index left = 1, right = 1;
    for (int m = 0; m < slot; ++m) left *= dims[m];
    for (int m = slot + 1; m < static_cast<int>(dims.size()); ++m) right *= dims[m];
    const Eigen::Index d = dims[slot];
    const Eigen::Index n = left * d * right;
    ComplexMatrix<Scalar> out = ComplexMatrix<Scalar>::Zero(n, n);
    for (Eigen::Index l = 0; l < left; ++l)
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) {
                const std::complex<Scalar> v = op(i, j);
                if (v == std::complex<Scalar>(0)) continue;
                for (Eigen::Index r = 0; r < right; ++r)
                    out((l * d + i) * right + r, (l * d + j) * right + r) = v;
            }
    return out;
}

/// How exchange terms enter the static build. Full keeps (a+a^dag)(b+b^dag); RotatingWave keeps
/// only a^dag b + a b^dag, which is what the drive-frame build uses.
enum class CouplingForm { Full, RotatingWave };

/// Basis for a system: product of mode_dims, optionally excitation-capped. Enforces the dimension cap.
FockBasis system_basis(const SystemSpec& system);

/// Lab-frame H0 (drives ignored).
OperatorMatrix build_static_hamiltonian(const SystemSpec& system, CouplingForm form = CouplingForm::Full);
OperatorMatrix build_static_hamiltonian(const SystemSpec& system, const FockBasis& basis,
                                        CouplingForm form = CouplingForm::Full);

/// Time-independent Hamiltonian in the frame rotating at frame_frequency on every mode. All drives
/// must sit at frame_frequency.
OperatorMatrix build_rwa_hamiltonian(const SystemSpec& system, double frame_frequency);
OperatorMatrix build_rwa_hamiltonian(const SystemSpec& system, const FockBasis& basis, double frame_frequency);

/// Common frequency of all drives; throws if they differ or there are none.
double common_drive_frequency(const SystemSpec& system);

/// ||H - H^dag||_F / ||H||_F (0 for the zero matrix).
double hermiticity_defect(const OperatorMatrix& h);

}  // namespace sizzle
