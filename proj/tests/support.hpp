#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "sizzle/config.hpp"

namespace testing_support {

/// Loads a shipped preset, optionally at a named operating point.
inline sizzle::DeviceConfig load_preset(const std::string& name, const std::string& point = "")
{
    sizzle::Json doc = sizzle::read_document(sizzle::resolve_config_path(name));
    if (!point.empty()) sizzle::select_operating_point(doc, point);
    return sizzle::parse_device(doc);
}

/// Textbook Kronecker product, written independently of the library's embed().
inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Eigen::MatrixXcd lowering(int levels)
{
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(levels, levels);
    for (int n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

inline Eigen::MatrixXcd eye(int n) { return Eigen::MatrixXcd::Identity(n, n); }

}  // namespace testing_support
