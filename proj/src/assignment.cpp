#include "sizzle/assignment.hpp"

#include <limits>

#include "sizzle/errors.hpp"

namespace sizzle {

std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight)
{
    const int n = static_cast<int>(weight.rows());
    if (weight.cols() != n) throw ValidationError("assignment needs a square matrix");
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based arrays, cost = -weight
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = -weight(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> col_of_row(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) col_of_row[p[j] - 1] = j - 1;
    return col_of_row;
}

}  // namespace sizzle
