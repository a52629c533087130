#include "qcm/math/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace qcm::math {

NelderMeadResult nelder_mead(const std::function<double(const ParamVec&)>& f,
                             const ParamVec& x0, const ParamVec& step,
                             const NelderMeadOptions& opts) {
    const int n = static_cast<int>(x0.size());
    const int m = n + 1;

    std::vector<ParamVec> x(static_cast<std::size_t>(m));
    std::vector<double> fx(static_cast<std::size_t>(m));
    x[0] = x0;
    for (int j = 1; j < m; ++j) {
        x[static_cast<std::size_t>(j)] = x0;
        double d = step[j - 1];
        if (d == 0.0) d = 1e-4;
        x[static_cast<std::size_t>(j)][j - 1] += d;
    }
    for (int j = 0; j < m; ++j) fx[static_cast<std::size_t>(j)] = f(x[static_cast<std::size_t>(j)]);

    std::vector<int> order(static_cast<std::size_t>(m));
    auto sort_order = [&]() {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return fx[static_cast<std::size_t>(a)] < fx[static_cast<std::size_t>(b)];
        });
    };

    NelderMeadResult res;
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        sort_order();
        int best = order[0], worst = order[static_cast<std::size_t>(n)];
        int second_worst = order[static_cast<std::size_t>(n - 1)];
        double fbest = fx[static_cast<std::size_t>(best)];
        double fworst = fx[static_cast<std::size_t>(worst)];
        if (std::isfinite(fbest) && std::isfinite(fworst) &&
            fworst - fbest <= opts.f_tol * (std::abs(fbest) + opts.f_tol)) {
            res.converged = true;
            break;
        }

        ParamVec centroid = ParamVec::Zero(n);
        for (int j = 0; j < m; ++j)
            if (j != worst) centroid += x[static_cast<std::size_t>(j)];
        centroid /= static_cast<double>(n);

        ParamVec xr = centroid + (centroid - x[static_cast<std::size_t>(worst)]);
        double fr = f(xr);
        if (fr < fbest) {
            ParamVec xe = centroid + 2.0 * (xr - centroid);
            double fe = f(xe);
            if (fe < fr) {
                x[static_cast<std::size_t>(worst)] = xe;
                fx[static_cast<std::size_t>(worst)] = fe;
            } else {
                x[static_cast<std::size_t>(worst)] = xr;
                fx[static_cast<std::size_t>(worst)] = fr;
            }
        } else if (fr < fx[static_cast<std::size_t>(second_worst)]) {
            x[static_cast<std::size_t>(worst)] = xr;
            fx[static_cast<std::size_t>(worst)] = fr;
        } else {
            bool outside = fr < fworst;
            ParamVec xc = outside ? ParamVec(centroid + 0.5 * (xr - centroid))
                                  : ParamVec(centroid + 0.5 * (x[static_cast<std::size_t>(worst)] - centroid));
            double fc = f(xc);
            if (fc < (outside ? fr : fworst)) {
                x[static_cast<std::size_t>(worst)] = xc;
                fx[static_cast<std::size_t>(worst)] = fc;
            } else {
                // Shrink toward the best vertex.
                for (int j = 0; j < m; ++j) {
                    if (j == best) continue;
                    x[static_cast<std::size_t>(j)] =
                        x[static_cast<std::size_t>(best)] +
                        0.5 * (x[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(best)]);
                    fx[static_cast<std::size_t>(j)] = f(x[static_cast<std::size_t>(j)]);
                }
            }
        }
    }

    sort_order();
    res.x = x[static_cast<std::size_t>(order[0])];
    res.f = fx[static_cast<std::size_t>(order[0])];
    res.iterations = iter;
    return res;
}

} // namespace qcm::math
