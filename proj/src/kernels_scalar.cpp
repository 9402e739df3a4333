#include <cmath>

#include "hlim/kernels.hpp"

namespace hlim::kernels {
namespace {

// Neumaier-compensated accumulator.
struct Acc {
    double s = 0.0;
    double c = 0.0;
    void add(double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double total() const { return s + c; }
};

double hermite_value(double z, int k) {
    if (k == 0) return 1.0;
    double hm = 1.0, h = z;
    for (int j = 1; j < k; ++j) {
        double hn = z * h - static_cast<double>(j) * hm;
        hm = h;
        h = hn;
    }
    return h;
}

double s_sum(const double* a, std::size_t n) {
    Acc acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(a[i]);
    return acc.total();
}

double s_dot(const double* a, const double* b, std::size_t n) {
    Acc acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * b[i]);
    return acc.total();
}

double s_sum_sq(const double* a, std::size_t n) {
    Acc acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * a[i]);
    return acc.total();
}

double s_hermite_sum(const double* hi, const double* lo, std::size_t n,
                     double inv_scale, int k) {
    Acc acc;
    for (std::size_t i = 0; i < n; ++i)
        acc.add(hermite_value((hi[i] - lo[i]) * inv_scale, k));
    return acc.total();
}

double s_dot_diff(const double* a, const double* bhi, const double* blo,
                  std::size_t n) {
    Acc acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * (bhi[i] - blo[i]));
    return acc.total();
}

double s_dot_diff2(const double* ahi, const double* alo, const double* bhi,
                   const double* blo, std::size_t n) {
    Acc acc;
    for (std::size_t i = 0; i < n; ++i)
        acc.add((ahi[i] - alo[i]) * (bhi[i] - blo[i]));
    return acc.total();
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops table{s_sum,      s_dot,      s_sum_sq,
                           s_hermite_sum, s_dot_diff, s_dot_diff2};
    return table;
}

}  // namespace hlim::kernels
