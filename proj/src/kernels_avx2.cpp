#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

#include "hlim/kernels.hpp"

// Compiled with -mavx2 -mfma; only reached after the dispatcher has checked
// CPU support.

namespace hlim::kernels {
namespace {

// Four-lane Neumaier accumulator.  The compensation arithmetic relies on
// exact rounding of individual add/sub, so no FMA inside.
struct VAcc {
    __m256d s = _mm256_setzero_pd();
    __m256d c = _mm256_setzero_pd();

    static __m256d vabs(__m256d x) {
        return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
    }

    void add(__m256d x) {
        __m256d t = _mm256_add_pd(s, x);
        __m256d big = _mm256_add_pd(_mm256_sub_pd(s, t), x);    // |s| >= |x|
        __m256d small = _mm256_add_pd(_mm256_sub_pd(x, t), s);  // |s| <  |x|
        __m256d mask = _mm256_cmp_pd(vabs(s), vabs(x), _CMP_GE_OQ);
        c = _mm256_add_pd(c, _mm256_blendv_pd(small, big, mask));
        s = t;
    }

    double total() const {
        alignas(32) double sv[4], cv[4];
        _mm256_store_pd(sv, s);
        _mm256_store_pd(cv, c);
        // Combine lanes with a scalar Neumaier pass.
        double acc = 0.0, comp = 0.0;
        auto push = [&](double x) {
            double t = acc + x;
            if (std::abs(acc) >= std::abs(x))
                comp += (acc - t) + x;
            else
                comp += (x - t) + acc;
            acc = t;
        };
        for (int i = 0; i < 4; ++i) push(sv[i]);
        for (int i = 0; i < 4; ++i) push(cv[i]);
        return acc + comp;
    }
};

struct SAcc {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
};

double scalar_hermite(double z, int k) {
    if (k == 0) return 1.0;
    double hm = 1.0, h = z;
    for (int j = 1; j < k; ++j) {
        double hn = z * h - static_cast<double>(j) * hm;
        hm = h;
        h = hn;
    }
    return h;
}

__m256d vec_hermite(__m256d z, int k) {
    if (k == 0) return _mm256_set1_pd(1.0);
    __m256d hm = _mm256_set1_pd(1.0);
    __m256d h = z;
    for (int j = 1; j < k; ++j) {
        __m256d hn = _mm256_fmsub_pd(z, h, _mm256_mul_pd(_mm256_set1_pd(j), hm));
        hm = h;
        h = hn;
    }
    return h;
}

double finish(VAcc& v, SAcc& tail) {
    SAcc out;
    out.s = v.total();
    out.add(tail.s);
    out.add(tail.c);
    return out.s + out.c;
}

double v_sum(const double* a, std::size_t n) {
    VAcc v;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) v.add(_mm256_loadu_pd(a + i));
    SAcc t;
    for (; i < n; ++i) t.add(a[i]);
    return finish(v, t);
}

double v_dot(const double* a, const double* b, std::size_t n) {
    VAcc v;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        v.add(_mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    SAcc t;
    for (; i < n; ++i) t.add(a[i] * b[i]);
    return finish(v, t);
}

double v_sum_sq(const double* a, std::size_t n) {
    VAcc v;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d x = _mm256_loadu_pd(a + i);
        v.add(_mm256_mul_pd(x, x));
    }
    SAcc t;
    for (; i < n; ++i) t.add(a[i] * a[i]);
    return finish(v, t);
}

double v_hermite_sum(const double* hi, const double* lo, std::size_t n,
                     double inv_scale, int k) {
    VAcc v;
    const __m256d sc = _mm256_set1_pd(inv_scale);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d z = _mm256_mul_pd(
            _mm256_sub_pd(_mm256_loadu_pd(hi + i), _mm256_loadu_pd(lo + i)), sc);
        v.add(vec_hermite(z, k));
    }
    SAcc t;
    for (; i < n; ++i) t.add(scalar_hermite((hi[i] - lo[i]) * inv_scale, k));
    return finish(v, t);
}

double v_dot_diff(const double* a, const double* bhi, const double* blo,
                  std::size_t n) {
    VAcc v;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(bhi + i),
                                  _mm256_loadu_pd(blo + i));
        v.add(_mm256_mul_pd(_mm256_loadu_pd(a + i), d));
    }
    SAcc t;
    for (; i < n; ++i) t.add(a[i] * (bhi[i] - blo[i]));
    return finish(v, t);
}

double v_dot_diff2(const double* ahi, const double* alo, const double* bhi,
                   const double* blo, std::size_t n) {
    VAcc v;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d da = _mm256_sub_pd(_mm256_loadu_pd(ahi + i),
                                   _mm256_loadu_pd(alo + i));
        __m256d db = _mm256_sub_pd(_mm256_loadu_pd(bhi + i),
                                   _mm256_loadu_pd(blo + i));
        v.add(_mm256_mul_pd(da, db));
    }
    SAcc t;
    for (; i < n; ++i) t.add((ahi[i] - alo[i]) * (bhi[i] - blo[i]));
    return finish(v, t);
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops table{v_sum,       v_dot,      v_sum_sq,
                           v_hermite_sum, v_dot_diff, v_dot_diff2};
    return table;
}

}  // namespace hlim::kernels

#endif  // x86_64
