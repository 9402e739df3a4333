#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hlim {

// Thrown when a quadrature or iteration fails to reach its tolerance.
class numeric_error : public std::runtime_error {
public:
    numeric_error(const std::string& what, double achieved_tol = std::nan(""))
        : std::runtime_error(what), achieved_tol_(achieved_tol) {}
    double achieved_tol() const noexcept { return achieved_tol_; }

private:
    double achieved_tol_;
};

// |x|^p with the p == 0 -> 1 convention.
inline double pow_abs(double x, double p) {
    if (p == 0.0) return 1.0;
    return std::pow(std::abs(x), p);
}

inline double sqr(double x) { return x * x; }

}  // namespace hlim
