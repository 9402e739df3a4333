#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace hlim {

// Absolute tolerance deciding whether a Hurst index sits exactly on a
// critical regime boundary.
inline constexpr double kCriticalTol = 1e-12;

// Validated Hurst index in the open interval (0,1), with the regime
// classification helpers used throughout the lab.
class Hurst {
public:
    explicit Hurst(double value) : value_(value) {
        if (!(value > 0.0) || !(value < 1.0))
            throw std::domain_error("Hurst index must lie in (0,1), got " +
                                    std::to_string(value));
    }

    double value() const noexcept { return value_; }

    // Boundary 1 - 1/(2k) separating the Gaussian and L2 regimes of the
    // k-th Hermite variation.
    static double hermite_threshold(int k) { return 1.0 - 1.0 / (2.0 * k); }

    // Boundary 1/2 - 1/k below which the Wick-power limit stops existing.
    static double wick_threshold(int k) { return 0.5 - 1.0 / k; }

    bool is_critical(int k) const {
        return std::abs(value_ - hermite_threshold(k)) <= kCriticalTol;
    }
    bool is_clt(int k) const {
        return !is_critical(k) && value_ < hermite_threshold(k);
    }
    bool is_hermite(int k) const {
        return !is_critical(k) && value_ > hermite_threshold(k);
    }

    // Generic boundary test against an arbitrary threshold (1/4, 1/2, 3/4).
    bool at(double threshold) const {
        return std::abs(value_ - threshold) <= kCriticalTol;
    }
    bool below(double threshold) const {
        return !at(threshold) && value_ < threshold;
    }
    bool above(double threshold) const {
        return !at(threshold) && value_ > threshold;
    }

private:
    double value_;
};

// Which of the four path functionals is being evaluated.
enum class Family { HermiteVariation, Tilde, Breve, Hat };

struct FunctionalKind {
    Family family = Family::HermiteVariation;
    int k = 2;  // Hermite order; meaningful for HermiteVariation only

    static FunctionalKind hermite(int k) {
        if (k < 2)
            throw std::invalid_argument("Hermite variation requires k >= 2");
        return FunctionalKind{Family::HermiteVariation, k};
    }
    static FunctionalKind tilde() { return {Family::Tilde, 2}; }
    static FunctionalKind breve() { return {Family::Breve, 2}; }
    static FunctionalKind hat() { return {Family::Hat, 2}; }

    bool bivariate() const { return family != Family::HermiteVariation; }

    std::string name() const {
        switch (family) {
            case Family::HermiteVariation:
                return "hermite" + std::to_string(k);
            case Family::Tilde: return "tilde";
            case Family::Breve: return "breve";
            case Family::Hat: return "hat";
        }
        return "?";
    }
};

inline bool operator==(const FunctionalKind& a, const FunctionalKind& b) {
    if (a.family != b.family) return false;
    if (a.family == Family::HermiteVariation) return a.k == b.k;
    return true;
}

}  // namespace hlim
