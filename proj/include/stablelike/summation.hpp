#pragma once

#include <cmath>
#include <span>

namespace stablelike {

/// Neumaier (improved Kahan) compensated accumulator.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(double v) noexcept {
        add(v);
        return *this;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Order-fixed compensated sum of a span; deterministic for a given input order.
inline double compensated_sum(std::span<const double> xs) noexcept {
    CompensatedSum s;
    for (double v : xs) s.add(v);
    return s.value();
}

} // namespace stablelike
