#pragma once

#include <cmath>

namespace dcbia {

/// A beam is misdetected when it delivers less than 95% of the best beam's power.
/// A zero best gain (no usable channel) is never a misdetection.
inline bool is_misdetection(double chosen_gain, double best_gain)
{
    if (!(best_gain > 0.0))
        return false;
    return chosen_gain < 0.95 * best_gain;
}

/// Neumaier-compensated running sum, so window means of a constant come out exact.
class CompensatedSum {
public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }
    void reset() { sum_ = carry_ = 0.0; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

} // namespace dcbia
