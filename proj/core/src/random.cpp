#include "kvar/random.hpp"

#include <cmath>

namespace kvar {

double Stream::normal() noexcept {
    // Marsaglia polar method. The second variate of each accepted pair is
    // discarded so the stream carries no hidden state between calls.
    for (;;) {
        const double a = 2.0 * uniform() - 1.0;
        const double b = 2.0 * uniform() - 1.0;
        const double s = a * a + b * b;
        if (s > 0.0 && s < 1.0) {
            return a * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

}  // namespace kvar
