#include "gridwm/rng.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

namespace gridwm {

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
    // Rejection sampling: discard the biased tail of the 64-bit range.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
}

std::string Rng::serialize() const {
    std::ostringstream out;
    out << engine_;
    return out.str();
}

Rng Rng::deserialize(const std::string& text) {
    Rng rng;
    std::istringstream in(text);
    in >> rng.engine_;
    if (!in) throw std::invalid_argument("Rng::deserialize: malformed generator state");
    return rng;
}

}  // namespace gridwm
