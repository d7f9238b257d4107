#include "deconv/rng.hpp"

#include <cmath>

#include "deconv/stats.hpp"

namespace deconv {

double CounterRng::next_normal() {
    return normal_quantile(next_uniform());
}

double CounterRng::next_exponential() {
    return -std::log(next_uniform());
}

}  // namespace deconv
