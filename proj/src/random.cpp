#include "vinecls/random.hpp"

#include "vinecls/stats.hpp"

namespace vinecls {

double Rng::normal() { return stats::norm_quantile(uniform()); }

}  // namespace vinecls
