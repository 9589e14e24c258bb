#include "bcot/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bcot/errors.hpp"
#include "bcot/noncausal.hpp"

namespace bcot {

namespace {

constexpr double kSeriesTol = 1e-12;

void require_coupling_instance(const ProblemSpec& spec) {
  if (!spec.is_coupling_time_instance()) {
    throw NotCouplingInstance("proxy requires P == P', the discrete metric cost and beta = 1");
  }
}

}  // namespace

double variance_proxy(const ProblemSpec& spec, ProxyMode mode, const SolveOptions& options) {
  switch (mode) {
    case ProxyMode::NoncausalSeries: {
      require_coupling_instance(spec);
      double worst = 0.0;
      for (std::size_t x = 0; x < spec.size(); ++x) {
        for (std::size_t xp = x + 1; xp < spec.size(); ++xp) {
          worst = std::max(worst, noncausal_cost_series(spec.P, x, xp, 1.0, kSeriesTol).value);
        }
      }
      return worst;
    }
    case ProxyMode::BicausalDp: {
      require_coupling_instance(spec);
      const SolveReport report = value_iterate(spec, options);
      if (!report.converged || !report.infinite_flags.empty()) return std::numeric_limits<double>::infinity();
      return sup_norm(report.value_table);
    }
    case ProxyMode::Doeblin: {
      const double delta = doeblin_coefficient(spec.P);
      if (!(delta < 1.0)) throw NoContraction("Doeblin coefficient equals 1");
      return 1.0 / (1.0 - delta);
    }
  }
  throw InvalidArgument("unknown proxy mode");
}

double mcdiarmid_bound(const BoundRequest& req, double proxy) {
  if (req.n == 0) throw InvalidArgument("number of steps must be at least 1");
  if (!(req.t > 0.0)) throw InvalidArgument("deviation t must be positive");
  if (std::isinf(proxy)) throw InfiniteProxy("infinite range proxy: the bound degenerates to 2");
  if (!(proxy > 0.0)) throw InvalidArgument("range proxy must be positive");
  const double exponent = -2.0 * req.t * req.t / (static_cast<double>(req.n) * proxy * proxy);
  return std::min(2.0, 2.0 * std::exp(exponent));
}

}  // namespace bcot
