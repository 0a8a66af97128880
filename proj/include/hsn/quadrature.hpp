/*
 Copyright 2026 The hsnorm Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef HSN_QUADRATURE_HPP
#define HSN_QUADRATURE_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hsn/common.hpp"

namespace hsn {

struct FrequencyIntegral {
    double value = 0.0;
    double error_estimate = 0.0;
};

/**
 * (1/2pi) * integral over the real line of an even integrand g(w).
 *
 * Evaluated as (1/pi) * integral over [0, inf) by adaptive Gauss-Kronrod on the
 * rational map w = 2/(t+1) - 1, under which an O(1/w^2) tail becomes a bounded
 * integrand near t = -1, so no explicit frequency cutoff or tail correction is
 * needed for strictly proper systems.
 */
template <typename Fn>
FrequencyIntegral frequency_integral(const Fn& g, const NumericSettings& settings = default_settings(),
                                     double accept_rel_tol = 1e-7) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double err = 0.0;
    double l1 = 0.0;
    const double q = GK::integrate(g, 0.0, std::numeric_limits<double>::infinity(),
                                   static_cast<unsigned>(settings.quadrature_max_depth),
                                   settings.quadrature_rel_tol, &err, &l1);
    FrequencyIntegral out{q / std::numbers::pi, err / std::numbers::pi};
    if (!std::isfinite(q) || err > accept_rel_tol * std::max(std::abs(q), 1e-300) + 1e-300) {
        if (!(std::isfinite(q) && err <= 1e-14 * std::max(l1, 1e-300))) {
            std::ostringstream os;
            os << "frequency integral did not reach relative accuracy " << accept_rel_tol << ": estimate "
               << out.value << ", error estimate " << out.error_estimate;
            throw Error(ErrorKind::quadrature, os.str());
        }
    }
    return out;
}

}  // namespace hsn

#endif  // HSN_QUADRATURE_HPP
