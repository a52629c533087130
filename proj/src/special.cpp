#include "qcm/math/special.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <sstream>

#include "qcm/errors.hpp"

namespace qcm::math {

double chi_squared_sf(double x, double df) {
    if (!(df > 0.0)) throw DomainError("chi_squared_sf: df must be positive");
    if (x <= 0.0) return 1.0;
    boost::math::chi_squared dist(df);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double student_t_quantile(double alpha, double nu) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        std::ostringstream msg;
        msg << "student_t_quantile: alpha = " << alpha << " must lie strictly in (0,1)";
        throw DomainError(msg.str());
    }
    if (!(nu > 0.0)) throw DomainError("student_t_quantile: nu must be positive");
    boost::math::students_t dist(nu);
    return boost::math::quantile(dist, alpha);
}

double student_t_cdf(double x, double nu) {
    if (!(nu > 0.0)) throw DomainError("student_t_cdf: nu must be positive");
    boost::math::students_t dist(nu);
    return boost::math::cdf(dist, x);
}

} // namespace qcm::math
