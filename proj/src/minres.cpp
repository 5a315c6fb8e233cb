#include "mpdarcy/minres.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mpdarcy {

KrylovResult minres(const LinearMap& apply, const LinearMap& precondition, const Eigen::VectorXd& b,
                    Eigen::VectorXd& x, double tol, int max_iter)
{
    using Eigen::VectorXd;
    const Eigen::Index n = b.size();
    KrylovResult res;

    VectorXd r1(n);
    apply(x, r1);
    r1 = b - r1;
    VectorXd y(n);
    precondition(r1, y);
    double beta1 = r1.dot(y);
    if (beta1 <= 0.0) {
        // Zero residual, or a preconditioner that lost definiteness.
        res.converged = beta1 == 0.0;
        return res;
    }
    beta1 = std::sqrt(beta1);

    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
    double cs = -1.0, sn = 0.0;
    VectorXd r2 = r1;
    VectorXd v(n), w = VectorXd::Zero(n), w1(n), w2 = VectorXd::Zero(n);
    constexpr double tiny = std::numeric_limits<double>::min();

    for (int itn = 1; itn <= max_iter; ++itn) {
        v = y / beta;
        apply(v, y);
        if (itn >= 2)
            y -= (beta / oldb) * r1;
        const double alfa = v.dot(y);
        y -= (alfa / beta) * r2;
        r1.swap(r2);
        r2 = y;
        precondition(r2, y);
        oldb = beta;
        const double beta2 = r2.dot(y);
        if (beta2 < 0.0)
            break;
        beta = std::sqrt(beta2);

        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        const double gamma = std::max(std::hypot(gbar, beta), tiny);
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar *= sn;

        w1.swap(w2);
        w2.swap(w);
        w = (v - oldeps * w1 - delta * w2) / gamma;
        x += phi * w;

        res.iterations = itn;
        res.residual_estimate = phibar / beta1;
        if (res.residual_estimate <= tol) {
            res.converged = true;
            break;
        }
        if (beta == 0.0) {
            // Krylov space exhausted: x is exact.
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace mpdarcy
