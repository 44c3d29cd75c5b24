#include "gridslam/kl.hpp"

#include <cmath>
#include <stdexcept>

namespace gridslam {

namespace {

void checkPair(const Grid3d& truth, const Grid3d& est, double eps) {
    if (!truth.sameShape(est)) throw std::invalid_argument("kl: shape mismatch");
    if (eps <= 0.0) throw std::invalid_argument("kl: eps must be > 0");
}

}  // namespace

double klLoss(const Grid3d& truth, const Grid3d& est, double eps) {
    checkPair(truth, est, eps);
    const Index L = truth.channels, plane = truth.height * truth.width;
    double loss = 0.0;
    for (Index p = 0; p < plane; ++p) {
        double st = L * eps, se = L * eps;
        for (Index l = 0; l < L; ++l) {
            st += truth.data[l * plane + p];
            se += est.data[l * plane + p];
        }
        for (Index l = 0; l < L; ++l) {
            const double t = (truth.data[l * plane + p] + eps) / st;
            const double e = (est.data[l * plane + p] + eps) / se;
            loss += t * (std::log(t) - std::log(e));
        }
    }
    return loss;
}

double klLossGrad(const Grid3d& truth, const Grid3d& est, double eps, Grid3d& dEst) {
    checkPair(truth, est, eps);
    const Index L = truth.channels, plane = truth.height * truth.width;
    dEst = Grid3d(L, truth.height, truth.width);
    double loss = 0.0;
    for (Index p = 0; p < plane; ++p) {
        double st = L * eps, se = L * eps;
        for (Index l = 0; l < L; ++l) {
            st += truth.data[l * plane + p];
            se += est.data[l * plane + p];
        }
        for (Index l = 0; l < L; ++l) {
            const double t = (truth.data[l * plane + p] + eps) / st;
            const double e = (est.data[l * plane + p] + eps) / se;
            loss += t * (std::log(t) - std::log(e));
            // d/d(est_l) of sum_j t_j (log t_j - log e_j), with e_j = (est_j+eps)/se
            dEst.data[l * plane + p] = (1.0 - t / e) / se;
        }
    }
    return loss;
}

double mapMse(const Grid3d& truth, const Grid3d& est, double eps) {
    checkPair(truth, est, eps);
    const Index L = truth.channels, plane = truth.height * truth.width;
    double acc = 0.0;
    for (Index p = 0; p < plane; ++p) {
        double st = L * eps, se = L * eps;
        for (Index l = 0; l < L; ++l) {
            st += truth.data[l * plane + p];
            se += est.data[l * plane + p];
        }
        for (Index l = 0; l < L; ++l) {
            const double t = (truth.data[l * plane + p] + eps) / st;
            const double e = (est.data[l * plane + p] + eps) / se;
            acc += (t - e) * (t - e);
        }
    }
    return acc / static_cast<double>(truth.size());
}

double rawMse(const Grid3d& truth, const Grid3d& est) {
    if (!truth.sameShape(est)) throw std::invalid_argument("rawMse: shape mismatch");
    return (truth.data - est.data).square().sum() / static_cast<double>(truth.size());
}

}  // namespace gridslam
