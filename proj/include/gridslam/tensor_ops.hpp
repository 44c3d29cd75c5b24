#ifndef GRIDSLAM_TENSOR_OPS_HPP
#define GRIDSLAM_TENSOR_OPS_HPP

#include <cmath>
#include <stdexcept>

#include "gridslam/grid.hpp"

namespace gridslam {

/// Cross-correlation of an L x H x W map with an R x L x h x h kernel stack.
/// The map is zero-padded by floor(h/2) on each side so the output keeps the
/// H x W extent; output channel r scores orientation hypothesis r:
///   out(r,x,y) = sum_{l,i,j} map(l, x+i-c, y+j-c) * kernels(r,l,i,j).
template <typename Scalar>
Grid3<Scalar> correlate(const Grid3<Scalar>& map, const KernelStack<Scalar>& kernels) {
    if (map.channels != kernels.channels)
        throw std::invalid_argument("correlate: channel mismatch");
    const Index H = map.height, W = map.width;
    const Index h = kernels.size, c = h / 2;
    Grid3<Scalar> out(kernels.rotations, H, W);
    for (Index r = 0; r < kernels.rotations; ++r) {
        for (Index x = 0; x < H; ++x) {
            for (Index y = 0; y < W; ++y) {
                Scalar acc = 0;
                for (Index l = 0; l < map.channels; ++l) {
                    for (Index i = 0; i < h; ++i) {
                        const Index mx = x + i - c;
                        if (mx < 0 || mx >= H) continue;
                        for (Index j = 0; j < h; ++j) {
                            const Index my = y + j - c;
                            if (my < 0 || my >= W) continue;
                            acc += map(l, mx, my) * kernels(r, l, i, j);
                        }
                    }
                }
                out(r, x, y) = acc;
            }
        }
    }
    return out;
}

/// Linear adjoint of correlate in its map argument. Each rotation slice is
/// stamped onto an L x H x W grid at every pose, weighted by the belief:
///   out(l,u,v) = sum_{r,x,y} belief(r,x,y) * kernels(r,l,u-x+c,v-y+c).
template <typename Scalar>
Grid3<Scalar> adjointProject(const Grid3<Scalar>& belief, const KernelStack<Scalar>& kernels) {
    if (belief.channels != kernels.rotations)
        throw std::invalid_argument("adjointProject: rotation count mismatch");
    const Index H = belief.height, W = belief.width;
    const Index h = kernels.size, c = h / 2;
    Grid3<Scalar> out(kernels.channels, H, W);
    for (Index r = 0; r < kernels.rotations; ++r) {
        for (Index x = 0; x < H; ++x) {
            for (Index y = 0; y < W; ++y) {
                const Scalar w = belief(r, x, y);
                if (w == Scalar(0)) continue;
                for (Index l = 0; l < kernels.channels; ++l) {
                    for (Index i = 0; i < h; ++i) {
                        const Index u = x + i - c;
                        if (u < 0 || u >= H) continue;
                        for (Index j = 0; j < h; ++j) {
                            const Index v = y + j - c;
                            if (v < 0 || v >= W) continue;
                            out(l, u, v) += w * kernels(r, l, i, j);
                        }
                    }
                }
            }
        }
    }
    return out;
}

/// Softmax over all entries, max-subtracted so large scores cannot overflow.
template <typename Scalar>
Grid3<Scalar> softmaxAll(const Grid3<Scalar>& t) {
    Grid3<Scalar> out = t;
    const Scalar m = t.data.maxCoeff();
    out.data = (t.data - m).exp();
    out.data /= out.data.sum();
    return out;
}

/// Softmax applied independently over the L channel values of each cell.
template <typename Scalar>
Grid3<Scalar> softmaxPerCell(const Grid3<Scalar>& t) {
    Grid3<Scalar> out(t.channels, t.height, t.width);
    const Index plane = t.height * t.width;
    for (Index p = 0; p < plane; ++p) {
        Scalar m = t.data[p];
        for (Index l = 1; l < t.channels; ++l) m = std::max(m, t.data[l * plane + p]);
        Scalar sum = 0;
        for (Index l = 0; l < t.channels; ++l) {
            const Scalar e = std::exp(t.data[l * plane + p] - m);
            out.data[l * plane + p] = e;
            sum += e;
        }
        for (Index l = 0; l < t.channels; ++l) out.data[l * plane + p] /= sum;
    }
    return out;
}

/// Rotate a square multi-channel grid about its center cell by `angle`
/// (counter-clockwise, +x axis toward +y axis). Inverse mapping with
/// bilinear interpolation; samples outside the source extent read 0.
template <typename Scalar>
Grid3<Scalar> rotateBilinear(const Grid3<Scalar>& obs, double angle) {
    if (obs.height != obs.width)
        throw std::invalid_argument("rotateBilinear: spatial extent must be square");
    if (angle == 0.0) return obs;
    const Index h = obs.height;
    const double ctr = static_cast<double>(h - 1) / 2.0;
    // snap trig values that are multiples of pi/2 up to fp noise, so that
    // quarter-turn rotations degenerate to exact index permutations
    auto snap = [](double v) {
        if (std::abs(v) < 1e-12) return 0.0;
        if (std::abs(v - 1.0) < 1e-12) return 1.0;
        if (std::abs(v + 1.0) < 1e-12) return -1.0;
        return v;
    };
    const double ca = snap(std::cos(angle)), sa = snap(std::sin(angle));
    Grid3<Scalar> out(obs.channels, h, h);
    for (Index x = 0; x < h; ++x) {
        for (Index y = 0; y < h; ++y) {
            const double dx = static_cast<double>(x) - ctr;
            const double dy = static_cast<double>(y) - ctr;
            // inverse rotation of the output offset
            const double sx = ca * dx + sa * dy + ctr;
            const double sy = -sa * dx + ca * dy + ctr;
            const Index x0 = static_cast<Index>(std::floor(sx));
            const Index y0 = static_cast<Index>(std::floor(sy));
            const double fx = sx - static_cast<double>(x0);
            const double fy = sy - static_cast<double>(y0);
            const double w00 = (1 - fx) * (1 - fy);
            const double w01 = (1 - fx) * fy;
            const double w10 = fx * (1 - fy);
            const double w11 = fx * fy;
            for (Index l = 0; l < obs.channels; ++l) {
                double acc = 0;
                if (w00 != 0 && obs.inBounds(l, x0, y0)) acc += w00 * obs(l, x0, y0);
                if (w01 != 0 && obs.inBounds(l, x0, y0 + 1)) acc += w01 * obs(l, x0, y0 + 1);
                if (w10 != 0 && obs.inBounds(l, x0 + 1, y0)) acc += w10 * obs(l, x0 + 1, y0);
                if (w11 != 0 && obs.inBounds(l, x0 + 1, y0 + 1)) acc += w11 * obs(l, x0 + 1, y0 + 1);
                out(l, x, y) = static_cast<Scalar>(acc);
            }
        }
    }
    return out;
}

}  // namespace gridslam

#endif  // GRIDSLAM_TENSOR_OPS_HPP
