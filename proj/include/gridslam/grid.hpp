#ifndef GRIDSLAM_GRID_HPP
#define GRIDSLAM_GRID_HPP

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gridslam {

using Index = std::int64_t;

/// Dense multi-channel 2D grid. Storage is a flat array in row-major
/// channel-plane order: index = (c * height + x) * width + y.
template <typename Scalar>
struct Grid3 {
    Index channels = 0;
    Index height = 0;
    Index width = 0;
    Eigen::Array<Scalar, Eigen::Dynamic, 1> data;

    Grid3() = default;
    Grid3(Index c, Index h, Index w)
        : channels(c), height(h), width(w),
          data(Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(c * h * w)) {}

    static Grid3 zeros(Index c, Index h, Index w) { return Grid3(c, h, w); }

    Index size() const { return channels * height * width; }

    Scalar& operator()(Index c, Index x, Index y) {
        return data[(c * height + x) * width + y];
    }
    Scalar operator()(Index c, Index x, Index y) const {
        return data[(c * height + x) * width + y];
    }

    bool inBounds(Index c, Index x, Index y) const {
        return c >= 0 && c < channels && x >= 0 && x < height && y >= 0 && y < width;
    }

    /// Channel plane as a height x width map over the flat storage.
    Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    plane(Index c) {
        return {data.data() + c * height * width, height, width};
    }
    Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    plane(Index c) const {
        return {data.data() + c * height * width, height, width};
    }

    bool sameShape(const Grid3& other) const {
        return channels == other.channels && height == other.height && width == other.width;
    }

    bool allFinite() const { return data.isFinite().all(); }
};

/// Stack of R correlation kernels, one per candidate orientation. Slice r
/// holds an observation resampled to allocentric angle 2*pi*r/R. Storage is
/// flat: index = ((r * channels + l) * size + i) * size + j.
template <typename Scalar>
struct KernelStack {
    Index rotations = 0;
    Index channels = 0;
    Index size = 0;  // spatial extent h; odd so a center cell exists
    Eigen::Array<Scalar, Eigen::Dynamic, 1> data;

    KernelStack() = default;
    KernelStack(Index r, Index l, Index h)
        : rotations(r), channels(l), size(h),
          data(Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(r * l * h * h)) {
        if (h % 2 == 0)
            throw std::invalid_argument("KernelStack: size must be odd, got " + std::to_string(h));
    }

    Scalar& operator()(Index r, Index l, Index i, Index j) {
        return data[((r * channels + l) * size + i) * size + j];
    }
    Scalar operator()(Index r, Index l, Index i, Index j) const {
        return data[((r * channels + l) * size + i) * size + j];
    }

    /// Copy of rotation slice r as an L x h x h grid.
    Grid3<Scalar> slice(Index r) const {
        Grid3<Scalar> out(channels, size, size);
        const Index n = channels * size * size;
        out.data = data.segment(r * n, n);
        return out;
    }

    void setSlice(Index r, const Grid3<Scalar>& g) {
        const Index n = channels * size * size;
        data.segment(r * n, n) = g.data;
    }

    bool allFinite() const { return data.isFinite().all(); }
};

using Grid3d = Grid3<double>;
using KernelStackd = KernelStack<double>;

}  // namespace gridslam

#endif  // GRIDSLAM_GRID_HPP
