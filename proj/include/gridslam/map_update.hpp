#ifndef GRIDSLAM_MAP_UPDATE_HPP
#define GRIDSLAM_MAP_UPDATE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gridslam/grid.hpp"
#include "gridslam/pose_estimator.hpp"
#include "gridslam/pose_types.hpp"

namespace gridslam {

/// Allocentric semantic map plus the recurrent cell memory that travels
/// with it. Both are L x H x W; the cell state is zero at episode start and
/// is only ever touched inside the ROI.
struct SemanticMap {
    Grid3d grid;
    Grid3d cellState;

    SemanticMap() = default;
    SemanticMap(Index classes, Index height, Index width)
        : grid(classes, height, width), cellState(classes, height, width) {}
};

/// Binary H x W mask; the 1-region is the clipped h x h square around a
/// pose.
struct RoiMask {
    Index height = 0;
    Index width = 0;
    Eigen::Array<std::uint8_t, Eigen::Dynamic, 1> data;

    RoiMask() = default;
    RoiMask(Index h, Index w)
        : height(h), width(w),
          data(Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>::Zero(h * w)) {}

    std::uint8_t& at(Index x, Index y) { return data[x * width + y]; }
    std::uint8_t at(Index x, Index y) const { return data[x * width + y]; }
    Index count() const { return static_cast<Index>(data.cast<int>().sum()); }
};

RoiMask roiMask(const DiscretePose& pose, Index h, Index height, Index width);

/// Register the egocentric observation into world coordinates: stamp each
/// rotation slice at every pose, weighted by the belief. A one-hot belief
/// places the rotated observation at the estimated pose.
Grid3d projectObservation(const PoseBelief& belief, const KernelStackd& stack);

/// Gate parameters of the recurrent map-update cell. Each gate convolves
/// the registered observation and the map (hidden state) with k x k kernels
/// mapping L channels to L channels, plus a per-channel bias.
struct ConvLstmParams {
    Index channels = 0;    // L
    Index kernelSize = 3;  // k, odd

    struct Gate {
        Eigen::ArrayXd inputKernel;   // L_out x L_in x k x k, flat
        Eigen::ArrayXd hiddenKernel;  // L_out x L_in x k x k, flat
        Eigen::ArrayXd bias;          // L_out
    };
    // gate order: input, forget, output, candidate
    std::array<Gate, 4> gates;

    static constexpr std::array<const char*, 4> kGateNames = {"input", "forget", "output",
                                                              "candidate"};

    static ConvLstmParams zeros(Index channels, Index kernelSize = 3);
    /// Uniform init in +-1/sqrt(fan-in); forget-gate bias starts at +1.
    static ConvLstmParams randomInit(Index channels, std::uint64_t seed, Index kernelSize = 3);

    Index parameterCount() const;
    /// Flatten into one vector (gate-major, inputKernel/hiddenKernel/bias).
    Eigen::ArrayXd flatten() const;
    void unflatten(const Eigen::ArrayXd& flat);

    bool sameShape(const ConvLstmParams& other) const;
    bool allFinite() const;
};

/// One recurrent update step: gated fusion of the registered observation
/// into the map, confined to the ROI. ROI cells of the new grid hold the
/// per-cell softmax of the cell output; grid and cell state outside the ROI
/// are bit-unchanged.
SemanticMap convlstmUpdate(const SemanticMap& map, const Grid3d& obs, const RoiMask& mask,
                           const ConvLstmParams& params);

/// Everything the backward pass needs about one forward step.
struct ConvLstmStepCache {
    Grid3d obs;       // gate input x_t
    Grid3d hiddenIn;  // m_{t-1}
    Grid3d cellIn;    // c_{t-1}
    Grid3d gateI, gateF, gateO, gateG;
    Grid3d cellOut;      // f*c + i*g, before ROI blending
    Grid3d hiddenCand;   // o * tanh(cellOut)
    Grid3d softmaxed;    // per-cell softmax of hiddenCand
    RoiMask mask;
};

/// Forward step that also records the intermediate tensors for BPTT.
SemanticMap convlstmForward(const SemanticMap& map, const Grid3d& obs, const RoiMask& mask,
                            const ConvLstmParams& params, ConvLstmStepCache& cache);

/// Accumulate parameter gradients (and upstream state gradients) for one
/// recorded step. dGrid/dCell carry dLoss/d(new grid/cell state) on entry
/// and dLoss/d(previous grid/cell state) on return.
void convlstmBackward(const ConvLstmStepCache& cache, const ConvLstmParams& params,
                      Grid3d& dGrid, Grid3d& dCell, ConvLstmParams& grads);

/// Non-learned baseline: leaky-integrate the observation into the map where
/// observation mass is positive, per cell and channel.
SemanticMap heuristicUpdate(const SemanticMap& map, const Grid3d& obs, double alpha);

}  // namespace gridslam

#endif  // GRIDSLAM_MAP_UPDATE_HPP
