#include "gridslam/map_update.hpp"

#include <cmath>
#include <stdexcept>

#include "gridslam/rng.hpp"
#include "gridslam/tensor_ops.hpp"

namespace gridslam {

RoiMask roiMask(const DiscretePose& pose, Index h, Index height, Index width) {
    if (h < 1 || h % 2 == 0) throw std::invalid_argument("roiMask: h must be odd and positive");
    const Index c = h / 2;
    RoiMask mask(height, width);
    const Index x0 = std::max<Index>(0, pose.x - c), x1 = std::min(height - 1, pose.x + c);
    const Index y0 = std::max<Index>(0, pose.y - c), y1 = std::min(width - 1, pose.y + c);
    for (Index x = x0; x <= x1; ++x)
        for (Index y = y0; y <= y1; ++y) mask.at(x, y) = 1;
    return mask;
}

Grid3d projectObservation(const PoseBelief& belief, const KernelStackd& stack) {
    return adjointProject(belief.grid, stack);
}

namespace {

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline Index kernelIndex(Index L, Index k, Index lo, Index li, Index a, Index b) {
    return ((lo * L + li) * k + a) * k + b;
}

/// Same-size 2D convolution mapping L input channels to L output channels.
void convSameAccum(const Grid3d& in, const Eigen::ArrayXd& kernel, Index k, Grid3d& out) {
    const Index L = in.channels, H = in.height, W = in.width;
    const Index p = k / 2;
    for (Index lo = 0; lo < L; ++lo) {
        for (Index li = 0; li < L; ++li) {
            for (Index a = 0; a < k; ++a) {
                for (Index b = 0; b < k; ++b) {
                    const double w = kernel[kernelIndex(L, k, lo, li, a, b)];
                    if (w == 0.0) continue;
                    const Index xLo = std::max<Index>(0, p - a);
                    const Index xHi = std::min(H, H + p - a);
                    const Index yLo = std::max<Index>(0, p - b);
                    const Index yHi = std::min(W, W + p - b);
                    for (Index x = xLo; x < xHi; ++x) {
                        const double* src = &in.data[(li * H + x + a - p) * W];
                        double* dst = &out.data[(lo * H + x) * W];
                        for (Index y = yLo; y < yHi; ++y) dst[y] += w * src[y + b - p];
                    }
                }
            }
        }
    }
}

/// Gradient of convSameAccum w.r.t. its input: correlation of delta with the
/// kernel transposed in the channel pair and flipped spatially.
void convInputGradAccum(const Grid3d& delta, const Eigen::ArrayXd& kernel, Index k, Grid3d& dIn) {
    const Index L = delta.channels, H = delta.height, W = delta.width;
    const Index p = k / 2;
    for (Index lo = 0; lo < L; ++lo) {
        for (Index li = 0; li < L; ++li) {
            for (Index a = 0; a < k; ++a) {
                for (Index b = 0; b < k; ++b) {
                    const double w = kernel[kernelIndex(L, k, lo, li, a, b)];
                    if (w == 0.0) continue;
                    // out(lo,x,y) consumed in(li,x+a-p,y+b-p)
                    const Index uLo = std::max<Index>(0, a - p);
                    const Index uHi = std::min(H, H + a - p);
                    const Index vLo = std::max<Index>(0, b - p);
                    const Index vHi = std::min(W, W + b - p);
                    for (Index u = uLo; u < uHi; ++u) {
                        const double* src = &delta.data[(lo * H + u - a + p) * W];
                        double* dst = &dIn.data[(li * H + u) * W];
                        for (Index v = vLo; v < vHi; ++v) dst[v] += w * src[v - b + p];
                    }
                }
            }
        }
    }
}

/// Gradient of convSameAccum w.r.t. its kernel.
void convKernelGradAccum(const Grid3d& in, const Grid3d& delta, Index k, Eigen::ArrayXd& dKernel) {
    const Index L = in.channels, H = in.height, W = in.width;
    const Index p = k / 2;
    for (Index lo = 0; lo < L; ++lo) {
        for (Index li = 0; li < L; ++li) {
            for (Index a = 0; a < k; ++a) {
                for (Index b = 0; b < k; ++b) {
                    const Index xLo = std::max<Index>(0, p - a);
                    const Index xHi = std::min(H, H + p - a);
                    const Index yLo = std::max<Index>(0, p - b);
                    const Index yHi = std::min(W, W + p - b);
                    double acc = 0.0;
                    for (Index x = xLo; x < xHi; ++x) {
                        const double* src = &in.data[(li * H + x + a - p) * W];
                        const double* del = &delta.data[(lo * H + x) * W];
                        for (Index y = yLo; y < yHi; ++y) acc += src[y + b - p] * del[y];
                    }
                    dKernel[kernelIndex(L, k, lo, li, a, b)] += acc;
                }
            }
        }
    }
}

Grid3d gatePreactivation(const Grid3d& obs, const Grid3d& hidden,
                         const ConvLstmParams::Gate& gate, Index k) {
    Grid3d pre(obs.channels, obs.height, obs.width);
    const Index plane = obs.height * obs.width;
    for (Index lo = 0; lo < obs.channels; ++lo)
        pre.data.segment(lo * plane, plane).setConstant(gate.bias[lo]);
    convSameAccum(obs, gate.inputKernel, k, pre);
    convSameAccum(hidden, gate.hiddenKernel, k, pre);
    return pre;
}

}  // namespace

ConvLstmParams ConvLstmParams::zeros(Index channels, Index kernelSize) {
    if (kernelSize % 2 == 0)
        throw std::invalid_argument("ConvLstmParams: kernel size must be odd");
    ConvLstmParams p;
    p.channels = channels;
    p.kernelSize = kernelSize;
    const Index n = channels * channels * kernelSize * kernelSize;
    for (Gate& g : p.gates) {
        g.inputKernel = Eigen::ArrayXd::Zero(n);
        g.hiddenKernel = Eigen::ArrayXd::Zero(n);
        g.bias = Eigen::ArrayXd::Zero(channels);
    }
    return p;
}

ConvLstmParams ConvLstmParams::randomInit(Index channels, std::uint64_t seed, Index kernelSize) {
    ConvLstmParams p = zeros(channels, kernelSize);
    Rng rng(mixSeed(seed, 0xC0FBA11ULL));
    const double bound = 1.0 / std::sqrt(static_cast<double>(channels * kernelSize * kernelSize));
    for (Gate& g : p.gates) {
        for (Index i = 0; i < g.inputKernel.size(); ++i)
            g.inputKernel[i] = rng.uniformReal(-bound, bound);
        for (Index i = 0; i < g.hiddenKernel.size(); ++i)
            g.hiddenKernel[i] = rng.uniformReal(-bound, bound);
    }
    p.gates[1].bias.setConstant(1.0);  // forget gate starts remembering
    return p;
}

Index ConvLstmParams::parameterCount() const {
    Index n = 0;
    for (const Gate& g : gates) n += g.inputKernel.size() + g.hiddenKernel.size() + g.bias.size();
    return n;
}

Eigen::ArrayXd ConvLstmParams::flatten() const {
    Eigen::ArrayXd flat(parameterCount());
    Index at = 0;
    for (const Gate& g : gates) {
        flat.segment(at, g.inputKernel.size()) = g.inputKernel;
        at += g.inputKernel.size();
        flat.segment(at, g.hiddenKernel.size()) = g.hiddenKernel;
        at += g.hiddenKernel.size();
        flat.segment(at, g.bias.size()) = g.bias;
        at += g.bias.size();
    }
    return flat;
}

void ConvLstmParams::unflatten(const Eigen::ArrayXd& flat) {
    if (flat.size() != parameterCount())
        throw std::invalid_argument("ConvLstmParams::unflatten: size mismatch");
    Index at = 0;
    for (Gate& g : gates) {
        g.inputKernel = flat.segment(at, g.inputKernel.size());
        at += g.inputKernel.size();
        g.hiddenKernel = flat.segment(at, g.hiddenKernel.size());
        at += g.hiddenKernel.size();
        g.bias = flat.segment(at, g.bias.size());
        at += g.bias.size();
    }
}

bool ConvLstmParams::sameShape(const ConvLstmParams& other) const {
    return channels == other.channels && kernelSize == other.kernelSize;
}

bool ConvLstmParams::allFinite() const {
    for (const Gate& g : gates)
        if (!g.inputKernel.isFinite().all() || !g.hiddenKernel.isFinite().all() ||
            !g.bias.isFinite().all())
            return false;
    return true;
}

SemanticMap convlstmForward(const SemanticMap& map, const Grid3d& obs, const RoiMask& mask,
                            const ConvLstmParams& params, ConvLstmStepCache& cache) {
    if (!map.grid.sameShape(obs))
        throw std::invalid_argument("convlstmUpdate: observation/map shape mismatch");
    if (mask.height != map.grid.height || mask.width != map.grid.width)
        throw std::invalid_argument("convlstmUpdate: mask shape mismatch");
    if (params.channels != map.grid.channels)
        throw std::invalid_argument("convlstmUpdate: parameter channel mismatch");

    const Index k = params.kernelSize;
    const Index L = map.grid.channels, H = map.grid.height, W = map.grid.width;
    const Index plane = H * W;

    cache.obs = obs;
    cache.hiddenIn = map.grid;
    cache.cellIn = map.cellState;
    cache.mask = mask;

    Grid3d preI = gatePreactivation(obs, map.grid, params.gates[0], k);
    Grid3d preF = gatePreactivation(obs, map.grid, params.gates[1], k);
    Grid3d preO = gatePreactivation(obs, map.grid, params.gates[2], k);
    Grid3d preG = gatePreactivation(obs, map.grid, params.gates[3], k);

    cache.gateI = Grid3d(L, H, W);
    cache.gateF = Grid3d(L, H, W);
    cache.gateO = Grid3d(L, H, W);
    cache.gateG = Grid3d(L, H, W);
    cache.cellOut = Grid3d(L, H, W);
    cache.hiddenCand = Grid3d(L, H, W);
    for (Index i = 0; i < L * plane; ++i) {
        cache.gateI.data[i] = sigmoid(preI.data[i]);
        cache.gateF.data[i] = sigmoid(preF.data[i]);
        cache.gateO.data[i] = sigmoid(preO.data[i]);
        cache.gateG.data[i] = std::tanh(preG.data[i]);
        cache.cellOut.data[i] =
            cache.gateF.data[i] * map.cellState.data[i] + cache.gateI.data[i] * cache.gateG.data[i];
        cache.hiddenCand.data[i] = cache.gateO.data[i] * std::tanh(cache.cellOut.data[i]);
    }
    cache.softmaxed = softmaxPerCell(cache.hiddenCand);

    SemanticMap out(L, H, W);
    out.grid = map.grid;
    out.cellState = map.cellState;
    for (Index p = 0; p < plane; ++p) {
        if (!mask.data[p]) continue;
        for (Index l = 0; l < L; ++l) {
            out.grid.data[l * plane + p] = cache.softmaxed.data[l * plane + p];
            out.cellState.data[l * plane + p] = cache.cellOut.data[l * plane + p];
        }
    }
    return out;
}

SemanticMap convlstmUpdate(const SemanticMap& map, const Grid3d& obs, const RoiMask& mask,
                           const ConvLstmParams& params) {
    ConvLstmStepCache cache;
    return convlstmForward(map, obs, mask, params, cache);
}

void convlstmBackward(const ConvLstmStepCache& cache, const ConvLstmParams& params,
                      Grid3d& dGrid, Grid3d& dCell, ConvLstmParams& grads) {
    const Index k = params.kernelSize;
    const Index L = cache.obs.channels, H = cache.obs.height, W = cache.obs.width;
    const Index plane = H * W;

    // Undo the ROI blend: softmax path inside the mask, carry-through outside.
    Grid3d dSoft(L, H, W), dGridPrev(L, H, W), dCellOut(L, H, W), dCellPrev(L, H, W);
    for (Index p = 0; p < plane; ++p) {
        const bool inRoi = cache.mask.data[p] != 0;
        for (Index l = 0; l < L; ++l) {
            const Index idx = l * plane + p;
            if (inRoi) {
                dSoft.data[idx] = dGrid.data[idx];
                dCellOut.data[idx] = dCell.data[idx];
            } else {
                dGridPrev.data[idx] = dGrid.data[idx];
                dCellPrev.data[idx] = dCell.data[idx];
            }
        }
    }

    // Through the per-cell softmax: dh_l = s_l * (ds_l - sum_j s_j ds_j).
    Grid3d dHiddenCand(L, H, W);
    for (Index p = 0; p < plane; ++p) {
        if (!cache.mask.data[p]) continue;
        double dot = 0.0;
        for (Index l = 0; l < L; ++l) {
            const Index idx = l * plane + p;
            dot += cache.softmaxed.data[idx] * dSoft.data[idx];
        }
        for (Index l = 0; l < L; ++l) {
            const Index idx = l * plane + p;
            dHiddenCand.data[idx] = cache.softmaxed.data[idx] * (dSoft.data[idx] - dot);
        }
    }

    // Through the cell: h' = o * tanh(c'), c' = f*c + i*g.
    Grid3d dPreI(L, H, W), dPreF(L, H, W), dPreO(L, H, W), dPreG(L, H, W);
    for (Index i = 0; i < L * plane; ++i) {
        const double tc = std::tanh(cache.cellOut.data[i]);
        const double dO = dHiddenCand.data[i] * tc;
        const double dCellTotal =
            dCellOut.data[i] + dHiddenCand.data[i] * cache.gateO.data[i] * (1.0 - tc * tc);
        const double dF = dCellTotal * cache.cellIn.data[i];
        const double dI = dCellTotal * cache.gateG.data[i];
        const double dG = dCellTotal * cache.gateI.data[i];
        dCellPrev.data[i] += dCellTotal * cache.gateF.data[i];

        const double gi = cache.gateI.data[i], gf = cache.gateF.data[i],
                     go = cache.gateO.data[i], gg = cache.gateG.data[i];
        dPreI.data[i] = dI * gi * (1.0 - gi);
        dPreF.data[i] = dF * gf * (1.0 - gf);
        dPreO.data[i] = dO * go * (1.0 - go);
        dPreG.data[i] = dG * (1.0 - gg * gg);
    }

    const std::array<const Grid3d*, 4> dPre = {&dPreI, &dPreF, &dPreO, &dPreG};
    for (int q = 0; q < 4; ++q) {
        convKernelGradAccum(cache.obs, *dPre[q], k, grads.gates[q].inputKernel);
        convKernelGradAccum(cache.hiddenIn, *dPre[q], k, grads.gates[q].hiddenKernel);
        for (Index lo = 0; lo < L; ++lo)
            grads.gates[q].bias[lo] += dPre[q]->data.segment(lo * plane, plane).sum();
        convInputGradAccum(*dPre[q], params.gates[q].hiddenKernel, k, dGridPrev);
    }

    dGrid = std::move(dGridPrev);
    dCell = std::move(dCellPrev);
}

SemanticMap heuristicUpdate(const SemanticMap& map, const Grid3d& obs, double alpha) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("heuristicUpdate: alpha must be in [0,1]");
    if (!map.grid.sameShape(obs))
        throw std::invalid_argument("heuristicUpdate: observation/map shape mismatch");
    SemanticMap out = map;
    for (Index i = 0; i < obs.size(); ++i)
        if (obs.data[i] > 0.0)
            out.grid.data[i] = (1.0 - alpha) * map.grid.data[i] + alpha * obs.data[i];
    return out;
}

}  // namespace gridslam
