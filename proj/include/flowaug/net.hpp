#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "flowaug/flow.hpp"
#include "flowaug/normalize.hpp"
#include "flowaug/rng.hpp"

namespace flowaug {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Activations are channels x (batch * length), sample-major column blocks:
// column (n*L + l) holds the channel vector of sample n at position l.

namespace nn {

template <typename Scalar>
struct Conv1d {
    int in_ch = 0, out_ch = 0, kernel = 3, stride = 1, pad = 1;
    Mat<Scalar> weight;       // out_ch x (kernel * in_ch), column j*in_ch + c
    Mat<Scalar> grad_weight;

    Mat<Scalar> col_;  // im2col cache
    int l_in_ = 0, batch_ = 0;

    Conv1d() = default;
    Conv1d(int in, int out, int k, int s, int p) : in_ch(in), out_ch(out), kernel(k), stride(s), pad(p) {
        weight.setZero(out_ch, kernel * in_ch);
        grad_weight.setZero(out_ch, kernel * in_ch);
    }

    int out_len(int l_in) const { return (l_in + 2 * pad - kernel) / stride + 1; }
    long param_count() const { return static_cast<long>(weight.size()); }

    void init_he(RngStream& rng) {
        const double sd = std::sqrt(2.0 / static_cast<double>(in_ch * kernel));
        for (Eigen::Index i = 0; i < weight.size(); ++i)
            weight.data()[i] = static_cast<Scalar>(sd * rng.gaussian());
    }

    Mat<Scalar> forward(const Mat<Scalar>& x, int batch) {
        batch_ = batch;
        l_in_ = static_cast<int>(x.cols()) / batch;
        const int lo = out_len(l_in_);
        col_.setZero(kernel * in_ch, static_cast<Eigen::Index>(batch) * lo);
        for (int n = 0; n < batch; ++n) {
            for (int l = 0; l < lo; ++l) {
                const Eigen::Index dst = static_cast<Eigen::Index>(n) * lo + l;
                for (int j = 0; j < kernel; ++j) {
                    const int src = l * stride - pad + j;
                    if (src < 0 || src >= l_in_) continue;
                    col_.block(static_cast<Eigen::Index>(j) * in_ch, dst, in_ch, 1) =
                        x.col(static_cast<Eigen::Index>(n) * l_in_ + src);
                }
            }
        }
        return weight * col_;
    }

    Mat<Scalar> backward(const Mat<Scalar>& gy) {
        grad_weight = gy * col_.transpose();
        Mat<Scalar> gcol = weight.transpose() * gy;
        Mat<Scalar> gx = Mat<Scalar>::Zero(in_ch, static_cast<Eigen::Index>(batch_) * l_in_);
        const int lo = out_len(l_in_);
        for (int n = 0; n < batch_; ++n) {
            for (int l = 0; l < lo; ++l) {
                const Eigen::Index src_col = static_cast<Eigen::Index>(n) * lo + l;
                for (int j = 0; j < kernel; ++j) {
                    const int src = l * stride - pad + j;
                    if (src < 0 || src >= l_in_) continue;
                    gx.col(static_cast<Eigen::Index>(n) * l_in_ + src) +=
                        gcol.block(static_cast<Eigen::Index>(j) * in_ch, src_col, in_ch, 1);
                }
            }
        }
        return gx;
    }
};

template <typename Scalar>
struct BatchNorm1d {
    int ch = 0;
    Vec<Scalar> gamma, beta, grad_gamma, grad_beta;
    Vec<Scalar> running_mean, running_var;
    Scalar momentum = Scalar(0.1);
    Scalar eps = Scalar(1e-5);

    Mat<Scalar> xhat_;
    Vec<Scalar> inv_std_;

    BatchNorm1d() = default;
    explicit BatchNorm1d(int channels) : ch(channels) {
        gamma = Vec<Scalar>::Ones(ch);
        beta = Vec<Scalar>::Zero(ch);
        grad_gamma = Vec<Scalar>::Zero(ch);
        grad_beta = Vec<Scalar>::Zero(ch);
        running_mean = Vec<Scalar>::Zero(ch);
        running_var = Vec<Scalar>::Ones(ch);
    }

    long param_count() const { return 2L * ch; }

    Mat<Scalar> forward(const Mat<Scalar>& x, bool train) {
        if (!train) {
            Vec<Scalar> inv = (running_var.array() + eps).sqrt().inverse().matrix();
            Vec<Scalar> scale = gamma.cwiseProduct(inv);
            Mat<Scalar> out = ((x.colwise() - running_mean).array().colwise() * scale.array()).matrix();
            out.colwise() += beta;
            return out;
        }
        const auto m = static_cast<Scalar>(x.cols());
        Vec<Scalar> mean = x.rowwise().mean();
        Mat<Scalar> centered = x.colwise() - mean;
        Vec<Scalar> var = (centered.array().square().rowwise().sum() / m).matrix();  // biased
        running_mean = (Scalar(1) - momentum) * running_mean + momentum * mean;
        running_var = (Scalar(1) - momentum) * running_var + momentum * var;
        inv_std_ = (var.array() + eps).sqrt().inverse().matrix();
        xhat_ = (centered.array().colwise() * inv_std_.array()).matrix();
        Mat<Scalar> out = (xhat_.array().colwise() * gamma.array()).matrix();
        out.colwise() += beta;
        return out;
    }

    Mat<Scalar> backward(const Mat<Scalar>& gy) {
        const auto m = static_cast<Scalar>(gy.cols());
        grad_gamma = (gy.array() * xhat_.array()).rowwise().sum().matrix();
        grad_beta = gy.rowwise().sum();
        Mat<Scalar> dxhat = (gy.array().colwise() * gamma.array()).matrix();
        Vec<Scalar> sum_dxhat = dxhat.rowwise().sum();
        Vec<Scalar> sum_dxhat_xhat = (dxhat.array() * xhat_.array()).rowwise().sum().matrix();
        Mat<Scalar> dx = (dxhat * m).colwise() - sum_dxhat;
        dx.array() -= xhat_.array().colwise() * sum_dxhat_xhat.array();
        dx.array().colwise() *= (inv_std_.array() / m);
        return dx;
    }
};

template <typename Scalar>
struct Relu {
    Mat<Scalar> mask_;
    Mat<Scalar> forward(const Mat<Scalar>& x) {
        mask_ = (x.array() > Scalar(0)).template cast<Scalar>().matrix();
        return x.cwiseProduct(mask_);
    }
    Mat<Scalar> backward(const Mat<Scalar>& gy) const { return gy.cwiseProduct(mask_); }
};

template <typename Scalar>
struct Linear {
    Mat<Scalar> weight;  // out x in
    Vec<Scalar> bias;
    Mat<Scalar> grad_weight;
    Vec<Scalar> grad_bias;
    Mat<Scalar> in_;

    Linear() = default;
    Linear(int in, int out) {
        weight.setZero(out, in);
        bias.setZero(out);
        grad_weight.setZero(out, in);
        grad_bias.setZero(out);
    }

    long param_count() const { return static_cast<long>(weight.size() + bias.size()); }

    void init_uniform(RngStream& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(weight.cols()));
        for (Eigen::Index i = 0; i < weight.size(); ++i)
            weight.data()[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
        for (Eigen::Index i = 0; i < bias.size(); ++i)
            bias.data()[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
    }

    Mat<Scalar> forward(const Mat<Scalar>& x) {
        in_ = x;
        return (weight * x).colwise() + bias;
    }
    Mat<Scalar> backward(const Mat<Scalar>& gy) {
        grad_weight = gy * in_.transpose();
        grad_bias = gy.rowwise().sum();
        return weight.transpose() * gy;
    }
};

// conv(s2) -> BN -> ReLU -> conv -> BN, plus conv1x1(s2) -> BN shortcut,
// summed before the closing ReLU.
template <typename Scalar>
struct ResBlock {
    Conv1d<Scalar> conv1, conv2, shortcut;
    BatchNorm1d<Scalar> bn1, bn2, bn_short;
    Relu<Scalar> relu1, relu2;

    ResBlock() = default;
    ResBlock(int in_ch, int out_ch)
        : conv1(in_ch, out_ch, 3, 2, 1),
          conv2(out_ch, out_ch, 3, 1, 1),
          shortcut(in_ch, out_ch, 1, 2, 0),
          bn1(out_ch),
          bn2(out_ch),
          bn_short(out_ch) {}

    Mat<Scalar> forward(const Mat<Scalar>& x, int batch, bool train) {
        Mat<Scalar> main = relu1.forward(bn1.forward(conv1.forward(x, batch), train));
        main = bn2.forward(conv2.forward(main, batch), train);
        Mat<Scalar> skip = bn_short.forward(shortcut.forward(x, batch), train);
        return relu2.forward(main + skip);
    }

    Mat<Scalar> backward(const Mat<Scalar>& gy) {
        Mat<Scalar> gsum = relu2.backward(gy);
        Mat<Scalar> gx = shortcut.backward(bn_short.backward(gsum));
        Mat<Scalar> gmain = conv1.backward(
            bn1.backward(relu1.backward(conv2.backward(bn2.backward(gsum)))));
        return gx + gmain;
    }
};

}  // namespace nn

struct ModelConfig {
    int n_classes = 2;
    int width = 64;  // stem/block-1 channels; block 2 doubles this
};

struct LayerInfo {
    std::string type;
    int out_ch;
    int out_len;
    long params;
};

// Compact 1d CNN: stem conv+BN+ReLU, two stride-2 residual blocks, global
// average pooling into a (2*width)-dim latent, linear classification head.
template <typename Scalar>
class Net {
public:
    Net() = default;
    Net(ModelConfig cfg, std::uint64_t seed) : cfg_(cfg) {
        if (cfg.n_classes < 2) throw std::invalid_argument("model needs at least 2 classes");
        const int w = cfg.width;
        stem_ = nn::Conv1d<Scalar>(kFeatures, w, 3, 1, 1);
        bn_stem_ = nn::BatchNorm1d<Scalar>(w);
        block1_ = nn::ResBlock<Scalar>(w, w);
        block2_ = nn::ResBlock<Scalar>(w, 2 * w);
        head_ = nn::Linear<Scalar>(2 * w, cfg.n_classes);

        RngStream rng = RngStream(seed).fork("model_init");
        stem_.init_he(rng);
        block1_.conv1.init_he(rng);
        block1_.conv2.init_he(rng);
        block1_.shortcut.init_he(rng);
        block2_.conv1.init_he(rng);
        block2_.conv2.init_he(rng);
        block2_.shortcut.init_he(rng);
        head_.init_uniform(rng);
    }

    const ModelConfig& config() const { return cfg_; }
    int latent_dim() const { return 2 * cfg_.width; }

    // logits: n_classes x batch
    Mat<Scalar> forward(const Mat<Scalar>& x, int batch, bool train) {
        Mat<Scalar> h = relu_stem_.forward(bn_stem_.forward(stem_.forward(x, batch), train));
        h = block1_.forward(h, batch, train);
        h = block2_.forward(h, batch, train);
        pool_len_ = static_cast<int>(h.cols()) / batch;
        latent_.resize(2 * cfg_.width, batch);
        for (int n = 0; n < batch; ++n)
            latent_.col(n) = h.middleCols(static_cast<Eigen::Index>(n) * pool_len_, pool_len_)
                                 .rowwise()
                                 .mean();
        return head_.forward(latent_);
    }

    // post-pool features of the last forward pass
    const Mat<Scalar>& latent() const { return latent_; }

    void backward(const Mat<Scalar>& glogits) {
        Mat<Scalar> gpool = head_.backward(glogits);
        const int batch = static_cast<int>(gpool.cols());
        Mat<Scalar> gh(2 * cfg_.width, static_cast<Eigen::Index>(batch) * pool_len_);
        for (int n = 0; n < batch; ++n)
            for (int l = 0; l < pool_len_; ++l)
                gh.col(static_cast<Eigen::Index>(n) * pool_len_ + l) =
                    gpool.col(n) / static_cast<Scalar>(pool_len_);
        Mat<Scalar> gx = block1_.backward(block2_.backward(gh));
        stem_.backward(bn_stem_.backward(relu_stem_.backward(gx)));
    }

    struct ParamRef {
        std::string name;
        Scalar* value;
        Scalar* grad;
        long size;
    };

    std::vector<ParamRef> parameters() {
        std::vector<ParamRef> out;
        auto conv = [&](const std::string& name, nn::Conv1d<Scalar>& c) {
            out.push_back({name + ".weight", c.weight.data(), c.grad_weight.data(),
                           static_cast<long>(c.weight.size())});
        };
        auto bn = [&](const std::string& name, nn::BatchNorm1d<Scalar>& b) {
            out.push_back({name + ".gamma", b.gamma.data(), b.grad_gamma.data(),
                           static_cast<long>(b.gamma.size())});
            out.push_back({name + ".beta", b.beta.data(), b.grad_beta.data(),
                           static_cast<long>(b.beta.size())});
        };
        conv("stem", stem_);
        bn("bn_stem", bn_stem_);
        auto block = [&](const std::string& name, nn::ResBlock<Scalar>& blk) {
            conv(name + ".conv1", blk.conv1);
            bn(name + ".bn1", blk.bn1);
            conv(name + ".conv2", blk.conv2);
            bn(name + ".bn2", blk.bn2);
            conv(name + ".shortcut", blk.shortcut);
            bn(name + ".bn_short", blk.bn_short);
        };
        block("block1", block1_);
        block("block2", block2_);
        out.push_back({"head.weight", head_.weight.data(), head_.grad_weight.data(),
                       static_cast<long>(head_.weight.size())});
        out.push_back({"head.bias", head_.bias.data(), head_.grad_bias.data(),
                       static_cast<long>(head_.bias.size())});
        return out;
    }

    std::vector<std::pair<std::string, Vec<Scalar>*>> running_stats() {
        std::vector<std::pair<std::string, Vec<Scalar>*>> out;
        auto bn = [&](const std::string& name, nn::BatchNorm1d<Scalar>& b) {
            out.emplace_back(name + ".running_mean", &b.running_mean);
            out.emplace_back(name + ".running_var", &b.running_var);
        };
        bn("bn_stem", bn_stem_);
        bn("block1.bn1", block1_.bn1);
        bn("block1.bn2", block1_.bn2);
        bn("block1.bn_short", block1_.bn_short);
        bn("block2.bn1", block2_.bn1);
        bn("block2.bn2", block2_.bn2);
        bn("block2.bn_short", block2_.bn_short);
        return out;
    }

    long param_count() const {
        long total = 0;
        for (const auto& layer : summary()) total += layer.params;
        return total;
    }

    // Layer table in forward-registration order (pooling included).
    std::vector<LayerInfo> summary() const {
        const int w = cfg_.width;
        std::vector<LayerInfo> out;
        out.push_back({"Conv1d", w, kSeqLen, stem_.param_count()});
        out.push_back({"BatchNorm1d", w, kSeqLen, bn_stem_.param_count()});
        const int l1 = kSeqLen / 2, l2 = kSeqLen / 4;
        auto block = [&](const nn::ResBlock<Scalar>& blk, int ch, int len) {
            out.push_back({"Conv1d", ch, len, blk.conv1.param_count()});
            out.push_back({"BatchNorm1d", ch, len, blk.bn1.param_count()});
            out.push_back({"Conv1d", ch, len, blk.conv2.param_count()});
            out.push_back({"BatchNorm1d", ch, len, blk.bn2.param_count()});
            out.push_back({"Conv1d", ch, len, blk.shortcut.param_count()});
            out.push_back({"BatchNorm1d", ch, len, blk.bn_short.param_count()});
        };
        block(block1_, w, l1);
        block(block2_, 2 * w, l2);
        out.push_back({"AdaptiveAvgPool1d", 2 * w, 1, 0});
        out.push_back({"Linear", cfg_.n_classes, 1, head_.param_count()});
        return out;
    }

private:
    ModelConfig cfg_;
    nn::Conv1d<Scalar> stem_;
    nn::BatchNorm1d<Scalar> bn_stem_;
    nn::Relu<Scalar> relu_stem_;
    nn::ResBlock<Scalar> block1_, block2_;
    nn::Linear<Scalar> head_;
    Mat<Scalar> latent_;
    int pool_len_ = 1;
};

// Mean softmax cross-entropy; fills dlogits with (softmax - onehot)/batch.
template <typename Scalar>
Scalar softmax_xent(const Mat<Scalar>& logits, const std::vector<int>& labels,
                    Mat<Scalar>* dlogits = nullptr) {
    const auto batch = static_cast<int>(logits.cols());
    if (batch != static_cast<int>(labels.size()))
        throw std::invalid_argument("logits/labels size mismatch");
    Mat<Scalar> p = logits;
    Scalar loss = 0;
    for (int n = 0; n < batch; ++n) {
        const Scalar mx = p.col(n).maxCoeff();
        p.col(n) = (p.col(n).array() - mx).exp();
        const Scalar z = p.col(n).sum();
        p.col(n) /= z;
        loss -= std::log(std::max(p(labels[static_cast<std::size_t>(n)], n),
                                  std::numeric_limits<Scalar>::min()));
    }
    loss /= static_cast<Scalar>(batch);
    if (dlogits) {
        *dlogits = p / static_cast<Scalar>(batch);
        for (int n = 0; n < batch; ++n)
            (*dlogits)(labels[static_cast<std::size_t>(n)], n) -= Scalar(1) / static_cast<Scalar>(batch);
    }
    return loss;
}

// Packs normalized flows into the channels x (batch * length) layout.
template <typename Scalar>
Mat<Scalar> batch_matrix(const std::vector<NormalizedTensor>& batch) {
    Mat<Scalar> x(kFeatures, static_cast<Eigen::Index>(batch.size()) * kSeqLen);
    for (std::size_t n = 0; n < batch.size(); ++n)
        for (int t = 0; t < kSeqLen; ++t)
            for (int d = 0; d < kFeatures; ++d)
                x(d, static_cast<Eigen::Index>(n) * kSeqLen + t) =
                    static_cast<Scalar>(batch[n].at(d, t));
    return x;
}

}  // namespace flowaug
