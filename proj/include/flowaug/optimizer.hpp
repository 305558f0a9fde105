#pragma once

#include <cmath>
#include <vector>

#include "flowaug/net.hpp"

namespace flowaug {

// Adam with decoupled weight decay: the decay term scales parameters by
// (1 - lr*wd) independently of the gradient moments.
template <typename Scalar>
class AdamW {
public:
    AdamW(std::vector<typename Net<Scalar>::ParamRef> params, double weight_decay,
          double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (const auto& p : params_) {
            m_.emplace_back(static_cast<std::size_t>(p.size), Scalar(0));
            v_.emplace_back(static_cast<std::size_t>(p.size), Scalar(0));
        }
    }

    void step(double lr) {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& p = params_[i];
            auto& m = m_[i];
            auto& v = v_[i];
            for (long j = 0; j < p.size; ++j) {
                const double g = static_cast<double>(p.grad[j]);
                double mj = beta1_ * static_cast<double>(m[static_cast<std::size_t>(j)]) +
                            (1.0 - beta1_) * g;
                double vj = beta2_ * static_cast<double>(v[static_cast<std::size_t>(j)]) +
                            (1.0 - beta2_) * g * g;
                m[static_cast<std::size_t>(j)] = static_cast<Scalar>(mj);
                v[static_cast<std::size_t>(j)] = static_cast<Scalar>(vj);
                const double mhat = mj / bc1;
                const double vhat = vj / bc2;
                double value = static_cast<double>(p.value[j]);
                value -= lr * wd_ * value;
                value -= lr * mhat / (std::sqrt(vhat) + eps_);
                p.value[j] = static_cast<Scalar>(value);
            }
        }
    }

private:
    std::vector<typename Net<Scalar>::ParamRef> params_;
    double wd_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<std::vector<Scalar>> m_, v_;
};

// lr(e) = 0.5 * lr0 * (1 + cos(pi * e / max_epochs))
inline double cosine_lr(double lr0, int epoch, int max_epochs) {
    return 0.5 * lr0 * (1.0 + std::cos(M_PI * static_cast<double>(epoch) / max_epochs));
}

}  // namespace flowaug
