#pragma once

// Fully connected lifting network with hand-written backpropagation.
//
//   in(D) -> Linear(D,h) ReLU
//         -> [Linear(h,h) ReLU Linear(h,h) ReLU] + skip     x2
//         -> Linear(h,O)
//
// No batch normalization or dropout. Weights are stored transposed
// (fan_in x fan_out, row-major) so a batch of row vectors multiplies on the
// left. All parameters live in one contiguous buffer.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace perspcrop {

template <class T>
class Mlp {
public:
    Mlp() = default;
    /// He-normal weights, zero biases. Throws InvalidArgument on non-positive sizes.
    Mlp(int input, int hidden, int output, std::uint64_t seed);

    static constexpr int kBlocks = 2;

    /// (D+1)h + 2*kBlocks*(h+1)h + (h+1)O.
    static std::size_t parameter_count(int input, int hidden, int output);
    std::size_t parameter_count() const { return params_.size(); }

    int input_size() const { return in_; }
    int hidden_size() const { return hidden_; }
    int output_size() const { return out_; }

    std::vector<T>& parameters() { return params_; }
    const std::vector<T>& parameters() const { return params_; }

    /// y (batch x O) for x (batch x D), both row-major.
    void forward(const T* x, std::size_t batch, T* y) const;

    /// Weighted squared error averaged over the batch,
    ///   L = (1/B) sum_b sum_j w_j (y_bj - t_bj)^2,
    /// with its gradient w.r.t. every parameter written to `grad`.
    T loss_and_gradient(const T* x, const T* target, const T* weights, std::size_t batch,
                        std::vector<T>& grad);

    template <class U>
    Mlp<U> cast() const {
        Mlp<U> out;
        out.in_ = in_;
        out.hidden_ = hidden_;
        out.out_ = out_;
        out.params_.assign(params_.begin(), params_.end());
        return out;
    }

    nlohmann::json to_json() const;
    static Mlp from_json(const nlohmann::json& j);

private:
    template <class U>
    friend class Mlp;

    struct Layer {
        std::size_t w, b;   // offsets into params_
        int fan_in, fan_out;
    };
    struct Buffers;

    std::vector<Layer> layers() const;
    void run_forward(const T* x, std::size_t batch, Buffers& buf) const;

    int in_ = 0, hidden_ = 0, out_ = 0;
    std::vector<T> params_;
};

/// Adam with bias correction.
template <class T>
class Adam {
public:
    Adam(std::size_t n, T lr = T(1e-3), T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8));
    void step(std::vector<T>& params, const std::vector<T>& grad);
    std::size_t steps() const { return t_; }

private:
    T lr_, b1_, b2_, eps_;
    std::vector<T> m1_, m2_;
    std::size_t t_ = 0;
    double p1_ = 1.0, p2_ = 1.0;
};

struct MlpGradcheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

/// Double-precision network of the given width; every parameter gradient is
/// compared against central differences.
MlpGradcheckResult mlp_gradient_check(int width, std::uint64_t seed);

} // namespace perspcrop
