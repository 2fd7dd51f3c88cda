#include "perspcrop/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "perspcrop/diffcheck.hpp"
#include "perspcrop/errors.hpp"
#include "perspcrop/random.hpp"
#include "perspcrop/simd/kernels.hpp"

namespace perspcrop {

namespace {

template <class T>
void transpose(const T* src, std::size_t rows, std::size_t cols, T* dst) {
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
}

} // namespace

template <class T>
std::size_t Mlp<T>::parameter_count(int input, int hidden, int output) {
    const std::size_t d = input, h = hidden, o = output;
    return (d + 1) * h + 2 * kBlocks * (h + 1) * h + (h + 1) * o;
}

template <class T>
Mlp<T>::Mlp(int input, int hidden, int output, std::uint64_t seed)
    : in_(input), hidden_(hidden), out_(output) {
    if (input < 1 || hidden < 1 || output < 1)
        throw InvalidArgument("network sizes must be positive");
    params_.assign(parameter_count(input, hidden, output), T(0));
    Rng rng(seed);
    for (const Layer& l : layers()) {
        const double sd = std::sqrt(2.0 / l.fan_in);
        for (std::size_t i = 0; i < static_cast<std::size_t>(l.fan_in) * l.fan_out; ++i)
            params_[l.w + i] = static_cast<T>(sd * rng.normal());
    }
}

template <class T>
std::vector<typename Mlp<T>::Layer> Mlp<T>::layers() const {
    std::vector<Layer> out;
    std::size_t off = 0;
    auto add = [&](int fi, int fo) {
        out.push_back({off, off + static_cast<std::size_t>(fi) * fo, fi, fo});
        off += static_cast<std::size_t>(fi + 1) * fo;
    };
    add(in_, hidden_);
    for (int b = 0; b < 2 * kBlocks; ++b) add(hidden_, hidden_);
    add(hidden_, out_);
    return out;
}

// acts[0] = first hidden layer; then per block u, v, h (= h_prev + v).
template <class T>
struct Mlp<T>::Buffers {
    std::vector<std::vector<T>> acts;
    std::vector<T> y;
};

template <class T>
void Mlp<T>::run_forward(const T* x, std::size_t batch, Buffers& buf) const {
    const auto& k = simd::kernels<T>();
    const auto ls = layers();
    const std::size_t h = hidden_;
    buf.acts.assign(1 + 3 * kBlocks, std::vector<T>(batch * h));
    auto linear = [&](const Layer& l, const T* in, T* out) {
        k.gemm(batch, l.fan_out, l.fan_in, in, l.fan_in, params_.data() + l.w, l.fan_out, out,
               l.fan_out, false);
        k.add_rows(out, batch, l.fan_out, l.fan_out, params_.data() + l.b);
    };
    linear(ls[0], x, buf.acts[0].data());
    k.relu(buf.acts[0].data(), buf.acts[0].data(), batch * h);
    for (int b = 0; b < kBlocks; ++b) {
        const T* hin = buf.acts[3 * b].data();
        T* u = buf.acts[3 * b + 1].data();
        T* v = buf.acts[3 * b + 2].data();
        T* hout = buf.acts[3 * b + 3].data();
        linear(ls[1 + 2 * b], hin, u);
        k.relu(u, u, batch * h);
        linear(ls[2 + 2 * b], u, v);
        k.relu(v, v, batch * h);
        for (std::size_t i = 0; i < batch * h; ++i) hout[i] = hin[i] + v[i];
    }
    buf.y.resize(batch * out_);
    linear(ls.back(), buf.acts.back().data(), buf.y.data());
}

template <class T>
void Mlp<T>::forward(const T* x, std::size_t batch, T* y) const {
    Buffers buf;
    run_forward(x, batch, buf);
    std::copy(buf.y.begin(), buf.y.end(), y);
}

template <class T>
T Mlp<T>::loss_and_gradient(const T* x, const T* target, const T* weights, std::size_t batch,
                            std::vector<T>& grad) {
    if (batch == 0) throw InvalidArgument("empty batch");
    const auto& k = simd::kernels<T>();
    const auto ls = layers();
    const std::size_t h = hidden_, o = out_;
    Buffers buf;
    run_forward(x, batch, buf);

    T loss = T(0);
    std::vector<T> dy(batch * o);
    const T inv_b = T(1) / static_cast<T>(batch);
    for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = 0; j < o; ++j) {
            const T r = buf.y[i * o + j] - target[i * o + j];
            loss += weights[j] * r * r;
            dy[i * o + j] = T(2) * weights[j] * r * inv_b;
        }
    loss *= inv_b;

    grad.assign(params_.size(), T(0));
    std::vector<T> xt, wt;
    // Parameter gradient of one linear layer, and optionally the input gradient.
    auto backward = [&](const Layer& l, const T* in, const T* dz, T* din) {
        xt.resize(static_cast<std::size_t>(l.fan_in) * batch);
        transpose(in, batch, l.fan_in, xt.data());
        k.gemm(l.fan_in, l.fan_out, batch, xt.data(), batch, dz, l.fan_out, grad.data() + l.w,
               l.fan_out, false);
        k.column_sum(dz, batch, l.fan_out, l.fan_out, grad.data() + l.b);
        if (din) {
            wt.resize(static_cast<std::size_t>(l.fan_in) * l.fan_out);
            transpose(params_.data() + l.w, l.fan_in, l.fan_out, wt.data());
            k.gemm(batch, l.fan_in, l.fan_out, dz, l.fan_out, wt.data(), l.fan_in, din, l.fan_in,
                   false);
        }
    };

    std::vector<T> dh(batch * h), dv(batch * h), du(batch * h), dskip(batch * h);
    backward(ls.back(), buf.acts.back().data(), dy.data(), dh.data());
    for (int b = kBlocks - 1; b >= 0; --b) {
        const T* hin = buf.acts[3 * b].data();
        const T* u = buf.acts[3 * b + 1].data();
        const T* v = buf.acts[3 * b + 2].data();
        dv = dh;
        k.relu_mask(v, dv.data(), batch * h);
        backward(ls[2 + 2 * b], u, dv.data(), du.data());
        k.relu_mask(u, du.data(), batch * h);
        backward(ls[1 + 2 * b], hin, du.data(), dskip.data());
        for (std::size_t i = 0; i < batch * h; ++i) dh[i] += dskip[i];
    }
    k.relu_mask(buf.acts[0].data(), dh.data(), batch * h);
    backward(ls[0], x, dh.data(), nullptr);
    return loss;
}

template <class T>
nlohmann::json Mlp<T>::to_json() const {
    nlohmann::json j;
    j["input"] = in_;
    j["hidden"] = hidden_;
    j["output"] = out_;
    j["blocks"] = kBlocks;
    j["parameters"] = params_;
    return j;
}

template <class T>
Mlp<T> Mlp<T>::from_json(const nlohmann::json& j) {
    try {
        if (j.at("blocks").get<int>() != kBlocks) throw InvalidArgument("unsupported block count");
        Mlp m;
        m.in_ = j.at("input").get<int>();
        m.hidden_ = j.at("hidden").get<int>();
        m.out_ = j.at("output").get<int>();
        if (m.in_ < 1 || m.hidden_ < 1 || m.out_ < 1)
            throw InvalidArgument("network sizes must be positive");
        m.params_ = j.at("parameters").get<std::vector<T>>();
        if (m.params_.size() != parameter_count(m.in_, m.hidden_, m.out_))
            throw InvalidArgument("parameter count does not match the architecture");
        for (T p : m.params_)
            if (!std::isfinite(p)) throw InvalidArgument("non-finite network parameter");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed network: ") + e.what());
    }
}

template class Mlp<float>;
template class Mlp<double>;

template <class T>
Adam<T>::Adam(std::size_t n, T lr, T beta1, T beta2, T eps)
    : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m1_(n, T(0)), m2_(n, T(0)) {
    if (!(lr > T(0)) || !(beta1 >= T(0) && beta1 < T(1)) || !(beta2 >= T(0) && beta2 < T(1)) ||
        !(eps > T(0)))
        throw InvalidArgument("invalid Adam hyperparameters");
}

template <class T>
void Adam<T>::step(std::vector<T>& params, const std::vector<T>& grad) {
    if (params.size() != m1_.size() || grad.size() != m1_.size())
        throw InvalidArgument("Adam: size mismatch");
    ++t_;
    p1_ *= static_cast<double>(b1_);
    p2_ *= static_cast<double>(b2_);
    simd::kernels<T>().adam(params.data(), grad.data(), m1_.data(), m2_.data(), params.size(), lr_,
                            b1_, b2_, eps_, static_cast<T>(1.0 - p1_), static_cast<T>(1.0 - p2_));
}

template class Adam<float>;
template class Adam<double>;

MlpGradcheckResult mlp_gradient_check(int width, std::uint64_t seed) {
    constexpr int in = 6, out = 9, batch = 5;
    Mlp<double> net(in, width, out, seed);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    // Nonzero biases so that no unit sits exactly at the rectifier kink.
    for (double& p : net.parameters()) p += 0.05 * rng.normal();
    std::vector<double> x(batch * in), t(batch * out), w(out);
    for (double& v : x) v = rng.normal();
    for (double& v : t) v = rng.normal();
    for (double& v : w) v = rng.uniform(0.5, 2.0);

    std::vector<double> grad;
    net.loss_and_gradient(x.data(), t.data(), w.data(), batch, grad);
    auto& p = net.parameters();
    Eigen::MatrixXd analytic(p.size(), 1), numeric(p.size(), 1);
    std::vector<double> scratch;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double orig = p[i];
        p[i] = orig + kGeometryStep;
        const double lp = net.loss_and_gradient(x.data(), t.data(), w.data(), batch, scratch);
        p[i] = orig - kGeometryStep;
        const double lm = net.loss_and_gradient(x.data(), t.data(), w.data(), batch, scratch);
        p[i] = orig;
        analytic(i, 0) = grad[i];
        numeric(i, 0) = (lp - lm) / (2.0 * kGeometryStep);
    }
    return {max_relative_error(analytic, numeric), p.size()};
}

} // namespace perspcrop
