#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace disrc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Dense feed-forward stack with hand-written forward/backward passes.
// All arithmetic is 64-bit; batches are stored one sample per column.

struct DenseLayer {
  Mat w;  // out x in
  Vec b;
};

struct LayerNormLayer {
  Vec gain;
  Vec bias;
  double eps = 1e-5;
};

struct ReluLayer {};

using Layer = std::variant<DenseLayer, LayerNormLayer, ReluLayer>;

struct Mlp {
  std::vector<Layer> layers;
  std::vector<int> dims;  // widths passed to init_mlp, kept for checkpoints

  int in_dim() const { return dims.front(); }
  int out_dim() const { return dims.back(); }
};

// Builds Dense -> LayerNorm -> ReLU for every hidden width and a plain Dense
// output layer. Dense weights are uniform in +-sqrt(6/fan_in), biases zero,
// LayerNorm gain 1 / bias 0. Weights are drawn in layer order, each matrix
// row-major, so a seed pins the full parameter vector.
Mlp init_mlp(const std::vector<int>& dims, std::uint64_t seed);

std::size_t param_count(const Mlp& net);

struct DenseCache {
  Mat x;  // layer input
};
struct LayerNormCache {
  Mat xhat;                    // normalized input
  Eigen::RowVectorXd inv_std;  // 1/sqrt(var + eps) per sample
};
struct ReluCache {
  Mat x;  // pre-activation
};
using LayerCache = std::variant<DenseCache, LayerNormCache, ReluCache>;

struct ForwardCache {
  std::vector<LayerCache> layers;
};

// x: in_dim x batch. Pass a cache to keep what backward needs.
Mat forward(const Mlp& net, const Mat& x, ForwardCache* cache);
inline Mat forward(const Mlp& net, const Mat& x) { return forward(net, x, nullptr); }
Vec forward1(const Mlp& net, const Vec& x);

struct DenseGrad {
  Mat dw;
  Vec db;
};
struct LayerNormGrad {
  Vec dgain;
  Vec dbias;
};
struct NoGrad {};
using LayerGrad = std::variant<DenseGrad, LayerNormGrad, NoGrad>;

struct Grads {
  std::vector<LayerGrad> layers;
};

// d_out: loss gradient w.r.t. the network output, one column per sample.
// Returns exact analytic parameter gradients; optionally also the gradient
// w.r.t. the input.
Grads backward(const Mlp& net, const ForwardCache& cache, const Mat& d_out,
               Mat* d_in = nullptr);

// Scales every gradient by max_norm/g when the global L2 norm g exceeds
// max_norm; otherwise leaves them untouched. Returns the applied scale.
// Throws std::runtime_error on non-finite gradients.
double clip_grad_norm(Grads& grads, double max_norm);

double global_grad_norm(const Grads& grads);

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;
  std::vector<LayerGrad> m;  // first moments, gradient-shaped
  std::vector<LayerGrad> v;  // second moments
};

AdamState make_adam(const Mlp& net, double lr);

// Standard bias-corrected Adam update, in place.
void adam_step(Mlp& net, const Grads& grads, AdamState& state);

// target <- tau*online + (1-tau)*target over every parameter.
void polyak_update(Mlp& target, const Mlp& online, double tau);

// Checkpoint layout: magic "MLPCKPT1", u32 dim count, u32 dims, then every
// parameter as little-endian f64 in declaration order (per dense layer W
// row-major then b; per layer-norm gain then bias).
void save_mlp(const Mlp& net, const std::string& path);
Mlp load_mlp(const std::string& path);

}  // namespace disrc
