#include "disrc/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "disrc/rng.hpp"

namespace disrc {

Mlp init_mlp(const std::vector<int>& dims, std::uint64_t seed) {
  if (dims.size() < 2) throw std::invalid_argument("init_mlp: need at least 2 dims");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("init_mlp: dims must be positive");

  Mlp net;
  net.dims = dims;
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const int in = dims[i];
    const int out = dims[i + 1];
    DenseLayer dense{Mat(out, in), Vec::Zero(out)};
    const double bound = std::sqrt(6.0 / in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) dense.w(r, c) = rng.uniform(-bound, bound);
    net.layers.emplace_back(std::move(dense));
    const bool last = (i + 2 == dims.size());
    if (!last) {
      net.layers.emplace_back(LayerNormLayer{Vec::Ones(out), Vec::Zero(out), 1e-5});
      net.layers.emplace_back(ReluLayer{});
    }
  }
  return net;
}

std::size_t param_count(const Mlp& net) {
  std::size_t n = 0;
  for (const auto& layer : net.layers) {
    if (const auto* d = std::get_if<DenseLayer>(&layer))
      n += static_cast<std::size_t>(d->w.size()) + d->b.size();
    else if (const auto* ln = std::get_if<LayerNormLayer>(&layer))
      n += static_cast<std::size_t>(ln->gain.size()) + ln->bias.size();
  }
  return n;
}

Mat forward(const Mlp& net, const Mat& x, ForwardCache* cache) {
  if (x.rows() != net.in_dim())
    throw std::invalid_argument("forward: input has " + std::to_string(x.rows()) +
                                " rows, net expects " + std::to_string(net.in_dim()));
  if (cache) {
    cache->layers.clear();
    cache->layers.reserve(net.layers.size());
  }
  Mat h = x;
  for (const auto& layer : net.layers) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      Mat y;
      y.noalias() = d->w * h;
      y.colwise() += d->b;
      if (cache) cache->layers.emplace_back(DenseCache{std::move(h)});
      h = std::move(y);
    } else if (const auto* ln = std::get_if<LayerNormLayer>(&layer)) {
      const Eigen::RowVectorXd mu = h.colwise().mean();
      Mat xhat = h.rowwise() - mu;
      const Eigen::RowVectorXd var = xhat.array().square().colwise().mean();
      const Eigen::RowVectorXd inv_std = (var.array() + ln->eps).rsqrt().matrix();
      xhat.array().rowwise() *= inv_std.array();
      Mat y = xhat;
      y.array().colwise() *= ln->gain.array();
      y.array().colwise() += ln->bias.array();
      if (cache) cache->layers.emplace_back(LayerNormCache{std::move(xhat), inv_std});
      h = std::move(y);
    } else {
      Mat y = h.cwiseMax(0.0);
      if (cache) cache->layers.emplace_back(ReluCache{std::move(h)});
      h = std::move(y);
    }
  }
  return h;
}

Vec forward1(const Mlp& net, const Vec& x) { return forward(net, x, nullptr).col(0); }

Grads backward(const Mlp& net, const ForwardCache& cache, const Mat& d_out, Mat* d_in) {
  if (cache.layers.size() != net.layers.size())
    throw std::logic_error("backward: cache does not match network");

  Grads grads;
  grads.layers.resize(net.layers.size());
  Mat g = d_out;
  for (std::size_t idx = net.layers.size(); idx-- > 0;) {
    const auto& layer = net.layers[idx];
    const auto& lc = cache.layers[idx];
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      const auto& c = std::get<DenseCache>(lc);
      DenseGrad dg;
      dg.dw.noalias() = g * c.x.transpose();
      dg.db = g.rowwise().sum();
      grads.layers[idx] = std::move(dg);
      if (idx > 0 || d_in) {
        Mat gx;
        gx.noalias() = d->w.transpose() * g;
        g = std::move(gx);
      }
    } else if (const auto* ln = std::get_if<LayerNormLayer>(&layer)) {
      const auto& c = std::get<LayerNormCache>(lc);
      LayerNormGrad lg;
      lg.dgain = (g.array() * c.xhat.array()).rowwise().sum().matrix();
      lg.dbias = g.rowwise().sum();
      grads.layers[idx] = std::move(lg);
      // dx = inv_std * (dxhat - mean(dxhat) - xhat * mean(dxhat .* xhat))
      Mat dxhat = g;
      dxhat.array().colwise() *= ln->gain.array();
      const Eigen::RowVectorXd m1 = dxhat.colwise().mean();
      const Eigen::RowVectorXd m2 = (dxhat.array() * c.xhat.array()).colwise().mean();
      dxhat.rowwise() -= m1;
      dxhat.array() -= c.xhat.array().rowwise() * m2.array();
      dxhat.array().rowwise() *= c.inv_std.array();
      g = std::move(dxhat);
    } else {
      const auto& c = std::get<ReluCache>(lc);
      grads.layers[idx] = NoGrad{};
      g = (c.x.array() > 0.0).select(g, 0.0);
    }
  }
  if (d_in) *d_in = std::move(g);
  return grads;
}

double global_grad_norm(const Grads& grads) {
  double sq = 0.0;
  for (const auto& lg : grads.layers) {
    if (const auto* dg = std::get_if<DenseGrad>(&lg))
      sq += dg->dw.squaredNorm() + dg->db.squaredNorm();
    else if (const auto* lng = std::get_if<LayerNormGrad>(&lg))
      sq += lng->dgain.squaredNorm() + lng->dbias.squaredNorm();
  }
  return std::sqrt(sq);
}

double clip_grad_norm(Grads& grads, double max_norm) {
  if (max_norm <= 0.0) throw std::invalid_argument("clip_grad_norm: max_norm must be > 0");
  const double norm = global_grad_norm(grads);
  if (!std::isfinite(norm))
    throw std::runtime_error("clip_grad_norm: non-finite gradient norm");
  if (norm <= max_norm) return 1.0;
  const double scale = max_norm / norm;
  for (auto& lg : grads.layers) {
    if (auto* dg = std::get_if<DenseGrad>(&lg)) {
      dg->dw *= scale;
      dg->db *= scale;
    } else if (auto* lng = std::get_if<LayerNormGrad>(&lg)) {
      lng->dgain *= scale;
      lng->dbias *= scale;
    }
  }
  return scale;
}

AdamState make_adam(const Mlp& net, double lr) {
  AdamState st;
  st.lr = lr;
  st.m.resize(net.layers.size());
  st.v.resize(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (const auto* d = std::get_if<DenseLayer>(&net.layers[i])) {
      st.m[i] = DenseGrad{Mat::Zero(d->w.rows(), d->w.cols()), Vec::Zero(d->b.size())};
      st.v[i] = DenseGrad{Mat::Zero(d->w.rows(), d->w.cols()), Vec::Zero(d->b.size())};
    } else if (const auto* ln = std::get_if<LayerNormLayer>(&net.layers[i])) {
      st.m[i] = LayerNormGrad{Vec::Zero(ln->gain.size()), Vec::Zero(ln->bias.size())};
      st.v[i] = LayerNormGrad{Vec::Zero(ln->gain.size()), Vec::Zero(ln->bias.size())};
    } else {
      st.m[i] = NoGrad{};
      st.v[i] = NoGrad{};
    }
  }
  return st;
}

namespace {

// one bias-corrected Adam update for a single parameter block; the wrapper
// arguments alias the stored matrices
template <typename P, typename G, typename M, typename V>
void adam_block(P p, G g, M m, V v, const AdamState& st, double bc1, double bc2) {
  m = st.beta1 * m + (1.0 - st.beta1) * g;
  v = st.beta2 * v + (1.0 - st.beta2) * g.square();
  p -= st.lr * (m / bc1) / ((v / bc2).sqrt() + st.eps);
}

}  // namespace

void adam_step(Mlp& net, const Grads& grads, AdamState& state) {
  if (grads.layers.size() != net.layers.size() || state.m.size() != net.layers.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (auto* d = std::get_if<DenseLayer>(&net.layers[i])) {
      const auto& g = std::get<DenseGrad>(grads.layers[i]);
      auto& m = std::get<DenseGrad>(state.m[i]);
      auto& v = std::get<DenseGrad>(state.v[i]);
      if (g.dw.rows() != d->w.rows() || g.dw.cols() != d->w.cols())
        throw std::invalid_argument("adam_step: gradient shape mismatch");
      adam_block(d->w.array(), g.dw.array(), m.dw.array(), v.dw.array(), state, bc1, bc2);
      adam_block(d->b.array(), g.db.array(), m.db.array(), v.db.array(), state, bc1, bc2);
    } else if (auto* ln = std::get_if<LayerNormLayer>(&net.layers[i])) {
      const auto& g = std::get<LayerNormGrad>(grads.layers[i]);
      auto& m = std::get<LayerNormGrad>(state.m[i]);
      auto& v = std::get<LayerNormGrad>(state.v[i]);
      adam_block(ln->gain.array(), g.dgain.array(), m.dgain.array(), v.dgain.array(),
                 state, bc1, bc2);
      adam_block(ln->bias.array(), g.dbias.array(), m.dbias.array(), v.dbias.array(),
                 state, bc1, bc2);
    }
  }
}

void polyak_update(Mlp& target, const Mlp& online, double tau) {
  if (target.layers.size() != online.layers.size())
    throw std::invalid_argument("polyak_update: mismatched networks");
  for (std::size_t i = 0; i < target.layers.size(); ++i) {
    if (auto* td = std::get_if<DenseLayer>(&target.layers[i])) {
      const auto& od = std::get<DenseLayer>(online.layers[i]);
      td->w = tau * od.w + (1.0 - tau) * td->w;
      td->b = tau * od.b + (1.0 - tau) * td->b;
    } else if (auto* tln = std::get_if<LayerNormLayer>(&target.layers[i])) {
      const auto& oln = std::get<LayerNormLayer>(online.layers[i]);
      tln->gain = tau * oln.gain + (1.0 - tau) * tln->gain;
      tln->bias = tau * oln.bias + (1.0 - tau) * tln->bias;
    }
  }
}

namespace {

constexpr char kMagic[8] = {'M', 'L', 'P', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t u;
  std::memcpy(&u, &d, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double d;
  std::memcpy(&d, &u, 8);
  return d;
}

}  // namespace

void save_mlp(const Mlp& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_mlp: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  put_u32(os, static_cast<std::uint32_t>(net.dims.size()));
  for (int d : net.dims) put_u32(os, static_cast<std::uint32_t>(d));
  for (const auto& layer : net.layers) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      for (Eigen::Index r = 0; r < d->w.rows(); ++r)
        for (Eigen::Index c = 0; c < d->w.cols(); ++c) put_f64(os, d->w(r, c));
      for (Eigen::Index i = 0; i < d->b.size(); ++i) put_f64(os, d->b(i));
    } else if (const auto* ln = std::get_if<LayerNormLayer>(&layer)) {
      for (Eigen::Index i = 0; i < ln->gain.size(); ++i) put_f64(os, ln->gain(i));
      for (Eigen::Index i = 0; i < ln->bias.size(); ++i) put_f64(os, ln->bias(i));
    }
  }
  if (!os) throw std::runtime_error("save_mlp: write failed for " + path);
}

Mlp load_mlp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_mlp: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("load_mlp: bad magic in " + path);
  const std::uint32_t ndims = get_u32(is);
  if (ndims < 2 || ndims > 64) throw std::runtime_error("load_mlp: corrupt dims header");
  std::vector<int> dims(ndims);
  for (auto& d : dims) d = static_cast<int>(get_u32(is));
  Mlp net = init_mlp(dims, 0);
  for (auto& layer : net.layers) {
    if (auto* d = std::get_if<DenseLayer>(&layer)) {
      for (Eigen::Index r = 0; r < d->w.rows(); ++r)
        for (Eigen::Index c = 0; c < d->w.cols(); ++c) d->w(r, c) = get_f64(is);
      for (Eigen::Index i = 0; i < d->b.size(); ++i) d->b(i) = get_f64(is);
    } else if (auto* ln = std::get_if<LayerNormLayer>(&layer)) {
      for (Eigen::Index i = 0; i < ln->gain.size(); ++i) ln->gain(i) = get_f64(is);
      for (Eigen::Index i = 0; i < ln->bias.size(); ++i) ln->bias(i) = get_f64(is);
    }
  }
  if (!is) throw std::runtime_error("load_mlp: truncated file " + path);
  return net;
}

}  // namespace disrc
