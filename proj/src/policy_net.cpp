#include "policy_net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace cvt {

namespace {

constexpr int kKernel = 3;
constexpr int kPad = 1;

int conv_out(int in, int stride) { return (in - 1) / stride + 1; }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Fixed-order four-lane dot product: breaks the serial FP dependency chain
// without making the summation order depend on buffer alignment, which would
// break bitwise reproducibility between runs.
double dot4(const double* a, const double* b, int n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += a[k] * b[k];
    s1 += a[k + 1] * b[k + 1];
    s2 += a[k + 2] * b[k + 2];
    s3 += a[k + 3] * b[k + 3];
  }
  for (; k < n; ++k) s0 += a[k] * b[k];
  return (s0 + s1) + (s2 + s3);
}

// Output row/column range for which the kernel tap (ky or kx) stays inside
// the padded input: in = out * stride + tap - kPad must land in [0, size_in).
void tap_range(int tap, int stride, int size_in, int size_out, int& lo, int& hi) {
  lo = tap < kPad ? 1 : 0;  // only out = 0 can underrun, and only for tap 0
  hi = std::min(size_out - 1, (size_in - tap) / stride);
}

// Kernel-position-ordered 3x3 convolution: the tap weight is hoisted and the
// inner loop runs over a guard-free pixel range.
void conv_forward(const double* w, const double* b, const double* in, double* out,
                  int cin, int hin, int win, int cout, int stride, int hout, int wout) {
  for (int oc = 0; oc < cout; ++oc) {
    double* obase = out + static_cast<std::size_t>(oc) * hout * wout;
    std::fill(obase, obase + static_cast<std::size_t>(hout) * wout, b[oc]);
    for (int ic = 0; ic < cin; ++ic) {
      const double* ibase = in + static_cast<std::size_t>(ic) * hin * win;
      const double* wbase = w + (static_cast<std::size_t>(oc) * cin + ic) * kKernel * kKernel;
      for (int ky = 0; ky < kKernel; ++ky) {
        int oy_lo, oy_hi;
        tap_range(ky, stride, hin, hout, oy_lo, oy_hi);
        for (int kx = 0; kx < kKernel; ++kx) {
          int ox_lo, ox_hi;
          tap_range(kx, stride, win, wout, ox_lo, ox_hi);
          double wv = wbase[ky * kKernel + kx];
          for (int oy = oy_lo; oy <= oy_hi; ++oy) {
            const double* irow = ibase + (oy * stride + ky - kPad) * win + kx - kPad;
            double* orow = obase + oy * wout;
            for (int ox = ox_lo; ox <= ox_hi; ++ox) orow[ox] += wv * irow[ox * stride];
          }
        }
      }
    }
  }
}

void conv_backward(const double* w, const double* in, const double* dout,
                   double* dw, double* db, double* din,
                   int cin, int hin, int win, int cout, int stride, int hout, int wout) {
  for (int oc = 0; oc < cout; ++oc) {
    const double* gbase = dout + static_cast<std::size_t>(oc) * hout * wout;
    double acc_b = 0.0;
    for (int i = 0; i < hout * wout; ++i) acc_b += gbase[i];
    db[oc] += acc_b;
    for (int ic = 0; ic < cin; ++ic) {
      const double* ibase = in + static_cast<std::size_t>(ic) * hin * win;
      double* dibase = din ? din + static_cast<std::size_t>(ic) * hin * win : nullptr;
      const double* wbase = w + (static_cast<std::size_t>(oc) * cin + ic) * kKernel * kKernel;
      double* dwbase = dw + (static_cast<std::size_t>(oc) * cin + ic) * kKernel * kKernel;
      for (int ky = 0; ky < kKernel; ++ky) {
        int oy_lo, oy_hi;
        tap_range(ky, stride, hin, hout, oy_lo, oy_hi);
        for (int kx = 0; kx < kKernel; ++kx) {
          int ox_lo, ox_hi;
          tap_range(kx, stride, win, wout, ox_lo, ox_hi);
          double wv = wbase[ky * kKernel + kx];
          double acc_w = 0.0;
          for (int oy = oy_lo; oy <= oy_hi; ++oy) {
            int ioff = (oy * stride + ky - kPad) * win + kx - kPad;
            const double* irow = ibase + ioff;
            const double* grow = gbase + oy * wout;
            if (din) {
              double* dirow = dibase + ioff;
              for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                double g = grow[ox];
                acc_w += g * irow[ox * stride];
                dirow[ox * stride] += g * wv;
              }
            } else {
              for (int ox = ox_lo; ox <= ox_hi; ++ox) acc_w += grow[ox] * irow[ox * stride];
            }
          }
          dwbase[ky * kKernel + kx] += acc_w;
        }
      }
    }
  }
}

void fill_uniform(Tensor& t, int fan_in, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : t.data) v = rng.uniform(-bound, bound);
}

}  // namespace

int NetDescriptor::out_h(int layer) const {
  int h = input_h;
  for (int i = 0; i <= layer; ++i) h = conv_out(h, convs[i].stride);
  return h;
}

int NetDescriptor::out_w(int layer) const {
  int w = input_w;
  for (int i = 0; i <= layer; ++i) w = conv_out(w, convs[i].stride);
  return w;
}

int NetDescriptor::flat_size() const {
  int last = static_cast<int>(convs.size()) - 1;
  return convs[last].filters * out_h(last) * out_w(last);
}

std::string NetDescriptor::to_text() const {
  std::ostringstream os;
  os << "input=" << input_c << "x" << input_h << "x" << input_w << ";convs=";
  for (std::size_t i = 0; i < convs.size(); ++i) {
    if (i) os << ",";
    os << convs[i].filters << "s" << convs[i].stride;
  }
  os << ";hidden=" << hidden << ";actions=" << n_actions;
  return os.str();
}

NetDescriptor NetDescriptor::from_text(const std::string& text) {
  NetDescriptor d;
  d.convs.clear();
  char convbuf[256] = {0};
  if (std::sscanf(text.c_str(), "input=%dx%dx%d;convs=%255[0-9s,];hidden=%d;actions=%d",
                  &d.input_c, &d.input_h, &d.input_w, convbuf, &d.hidden, &d.n_actions) != 6)
    throw std::runtime_error("bad architecture descriptor: " + text);
  std::istringstream cs(convbuf);
  std::string item;
  while (std::getline(cs, item, ',')) {
    ConvSpec spec;
    if (std::sscanf(item.c_str(), "%ds%d", &spec.filters, &spec.stride) != 2)
      throw std::runtime_error("bad conv spec in descriptor: " + item);
    d.convs.push_back(spec);
  }
  if (d.convs.empty()) throw std::runtime_error("descriptor has no conv layers");
  return d;
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  int n = 1;
  for (int d : shape) n *= d;
  data.assign(n, 0.0);
}

Tensor& ParameterSet::at(const std::string& name) {
  for (auto& [n, t] : tensors)
    if (n == name) return t;
  throw std::out_of_range("no tensor named " + name);
}

const Tensor& ParameterSet::at(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw std::out_of_range("no tensor named " + name);
}

bool ParameterSet::has(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return true;
  return false;
}

ParameterSet zero_params(const NetDescriptor& desc) {
  ParameterSet p;
  p.desc = desc;
  int cin = desc.input_c;
  for (std::size_t i = 0; i < desc.convs.size(); ++i) {
    std::string base = "conv" + std::to_string(i + 1);
    p.tensors.emplace_back(base + ".w", Tensor({desc.convs[i].filters, cin, kKernel, kKernel}));
    p.tensors.emplace_back(base + ".b", Tensor({desc.convs[i].filters}));
    cin = desc.convs[i].filters;
  }
  int flat = desc.flat_size();
  int H = desc.hidden;
  p.tensors.emplace_back("lstm.wx", Tensor({4 * H, flat}));
  p.tensors.emplace_back("lstm.wh", Tensor({4 * H, H}));
  p.tensors.emplace_back("lstm.b", Tensor({4 * H}));
  p.tensors.emplace_back("pi.w", Tensor({desc.n_actions, H}));
  p.tensors.emplace_back("pi.b", Tensor({desc.n_actions}));
  p.tensors.emplace_back("v.w", Tensor({1, H}));
  p.tensors.emplace_back("v.b", Tensor({1}));
  return p;
}

ParameterSet init_params(const NetDescriptor& desc, std::uint64_t seed) {
  ParameterSet p = zero_params(desc);
  Rng rng(seed);
  int cin = desc.input_c;
  for (std::size_t i = 0; i < desc.convs.size(); ++i) {
    std::string base = "conv" + std::to_string(i + 1);
    int fan_in = cin * kKernel * kKernel;
    fill_uniform(p.at(base + ".w"), fan_in, rng);
    fill_uniform(p.at(base + ".b"), fan_in, rng);
    cin = desc.convs[i].filters;
  }
  int flat = desc.flat_size();
  int H = desc.hidden;
  fill_uniform(p.at("lstm.wx"), flat, rng);
  fill_uniform(p.at("lstm.wh"), H, rng);
  fill_uniform(p.at("lstm.b"), H, rng);
  fill_uniform(p.at("pi.w"), H, rng);
  fill_uniform(p.at("pi.b"), H, rng);
  fill_uniform(p.at("v.w"), H, rng);
  fill_uniform(p.at("v.b"), H, rng);
  return p;
}

bool all_finite(const ParameterSet& p) {
  for (const auto& [n, t] : p.tensors)
    for (double v : t.data)
      if (!std::isfinite(v)) return false;
  return true;
}

ForwardResult forward(const ParameterSet& params, const PreprocessedFrame& obs,
                      const RecurrentState& state, ForwardCache* cache) {
  const NetDescriptor& d = params.desc;
  if (d.input_c * d.input_h * d.input_w != 3 * kFramePixels)
    throw std::invalid_argument("forward: descriptor input shape does not match observation");
  if (static_cast<int>(state.h.size()) != d.hidden || static_cast<int>(state.c.size()) != d.hidden)
    throw std::invalid_argument("forward: recurrent state size mismatch");

  int layers = static_cast<int>(d.convs.size());
  ForwardCache local;
  ForwardCache& cc = cache ? *cache : local;
  cc.conv_in.assign(layers, {});
  cc.conv_pre.assign(layers, {});
  cc.conv_post.assign(layers, {});

  std::vector<double> cur(obs.values.begin(), obs.values.end());
  int cin = d.input_c, hin = d.input_h, win = d.input_w;
  for (int l = 0; l < layers; ++l) {
    int cout = d.convs[l].filters, stride = d.convs[l].stride;
    int hout = conv_out(hin, stride), wout = conv_out(win, stride);
    if (cache) cc.conv_in[l] = cur;
    std::vector<double> pre(static_cast<std::size_t>(cout) * hout * wout);
    conv_forward(params.at("conv" + std::to_string(l + 1) + ".w").data.data(),
                 params.at("conv" + std::to_string(l + 1) + ".b").data.data(),
                 cur.data(), pre.data(), cin, hin, win, cout, stride, hout, wout);
    if (cache) cc.conv_pre[l] = pre;
    for (double& v : pre) v = v > 0.0 ? v : 0.0;
    if (cache) cc.conv_post[l] = pre;
    cur = std::move(pre);
    cin = cout;
    hin = hout;
    win = wout;
  }

  int H = d.hidden;
  int F = d.flat_size();
  if (cache) {
    cc.lstm_x = cur;
    cc.h_prev = state.h;
    cc.c_prev = state.c;
  }

  const Tensor& wx = params.at("lstm.wx");
  const Tensor& wh = params.at("lstm.wh");
  const Tensor& lb = params.at("lstm.b");
  std::vector<double> z(4 * H);
  for (int r = 0; r < 4 * H; ++r) {
    const double* wxr = wx.data.data() + static_cast<std::size_t>(r) * F;
    const double* whr = wh.data.data() + static_cast<std::size_t>(r) * H;
    z[r] = lb[r] + dot4(wxr, cur.data(), F) + dot4(whr, state.h.data(), H);
  }
  cc.gates.resize(4 * H);
  cc.c_new.resize(H);
  cc.tanh_c.resize(H);
  std::vector<double> h_new(H);
  for (int j = 0; j < H; ++j) {
    double gi = sigmoid(z[j]);
    double gf = sigmoid(z[H + j]);
    double gg = std::tanh(z[2 * H + j]);
    double go = sigmoid(z[3 * H + j]);
    cc.gates[j] = gi;
    cc.gates[H + j] = gf;
    cc.gates[2 * H + j] = gg;
    cc.gates[3 * H + j] = go;
    double c = gf * state.c[j] + gi * gg;
    cc.c_new[j] = c;
    cc.tanh_c[j] = std::tanh(c);
    h_new[j] = go * cc.tanh_c[j];
  }

  const Tensor& pw = params.at("pi.w");
  const Tensor& pb = params.at("pi.b");
  int A = d.n_actions;
  std::vector<double> logits(A);
  for (int a = 0; a < A; ++a) {
    double acc = pb[a];
    const double* row = pw.data.data() + static_cast<std::size_t>(a) * H;
    for (int k = 0; k < H; ++k) acc += row[k] * h_new[k];
    logits[a] = acc;
  }
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  std::vector<double> policy(A);
  for (int a = 0; a < A; ++a) {
    policy[a] = std::exp(logits[a] - mx);
    sum += policy[a];
  }
  for (double& v : policy) v /= sum;

  const Tensor& vw = params.at("v.w");
  double value = params.at("v.b")[0];
  for (int k = 0; k < H; ++k) value += vw[k] * h_new[k];

  if (!std::isfinite(value) || !std::isfinite(sum))
    throw std::runtime_error("forward: non-finite parameter or activation");

  cc.policy = policy;
  cc.value = value;
  ForwardResult out;
  out.policy = std::move(policy);
  out.value = value;
  out.state = {std::move(h_new), cc.c_new};
  return out;
}

std::vector<double> n_step_returns(const Trajectory& traj, double gamma) {
  if (traj.steps.empty()) throw std::invalid_argument("n_step_returns: empty trajectory");
  std::vector<double> returns(traj.steps.size());
  double running = traj.bootstrap_value;
  for (int t = static_cast<int>(traj.steps.size()) - 1; t >= 0; --t) {
    running = traj.steps[t].reward + gamma * running;
    returns[t] = running;
  }
  return returns;
}

LossAndGrads a3c_loss_and_grads(const ParameterSet& params, const Trajectory& traj,
                                double gamma, double beta_entropy, double c_value,
                                const std::vector<ForwardCache>* caches) {
  const NetDescriptor& d = params.desc;
  int T = static_cast<int>(traj.steps.size());
  if (T == 0) throw std::invalid_argument("a3c_loss_and_grads: empty trajectory");
  int H = d.hidden;
  int F = d.flat_size();
  int A = d.n_actions;
  int layers = static_cast<int>(d.convs.size());

  std::vector<ForwardCache> local_caches;
  if (caches) {
    if (static_cast<int>(caches->size()) != T)
      throw std::invalid_argument("a3c_loss_and_grads: cache count does not match trajectory");
  } else {
    local_caches.resize(T);
    RecurrentState state = traj.initial_state;
    for (int t = 0; t < T; ++t) {
      ForwardResult r = forward(params, traj.steps[t].obs, state, &local_caches[t]);
      state = std::move(r.state);
    }
    caches = &local_caches;
  }

  // Returns use the recorded rewards; values are the fresh forward values
  // (identical to the recorded ones when the snapshot matches).
  std::vector<double> returns = n_step_returns(traj, gamma);

  LossAndGrads out;
  out.grads = zero_params(d);

  double loss = 0.0;
  std::vector<double> dh(H, 0.0), dc(H, 0.0);

  Tensor& gpw = out.grads.at("pi.w");
  Tensor& gpb = out.grads.at("pi.b");
  Tensor& gvw = out.grads.at("v.w");
  Tensor& gvb = out.grads.at("v.b");
  Tensor& gwx = out.grads.at("lstm.wx");
  Tensor& gwh = out.grads.at("lstm.wh");
  Tensor& glb = out.grads.at("lstm.b");
  const Tensor& pw = params.at("pi.w");
  const Tensor& vw = params.at("v.w");
  const Tensor& wx = params.at("lstm.wx");
  const Tensor& wh = params.at("lstm.wh");

  std::vector<double> h(H);
  for (int t = T - 1; t >= 0; --t) {
    const ForwardCache& cc = (*caches)[t];
    for (int j = 0; j < H; ++j) h[j] = cc.gates[3 * H + j] * cc.tanh_c[j];  // o * tanh(c)
    double V = cc.value;
    double R = returns[t];
    double advantage = R - V;
    int a = traj.steps[t].action;

    double entropy = 0.0;
    for (int j = 0; j < A; ++j)
      if (cc.policy[j] > 0.0) entropy -= cc.policy[j] * std::log(cc.policy[j]);
    loss += -std::log(std::max(cc.policy[a], 1e-300)) * advantage - beta_entropy * entropy +
            c_value * (R - V) * (R - V);

    // value head
    double dv = 2.0 * c_value * (V - R);
    for (int k = 0; k < H; ++k) {
      gvw[k] += dv * h[k];
      dh[k] += dv * vw[k];
    }
    gvb[0] += dv;

    // policy head
    for (int j = 0; j < A; ++j) {
      double pj = cc.policy[j];
      double dlogit = advantage * (pj - (j == a ? 1.0 : 0.0));
      if (pj > 0.0) dlogit += beta_entropy * pj * (std::log(pj) + entropy);
      gpb[j] += dlogit;
      const double* prow = pw.data.data() + static_cast<std::size_t>(j) * H;
      double* gprow = gpw.data.data() + static_cast<std::size_t>(j) * H;
      for (int k = 0; k < H; ++k) {
        gprow[k] += dlogit * h[k];
        dh[k] += dlogit * prow[k];
      }
    }

    // LSTM cell backward
    std::vector<double> dz(4 * H);
    std::vector<double> dc_prev(H);
    for (int j = 0; j < H; ++j) {
      double gi = cc.gates[j];
      double gf = cc.gates[H + j];
      double gg = cc.gates[2 * H + j];
      double go = cc.gates[3 * H + j];
      double tc = cc.tanh_c[j];
      double do_ = dh[j] * tc;
      double dcj = dc[j] + dh[j] * go * (1.0 - tc * tc);
      double di = dcj * gg;
      double df = dcj * cc.c_prev[j];
      double dg = dcj * gi;
      dc_prev[j] = dcj * gf;
      dz[j] = di * gi * (1.0 - gi);
      dz[H + j] = df * gf * (1.0 - gf);
      dz[2 * H + j] = dg * (1.0 - gg * gg);
      dz[3 * H + j] = do_ * go * (1.0 - go);
    }
    std::vector<double> dx(F);
    std::vector<double> dh_prev(H);
    for (int r = 0; r < 4 * H; ++r) {
      double g = dz[r];
      glb[r] += g;
      const double* wxr = wx.data.data() + static_cast<std::size_t>(r) * F;
      const double* whr = wh.data.data() + static_cast<std::size_t>(r) * H;
      double* gwxr = gwx.data.data() + static_cast<std::size_t>(r) * F;
      double* gwhr = gwh.data.data() + static_cast<std::size_t>(r) * H;
      const double* x = cc.lstm_x.data();
      const double* hp = cc.h_prev.data();
      for (int k = 0; k < F; ++k) {
        gwxr[k] += g * x[k];
        dx[k] += g * wxr[k];
      }
      for (int k = 0; k < H; ++k) {
        gwhr[k] += g * hp[k];
        dh_prev[k] += g * whr[k];
      }
    }

    // conv stack backward for this step; the first layer's input gradient is
    // never consumed, so it is skipped
    std::vector<double> dout = dx;
    for (int l = layers - 1; l >= 0; --l) {
      int cin = l == 0 ? d.input_c : d.convs[l - 1].filters;
      int hin = l == 0 ? d.input_h : d.out_h(l - 1);
      int win = l == 0 ? d.input_w : d.out_w(l - 1);
      int cout = d.convs[l].filters, stride = d.convs[l].stride;
      int hout = d.out_h(l), wout = d.out_w(l);
      for (std::size_t i = 0; i < dout.size(); ++i)
        if (cc.conv_pre[l][i] <= 0.0) dout[i] = 0.0;  // ReLU gate
      std::string base = "conv" + std::to_string(l + 1);
      std::vector<double> din;
      if (l > 0) din.assign(static_cast<std::size_t>(cin) * hin * win, 0.0);
      conv_backward(params.at(base + ".w").data.data(), cc.conv_in[l].data(), dout.data(),
                    out.grads.at(base + ".w").data.data(), out.grads.at(base + ".b").data.data(),
                    l > 0 ? din.data() : nullptr, cin, hin, win, cout, stride, hout, wout);
      dout = std::move(din);
    }

    dh = std::move(dh_prev);
    dc = std::move(dc_prev);
  }

  if (!std::isfinite(loss)) throw std::runtime_error("a3c_loss_and_grads: non-finite loss");
  out.loss = loss;
  return out;
}

ParameterSet init_transfer_weights(const ParameterSet& source, const NetDescriptor& target_arch,
                                   std::uint64_t seed) {
  const NetDescriptor& s = source.desc;
  if (s.input_c != target_arch.input_c || s.input_h != target_arch.input_h ||
      s.input_w != target_arch.input_w || s.convs != target_arch.convs ||
      s.hidden != target_arch.hidden)
    throw std::invalid_argument("init_transfer_weights: body architectures differ");

  ParameterSet target = init_params(target_arch, seed);
  for (auto& [name, tensor] : target.tensors) {
    if (name.rfind("pi.", 0) == 0 || name.rfind("v.", 0) == 0) continue;  // fresh heads
    tensor = source.at(name);
  }
  return target;
}

std::vector<Tensor> dump_activations(const ParameterSet& params, const PreprocessedFrame& obs,
                                     int layer) {
  int layers = static_cast<int>(params.desc.convs.size());
  if (layer < 1 || layer > layers) throw std::out_of_range("dump_activations: invalid layer");
  ForwardCache cache;
  forward(params, obs, RecurrentState::zero(params.desc.hidden), &cache);

  int l = layer - 1;
  int filters = params.desc.convs[l].filters;
  int h = params.desc.out_h(l), w = params.desc.out_w(l);
  std::vector<Tensor> maps;
  maps.reserve(filters);
  for (int f = 0; f < filters; ++f) {
    Tensor m({h, w});
    double mx = 0.0;
    for (int i = 0; i < h * w; ++i) {
      m[i] = cache.conv_post[l][static_cast<std::size_t>(f) * h * w + i];
      mx = std::max(mx, m[i]);
    }
    if (mx > 0.0)
      for (int i = 0; i < h * w; ++i) m[i] /= mx;
    maps.push_back(std::move(m));
  }
  return maps;
}

}  // namespace cvt
