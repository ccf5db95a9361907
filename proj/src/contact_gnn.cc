// Copyright 2026 The Epicontrol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "epicontrol/contact_gnn.h"

#include <cmath>

#include <fmt/format.h>

#include "epicontrol/errors.h"
#include "epicontrol/keyed_rng.h"

namespace epicontrol {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ContractError(what);
}

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    const auto ai = a.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const double v = ai[k];
      if (v == 0.0) continue;
      const auto bk = b.row(k);
      for (int j = 0; j < b.cols(); ++j) ci[j] += v * bk[j];
    }
  }
  return c;
}

// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "matmul_tn: row counts differ");
  Matrix c(a.cols(), b.cols());
  for (int r = 0; r < a.rows(); ++r) {
    const auto ar = a.row(r);
    const auto br = b.row(r);
    for (int i = 0; i < a.cols(); ++i) {
      const double v = ar[i];
      if (v == 0.0) continue;
      auto ci = c.row(i);
      for (int j = 0; j < b.cols(); ++j) ci[j] += v * br[j];
    }
  }
  return c;
}

// C = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "matmul_nt: column counts differ");
  Matrix c(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    auto ci = c.row(i);
    for (int j = 0; j < b.rows(); ++j) {
      const auto bj = b.row(j);
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
      ci[j] = s;
    }
  }
  return c;
}

void add_row_bias(Matrix& m, const Matrix& bias) {
  for (int i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (int j = 0; j < m.cols(); ++j) r[j] += bias(0, j);
  }
}

Matrix relu(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

// grad * 1[pre > 0]
Matrix relu_backward(const Matrix& grad, const Matrix& pre) {
  Matrix out = grad;
  auto o = out.values();
  const auto p = pre.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (!(p[i] > 0.0)) o[i] = 0.0;
  }
  return out;
}

Matrix column_sums(const Matrix& m) {
  Matrix out(1, m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (int j = 0; j < m.cols(); ++j) out(0, j) += r[j];
  }
  return out;
}

void add_into(Matrix& dst, const Matrix& src) {
  auto d = dst.values();
  const auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

void check_finite(const Matrix& m, const char* what) {
  for (double v : m.values()) {
    if (!std::isfinite(v)) throw NumericError(fmt::format("{}: non-finite value", what));
  }
}

// Each area column rescaled to sum to one over its visitors, so the area
// message is a weighted mean and does not grow with crowd size.
Matrix column_normalized(const Matrix& w) {
  const Matrix sums = column_sums(w);
  Matrix out = w;
  for (int i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (int a = 0; a < out.cols(); ++a) {
      if (sums(0, a) > 0.0) r[a] /= sums(0, a);
    }
  }
  return out;
}

void check_features(const GnnParams& params, const StateFeatures& f) {
  require(f.node.cols() == kFeatureDim, "gnn_forward: node features must have 8 columns");
  require(f.node.rows() > 0, "gnn_forward: empty population");
  require(!params.layers.empty(), "gnn_forward: no layers");
  if (params.shape.trunk == TrunkKind::kContactGnn) {
    require(static_cast<int>(f.visit_slices.size()) >= static_cast<int>(params.layers.size()),
            "gnn_forward: fewer visit slices than layers");
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
      require(f.visit_slices[k].rows() == f.node.rows(), "gnn_forward: visit slice row mismatch");
      require(f.visit_slices[k].cols() > 0, "gnn_forward: visit slice has no areas");
      check_finite(f.visit_slices[k], "gnn_forward visit slice");
    }
  }
  check_finite(f.node, "gnn_forward node features");
}

}  // namespace

GnnParams GnnParams::zeros_like() const {
  GnnParams out = *this;
  out.for_each([](const std::string&, Matrix& m) { m.fill(0.0); });
  return out;
}

std::size_t GnnParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, const Matrix& m) { n += m.size(); });
  return n;
}

GnnParams init_params(std::uint64_t seed, const NetworkShape& shape) {
  if (shape.layers < 1 || shape.hidden < 1) {
    throw ConfigError("network", "layers and hidden width must be positive");
  }
  GnnParams p;
  p.shape = shape;
  const int h = shape.hidden;
  if (shape.trunk == TrunkKind::kMlp) {
    p.layers.push_back({Matrix(kFeatureDim, h), Matrix(1, h), Matrix(h, h), Matrix(1, h)});
  } else {
    for (int k = 0; k < shape.layers; ++k) {
      const int d_in = k == 0 ? kFeatureDim : h;
      LayerParams l{Matrix(d_in, h), Matrix(1, h), Matrix(h, h), Matrix(1, h)};
      if (p.shares_weights(k)) l.w_ind = Matrix();
      p.layers.push_back(std::move(l));
    }
  }
  p.actor_w = Matrix(h, kActorOutputs);
  p.actor_b = Matrix(1, kActorOutputs);
  p.critic_w = Matrix(h, 1);
  p.critic_b = Matrix(1, 1);

  std::uint64_t tensor = 0;
  int fan_in = kFeatureDim;
  p.for_each([&](const std::string& name, Matrix& m) {
    // Biases share the fan-in of the weight listed just before them.
    if (name.find(".w") != std::string::npos) fan_in = m.rows();
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    KeyedRng rng(seed, Stream::kTraining, 0xC0FFEE, tensor++);
    for (double& v : m.values()) v = (2.0 * rng.uniform() - 1.0) * scale;
  });
  return p;
}

StateFeatures make_features(const Observation& obs, const RiskVector& risk, int layers) {
  const int m = obs.population();
  if (risk.size() != m) throw ContractError("make_features: risk vector size mismatch");
  StateFeatures f;
  f.node = Matrix(m, kFeatureDim);
  for (int i = 0; i < m; ++i) {
    auto r = f.node.row(i);
    r[static_cast<int>(obs.health[i])] = 1.0;
    r[3 + static_cast<int>(obs.current_action[i])] = 1.0;
    r[7] = risk.p_infe[i];
  }
  for (int k = 0; k < layers; ++k) {
    Matrix slice(m, obs.n_areas);
    if (const DayVisits* day = obs.history.back(k)) {
      for (int i = 0; i < m; ++i) {
        const auto src = day->row(i);
        auto dst = slice.row(i);
        for (int a = 0; a < obs.n_areas; ++a) dst[a] = src[a];
      }
    }
    f.visit_slices.push_back(std::move(slice));
  }
  return f;
}

Matrix masked_visit_softmax(const Matrix& visit_hours) {
  Matrix out(visit_hours.rows(), visit_hours.cols());
  for (int i = 0; i < visit_hours.rows(); ++i) {
    const auto v = visit_hours.row(i);
    auto o = out.row(i);
    double top = -1.0;
    for (double x : v) {
      if (x < 0.0) throw ContractError("masked_visit_softmax: negative visit count");
      if (x > 0.0) top = std::max(top, x / 24.0);
    }
    if (top < 0.0) continue;
    double total = 0.0;
    for (std::size_t a = 0; a < v.size(); ++a) {
      if (v[a] > 0.0) {
        o[a] = std::exp(v[a] / 24.0 - top);
        total += o[a];
      }
    }
    for (double& x : o) x /= total;
  }
  return out;
}

ForwardCache gnn_forward(const GnnParams& params, const StateFeatures& features) {
  check_features(params, features);
  ForwardCache cache;
  cache.version = params.version;
  Matrix x = features.node;

  if (params.shape.trunk == TrunkKind::kMlp) {
    const LayerParams& l = params.layers[0];
    LayerCache c;
    c.input = x;
    c.area_pre = matmul(x, l.w_area);
    add_row_bias(c.area_pre, l.b_area);
    c.area_out = relu(c.area_pre);
    c.ind_pre = matmul(c.area_out, l.w_ind);
    add_row_bias(c.ind_pre, l.b_ind);
    x = relu(c.ind_pre);
    cache.layers.push_back(std::move(c));
  } else {
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
      const LayerParams& l = params.layers[k];
      require(x.cols() == l.w_area.rows(), "gnn_forward: layer width mismatch");
      LayerCache c;
      c.input = std::move(x);
      c.weights = masked_visit_softmax(features.visit_slices[k]);
      c.area_weights = column_normalized(c.weights);
      c.area_in = matmul_tn(c.area_weights, c.input);
      c.area_pre = matmul(c.area_in, l.w_area);
      add_row_bias(c.area_pre, l.b_area);
      c.area_out = relu(c.area_pre);
      c.ind_in = matmul(c.weights, c.area_out);
      c.ind_pre = matmul(c.ind_in, params.shares_weights(static_cast<int>(k)) ? l.w_area : l.w_ind);
      add_row_bias(c.ind_pre, l.b_ind);
      x = relu(c.ind_pre);
      cache.layers.push_back(std::move(c));
    }
  }
  cache.pooled = column_sums(x);
  for (double& v : cache.pooled.values()) v /= x.rows();
  cache.embedding = std::move(x);
  return cache;
}

Matrix actor_head(const GnnParams& params, const ForwardCache& cache) {
  Matrix out = matmul(cache.embedding, params.actor_w);
  add_row_bias(out, params.actor_b);
  return out;
}

double critic_head(const GnnParams& params, const ForwardCache& cache) {
  double v = params.critic_b(0, 0);
  for (int j = 0; j < cache.pooled.cols(); ++j) v += cache.pooled(0, j) * params.critic_w(j, 0);
  return v;
}

Matrix actor_forward(const GnnParams& params, const StateFeatures& features) {
  return actor_head(params, gnn_forward(params, features));
}

double critic_forward(const GnnParams& params, const StateFeatures& features) {
  return critic_head(params, gnn_forward(params, features));
}

GnnParams backward(const GnnParams& params, const ForwardCache& cache, const Matrix& d_actor,
                   double d_value) {
  if (cache.version != params.version) {
    throw ContractError(fmt::format("backward: cache from parameter version {} used with version {}",
                                    cache.version, params.version));
  }
  const int m = cache.embedding.rows();
  require(d_actor.rows() == m && d_actor.cols() == kActorOutputs,
          "backward: upstream actor gradient has the wrong shape");
  require(cache.layers.size() == params.layers.size(), "backward: cache depth mismatch");
  if (!std::isfinite(d_value)) throw NumericError("backward: non-finite value gradient");
  check_finite(d_actor, "backward upstream gradient");

  GnnParams grad = params.zeros_like();
  grad.actor_w = matmul_tn(cache.embedding, d_actor);
  grad.actor_b = column_sums(d_actor);
  for (int j = 0; j < cache.pooled.cols(); ++j) grad.critic_w(j, 0) = cache.pooled(0, j) * d_value;
  grad.critic_b(0, 0) = d_value;

  Matrix d_x = matmul_nt(d_actor, params.actor_w);
  const double per_individual = d_value / m;
  for (int i = 0; i < m; ++i) {
    auto r = d_x.row(i);
    for (int j = 0; j < d_x.cols(); ++j) r[j] += per_individual * params.critic_w(j, 0);
  }

  if (params.shape.trunk == TrunkKind::kMlp) {
    const LayerParams& l = params.layers[0];
    const LayerCache& c = cache.layers[0];
    LayerParams& g = grad.layers[0];
    const Matrix d_z2 = relu_backward(d_x, c.ind_pre);
    g.w_ind = matmul_tn(c.area_out, d_z2);
    g.b_ind = column_sums(d_z2);
    const Matrix d_z1 = relu_backward(matmul_nt(d_z2, l.w_ind), c.area_pre);
    g.w_area = matmul_tn(c.input, d_z1);
    g.b_area = column_sums(d_z1);
    return grad;
  }

  for (int k = static_cast<int>(params.layers.size()) - 1; k >= 0; --k) {
    const LayerParams& l = params.layers[k];
    const LayerCache& c = cache.layers[k];
    LayerParams& g = grad.layers[k];
    const bool shared = params.shares_weights(k);
    const Matrix& w_ind = shared ? l.w_area : l.w_ind;

    const Matrix d_zi = relu_backward(d_x, c.ind_pre);
    const Matrix d_wi = matmul_tn(c.ind_in, d_zi);
    g.b_ind = column_sums(d_zi);
    const Matrix d_fa = matmul_tn(c.weights, matmul_nt(d_zi, w_ind));
    const Matrix d_za = relu_backward(d_fa, c.area_pre);
    g.w_area = matmul_tn(c.area_in, d_za);
    if (shared) {
      add_into(g.w_area, d_wi);
    } else {
      g.w_ind = d_wi;
    }
    g.b_area = column_sums(d_za);
    if (k > 0) d_x = matmul(c.area_weights, matmul_nt(d_za, l.w_area));
  }
  return grad;
}

}  // namespace epicontrol
