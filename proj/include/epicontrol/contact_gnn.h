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

#ifndef EPICONTROL_CONTACT_GNN_H_
#define EPICONTROL_CONTACT_GNN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "epicontrol/matrix.h"
#include "epicontrol/observation.h"
#include "epicontrol/risk_model.h"

namespace epicontrol {

// Node features: visible health one-hot (3), intervention one-hot (4), p_infe.
inline constexpr int kFeatureDim = 8;
inline constexpr int kActorOutputs = 4;

enum class TrunkKind {
  kContactGnn,  // bipartite individual-area message passing
  kMlp,         // per-individual two-layer perceptron, no message passing
};

struct NetworkShape {
  int layers = 3;
  int hidden = 32;
  // Area and individual aggregation steps share one weight matrix in every
  // layer whose input width equals `hidden` (all but the first).
  bool shared_weights = false;
  TrunkKind trunk = TrunkKind::kContactGnn;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

// One message-passing layer. Biases are 1 x hidden row vectors. For the MLP
// trunk the single layer holds (w1, b1) in the area slots and (w2, b2) in the
// individual slots.
struct LayerParams {
  Matrix w_area;
  Matrix b_area;
  Matrix w_ind;  // empty when shared with w_area
  Matrix b_ind;
};

struct GnnParams {
  NetworkShape shape;
  std::vector<LayerParams> layers;
  Matrix actor_w;   // hidden x 4
  Matrix actor_b;   // 1 x 4
  Matrix critic_w;  // hidden x 1
  Matrix critic_b;  // 1 x 1
  // Bumped on every in-place update; forward caches remember it.
  std::uint64_t version = 0;

  bool shares_weights(int layer) const {
    return shape.trunk == TrunkKind::kContactGnn && shape.shared_weights && layer > 0;
  }

  // Visits every non-empty tensor in a fixed order with a stable name.
  template <typename Fn>
  void for_each(Fn&& fn) {
    for_each_impl(*this, fn);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for_each_impl(*this, fn);
  }

  // Same shape, all zeros, same version.
  GnnParams zeros_like() const;
  std::size_t parameter_count() const;

 private:
  template <typename Self, typename Fn>
  static void for_each_impl(Self& self, Fn& fn) {
    const bool mlp = self.shape.trunk == TrunkKind::kMlp;
    for (std::size_t k = 0; k < self.layers.size(); ++k) {
      auto& l = self.layers[k];
      const std::string p = mlp ? "mlp." : "layer" + std::to_string(k + 1) + ".";
      fn(p + (mlp ? "w1" : "w_area"), l.w_area);
      fn(p + (mlp ? "b1" : "b_area"), l.b_area);
      if (!l.w_ind.empty()) fn(p + (mlp ? "w2" : "w_ind"), l.w_ind);
      fn(p + (mlp ? "b2" : "b_ind"), l.b_ind);
    }
    fn(std::string("actor.w"), self.actor_w);
    fn(std::string("actor.b"), self.actor_b);
    fn(std::string("critic.w"), self.critic_w);
    fn(std::string("critic.b"), self.critic_b);
  }
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
GnnParams init_params(std::uint64_t seed, const NetworkShape& shape);

struct StateFeatures {
  Matrix node;                      // M x kFeatureDim
  std::vector<Matrix> visit_slices;  // one M x N hour-count matrix per layer

  int population() const { return node.rows(); }
};

// Slice k holds the (k+1)-th most recent day of history (zeros if absent).
StateFeatures make_features(const Observation& obs, const RiskVector& risk, int layers);

// Row-wise softmax of hours / 24 over the areas an individual visited; other
// entries are 0 and rows without visits are all-zero.
Matrix masked_visit_softmax(const Matrix& visit_hours);

struct LayerCache {
  Matrix input;      // M x d_in
  Matrix weights;       // M x N (f_c); unused by the MLP trunk
  Matrix area_weights;  // f_c with every column summing to 1
  Matrix area_in;       // N x d_in, area_weights^T x
  Matrix area_pre;   // N x hidden (M x hidden for the MLP)
  Matrix area_out;
  Matrix ind_in;     // M x hidden (f_c f_area)
  Matrix ind_pre;    // M x hidden
};

struct ForwardCache {
  std::uint64_t version = 0;
  std::vector<LayerCache> layers;
  Matrix embedding;  // M x hidden
  Matrix pooled;     // 1 x hidden
};

// Trunk only: per-individual embeddings and the intermediates backward needs.
ForwardCache gnn_forward(const GnnParams& params, const StateFeatures& features);

Matrix actor_head(const GnnParams& params, const ForwardCache& cache);
double critic_head(const GnnParams& params, const ForwardCache& cache);

Matrix actor_forward(const GnnParams& params, const StateFeatures& features);
double critic_forward(const GnnParams& params, const StateFeatures& features);

// Gradients of a scalar loss given dL/d(actor outputs) (M x 4) and
// dL/d(critic value). The visit softmax is treated as data.
GnnParams backward(const GnnParams& params, const ForwardCache& cache, const Matrix& d_actor,
                   double d_value);

}  // namespace epicontrol

#endif  // EPICONTROL_CONTACT_GNN_H_
