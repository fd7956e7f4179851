// SPDX-License-Identifier: Apache-2.0
#pragma once

// Define-by-run reverse-mode graph over the nn kernels. Each builder call
// executes the forward kernel eagerly, records what backward needs, and
// returns a node id. backward() then walks nodes in reverse creation order
// (a valid reverse topological order, since inputs always precede outputs).

#include <string>
#include <vector>

#include "fusestrata/nn_ops.hpp"

namespace fusestrata::nn {

template <class T>
class Graph {
public:
  // Leaves. Parameter leaves copy the tensor in; grads accumulate on the node
  // and are read back by the caller after backward().
  int leaf(const Tensor<T>& value, bool needs_grad = false, std::string tag = {}) {
    Node n;
    n.op = Op::kLeaf;
    n.value = value;
    n.needs = needs_grad;
    n.tag = std::move(tag);
    return push(std::move(n));
  }

  int conv3d(int input, int w, int bias, int k) {
    Node n;
    n.op = Op::kConv;
    n.a = input;
    n.b = w;
    n.c = bias;
    n.k = k;
    n.in_dims = map_dims(val(input));
    conv3d_forward(val(input), val(w), val(bias), n.value, k);
    n.needs = needs(input) || needs(w) || needs(bias);
    return push(std::move(n));
  }

  int depthwise(int input, int w, int bias, int k) {
    Node n;
    n.op = Op::kDepthwise;
    n.a = input;
    n.b = w;
    n.c = bias;
    n.k = k;
    n.in_dims = map_dims(val(input));
    depthwise_forward(val(input), val(w), val(bias), n.value, k);
    n.needs = needs(input) || needs(w) || needs(bias);
    return push(std::move(n));
  }

  int maxpool(int input) {
    Node n;
    n.op = Op::kMaxpool;
    n.a = input;
    n.in_dims = map_dims(val(input));
    maxpool_forward(val(input), n.value, needs(input) ? &n.argmax : nullptr);
    n.needs = needs(input);
    return push(std::move(n));
  }

  int upsample(int input) {
    Node n;
    n.op = Op::kUpsample;
    n.a = input;
    n.in_dims = map_dims(val(input));
    upsample_forward(val(input), n.value);
    n.needs = needs(input);
    return push(std::move(n));
  }

  // Training-mode batchnorm. `running_mean/var` may be null (finite-difference
  // harnesses need a side-effect-free forward); when set they are updated in
  // place with `momentum`.
  int batchnorm_train(int input, int gamma, int beta, double eps, Tensor<T>* running_mean,
                      Tensor<T>* running_var, double momentum) {
    Node n;
    n.op = Op::kBnTrain;
    n.a = input;
    n.b = gamma;
    n.c = beta;
    n.eps = eps;
    n.in_dims = map_dims(val(input));
    batchnorm_train_forward(val(input), val(gamma), val(beta), eps, n.value, n.bn_saved,
                            running_mean, running_var, momentum);
    n.needs = needs(input) || needs(gamma) || needs(beta);
    return push(std::move(n));
  }

  int batchnorm_infer(int input, int gamma, int beta, int running_mean, int running_var,
                      double eps) {
    Node n;
    n.op = Op::kBnInfer;
    n.a = input;
    n.b = gamma;
    n.c = beta;
    n.d = running_mean;
    n.e = running_var;
    n.eps = eps;
    n.in_dims = map_dims(val(input));
    batchnorm_infer_forward(val(input), val(gamma), val(beta), val(running_mean), val(running_var),
                            eps, n.value);
    n.needs = needs(input) || needs(gamma) || needs(beta);
    return push(std::move(n));
  }

  int elu(int input) {
    Node n;
    n.op = Op::kElu;
    n.a = input;
    elu_forward(val(input), n.value);
    n.needs = needs(input);
    return push(std::move(n));
  }

  int sigmoid(int input) {
    Node n;
    n.op = Op::kSigmoid;
    n.a = input;
    sigmoid_forward(val(input), n.value);
    n.needs = needs(input);
    return push(std::move(n));
  }

  // `rng` may be null or rate 0 for identity (inference behavior).
  int dropout(int input, double rate, Rng* rng) {
    if (rng == nullptr || rate == 0.0) return input;
    Node n;
    n.op = Op::kDropout;
    n.a = input;
    n.rate = rate;
    dropout_forward(val(input), rate, *rng, n.value, n.mask);
    n.needs = needs(input);
    return push(std::move(n));
  }

  int add(int a, int b) {
    if (val(a).numel() != val(b).numel()) fail(Errc::validation, "add shape mismatch");
    Node n;
    n.op = Op::kAdd;
    n.a = a;
    n.b = b;
    n.value = val(a);
    for (int64_t i = 0; i < n.value.numel(); ++i) n.value[i] += val(b)[i];
    n.needs = needs(a) || needs(b);
    return push(std::move(n));
  }

  // Channel concatenation of two feature maps with equal spatial dims.
  int concat(int a, int b) {
    MapDims da = map_dims(val(a)), db = map_dims(val(b));
    if (da.nz != db.nz || da.ny != db.ny || da.nx != db.nx)
      fail(Errc::validation, "concat spatial dims differ");
    Node n;
    n.op = Op::kConcat;
    n.a = a;
    n.b = b;
    n.value = Tensor<T>({da.c + db.c, da.nz, da.ny, da.nx});
    std::copy(val(a).v.begin(), val(a).v.end(), n.value.v.begin());
    std::copy(val(b).v.begin(), val(b).v.end(), n.value.v.begin() + val(a).v.size());
    n.needs = needs(a) || needs(b);
    return push(std::move(n));
  }

  int reshape(int input, std::vector<int> dims) {
    Node n;
    n.op = Op::kReshape;
    n.a = input;
    n.value = val(input).reshaped(std::move(dims));
    n.needs = needs(input);
    return push(std::move(n));
  }

  // Scalar node: plain inner product. Mostly a harness device for reducing a
  // map to a scalar with nonuniform weights.
  int dot(int a, int weights) {
    if (val(a).numel() != val(weights).numel()) fail(Errc::validation, "dot shape mismatch");
    Node n;
    n.op = Op::kDot;
    n.a = a;
    n.b = weights;
    n.value = Tensor<T>({1});
    double acc = 0;
    for (int64_t i = 0; i < val(a).numel(); ++i)
      acc += static_cast<double>(val(a)[i]) * static_cast<double>(val(weights)[i]);
    n.value[0] = static_cast<T>(acc);
    n.needs = needs(a) || needs(weights);
    return push(std::move(n));
  }

  // Scalar node: mean binary cross-entropy between a prediction and a
  // constant target node.
  int bce(int pred, int target) {
    Node n;
    n.op = Op::kBce;
    n.a = pred;
    n.b = target;
    n.value = Tensor<T>({1});
    n.value[0] = static_cast<T>(bce_forward(val(pred), val(target)));
    n.needs = needs(pred);
    return push(std::move(n));
  }

  void backward(int root) {
    if (val(root).numel() != 1) fail(Errc::validation, "backward root must be scalar");
    for (auto& n : nodes_) n.grad = Tensor<T>();
    ensure_grad(root);
    nodes_[static_cast<size_t>(root)].grad[0] = T(1);
    for (int i = root; i >= 0; --i) {
      Node& n = nodes_[static_cast<size_t>(i)];
      if (!n.needs || n.grad.empty()) continue;
      step_backward(n);
    }
  }

  const Tensor<T>& value(int id) const { return val(id); }

  // Gradient of the last backward() root w.r.t. node id; empty if untouched.
  const Tensor<T>& grad(int id) const { return nodes_[static_cast<size_t>(id)].grad; }

  size_t size() const { return nodes_.size(); }

private:
  enum class Op {
    kLeaf,
    kConv,
    kDepthwise,
    kMaxpool,
    kUpsample,
    kBnTrain,
    kBnInfer,
    kElu,
    kSigmoid,
    kDropout,
    kAdd,
    kConcat,
    kReshape,
    kDot,
    kBce,
  };

  struct Node {
    Op op = Op::kLeaf;
    int a = -1, b = -1, c = -1, d = -1, e = -1;
    bool needs = false;
    int k = 0;
    double rate = 0, eps = 0;
    MapDims in_dims{0, 0, 0, 0};
    Tensor<T> value;
    Tensor<T> grad;
    std::vector<int64_t> argmax;
    std::vector<uint8_t> mask;
    BnSaved<T> bn_saved;
    std::string tag;
  };

  int push(Node&& n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  const Tensor<T>& val(int id) const { return nodes_[static_cast<size_t>(id)].value; }
  bool needs(int id) const { return nodes_[static_cast<size_t>(id)].needs; }

  Tensor<T>& ensure_grad(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.empty()) {
      n.grad = Tensor<T>(n.value.dims);
    }
    return n.grad;
  }

  void step_backward(Node& n) {
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kConv: {
        if (needs(n.a)) conv3d_backward_input(val(n.b), n.grad, ensure_grad(n.a), n.in_dims, n.k);
        if (needs(n.b) || needs(n.c))
          conv3d_backward_params(val(n.a), n.grad, ensure_grad(n.b), ensure_grad(n.c), n.k);
        break;
      }
      case Op::kDepthwise: {
        if (needs(n.a)) depthwise_backward_input(val(n.b), n.grad, ensure_grad(n.a), n.in_dims, n.k);
        if (needs(n.b) || needs(n.c))
          depthwise_backward_params(val(n.a), n.grad, ensure_grad(n.b), ensure_grad(n.c), n.k);
        break;
      }
      case Op::kMaxpool:
        if (needs(n.a)) maxpool_backward(n.argmax, n.grad, ensure_grad(n.a), n.in_dims);
        break;
      case Op::kUpsample:
        if (needs(n.a)) upsample_backward(n.grad, ensure_grad(n.a), n.in_dims);
        break;
      case Op::kBnTrain: {
        Tensor<T> scratch_dg, scratch_db;
        Tensor<T>& dg = needs(n.b) ? ensure_grad(n.b) : scratch_dg;
        Tensor<T>& db = needs(n.c) ? ensure_grad(n.c) : scratch_db;
        Tensor<T> scratch_dx;
        Tensor<T>& dx = needs(n.a) ? ensure_grad(n.a) : scratch_dx;
        batchnorm_train_backward(val(n.a), val(n.b), n.bn_saved, n.grad, dx, dg, db);
        break;
      }
      case Op::kBnInfer: {
        Tensor<T> scratch_dg, scratch_db, scratch_dx;
        Tensor<T>& dg = needs(n.b) ? ensure_grad(n.b) : scratch_dg;
        Tensor<T>& db = needs(n.c) ? ensure_grad(n.c) : scratch_db;
        Tensor<T>& dx = needs(n.a) ? ensure_grad(n.a) : scratch_dx;
        batchnorm_infer_backward(val(n.a), val(n.b), val(n.d), val(n.e), n.eps, n.grad, dx, dg, db);
        break;
      }
      case Op::kElu:
        if (needs(n.a)) elu_backward(val(n.a), n.value, n.grad, ensure_grad(n.a));
        break;
      case Op::kSigmoid:
        if (needs(n.a)) sigmoid_backward(n.value, n.grad, ensure_grad(n.a));
        break;
      case Op::kDropout:
        if (needs(n.a)) dropout_backward(n.mask, n.rate, n.grad, ensure_grad(n.a));
        break;
      case Op::kAdd: {
        if (needs(n.a)) {
          Tensor<T>& ga = ensure_grad(n.a);
          for (int64_t i = 0; i < n.grad.numel(); ++i) ga[i] += n.grad[i];
        }
        if (needs(n.b)) {
          Tensor<T>& gb = ensure_grad(n.b);
          for (int64_t i = 0; i < n.grad.numel(); ++i) gb[i] += n.grad[i];
        }
        break;
      }
      case Op::kConcat: {
        int64_t na = val(n.a).numel();
        if (needs(n.a)) {
          Tensor<T>& ga = ensure_grad(n.a);
          for (int64_t i = 0; i < na; ++i) ga[i] += n.grad[i];
        }
        if (needs(n.b)) {
          Tensor<T>& gb = ensure_grad(n.b);
          for (int64_t i = 0; i < val(n.b).numel(); ++i) gb[i] += n.grad[na + i];
        }
        break;
      }
      case Op::kReshape:
        if (needs(n.a)) {
          Tensor<T>& ga = ensure_grad(n.a);
          for (int64_t i = 0; i < n.grad.numel(); ++i) ga[i] += n.grad[i];
        }
        break;
      case Op::kDot: {
        T g0 = n.grad[0];
        if (needs(n.a)) {
          Tensor<T>& ga = ensure_grad(n.a);
          const Tensor<T>& w = val(n.b);
          for (int64_t i = 0; i < w.numel(); ++i) ga[i] += g0 * w[i];
        }
        if (needs(n.b)) {
          Tensor<T>& gb = ensure_grad(n.b);
          const Tensor<T>& a = val(n.a);
          for (int64_t i = 0; i < a.numel(); ++i) gb[i] += g0 * a[i];
        }
        break;
      }
      case Op::kBce:
        if (needs(n.a))
          bce_backward(val(n.a), val(n.b), static_cast<double>(n.grad[0]), ensure_grad(n.a));
        break;
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace fusestrata::nn
