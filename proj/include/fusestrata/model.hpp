// SPDX-License-Identifier: Apache-2.0
#pragma once

// The fusion autoencoder: per-modality U-Net-style encoders with
// depthwise-separable mid-flow blocks, a pointwise fusion convolution
// producing one embedding for all modalities, and mirrored decoders with
// intra-modality skip concatenations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "fusestrata/graph.hpp"
#include "fusestrata/nn_ops.hpp"
#include "fusestrata/rng.hpp"

namespace fusestrata {

struct ModelConfig {
  int n_modalities = 2;
  int nx = 128, ny = 128, nz = 96;
  int depth = 5;
  int base_channels = 2;
  int kernel = 5;
  double dropout_rate = 0.1;
  // 0 = match the bottleneck channel count (base_channels * 2^(depth-1)),
  // which reproduces the published embedding sizes at any depth.
  int embedding_channels = 0;
  double bn_eps = 1e-3;
  double bn_momentum = 0.99;

  // channels at encoder level l, l = 1..depth
  int channels(int level) const { return base_channels << (level - 1); }
  int bottleneck_channels() const { return channels(depth); }
  int embed_channels() const {
    return embedding_channels > 0 ? embedding_channels : bottleneck_channels();
  }
  int bx() const { return nx >> depth; }
  int by() const { return ny >> depth; }
  int bz() const { return nz >> depth; }
  int64_t embedding_length() const {
    return static_cast<int64_t>(bx()) * by() * bz() * embed_channels();
  }

  void validate() const {
    if (n_modalities < 1) fail(Errc::validation, "need at least one modality");
    if (depth < 1) fail(Errc::validation, "depth must be >= 1");
    if (kernel < 1 || kernel % 2 == 0) fail(Errc::validation, "kernel must be odd");
    if (dropout_rate < 0 || dropout_rate >= 1) fail(Errc::validation, "dropout rate in [0,1)");
    int div = 1 << depth;
    if (nx % div || ny % div || nz % div)
      fail(Errc::validation,
           strprintf("input dims %dx%dx%d not divisible by 2^depth=%d", nx, ny, nz, div));
  }
};

struct ParamCounts {
  int64_t weights = 0;
  int64_t biases = 0;  // conv biases plus batchnorm gamma/beta
  int64_t total() const { return weights + biases; }
};

struct CountReport {
  std::vector<std::pair<std::string, ParamCounts>> per_block;
  ParamCounts totals;
  // standard-conv mid-flow / separable mid-flow at the model's largest C,
  // weights only: 125C/(125+C) for k=5
  double separable_vs_standard_ratio = 0;
};

// Closed-form mid-flow counts (three (sep)conv layers at C channels).
inline int64_t midflow_weights_separable(int64_t c, int64_t k) {
  return 3 * (k * k * k * c + c * c);
}
inline int64_t midflow_weights_standard(int64_t c, int64_t k) { return 3 * (k * k * k * c * c); }
inline double midflow_weight_ratio(int64_t c, int64_t k) {
  return static_cast<double>(midflow_weights_standard(c, k)) /
         static_cast<double>(midflow_weights_separable(c, k));
}

template <class T>
class FuseModel {
public:
  struct Entry {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;      // trainable entries only
    bool trainable = false;
  };

  enum class Mode { kTrain, kEval };

  struct ForwardResult {
    nn::Graph<T> graph;
    std::vector<int> param_ids;   // node id per entry, -1 for unused state
    std::vector<int> recon_ids;   // per modality
    int embed_id = -1;            // flattened embedding node
    int loss_id = -1;             // total BCE (sum of per-modality means)
  };

  FuseModel(ModelConfig cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng init(derive_seed(seed, "model.init", 0));
    build(init);
  }

  const ModelConfig& config() const { return cfg_; }
  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  // -------------------------------------------------------------------------
  // Graph forward. Inputs are one {1, nz, ny, nx} map per modality, values in
  // [0,1]. In train mode batch statistics drive the norm layers; running
  // statistics are updated only when update_running is set. dropout_rng may be
  // null to disable dropout (finite-difference harnesses).
  ForwardResult forward_graph(const std::vector<Tensor<T>>& inputs, Mode mode,
                              bool update_running, Rng* dropout_rng, bool with_loss) {
    check_inputs(inputs);
    ForwardResult r;
    nn::Graph<T>& g = r.graph;
    r.param_ids.assign(entries_.size(), -1);
    auto pid = [&](int idx) {
      if (r.param_ids[static_cast<size_t>(idx)] < 0)
        r.param_ids[static_cast<size_t>(idx)] =
            g.leaf(entries_[static_cast<size_t>(idx)].value,
                   entries_[static_cast<size_t>(idx)].trainable, entries_[static_cast<size_t>(idx)].name);
      return r.param_ids[static_cast<size_t>(idx)];
    };
    Ctx ctx{g, pid, mode, update_running, dropout_rng};

    std::vector<int> bottlenecks;
    std::vector<std::vector<int>> skips(static_cast<size_t>(cfg_.n_modalities));
    std::vector<int> input_ids;
    for (int m = 0; m < cfg_.n_modalities; ++m) {
      int x = g.leaf(inputs[static_cast<size_t>(m)]);
      input_ids.push_back(x);
      auto [bottleneck, skip_stack] = encode_graph(ctx, x, m);
      bottlenecks.push_back(bottleneck);
      skips[static_cast<size_t>(m)] = std::move(skip_stack);
    }

    int fused = bottlenecks[0];
    for (size_t m = 1; m < bottlenecks.size(); ++m) fused = g.concat(fused, bottlenecks[m]);
    int embed_map = g.conv3d(fused, pid(fuse_w_), pid(fuse_b_), 1);
    r.embed_id = g.reshape(embed_map, {static_cast<int>(cfg_.embedding_length())});

    for (int m = 0; m < cfg_.n_modalities; ++m) {
      int recon = decode_graph(ctx, embed_map, skips[static_cast<size_t>(m)], m);
      r.recon_ids.push_back(recon);
    }

    if (with_loss) {
      int loss = -1;
      for (int m = 0; m < cfg_.n_modalities; ++m) {
        int l = g.bce(r.recon_ids[static_cast<size_t>(m)], input_ids[static_cast<size_t>(m)]);
        loss = loss < 0 ? l : g.add(loss, l);
      }
      r.loss_id = loss;
    }
    return r;
  }

  // Pulls gradients accumulated in the graph back onto the entries.
  void collect_grads(const ForwardResult& r) {
    for (size_t i = 0; i < entries_.size(); ++i) {
      if (!entries_[i].trainable) continue;
      int id = r.param_ids[i];
      if (id < 0) continue;
      const Tensor<T>& gsrc = r.graph.grad(id);
      if (gsrc.empty()) continue;
      if (entries_[i].grad.empty()) entries_[i].grad = Tensor<T>(entries_[i].value.dims);
      for (int64_t j = 0; j < gsrc.numel(); ++j) entries_[i].grad[j] += gsrc[j];
    }
  }

  void zero_grads() {
    for (auto& e : entries_)
      if (e.trainable && !e.grad.empty()) e.grad.fill(T(0));
  }

  // -------------------------------------------------------------------------
  // Allocation-light inference path: same kernels, no graph bookkeeping.
  // Batch statistics are replaced by the stored running statistics.

  Tensor<T> embed(const std::vector<Tensor<T>>& inputs) const {
    Tensor<T> embed_map = embed_map_infer(inputs);
    return embed_map.reshaped({static_cast<int>(cfg_.embedding_length())});
  }

  std::vector<Tensor<T>> reconstruct(const std::vector<Tensor<T>>& inputs) const {
    check_inputs(inputs);
    std::vector<std::vector<Tensor<T>>> skips(static_cast<size_t>(cfg_.n_modalities));
    std::vector<Tensor<T>> bottlenecks;
    for (int m = 0; m < cfg_.n_modalities; ++m)
      bottlenecks.push_back(encode_infer(inputs[static_cast<size_t>(m)], m, &skips[static_cast<size_t>(m)]));
    Tensor<T> fused = concat_channels(bottlenecks);
    Tensor<T> embed_map;
    nn::conv3d_forward(fused, value(fuse_w_), value(fuse_b_), embed_map, 1);
    std::vector<Tensor<T>> out;
    for (int m = 0; m < cfg_.n_modalities; ++m)
      out.push_back(decode_infer(embed_map, skips[static_cast<size_t>(m)], m));
    return out;
  }

  // -------------------------------------------------------------------------

  CountReport count_params() const {
    CountReport rep;
    for (const auto& [label, first, last] : block_spans_) {
      ParamCounts c;
      for (int i = first; i < last; ++i) {
        const Entry& e = entries_[static_cast<size_t>(i)];
        if (!e.trainable) continue;
        if (e.name.size() >= 2 && e.name.compare(e.name.size() - 2, 2, ".w") == 0)
          c.weights += e.value.numel();
        else
          c.biases += e.value.numel();
      }
      rep.per_block.push_back({label, c});
      rep.totals.weights += c.weights;
      rep.totals.biases += c.biases;
    }
    rep.separable_vs_standard_ratio = midflow_weight_ratio(cfg_.bottleneck_channels(), cfg_.kernel);
    return rep;
  }

  void save_checkpoint(const std::string& path) const;
  static FuseModel load_checkpoint(const std::string& path, uint64_t seed_for_layout = 0);

private:
  struct BlockRef {
    bool separable = false;
    bool use_dropout = true;
    int c_in = 0, c_out = 0, k = 5;
    int w = -1, b = -1;       // depthwise params when separable
    int pw = -1, pb = -1;     // pointwise params when separable
    int gamma = -1, beta = -1, rmean = -1, rvar = -1;
  };
  struct MidflowRef {
    std::array<BlockRef, 3> blocks;
  };
  struct EncStep {
    BlockRef conv;
    MidflowRef mid;
    BlockRef down;
  };
  struct DecStep {
    BlockRef up;
    MidflowRef mid;
    BlockRef conv;
  };

  struct Ctx {
    nn::Graph<T>& g;
    std::function<int(int)> pid;
    Mode mode;
    bool update_running;
    Rng* dropout_rng;
  };

  // ---- construction -------------------------------------------------------

  int add_entry(const std::string& name, std::vector<int> dims, bool trainable, T fill_value) {
    Entry e;
    e.name = name;
    e.value = Tensor<T>(std::move(dims));
    if (fill_value != T(0)) e.value.fill(fill_value);
    e.trainable = trainable;
    entries_.push_back(std::move(e));
    return static_cast<int>(entries_.size()) - 1;
  }

  int add_conv_weight(const std::string& name, std::vector<int> dims, int64_t fan_in, Rng& rng) {
    int idx = add_entry(name, std::move(dims), true, T(0));
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& v : entries_.back().value.v) v = static_cast<T>(rng.uniform(-limit, limit));
    return idx;
  }

  BlockRef make_block(const std::string& name, bool separable, int c_in, int c_out, int k,
                      bool use_dropout, Rng& rng) {
    BlockRef blk;
    blk.separable = separable;
    blk.use_dropout = use_dropout;
    blk.c_in = c_in;
    blk.c_out = c_out;
    blk.k = k;
    if (separable) {
      blk.w = add_conv_weight(name + ".dw.w", {c_in, k, k, k}, static_cast<int64_t>(k) * k * k, rng);
      blk.b = add_entry(name + ".dw.b", {c_in}, true, T(0));
      blk.pw = add_conv_weight(name + ".pw.w", {c_out, c_in, 1, 1, 1}, c_in, rng);
      blk.pb = add_entry(name + ".pw.b", {c_out}, true, T(0));
    } else {
      blk.w = add_conv_weight(name + ".w", {c_out, c_in, k, k, k},
                              static_cast<int64_t>(c_in) * k * k * k, rng);
      blk.b = add_entry(name + ".b", {c_out}, true, T(0));
    }
    blk.gamma = add_entry(name + ".bn.gamma", {c_out}, true, T(1));
    blk.beta = add_entry(name + ".bn.beta", {c_out}, true, T(0));
    blk.rmean = add_entry(name + ".bn.rmean", {c_out}, false, T(0));
    blk.rvar = add_entry(name + ".bn.rvar", {c_out}, false, T(1));
    return blk;
  }

  MidflowRef make_midflow(const std::string& name, int c, int k, Rng& rng) {
    MidflowRef mid;
    for (int i = 0; i < 3; ++i)
      mid.blocks[static_cast<size_t>(i)] =
          make_block(name + ".sep" + std::to_string(i + 1), true, c, c, k, true, rng);
    return mid;
  }

  void begin_block_span(const std::string& label) {
    span_start_ = static_cast<int>(entries_.size());
    span_label_ = label;
  }
  void end_block_span() {
    block_spans_.push_back({span_label_, span_start_, static_cast<int>(entries_.size())});
  }

  void build(Rng& rng) {
    const int k = cfg_.kernel;
    enc_.resize(static_cast<size_t>(cfg_.n_modalities));
    dec_.resize(static_cast<size_t>(cfg_.n_modalities));
    out_w_.resize(static_cast<size_t>(cfg_.n_modalities));
    out_b_.resize(static_cast<size_t>(cfg_.n_modalities));
    for (int m = 0; m < cfg_.n_modalities; ++m) {
      for (int level = 1; level <= cfg_.depth; ++level) {
        std::string base = strprintf("m%d.enc%d", m, level);
        begin_block_span(base);
        EncStep step;
        int c_prev = level == 1 ? 1 : cfg_.channels(level - 1);
        int c = cfg_.channels(level);
        step.conv = make_block(base + ".conv", false, c_prev, c, k, true, rng);
        step.mid = make_midflow(base + ".mid", c, k, rng);
        step.down = make_block(base + ".down", false, c, c, k, true, rng);
        enc_[static_cast<size_t>(m)].push_back(step);
        end_block_span();
      }
    }
    begin_block_span("fuse");
    fuse_w_ = add_conv_weight("fuse.w",
                              {cfg_.embed_channels(), cfg_.n_modalities * cfg_.bottleneck_channels(),
                               1, 1, 1},
                              cfg_.n_modalities * cfg_.bottleneck_channels(), rng);
    fuse_b_ = add_entry("fuse.b", {cfg_.embed_channels()}, true, T(0));
    end_block_span();
    for (int m = 0; m < cfg_.n_modalities; ++m) {
      for (int t = cfg_.depth - 1; t >= 0; --t) {
        std::string base = strprintf("m%d.dec%d", m, t);
        begin_block_span(base);
        DecStep step;
        int c_in = t == cfg_.depth - 1 ? cfg_.embed_channels() : cfg_.channels(t + 1);
        int c = cfg_.channels(std::max(t, 1));
        step.up = make_block(base + ".up", false, c_in, c, k, true, rng);
        step.mid = make_midflow(base + ".mid", 2 * c, k, rng);
        step.conv = make_block(base + ".conv", false, 2 * c, c, k, true, rng);
        dec_[static_cast<size_t>(m)].push_back(step);
        end_block_span();
      }
      std::string base = strprintf("m%d.out", m);
      begin_block_span(base);
      out_w_[static_cast<size_t>(m)] = add_conv_weight(
          base + ".w", {1, cfg_.channels(1), k, k, k},
          static_cast<int64_t>(cfg_.channels(1)) * k * k * k, rng);
      out_b_[static_cast<size_t>(m)] = add_entry(base + ".b", {1}, true, T(0));
      end_block_span();
    }
  }

  // ---- shared helpers -----------------------------------------------------

  const Tensor<T>& value(int idx) const { return entries_[static_cast<size_t>(idx)].value; }
  Tensor<T>& value_mut(int idx) { return entries_[static_cast<size_t>(idx)].value; }

  void check_inputs(const std::vector<Tensor<T>>& inputs) const {
    if (static_cast<int>(inputs.size()) != cfg_.n_modalities)
      fail(Errc::validation, "modality count mismatch");
    for (const auto& t : inputs) {
      nn::MapDims d = nn::map_dims(t);
      if (d.c != 1 || d.nx != cfg_.nx || d.ny != cfg_.ny || d.nz != cfg_.nz)
        fail(Errc::validation, "input volume dims do not match model config");
    }
  }

  static Tensor<T> concat_channels(const std::vector<Tensor<T>>& maps) {
    nn::MapDims d = nn::map_dims(maps[0]);
    int c_total = 0;
    for (const auto& m : maps) c_total += nn::map_dims(m).c;
    Tensor<T> out({c_total, d.nz, d.ny, d.nx});
    auto it = out.v.begin();
    for (const auto& m : maps) it = std::copy(m.v.begin(), m.v.end(), it);
    return out;
  }

  // ---- graph path ---------------------------------------------------------

  int conv_block_graph(Ctx& ctx, int x, const BlockRef& blk) {
    nn::Graph<T>& g = ctx.g;
    int y;
    if (blk.separable) {
      y = g.depthwise(x, ctx.pid(blk.w), ctx.pid(blk.b), blk.k);
      y = g.conv3d(y, ctx.pid(blk.pw), ctx.pid(blk.pb), 1);
    } else {
      y = g.conv3d(x, ctx.pid(blk.w), ctx.pid(blk.b), blk.k);
    }
    if (ctx.mode == Mode::kTrain) {
      Tensor<T>* rm = ctx.update_running ? &value_mut(blk.rmean) : nullptr;
      Tensor<T>* rv = ctx.update_running ? &value_mut(blk.rvar) : nullptr;
      y = g.batchnorm_train(y, ctx.pid(blk.gamma), ctx.pid(blk.beta), cfg_.bn_eps, rm, rv,
                            cfg_.bn_momentum);
    } else {
      y = g.batchnorm_infer(y, ctx.pid(blk.gamma), ctx.pid(blk.beta), ctx.pid(blk.rmean),
                            ctx.pid(blk.rvar), cfg_.bn_eps);
    }
    y = g.elu(y);
    if (blk.use_dropout && ctx.mode == Mode::kTrain)
      y = g.dropout(y, cfg_.dropout_rate, ctx.dropout_rng);
    return y;
  }

  int midflow_graph(Ctx& ctx, int x, const MidflowRef& mid) {
    int y = x;
    for (const auto& blk : mid.blocks) y = conv_block_graph(ctx, y, blk);
    return ctx.g.add(x, y);
  }

  std::pair<int, std::vector<int>> encode_graph(Ctx& ctx, int x, int m) {
    std::vector<int> skips(static_cast<size_t>(cfg_.depth), -1);
    int cur = x;
    for (int level = 1; level <= cfg_.depth; ++level) {
      const EncStep& step = enc_[static_cast<size_t>(m)][static_cast<size_t>(level - 1)];
      cur = conv_block_graph(ctx, cur, step.conv);
      cur = midflow_graph(ctx, cur, step.mid);
      if (level == 1) skips[0] = cur;  // full-resolution features, pre-pool
      cur = conv_block_graph(ctx, cur, step.down);
      cur = ctx.g.maxpool(cur);
      if (level < cfg_.depth) skips[static_cast<size_t>(level)] = cur;
    }
    return {cur, std::move(skips)};
  }

  int decode_graph(Ctx& ctx, int embed_map, const std::vector<int>& skips, int m) {
    int cur = embed_map;
    for (int t = cfg_.depth - 1; t >= 0; --t) {
      const DecStep& step =
          dec_[static_cast<size_t>(m)][static_cast<size_t>(cfg_.depth - 1 - t)];
      cur = ctx.g.upsample(cur);
      cur = conv_block_graph(ctx, cur, step.up);
      int skip = skips[static_cast<size_t>(t)];
      if (skip < 0) fail(Errc::validation, "missing skip level");
      cur = ctx.g.concat(cur, skip);
      cur = midflow_graph(ctx, cur, step.mid);
      cur = conv_block_graph(ctx, cur, step.conv);
    }
    int y = ctx.g.conv3d(cur, ctx.pid(out_w_[static_cast<size_t>(m)]),
                         ctx.pid(out_b_[static_cast<size_t>(m)]), cfg_.kernel);
    return ctx.g.sigmoid(y);
  }

  // ---- inference path -----------------------------------------------------

  Tensor<T> conv_block_infer(const Tensor<T>& x, const BlockRef& blk) const {
    Tensor<T> y;
    if (blk.separable) {
      Tensor<T> mid;
      nn::depthwise_forward(x, value(blk.w), value(blk.b), mid, blk.k);
      nn::conv3d_forward(mid, value(blk.pw), value(blk.pb), y, 1);
    } else {
      nn::conv3d_forward(x, value(blk.w), value(blk.b), y, blk.k);
    }
    Tensor<T> normed;
    nn::batchnorm_infer_forward(y, value(blk.gamma), value(blk.beta), value(blk.rmean),
                                value(blk.rvar), cfg_.bn_eps, normed);
    Tensor<T> activated;
    nn::elu_forward(normed, activated);
    return activated;  // dropout is identity outside training
  }

  Tensor<T> midflow_infer(const Tensor<T>& x, const MidflowRef& mid) const {
    Tensor<T> y = x;
    for (const auto& blk : mid.blocks) y = conv_block_infer(y, blk);
    for (int64_t i = 0; i < y.numel(); ++i) y[i] += x[i];
    return y;
  }

  Tensor<T> encode_infer(const Tensor<T>& input, int m, std::vector<Tensor<T>>* skips) const {
    if (skips) skips->assign(static_cast<size_t>(cfg_.depth), Tensor<T>());
    Tensor<T> cur = input;
    for (int level = 1; level <= cfg_.depth; ++level) {
      const EncStep& step = enc_[static_cast<size_t>(m)][static_cast<size_t>(level - 1)];
      cur = conv_block_infer(cur, step.conv);
      cur = midflow_infer(cur, step.mid);
      if (skips && level == 1) (*skips)[0] = cur;
      cur = conv_block_infer(cur, step.down);
      Tensor<T> pooled;
      nn::maxpool_forward(cur, pooled, nullptr);
      cur = std::move(pooled);
      if (skips && level < cfg_.depth) (*skips)[static_cast<size_t>(level)] = cur;
    }
    return cur;
  }

  Tensor<T> embed_map_infer(const std::vector<Tensor<T>>& inputs) const {
    check_inputs(inputs);
    std::vector<Tensor<T>> bottlenecks;
    for (int m = 0; m < cfg_.n_modalities; ++m)
      bottlenecks.push_back(encode_infer(inputs[static_cast<size_t>(m)], m, nullptr));
    Tensor<T> fused = concat_channels(bottlenecks);
    Tensor<T> embed_map;
    nn::conv3d_forward(fused, value(fuse_w_), value(fuse_b_), embed_map, 1);
    return embed_map;
  }

  Tensor<T> decode_infer(const Tensor<T>& embed_map, const std::vector<Tensor<T>>& skips,
                         int m) const {
    Tensor<T> cur = embed_map;
    for (int t = cfg_.depth - 1; t >= 0; --t) {
      const DecStep& step = dec_[static_cast<size_t>(m)][static_cast<size_t>(cfg_.depth - 1 - t)];
      Tensor<T> up;
      nn::upsample_forward(cur, up);
      cur = conv_block_infer(up, step.up);
      if (skips[static_cast<size_t>(t)].empty()) fail(Errc::validation, "missing skip level");
      cur = concat_channels({cur, skips[static_cast<size_t>(t)]});
      cur = midflow_infer(cur, step.mid);
      cur = conv_block_infer(cur, step.conv);
    }
    Tensor<T> y;
    nn::conv3d_forward(cur, value(out_w_[static_cast<size_t>(m)]),
                       value(out_b_[static_cast<size_t>(m)]), y, cfg_.kernel);
    Tensor<T> out;
    nn::sigmoid_forward(y, out);
    return out;
  }

  ModelConfig cfg_;
  std::vector<Entry> entries_;
  std::vector<std::vector<EncStep>> enc_;  // [modality][level-1]
  std::vector<std::vector<DecStep>> dec_;  // [modality][depth-1-t]
  std::vector<int> out_w_, out_b_;
  int fuse_w_ = -1, fuse_b_ = -1;
  std::vector<std::tuple<std::string, int, int>> block_spans_;
  int span_start_ = 0;
  std::string span_label_;
};

// Checkpoint plumbing shared by the float/double instantiations; defined in
// model.cpp. Payload is always f32 on disk.
struct CheckpointEntry {
  std::string name;
  std::vector<int> dims;
  std::vector<float> data;
};
void write_checkpoint_file(const std::string& path, const ModelConfig& cfg,
                           const std::vector<CheckpointEntry>& entries);
ModelConfig read_checkpoint_file(const std::string& path, std::vector<CheckpointEntry>& entries);

template <class T>
void FuseModel<T>::save_checkpoint(const std::string& path) const {
  std::vector<CheckpointEntry> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) {
    CheckpointEntry ce;
    ce.name = e.name;
    ce.dims = e.value.dims;
    ce.data.resize(static_cast<size_t>(e.value.numel()));
    for (int64_t i = 0; i < e.value.numel(); ++i) ce.data[static_cast<size_t>(i)] = static_cast<float>(e.value[i]);
    out.push_back(std::move(ce));
  }
  write_checkpoint_file(path, cfg_, out);
}

template <class T>
FuseModel<T> FuseModel<T>::load_checkpoint(const std::string& path, uint64_t seed_for_layout) {
  std::vector<CheckpointEntry> stored;
  ModelConfig cfg = read_checkpoint_file(path, stored);
  FuseModel<T> model(cfg, seed_for_layout);
  if (stored.size() != model.entries_.size())
    fail(Errc::parse, path + ": checkpoint entry count mismatch");
  for (size_t i = 0; i < stored.size(); ++i) {
    Entry& e = model.entries_[i];
    if (stored[i].name != e.name)
      fail(Errc::parse, path + ": checkpoint entry order mismatch at " + stored[i].name);
    if (stored[i].dims != e.value.dims)
      fail(Errc::parse, path + ": checkpoint shape mismatch at " + stored[i].name);
    for (size_t j = 0; j < stored[i].data.size(); ++j) e.value[static_cast<int64_t>(j)] = static_cast<T>(stored[i].data[j]);
  }
  return model;
}

}  // namespace fusestrata
