#include "embedfit/encoder.hpp"

#include <cmath>

#include "embedfit/error.hpp"
#include "embedfit/hash.hpp"
#include "embedfit/rng.hpp"

namespace embedfit {
namespace {

// x (n) times W (n x m).
Vec vec_mat(std::span<const double> x, const Vec& w, std::size_t m) {
  Vec out(m, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    for (std::size_t j = 0; j < m; ++j) out[j] += xi * w[i * m + j];
  }
  return out;
}

// W (n x m) times g (m), i.e. g W^T.
Vec mat_vec(const Vec& w, std::span<const double> g, std::size_t n) {
  const std::size_t m = g.size();
  Vec out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += w[i * m + j] * g[j];
    out[i] = s;
  }
  return out;
}

void add_into(Vec& acc, std::span<const double> x, double scale = 1.0) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += scale * x[i];
}

}  // namespace

std::string to_string(EncoderMode mode) { return mode == EncoderMode::Identity ? "identity" : "toy"; }

EncoderMode parse_encoder_mode(const std::string& s) {
  if (s == "identity") return EncoderMode::Identity;
  if (s == "toy") return EncoderMode::Toy;
  throw Error(ErrorCode::InvalidConfig, "unknown encoder mode '" + s + "' (expected identity or toy)");
}

std::size_t PromptTemplate::placeholder_index() const {
  std::size_t found = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] != kPlaceholder) continue;
    if (found != tokens.size()) throw Error(ErrorCode::InvalidTemplate, "template has more than one placeholder");
    found = i;
  }
  if (found == tokens.size()) throw Error(ErrorCode::InvalidTemplate, "template has no placeholder");
  return found;
}

struct ToyTextEncoder::Forward {
  std::size_t slot = 0;
  std::vector<Vec> h;     // per-position input rows
  Vec q;                  // query of the last position
  std::vector<Vec> keys;
  std::vector<Vec> values;
  Vec attn;               // softmax weights
  Vec context;            // sum_j attn_j values_j
  Vec r1;                 // after attention residual
  Vec act;                // tanh(r1 W1 + b1)
  Vec r2;                 // after feed-forward residual
  Vec z;
};

void ToyTextEncoder::validate(const PromptTemplate& tmpl) const {
  if (tmpl.tokens.empty() || tmpl.tokens.size() > shape_.context_length) {
    throw Error(ErrorCode::InvalidTemplate, "template length " + std::to_string(tmpl.tokens.size()) +
                                                " outside [1, " + std::to_string(shape_.context_length) + "]");
  }
  tmpl.placeholder_index();
  for (int t : tmpl.tokens) {
    if (t == PromptTemplate::kPlaceholder) continue;
    if (t < 0 || static_cast<std::size_t>(t) >= shape_.vocab_size) {
      throw Error(ErrorCode::InvalidTemplate, "token id " + std::to_string(t) + " outside the vocabulary");
    }
  }
}

ToyTextEncoder::Forward ToyTextEncoder::run(const PromptTemplate& tmpl, std::span<const double> token) const {
  validate(tmpl);
  const std::size_t d = shape_.token_dim;
  require_same_dim(token.size(), d, "toy encoder token");
  const std::size_t len = tmpl.tokens.size();
  Forward f;
  f.slot = tmpl.placeholder_index();
  f.h.resize(len);
  for (std::size_t p = 0; p < len; ++p) {
    Vec row(d);
    const int id = tmpl.tokens[p];
    for (std::size_t c = 0; c < d; ++c) {
      const double tok = id == PromptTemplate::kPlaceholder ? token[c] : vocab_[static_cast<std::size_t>(id) * d + c];
      row[c] = tok + positions_[p * d + c];
    }
    f.h[p] = std::move(row);
  }
  const Vec& last = f.h.back();
  f.q = vec_mat(last, wq_, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Vec scores(len);
  for (std::size_t p = 0; p < len; ++p) {
    f.keys.push_back(vec_mat(f.h[p], wk_, d));
    f.values.push_back(vec_mat(f.h[p], wv_, d));
    scores[p] = dot(f.q, f.keys[p]) * scale;
  }
  double peak = scores[0];
  for (double s : scores) peak = std::max(peak, s);
  f.attn.resize(len);
  double total = 0.0;
  for (std::size_t p = 0; p < len; ++p) total += (f.attn[p] = std::exp(scores[p] - peak));
  for (double& a : f.attn) a /= total;
  f.context.assign(d, 0.0);
  for (std::size_t p = 0; p < len; ++p) add_into(f.context, f.values[p], f.attn[p]);
  f.r1 = last;
  add_into(f.r1, vec_mat(f.context, wo_, d));
  Vec pre = vec_mat(f.r1, w1_, 4 * d);
  add_into(pre, b1_);
  f.act.resize(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) f.act[i] = std::tanh(pre[i]);
  f.r2 = f.r1;
  add_into(f.r2, vec_mat(f.act, w2_, d));
  add_into(f.r2, b2_);
  f.z = vec_mat(f.r2, wp_, shape_.output_dim);
  return f;
}

Vec ToyTextEncoder::encode(const PromptTemplate& tmpl, std::span<const double> token) const {
  return run(tmpl, token).z;
}

Vec ToyTextEncoder::encode_vjp(const PromptTemplate& tmpl, std::span<const double> token,
                               std::span<const double> upstream) const {
  require_same_dim(upstream.size(), shape_.output_dim, "toy encoder upstream gradient");
  const Forward f = run(tmpl, token);
  const std::size_t d = shape_.token_dim;
  const std::size_t len = f.h.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  const Vec g_r2 = mat_vec(wp_, upstream, d);
  Vec g_pre = mat_vec(w2_, g_r2, 4 * d);
  for (std::size_t i = 0; i < g_pre.size(); ++i) g_pre[i] *= 1.0 - f.act[i] * f.act[i];
  Vec g_r1 = g_r2;
  add_into(g_r1, mat_vec(w1_, g_pre, d));

  // r1 = h_last + context Wo
  const Vec g_context = mat_vec(wo_, g_r1, d);
  Vec g_attn(len);
  for (std::size_t p = 0; p < len; ++p) g_attn[p] = dot(g_context, f.values[p]);
  double mean_g = 0.0;
  for (std::size_t p = 0; p < len; ++p) mean_g += f.attn[p] * g_attn[p];
  Vec g_q(d, 0.0);
  Vec g_slot(d, 0.0);
  for (std::size_t p = 0; p < len; ++p) {
    const double g_score = f.attn[p] * (g_attn[p] - mean_g) * scale;
    add_into(g_q, f.keys[p], g_score);
    if (p != f.slot) continue;
    Vec g_key = f.q;
    for (double& x : g_key) x *= g_score;
    add_into(g_slot, mat_vec(wk_, g_key, d));
    Vec g_value = g_context;
    for (double& x : g_value) x *= f.attn[p];
    add_into(g_slot, mat_vec(wv_, g_value, d));
  }
  if (f.slot == len - 1) {
    add_into(g_slot, g_r1);
    add_into(g_slot, mat_vec(wq_, g_q, d));
  }
  return g_slot;
}

std::uint64_t ToyTextEncoder::checksum() const {
  Fnv1a h;
  h.update(static_cast<std::uint64_t>(shape_.token_dim));
  h.update(static_cast<std::uint64_t>(shape_.vocab_size));
  h.update(static_cast<std::uint64_t>(shape_.context_length));
  h.update(static_cast<std::uint64_t>(shape_.output_dim));
  for (const auto& [name, buf] : buffers()) h.update(std::span<const double>(*buf));
  return h.digest();
}

std::span<const double> ToyTextEncoder::vocab_row(std::size_t id) const {
  if (id >= shape_.vocab_size) throw Error(ErrorCode::OutOfRange, "token id " + std::to_string(id));
  return std::span<const double>(vocab_).subspan(id * shape_.token_dim, shape_.token_dim);
}

Vec ToyTextEncoder::vocab_mean() const {
  Vec mean(shape_.token_dim, 0.0);
  for (std::size_t v = 0; v < shape_.vocab_size; ++v) add_into(mean, vocab_row(v));
  for (double& x : mean) x /= static_cast<double>(shape_.vocab_size);
  return mean;
}

std::vector<std::pair<std::string, const Vec*>> ToyTextEncoder::buffers() const {
  return {{"vocab", &vocab_}, {"positions", &positions_}, {"wq", &wq_}, {"wk", &wk_},
          {"wv", &wv_},       {"wo", &wo_},               {"w1", &w1_}, {"b1", &b1_},
          {"w2", &w2_},       {"b2", &b2_},               {"wp", &wp_}};
}

std::vector<std::pair<std::string, Vec*>> ToyTextEncoder::mutable_buffers() {
  return {{"vocab", &vocab_}, {"positions", &positions_}, {"wq", &wq_}, {"wk", &wk_},
          {"wv", &wv_},       {"wo", &wo_},               {"w1", &w1_}, {"b1", &b1_},
          {"w2", &w2_},       {"b2", &b2_},               {"wp", &wp_}};
}

ToyTextEncoder init_frozen(std::uint64_t seed, ToyEncoderShape shape) {
  if (shape.token_dim == 0 || shape.vocab_size == 0 || shape.context_length == 0 || shape.output_dim == 0) {
    throw Error(ErrorCode::InvalidConfig, "toy encoder dimensions must be positive");
  }
  ToyTextEncoder enc;
  enc.shape_ = shape;
  const std::size_t d = shape.token_dim;
  enc.vocab_.resize(shape.vocab_size * d);
  enc.positions_.resize(shape.context_length * d);
  for (Vec* w : {&enc.wq_, &enc.wk_, &enc.wv_, &enc.wo_}) w->resize(d * d);
  enc.w1_.resize(d * 4 * d);
  enc.b1_.resize(4 * d);
  enc.w2_.resize(4 * d * d);
  enc.b2_.resize(d);
  enc.wp_.resize(d * shape.output_dim);

  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (auto& [name, buf] : enc.mutable_buffers()) {
    for (double& x : *buf) x = rng.uniform(-scale, scale);
  }
  return enc;
}

TextEncoder TextEncoder::identity(std::size_t dim) {
  TextEncoder e;
  e.mode_ = EncoderMode::Identity;
  e.dim_ = dim;
  return e;
}

TextEncoder TextEncoder::toy(ToyTextEncoder encoder, PromptTemplate tmpl) {
  encoder.validate(tmpl);
  TextEncoder e;
  e.mode_ = EncoderMode::Toy;
  e.dim_ = encoder.shape().output_dim;
  e.toy_ = std::move(encoder);
  e.template_ = std::move(tmpl);
  return e;
}

std::size_t TextEncoder::token_dim() const { return toy_ ? toy_->shape().token_dim : dim_; }
std::size_t TextEncoder::output_dim() const { return dim_; }

Vec TextEncoder::encode(std::span<const double> token) const {
  if (mode_ == EncoderMode::Toy) return toy_->encode(template_, token);
  require_same_dim(token.size(), dim_, "identity encoder");
  return Vec(token.begin(), token.end());
}

Vec TextEncoder::encode_vjp(std::span<const double> token, std::span<const double> upstream) const {
  if (mode_ == EncoderMode::Toy) return toy_->encode_vjp(template_, token, upstream);
  require_same_dim(token.size(), dim_, "identity encoder");
  require_same_dim(upstream.size(), dim_, "identity encoder upstream");
  return Vec(upstream.begin(), upstream.end());
}

std::uint64_t TextEncoder::checksum() const { return toy_ ? toy_->checksum() : 0; }

Vec encode(const TextEncoder& encoder, const LearnableToken& token) { return encoder.encode(token.embedding); }

Vec encode_vjp(const TextEncoder& encoder, const LearnableToken& token, std::span<const double> upstream) {
  return encoder.encode_vjp(token.embedding, upstream);
}

}  // namespace embedfit
