#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "embedfit/embedding.hpp"

namespace embedfit {

enum class EncoderMode { Identity, Toy };

std::string to_string(EncoderMode mode);
EncoderMode parse_encoder_mode(const std::string& s);

// Token ids with exactly one placeholder slot, written as kPlaceholder.
struct PromptTemplate {
  static constexpr int kPlaceholder = -1;
  std::vector<int> tokens;

  std::size_t placeholder_index() const;
  // "a photo of *": BOS a photo of * EOT.
  static PromptTemplate default_template() { return {{0, 1, 2, 3, kPlaceholder, 4}}; }
};

struct ToyEncoderShape {
  std::size_t token_dim = 16;
  std::size_t vocab_size = 32;
  std::size_t context_length = 8;
  std::size_t output_dim = 16;
};

// Frozen single-block text encoder: token + positional embeddings, one
// single-head self-attention with residual, a tanh feed-forward block
// (d -> 4d -> d) with residual, and a linear output projection. The output is
// read at the last template position. Matrices are row-major and applied to
// row vectors (x W).
class ToyTextEncoder {
 public:
  const ToyEncoderShape& shape() const { return shape_; }

  Vec encode(const PromptTemplate& tmpl, std::span<const double> token) const;
  // (dz/de)^T upstream for the placeholder token embedding e.
  Vec encode_vjp(const PromptTemplate& tmpl, std::span<const double> token,
                 std::span<const double> upstream) const;

  void validate(const PromptTemplate& tmpl) const;
  std::uint64_t checksum() const;

  std::span<const double> vocab_row(std::size_t id) const;
  Vec vocab_mean() const;

  // Serialized weight buffers in the fixed order of init_frozen.
  std::vector<std::pair<std::string, const Vec*>> buffers() const;
  std::vector<std::pair<std::string, Vec*>> mutable_buffers();

  friend ToyTextEncoder init_frozen(std::uint64_t seed, ToyEncoderShape shape);

 private:
  struct Forward;
  Forward run(const PromptTemplate& tmpl, std::span<const double> token) const;

  ToyEncoderShape shape_;
  Vec vocab_, positions_;
  Vec wq_, wk_, wv_, wo_;
  Vec w1_, b1_, w2_, b2_;
  Vec wp_;
};

// Weights uniform in [-1/sqrt(token_dim), 1/sqrt(token_dim)] from an
// mt19937_64 stream, drawn buffer by buffer in declaration order.
ToyTextEncoder init_frozen(std::uint64_t seed, ToyEncoderShape shape = {});

struct LearnableToken {
  std::string class_name;
  Vec embedding;
};

// The text encoder seen by the optimizer. Identity mode maps the token
// straight to the output embedding.
class TextEncoder {
 public:
  static TextEncoder identity(std::size_t dim);
  static TextEncoder toy(ToyTextEncoder encoder, PromptTemplate tmpl);

  EncoderMode mode() const { return mode_; }
  std::size_t token_dim() const;
  std::size_t output_dim() const;
  const ToyTextEncoder* toy_encoder() const { return toy_ ? &*toy_ : nullptr; }
  const PromptTemplate& prompt() const { return template_; }

  Vec encode(std::span<const double> token) const;
  Vec encode_vjp(std::span<const double> token, std::span<const double> upstream) const;
  std::uint64_t checksum() const;

 private:
  EncoderMode mode_ = EncoderMode::Identity;
  std::size_t dim_ = 0;
  std::optional<ToyTextEncoder> toy_;
  PromptTemplate template_;
};

Vec encode(const TextEncoder& encoder, const LearnableToken& token);
Vec encode_vjp(const TextEncoder& encoder, const LearnableToken& token, std::span<const double> upstream);

}  // namespace embedfit
