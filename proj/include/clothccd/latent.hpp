#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Core>

#include "clothccd/geometry.hpp"

namespace clothccd {

/// One token per row, D features per column.
using TokenSet = Eigen::MatrixXd;
using AttentionMask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct EmbeddingConfig {
  /// Frequencies are base^(-k/F) for k = 0..F-1, F = D / 6.
  double base = 10000.0;
  /// Coordinates are multiplied by this before embedding.
  double coordinate_scale = 100.0;
};

/// Per axis a, frequency k: column 2F a + 2k holds sin, the next column cos.
/// Throws Error unless D is a positive multiple of 6.
TokenSet sinusoidal_embed(std::span<const Vec3> points, int dim,
                          const EmbeddingConfig& config = {});

/// Embedding of scale * (x_t - x_prev).
TokenSet encode_velocity(const FrameState& frame_t, const FrameState& frame_prev, double scale,
                         int dim, const EmbeddingConfig& config = {});

/// Single-head attention projections, each D x D, applied as x * W.
struct AttentionWeights {
  Eigen::MatrixXd query;
  Eigen::MatrixXd key;
  Eigen::MatrixXd value;
  Eigen::MatrixXd output;
  std::string provenance;

  int dim() const { return static_cast<int>(query.rows()); }
  /// Throws Error on inconsistent shapes or non-finite entries.
  void check() const;

  /// Entries drawn from N(0, 1/D) with a 64-bit Mersenne Twister.
  static AttentionWeights seeded(int dim, std::uint64_t seed);
};

/// Weight file: ASCII header "CTWT1 <D>\n", then the query, key, value and
/// output matrices, row-major little-endian binary64.
void save_weights(const std::string& path, const AttentionWeights& w);
AttentionWeights load_weights(const std::string& path);

/// Seeded N(0, 1) tokens, e.g. learnable latent queries.
TokenSet seeded_tokens(Eigen::Index rows, int dim, std::uint64_t seed);

/// Floating-point operations charged by the attention routines.
struct FlopCounter {
  std::uint64_t flops = 0;
};

/// Analytic cost of one attention call: projections, logits, softmax,
/// weighted sum and output projection.
std::uint64_t attention_flops(std::uint64_t queries, std::uint64_t keys, std::uint64_t dim);

/// Row-stochastic attention matrix (queries x keys), for inspection.
Eigen::MatrixXd attention_matrix(const TokenSet& queries, const TokenSet& keys,
                                 const AttentionWeights& w);

/// softmax(Q K^T / sqrt(D)) V, then the output projection. Evaluated over
/// blocks of query rows so memory stays linear in the larger side.
TokenSet cross_attend(const TokenSet& queries, const TokenSet& keys, const AttentionWeights& w,
                      FlopCounter* counter = nullptr);

/// K latent queries attend to N input tokens; the result has K rows for any N.
TokenSet cross_attend_compress(const TokenSet& kv_tokens, const TokenSet& queries,
                               const AttentionWeights& w, FlopCounter* counter = nullptr);

/// N rest-pose queries attend to K latents; the result has N rows.
TokenSet decode_query(const TokenSet& rest_tokens, const TokenSet& latents,
                      const AttentionWeights& w, FlopCounter* counter = nullptr);

/// Self-attention among the latents.
TokenSet latent_self_attend(const TokenSet& latents, const AttentionWeights& w,
                            FlopCounter* counter = nullptr);

/// Entry (i, j) is true iff token j's frame does not come after token i's.
AttentionMask block_causal_mask(int frame_count, int tokens_per_frame);

}  // namespace clothccd
