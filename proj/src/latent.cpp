#include "clothccd/latent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace clothccd {

namespace {

constexpr Eigen::Index kQueryBlock = 256;

void require_width(const TokenSet& t, const AttentionWeights& w, const char* what) {
  if (t.cols() != w.dim())
    throw Error(std::string(what) + " width " + std::to_string(t.cols()) +
                " does not match attention width " + std::to_string(w.dim()));
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, double stddev,
                              std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

// Rows of `logits` become softmax distributions.
void softmax_rows(Eigen::MatrixXd& logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

}  // namespace

TokenSet sinusoidal_embed(std::span<const Vec3> points, int dim, const EmbeddingConfig& config) {
  if (dim <= 0 || dim % 6 != 0)
    throw Error("embedding width " + std::to_string(dim) + " is not a positive multiple of 6");
  const int freqs = dim / 6;
  std::vector<double> omega(freqs);
  for (int k = 0; k < freqs; ++k)
    omega[k] = std::pow(config.base, -static_cast<double>(k) / freqs);
  TokenSet out(static_cast<Eigen::Index>(points.size()), dim);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int axis = 0; axis < 3; ++axis) {
      const double c = config.coordinate_scale * points[i][axis];
      for (int k = 0; k < freqs; ++k) {
        const auto row = static_cast<Eigen::Index>(i);
        out(row, 2 * freqs * axis + 2 * k) = std::sin(omega[k] * c);
        out(row, 2 * freqs * axis + 2 * k + 1) = std::cos(omega[k] * c);
      }
    }
  }
  return out;
}

TokenSet encode_velocity(const FrameState& frame_t, const FrameState& frame_prev, double scale,
                         int dim, const EmbeddingConfig& config) {
  const std::vector<Vec3> v = derive_velocities(frame_t, frame_prev, scale);
  return sinusoidal_embed(v, dim, config);
}

void AttentionWeights::check() const {
  const auto d = query.rows();
  for (const Eigen::MatrixXd* m : {&query, &key, &value, &output}) {
    if (m->rows() != d || m->cols() != d) throw Error("attention weights: inconsistent shapes");
    if (!m->allFinite()) throw Error("attention weights: non-finite entry");
  }
  if (d == 0) throw Error("attention weights: zero width");
}

AttentionWeights AttentionWeights::seeded(int dim, std::uint64_t seed) {
  if (dim <= 0) throw Error("attention weights: width must be positive");
  std::mt19937_64 rng(seed);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(dim));
  AttentionWeights w;
  w.query = random_matrix(dim, dim, stddev, rng);
  w.key = random_matrix(dim, dim, stddev, rng);
  w.value = random_matrix(dim, dim, stddev, rng);
  w.output = random_matrix(dim, dim, stddev, rng);
  w.provenance = "seed:" + std::to_string(seed);
  return w;
}

void save_weights(const std::string& path, const AttentionWeights& w) {
  w.check();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path, 0, "cannot open file for writing");
  out << "CTWT1 " << w.dim() << '\n';
  for (const Eigen::MatrixXd* m : {&w.query, &w.key, &w.value, &w.output}) {
    for (Eigen::Index i = 0; i < m->rows(); ++i)
      for (Eigen::Index j = 0; j < m->cols(); ++j) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>((*m)(i, j));
        unsigned char bytes[8];
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
        out.write(reinterpret_cast<const char*>(bytes), 8);
      }
  }
  if (!out) throw FormatError(path, 0, "write failed");
}

AttentionWeights load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, 0, "cannot open file");
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic;
  long long dim = 0;
  if (!(hs >> magic >> dim) || magic != "CTWT1" || dim <= 0 || dim > 65536)
    throw FormatError(path, 0, "malformed CTWT1 header");
  AttentionWeights w;
  std::size_t record = 0;
  for (Eigen::MatrixXd* m : {&w.query, &w.key, &w.value, &w.output}) {
    ++record;
    m->resize(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) {
        unsigned char bytes[8];
        if (!in.read(reinterpret_cast<char*>(bytes), 8))
          throw FormatError(path, record, "truncated weight matrix");
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
        (*m)(i, j) = std::bit_cast<double>(bits);
      }
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError(path, record, "trailing bytes after weight matrices");
  try {
    w.check();
  } catch (const Error& e) {
    throw FormatError(path, 0, e.what());
  }
  w.provenance = "file:" + path;
  return w;
}

TokenSet seeded_tokens(Eigen::Index rows, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_matrix(rows, dim, 1.0, rng);
}

std::uint64_t attention_flops(std::uint64_t queries, std::uint64_t keys, std::uint64_t dim) {
  const std::uint64_t projections = 2 * dim * dim * (queries + 2 * keys);
  const std::uint64_t logits = 2 * queries * keys * dim;
  const std::uint64_t softmax = 3 * queries * keys;
  const std::uint64_t mix = 2 * queries * keys * dim;
  const std::uint64_t output = 2 * queries * dim * dim;
  return projections + logits + softmax + mix + output;
}

Eigen::MatrixXd attention_matrix(const TokenSet& queries, const TokenSet& keys,
                                 const AttentionWeights& w) {
  w.check();
  require_width(queries, w, "query");
  require_width(keys, w, "key");
  const double scale = 1.0 / std::sqrt(static_cast<double>(w.dim()));
  Eigen::MatrixXd logits = (queries * w.query) * (keys * w.key).transpose() * scale;
  softmax_rows(logits);
  return logits;
}

TokenSet cross_attend(const TokenSet& queries, const TokenSet& keys, const AttentionWeights& w,
                      FlopCounter* counter) {
  w.check();
  require_width(queries, w, "query");
  require_width(keys, w, "key");
  if (keys.rows() == 0) throw Error("attention over an empty key set");
  const double scale = 1.0 / std::sqrt(static_cast<double>(w.dim()));
  const Eigen::MatrixXd k = keys * w.key;
  const Eigen::MatrixXd v = keys * w.value;
  TokenSet out(queries.rows(), w.dim());
  for (Eigen::Index start = 0; start < queries.rows(); start += kQueryBlock) {
    const Eigen::Index rows = std::min(kQueryBlock, queries.rows() - start);
    const Eigen::MatrixXd q = queries.middleRows(start, rows) * w.query;
    Eigen::MatrixXd a = q * k.transpose() * scale;
    softmax_rows(a);
    out.middleRows(start, rows) = (a * v) * w.output;
  }
  if (counter)
    counter->flops += attention_flops(static_cast<std::uint64_t>(queries.rows()),
                                      static_cast<std::uint64_t>(keys.rows()),
                                      static_cast<std::uint64_t>(w.dim()));
  return out;
}

TokenSet cross_attend_compress(const TokenSet& kv_tokens, const TokenSet& queries,
                               const AttentionWeights& w, FlopCounter* counter) {
  return cross_attend(queries, kv_tokens, w, counter);
}

TokenSet decode_query(const TokenSet& rest_tokens, const TokenSet& latents,
                      const AttentionWeights& w, FlopCounter* counter) {
  return cross_attend(rest_tokens, latents, w, counter);
}

TokenSet latent_self_attend(const TokenSet& latents, const AttentionWeights& w,
                            FlopCounter* counter) {
  return cross_attend(latents, latents, w, counter);
}

AttentionMask block_causal_mask(int frame_count, int tokens_per_frame) {
  if (frame_count < 1 || tokens_per_frame < 1)
    throw Error("block causal mask: frame and token counts must be at least 1");
  const Eigen::Index n = static_cast<Eigen::Index>(frame_count) * tokens_per_frame;
  AttentionMask mask(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      mask(i, j) = j / tokens_per_frame <= i / tokens_per_frame;
  return mask;
}

}  // namespace clothccd
