#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace lpar::embed {

inline constexpr std::size_t embedding_dim = 64;

// Either the zero vector or unit L2 norm.
struct Embedding {
    std::vector<double> values;

    [[nodiscard]] std::size_t dim() const noexcept { return values.size(); }
    [[nodiscard]] bool is_zero() const noexcept;
    [[nodiscard]] double norm() const noexcept;

    static Embedding zero(std::size_t dim = embedding_dim) { return {std::vector<double>(dim, 0.0)}; }

    friend bool operator==(const Embedding &, const Embedding &) = default;
};

struct Centroid {
    Embedding embedding = Embedding::zero();
    std::size_t sample_count = 0;

    friend bool operator==(const Centroid &, const Centroid &) = default;
};

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

// Signed feature hashing of the bag of tokens, then L2 normalisation. Each
// token hashes with FNV-1a 64; the low bit picks the sign and the remaining
// bits, mod 64, pick the slot.
Embedding embed_text(std::string_view text);

// Scales to unit norm; the zero vector stays zero.
Embedding normalized(Embedding v);

// dot(a,b) / (|a||b|), or 0 when either side is zero. Throws
// DimensionMismatch on unequal dims.
double cosine(const Embedding &a, const Embedding &b);

// Normalised component-wise mean. Inputs are sorted by their byte image
// before summing so the result is bitwise independent of input order.
Centroid centroid_of(std::span<const Embedding> embeddings);

}  // namespace lpar::embed
