#include "lpar/embed/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "lpar/common/error.hpp"
#include "lpar/common/text.hpp"

namespace lpar::embed {

bool Embedding::is_zero() const noexcept {
    return std::all_of(values.begin(), values.end(), [](double x) { return x == 0.0; });
}

double Embedding::norm() const noexcept {
    double sum = 0.0;
    for (double x : values) sum += x * x;
    return std::sqrt(sum);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

Embedding normalized(Embedding v) {
    const double n = v.norm();
    if (n == 0.0) return v;
    for (double &x : v.values) x /= n;
    return v;
}

Embedding embed_text(std::string_view text) {
    Embedding v = Embedding::zero(embedding_dim);
    for (const auto &token : tokenize(text)) {
        const auto hash = fnv1a64(token);
        const double sign = (hash & 1U) == 0 ? 1.0 : -1.0;
        v.values[(hash >> 1) % embedding_dim] += sign;
    }
    return normalized(std::move(v));
}

double cosine(const Embedding &a, const Embedding &b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "cosine of " + std::to_string(a.dim()) + "-d and " + std::to_string(b.dim()) + "-d vectors");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

namespace {

bool byte_less(const Embedding *a, const Embedding *b) {
    const auto *pa = reinterpret_cast<const unsigned char *>(a->values.data());
    const auto *pb = reinterpret_cast<const unsigned char *>(b->values.data());
    return std::lexicographical_compare(pa, pa + a->values.size() * sizeof(double), pb,
                                        pb + b->values.size() * sizeof(double));
}

}  // namespace

Centroid centroid_of(std::span<const Embedding> embeddings) {
    if (embeddings.empty()) return Centroid{};
    const std::size_t dim = embeddings.front().dim();
    std::vector<const Embedding *> order;
    order.reserve(embeddings.size());
    for (const auto &e : embeddings) {
        if (e.dim() != dim) throw Error(ErrorCode::dimension_mismatch, "centroid inputs have mixed dimensions");
        order.push_back(&e);
    }
    std::sort(order.begin(), order.end(), byte_less);

    Embedding mean = Embedding::zero(dim);
    for (const auto *e : order) {
        for (std::size_t i = 0; i < dim; ++i) mean.values[i] += e->values[i];
    }
    for (double &x : mean.values) x /= static_cast<double>(order.size());
    return Centroid{normalized(std::move(mean)), embeddings.size()};
}

}  // namespace lpar::embed
