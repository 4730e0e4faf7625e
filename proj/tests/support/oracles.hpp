#pragma once

// Independent re-implementations used as test oracles. Nothing here calls
// into the library's algorithms; only plain data types are shared.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lpar/common/types.hpp"

namespace oracle {

inline std::vector<std::string> words(const std::string &text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        char l = static_cast<char>(std::tolower(c));
        if ((l >= 'a' && l <= 'z') || (l >= '0' && l <= '9')) {
            cur.push_back(l);
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline std::uint64_t fnv(const std::string &s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::vector<double> unit(std::vector<double> v) {
    double n = 0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n == 0) return v;
    for (double &x : v) x /= n;
    return v;
}

inline std::vector<double> embed(const std::string &text) {
    std::vector<double> v(64, 0.0);
    for (const auto &w : words(text)) {
        const auto h = fnv(w);
        v[(h >> 1) % 64] += (h & 1) ? -1.0 : 1.0;
    }
    return unit(v);
}

inline double cosine(const std::vector<double> &a, const std::vector<double> &b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::vector<double> centroid(const std::vector<std::string> &utterances) {
    std::vector<double> sum(64, 0.0);
    for (const auto &u : utterances) {
        const auto e = embed(u);
        for (std::size_t i = 0; i < 64; ++i) sum[i] += e[i];
    }
    if (!utterances.empty()) {
        for (double &x : sum) x /= static_cast<double>(utterances.size());
    }
    return unit(sum);
}

struct Ranked {
    std::string id;
    double similarity;
};

// Exhaustive ranking: every node scored, sorted, filtered, truncated.
inline std::vector<Ranked> rank(const std::map<std::string, std::vector<double>> &centroids,
                                const std::vector<double> &query, std::size_t k, double floor) {
    std::vector<Ranked> all;
    for (const auto &[id, c] : centroids) all.push_back({id, cosine(query, c)});
    std::vector<Ranked> kept;
    for (const auto &r : all) {
        if (r.similarity >= floor) kept.push_back(r);
    }
    // Selection sort keeps the oracle obviously correct.
    std::vector<Ranked> out;
    while (!kept.empty() && out.size() < k) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < kept.size(); ++i) {
            if (kept[i].similarity > kept[best].similarity ||
                (kept[i].similarity == kept[best].similarity && kept[i].id < kept[best].id)) {
                best = i;
            }
        }
        out.push_back(kept[best]);
        kept.erase(kept.begin() + static_cast<long>(best));
    }
    return out;
}

inline int rating_rank(lpar::Rating r) {
    switch (r) {
    case lpar::Rating::Beginner: return 0;
    case lpar::Rating::Intermediate: return 1;
    case lpar::Rating::Professional: return 2;
    case lpar::Rating::Expert: return 3;
    }
    return 0;
}

inline double weight(lpar::Rating r) { return 0.25 * (rating_rank(r) + 1); }

struct Candidate {
    std::string id;  // the agent whose rating and id count
    double confidence;
    double latency;
    lpar::Rating rating;
};

// "a strictly preferred to b" under the tie chain rating, latency, id.
inline bool ahead_on_ties(const Candidate &a, const Candidate &b) {
    if (rating_rank(a.rating) != rating_rank(b.rating)) return rating_rank(a.rating) > rating_rank(b.rating);
    if (a.latency != b.latency) return a.latency < b.latency;
    return a.id < b.id;
}

// Brute force: the winner is the candidate no other candidate beats.
inline std::optional<std::string> winner(lpar::PolicyId policy, const std::vector<Candidate> &cands) {
    if (cands.empty()) return std::nullopt;
    auto score = [&](const Candidate &c) {
        return policy == lpar::PolicyId::rating_weighted ? c.confidence * weight(c.rating) : c.confidence;
    };
    auto beats_p1 = [&](const Candidate &a, const Candidate &b) {
        if (score(a) != score(b)) return score(a) > score(b);
        return ahead_on_ties(a, b);
    };

    std::vector<Candidate> pool = cands;
    if (policy == lpar::PolicyId::fastest_eligible) {
        std::vector<Candidate> eligible;
        for (const auto &c : cands) {
            if (c.confidence >= 0.5) eligible.push_back(c);
        }
        if (eligible.empty()) return winner(lpar::PolicyId::highest_confidence, cands);
        for (const auto &c : eligible) {
            bool unbeaten = true;
            for (const auto &d : eligible) {
                if (&c == &d) continue;
                const bool d_first = d.latency < c.latency || (d.latency == c.latency && beats_p1(d, c));
                if (d_first) unbeaten = false;
            }
            if (unbeaten) return c.id;
        }
        return std::nullopt;
    }
    for (const auto &c : pool) {
        bool unbeaten = true;
        for (const auto &d : pool) {
            if (&c != &d && beats_p1(d, c)) unbeaten = false;
        }
        if (unbeaten) return c.id;
    }
    return std::nullopt;
}

// Rating band over a list of scores.
inline lpar::Rating band(const std::vector<int> &scores) {
    if (scores.size() < 3) return lpar::Rating::Beginner;
    double sum = 0;
    for (int s : scores) sum += s;
    const double mean = sum / static_cast<double>(scores.size());
    if (mean < 2) return lpar::Rating::Beginner;
    if (mean < 3) return lpar::Rating::Intermediate;
    if (mean < 4) return lpar::Rating::Professional;
    return lpar::Rating::Expert;
}

inline bool luhn(const std::string &digits) {
    int sum = 0;
    bool dbl = false;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (*it < '0' || *it > '9') continue;
        int d = *it - '0';
        if (dbl) {
            d *= 2;
            if (d > 9) d -= 9;
        }
        sum += d;
        dbl = !dbl;
    }
    return sum % 10 == 0;
}

}  // namespace oracle
