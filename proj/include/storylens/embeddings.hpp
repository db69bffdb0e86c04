#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "storylens/report.hpp"

namespace storylens {

// Immutable store of word vectors. Lookup tries the exact surface first and
// falls back to the lowercased form; out-of-vocabulary terms return nullopt,
// never a default vector.
class EmbeddingStore {
public:
    EmbeddingStore() = default;
    EmbeddingStore(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return index_.size(); }

    // First insertion wins; returns false on duplicate term.
    bool add(std::string term, std::span<const float> vector);

    std::optional<std::span<const float>> find(std::string_view term) const;
    bool contains(std::string_view term) const { return find(term).has_value(); }

private:
    std::size_t dim_ = 0;
    std::vector<float> storage_;
    std::unordered_map<std::string, std::size_t> index_;  // term -> row
};

// Text format: header "vocab_size dim", then "term v1 ... vdim" per line.
// Binary format: the same text header line, then per entry the term bytes,
// one 0x20 separator, dim little-endian float32, and an optional '\n'.
// A dimension mismatch mid-file is fatal; duplicate terms keep the first
// occurrence with a counted warning. With a filter, only terms whose exact
// or lowercased form appears in it are retained.
EmbeddingStore load_embeddings(const std::string& path, Report& report,
                               const std::set<std::string>* vocabulary_filter = nullptr);

void save_embeddings_text(const EmbeddingStore& store,
                          const std::vector<std::string>& term_order, const std::string& path);
void save_embeddings_binary(const EmbeddingStore& store,
                            const std::vector<std::string>& term_order, const std::string& path);

// Standard cosine, clamped to [-1,1] against rounding; nullopt when either
// vector is all-zero.
std::optional<double> cosine(std::span<const float> u, std::span<const float> v);
std::optional<double> cosine(std::span<const double> u, std::span<const double> v);
std::optional<double> cosine(std::span<const float> u, std::span<const double> v);

}  // namespace storylens
