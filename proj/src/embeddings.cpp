#include "storylens/embeddings.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace storylens {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool wanted(const std::string& term, const std::set<std::string>* filter) {
    if (filter == nullptr) return true;
    return filter->count(term) > 0 || filter->count(lowercase(term)) > 0;
}

float read_f32_le(const unsigned char* p) {
    std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                         (static_cast<std::uint32_t>(p[1]) << 8) |
                         (static_cast<std::uint32_t>(p[2]) << 16) |
                         (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

void write_f32_le(std::ostream& out, float v) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    const unsigned char bytes[4] = {
        static_cast<unsigned char>(bits & 0xff), static_cast<unsigned char>((bits >> 8) & 0xff),
        static_cast<unsigned char>((bits >> 16) & 0xff),
        static_cast<unsigned char>((bits >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

// Sniffs binary vs text: after the header line, a text file's entries are
// printable rows, a binary file carries raw float bytes. We decide by
// attempting to parse the second line as "term num num ..." of the right
// arity.
bool looks_like_text(std::istream& in, std::size_t dim) {
    std::string second;
    if (!std::getline(in, second)) return true;  // header-only file
    std::istringstream ss(second);
    std::string term;
    if (!(ss >> term)) return false;
    std::size_t count = 0;
    double value;
    while (ss >> value) ++count;
    return count == dim && ss.eof();
}

}  // namespace

bool EmbeddingStore::add(std::string term, std::span<const float> vector) {
    if (vector.size() != dim_)
        throw std::invalid_argument("vector dimension mismatch for term: " + term);
    auto [it, inserted] = index_.try_emplace(std::move(term), index_.size());
    if (!inserted) return false;
    storage_.insert(storage_.end(), vector.begin(), vector.end());
    return true;
}

std::optional<std::span<const float>> EmbeddingStore::find(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) {
        const std::string lower = lowercase(term);
        it = index_.find(lower);
        if (it == index_.end()) return std::nullopt;
    }
    return std::span<const float>(storage_.data() + it->second * dim_, dim_);
}

EmbeddingStore load_embeddings(const std::string& path, Report& report,
                               const std::set<std::string>* vocabulary_filter) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path);

    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error(path + ": missing \"vocab_size dim\" header");
    std::istringstream hs(header);
    std::size_t vocab_size = 0, dim = 0;
    if (!(hs >> vocab_size >> dim) || dim == 0)
        throw std::runtime_error(path + ": malformed header \"" + header + "\"");

    const std::streampos body_start = in.tellg();
    const bool text_mode = looks_like_text(in, dim);
    in.clear();
    in.seekg(body_start);

    EmbeddingStore store(dim);
    std::size_t n_duplicates = 0;
    std::vector<float> row(dim);

    if (text_mode) {
        std::string line;
        std::size_t line_no = 1;  // the header
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::string term;
            ss >> term;
            std::size_t count = 0;
            double value;
            while (count < dim && ss >> value) row[count++] = static_cast<float>(value);
            double extra;
            if (count != dim || (ss >> extra))
                throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                         ": expected " + std::to_string(dim) +
                                         " values for term \"" + term + "\"");
            if (!wanted(term, vocabulary_filter)) continue;
            if (!store.add(term, row)) ++n_duplicates;
        }
    } else {
        std::vector<unsigned char> bytes(dim * 4);
        for (std::size_t entry = 0; entry < vocab_size; ++entry) {
            int c = in.get();
            while (c == '\n' || c == ' ') c = in.get();  // entry separators
            if (c == EOF) {
                if (entry < vocab_size)
                    report.warn(0, path + ": header promised " + std::to_string(vocab_size) +
                                       " entries, found " + std::to_string(entry));
                break;
            }
            std::string term;
            while (c != ' ' && c != EOF) {
                term.push_back(static_cast<char>(c));
                c = in.get();
            }
            if (c == EOF) throw std::runtime_error(path + ": truncated entry for \"" + term + "\"");
            in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
            if (static_cast<std::size_t>(in.gcount()) != bytes.size())
                throw std::runtime_error(path + ": truncated vector for term \"" + term + "\"");
            for (std::size_t k = 0; k < dim; ++k) row[k] = read_f32_le(bytes.data() + 4 * k);
            if (!wanted(term, vocabulary_filter)) continue;
            if (!store.add(term, row)) ++n_duplicates;
        }
    }
    if (n_duplicates > 0)
        report.warn(0, path + ": " + std::to_string(n_duplicates) +
                           " duplicate term(s), first occurrence kept");
    return store;
}

void save_embeddings_text(const EmbeddingStore& store, const std::vector<std::string>& term_order,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write embedding file: " + path);
    out << term_order.size() << " " << store.dim() << "\n";
    char buf[64];
    for (const auto& term : term_order) {
        auto vec = store.find(term);
        if (!vec) throw std::runtime_error("term missing from store: " + term);
        out << term;
        for (float v : *vec) {
            std::snprintf(buf, sizeof buf, " %.6g", static_cast<double>(v));
            out << buf;
        }
        out << "\n";
    }
}

void save_embeddings_binary(const EmbeddingStore& store,
                            const std::vector<std::string>& term_order, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write embedding file: " + path);
    out << term_order.size() << " " << store.dim() << "\n";
    for (const auto& term : term_order) {
        auto vec = store.find(term);
        if (!vec) throw std::runtime_error("term missing from store: " + term);
        out << term << ' ';
        for (float v : *vec) write_f32_le(out, v);
        out << '\n';
    }
}

namespace {

template <typename U, typename V>
std::optional<double> cosine_impl(U u, V v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = static_cast<double>(u[i]);
        const double b = static_cast<double>(v[i]);
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if (nu == 0.0 || nv == 0.0) return std::nullopt;
    return std::clamp(dot / std::sqrt(nu * nv), -1.0, 1.0);
}

}  // namespace

std::optional<double> cosine(std::span<const float> u, std::span<const float> v) {
    return cosine_impl(u, v);
}
std::optional<double> cosine(std::span<const double> u, std::span<const double> v) {
    return cosine_impl(u, v);
}
std::optional<double> cosine(std::span<const float> u, std::span<const double> v) {
    return cosine_impl(u, v);
}

}  // namespace storylens
