#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace storylens {

struct Diagnostic {
    std::size_t line = 0;  // 1-based input line, 0 when not line-addressable
    std::string message;
};

// Collects non-fatal issues from loaders. Fatal conditions throw instead.
struct Report {
    std::vector<Diagnostic> errors;    // records rejected
    std::vector<Diagnostic> warnings;  // records kept or skipped benignly

    void error(std::size_t line, std::string msg) { errors.push_back({line, std::move(msg)}); }
    void warn(std::size_t line, std::string msg) { warnings.push_back({line, std::move(msg)}); }
    bool clean() const { return errors.empty() && warnings.empty(); }
    std::string summary() const;
};

}  // namespace storylens
