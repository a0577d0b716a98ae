#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tideh/model.hpp"

namespace tideh {

// Text format: one event per line, "time_offset_seconds follower_count",
// first line the origin at offset 0. A corpus is a directory holding
// <id>.txt files plus an index file listing the ids in order.

inline constexpr const char* kCorpusIndex = "index.txt";

/// Parses a cascade. Rows out of time order are sorted (stable) and reported
/// through `warnings` when given.
[[nodiscard]] Cascade parse_cascade(std::istream& in, const std::string& id,
                                    std::vector<std::string>* warnings = nullptr);
void write_cascade(std::ostream& out, const Cascade& c);

/// The id is the file name without extension.
[[nodiscard]] Cascade load_cascade(const std::filesystem::path& path,
                                   std::vector<std::string>* warnings = nullptr);
void save_cascade(const Cascade& c, const std::filesystem::path& path);

[[nodiscard]] std::vector<Cascade> load_corpus(const std::filesystem::path& dir,
                                               std::vector<std::string>* warnings = nullptr);
void save_corpus(const std::vector<Cascade>& cascades, const std::filesystem::path& dir);

} // namespace tideh
