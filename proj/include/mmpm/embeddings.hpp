#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace mmpm {

struct EmbeddingTable {
    int dim{0};
    std::unordered_map<std::string, Eigen::VectorXd> entries;

    bool contains(const std::string& word) const { return entries.count(word) != 0; }
    std::size_t size() const { return entries.size(); }
};

struct EmbeddingLoadReport {
    std::vector<std::string> warnings;  // duplicate words, header/count mismatch
};

// word2vec text format: optional "N dim" header line, then one entry per
// line: word followed by dim space-separated decimals. Duplicate words keep
// the last entry (warned); a wrong vector length or a non-finite/all-zero
// vector aborts with the word and line number.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               EmbeddingLoadReport* report = nullptr);

// Writes the header and entries in sorted word order.
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);

}  // namespace mmpm
