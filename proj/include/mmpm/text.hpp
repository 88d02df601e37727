#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "mmpm/corpus.hpp"
#include "mmpm/embeddings.hpp"

namespace mmpm {

// Words excluded from the clustering vocabulary and from pattern naming:
// English function words plus month, weekday, and direction names.
class StopLists {
public:
    StopLists() = default;
    explicit StopLists(const std::vector<std::string>& words);

    static const StopLists& standard();

    bool contains(std::string_view word) const;
    std::size_t size() const { return words_.size(); }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const {
            return std::hash<std::string_view>{}(s);
        }
    };
    std::unordered_set<std::string, Hash, std::equal_to<>> words_;
};

// Caption words that survive the stop lists and appear in at least
// min_caption_df distinct captions. doc_freq is parallel to words.
struct TextVocabulary {
    std::vector<std::string> words;  // sorted ascending
    std::vector<int> doc_freq;

    bool contains(std::string_view word) const;
    std::optional<int> freq_of(std::string_view word) const;
};

TextVocabulary build_vocabulary(const std::vector<Document>& docs, const StopLists& stops,
                                int min_caption_df);

// Word clusters over L2-normalized embeddings. words holds the vocabulary
// words that had embeddings; assign is parallel with values in [0,k).
struct ClusterModel {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> words;  // sorted ascending
    std::vector<int> assign;
    Eigen::MatrixXd centroids;  // k x dim

    // Filled by kmeans_cluster; not serialized.
    std::vector<double> objective_log;     // objective after each assignment pass
    std::vector<std::string> dropped_words;  // vocabulary words without embeddings

    std::optional<int> cluster_of(std::string_view word) const;
};

ClusterModel kmeans_cluster(const TextVocabulary& vocab, const EmbeddingTable& emb, int k,
                            std::uint64_t seed, int max_iters = 100);

// Sorted, deduplicated cluster ids of the document's caption words.
struct TextItemset {
    std::string doc_id;
    std::vector<int> items;
};

TextItemset caption_to_itemset(const Document& doc, const ClusterModel& model);

void save_cluster_model(const ClusterModel& model, const std::string& path);
ClusterModel load_cluster_model(const std::string& path);

}  // namespace mmpm
