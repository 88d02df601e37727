#include "mmpm/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mmpm/errors.hpp"
#include "mmpm/rng.hpp"

namespace mmpm {

using nlohmann::json;

StopLists::StopLists(const std::vector<std::string>& words) {
    words_.insert(words.begin(), words.end());
}

const StopLists& StopLists::standard() {
    static const StopLists lists(std::vector<std::string>{
        // function words (tokenization splits contractions, hence s/t/ll/re/ve)
        "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any",
        "are", "as", "at", "be", "because", "been", "before", "being", "below", "between",
        "both", "but", "by", "can", "cannot", "could", "d", "did", "do", "does", "doing",
        "down", "during", "each", "few", "for", "from", "further", "had", "has", "have",
        "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "i",
        "if", "in", "into", "is", "it", "its", "itself", "just", "ll", "m", "me", "more",
        "most", "my", "myself", "no", "nor", "not", "now", "o", "of", "off", "on", "once",
        "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "re", "s",
        "same", "she", "should", "so", "some", "such", "t", "than", "that", "the", "their",
        "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those",
        "through", "to", "too", "under", "until", "up", "ve", "very", "was", "we", "were",
        "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with",
        "would", "y", "you", "your", "yours", "yourself", "yourselves",
        // months
        "january", "february", "march", "april", "may", "june", "july", "august", "september",
        "october", "november", "december",
        // weekdays
        "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday",
        // directions
        "left", "right"});
    return lists;
}

bool StopLists::contains(std::string_view word) const {
    return words_.find(word) != words_.end();
}

namespace {

// Binary search over a sorted word list; returns the index or -1.
int sorted_index_of(const std::vector<std::string>& words, std::string_view word) {
    auto it = std::lower_bound(words.begin(), words.end(), word,
                               [](const std::string& a, std::string_view b) { return a < b; });
    if (it == words.end() || *it != word) return -1;
    return static_cast<int>(it - words.begin());
}

}  // namespace

bool TextVocabulary::contains(std::string_view word) const {
    return sorted_index_of(words, word) >= 0;
}

std::optional<int> TextVocabulary::freq_of(std::string_view word) const {
    const int i = sorted_index_of(words, word);
    if (i < 0) return std::nullopt;
    return doc_freq[static_cast<std::size_t>(i)];
}

TextVocabulary build_vocabulary(const std::vector<Document>& docs, const StopLists& stops,
                                int min_caption_df) {
    if (min_caption_df < 1)
        throw ConfigError("min_caption_df must be >= 1, got " + std::to_string(min_caption_df));

    std::unordered_map<std::string, int> df;
    std::unordered_set<std::string_view> seen;
    for (const Document& doc : docs) {
        seen.clear();
        for (const std::string& tok : doc.tokens) {
            if (stops.contains(tok)) continue;
            if (seen.insert(tok).second) ++df[tok];
        }
    }

    TextVocabulary vocab;
    for (const auto& [word, n] : df)
        if (n >= min_caption_df) vocab.words.push_back(word);
    std::sort(vocab.words.begin(), vocab.words.end());
    vocab.doc_freq.reserve(vocab.words.size());
    for (const std::string& w : vocab.words) vocab.doc_freq.push_back(df.at(w));

    if (vocab.words.empty())
        throw ConfigError("empty vocabulary: over " + std::to_string(docs.size()) +
                          " captions no word outside the stop lists reaches min_caption_df=" +
                          std::to_string(min_caption_df));
    return vocab;
}

std::optional<int> ClusterModel::cluster_of(std::string_view word) const {
    const int i = sorted_index_of(words, word);
    if (i < 0) return std::nullopt;
    return assign[static_cast<std::size_t>(i)];
}

namespace {

// Squared distances from every point to one centroid, scalar order.
double sq_dist(const Eigen::MatrixXd& points, int i, const Eigen::MatrixXd& centroids, int j) {
    return (points.row(i) - centroids.row(j)).squaredNorm();
}

Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& points, int k, Rng& rng) {
    const int n = static_cast<int>(points.rows());
    Eigen::MatrixXd centroids(k, points.cols());
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);

    int first = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    centroids.row(0) = points.row(first);
    chosen[static_cast<std::size_t>(first)] = 1;

    std::vector<double> d2(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = sq_dist(points, i, centroids, 0);

    for (int j = 1; j < k; ++j) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += d2[static_cast<std::size_t>(i)];

        int pick = -1;
        if (total > 0.0) {
            const double r = rng.next_double() * total;
            double cum = 0.0;
            for (int i = 0; i < n; ++i) {
                const double w = d2[static_cast<std::size_t>(i)];
                if (w <= 0.0) continue;
                cum += w;
                if (cum > r) {
                    pick = i;
                    break;
                }
                pick = i;  // fall back to the last positive-weight point
            }
        } else {
            // all remaining points coincide with existing centroids
            for (int i = 0; i < n && pick < 0; ++i)
                if (!chosen[static_cast<std::size_t>(i)]) pick = i;
            if (pick < 0) pick = 0;
        }

        centroids.row(j) = points.row(pick);
        chosen[static_cast<std::size_t>(pick)] = 1;
        for (int i = 0; i < n; ++i) {
            const double d = sq_dist(points, i, centroids, j);
            if (d < d2[static_cast<std::size_t>(i)]) d2[static_cast<std::size_t>(i)] = d;
        }
    }
    return centroids;
}

}  // namespace

ClusterModel kmeans_cluster(const TextVocabulary& vocab, const EmbeddingTable& emb, int k,
                            std::uint64_t seed, int max_iters) {
    if (k < 1) throw ConfigError("cluster count must be >= 1, got " + std::to_string(k));
    if (max_iters < 1)
        throw ConfigError("kmeans max_iters must be >= 1, got " + std::to_string(max_iters));
    if (emb.dim < 1) throw ConfigError("embedding table has no dimension");

    ClusterModel model;
    model.k = k;
    model.seed = seed;
    for (const std::string& w : vocab.words) {
        if (emb.contains(w))
            model.words.push_back(w);
        else
            model.dropped_words.push_back(w);
    }

    const int n = static_cast<int>(model.words.size());
    if (n < k)
        throw ConfigError("k-means needs at least k=" + std::to_string(k) +
                          " embedded words but only " + std::to_string(n) + " of " +
                          std::to_string(vocab.words.size()) + " vocabulary words have embeddings");

    Eigen::MatrixXd points(n, emb.dim);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd& v = emb.entries.at(model.words[static_cast<std::size_t>(i)]);
        points.row(i) = v.transpose() / v.norm();
    }

    Rng rng(seed);
    Eigen::MatrixXd centroids = seed_centroids(points, k, rng);

    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    std::vector<int> prev(static_cast<std::size_t>(n), -1);
    std::vector<double> dist(static_cast<std::size_t>(n), 0.0);

    for (int iter = 0; iter < max_iters; ++iter) {
        double objective = 0.0;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(points, i, centroids, 0);
            for (int j = 1; j < k; ++j) {
                const double d = sq_dist(points, i, centroids, j);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            assign[static_cast<std::size_t>(i)] = best;
            dist[static_cast<std::size_t>(i)] = best_d;
            objective += best_d;
        }
        model.objective_log.push_back(objective);
        if (assign == prev) break;

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int i = 0; i < n; ++i) {
            sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
            ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
        }
        for (int j = 0; j < k; ++j)
            if (counts[static_cast<std::size_t>(j)] > 0)
                centroids.row(j) = sums.row(j) / counts[static_cast<std::size_t>(j)];
        // Re-seed empty clusters with the point farthest from its centroid.
        for (int j = 0; j < k; ++j) {
            if (counts[static_cast<std::size_t>(j)] > 0) continue;
            int far = 0;
            for (int i = 1; i < n; ++i)
                if (dist[static_cast<std::size_t>(i)] > dist[static_cast<std::size_t>(far)])
                    far = i;
            centroids.row(j) = points.row(far);
            assign[static_cast<std::size_t>(far)] = j;
            dist[static_cast<std::size_t>(far)] = 0.0;
        }
        prev = assign;
    }

    model.assign = std::move(assign);
    model.centroids = std::move(centroids);
    return model;
}

TextItemset caption_to_itemset(const Document& doc, const ClusterModel& model) {
    TextItemset out;
    out.doc_id = doc.doc_id;
    for (const std::string& tok : doc.tokens) {
        if (auto c = model.cluster_of(tok)) out.items.push_back(*c);
    }
    std::sort(out.items.begin(), out.items.end());
    out.items.erase(std::unique(out.items.begin(), out.items.end()), out.items.end());
    return out;
}

void save_cluster_model(const ClusterModel& model, const std::string& path) {
    json centroids = json::array();
    for (Eigen::Index j = 0; j < model.centroids.rows(); ++j) {
        json row = json::array();
        for (Eigen::Index c = 0; c < model.centroids.cols(); ++c)
            row.push_back(model.centroids(j, c));
        centroids.push_back(std::move(row));
    }
    json j{{"k", model.k},
           {"seed", model.seed},
           {"words", model.words},
           {"assign", model.assign},
           {"centroids", std::move(centroids)}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write cluster model '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw DataError("failed writing cluster model '" + path + "'");
}

ClusterModel load_cluster_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open cluster model '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("cluster model '" + path + "': " + e.what());
    }

    ClusterModel model;
    try {
        model.k = j.at("k").get<int>();
        model.seed = j.at("seed").get<std::uint64_t>();
        model.words = j.at("words").get<std::vector<std::string>>();
        model.assign = j.at("assign").get<std::vector<int>>();
        const json& cents = j.at("centroids");
        const Eigen::Index rows = static_cast<Eigen::Index>(cents.size());
        const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(cents.at(0).size()) : 0;
        model.centroids.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const json& row = cents.at(static_cast<std::size_t>(r));
            if (static_cast<Eigen::Index>(row.size()) != cols)
                throw DataError("cluster model '" + path + "': ragged centroid rows");
            for (Eigen::Index c = 0; c < cols; ++c)
                model.centroids(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    } catch (const json::exception& e) {
        throw DataError("cluster model '" + path + "': " + e.what());
    }

    if (model.k < 1) throw DataError("cluster model '" + path + "': k must be >= 1");
    if (model.words.size() != model.assign.size())
        throw DataError("cluster model '" + path + "': words and assign lengths differ");
    if (!std::is_sorted(model.words.begin(), model.words.end()))
        throw DataError("cluster model '" + path + "': words must be sorted");
    if (model.centroids.rows() != model.k)
        throw DataError("cluster model '" + path + "': expected " + std::to_string(model.k) +
                        " centroids, got " + std::to_string(model.centroids.rows()));
    for (int a : model.assign)
        if (a < 0 || a >= model.k)
            throw DataError("cluster model '" + path + "': assignment " + std::to_string(a) +
                            " outside [0," + std::to_string(model.k) + ")");
    if (!model.centroids.allFinite())
        throw DataError("cluster model '" + path + "': centroids must be finite");
    return model;
}

}  // namespace mmpm
