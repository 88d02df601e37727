#include "mmpm/namer.hpp"

#include <algorithm>
#include <cmath>

#include "mmpm/errors.hpp"

namespace mmpm {

std::vector<std::string> caption_grams(const std::vector<std::string>& tokens,
                                       const StopLists& stops) {
    std::vector<const std::string*> kept;
    for (const std::string& t : tokens)
        if (!stops.contains(t)) kept.push_back(&t);

    std::vector<std::string> grams;
    grams.reserve(kept.size() * 2);
    for (const std::string* t : kept) grams.push_back(*t);
    for (std::size_t i = 0; i + 1 < kept.size(); ++i) grams.push_back(*kept[i] + " " + *kept[i + 1]);
    return grams;
}

double NgramStats::idf(const std::string& gram) const {
    auto it = grams.find(gram);
    if (it == grams.end()) throw DataError("gram '" + gram + "' is not retained in the statistics");
    return std::log((1.0 + static_cast<double>(caption_count)) /
                    (1.0 + static_cast<double>(it->second.caption_df))) +
           1.0;
}

NgramStats build_ngram_stats(const std::vector<Document>& docs, const StopLists& stops,
                             int min_gram_occ) {
    if (min_gram_occ < 1)
        throw ConfigError("min_gram_occ must be >= 1, got " + std::to_string(min_gram_occ));

    NgramStats stats;
    stats.caption_count = docs.size();
    std::unordered_set<std::string_view> in_caption;
    for (const Document& doc : docs) {
        const std::vector<std::string> grams = caption_grams(doc.tokens, stops);
        in_caption.clear();
        for (const std::string& g : grams) {
            auto [it, inserted] = stats.grams.try_emplace(g);
            ++it->second.occ;
            if (in_caption.insert(it->first).second) ++it->second.caption_df;
        }
    }
    for (auto it = stats.grams.begin(); it != stats.grams.end();) {
        if (it->second.occ < static_cast<std::uint64_t>(min_gram_occ))
            it = stats.grams.erase(it);
        else
            ++it;
    }
    return stats;
}

namespace {

bool gram_indicated(const std::string& gram, const std::vector<int>& text_items,
                    const ClusterModel& model) {
    const auto word_hits = [&](std::string_view word) {
        const auto c = model.cluster_of(word);
        return c && std::binary_search(text_items.begin(), text_items.end(), *c);
    };
    const std::size_t space = gram.find(' ');
    if (space == std::string::npos) return word_hits(gram);
    return word_hits(std::string_view(gram).substr(0, space)) ||
           word_hits(std::string_view(gram).substr(space + 1));
}

}  // namespace

std::vector<RankedName> rank_candidates(const std::vector<const Document*>& captions,
                                        const std::vector<int>& text_items,
                                        const NgramStats& stats, const ClusterModel& model,
                                        const StopLists& stops) {
    std::unordered_map<std::string, double> scores;
    std::unordered_map<std::string, std::uint64_t> tf;
    for (const Document* doc : captions) {
        tf.clear();
        for (std::string& g : caption_grams(doc->tokens, stops)) ++tf[std::move(g)];
        for (const auto& [gram, count] : tf) {
            if (!stats.retained(gram)) continue;
            if (!gram_indicated(gram, text_items, model)) continue;
            scores[gram] += static_cast<double>(count) * stats.idf(gram);
        }
    }

    std::vector<RankedName> ranked;
    ranked.reserve(scores.size());
    for (const auto& [gram, score] : scores)
        ranked.push_back({gram, score, stats.grams.at(gram).caption_df});
    std::sort(ranked.begin(), ranked.end(), [](const RankedName& a, const RankedName& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.caption_df != b.caption_df) return a.caption_df > b.caption_df;
        return a.gram < b.gram;
    });
    return ranked;
}

namespace {

// Member captions in first-appearance order, optionally one per document.
std::vector<const Document*> member_captions(const Pattern& p, const std::vector<Document>& docs,
                                             const TransactionStore& store, bool dedup) {
    std::unordered_map<std::uint64_t, const std::string*> tx_doc;
    tx_doc.reserve(store.size());
    for (const Transaction& tx : store.transactions) tx_doc.emplace(tx.tx_id, &tx.doc_id);
    std::unordered_map<std::string_view, const Document*> by_id;
    by_id.reserve(docs.size());
    for (const Document& d : docs) by_id.emplace(d.doc_id, &d);

    std::vector<const Document*> out;
    std::unordered_set<const Document*> seen;
    for (std::uint64_t tx_id : p.member_tx) {
        auto t = tx_doc.find(tx_id);
        if (t == tx_doc.end())
            throw DataError("pattern member transaction " + std::to_string(tx_id) +
                            " is not in the store");
        auto d = by_id.find(*t->second);
        if (d == by_id.end())
            throw DataError("pattern member document '" + *t->second + "' is not in the corpus");
        if (dedup && !seen.insert(d->second).second) continue;
        out.push_back(d->second);
    }
    return out;
}

}  // namespace

std::optional<PatternName> name_pattern(const Pattern& p, const NgramStats& stats,
                                        const ClusterModel& model,
                                        const std::vector<Document>& docs,
                                        const TransactionStore& store, const StopLists& stops,
                                        const NamingOptions& opts) {
    const auto captions = member_captions(p, docs, store, opts.dedup_captions);
    const auto ranked = rank_candidates(captions, p.text_items, stats, model, stops);
    if (ranked.empty() || ranked.front().score <= 0.0) return std::nullopt;
    return PatternName{ranked.front().gram, ranked.front().score};
}

EventGramIndex::EventGramIndex(const std::vector<Document>& docs, const StopLists& stops) {
    int max_event = -1;
    for (const Document& d : docs)
        for (int e : d.events) max_event = std::max(max_event, e);
    docs_by_event_.resize(static_cast<std::size_t>(max_event + 1));

    doc_grams_.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto grams = caption_grams(docs[i].tokens, stops);
        doc_grams_.emplace_back(grams.begin(), grams.end());
        for (int e : docs[i].events) docs_by_event_[static_cast<std::size_t>(e)].push_back(i);
    }
}

std::uint64_t EventGramIndex::event_caption_count(int event) const {
    if (event < 0 || static_cast<std::size_t>(event) >= docs_by_event_.size()) return 0;
    return docs_by_event_[static_cast<std::size_t>(event)].size();
}

std::uint64_t EventGramIndex::event_gram_df(int event, const std::string& gram) const {
    if (event < 0 || static_cast<std::size_t>(event) >= docs_by_event_.size()) return 0;
    std::uint64_t n = 0;
    for (std::size_t doc : docs_by_event_[static_cast<std::size_t>(event)])
        if (doc_grams_[doc].count(gram) != 0) ++n;
    return n;
}

bool EventGramIndex::blacklisted(int event, const std::string& gram,
                                 const Rational& threshold) const {
    const std::uint64_t total = event_caption_count(event);
    if (total == 0) return false;
    return ratio_gt(event_gram_df(event, gram), total, threshold);
}

NamingOutcome pick_name(const std::vector<RankedName>& ranked, int event,
                        const EventGramIndex& index, const Rational& threshold) {
    NamingOutcome outcome;
    if (ranked.empty()) return outcome;
    if (!index.blacklisted(event, ranked[0].gram, threshold)) {
        outcome.name = PatternName{ranked[0].gram, ranked[0].score};
        return outcome;
    }
    outcome.top_blacklisted = true;
    if (ranked.size() > 1 && !index.blacklisted(event, ranked[1].gram, threshold))
        outcome.name = PatternName{ranked[1].gram, ranked[1].score};
    return outcome;
}

void apply_names(std::vector<Pattern>& patterns, const NgramStats& stats,
                 const ClusterModel& model, const std::vector<Document>& docs,
                 const TransactionStore& store, const StopLists& stops,
                 const NamingOptions& opts) {
    const EventGramIndex index(docs, stops);
    for (Pattern& p : patterns) {
        const auto captions = member_captions(p, docs, store, opts.dedup_captions);
        const auto ranked = rank_candidates(captions, p.text_items, stats, model, stops);
        const NamingOutcome outcome = pick_name(ranked, p.event, index, opts.blacklist_threshold);
        p.name_blacklisted = outcome.top_blacklisted;
        if (outcome.name) {
            p.name = outcome.name->name;
            p.name_score = outcome.name->score;
        } else {
            p.name.reset();
            p.name_score = 0.0;
        }
    }
}

}  // namespace mmpm
