#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mmpm/corpus.hpp"
#include "mmpm/miner.hpp"
#include "mmpm/rational.hpp"
#include "mmpm/text.hpp"

namespace mmpm {

// Unigrams and adjacent bigrams over the stop-filtered token sequence, in
// order, with multiplicity. Bigram constituents join with one space.
std::vector<std::string> caption_grams(const std::vector<std::string>& tokens,
                                       const StopLists& stops);

struct GramStats {
    std::uint64_t occ = 0;         // total occurrences, with multiplicity
    std::uint64_t caption_df = 0;  // captions containing the gram
};

struct NgramStats {
    std::uint64_t caption_count = 0;                   // m_c: every corpus caption
    std::unordered_map<std::string, GramStats> grams;  // only grams with occ >= min_gram_occ

    bool retained(const std::string& gram) const { return grams.count(gram) != 0; }
    double idf(const std::string& gram) const;  // ln((1+m_c)/(1+caption_df)) + 1
};

NgramStats build_ngram_stats(const std::vector<Document>& docs, const StopLists& stops,
                             int min_gram_occ);

struct RankedName {
    std::string gram;
    double score = 0.0;            // Σ tf·idf over the scored captions
    std::uint64_t caption_df = 0;  // corpus-wide, for tie-breaks
};

// Candidate names for a pattern whose text side is text_items, scored over
// an explicit caption list (repeats allowed), best first: score descending,
// caption_df descending, gram ascending. A gram qualifies when at least one
// constituent word maps to a cluster in text_items.
std::vector<RankedName> rank_candidates(const std::vector<const Document*>& captions,
                                        const std::vector<int>& text_items,
                                        const NgramStats& stats, const ClusterModel& model,
                                        const StopLists& stops);

struct PatternName {
    std::string name;
    double score = 0.0;
};

struct NamingOptions {
    bool dedup_captions = true;           // score each member document's caption once
    Rational blacklist_threshold{1, 10};  // strictly-greater caption share drops a name
};

// Resolves p.member_tx to captions through the store, then ranks. No
// blacklist; returns none when nothing scores above zero.
std::optional<PatternName> name_pattern(const Pattern& p, const NgramStats& stats,
                                        const ClusterModel& model,
                                        const std::vector<Document>& docs,
                                        const TransactionStore& store, const StopLists& stops,
                                        const NamingOptions& opts = {});

// Per-event caption shares of every gram, for the blacklist rule.
class EventGramIndex {
public:
    EventGramIndex(const std::vector<Document>& docs, const StopLists& stops);

    std::uint64_t event_caption_count(int event) const;
    std::uint64_t event_gram_df(int event, const std::string& gram) const;
    bool blacklisted(int event, const std::string& gram, const Rational& threshold) const;

private:
    std::vector<std::vector<std::size_t>> docs_by_event_;
    std::vector<std::unordered_set<std::string>> doc_grams_;
};

struct NamingOutcome {
    std::optional<PatternName> name;
    bool top_blacklisted = false;
};

// Blacklisted top name falls back to the runner-up once; a blacklisted
// runner-up leaves the pattern unnamed.
NamingOutcome pick_name(const std::vector<RankedName>& ranked, int event,
                        const EventGramIndex& index, const Rational& threshold);

// Names every pattern in place (name, name_score, name_blacklisted).
void apply_names(std::vector<Pattern>& patterns, const NgramStats& stats,
                 const ClusterModel& model, const std::vector<Document>& docs,
                 const TransactionStore& store, const StopLists& stops,
                 const NamingOptions& opts = {});

}  // namespace mmpm
