#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmpm/rational.hpp"
#include "mmpm/transactions.hpp"

namespace mmpm {

struct MiningConfig {
    Rational c_min{4, 5};
    std::uint64_t min_support_count = 30;
    int max_itemset_len = 6;  // bound on |antecedent ∪ {event}|
    ItemSpace space;
    // Count distinct documents instead of patch transactions when testing
    // thresholds (off: one transaction = one patch).
    bool support_per_document = false;

    void validate() const;
};

struct Pattern {
    std::vector<int> visual_items;  // filter ids, sorted
    std::vector<int> text_items;    // cluster ids, sorted
    int event = 0;
    std::uint64_t support_count = 0;       // of antecedent ∪ {event}
    std::uint64_t antecedent_support = 0;  // of the antecedent alone
    double confidence = 0.0;
    std::vector<std::uint64_t> member_tx;  // transactions containing antecedent ∪ {event}
    std::optional<std::string> name;       // filled by the namer
    double name_score = 0.0;
    bool name_blacklisted = false;
};

// Fraction of transactions containing the itemset (items need not be
// sorted). Errors on an empty store.
double support(const std::vector<int>& itemset, const TransactionStore& store);

// support(antecedent ∪ {event_item}) / support(antecedent), as a count
// ratio. Errors when the antecedent never occurs.
double confidence(const std::vector<int>& antecedent, int event_item,
                  const TransactionStore& store);

struct CountedItemset {
    std::vector<int> items;  // sorted encoded item ids
    std::uint64_t count = 0;
};

// Level-wise frequent itemsets (index 0 = single items), restricted to
// itemsets with at most one event item; exposed so tests can check
// downward closure. Counts follow cfg.support_per_document.
std::vector<std::vector<CountedItemset>> frequent_itemsets(const TransactionStore& store,
                                                           const MiningConfig& cfg);

// Apriori rule mining: every antecedent → event rule passing the support,
// confidence, multimodality, and length constraints, sorted by (event,
// support descending, antecedent lexicographic).
std::vector<Pattern> mine(const TransactionStore& store, const MiningConfig& cfg);

// Exhaustive re-derivation over stores with at most 20 distinct items;
// differential oracle for mine. Identical output contract.
std::vector<Pattern> brute_force_mine(const TransactionStore& store, const MiningConfig& cfg);

// Keeps patterns whose (visual ∪ text ∪ event) itemset is not a strict
// subset of another kept pattern's itemset.
std::vector<Pattern> filter_maximal(const std::vector<Pattern>& patterns);

void save_patterns(const std::filesystem::path& path, const std::vector<Pattern>& patterns);
std::vector<Pattern> load_patterns(const std::filesystem::path& path);

}  // namespace mmpm
