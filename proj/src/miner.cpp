#include "mmpm/miner.hpp"

#include <algorithm>
#include <fstream>
#include <string_view>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mmpm/errors.hpp"

namespace mmpm {

using nlohmann::json;

void MiningConfig::validate() const {
    if (c_min.num == 0 || c_min.num > c_min.den)
        throw ConfigError("c_min must be in (0,1], got " + c_min.str());
    if (min_support_count < 1) throw ConfigError("min_support_count must be >= 1");
    if (max_itemset_len < 3)
        throw ConfigError("max_itemset_len must be >= 3 (one visual, one text, one event), got " +
                          std::to_string(max_itemset_len));
    space.validate();
}

namespace {

// Frequent itemset with the store indices of its supporting transactions.
struct Node {
    std::vector<int> items;  // sorted encoded ids
    std::vector<std::uint32_t> tids;
    std::uint64_t count = 0;
};

bool items_less(const Node& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.items.begin(), a.items.end(), b.begin(), b.end());
}

const Node* find_node(const std::vector<Node>& level, const std::vector<int>& items) {
    auto it = std::lower_bound(level.begin(), level.end(), items, items_less);
    if (it == level.end() || it->items != items) return nullptr;
    return &*it;
}

// Counts tids directly, or the distinct documents behind them.
class SupportCounter {
public:
    SupportCounter(const TransactionStore& store, bool per_document) : per_document_(per_document) {
        if (!per_document_) return;
        std::unordered_map<std::string_view, std::uint32_t> ids;
        doc_of_.reserve(store.size());
        for (const Transaction& tx : store.transactions) {
            auto [it, fresh] = ids.emplace(tx.doc_id, static_cast<std::uint32_t>(ids.size()));
            doc_of_.push_back(it->second);
        }
        stamp_.assign(ids.size(), 0);
    }

    std::uint64_t count(const std::vector<std::uint32_t>& tids) {
        if (!per_document_) return tids.size();
        ++generation_;
        std::uint64_t n = 0;
        for (std::uint32_t t : tids) {
            std::uint32_t& s = stamp_[doc_of_[t]];
            if (s != generation_) {
                s = generation_;
                ++n;
            }
        }
        return n;
    }

private:
    bool per_document_;
    std::vector<std::uint32_t> doc_of_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t generation_ = 0;
};

std::vector<std::vector<Node>> build_levels(const TransactionStore& store,
                                            const MiningConfig& cfg) {
    std::vector<std::vector<Node>> levels;
    if (store.empty()) return levels;

    SupportCounter counter(store, cfg.support_per_document);
    const int universe = cfg.space.size();

    std::vector<std::vector<std::uint32_t>> tidlists(static_cast<std::size_t>(universe));
    for (std::uint32_t t = 0; t < store.size(); ++t) {
        for (int item : store.transactions[t].items) {
            if (item < 0 || item >= universe)
                throw DataError("transaction " + std::to_string(t) + " holds item " +
                                std::to_string(item) + " outside the configured item space");
            tidlists[static_cast<std::size_t>(item)].push_back(t);
        }
    }

    std::vector<Node> singles;
    for (int item = 0; item < universe; ++item) {
        auto& tids = tidlists[static_cast<std::size_t>(item)];
        if (tids.empty()) continue;
        const std::uint64_t n = counter.count(tids);
        if (n < cfg.min_support_count) continue;
        singles.push_back({{item}, std::move(tids), n});
    }
    if (singles.empty()) return levels;
    levels.push_back(std::move(singles));

    const auto is_event = [&](int item) { return item >= cfg.space.visual_count + cfg.space.text_count; };

    for (int size = 2; size <= cfg.max_itemset_len; ++size) {
        const std::vector<Node>& prev = levels.back();
        std::vector<Node> next;
        std::vector<int> candidate(static_cast<std::size_t>(size));
        std::vector<int> subset(static_cast<std::size_t>(size) - 1);

        for (std::size_t i = 0; i < prev.size(); ++i) {
            for (std::size_t j = i + 1; j < prev.size(); ++j) {
                const Node& a = prev[i];
                const Node& b = prev[j];
                if (!std::equal(a.items.begin(), a.items.end() - 1, b.items.begin())) break;
                // both tails events would put two event items in one set
                if (is_event(a.items.back()) && is_event(b.items.back())) break;

                std::copy(a.items.begin(), a.items.end(), candidate.begin());
                candidate.back() = b.items.back();

                // downward closure: every size-1 subset must be frequent
                bool pruned = false;
                for (std::size_t drop = 0; drop + 1 < candidate.size() && !pruned; ++drop) {
                    std::size_t w = 0;
                    for (std::size_t r = 0; r < candidate.size(); ++r)
                        if (r != drop) subset[w++] = candidate[r];
                    pruned = find_node(prev, subset) == nullptr;
                }
                if (pruned) continue;

                std::vector<std::uint32_t> tids;
                std::set_intersection(a.tids.begin(), a.tids.end(), b.tids.begin(), b.tids.end(),
                                      std::back_inserter(tids));
                const std::uint64_t n = counter.count(tids);
                if (n < cfg.min_support_count) continue;
                next.push_back({candidate, std::move(tids), n});
            }
        }
        if (next.empty()) break;
        levels.push_back(std::move(next));
    }
    return levels;
}

// Shared by mine and brute_force_mine so both emit identical layouts.
Pattern make_pattern(const std::vector<int>& itemset, int event_item, std::uint64_t support_count,
                     std::uint64_t antecedent_support, const std::vector<std::uint32_t>& tids,
                     const TransactionStore& store, const ItemSpace& space) {
    Pattern p;
    for (int item : itemset) {
        if (item == event_item) continue;
        if (space.modality(item) == Modality::visual)
            p.visual_items.push_back(item);
        else
            p.text_items.push_back(space.decode(item));
    }
    p.event = space.decode(event_item);
    p.support_count = support_count;
    p.antecedent_support = antecedent_support;
    p.confidence =
        static_cast<double>(support_count) / static_cast<double>(antecedent_support);
    p.member_tx.reserve(tids.size());
    for (std::uint32_t t : tids) p.member_tx.push_back(store.transactions[t].tx_id);
    return p;
}

std::vector<int> encoded_antecedent(const Pattern& p, const ItemSpace& space) {
    std::vector<int> items = p.visual_items;
    for (int c : p.text_items) items.push_back(space.encode_text(c));
    return items;
}

void sort_patterns(std::vector<Pattern>& patterns, const ItemSpace& space) {
    std::sort(patterns.begin(), patterns.end(), [&](const Pattern& a, const Pattern& b) {
        if (a.event != b.event) return a.event < b.event;
        if (a.support_count != b.support_count) return a.support_count > b.support_count;
        return encoded_antecedent(a, space) < encoded_antecedent(b, space);
    });
}

std::uint64_t count_containing(const std::vector<int>& itemset, const TransactionStore& store) {
    std::uint64_t n = 0;
    for (const Transaction& tx : store.transactions)
        if (std::includes(tx.items.begin(), tx.items.end(), itemset.begin(), itemset.end())) ++n;
    return n;
}

}  // namespace

double support(const std::vector<int>& itemset, const TransactionStore& store) {
    if (store.empty()) throw DataError("support is undefined on an empty transaction store");
    std::vector<int> sorted = itemset;
    std::sort(sorted.begin(), sorted.end());
    return static_cast<double>(count_containing(sorted, store)) /
           static_cast<double>(store.size());
}

double confidence(const std::vector<int>& antecedent, int event_item,
                  const TransactionStore& store) {
    if (store.empty()) throw DataError("confidence is undefined on an empty transaction store");
    std::vector<int> ante = antecedent;
    std::sort(ante.begin(), ante.end());
    const std::uint64_t denom = count_containing(ante, store);
    if (denom == 0) throw DataError("confidence is undefined: antecedent has zero support");
    std::vector<int> joint = ante;
    joint.insert(std::lower_bound(joint.begin(), joint.end(), event_item), event_item);
    return static_cast<double>(count_containing(joint, store)) / static_cast<double>(denom);
}

std::vector<std::vector<CountedItemset>> frequent_itemsets(const TransactionStore& store,
                                                           const MiningConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<CountedItemset>> out;
    for (const auto& level : build_levels(store, cfg)) {
        std::vector<CountedItemset> counted;
        counted.reserve(level.size());
        for (const Node& node : level) counted.push_back({node.items, node.count});
        out.push_back(std::move(counted));
    }
    return out;
}

std::vector<Pattern> mine(const TransactionStore& store, const MiningConfig& cfg) {
    cfg.validate();
    std::vector<Pattern> patterns;
    if (store.empty()) return patterns;

    const int event_base = cfg.space.visual_count + cfg.space.text_count;
    const auto levels = build_levels(store, cfg);
    std::vector<int> antecedent;

    for (std::size_t level = 2; level < levels.size(); ++level) {
        for (const Node& node : levels[level]) {
            const int last = node.items.back();
            if (last < event_base) continue;  // one event at most, always in last position
            if (node.items.front() >= cfg.space.visual_count) continue;  // no visual item
            antecedent.assign(node.items.begin(), node.items.end() - 1);
            // text items sit between the visual block and the event tail
            if (antecedent.back() < cfg.space.visual_count) continue;  // no text item

            const Node* ante = find_node(levels[level - 1], antecedent);
            if (ante == nullptr)
                throw DataError("frequent itemset lost its antecedent; mining lattice corrupt");
            if (!ratio_ge(node.count, ante->count, cfg.c_min)) continue;
            patterns.push_back(make_pattern(node.items, last, node.count, ante->count, node.tids,
                                            store, cfg.space));
        }
    }
    sort_patterns(patterns, cfg.space);
    return patterns;
}

std::vector<Pattern> brute_force_mine(const TransactionStore& store, const MiningConfig& cfg) {
    cfg.validate();
    if (store.empty())
        throw DataError("brute-force mining is undefined on an empty transaction store");

    std::vector<int> universe;
    for (const Transaction& tx : store.transactions)
        universe.insert(universe.end(), tx.items.begin(), tx.items.end());
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    if (universe.size() > 20)
        throw DataError("brute-force mining bound exceeded: " + std::to_string(universe.size()) +
                        " distinct items, limit 20");

    SupportCounter counter(store, cfg.support_per_document);
    const int event_base = cfg.space.visual_count + cfg.space.text_count;
    std::vector<Pattern> patterns;
    std::vector<int> itemset;

    // enumerate subsets in lexicographic order up to the length bound
    auto recurse = [&](auto&& self, std::size_t next) -> void {
        if (!itemset.empty()) {
            int events = 0, visuals = 0, texts = 0;
            for (int item : itemset) {
                if (item >= event_base)
                    ++events;
                else if (item < cfg.space.visual_count)
                    ++visuals;
                else
                    ++texts;
            }
            if (events == 1 && visuals >= 1 && texts >= 1) {
                const int event_item = itemset.back();
                std::vector<std::uint32_t> tids;
                for (std::uint32_t t = 0; t < store.size(); ++t) {
                    const auto& items = store.transactions[t].items;
                    if (std::includes(items.begin(), items.end(), itemset.begin(), itemset.end()))
                        tids.push_back(t);
                }
                const std::uint64_t joint = counter.count(tids);
                if (joint >= cfg.min_support_count) {
                    std::vector<int> ante(itemset.begin(), itemset.end() - 1);
                    std::vector<std::uint32_t> ante_tids;
                    for (std::uint32_t t = 0; t < store.size(); ++t) {
                        const auto& items = store.transactions[t].items;
                        if (std::includes(items.begin(), items.end(), ante.begin(), ante.end()))
                            ante_tids.push_back(t);
                    }
                    const std::uint64_t denom = counter.count(ante_tids);
                    if (denom > 0 && ratio_ge(joint, denom, cfg.c_min))
                        patterns.push_back(make_pattern(itemset, event_item, joint, denom, tids,
                                                        store, cfg.space));
                }
            }
        }
        if (itemset.size() == static_cast<std::size_t>(cfg.max_itemset_len)) return;
        for (std::size_t i = next; i < universe.size(); ++i) {
            itemset.push_back(universe[i]);
            self(self, i + 1);
            itemset.pop_back();
        }
    };
    recurse(recurse, 0);

    sort_patterns(patterns, cfg.space);
    return patterns;
}

std::vector<Pattern> filter_maximal(const std::vector<Pattern>& patterns) {
    std::vector<std::vector<int>> full(patterns.size());
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        // visual ids, cluster ids, and the event live in disjoint decoded
        // ranges only after re-tagging; tag by modality to compare sets
        std::vector<int>& f = full[i];
        for (int v : patterns[i].visual_items) f.push_back(3 * v);
        for (int t : patterns[i].text_items) f.push_back(3 * t + 1);
        f.push_back(3 * patterns[i].event + 2);
        std::sort(f.begin(), f.end());
    }
    std::vector<Pattern> kept;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        bool strict_subset = false;
        for (std::size_t j = 0; j < patterns.size() && !strict_subset; ++j) {
            if (j == i || full[j].size() <= full[i].size()) continue;
            strict_subset =
                std::includes(full[j].begin(), full[j].end(), full[i].begin(), full[i].end());
        }
        if (!strict_subset) kept.push_back(patterns[i]);
    }
    return kept;
}

void save_patterns(const std::filesystem::path& path, const std::vector<Pattern>& patterns) {
    json list = json::array();
    for (const Pattern& p : patterns) {
        json jp{{"event", p.event},
                {"visual_items", p.visual_items},
                {"text_items", p.text_items},
                {"support_count", p.support_count},
                {"antecedent_support", p.antecedent_support},
                {"confidence", p.confidence},
                {"member_tx", p.member_tx},
                {"name_score", p.name_score},
                {"name_blacklisted", p.name_blacklisted}};
        jp["name"] = p.name ? json(*p.name) : json(nullptr);
        list.push_back(std::move(jp));
    }
    json j{{"patterns", std::move(list)}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write patterns '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw DataError("failed writing patterns '" + path.string() + "'");
}

std::vector<Pattern> load_patterns(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open patterns '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("patterns '" + path.string() + "': " + e.what());
    }

    std::vector<Pattern> patterns;
    try {
        for (const json& jp : j.at("patterns")) {
            Pattern p;
            p.event = jp.at("event").get<int>();
            p.visual_items = jp.at("visual_items").get<std::vector<int>>();
            p.text_items = jp.at("text_items").get<std::vector<int>>();
            p.support_count = jp.at("support_count").get<std::uint64_t>();
            p.antecedent_support = jp.value("antecedent_support", std::uint64_t{0});
            p.confidence = jp.at("confidence").get<double>();
            p.member_tx = jp.at("member_tx").get<std::vector<std::uint64_t>>();
            if (jp.contains("name") && !jp.at("name").is_null())
                p.name = jp.at("name").get<std::string>();
            p.name_score = jp.value("name_score", 0.0);
            p.name_blacklisted = jp.value("name_blacklisted", false);
            patterns.push_back(std::move(p));
        }
    } catch (const json::exception& e) {
        throw DataError("patterns '" + path.string() + "': " + e.what());
    }
    return patterns;
}

}  // namespace mmpm
