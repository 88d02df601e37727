#include <doctest.h>

#include <random>
#include <set>

#include "mmpm/errors.hpp"
#include "mmpm/miner.hpp"
#include "testutil.hpp"

using namespace mmpm;

namespace {

// Items 0..3 visual, 4..7 text, 8..9 events.
const ItemSpace kSmallSpace{4, 4, 2};

TransactionStore store_of(const std::vector<std::vector<int>>& rows,
                          const ItemSpace& space = kSmallSpace) {
    TransactionStore store;
    store.space = space;
    std::uint64_t id = 0;
    for (const auto& row : rows) {
        Transaction tx;
        tx.tx_id = id;
        tx.doc_id = "d" + std::to_string(id);
        tx.items = row;
        store.transactions.push_back(std::move(tx));
        ++id;
    }
    return store;
}

MiningConfig config_for(const TransactionStore& store) {
    MiningConfig cfg;
    cfg.space = store.space;
    return cfg;
}

}  // namespace

TEST_CASE("support and confidence are exact count ratios") {
    // The classic four-transaction fixture; 9 sits in the event range.
    const TransactionStore store = store_of({{1, 2, 3}, {1, 2}, {2, 3}, {1, 2, 9}});

    CHECK(support({1, 2}, store) == 0.75);
    CHECK(support({2, 1}, store) == 0.75);  // order-insensitive
    CHECK(support({}, store) == 1.0);
    CHECK(support({0}, store) == 0.0);
    CHECK(confidence({1, 2}, 9, store) == 1.0 / 3.0);
    CHECK(confidence({2, 3}, 9, store) == 0.0);

    CHECK_THROWS_AS(support({1}, TransactionStore{}), DataError);
    CHECK_THROWS_AS(confidence({0}, 9, store), DataError);  // antecedent never occurs
}

TEST_CASE("planted rule at the exact support threshold") {
    // 40 of 100 transactions carry {visual 0, text 4, event 8}; the other 60
    // carry disjoint noise items {1, 5} with no event.
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 40; ++i) rows.push_back({0, 4, 8});
    for (int i = 0; i < 60; ++i) rows.push_back({1, 5});
    const TransactionStore store = store_of(rows);

    MiningConfig cfg = config_for(store);
    cfg.min_support_count = 40;

    const auto patterns = mine(store, cfg);
    REQUIRE(patterns.size() == 1);
    CHECK(patterns[0].visual_items == std::vector<int>{0});
    CHECK(patterns[0].text_items == std::vector<int>{0});  // cluster id of item 4
    CHECK(patterns[0].event == 0);
    CHECK(patterns[0].support_count == 40);
    CHECK(patterns[0].antecedent_support == 40);
    CHECK(patterns[0].confidence == 1.0);
    REQUIRE(patterns[0].member_tx.size() == 40);
    CHECK(patterns[0].member_tx.front() == 0);
    CHECK(patterns[0].member_tx.back() == 39);

    SUBCASE("one transaction short of the threshold yields nothing") {
        cfg.min_support_count = 41;
        CHECK(mine(store, cfg).empty());
    }

    SUBCASE("the noise pair never forms a rule: no event, no text-free rules") {
        cfg.min_support_count = 30;
        const auto all = mine(store, cfg);
        REQUIRE(all.size() == 1);
        CHECK(all[0].visual_items == std::vector<int>{0});
    }
}

TEST_CASE("rules whose antecedent lacks a modality are excluded") {
    // {0, 8} co-occur 50 times but there is no text item anywhere.
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 50; ++i) rows.push_back({0, 8});
    const TransactionStore store = store_of(rows);
    MiningConfig cfg = config_for(store);
    cfg.min_support_count = 10;
    CHECK(mine(store, cfg).empty());

    // Same shape on the text side only.
    std::vector<std::vector<int>> text_rows;
    for (int i = 0; i < 50; ++i) text_rows.push_back({4, 8});
    CHECK(mine(store_of(text_rows), cfg).empty());
}

TEST_CASE("confidence filter is an exact rational comparison") {
    // Antecedent {0,4}: 5 occurrences, 4 with event 8 -> confidence 4/5.
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 4; ++i) rows.push_back({0, 4, 8});
    rows.push_back({0, 4});
    const TransactionStore store = store_of(rows);
    MiningConfig cfg = config_for(store);
    cfg.min_support_count = 4;

    SUBCASE("exactly c_min passes") {
        const auto patterns = mine(store, cfg);
        REQUIRE(patterns.size() == 1);
        CHECK(patterns[0].confidence == 0.8);
        CHECK(patterns[0].antecedent_support == 5);
    }

    SUBCASE("a hair above 4/5 fails") {
        cfg.c_min = Rational{801, 1000};
        CHECK(mine(store, cfg).empty());
    }
}

TEST_CASE("itemsets never take more than one event item") {
    // Transactions carrying two events; {0,4,8,9} is frequent as a set but
    // may never become an itemset, and each event yields its own rule.
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 10; ++i) rows.push_back({0, 4, 8, 9});
    const TransactionStore store = store_of(rows);
    MiningConfig cfg = config_for(store);
    cfg.min_support_count = 5;

    const auto levels = frequent_itemsets(store, cfg);
    for (const auto& level : levels)
        for (const CountedItemset& ci : level) {
            int events = 0;
            for (int item : ci.items)
                if (store.space.modality(item) == Modality::event) ++events;
            CHECK(events <= 1);
        }

    const auto patterns = mine(store, cfg);
    REQUIRE(patterns.size() == 2);
    CHECK(patterns[0].event == 0);
    CHECK(patterns[1].event == 1);
    CHECK(patterns[0].visual_items == patterns[1].visual_items);
}

TEST_CASE("frequent itemset levels obey downward closure") {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 80; ++i) {
        std::vector<int> items;
        for (int item = 0; item < 10; ++item)
            if (unit(gen) < 0.35) items.push_back(item);
        rows.push_back(items);
    }
    const TransactionStore store = store_of(rows);
    MiningConfig cfg = config_for(store);
    cfg.min_support_count = 8;

    const auto levels = frequent_itemsets(store, cfg);
    REQUIRE(!levels.empty());

    std::set<std::vector<int>> seen;
    for (const auto& level : levels)
        for (const CountedItemset& ci : level) seen.insert(ci.items);

    for (std::size_t k = 1; k < levels.size(); ++k)
        for (const CountedItemset& ci : levels[k]) {
            CHECK(ci.items.size() == k + 1);
            CHECK(ci.count >= cfg.min_support_count);
            // Every (k-1)-subset must be frequent too, except single-event
            // drops which the lattice never stores... they are: subsets of a
            // <=1-event itemset still have <=1 event. All must be present.
            for (std::size_t drop = 0; drop < ci.items.size(); ++drop) {
                std::vector<int> sub = ci.items;
                sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(drop));
                CHECK(seen.count(sub) == 1);
            }
            // And the level count can never exceed any subset's count.
            const double sup = support(ci.items, store);
            CHECK(static_cast<std::uint64_t>(sup * static_cast<double>(store.size()) + 0.5) ==
                  ci.count);
        }
}

namespace {

TransactionStore random_store(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> tx_count(5, 300);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double density = 0.08 + 0.4 * unit(gen);

    // 12 distinct items: 5 visual, 4 text, 3 events.
    TransactionStore store;
    store.space = ItemSpace{5, 4, 3};
    const int n = tx_count(gen);
    for (int i = 0; i < n; ++i) {
        Transaction tx;
        tx.tx_id = static_cast<std::uint64_t>(i);
        tx.doc_id = "d" + std::to_string(i / 3);  // several patches per document
        for (int item = 0; item < 12; ++item)
            if (unit(gen) < density) tx.items.push_back(item);
        store.transactions.push_back(std::move(tx));
    }
    return store;
}

MiningConfig random_config(std::uint64_t seed, const TransactionStore& store) {
    std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<int> sup(2, 10);
    std::uniform_int_distribution<int> len(3, 6);
    std::uniform_int_distribution<int> pick(0, 2);
    std::uniform_int_distribution<int> coin(0, 1);

    MiningConfig cfg;
    cfg.space = store.space;
    cfg.min_support_count = static_cast<std::uint64_t>(sup(gen));
    cfg.max_itemset_len = len(gen);
    const Rational choices[3] = {{4, 5}, {1, 2}, {2, 3}};
    cfg.c_min = choices[pick(gen)];
    cfg.support_per_document = coin(gen) == 1;
    return cfg;
}

void check_equal_patterns(const std::vector<Pattern>& a, const std::vector<Pattern>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].visual_items == b[i].visual_items);
        CHECK(a[i].text_items == b[i].text_items);
        CHECK(a[i].event == b[i].event);
        CHECK(a[i].support_count == b[i].support_count);
        CHECK(a[i].antecedent_support == b[i].antecedent_support);
        CHECK(a[i].confidence == b[i].confidence);
        CHECK(a[i].member_tx == b[i].member_tx);
    }
}

}  // namespace

TEST_CASE("apriori agrees with exhaustive enumeration on random stores") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const TransactionStore store = random_store(seed);
        const MiningConfig cfg = random_config(seed, store);
        check_equal_patterns(mine(store, cfg), brute_force_mine(store, cfg));
    }
}

TEST_CASE("patterns arrive sorted by event, support, antecedent") {
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 20; ++i) rows.push_back({0, 4, 8});
    for (int i = 0; i < 30; ++i) rows.push_back({1, 5, 8});
    for (int i = 0; i < 25; ++i) rows.push_back({2, 6, 9});
    const TransactionStore store = store_of(rows);
    MiningConfig cfg = config_for(store);
    cfg.min_support_count = 5;

    const auto patterns = mine(store, cfg);
    REQUIRE(patterns.size() >= 3);
    for (std::size_t i = 1; i < patterns.size(); ++i) {
        CHECK(patterns[i - 1].event <= patterns[i].event);
        if (patterns[i - 1].event == patterns[i].event)
            CHECK(patterns[i - 1].support_count >= patterns[i].support_count);
    }
    CHECK(patterns.front().event == 0);
    CHECK(patterns.front().support_count == 30);
}

TEST_CASE("per-document support counts each document once") {
    // Two patch transactions per document carry the same items: transaction
    // support 8 vs document support 4.
    TransactionStore store;
    store.space = kSmallSpace;
    for (int i = 0; i < 8; ++i) {
        Transaction tx;
        tx.tx_id = static_cast<std::uint64_t>(i);
        tx.doc_id = "d" + std::to_string(i / 2);
        tx.items = {0, 4, 8};
        store.transactions.push_back(std::move(tx));
    }

    MiningConfig cfg = config_for(store);
    cfg.min_support_count = 5;
    REQUIRE(mine(store, cfg).size() == 1);
    CHECK(mine(store, cfg)[0].support_count == 8);

    cfg.support_per_document = true;
    CHECK(mine(store, cfg).empty());  // only 4 documents

    cfg.min_support_count = 4;
    const auto patterns = mine(store, cfg);
    REQUIRE(patterns.size() == 1);
    CHECK(patterns[0].support_count == 4);
    CHECK(patterns[0].member_tx.size() == 8);  // members stay transaction-level
}

TEST_CASE("maximal filter keeps only unsubsumed patterns") {
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 30; ++i) rows.push_back({0, 1, 4, 8});
    const TransactionStore store = store_of(rows);
    MiningConfig cfg = config_for(store);
    cfg.min_support_count = 10;

    const auto patterns = mine(store, cfg);
    CHECK(patterns.size() == 3);  // {0,4}, {1,4}, {0,1,4} antecedents

    const auto maximal = filter_maximal(patterns);
    REQUIRE(maximal.size() == 1);
    CHECK(maximal[0].visual_items == std::vector<int>{0, 1});
    CHECK(maximal[0].text_items == std::vector<int>{0});

    CHECK(filter_maximal({}).empty());
}

TEST_CASE("itemset length cap bounds antecedent plus event") {
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 30; ++i) rows.push_back({0, 1, 2, 4, 5, 8});
    const TransactionStore store = store_of(rows);
    MiningConfig cfg = config_for(store);
    cfg.min_support_count = 10;
    cfg.max_itemset_len = 4;

    for (const Pattern& p : mine(store, cfg))
        CHECK(p.visual_items.size() + p.text_items.size() + 1 <= 4);

    cfg.max_itemset_len = 2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // cannot hold visual+text+event
}

TEST_CASE("patterns serialize losslessly") {
    TempDir tmp;
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 12; ++i) rows.push_back({0, 4, 8});
    const TransactionStore store = store_of(rows);
    MiningConfig cfg = config_for(store);
    cfg.min_support_count = 6;

    std::vector<Pattern> patterns = mine(store, cfg);
    REQUIRE(!patterns.empty());
    patterns[0].name = "riot police";
    patterns[0].name_score = 12.5;

    save_patterns(tmp / "p.json", patterns);
    const auto back = load_patterns(tmp / "p.json");
    check_equal_patterns(patterns, back);
    CHECK(back[0].name == std::optional<std::string>{"riot police"});
    CHECK(back[0].name_score == 12.5);
    CHECK_FALSE(back[0].name_blacklisted);

    save_patterns(tmp / "q.json", back);
    CHECK(read_text(tmp / "p.json") == read_text(tmp / "q.json"));

    SUBCASE("empty pattern lists are fine") {
        save_patterns(tmp / "none.json", {});
        CHECK(load_patterns(tmp / "none.json").empty());
    }
}
