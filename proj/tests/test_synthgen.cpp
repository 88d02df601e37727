#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "mmpm/errors.hpp"
#include "mmpm/miner.hpp"
#include "mmpm/pipeline.hpp"
#include "mmpm/synthgen.hpp"
#include "mmpm/text.hpp"
#include "mmpm/transactions.hpp"
#include "testutil.hpp"

using namespace mmpm;

namespace {

// Two plants over three events, sized so every threshold clears or misses
// deterministically: 300 noise docs split 100/100/100 across events keeps
// the planted grams at 10/110 < 10% of their event's captions, and 48 noise
// filters cap any single noise filter at ceil(300/48) = 7 docs, under the
// support floor of 10 regardless of how the shuffles land.
SynthConfig small_config() {
    SynthConfig cfg;
    cfg.total_tx = 320;
    cfg.filters = 52;
    cfg.grid = 3;
    cfg.embedding_dim = 8;
    cfg.noise_p = 0.0;
    cfg.noise_visual_items = 48;
    cfg.noise_words = 12;
    cfg.decoys_per_word = 4;
    cfg.seed = 9;
    cfg.event_names = {"demonstrate", "attack", "meet"};
    cfg.plants = {
        {0, {0, 1}, {"riot", "police"}, 10},
        {1, {2, 3}, {"air", "strike"}, 10},
    };
    cfg.pipeline.min_support_count = 10;
    return cfg;
}

std::vector<int> sorted(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_CASE("planted patterns survive the pipeline and nothing else does") {
    TempDir tmp;
    const Workspace ws{tmp.path};
    const SynthSummary summary = run_synth(ws, small_config());

    CHECK(summary.documents == 320);
    CHECK(summary.carriers == 20);
    // Saturation clustering: 3 triggers + 4 planted words + 12 noise words.
    CHECK(summary.clusters == 19);
    REQUIRE(summary.vocabulary.size() == 19);
    CHECK(std::binary_search(summary.vocabulary.begin(), summary.vocabulary.end(),
                             std::string("riot")));
    CHECK(std::binary_search(summary.vocabulary.begin(), summary.vocabulary.end(),
                             std::string("noise00")));

    const PipelineConfig cfg = resolve_config(ws, std::nullopt);
    CHECK(cfg.clusters == 19);
    CHECK(cfg.min_support_count == 10);

    const IngestStats ingest = run_ingest(ws, cfg, true);
    CHECK(ingest.documents == 320);
    CHECK(ingest.with_events == 320);
    CHECK(ingest.events == 3);

    const ClusterStats cluster = run_cluster(ws, cfg);
    CHECK(cluster.k == 19);
    CHECK(cluster.dropped == 0);
    CHECK(cluster.objective == doctest::Approx(0.0));  // k == n, one word per cluster

    const TransactStats transact = run_transact(ws, cfg);
    CHECK(transact.documents == 320);
    CHECK(transact.transactions == 320);  // one active cell per document
    CHECK(transact.space == ItemSpace{52, 19, 3});

    const ClusterModel model = load_cluster_model(ws.cluster_file().string());
    const ItemSpace space = transact.space;
    const auto cluster_id = [&](const std::string& word) {
        const std::optional<int> c = model.cluster_of(word);
        REQUIRE(c.has_value());
        return *c;
    };
    const auto text_item = [&](const std::string& word) {
        return space.encode_text(cluster_id(word));
    };

    const nlohmann::json plants = nlohmann::json::parse(read_text(tmp / "plants.json"));
    REQUIRE(plants.at("plants").size() == 2);
    CHECK(plants.at("noise_docs") == 300);
    CHECK(plants.at("noise_filter_base") == 4);
    CHECK(plants.at("plants")[0].at("gram") == "riot police");
    CHECK(plants.at("plants")[1].at("gram") == "air strike");
    CHECK(plants.at("plants")[0].at("event_name") == "demonstrate");
    const auto carrier_docs =
        plants.at("plants")[0].at("carrier_docs").get<std::vector<std::string>>();
    REQUIRE(carrier_docs.size() == 10);

    const TransactionStore store = load_transactions(ws.transactions_file());
    REQUIRE(store.size() == 320);
    std::map<std::string, const Transaction*> by_doc;
    for (const Transaction& tx : store.transactions) {
        CHECK(by_doc.count(tx.doc_id) == 0);  // one cell -> one transaction each
        by_doc[tx.doc_id] = &tx;
    }

    // Carrier transactions carry exactly the planted closure, nothing more.
    const std::vector<int> plant0_items = sorted(
        {space.encode_visual(0), space.encode_visual(1), text_item("riot"), text_item("police"),
         text_item("demonstrate"), space.encode_event(0)});
    for (const std::string& doc : carrier_docs) {
        REQUIRE(by_doc.count(doc) == 1);
        CHECK(by_doc.at(doc)->items == plant0_items);
    }
    // Noise documents never touch the planted filters 0..3.
    for (const Transaction& tx : store.transactions) {
        const bool carrier = tx.doc_id < "doc020";
        for (int item : tx.items)
            if (space.modality(item) == Modality::visual) {
                if (carrier)
                    CHECK(space.decode(item) < 4);
                else
                    CHECK(space.decode(item) >= 4);
            }
    }

    const MineStats mine = run_mine(ws, cfg, false);
    // Per plant: 3 nonempty visual subsets x 7 nonempty text subsets.
    CHECK(mine.patterns == 42);

    const std::vector<Pattern> mined = load_patterns(ws.patterns_file());
    REQUIRE(mined.size() == 42);
    for (const Pattern& p : mined) {
        CHECK(p.support_count == 10);
        CHECK(p.confidence == 1.0);
        for (int f : p.visual_items) CHECK(f < 4);  // no noise filter in any rule
    }
    CHECK(std::count_if(mined.begin(), mined.end(),
                        [](const Pattern& p) { return p.event == 0; }) == 21);

    const NameStats names = run_name(ws, cfg);
    CHECK(names.patterns == 42);
    CHECK(names.named == 36);
    CHECK(names.unnamed == 6);
    CHECK(names.blacklist_fallbacks == 6);

    const int trigger0 = cluster_id("demonstrate");
    const int trigger1 = cluster_id("attack");
    for (const Pattern& p : load_patterns(ws.patterns_file())) {
        const bool trigger_only =
            p.text_items == std::vector<int>{p.event == 0 ? trigger0 : trigger1};
        if (trigger_only) {
            // The trigger word blankets its event's captions, so it is
            // blacklisted and no eligible gram scores above zero.
            CHECK_FALSE(p.name.has_value());
            CHECK(p.name_blacklisted);
        } else {
            REQUIRE(p.name.has_value());
            CHECK(*p.name == (p.event == 0 ? "riot police" : "air strike"));
            CHECK_FALSE(p.name_blacklisted);
        }
    }

    // The maximal filter reduces the closure to one rule per plant.
    const MineStats maximal = run_mine(ws, cfg, true);
    CHECK(maximal.maximal_only);
    const std::vector<Pattern> top = load_patterns(ws.patterns_file());
    REQUIRE(top.size() == 2);
    CHECK(top[0].event == 0);
    CHECK(top[0].visual_items == std::vector<int>{0, 1});
    CHECK(top[0].text_items == sorted({cluster_id("riot"), cluster_id("police"), trigger0}));
    CHECK(top[1].event == 1);
    CHECK(top[1].visual_items == std::vector<int>{2, 3});
}

TEST_CASE("generation is byte-identical for a fixed seed") {
    TempDir a, b;
    SynthConfig cfg = small_config();
    cfg.total_tx = 80;  // 20 carriers + 60 noise docs is plenty for this
    generate(cfg, a.path);
    generate(cfg, b.path);

    std::vector<std::filesystem::path> rel;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path))
        if (entry.is_regular_file())
            rel.push_back(std::filesystem::relative(entry.path(), a.path));
    std::sort(rel.begin(), rel.end());
    REQUIRE(rel.size() > 80);  // corpus, config, ontology, embeddings, features
    for (const auto& r : rel) {
        CAPTURE(r.string());
        REQUIRE(std::filesystem::exists(b.path / r));
        CHECK(read_text(a.path / r) == read_text(b.path / r));
    }
}

TEST_CASE("a corpus with no plants mines nothing") {
    TempDir tmp;
    const Workspace ws{tmp.path};
    SynthConfig cfg = small_config();
    cfg.total_tx = 100;
    cfg.plants.clear();

    const SynthSummary summary = run_synth(ws, cfg);
    CHECK(summary.carriers == 0);
    // 100/12 noise-word appearances miss min_caption_df, leaving the triggers.
    CHECK(summary.clusters == 3);

    const PipelineConfig pipeline = resolve_config(ws, std::nullopt);
    run_ingest(ws, pipeline, true);
    run_cluster(ws, pipeline);
    run_transact(ws, pipeline);
    const MineStats mine = run_mine(ws, pipeline, false);
    CHECK(mine.transactions == 100);
    CHECK(mine.patterns == 0);
    CHECK(load_patterns(ws.patterns_file()).empty());
}

TEST_CASE("inconsistent synthetic specs are rejected") {
    const auto rejects = [](void (*tweak)(SynthConfig&)) {
        SynthConfig cfg = small_config();
        tweak(cfg);
        CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("inconsistent spec"),
                             ConfigError);
    };

    rejects([](SynthConfig& c) { c.plants[0].carrier_count = 5; });  // under support floor
    rejects([](SynthConfig& c) { c.plants[0].visual_items = {3, 4}; });  // 4 is a noise filter
    rejects([](SynthConfig& c) { c.plants[1].words = {"riot", "police"}; });  // reused words
    rejects([](SynthConfig& c) { c.plants[0].words = {"riot"}; });
    rejects([](SynthConfig& c) { c.plants[0].words = {"the", "police"}; });  // stop word
    rejects([](SynthConfig& c) { c.plants[0].event = 7; });
    rejects([](SynthConfig& c) { c.event_names[1] = "Attack"; });
    rejects([](SynthConfig& c) { c.event_names = {}; });
    rejects([](SynthConfig& c) { c.noise_p = 1.0; });
    rejects([](SynthConfig& c) { c.grid = 0; });
    rejects([](SynthConfig& c) { c.decoys_per_word = 100000; });  // more decoys than noise docs
    rejects([](SynthConfig& c) { c.total_tx = 15; });  // carriers would not fit

    // A valid spec stays valid.
    CHECK_NOTHROW(small_config().validate());
    CHECK_NOTHROW(default_synth_config().validate());
}
