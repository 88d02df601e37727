#include "mmpm/synthgen.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "mmpm/corpus.hpp"
#include "mmpm/embeddings.hpp"
#include "mmpm/errors.hpp"
#include "mmpm/featuremap.hpp"
#include "mmpm/rng.hpp"
#include "mmpm/text.hpp"
#include "mmpm/visual.hpp"

namespace mmpm {

using nlohmann::json;

namespace {

std::string padded(const char* prefix, int i, int width) {
    std::string n = std::to_string(i);
    if (static_cast<int>(n.size()) < width) n.insert(0, static_cast<std::size_t>(width) - n.size(), '0');
    return prefix + n;
}

int width_for(int count) {
    int w = 1;
    for (int v = count - 1; v >= 10; v /= 10) ++w;
    return std::max(w, 2);
}

template <typename T>
void shuffle_vec(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.next_below(i)]);
}

// n values cycling over [0, choices), shuffled: exact balance, no alignment.
std::vector<int> balanced_assignment(int n, int choices, Rng& rng) {
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = i % choices;
    shuffle_vec(out, rng);
    return out;
}

bool single_lower_token(const std::string& word) {
    const auto tokens = tokenize(word);
    return tokens.size() == 1 && tokens[0] == word;
}

struct DocPlan {
    std::string doc_id;
    std::string caption;
    int cell = 0;
    std::vector<std::pair<int, float>> responses;  // (filter, value), filter ascending
};

}  // namespace

void SynthConfig::validate() const {
    const auto fail = [](const std::string& why) { throw ConfigError("inconsistent spec: " + why); };

    if (total_tx < 1) fail("total_tx must be >= 1");
    if (filters < 1) fail("filters must be >= 1");
    if (grid < 1 || grid > 64) fail("grid must be in [1,64]");
    if (embedding_dim < 1 || embedding_dim > 4096) fail("embedding_dim must be in [1,4096]");
    if (noise_p < 0.0 || noise_p >= 1.0) fail("noise_p must be in [0,1)");
    if (noise_visual_items < 1 || noise_visual_items > filters)
        fail("noise_visual_items must be in [1,filters]");
    if (noise_words < 1) fail("noise_words must be >= 1");
    if (decoys_per_word < 0) fail("decoys_per_word must be >= 0");
    if (event_names.empty()) fail("at least one event is required");

    pipeline.validate();
    if (pipeline.min_caption_df < 2)
        fail("min_caption_df must be >= 2 so unique per-carrier filler words stay out of the "
             "vocabulary");
    validate_geometry({pipeline.image_side, pipeline.patch_side, pipeline.stride, pipeline.pad},
                      grid, grid);

    std::unordered_set<std::string> names(event_names.begin(), event_names.end());
    if (names.size() != event_names.size()) fail("event names must be distinct");
    for (const std::string& name : event_names) {
        if (!single_lower_token(name)) fail("event name '" + name + "' must be one lowercase token");
        if (name.rfind("noise", 0) == 0 || name.rfind("filler", 0) == 0)
            fail("event name '" + name + "' collides with generated noise/filler words");
    }

    const int plant_filter_limit = filters - noise_visual_items;
    long long carriers = 0;
    std::unordered_set<std::string> plant_words;
    std::unordered_set<int> plant_filters;
    for (const PlantSpec& plant : plants) {
        if (plant.event < 0 || plant.event >= static_cast<int>(event_names.size()))
            fail("plant event id " + std::to_string(plant.event) + " has no ontology entry");
        if (plant.visual_items.empty()) fail("a plant needs at least one visual item");
        for (std::size_t i = 0; i < plant.visual_items.size(); ++i) {
            const int f = plant.visual_items[i];
            if (f < 0 || f >= plant_filter_limit)
                fail("plant filter " + std::to_string(f) + " must be in [0," +
                     std::to_string(plant_filter_limit) + ") to stay clear of the noise range");
            if (i > 0 && plant.visual_items[i - 1] >= f)
                fail("plant visual items must be strictly increasing");
            if (!plant_filters.insert(f).second)
                fail("plant filter " + std::to_string(f) + " is used by two plants");
        }
        if (plant.words.size() != 2) fail("a plant needs exactly two caption words");
        for (const std::string& w : plant.words) {
            if (!single_lower_token(w)) fail("plant word '" + w + "' must be one lowercase token");
            if (StopLists::standard().contains(w)) fail("plant word '" + w + "' is a stop word");
            if (w.rfind("noise", 0) == 0 || w.rfind("filler", 0) == 0)
                fail("plant word '" + w + "' collides with generated noise/filler words");
            for (const std::string& trigger : event_names)
                if (w.rfind(trigger, 0) == 0)
                    fail("plant word '" + w + "' would trigger event '" + trigger + "'");
            if (!plant_words.insert(w).second) fail("plant word '" + w + "' is used twice");
        }
        if (plant.words[0] == plant.words[1]) fail("plant words must be distinct");
        if (plant.carrier_count < 1) fail("carrier_count must be >= 1");
        if (static_cast<std::uint64_t>(plant.carrier_count) < pipeline.min_support_count)
            fail("carrier_count " + std::to_string(plant.carrier_count) +
                 " is below min_support_count " + std::to_string(pipeline.min_support_count));
        carriers += plant.carrier_count;
    }
    if (carriers > total_tx) fail("plant carriers exceed total_tx");

    const long long noise_docs = total_tx - carriers;
    const long long decoy_slots =
        static_cast<long long>(decoys_per_word) * static_cast<long long>(plant_words.size());
    if (decoy_slots > noise_docs)
        fail("decoys need " + std::to_string(decoy_slots) + " distinct noise documents, only " +
             std::to_string(noise_docs) + " available");
}

SynthConfig default_synth_config() {
    SynthConfig config;
    config.event_names = {"demonstrate", "attack", "meet", "injure", "transport", "elect"};
    config.plants = {
        {0, {0, 1}, {"riot", "police"}, 30},
        {1, {2, 3}, {"air", "strike"}, 30},
        {2, {4, 5}, {"round", "table"}, 30},
        {3, {6, 7}, {"ambulance", "crew"}, 30},
        {4, {8, 9}, {"cargo", "ship"}, 30},
    };
    return config;
}

SynthSummary generate(const SynthConfig& config, const std::filesystem::path& dir) {
    config.validate();
    std::filesystem::create_directories(dir / "features");

    Rng rng(config.seed);
    const int cells = config.grid * config.grid;
    const int noise_filter_base = config.filters - config.noise_visual_items;

    std::vector<std::string> noise_word_list;
    noise_word_list.reserve(static_cast<std::size_t>(config.noise_words));
    const int nw_width = width_for(config.noise_words);
    for (int i = 0; i < config.noise_words; ++i)
        noise_word_list.push_back(padded("noise", i, nw_width));

    int total_carriers = 0;
    for (const PlantSpec& plant : config.plants) total_carriers += plant.carrier_count;
    const int noise_docs = config.total_tx - total_carriers;
    const int doc_width = width_for(config.total_tx);
    const int filler_width = std::max(width_for(std::max(total_carriers, 1)), 4);

    std::vector<DocPlan> docs;
    docs.reserve(static_cast<std::size_t>(config.total_tx));
    std::vector<std::vector<std::string>> carrier_docs_per_plant(config.plants.size());

    int carrier_index = 0;
    for (std::size_t pi = 0; pi < config.plants.size(); ++pi) {
        const PlantSpec& plant = config.plants[pi];
        for (int j = 0; j < plant.carrier_count; ++j, ++carrier_index) {
            DocPlan plan;
            plan.doc_id = padded("doc", static_cast<int>(docs.size()), doc_width);
            plan.caption = plant.words[0] + " " + plant.words[1] + " " +
                           padded("filler", carrier_index, filler_width) + " " +
                           config.event_names[static_cast<std::size_t>(plant.event)];
            plan.cell = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cells)));
            for (int f : plant.visual_items)
                plan.responses.emplace_back(
                    f, static_cast<float>(0.5 + 0.5 * rng.next_double()));
            carrier_docs_per_plant[pi].push_back(plan.doc_id);
            docs.push_back(std::move(plan));
        }
    }

    // Balanced shuffled assignments keep event/visual/word axes independent,
    // so no (noise item, event) pair can reach the support threshold.
    std::vector<int> noise_events = balanced_assignment(noise_docs, static_cast<int>(config.event_names.size()), rng);
    std::vector<int> noise_visuals = balanced_assignment(noise_docs, config.noise_visual_items, rng);
    std::vector<int> noise_words = balanced_assignment(noise_docs, config.noise_words, rng);

    // Each decoy lands in its own noise document: a planted word appears
    // solo there, raising its caption count without forming the gram.
    std::vector<int> decoy_word_of(static_cast<std::size_t>(noise_docs), -1);
    std::vector<std::string> decoy_words;
    for (const PlantSpec& plant : config.plants)
        for (const std::string& w : plant.words) decoy_words.push_back(w);
    {
        std::vector<int> positions(static_cast<std::size_t>(noise_docs));
        for (int i = 0; i < noise_docs; ++i) positions[static_cast<std::size_t>(i)] = i;
        shuffle_vec(positions, rng);
        std::size_t slot = 0;
        for (std::size_t w = 0; w < decoy_words.size(); ++w)
            for (int d = 0; d < config.decoys_per_word; ++d, ++slot)
                decoy_word_of[static_cast<std::size_t>(positions[slot])] = static_cast<int>(w);
    }

    for (int i = 0; i < noise_docs; ++i) {
        DocPlan plan;
        plan.doc_id = padded("doc", static_cast<int>(docs.size()), doc_width);
        plan.cell = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cells)));

        const int forced_visual = noise_filter_base + noise_visuals[static_cast<std::size_t>(i)];
        std::vector<int> visuals{forced_visual};
        for (int f = noise_filter_base; f < config.filters; ++f)
            if (f != forced_visual && rng.next_bernoulli(config.noise_p)) visuals.push_back(f);
        std::sort(visuals.begin(), visuals.end());
        for (int f : visuals)
            plan.responses.emplace_back(f, static_cast<float>(0.5 + 0.5 * rng.next_double()));

        const int forced_word = noise_words[static_cast<std::size_t>(i)];
        std::string caption = noise_word_list[static_cast<std::size_t>(forced_word)];
        for (int w = 0; w < config.noise_words; ++w)
            if (w != forced_word && rng.next_bernoulli(config.noise_p))
                caption += " " + noise_word_list[static_cast<std::size_t>(w)];
        if (decoy_word_of[static_cast<std::size_t>(i)] >= 0)
            caption += " " + decoy_words[static_cast<std::size_t>(decoy_word_of[static_cast<std::size_t>(i)])];
        caption += " " + config.event_names[static_cast<std::size_t>(noise_events[static_cast<std::size_t>(i)])];
        plan.caption = std::move(caption);
        docs.push_back(std::move(plan));
    }

    // Embeddings: every word that can clear min_caption_df gets one random
    // direction; unique filler words never qualify and are left out.
    std::vector<std::string> embedded;
    embedded.insert(embedded.end(), config.event_names.begin(), config.event_names.end());
    embedded.insert(embedded.end(), decoy_words.begin(), decoy_words.end());
    embedded.insert(embedded.end(), noise_word_list.begin(), noise_word_list.end());
    std::sort(embedded.begin(), embedded.end());
    embedded.erase(std::unique(embedded.begin(), embedded.end()), embedded.end());

    EmbeddingTable table;
    table.dim = config.embedding_dim;
    for (const std::string& word : embedded) {
        Eigen::VectorXd v(config.embedding_dim);
        double norm = 0.0;
        do {
            for (int d = 0; d < config.embedding_dim; ++d) v(d) = 2.0 * rng.next_double() - 1.0;
            norm = v.norm();
        } while (norm < 1e-6);
        table.entries.emplace(word, std::move(v));
    }
    save_embeddings(dir / "embeddings.txt", table);

    EventOntology ontology;
    for (std::size_t e = 0; e < config.event_names.size(); ++e)
        ontology.events.push_back(
            {static_cast<int>(e), config.event_names[e], {config.event_names[e]}});
    ontology.save_json(dir / "ontology.json");

    {
        std::ofstream out(dir / "corpus.jsonl", std::ios::trunc);
        if (!out) throw DataError("cannot write corpus '" + (dir / "corpus.jsonl").string() + "'");
        for (const DocPlan& plan : docs) {
            const json line{{"doc_id", plan.doc_id},
                            {"caption", plan.caption},
                            {"features", plan.doc_id + ".bin"}};
            out << line.dump() << '\n';
        }
        if (!out) throw DataError("failed writing corpus.jsonl");
    }

    for (const DocPlan& plan : docs) {
        FeatureMap map = FeatureMap::zero(config.grid, config.grid, config.filters);
        for (const auto& [filter, value] : plan.responses) map.cells(plan.cell, filter) = value;
        write_feature_map(dir / "features" / (plan.doc_id + ".bin"), map);
    }

    // Saturation clustering: one cluster per embedded vocabulary word, with
    // the count derived from the generated captions themselves.
    std::vector<Document> vocab_docs;
    vocab_docs.reserve(docs.size());
    for (const DocPlan& plan : docs) {
        Document d;
        d.doc_id = plan.doc_id;
        d.caption_raw = plan.caption;
        d.tokens = tokenize(plan.caption);
        vocab_docs.push_back(std::move(d));
    }
    const TextVocabulary vocab =
        build_vocabulary(vocab_docs, StopLists::standard(), config.pipeline.min_caption_df);
    std::vector<std::string> model_words;
    for (const std::string& w : vocab.words)
        if (table.contains(w)) model_words.push_back(w);
    if (model_words.empty())
        throw ConfigError("inconsistent spec: no generated word clears min_caption_df=" +
                          std::to_string(config.pipeline.min_caption_df));

    PipelineConfig out_cfg = config.pipeline;
    out_cfg.clusters = static_cast<int>(model_words.size());
    save_config(dir / "mmpm.conf", out_cfg);

    {
        json plant_list = json::array();
        for (std::size_t pi = 0; pi < config.plants.size(); ++pi) {
            const PlantSpec& plant = config.plants[pi];
            plant_list.push_back(
                {{"event", plant.event},
                 {"event_name", config.event_names[static_cast<std::size_t>(plant.event)]},
                 {"visual_items", plant.visual_items},
                 {"words", plant.words},
                 {"gram", plant.words[0] + " " + plant.words[1]},
                 {"carrier_count", plant.carrier_count},
                 {"carrier_docs", carrier_docs_per_plant[pi]}});
        }
        const json j{{"plants", std::move(plant_list)},
                     {"noise_docs", noise_docs},
                     {"noise_filter_base", noise_filter_base},
                     {"noise_words", noise_word_list},
                     {"seed", config.seed}};
        std::ofstream out(dir / "plants.json", std::ios::trunc);
        if (!out) throw DataError("cannot write plants.json");
        out << j.dump(2) << '\n';
        if (!out) throw DataError("failed writing plants.json");
    }

    SynthSummary summary;
    summary.documents = config.total_tx;
    summary.carriers = total_carriers;
    summary.clusters = static_cast<int>(model_words.size());
    summary.vocabulary = std::move(model_words);
    return summary;
}

}  // namespace mmpm
