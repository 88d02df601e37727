#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmpm/config.hpp"

namespace mmpm {

// One planted pattern: carrier documents pair the visual filters with a
// two-word caption gram and the event trigger.
struct PlantSpec {
    int event = 0;
    std::vector<int> visual_items;   // filter ids, strictly increasing
    std::vector<std::string> words;  // exactly two; the planted gram is "words[0] words[1]"
    int carrier_count = 30;
};

struct SynthConfig {
    int total_tx = 2000;  // documents; every document carries one active cell
    int filters = 64;
    int grid = 6;
    int embedding_dim = 16;
    double noise_p = 0.01;        // per-item extra inclusion probability
    int noise_visual_items = 30;  // top filter ids [filters-n, filters)
    int noise_words = 40;
    int decoys_per_word = 30;  // planted-word solo appearances in noise captions
    std::uint64_t seed = 7;
    std::vector<std::string> event_names;  // index = event id; the name is the trigger
    std::vector<PlantSpec> plants;
    PipelineConfig pipeline;  // written to mmpm.conf with clusters recomputed

    void validate() const;  // throws ConfigError("inconsistent spec: ...")
};

// Five plants over six events, 2000 documents, defaults per the pipeline.
SynthConfig default_synth_config();

struct SynthSummary {
    int documents = 0;
    int carriers = 0;
    int clusters = 0;                     // saturation k written to mmpm.conf
    std::vector<std::string> vocabulary;  // words that reach the cluster model
};

// Writes corpus.jsonl, ontology.json, embeddings.txt, features/*.bin,
// plants.json, and mmpm.conf under dir. Deterministic for a given config.
SynthSummary generate(const SynthConfig& config, const std::filesystem::path& dir);

}  // namespace mmpm
