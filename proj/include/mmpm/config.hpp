#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mmpm/rational.hpp"

namespace mmpm {

// Every pipeline tunable, read from a flat key=value file. Unknown keys are
// rejected so typos cannot silently fall back to defaults.
struct PipelineConfig {
    int k_top = 20;
    int clusters = 1000;
    int min_caption_df = 10;
    int min_gram_occ = 10;
    Rational c_min{4, 5};
    std::uint64_t min_support_count = 30;
    int max_itemset_len = 6;
    Rational blacklist_threshold{1, 10};
    std::uint64_t seed_kmeans = 1;
    int kmeans_max_iters = 100;
    std::uint64_t seed_train = 1;
    double train_lr = 0.5;
    double train_l2 = 1e-3;
    int train_epochs = 500;
    bool name_dedup_captions = true;
    bool support_per_document = false;
    int image_side = 227;
    int patch_side = 196;
    int stride = 32;
    int pad = 64;

    void validate() const;
};

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& cfg);

}  // namespace mmpm
