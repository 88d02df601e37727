#include "mmpm/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <unordered_set>
#include <vector>

#include "mmpm/errors.hpp"

namespace mmpm {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

long long parse_int(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (errno != 0 || end == value.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    return v;
}

double parse_double(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (errno != 0 || end == value.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" + value + "'");
}

// Exact decimal form of a rational whose reduced denominator divides a
// power of ten (always the case for values parsed from decimals).
std::string decimal_str(const Rational& r) {
    std::string s = std::to_string(r.num / r.den);
    unsigned __int128 rem = r.num % r.den;
    if (rem == 0) return s;
    s += '.';
    for (int i = 0; i < 40 && rem != 0; ++i) {
        rem *= 10;
        s += static_cast<char>('0' + static_cast<std::uint64_t>(rem / r.den));
        rem %= r.den;
    }
    return s;
}

std::string double_str(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void PipelineConfig::validate() const {
    if (k_top < 1) throw ConfigError("k_top must be >= 1");
    if (clusters < 1) throw ConfigError("clusters must be >= 1");
    if (min_caption_df < 1) throw ConfigError("min_caption_df must be >= 1");
    if (min_gram_occ < 1) throw ConfigError("min_gram_occ must be >= 1");
    if (c_min.num == 0 || c_min.num > c_min.den)
        throw ConfigError("c_min must be in (0,1], got " + c_min.str());
    if (min_support_count < 1) throw ConfigError("min_support_count must be >= 1");
    if (max_itemset_len < 3) throw ConfigError("max_itemset_len must be >= 3");
    if (blacklist_threshold.num > blacklist_threshold.den)
        throw ConfigError("blacklist_threshold must be in [0,1], got " +
                          blacklist_threshold.str());
    if (kmeans_max_iters < 1) throw ConfigError("kmeans_max_iters must be >= 1");
    if (train_lr <= 0.0) throw ConfigError("train_lr must be positive");
    if (train_l2 < 0.0) throw ConfigError("train_l2 must be non-negative");
    if (train_epochs < 1) throw ConfigError("train_epochs must be >= 1");
    if (image_side < 1 || patch_side < 1 || stride < 1 || pad < 0)
        throw ConfigError("geometry values must be positive (pad may be zero)");
}

namespace {

struct KeyHandler {
    const char* key;
    std::function<void(PipelineConfig&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

const std::vector<KeyHandler>& handlers() {
    static const std::vector<KeyHandler> h = {
        {"k_top", [](PipelineConfig& c, const std::string& v) { c.k_top = static_cast<int>(parse_int("k_top", v)); },
         [](const PipelineConfig& c) { return std::to_string(c.k_top); }},
        {"clusters", [](PipelineConfig& c, const std::string& v) { c.clusters = static_cast<int>(parse_int("clusters", v)); },
         [](const PipelineConfig& c) { return std::to_string(c.clusters); }},
        {"min_caption_df", [](PipelineConfig& c, const std::string& v) { c.min_caption_df = static_cast<int>(parse_int("min_caption_df", v)); },
         [](const PipelineConfig& c) { return std::to_string(c.min_caption_df); }},
        {"min_gram_occ", [](PipelineConfig& c, const std::string& v) { c.min_gram_occ = static_cast<int>(parse_int("min_gram_occ", v)); },
         [](const PipelineConfig& c) { return std::to_string(c.min_gram_occ); }},
        {"c_min", [](PipelineConfig& c, const std::string& v) { c.c_min = Rational::from_decimal(v); },
         [](const PipelineConfig& c) { return decimal_str(c.c_min); }},
        {"min_support_count", [](PipelineConfig& c, const std::string& v) {
             const long long n = parse_int("min_support_count", v);
             if (n < 0) throw ConfigError("min_support_count must be >= 1");
             c.min_support_count = static_cast<std::uint64_t>(n);
         },
         [](const PipelineConfig& c) { return std::to_string(c.min_support_count); }},
        {"max_itemset_len", [](PipelineConfig& c, const std::string& v) { c.max_itemset_len = static_cast<int>(parse_int("max_itemset_len", v)); },
         [](const PipelineConfig& c) { return std::to_string(c.max_itemset_len); }},
        {"blacklist_threshold", [](PipelineConfig& c, const std::string& v) { c.blacklist_threshold = Rational::from_decimal(v); },
         [](const PipelineConfig& c) { return decimal_str(c.blacklist_threshold); }},
        {"seed_kmeans", [](PipelineConfig& c, const std::string& v) {
             const long long n = parse_int("seed_kmeans", v);
             if (n < 0) throw ConfigError("seed_kmeans must be >= 0");
             c.seed_kmeans = static_cast<std::uint64_t>(n);
         },
         [](const PipelineConfig& c) { return std::to_string(c.seed_kmeans); }},
        {"kmeans_max_iters", [](PipelineConfig& c, const std::string& v) { c.kmeans_max_iters = static_cast<int>(parse_int("kmeans_max_iters", v)); },
         [](const PipelineConfig& c) { return std::to_string(c.kmeans_max_iters); }},
        {"seed_train", [](PipelineConfig& c, const std::string& v) {
             const long long n = parse_int("seed_train", v);
             if (n < 0) throw ConfigError("seed_train must be >= 0");
             c.seed_train = static_cast<std::uint64_t>(n);
         },
         [](const PipelineConfig& c) { return std::to_string(c.seed_train); }},
        {"train_lr", [](PipelineConfig& c, const std::string& v) { c.train_lr = parse_double("train_lr", v); },
         [](const PipelineConfig& c) { return double_str(c.train_lr); }},
        {"train_l2", [](PipelineConfig& c, const std::string& v) { c.train_l2 = parse_double("train_l2", v); },
         [](const PipelineConfig& c) { return double_str(c.train_l2); }},
        {"train_epochs", [](PipelineConfig& c, const std::string& v) { c.train_epochs = static_cast<int>(parse_int("train_epochs", v)); },
         [](const PipelineConfig& c) { return std::to_string(c.train_epochs); }},
        {"name_dedup_captions", [](PipelineConfig& c, const std::string& v) { c.name_dedup_captions = parse_bool("name_dedup_captions", v); },
         [](const PipelineConfig& c) { return c.name_dedup_captions ? "true" : "false"; }},
        {"support_per_document", [](PipelineConfig& c, const std::string& v) { c.support_per_document = parse_bool("support_per_document", v); },
         [](const PipelineConfig& c) { return c.support_per_document ? "true" : "false"; }},
        {"image_side", [](PipelineConfig& c, const std::string& v) { c.image_side = static_cast<int>(parse_int("image_side", v)); },
         [](const PipelineConfig& c) { return std::to_string(c.image_side); }},
        {"patch_side", [](PipelineConfig& c, const std::string& v) { c.patch_side = static_cast<int>(parse_int("patch_side", v)); },
         [](const PipelineConfig& c) { return std::to_string(c.patch_side); }},
        {"stride", [](PipelineConfig& c, const std::string& v) { c.stride = static_cast<int>(parse_int("stride", v)); },
         [](const PipelineConfig& c) { return std::to_string(c.stride); }},
        {"pad", [](PipelineConfig& c, const std::string& v) { c.pad = static_cast<int>(parse_int("pad", v)); },
         [](const PipelineConfig& c) { return std::to_string(c.pad); }},
    };
    return h;
}

}  // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");

    PipelineConfig cfg;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config '" + path.string() + "' line " + std::to_string(line_no) +
                              ": expected key=value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        auto it = std::find_if(handlers().begin(), handlers().end(),
                               [&](const KeyHandler& h) { return key == h.key; });
        if (it == handlers().end())
            throw ConfigError("config '" + path.string() + "' line " + std::to_string(line_no) +
                              ": unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw ConfigError("config '" + path.string() + "' line " + std::to_string(line_no) +
                              ": duplicate key '" + key + "'");
        it->set(cfg, value);
    }
    cfg.validate();
    return cfg;
}

void save_config(const std::filesystem::path& path, const PipelineConfig& cfg) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write config '" + path.string() + "'");
    for (const KeyHandler& h : handlers()) out << h.key << "=" << h.get(cfg) << '\n';
    if (!out) throw ConfigError("failed writing config '" + path.string() + "'");
}

}  // namespace mmpm
