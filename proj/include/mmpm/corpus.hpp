#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mmpm/featuremap.hpp"

namespace mmpm {

// One image-caption pair. Events are assigned weakly from caption triggers;
// a document with no events is kept for corpus statistics but produces no
// transactions.
struct Document {
    std::string doc_id;
    std::string caption_raw;
    std::vector<std::string> tokens;  // lowercase, no whitespace
    std::vector<int> events;          // sorted event ids, may be empty
    std::string feature_ref;          // path relative to the features root
};

struct EventDef {
    int id{0};
    std::string name;
    std::vector<std::string> triggers;  // lowercase, nonempty, deduplicated
};

struct EventOntology {
    std::vector<EventDef> events;  // dense ids 0..E-1, in id order

    int size() const { return static_cast<int>(events.size()); }
    void validate() const;  // throws DataError on a malformed ontology

    static EventOntology from_json_file(const std::filesystem::path& path);
    void save_json(const std::filesystem::path& path) const;
};

// Lowercases ASCII letters and splits on runs of non-alphanumeric bytes.
std::vector<std::string> tokenize(std::string_view caption);

// A token matches a trigger when it equals the trigger or has it as a prefix
// ("protesters" matches trigger "protest").
bool token_matches_trigger(std::string_view token, std::string_view trigger);

// Event ids whose trigger set matches some token; sorted, may be empty.
std::vector<int> assign_events(const Document& doc, const EventOntology& ontology);

// Audit record: the first (token, trigger) pair that assigned each event.
struct EventWitness {
    int event{0};
    std::string token;
    std::string trigger;
};
std::vector<EventWitness> assign_events_witnessed(const Document& doc,
                                                  const EventOntology& ontology);

// Feature-map accessor rooted at a directory, with corpus-wide dimensions
// fixed by the first map seen at load time.
class FeatureStore {
public:
    FeatureStore() = default;
    FeatureStore(std::filesystem::path root, FeatureDims dims)
        : root_(std::move(root)), dims_(dims) {}

    const FeatureDims& dims() const { return dims_; }
    const std::filesystem::path& root() const { return root_; }
    FeatureMap load(const std::string& feature_ref) const;

private:
    std::filesystem::path root_;
    FeatureDims dims_;
};

struct CorpusLoadOptions {
    bool strict{true};  // false = skip malformed records and report them
};

struct CorpusLoadReport {
    std::vector<std::string> warnings;       // one message per skipped record
    std::vector<std::size_t> skipped_lines;  // 1-based line numbers
};

struct Corpus {
    std::vector<Document> documents;
    FeatureStore features;
};

// Reads one JSON object per line ({doc_id, caption, features}), tokenizes
// captions, and validates every referenced feature file against the
// dimensions of the first. Event assignment is a separate step.
Corpus load_corpus(const std::filesystem::path& jsonl_path,
                   const std::filesystem::path& features_dir,
                   const CorpusLoadOptions& options = {},
                   CorpusLoadReport* report = nullptr);

// Ingested-corpus artifact: ontology + dimensions + documents with events
// and witnesses, serialized as one JSON file.
struct IngestedCorpus {
    EventOntology ontology;
    FeatureDims dims;
    std::string features_root;  // relative to the workspace
    std::vector<Document> documents;
    std::vector<std::vector<EventWitness>> witnesses;  // parallel to documents
};

void save_documents_json(const std::filesystem::path& path, const IngestedCorpus& corpus);
IngestedCorpus load_documents_json(const std::filesystem::path& path);

}  // namespace mmpm
