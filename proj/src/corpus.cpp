#include "mmpm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "mmpm/errors.hpp"

namespace mmpm {

using nlohmann::json;

namespace {

bool has_whitespace(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

bool has_upper_ascii(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return c >= 'A' && c <= 'Z'; });
}

json read_json_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw DataError(std::string("cannot open ") + what + " '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(std::string(what) + " '" + path.string() + "': " + e.what());
    }
    return j;
}

void write_json_file(const std::filesystem::path& path, const json& j, const char* what) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError(std::string("cannot write ") + what + " '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw DataError(std::string("failed writing ") + what + " '" + path.string() + "'");
}

}  // namespace

void EventOntology::validate() const {
    for (std::size_t i = 0; i < events.size(); ++i) {
        const EventDef& e = events[i];
        if (e.id != static_cast<int>(i))
            throw DataError("ontology: event ids must be dense 0..E-1, got id " +
                            std::to_string(e.id) + " at position " + std::to_string(i));
        if (e.triggers.empty())
            throw DataError("ontology: event '" + e.name + "' has no triggers");
        std::unordered_set<std::string> seen;
        for (const std::string& t : e.triggers) {
            if (t.empty() || has_whitespace(t) || has_upper_ascii(t))
                throw DataError("ontology: event '" + e.name + "' has invalid trigger '" + t +
                                "' (must be nonempty lowercase without whitespace)");
            if (!seen.insert(t).second)
                throw DataError("ontology: event '" + e.name + "' repeats trigger '" + t + "'");
        }
    }
}

EventOntology EventOntology::from_json_file(const std::filesystem::path& path) {
    const json j = read_json_file(path, "ontology");
    if (!j.is_array()) throw DataError("ontology '" + path.string() + "': expected a JSON array");
    EventOntology ontology;
    for (const json& entry : j) {
        EventDef def;
        try {
            def.id = entry.at("id").get<int>();
            def.name = entry.at("name").get<std::string>();
            def.triggers = entry.at("triggers").get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw DataError("ontology '" + path.string() + "': " + e.what());
        }
        ontology.events.push_back(std::move(def));
    }
    std::sort(ontology.events.begin(), ontology.events.end(),
              [](const EventDef& a, const EventDef& b) { return a.id < b.id; });
    ontology.validate();
    return ontology;
}

void EventOntology::save_json(const std::filesystem::path& path) const {
    json j = json::array();
    for (const EventDef& e : events)
        j.push_back({{"id", e.id}, {"name", e.name}, {"triggers", e.triggers}});
    write_json_file(path, j, "ontology");
}

std::vector<std::string> tokenize(std::string_view caption) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : caption) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            current.push_back(static_cast<char>(c));
        } else if (c >= 'A' && c <= 'Z') {
            current.push_back(static_cast<char>(c - 'A' + 'a'));
        } else {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

bool token_matches_trigger(std::string_view token, std::string_view trigger) {
    return token.size() >= trigger.size() && token.substr(0, trigger.size()) == trigger;
}

std::vector<int> assign_events(const Document& doc, const EventOntology& ontology) {
    std::vector<int> out;
    for (const EventWitness& w : assign_events_witnessed(doc, ontology)) out.push_back(w.event);
    return out;
}

std::vector<EventWitness> assign_events_witnessed(const Document& doc,
                                                  const EventOntology& ontology) {
    std::vector<EventWitness> out;
    for (const EventDef& event : ontology.events) {
        bool found = false;
        for (const std::string& token : doc.tokens) {
            for (const std::string& trigger : event.triggers) {
                if (token_matches_trigger(token, trigger)) {
                    out.push_back({event.id, token, trigger});
                    found = true;
                    break;
                }
            }
            if (found) break;
        }
    }
    return out;
}

FeatureMap FeatureStore::load(const std::string& feature_ref) const {
    FeatureMap map = read_feature_map(root_ / feature_ref);
    if (!(map.dims() == dims_))
        throw DataError("feature map '" + feature_ref + "': dimensions " + map.dims().str() +
                        " do not match corpus dimensions " + dims_.str());
    return map;
}

Corpus load_corpus(const std::filesystem::path& jsonl_path,
                   const std::filesystem::path& features_dir, const CorpusLoadOptions& options,
                   CorpusLoadReport* report) {
    std::ifstream in(jsonl_path);
    if (!in) throw DataError("cannot open corpus '" + jsonl_path.string() + "'");

    Corpus corpus;
    std::unordered_set<std::string> seen_ids;
    FeatureDims dims{};
    bool have_dims = false;

    auto record_error = [&](std::size_t line_no, const std::string& message) {
        const std::string full =
            "corpus '" + jsonl_path.string() + "' line " + std::to_string(line_no) + ": " + message;
        if (options.strict) throw DataError(full);
        if (report) {
            report->warnings.push_back(full);
            report->skipped_lines.push_back(line_no);
        }
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;

        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            record_error(line_no, std::string("malformed JSON: ") + e.what());
            continue;
        }

        Document doc;
        try {
            doc.doc_id = j.at("doc_id").get<std::string>();
            doc.caption_raw = j.at("caption").get<std::string>();
            doc.feature_ref = j.at("features").get<std::string>();
        } catch (const json::exception& e) {
            record_error(line_no, std::string("missing or invalid field: ") + e.what());
            continue;
        }
        if (doc.doc_id.empty()) {
            record_error(line_no, "empty doc_id");
            continue;
        }
        if (!seen_ids.insert(doc.doc_id).second) {
            record_error(line_no, "duplicate doc_id '" + doc.doc_id + "'");
            continue;
        }

        FeatureDims file_dims;
        try {
            file_dims = read_feature_dims(features_dir / doc.feature_ref);
        } catch (const DataError& e) {
            record_error(line_no, e.what());
            continue;
        }
        if (!have_dims) {
            dims = file_dims;
            have_dims = true;
        } else if (!(file_dims == dims)) {
            // Dimension mismatch aborts even in skip-and-report mode.
            throw DataError("corpus '" + jsonl_path.string() + "' line " +
                            std::to_string(line_no) + ": feature map '" + doc.feature_ref +
                            "' has dimensions " + file_dims.str() + ", corpus uses " + dims.str());
        }

        doc.tokens = tokenize(doc.caption_raw);
        corpus.documents.push_back(std::move(doc));
    }

    corpus.features = FeatureStore(features_dir, dims);
    return corpus;
}

void save_documents_json(const std::filesystem::path& path, const IngestedCorpus& corpus) {
    json docs = json::array();
    for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
        const Document& d = corpus.documents[i];
        json witnesses = json::array();
        if (i < corpus.witnesses.size()) {
            for (const EventWitness& w : corpus.witnesses[i])
                witnesses.push_back(
                    {{"event", w.event}, {"token", w.token}, {"trigger", w.trigger}});
        }
        docs.push_back({{"doc_id", d.doc_id},
                        {"caption", d.caption_raw},
                        {"tokens", d.tokens},
                        {"events", d.events},
                        {"witnesses", std::move(witnesses)},
                        {"features", d.feature_ref}});
    }
    json ontology = json::array();
    for (const EventDef& e : corpus.ontology.events)
        ontology.push_back({{"id", e.id}, {"name", e.name}, {"triggers", e.triggers}});

    const json j = {{"feature_dims", {{"h", corpus.dims.h}, {"w", corpus.dims.w}, {"f", corpus.dims.f}}},
                    {"features_root", corpus.features_root},
                    {"ontology", std::move(ontology)},
                    {"documents", std::move(docs)}};
    write_json_file(path, j, "documents");
}

IngestedCorpus load_documents_json(const std::filesystem::path& path) {
    const json j = read_json_file(path, "documents");
    IngestedCorpus corpus;
    try {
        corpus.dims.h = j.at("feature_dims").at("h").get<int>();
        corpus.dims.w = j.at("feature_dims").at("w").get<int>();
        corpus.dims.f = j.at("feature_dims").at("f").get<int>();
        corpus.features_root = j.at("features_root").get<std::string>();
        for (const json& entry : j.at("ontology")) {
            EventDef def;
            def.id = entry.at("id").get<int>();
            def.name = entry.at("name").get<std::string>();
            def.triggers = entry.at("triggers").get<std::vector<std::string>>();
            corpus.ontology.events.push_back(std::move(def));
        }
        for (const json& entry : j.at("documents")) {
            Document doc;
            doc.doc_id = entry.at("doc_id").get<std::string>();
            doc.caption_raw = entry.at("caption").get<std::string>();
            doc.tokens = entry.at("tokens").get<std::vector<std::string>>();
            doc.events = entry.at("events").get<std::vector<int>>();
            doc.feature_ref = entry.at("features").get<std::string>();
            std::vector<EventWitness> witnesses;
            for (const json& w : entry.at("witnesses"))
                witnesses.push_back({w.at("event").get<int>(), w.at("token").get<std::string>(),
                                     w.at("trigger").get<std::string>()});
            corpus.documents.push_back(std::move(doc));
            corpus.witnesses.push_back(std::move(witnesses));
        }
    } catch (const json::exception& e) {
        throw DataError("documents '" + path.string() + "': " + e.what());
    }
    corpus.ontology.validate();
    return corpus;
}

}  // namespace mmpm
