#include "mmpm/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mmpm/corpus.hpp"
#include "mmpm/embeddings.hpp"
#include "mmpm/errors.hpp"
#include "mmpm/midlevel.hpp"
#include "mmpm/miner.hpp"
#include "mmpm/namer.hpp"
#include "mmpm/text.hpp"
#include "mmpm/visual.hpp"

namespace mmpm {

using nlohmann::json;

namespace {

void require_artifact(const std::filesystem::path& path, const Workspace& ws, const char* hint) {
    if (!std::filesystem::exists(path))
        throw DataError("missing " + path.filename().string() + " in workspace '" +
                        ws.root.string() + "': run `" + hint + "` first");
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string escape_html(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string int_list(const std::vector<int>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(v[i]);
    }
    return out + "]";
}

}  // namespace

PipelineConfig resolve_config(const Workspace& ws,
                              const std::optional<std::filesystem::path>& explicit_path) {
    if (explicit_path) return load_config(*explicit_path);
    if (std::filesystem::exists(ws.config_file())) return load_config(ws.config_file());
    PipelineConfig cfg;
    cfg.validate();
    return cfg;
}

SynthSummary run_synth(const Workspace& ws, const SynthConfig& config) {
    return generate(config, ws.root);
}

IngestStats run_ingest(const Workspace& ws, const PipelineConfig& cfg, bool strict) {
    (void)cfg;
    require_artifact(ws.corpus_file(), ws, "synth");
    require_artifact(ws.ontology_file(), ws, "synth");
    require_artifact(ws.features_dir(), ws, "synth");

    EventOntology ontology = EventOntology::from_json_file(ws.ontology_file());
    ontology.validate();

    CorpusLoadReport report;
    Corpus corpus = load_corpus(ws.corpus_file(), ws.features_dir(), {strict}, &report);

    IngestedCorpus ingested;
    ingested.ontology = std::move(ontology);
    ingested.dims = corpus.features.dims();
    ingested.features_root = "features";
    ingested.documents = std::move(corpus.documents);
    ingested.witnesses.reserve(ingested.documents.size());

    IngestStats stats;
    for (Document& doc : ingested.documents) {
        doc.events = assign_events(doc, ingested.ontology);
        ingested.witnesses.push_back(assign_events_witnessed(doc, ingested.ontology));
        if (!doc.events.empty()) ++stats.with_events;
    }
    save_documents_json(ws.documents_file(), ingested);

    stats.documents = ingested.documents.size();
    stats.skipped = report.skipped_lines.size();
    stats.events = ingested.ontology.size();
    stats.warnings = std::move(report.warnings);
    return stats;
}

ClusterStats run_cluster(const Workspace& ws, const PipelineConfig& cfg) {
    require_artifact(ws.documents_file(), ws, "ingest");
    require_artifact(ws.embeddings_file(), ws, "synth");

    const IngestedCorpus ingested = load_documents_json(ws.documents_file());
    const TextVocabulary vocab =
        build_vocabulary(ingested.documents, StopLists::standard(), cfg.min_caption_df);
    const EmbeddingTable table = load_embeddings(ws.embeddings_file());
    const ClusterModel model =
        kmeans_cluster(vocab, table, cfg.clusters, cfg.seed_kmeans, cfg.kmeans_max_iters);
    save_cluster_model(model, ws.cluster_file().string());

    ClusterStats stats;
    stats.vocabulary = vocab.words.size();
    stats.embedded = model.words.size();
    stats.dropped = model.dropped_words.size();
    stats.k = model.k;
    stats.passes = model.objective_log.size();
    stats.objective = model.objective_log.empty() ? 0.0 : model.objective_log.back();
    return stats;
}

TransactStats run_transact(const Workspace& ws, const PipelineConfig& cfg) {
    require_artifact(ws.documents_file(), ws, "ingest");
    require_artifact(ws.cluster_file(), ws, "cluster");

    const IngestedCorpus ingested = load_documents_json(ws.documents_file());
    const ClusterModel model = load_cluster_model(ws.cluster_file().string());
    const FeatureStore features(ws.root / ingested.features_root, ingested.dims);

    ItemSpace space;
    space.visual_count = ingested.dims.f;
    space.text_count = model.k;
    space.event_count = ingested.ontology.size();
    space.validate();

    TransactionStore store;
    store.space = space;
    TransactStats stats;
    stats.documents = ingested.documents.size();
    std::uint64_t next_tx = 0;
    for (const Document& doc : ingested.documents) {
        if (doc.events.empty()) continue;  // fuses to nothing; skip the map load
        const FeatureMap map = features.load(doc.feature_ref);
        const std::vector<VisualItemset> patches = visual_itemsets(map, cfg.k_top);
        const TextItemset text = caption_to_itemset(doc, model);
        std::vector<Transaction> fused = fuse(doc, patches, text, space, next_tx);
        if (!fused.empty()) ++stats.emitting;
        next_tx += fused.size();
        for (Transaction& tx : fused) store.transactions.push_back(std::move(tx));
    }
    save_transactions(ws.transactions_file(), store);

    stats.transactions = store.transactions.size();
    stats.space = space;
    return stats;
}

MineStats run_mine(const Workspace& ws, const PipelineConfig& cfg, bool maximal_only) {
    require_artifact(ws.transactions_file(), ws, "transact");

    const TransactionStore store = load_transactions(ws.transactions_file());
    MiningConfig mining;
    mining.c_min = cfg.c_min;
    mining.min_support_count = cfg.min_support_count;
    mining.max_itemset_len = cfg.max_itemset_len;
    mining.space = store.space;
    mining.support_per_document = cfg.support_per_document;

    std::vector<Pattern> patterns = mine(store, mining);
    if (maximal_only) patterns = filter_maximal(patterns);
    save_patterns(ws.patterns_file(), patterns);

    MineStats stats;
    stats.transactions = store.transactions.size();
    stats.patterns = patterns.size();
    stats.maximal_only = maximal_only;
    return stats;
}

NameStats run_name(const Workspace& ws, const PipelineConfig& cfg) {
    require_artifact(ws.patterns_file(), ws, "mine");
    require_artifact(ws.transactions_file(), ws, "transact");
    require_artifact(ws.documents_file(), ws, "ingest");
    require_artifact(ws.cluster_file(), ws, "cluster");

    std::vector<Pattern> patterns = load_patterns(ws.patterns_file());
    const TransactionStore store = load_transactions(ws.transactions_file());
    const IngestedCorpus ingested = load_documents_json(ws.documents_file());
    const ClusterModel model = load_cluster_model(ws.cluster_file().string());
    const StopLists& stops = StopLists::standard();

    const NgramStats grams = build_ngram_stats(ingested.documents, stops, cfg.min_gram_occ);
    NamingOptions options;
    options.dedup_captions = cfg.name_dedup_captions;
    options.blacklist_threshold = cfg.blacklist_threshold;
    apply_names(patterns, grams, model, ingested.documents, store, stops, options);
    save_patterns(ws.patterns_file(), patterns);

    NameStats stats;
    stats.patterns = patterns.size();
    json entries = json::array();
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        const Pattern& p = patterns[i];
        if (p.name) ++stats.named;
        if (p.name_blacklisted) ++stats.blacklist_fallbacks;
        json entry{{"pattern", i},
                   {"event", p.event},
                   {"event_name", ingested.ontology.events[static_cast<std::size_t>(p.event)].name},
                   {"score", p.name_score},
                   {"blacklisted", p.name_blacklisted}};
        entry["name"] = p.name ? json(*p.name) : json(nullptr);
        entries.push_back(std::move(entry));
    }
    stats.unnamed = stats.patterns - stats.named;
    write_json(ws.names_file(), json{{"names", std::move(entries)}});
    return stats;
}

ClassifyStats run_classify(const Workspace& ws, const PipelineConfig& cfg) {
    require_artifact(ws.patterns_file(), ws, "mine");
    require_artifact(ws.documents_file(), ws, "ingest");

    const std::vector<Pattern> patterns = load_patterns(ws.patterns_file());
    const IngestedCorpus ingested = load_documents_json(ws.documents_file());
    const PatternBank bank = PatternBank::from_patterns(patterns);
    const FeatureStore features(ws.root / ingested.features_root, ingested.dims);
    std::filesystem::create_directories(ws.activations_dir());

    std::vector<ActivationVector> samples;
    std::vector<int> labels;
    for (const Document& doc : ingested.documents) {
        const FeatureMap map = features.load(doc.feature_ref);
        const std::vector<VisualItemset> patches = visual_itemsets(map, cfg.k_top);
        const ActivationVector av = activations(doc.doc_id, patches, bank);

        FeatureMap bits = FeatureMap::zero(1, 1, static_cast<int>(bank.size()));
        for (int j = 0; j < av.bits.size(); ++j) bits.cells(0, j) = static_cast<float>(av.bits(j));
        write_feature_map(ws.activations_dir() / (doc.doc_id + ".bin"), bits);

        for (int event : doc.events) {
            samples.push_back(av);
            labels.push_back(event);
        }
    }

    TrainOptions options;
    options.lr = cfg.train_lr;
    options.l2 = cfg.train_l2;
    options.epochs = cfg.train_epochs;
    options.seed = cfg.seed_train;
    const SoftmaxModel model = train_softmax(samples, labels, ingested.ontology.size(), options);
    save_classifier(ws.model_file(), {model, bank, options});

    ClassifyStats stats;
    stats.documents = ingested.documents.size();
    stats.samples = samples.size();
    stats.classes = ingested.ontology.size();
    stats.bank = bank.size();
    stats.final_loss = model.train_log.empty() ? 0.0 : model.train_log.back();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (predict(model, samples[i]).event == labels[i]) ++hits;
    stats.train_accuracy = samples.empty() ? 0.0 : static_cast<double>(hits) / samples.size();
    return stats;
}

ReportStats run_report(const Workspace& ws, const PipelineConfig& cfg) {
    require_artifact(ws.patterns_file(), ws, "mine");
    require_artifact(ws.transactions_file(), ws, "transact");
    require_artifact(ws.documents_file(), ws, "ingest");

    const std::vector<Pattern> patterns = load_patterns(ws.patterns_file());
    const TransactionStore store = load_transactions(ws.transactions_file());
    const IngestedCorpus ingested = load_documents_json(ws.documents_file());
    const PatchGeometry geom{cfg.image_side, cfg.patch_side, cfg.stride, cfg.pad};

    std::unordered_map<std::uint64_t, const Transaction*> tx_of;
    tx_of.reserve(store.transactions.size());
    for (const Transaction& tx : store.transactions) tx_of.emplace(tx.tx_id, &tx);

    const int event_count = ingested.ontology.size();
    std::vector<std::size_t> per_event(static_cast<std::size_t>(event_count), 0);
    for (const Pattern& p : patterns) ++per_event[static_cast<std::size_t>(p.event)];

    const auto event_name = [&](int e) {
        return escape_html(ingested.ontology.events[static_cast<std::size_t>(e)].name);
    };

    std::string html;
    html += "<!doctype html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
    html += "<title>Event pattern report</title>\n<style>\n";
    html += "body { font-family: sans-serif; max-width: 60rem; margin: 2rem auto; }\n";
    html += "table { border-collapse: collapse; margin: 0.5rem 0; }\n";
    html += "th, td { border: 1px solid #999; padding: 0.25rem 0.7rem; text-align: left; }\n";
    html += ".card { border: 1px solid #bbb; border-radius: 6px; padding: 0.7rem 1rem; "
            "margin: 0.9rem 0; }\n";
    html += ".card h3 { margin: 0 0 0.3rem 0; }\n.meta { color: #444; }\n";
    html += "ul.members { margin: 0.3rem 0 0 1.2rem; }\n";
    html += "</style>\n</head>\n<body>\n<h1>Event pattern report</h1>\n";
    html += "<p>" + std::to_string(patterns.size()) + " pattern" +
            (patterns.size() == 1 ? "" : "s") + " across " + std::to_string(event_count) +
            " events, mined from " + std::to_string(store.transactions.size()) +
            " transactions.</p>\n";

    html += "<h2>Patterns per event</h2>\n<table>\n<tr><th>event</th><th>name</th>"
            "<th>patterns</th></tr>\n";
    for (int e = 0; e < event_count; ++e)
        html += "<tr><td>" + std::to_string(e) + "</td><td>" + event_name(e) + "</td><td>" +
                std::to_string(per_event[static_cast<std::size_t>(e)]) + "</td></tr>\n";
    html += "</table>\n";

    html += "<h2>Patterns</h2>\n";
    if (patterns.empty()) {
        html += "<p>No patterns were mined at the configured thresholds.</p>\n";
    } else {
        const double total = static_cast<double>(store.transactions.size());
        for (std::size_t i = 0; i < patterns.size(); ++i) {
            const Pattern& p = patterns[i];
            const std::string title =
                p.name ? escape_html(*p.name) : std::string("(unnamed)");
            html += "<div class=\"card\">\n<h3>#" + std::to_string(i) + " " + title + "</h3>\n";
            html += "<p class=\"meta\">event " + event_name(p.event) + " &middot; support " +
                    std::to_string(p.support_count) + " (" +
                    fixed4(total > 0 ? static_cast<double>(p.support_count) / total : 0.0) +
                    ") &middot; confidence " + fixed4(p.confidence);
            if (p.name) html += " &middot; name score " + fixed4(p.name_score);
            if (p.name_blacklisted) html += " &middot; blacklist fallback";
            html += "</p>\n";
            html += "<p>visual items " + int_list(p.visual_items) + " &middot; text clusters " +
                    int_list(p.text_items) + "</p>\n";

            const std::size_t shown = std::min<std::size_t>(p.member_tx.size(), 8);
            html += "<p>members: " + std::to_string(p.member_tx.size());
            if (shown < p.member_tx.size())
                html += " (showing " + std::to_string(shown) + ")";
            html += "</p>\n<ul class=\"members\">\n";
            for (std::size_t m = 0; m < shown; ++m) {
                const auto it = tx_of.find(p.member_tx[m]);
                if (it == tx_of.end())
                    throw DataError("pattern references unknown transaction " +
                                    std::to_string(p.member_tx[m]) +
                                    "; re-run `mine` after `transact`");
                const Transaction& tx = *it->second;
                const RoiRect roi = cell_to_roi(tx.cell, geom);
                html += "<li>" + escape_html(tx.doc_id) + " cell (" + std::to_string(tx.cell.row) +
                        "," + std::to_string(tx.cell.col) + ") px [" + std::to_string(roi.x0) +
                        "," + std::to_string(roi.x1) + ")&times;[" + std::to_string(roi.y0) + "," +
                        std::to_string(roi.y1) + ")</li>\n";
            }
            html += "</ul>\n</div>\n";
        }
    }
    html += "</body>\n</html>\n";

    {
        std::ofstream out(ws.report_file(), std::ios::trunc);
        if (!out) throw DataError("cannot write '" + ws.report_file().string() + "'");
        out << html;
        if (!out) throw DataError("failed writing '" + ws.report_file().string() + "'");
    }

    json event_rows = json::array();
    for (int e = 0; e < event_count; ++e)
        event_rows.push_back(
            {{"event", e},
             {"name", ingested.ontology.events[static_cast<std::size_t>(e)].name},
             {"patterns", per_event[static_cast<std::size_t>(e)]}});
    write_json(ws.counts_file(), json{{"events", std::move(event_rows)},
                                      {"total_patterns", patterns.size()},
                                      {"transactions", store.transactions.size()}});

    save_patterns(ws.patterns_file(), patterns);  // consolidated copy

    ReportStats stats;
    stats.patterns = patterns.size();
    stats.events = event_count;
    stats.per_event = std::move(per_event);
    return stats;
}

}  // namespace mmpm
