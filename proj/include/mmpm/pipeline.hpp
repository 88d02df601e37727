#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmpm/config.hpp"
#include "mmpm/synthgen.hpp"
#include "mmpm/transactions.hpp"

namespace mmpm {

// Fixed artifact names under one workspace directory. Every stage reads the
// artifacts of earlier stages and owns exactly the files it writes, so any
// stage can be re-run in place.
struct Workspace {
    std::filesystem::path root;

    std::filesystem::path config_file() const { return root / "mmpm.conf"; }
    std::filesystem::path corpus_file() const { return root / "corpus.jsonl"; }
    std::filesystem::path ontology_file() const { return root / "ontology.json"; }
    std::filesystem::path embeddings_file() const { return root / "embeddings.txt"; }
    std::filesystem::path features_dir() const { return root / "features"; }
    std::filesystem::path documents_file() const { return root / "documents.json"; }
    std::filesystem::path cluster_file() const { return root / "clustermodel.json"; }
    std::filesystem::path transactions_file() const { return root / "transactions.bin"; }
    std::filesystem::path patterns_file() const { return root / "patterns.json"; }
    std::filesystem::path names_file() const { return root / "names.json"; }
    std::filesystem::path model_file() const { return root / "model.json"; }
    std::filesystem::path activations_dir() const { return root / "activations"; }
    std::filesystem::path report_file() const { return root / "report.html"; }
    std::filesystem::path counts_file() const { return root / "pattern_counts.json"; }
};

// The workspace config when present, else defaults; an explicit path must
// exist. Either way the result is validated.
PipelineConfig resolve_config(const Workspace& ws,
                              const std::optional<std::filesystem::path>& explicit_path);

SynthSummary run_synth(const Workspace& ws, const SynthConfig& config);

struct IngestStats {
    std::size_t documents = 0;
    std::size_t with_events = 0;
    std::size_t skipped = 0;
    int events = 0;
    std::vector<std::string> warnings;  // one per skipped record
};
// corpus.jsonl + ontology.json + features/ -> documents.json. strict=false
// skips malformed records and reports them instead of aborting.
IngestStats run_ingest(const Workspace& ws, const PipelineConfig& cfg, bool strict);

struct ClusterStats {
    std::size_t vocabulary = 0;
    std::size_t embedded = 0;
    std::size_t dropped = 0;
    int k = 0;
    std::size_t passes = 0;
    double objective = 0.0;
};
// documents.json + embeddings.txt -> clustermodel.json.
ClusterStats run_cluster(const Workspace& ws, const PipelineConfig& cfg);

struct TransactStats {
    std::size_t documents = 0;
    std::size_t emitting = 0;  // documents that produced transactions
    std::size_t transactions = 0;
    ItemSpace space;
};
// documents.json + clustermodel.json + features/ -> transactions.bin.
TransactStats run_transact(const Workspace& ws, const PipelineConfig& cfg);

struct MineStats {
    std::size_t transactions = 0;
    std::size_t patterns = 0;
    bool maximal_only = false;
};
// transactions.bin -> patterns.json (names empty until `name` runs).
MineStats run_mine(const Workspace& ws, const PipelineConfig& cfg, bool maximal_only);

struct NameStats {
    std::size_t patterns = 0;
    std::size_t named = 0;
    std::size_t blacklist_fallbacks = 0;
    std::size_t unnamed = 0;
};
// patterns.json + transactions.bin + documents.json + clustermodel.json ->
// names.json, and patterns.json rewritten with names filled in.
NameStats run_name(const Workspace& ws, const PipelineConfig& cfg);

struct ClassifyStats {
    std::size_t documents = 0;
    std::size_t samples = 0;  // one per (document, event) pair
    int classes = 0;
    std::size_t bank = 0;
    double final_loss = 0.0;
    double train_accuracy = 0.0;
};
// patterns.json + documents.json + features/ -> model.json + activations/.
ClassifyStats run_classify(const Workspace& ws, const PipelineConfig& cfg);

struct ReportStats {
    std::size_t patterns = 0;
    int events = 0;
    std::vector<std::size_t> per_event;  // indexed by event id
};
// patterns.json + transactions.bin + documents.json -> report.html +
// pattern_counts.json; patterns.json is re-emitted as the consolidated copy.
ReportStats run_report(const Workspace& ws, const PipelineConfig& cfg);

}  // namespace mmpm
