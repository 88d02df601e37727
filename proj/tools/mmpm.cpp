#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mmpm/errors.hpp"
#include "mmpm/pipeline.hpp"

namespace {

std::filesystem::path resolve_workspace(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("MMPM_WORKSPACE"); env != nullptr && *env != '\0')
        return env;
    return "workspace";
}

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mmpm: mine, name, and classify event-specific multimodal patterns"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string workspace_flag;
    std::string config_flag;
    int jobs = 1;
    app.add_option("-w,--workspace", workspace_flag,
                   "workspace directory (default: $MMPM_WORKSPACE, else ./workspace)");
    app.add_option("-c,--config", config_flag,
                   "config file (default: <workspace>/mmpm.conf when present)");
    app.add_option("-j,--jobs", jobs, "worker threads; stages are deterministic at any value")
        ->check(CLI::PositiveNumber);

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted patterns");
    std::uint64_t synth_seed = 7;
    int synth_total = 2000;
    double synth_noise_p = 0.01;
    int synth_plants = 5;
    int synth_carriers = 30;
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--total-tx", synth_total, "total documents (= transactions)")
        ->check(CLI::PositiveNumber);
    synth->add_option("--noise-p", synth_noise_p, "per-item noise inclusion probability")
        ->check(CLI::Range(0.0, 0.999));
    synth->add_option("--plants", synth_plants, "how many of the built-in plants to keep")
        ->check(CLI::Range(0, 5));
    synth->add_option("--carrier-count", synth_carriers, "carrier documents per plant")
        ->check(CLI::PositiveNumber);

    CLI::App* ingest = app.add_subcommand("ingest", "load corpus + ontology, assign events");
    bool skip_and_report = false;
    ingest->add_flag("--skip-and-report", skip_and_report,
                     "skip malformed corpus records instead of aborting");

    app.add_subcommand("cluster", "k-means word clusters over the caption vocabulary");
    app.add_subcommand("transact", "fuse patches, word clusters, and events into transactions");

    CLI::App* mine = app.add_subcommand("mine", "mine multimodal association rules");
    bool maximal_only = false;
    mine->add_flag("--maximal-only", maximal_only, "drop patterns subsumed by a superset pattern");

    app.add_subcommand("name", "tf-idf names for mined patterns");
    app.add_subcommand("classify", "train the pattern-activation event classifier");
    app.add_subcommand("report", "emit report.html and per-event pattern counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const mmpm::Workspace ws{resolve_workspace(workspace_flag)};
    const std::optional<std::filesystem::path> config_path =
        config_flag.empty() ? std::nullopt
                            : std::optional<std::filesystem::path>(config_flag);

    try {
        if (synth->parsed()) {
            mmpm::SynthConfig config = mmpm::default_synth_config();
            config.pipeline = mmpm::resolve_config(ws, config_path);
            config.seed = synth_seed;
            config.total_tx = synth_total;
            config.noise_p = synth_noise_p;
            config.plants.resize(static_cast<std::size_t>(synth_plants));
            for (mmpm::PlantSpec& plant : config.plants) plant.carrier_count = synth_carriers;
            const mmpm::SynthSummary s = mmpm::run_synth(ws, config);
            std::cout << "synth: " << s.documents << " documents (" << s.carriers
                      << " carriers), " << s.clusters << " clusters -> '" << ws.root.string()
                      << "'\n";
            return 0;
        }

        const mmpm::PipelineConfig cfg = mmpm::resolve_config(ws, config_path);
        if (ingest->parsed()) {
            const mmpm::IngestStats s = mmpm::run_ingest(ws, cfg, !skip_and_report);
            for (const std::string& w : s.warnings) std::cerr << "mmpm: skipped: " << w << "\n";
            std::cout << "ingest: " << s.documents << " documents, " << s.with_events
                      << " with events, " << s.events << " events, " << s.skipped
                      << " skipped\n";
        } else if (app.got_subcommand("cluster")) {
            const mmpm::ClusterStats s = mmpm::run_cluster(ws, cfg);
            std::cout << "cluster: vocabulary " << s.vocabulary << ", embedded " << s.embedded
                      << ", dropped " << s.dropped << ", k=" << s.k << ", " << s.passes
                      << " passes, objective " << fixed4(s.objective) << "\n";
        } else if (app.got_subcommand("transact")) {
            const mmpm::TransactStats s = mmpm::run_transact(ws, cfg);
            std::cout << "transact: " << s.transactions << " transactions from " << s.emitting
                      << "/" << s.documents << " documents (items " << s.space.visual_count
                      << "+" << s.space.text_count << "+" << s.space.event_count << ")\n";
        } else if (mine->parsed()) {
            const mmpm::MineStats s = mmpm::run_mine(ws, cfg, maximal_only);
            std::cout << "mine: " << s.patterns << " patterns from " << s.transactions
                      << " transactions" << (s.maximal_only ? " (maximal only)" : "") << "\n";
        } else if (app.got_subcommand("name")) {
            const mmpm::NameStats s = mmpm::run_name(ws, cfg);
            std::cout << "name: " << s.named << "/" << s.patterns << " named, "
                      << s.blacklist_fallbacks << " blacklist fallbacks, " << s.unnamed
                      << " unnamed\n";
        } else if (app.got_subcommand("classify")) {
            const mmpm::ClassifyStats s = mmpm::run_classify(ws, cfg);
            std::cout << "classify: " << s.samples << " samples, " << s.classes << " classes, "
                      << "bank " << s.bank << ", final loss " << fixed4(s.final_loss)
                      << ", train accuracy " << fixed4(s.train_accuracy) << "\n";
        } else if (app.got_subcommand("report")) {
            const mmpm::ReportStats s = mmpm::run_report(ws, cfg);
            std::cout << "report: " << s.patterns << " patterns across " << s.events
                      << " events -> '" << ws.report_file().string() << "'\n";
        }
    } catch (const mmpm::ConfigError& e) {
        std::cerr << "mmpm: config error: " << e.what() << "\n";
        return 2;
    } catch (const mmpm::DataError& e) {
        std::cerr << "mmpm: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "mmpm: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
