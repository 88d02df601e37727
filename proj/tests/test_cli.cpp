#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mmpm/featuremap.hpp"
#include "testutil.hpp"

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

// Runs the installed CLI through the shell, capturing exit code and both
// streams. `env` is a VAR=value prefix for the child only.
RunResult run_cli(const TempDir& scratch, const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const std::string tag = std::to_string(counter++);
    const std::filesystem::path out = scratch / ("cli_out_" + tag);
    const std::filesystem::path err = scratch / ("cli_err_" + tag);
    const std::string cmd = (env.empty() ? "" : env + " ") + std::string(MMPM_CLI_PATH) + " " +
                            args + " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
    r.out = read_text(out);
    r.err = read_text(err);
    return r;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("cli usage and parse errors exit 1, help exits 0") {
    TempDir tmp;
    const RunResult help = run_cli(tmp, "--help");
    CHECK(help.code == 0);
    CHECK(contains(help.out, "mine"));
    CHECK(contains(help.out, "synth"));

    CHECK(run_cli(tmp, "").code == 1);                        // a subcommand is required
    CHECK(run_cli(tmp, "--bogus-flag mine").code == 1);
    CHECK(run_cli(tmp, "synth --noise-p 1.5").code == 1);     // out of range
    CHECK(run_cli(tmp, "-j 0 mine").code == 1);
    CHECK(run_cli(tmp, "mine transact").code == 1);           // one subcommand at a time
}

TEST_CASE("missing upstream artifacts point at the stage to run") {
    TempDir tmp;
    const std::string ws = (tmp / "ws").string();
    std::filesystem::create_directories(ws);

    const RunResult mine = run_cli(tmp, "-w '" + ws + "' mine");
    CHECK(mine.code == 2);
    CHECK(contains(mine.err, "run `transact` first"));
    CHECK(contains(mine.err, "transactions.bin"));

    const RunResult cluster = run_cli(tmp, "-w '" + ws + "' cluster");
    CHECK(cluster.code == 2);
    CHECK(contains(cluster.err, "run `ingest` first"));

    const RunResult report = run_cli(tmp, "-w '" + ws + "' report");
    CHECK(report.code == 2);
    CHECK(contains(report.err, "run `mine` first"));

    SUBCASE("the workspace can come from the environment") {
        const RunResult env_mine = run_cli(tmp, "mine", "MMPM_WORKSPACE='" + ws + "'");
        CHECK(env_mine.code == 2);
        CHECK(contains(env_mine.err, ws));
    }
}

TEST_CASE("a broken workspace config is a config error") {
    TempDir tmp;
    const std::string ws = (tmp / "ws").string();
    std::filesystem::create_directories(ws);
    write_text(tmp / "ws/mmpm.conf", "k_top=0\n");

    const RunResult r = run_cli(tmp, "-w '" + ws + "' mine");
    CHECK(r.code == 2);
    CHECK(contains(r.err, "mmpm: config error:"));
    CHECK(contains(r.err, "k_top"));
}

TEST_CASE("ingest aborts on malformed records unless told to skip") {
    TempDir tmp;
    const std::filesystem::path ws = tmp / "ws";
    std::filesystem::create_directories(ws / "features");

    mmpm::FeatureMap map = mmpm::FeatureMap::zero(2, 2, 4);
    map.at(0, 0, 1) = 0.5f;
    mmpm::write_feature_map(ws / "features/ok.bin", map);

    write_text(ws / "ontology.json",
               R"([{"id": 0, "name": "attack", "triggers": ["attack", "strike"]}])" "\n");
    write_text(ws / "corpus.jsonl",
               R"({"caption": "attack at dawn", "doc_id": "d0", "features": "ok.bin"})" "\n"
               "{oops\n");

    const RunResult strict = run_cli(tmp, "-w '" + ws.string() + "' ingest");
    CHECK(strict.code == 2);
    CHECK(contains(strict.err, "line 2"));

    const RunResult skip = run_cli(tmp, "-w '" + ws.string() + "' ingest --skip-and-report");
    CHECK(skip.code == 0);
    CHECK(contains(skip.err, "mmpm: skipped:"));
    CHECK(contains(skip.out, "ingest: 1 documents, 1 with events"));
    CHECK(contains(skip.out, "1 skipped"));
    CHECK(std::filesystem::exists(ws / "documents.json"));
}

namespace {

// Carrier count 10 with 300 noise documents over six events keeps every
// planted gram around 17% of its event's captions, so the blacklist line
// moves to 20% for this corpus.
void seed_workspace_config(const std::filesystem::path& ws) {
    std::filesystem::create_directories(ws);
    write_text(ws / "mmpm.conf", "min_support_count=10\nblacklist_threshold=0.2\n");
}

std::string pipeline_run(const TempDir& tmp, const std::filesystem::path& ws) {
    seed_workspace_config(ws);
    const std::string w = "-w '" + ws.string() + "' ";
    std::string transcript;
    for (const std::string stage :
         {std::string("synth --seed 9 --total-tx 320 --plants 2 --carrier-count 10"),
          std::string("ingest"), std::string("cluster"), std::string("transact"),
          std::string("mine"), std::string("name"), std::string("classify"),
          std::string("report")}) {
        const RunResult r = run_cli(tmp, w + stage);
        CAPTURE(stage);
        CAPTURE(r.err);
        REQUIRE(r.code == 0);
        transcript += r.out;
    }
    return transcript;
}

}  // namespace

TEST_CASE("the full pipeline runs end to end and is reproducible") {
    TempDir tmp;
    const std::filesystem::path ws_a = tmp / "a";
    const std::string transcript = pipeline_run(tmp, ws_a);

    CHECK(contains(transcript, "synth: 320 documents (20 carriers)"));
    CHECK(contains(transcript, "transact: 320 transactions from 320/320 documents"));
    CHECK(contains(transcript, "mine: 42 patterns from 320 transactions"));
    CHECK(contains(transcript, "name: 36/42 named, 6 blacklist fallbacks, 6 unnamed"));
    CHECK(contains(transcript, "classify: 320 samples, 6 classes, bank 6"));

    const std::string report = read_text(ws_a / "report.html");
    CHECK(contains(report, "riot police"));
    CHECK(contains(report, "air strike"));

    const nlohmann::json counts =
        nlohmann::json::parse(read_text(ws_a / "pattern_counts.json"));
    CHECK(counts.at("total_patterns") == 42);
    CHECK(counts.at("transactions") == 320);
    REQUIRE(counts.at("events").size() == 6);

    SUBCASE("a second workspace with the same seed matches byte for byte") {
        const std::filesystem::path ws_b = tmp / "b";
        pipeline_run(tmp, ws_b);
        for (const std::string name :
             {"corpus.jsonl", "embeddings.txt", "documents.json", "clustermodel.json",
              "transactions.bin", "patterns.json", "names.json", "model.json", "report.html",
              "pattern_counts.json"}) {
            CAPTURE(name);
            CHECK(read_text(ws_a / name) == read_text(ws_b / name));
        }
    }

    SUBCASE("an explicit config overrides the workspace one") {
        write_text(tmp / "strict.conf", "min_support_count=1000\n");
        const RunResult r = run_cli(
            tmp, "-w '" + ws_a.string() + "' -c '" + (tmp / "strict.conf").string() + "' mine");
        CHECK(r.code == 0);
        CHECK(contains(r.out, "mine: 0 patterns"));
    }

    SUBCASE("--jobs changes nothing about the output") {
        // Re-mining resets the name fields, so compare mine against mine.
        REQUIRE(run_cli(tmp, "-w '" + ws_a.string() + "' mine").code == 0);
        const std::string before = read_text(ws_a / "patterns.json");
        const RunResult r = run_cli(tmp, "-j 8 -w '" + ws_a.string() + "' mine");
        CHECK(r.code == 0);
        CHECK(read_text(ws_a / "patterns.json") == before);
    }
}
