#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "causalite/fixtures.hpp"
#include "causalite/io.hpp"

using namespace causalite;
namespace fsys = std::filesystem;
namespace fx = causalite::fixtures;

namespace {

struct CliResult {
    int exit_code;
    std::string output;
};

/// Run the built binary, capturing stdout+stderr.
CliResult run_cli(const std::string& args) {
    static const std::string binary = CAUSALITE_CLI_PATH;
    fsys::path out = fsys::temp_directory_path() / "causalite-cli-out.txt";
    std::string cmd = binary + " " + args + " > " + out.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, read_file(out.string())};
}

struct TempDir {
    fsys::path path;
    TempDir() {
        path = fsys::temp_directory_path() / ("causalite-cli-" + std::to_string(::getpid()));
        fsys::create_directories(path);
    }
    ~TempDir() { fsys::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("run prints the derived variables of the circuit") {
    CliResult r = run_cli("run --model fixture:circuit-M");
    CHECK(r.exit_code == 0);
    CHECK(r.output == "B1=1 B2=1 C=1\n");
    CliResult all = run_cli("run --model fixture:circuit-M --all");
    CHECK_THAT(all.output, Catch::Matchers::ContainsSubstring("A1=0"));
    CliResult at = run_cli("run --model fixture:circuit-M --input \"A1=1 A2=0 A3=1 A4=1\"");
    CHECK(at.output == "B1=0 B2=1 C=0\n");
}

TEST_CASE("verify-abstraction passes the main fixture and exits 0") {
    TempDir dir;
    std::string report = dir.file("report.txt");
    CliResult r = run_cli(
        "verify-abstraction --low fixture:network-N --high fixture:circuit-M "
        "--alignment fixture:alignment-N-to-M --inputs all-boolean --report " +
        report);
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("verdict: pass"));
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("checked: 784"));
    CHECK(read_file(report) == r.output);
}

TEST_CASE("verify-abstraction fails with a witness on a scrambled alignment") {
    TempDir dir;
    // scramble the fixture alignment's cells
    Alignment good = fx::alignment_n_to_m();
    std::vector<AlignedVariable> entries = good.entries();
    for (auto& e : entries) {
        if (e.high_var == "B1") {
            e.cell = {"H1_1", "H1_3"};
            e.component_map = Expr::eq(Expr::var("H1_1"), Expr::var("H1_3"));
        }
        if (e.high_var == "B2") {
            e.cell = {"H1_2", "H1_4"};
            e.component_map = Expr::eq(Expr::var("H1_2"), Expr::var("H1_4"));
        }
    }
    std::string align_path = dir.file("scrambled.align");
    write_file_atomic(align_path, serialize_alignment(Alignment(entries)));

    CliResult r = run_cli(
        "verify-abstraction --low fixture:network-N --high fixture:circuit-M --alignment " +
        align_path + " --inputs all-boolean");
    CHECK(r.exit_code == 1);
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("verdict: fail"));
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("witness 1"));
}

TEST_CASE("verify-translation accepts the recarving fixture") {
    CliResult r = run_cli(
        "verify-translation --low fixture:circuit-M-star --high fixture:circuit-M "
        "--translation fixture:translation-M-star-to-M --inputs all-boolean");
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("verdict: pass"));
}

TEST_CASE("verify-aut composes translation and abstraction") {
    TempDir dir;
    std::string align_path = dir.file("identity.align");
    write_file_atomic(align_path, serialize_alignment(identity_alignment(fx::circuit_m())));
    CliResult r = run_cli(
        "verify-aut --low fixture:circuit-M-star --high fixture:circuit-M "
        "--translation fixture:translation-M-star-to-M --alignment " +
        align_path + " --inputs all-boolean");
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("verdict: pass"));
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("pullback["));
}

TEST_CASE("audit reports all three criteria for B2") {
    CliResult r = run_cli(
        "audit --low fixture:network-N --high fixture:circuit-M "
        "--alignment fixture:alignment-N-to-M --vehicle B2 "
        "--property \"(xnor (var X3) (var X4))\" --inputs all-boolean");
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("information: pass"));
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("use: pass"));
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("misrepresentation: pass"));
}

TEST_CASE("audit accepts a request file") {
    TempDir dir;
    std::string req = dir.file("request.txt");
    write_file_atomic(req,
                      "audit-request v1\n"
                      "low fixture:network-N\n"
                      "high fixture:circuit-M\n"
                      "alignment fixture:alignment-N-to-M\n"
                      "vehicle B2\n"
                      "property (xnor (var X3) (var X4))\n"
                      "end\n");
    CliResult r = run_cli("audit --request " + req);
    CHECK(r.exit_code == 0);
}

TEST_CASE("malformed model files exit 2 with diagnostics") {
    TempDir dir;
    std::string bad = dir.file("bad.cm");
    write_file_atomic(bad, "causal-model v1\nvariable A boolean\nmechanism A (frob)\nend\n");
    CliResult r = run_cli("run --model " + bad);
    CHECK(r.exit_code == 2);
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("line 3"));
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("column"));
}

TEST_CASE("unknown flags are rejected") {
    CliResult r = run_cli("run --model fixture:circuit-M --frobnicate");
    CHECK(r.exit_code == 2);
}

TEST_CASE("missing subcommand is a usage error") {
    CliResult r = run_cli("");
    CHECK(r.exit_code == 2);
}

TEST_CASE("fixtures export and re-parse") {
    TempDir dir;
    std::string model_path = dir.file("M.cm");
    CliResult r = run_cli("fixtures export circuit-M -o " + model_path);
    CHECK(r.exit_code == 0);
    CHECK(parse_model(read_file(model_path)) == fx::circuit_m());

    std::string tasks = dir.file("tasks.txt");
    CliResult g = run_cli("fixtures gen-equality --n 16 --encoding symbolic -o " + tasks);
    CHECK(g.exit_code == 0);
    CHECK_THAT(read_file(tasks), Catch::Matchers::StartsWith("equality-tasks v1\n"));
}

TEST_CASE("weights import produces a runnable model file") {
    TempDir dir;
    std::string weights = dir.file("w.txt");
    write_file_atomic(weights, serialize_weights({fx::weights_w1(), fx::weights_w2(),
                                                  fx::weights_w3()}));
    std::string model_path = dir.file("net.cm");
    CliResult r = run_cli("fixtures import-weights " + weights + " --boolean-inputs -o " +
                          model_path);
    CHECK(r.exit_code == 0);
    CHECK(parse_model(read_file(model_path)) == fx::network_n());
}

TEST_CASE("intervene runs interchange spec files") {
    TempDir dir;
    std::string spec = dir.file("patch.ic");
    write_file_atomic(spec,
                      "interchange v1\n"
                      "base A1 0 A2 0 A3 0 A4 0\n"
                      "source A1 0 A2 0 A3 1 A4 0\n"
                      "targets B2\n"
                      "end\n");
    CliResult r = run_cli("intervene --model fixture:circuit-M --interchange " + spec);
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("B2=0"));
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("C=0"));
}

TEST_CASE("intervene applies a file-specified interventional") {
    TempDir dir;
    std::string iv = dir.file("pin.iv");
    write_file_atomic(iv, "interventional v1\nhard B2 1\nend\n");
    CliResult r = run_cli("intervene --model fixture:circuit-M --interventional " + iv +
                          " --input \"A1=0 A2=0 A3=0 A4=1\"");
    CHECK(r.exit_code == 0);
    // B2 pinned to 1 even though xnor(0,1) would be 0
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("B2=1"));
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("C=1"));
}

TEST_CASE("reports are byte-identical across runs and job counts") {
    TempDir dir;
    std::string r1 = dir.file("r1.txt"), r2 = dir.file("r2.txt"), r3 = dir.file("r3.txt");
    std::string base =
        "verify-abstraction --low fixture:network-N --high fixture:circuit-M "
        "--alignment fixture:alignment-N-to-M --inputs all-boolean --seed 7 ";
    CHECK(run_cli(base + "--jobs 1 --report " + r1).exit_code == 0);
    CHECK(run_cli(base + "--jobs 1 --report " + r2).exit_code == 0);
    CHECK(run_cli(base + "--jobs 8 --report " + r3).exit_code == 0);
    CHECK(read_file(r1) == read_file(r2));
    CHECK(read_file(r1) == read_file(r3));
}

TEST_CASE("search-alignment recovers a planted rotation end to end") {
    TempDir dir;
    std::string translation_path = dir.file("found.tr");
    std::string report_path = dir.file("search.txt");
    CliResult r = run_cli(
        "search-alignment --model fixture:rotated-N:3 --high fixture:circuit-M "
        "--alignment fixture:alignment-N-to-M --layer H1_1,H1_2,H1_3,H1_4 "
        "--seed 3 --budget 5000 --emit-translation " +
        translation_path + " --report " + report_path);
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("iia: 1"));
    CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("certified: yes"));

    // the emitted translation certifies through verify-aut
    CliResult aut = run_cli(
        "verify-aut --low fixture:rotated-N:3 --high fixture:circuit-M --translation " +
        translation_path +
        " --alignment fixture:alignment-N-to-M --inputs all-boolean "
        "--tolerance 1/10000000 --margin 1/10000");
    CHECK(aut.exit_code == 0);
}

TEST_CASE("the verify-abstraction report matches the committed golden byte-for-byte") {
    TempDir dir;
    std::string report = dir.file("report.txt");
    CliResult r = run_cli(
        "verify-abstraction --low fixture:network-N --high fixture:circuit-M "
        "--alignment fixture:alignment-N-to-M --inputs all-boolean --seed 0 --report " +
        report);
    REQUIRE(r.exit_code == 0);
    CHECK(read_file(report) == read_file(std::string(CAUSALITE_GOLDEN_DIR) +
                                         "/report-verify-abstraction.txt"));
}
