// Exercises the installed binary end to end: exit codes, determinism, and the
// subcommand plumbing. CLI_BINARY is injected by the build.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunOutcome {
    int exit_code;
    std::string stdout_text;
};

RunOutcome run_cli(const std::string& args) {
    const fs::path out_file = fs::temp_directory_path() / "cinephase_cli_stdout.txt";
    const std::string cmd =
        std::string(CLI_BINARY) + " " + args + " > " + out_file.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WEXITSTATUS(status), ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cinephase_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("synth is deterministic across runs") {
    const fs::path a = temp_dir("synth_a");
    const fs::path b = temp_dir("synth_b");
    CHECK(run_cli("synth --out " + a.string() + " --seed 7 --noise 0.02").exit_code == 0);
    CHECK(run_cli("synth --out " + b.string() + " --seed 7 --noise 0.02").exit_code == 0);
    CHECK(slurp(a / "000.pgm") == slurp(b / "000.pgm"));
    CHECK(slurp(a / "022.pgm") == slurp(b / "022.pgm"));
    CHECK(slurp(a / "gt.csv") == slurp(b / "gt.csv"));
    CHECK(slurp(a / "roi.txt") == slurp(b / "roi.txt"));
}

TEST_CASE("phases produces identical report bytes for identical inputs") {
    const fs::path cine = temp_dir("det_cine");
    REQUIRE(run_cli("synth --out " + cine.string() + " --seed 3").exit_code == 0);
    std::string roi = slurp(cine / "roi.txt");
    roi.erase(roi.find_last_not_of("\n\r") + 1);

    const fs::path out1 = temp_dir("det_run1");
    const fs::path out2 = temp_dir("det_run2");
    const std::string base = "phases --frames " + cine.string() + " --roi " + roi + " --out ";
    REQUIRE(run_cli(base + out1.string()).exit_code == 0);
    REQUIRE(run_cli(base + out2.string()).exit_code == 0);
    CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));
    CHECK(slurp(out1 / "trajectory.csv") == slurp(out2 / "trajectory.csv"));
}

TEST_CASE("phases recovers the synthetic ground truth") {
    const fs::path cine = temp_dir("gt_cine");
    REQUIRE(run_cli("synth --out " + cine.string() + " --seed 11").exit_code == 0);
    std::string roi = slurp(cine / "roi.txt");
    roi.erase(roi.find_last_not_of("\n\r") + 1);

    const fs::path out = temp_dir("gt_run");
    const RunOutcome r =
        run_cli("phases --frames " + cine.string() + " --roi " + roi + " --out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("ED frames: 4 19 34") != std::string::npos);
    CHECK(r.stdout_text.find("ES frames: 11 26 41") != std::string::npos);
    CHECK(fs::exists(out / "report.json"));
}

TEST_CASE("missing required arguments exit with the bad-arguments code") {
    const RunOutcome r = run_cli("phases --frames /tmp/nowhere");
    CHECK(r.exit_code == 2);  // --roi is required
}

TEST_CASE("an out-of-range threshold exits with the bad-arguments code") {
    const fs::path cine = temp_dir("badthr_cine");
    REQUIRE(run_cli("synth --out " + cine.string()).exit_code == 0);
    const RunOutcome r = run_cli("phases --frames " + cine.string() +
                                 " --roi 10,10,100,100 --threshold 1.5 --out /tmp/x");
    CHECK(r.exit_code == 2);
}

TEST_CASE("a malformed roi exits with the bad-arguments code") {
    const fs::path cine = temp_dir("badroi_cine");
    REQUIRE(run_cli("synth --out " + cine.string()).exit_code == 0);
    CHECK(run_cli("phases --frames " + cine.string() + " --roi 1,2,3 --out /tmp/x").exit_code == 2);
    CHECK(run_cli("phases --frames " + cine.string() + " --roi a,b,c,d --out /tmp/x").exit_code == 2);
}

TEST_CASE("unreadable input exits with the input-error code") {
    const RunOutcome r = run_cli("phases --frames /tmp/no_such_cine_dir --roi 0,0,32,32 --out /tmp/x");
    CHECK(r.exit_code == 3);
}

TEST_CASE("an out-of-bounds roi exits with the input-error code") {
    const fs::path cine = temp_dir("oob_cine");
    REQUIRE(run_cli("synth --out " + cine.string()).exit_code == 0);
    const RunOutcome r = run_cli("phases --frames " + cine.string() +
                                 " --roi 150,150,100,100 --out /tmp/x");
    CHECK(r.exit_code == 3);
}

TEST_CASE("a textureless roi exits with the pipeline-failure code") {
    const fs::path cine = temp_dir("blank_cine");
    REQUIRE(run_cli("synth --out " + cine.string()).exit_code == 0);
    const RunOutcome r =
        run_cli("phases --frames " + cine.string() + " --roi 0,0,16,16 --out /tmp/x");
    CHECK(r.exit_code == 4);
}

TEST_CASE("preview exports the first frame") {
    const fs::path cine = temp_dir("preview_cine");
    REQUIRE(run_cli("synth --out " + cine.string()).exit_code == 0);
    const fs::path preview = cine / "preview_out.pgm";
    const RunOutcome r =
        run_cli("preview --frames " + cine.string() + " --out " + preview.string());
    CHECK(r.exit_code == 0);
    CHECK(slurp(preview) == slurp(cine / "000.pgm"));
}

TEST_CASE("eval compares reports against a reference csv") {
    const fs::path corpus = temp_dir("eval_corpus");
    const fs::path ref_csv = corpus / "ref.csv";
    std::ofstream ref(ref_csv);
    ref << "source_id,phase,frame,reader\n";

    std::string auto_args;
    for (const int seed : {21, 22}) {
        const fs::path cine = corpus / ("v" + std::to_string(seed));
        REQUIRE(run_cli("synth --out " + cine.string() + " --seed " + std::to_string(seed))
                    .exit_code == 0);
        std::string roi = slurp(cine / "roi.txt");
        roi.erase(roi.find_last_not_of("\n\r") + 1);
        const fs::path out = corpus / ("run" + std::to_string(seed));
        REQUIRE(run_cli("phases --frames " + cine.string() + " --roi " + roi + " --out " +
                        out.string())
                    .exit_code == 0);
        auto_args += " " + (out / "report.json").string();

        std::ifstream gt(cine / "gt.csv");
        std::string line;
        std::getline(gt, line);  // header
        while (std::getline(gt, line)) {
            const auto comma = line.find(',');
            ref << "v" << seed << "," << line.substr(0, comma) << "," << line.substr(comma + 1)
                << ",consensus\n";
        }
    }
    ref.close();

    const RunOutcome r = run_cli("eval --auto" + auto_args + " --ref " + ref_csv.string());
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("100.00%") != std::string::npos);
}

TEST_CASE("eval computes inter-reader deltas") {
    const fs::path dir = temp_dir("delta");
    const fs::path csv = dir / "readers.csv";
    {
        std::ofstream out(csv);
        out << "source_id,phase,frame,reader\n";
        out << "v1,ED,10,r1\nv1,ED,12,r2\n";
        out << "v1,ES,20,r1\nv1,ES,20,r2\n";
        out << "v2,ED,30,r1\nv2,ED,31,r2\n";
        out << "v2,ES,40,r1\nv2,ES,43,r2\n";
    }
    const RunOutcome r = run_cli("eval --ref " + csv.string() + " --delta-readers r1,r2");
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("total\t3\t3") != std::string::npos);
    CHECK(r.stdout_text.find("average\t1.50\t1.50") != std::string::npos);
}

TEST_CASE("sweep emits one table row per threshold over a corpus") {
    const fs::path corpus = temp_dir("sweep_corpus");
    for (const int seed : {31, 32}) {
        const fs::path cine = corpus / ("v" + std::to_string(seed));
        REQUIRE(run_cli("synth --out " + cine.string() + " --seed " + std::to_string(seed))
                    .exit_code == 0);
    }
    const fs::path out_csv = corpus / "sweep.csv";
    const RunOutcome r = run_cli("sweep --corpus " + corpus.string() +
                                 " --thresholds 0.5,0.8,0.9 --out " + out_csv.string());
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("Difference Frame \\ Threshold") != std::string::npos);
    CHECK(r.stdout_text.find("0.5\t") != std::string::npos);
    CHECK(r.stdout_text.find("0.8\t") != std::string::npos);
    CHECK(r.stdout_text.find("0.9\t") != std::string::npos);
    CHECK(fs::exists(out_csv));
}
