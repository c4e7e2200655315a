// Drives the flowcast binary end to end: exit codes, byte-identical reruns,
// config handling, and the wiring between subcommands.

#include "flowcast/io.hpp"
#include "test_harness.hpp"

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <string>

using namespace flowcast;
using namespace flowcast::test;

namespace {

std::string g_bin;
std::filesystem::path g_dir;

int run_cli(const std::string& args, const std::string& log_name = "out.txt") {
    const std::string log = (g_dir / log_name).string();
    const std::string cmd = g_bin + " " + args + " > " + log + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string slurp(const std::string& name) {
    std::ifstream in(g_dir / name, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string path_of(const std::string& name) { return (g_dir / name).string(); }

void test_gen_data() {
    section("gen-data");
    const std::string flags =
        "gen-data pp-gaussian --n 40 --horizon 2 --seed 3 --out " + path_of("a.fmds");
    check(run_cli(flags) == 0, "pp-gaussian exits 0");
    const std::string once = slurp("a.fmds");
    check(run_cli("gen-data pp-gaussian --n 40 --horizon 2 --seed 3 --out " +
                  path_of("b.fmds")) == 0,
          "second run exits 0");
    check(!once.empty() && once == slurp("b.fmds"),
          "same flags give byte-identical datasets");
    check(slurp("a.fmds.meta") == slurp("b.fmds.meta"),
          "meta sidecars byte-identical");

    check(run_cli("gen-data pp-gaussian --n 0 --horizon 2 --seed 3 --out " +
                  path_of("empty.fmds")) == 0,
          "--n 0 exits 0");
    check(slurp("out.txt").find("warning") != std::string::npos,
          "--n 0 prints a warning");
    check(run_cli("gen-data no-such --out " + path_of("x.fmds")) == 2,
          "unknown generator exits 2");

    check(run_cli("gen-data blob --n 12 --grid 8x8 --seed 5 --out " +
                  path_of("blob.fmds")) == 0,
          "blob generator exits 0");
}

void test_train() {
    section("train");
    check(run_cli("train --data " + path_of("missing.fmds") + " --out " +
                      path_of("m.fmck"), "train_missing.txt") == 2,
          "missing dataset exits 2");
    check(slurp("train_missing.txt").find("missing.fmds") != std::string::npos,
          "error message names the path");

    const std::string train_flags =
        "train --mode forecast --data " + path_of("a.fmds") + " --out " +
        path_of("f.fmck") + " --epochs 3 --hidden 8,8 --seed 4 --batch 16";
    check(run_cli(train_flags) == 0, "forecast training exits 0");
    const std::string ck = slurp("f.fmck");
    check(run_cli("train --mode forecast --data " + path_of("a.fmds") + " --out " +
                  path_of("f2.fmck") + " --epochs 3 --hidden 8,8 --seed 4 --batch 16") == 0,
          "second training run exits 0");
    check(!ck.empty() && ck == slurp("f2.fmck"),
          "same seed gives byte-identical checkpoints");
    check(!slurp("f.fmck.log").empty(), "loss log written");

    check(run_cli("train --mode gaussify --data " + path_of("a.fmds") + " --out " +
                  path_of("g.fmck") + " --epochs 3 --hidden 8,8 --seed 4 --batch 16") == 0,
          "gaussify training exits 0");
}

void test_config() {
    section("config file");
    {
        std::ofstream cfg(g_dir / "train.cfg");
        cfg << "epochs = 2\n" << "hidden = 8\n" << "# comment\n";
    }
    check(run_cli("--config " + path_of("train.cfg") + " train --mode forecast --data " +
                  path_of("a.fmds") + " --out " + path_of("fc.fmck") +
                  " --seed 4 --batch 16") == 0,
          "config-driven training exits 0");
    const std::string log = slurp("fc.fmck.log");
    check(log.find("\n2,") != std::string::npos && log.find("\n3,") == std::string::npos,
          "config epochs=2 honored");

    {
        std::ofstream cfg(g_dir / "bad.cfg");
        cfg << "not_a_flag = 1\n";
    }
    check(run_cli("--config " + path_of("bad.cfg") + " train --data " + path_of("a.fmds") +
                  " --out " + path_of("nope.fmck")) == 2,
          "unknown config key exits 2");

    // flags override the file
    check(run_cli("--config " + path_of("train.cfg") + " train --mode forecast --data " +
                  path_of("a.fmds") + " --out " + path_of("fc3.fmck") +
                  " --seed 4 --batch 16 --epochs 3") == 0,
          "flag-over-config run exits 0");
    check(slurp("fc3.fmck.log").find("\n3,") != std::string::npos,
          "command-line --epochs wins over config");
}

void test_forecast_and_perturb() {
    section("forecast / perturb");
    check(run_cli("forecast --model " + path_of("g.fmck") + " --state 0.1,0.3 --out " +
                  path_of("bad.fmds"), "kindmix.txt") == 2,
          "gaussify checkpoint as --model exits 2");

    check(run_cli("forecast --model " + path_of("f.fmck") +
                  " --state 0.1,0.3 --steps 20 --out " + path_of("one.fmds")) == 0,
          "single-state forecast exits 0");
    check(io::load_ensemble(path_of("one.fmds")).size() == 1,
          "single forecast holds one member");

    check(run_cli("forecast --model " + path_of("f.fmck") + " --perturb --gaussify " +
                  path_of("g.fmck") +
                  " --state 0.1,0.3 --sigma 0.1 --members 7 --steps 20 --seed 9 --out " +
                  path_of("ens.fmds") + " --csv " + path_of("ens.csv") + " --svg " +
                  path_of("ens.svg")) == 0,
          "perturbed forecast exits 0");
    const auto ens = io::load_ensemble(path_of("ens.fmds"));
    check(ens.size() == 7, "member count in output equals --members");
    check(slurp("ens.svg").find("<svg") != std::string::npos, "svg scatter written");

    check(run_cli("perturb --gaussify " + path_of("g.fmck") +
                  " --from-data " + path_of("a.fmds") +
                  " --index 1 --sigma 0 --members 3 --steps 20 --out " +
                  path_of("p0.fmds")) == 0,
          "perturb with sigma 0 exits 0");
    const auto p0 = io::load_ensemble(path_of("p0.fmds"));
    check(p0.size() == 3 && p0.members[0] == p0.members[1] &&
              p0.members[1] == p0.members[2],
          "sigma=0 members identical");

    check(run_cli("forecast --model " + path_of("f.fmck") + " --ensemble " +
                  path_of("ens.fmds") + " --steps 20 --out " + path_of("prop.fmds")) == 0,
          "ensemble-file forecast exits 0");
}

void test_metrics_cmd() {
    section("metrics");
    check(run_cli("metrics --pred " + path_of("a.fmds") + "@qT --truth " +
                  path_of("a.fmds") + "@qT --out " + path_of("r.csv"),
                  "metrics.txt") == 0,
          "self comparison exits 0");
    const std::string csv = slurp("r.csv");
    check(csv.find("0.000000e+00") != std::string::npos, "zero-error row written");
    check(csv.find("NA") != std::string::npos, "vector states emit NA ssim");

    check(run_cli("metrics --pred " + path_of("blob.fmds") + "@q0 --truth " +
                  path_of("a.fmds") + "@qT", "mismatch.txt") == 2,
          "dimension mismatch exits 2");
}

void test_bench_cmd() {
    section("bench");
    check(run_cli("bench --out " + path_of("bench.csv")) == 0, "bench exits 0");
    const std::string csv = slurp("bench.csv");
    check(csv.find("ode_euler,1,2,1,") != std::string::npos, "ODE N=1 row: 2 ops, 1 call");
    check(csv.find("ode_euler,1000,2000,1000,") != std::string::npos, "ODE N=1000 row");
    check(csv.find("sde_euler_maruyama,1000,4000,2000,") != std::string::npos,
          "SDE N=1000 row: 4000 ops, 2000 calls");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cout << "usage: test_cli <path-to-flowcast-binary>\n";
        return 1;
    }
    g_bin = argv[1];
    g_dir = std::filesystem::temp_directory_path() /
            ("flowcast_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(g_dir);

    test_gen_data();
    test_train();
    test_config();
    test_forecast_and_perturb();
    test_metrics_cmd();
    test_bench_cmd();

    std::filesystem::remove_all(g_dir);
    return summary("cli");
}
