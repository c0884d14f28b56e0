#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "diagpath/io.hpp"

using namespace diagpath;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(DIAGPATH_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[512];
    while (std::fgets(buf, sizeof buf, p)) r.out += buf;
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

}  // namespace

TEST_CASE("cli exit codes") {
    const auto dir = fs::temp_directory_path() / "diagpath_test_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);

    CHECK(run("").code == 2);
    CHECK(run("simulate --n-sims").code == 2);
    CHECK(run("train --gram x --targets y --grid-lambda 1:2").code == 2);
    CHECK(run("w1 --a " + (dir / "none.csv").string() + " --b " + (dir / "none.csv").string()).code == 3);

    std::vector<persistence::DiagramPath> paths(1);
    paths[0].sim_id = 4;
    paths[0].bound = 2;
    persistence::DiagramTriple a, b;
    a[1].add(0, 1);
    a[1].add(0.5, 0.5);
    b[1].add(0.25, 1);
    paths[0].frames = {a, b};
    paths[0].times = {0, 1};
    const auto file = (dir / "d.csv").string();
    io::write_diagrams(file, paths);

    const auto w = run("w1 --a " + file + " --b " + file + " --sim-a 4 --sim-b 4 --time-b 1 --dim 1");
    CHECK(w.code == 0);
    CHECK(io::parse_double(w.out.substr(0, w.out.find('\n'))) == doctest::Approx(0.75));
    CHECK(run("w1 --a " + file + " --b " + file + " --sim-a 5").code == 3);
    CHECK(run("w1 --a " + file + " --b " + file + " --sim-a 4 --sim-b 4 --dim 3").code == 2);
    fs::remove_all(dir);
}
