#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

int cli(const std::string& args) {
  const std::string command = std::string(APF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

long count_lines(const std::string& text) { return std::count(text.begin(), text.end(), '\n'); }

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("apf_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string at(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("generate writes T + 1 rows and reruns identically") {
  Scratch s;
  REQUIRE(cli("generate --model gaussian --sigma 0.2 --steps 200 --seed 3 --out " + s.at("a.csv")) == 0);
  REQUIRE(cli("generate --model gaussian --sigma 0.2 --steps 200 --seed 3 --out " + s.at("b.csv")) == 0);
  const std::string a = slurp(s.at("a.csv"));
  CHECK(count_lines(a) == 202);
  CHECK(a.rfind("t,x,dx,truth\n0,0,,\n", 0) == 0);
  CHECK(a == slurp(s.at("b.csv")));
}

TEST_CASE("config file with flag override") {
  Scratch s;
  {
    std::ofstream conf(s.at("run.conf"));
    conf << "# base\nmodel = gaussian\nsteps = 50\nvariant = sir\nn = 100\n";
  }
  REQUIRE(cli("run --config " + s.at("run.conf") + " --steps 40 --out " + s.at("r.csv")) == 0);
  const std::string text = slurp(s.at("r.csv"));
  CHECK(count_lines(text) == 41);
}

TEST_CASE("generate then run round trip") {
  Scratch s;
  REQUIRE(cli("generate --steps 100 --seed 5 --out " + s.at("series.csv")) == 0);
  REQUIRE(cli("run --in " + s.at("series.csv") + " --seed 5 --variant lw --n 200 --record-every 10 --out " + s.at("r1.csv")) == 0);
  REQUIRE(cli("run --in " + s.at("series.csv") + " --seed 5 --variant lw --n 200 --record-every 10 --out " + s.at("r2.csv")) == 0);
  const std::string r1 = slurp(s.at("r1.csv"));
  CHECK(count_lines(r1) == 11);
  CHECK(r1 == slurp(s.at("r2.csv")));
  // The same series simulated in-process gives the same records.
  REQUIRE(cli("run --steps 100 --seed 5 --variant lw --n 200 --record-every 10 --out " + s.at("r3.csv")) == 0);
  CHECK(r1 == slurp(s.at("r3.csv")));
}

TEST_CASE("ks-convergence and sweep") {
  Scratch s;
  REQUIRE(cli("ks-convergence --steps 200 --variant sis --n-grid 50,100,200 --workers 2 --out " + s.at("ks.csv")) ==
          0);
  const std::string ks = slurp(s.at("ks.csv"));
  CHECK(ks.rfind("N,ks\n50,", 0) == 0);
  CHECK(count_lines(ks) == 4);
  CHECK(cli("ks-convergence --steps 200 --n-grid 100,50 --out " + s.at("bad.csv")) == 1);
  CHECK(cli("ks-convergence --model regime --t-star 100 --steps 200 --n-grid 50 --out " + s.at("bad.csv")) == 1);

  REQUIRE(cli("sweep --steps 50 --variant lw-accel --n 100 --param gamma --values 0.01,0.1 --seeds 1,2 --workers 3 "
              "--out-dir " + s.at("sweep_par")) == 0);
  REQUIRE(cli("sweep --steps 50 --variant lw-accel --n 100 --param gamma --values 0.01,0.1 --seeds 1,2 --workers 1 "
              "--out-dir " + s.at("sweep_ser")) == 0);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(s.at("sweep_par"))) {
    ++files;
    CHECK(slurp(entry.path()) == slurp(fs::path(s.at("sweep_ser")) / entry.path().filename()));
  }
  CHECK(files == 4);
}

TEST_CASE("exit codes") {
  Scratch s;
  CHECK(cli("generate --sigma -1 --out " + s.at("x.csv")) == 1);
  CHECK(cli("generate --steps 0 --out " + s.at("x.csv")) == 1);
  CHECK(cli("run --variant kalman --out " + s.at("x.csv")) == 1);
  CHECK(cli("run --no-such-flag --out " + s.at("x.csv")) == 1);
  CHECK(cli("preset nonsense") == 1);
  CHECK(cli("preset --list") == 0);
  CHECK(cli("run --in /nonexistent/series.csv --out " + s.at("x.csv")) == 2);
  CHECK(cli("generate --out /proc/definitely/not/writable.csv") == 2);
  {
    std::ofstream bad(s.at("bad.csv"));
    bad << "t,x,dx,truth\n0,0,,\n1,zzz,1,\n";
  }
  CHECK(cli("run --in " + s.at("bad.csv") + " --out " + s.at("x.csv")) == 2);

  // A jump far outside every particle's reach kills all linear weights.
  {
    std::ofstream jump(s.at("jump.csv"));
    jump << "t,x,dx,truth\n0,0,,\n1,0.1,0.1,\n2,100.1,100,\n3,100.2,0.1,\n";
  }
  CHECK(cli("run --in " + s.at("jump.csv") + " --variant sir --n 50 --outputs posterior --out " + s.at("j.csv")) ==
        3);
  CHECK(slurp(s.at("j.csv")).find("#ABORTED t=2 reason=degenerate_weights") != std::string::npos);
  CHECK(cli("run --in " + s.at("jump.csv") + " --variant sir --n 50 --outputs posterior --log-weights --out " +
            s.at("j.csv")) == 0);
}

TEST_CASE("preset reruns are byte-identical") {
  Scratch s;
  REQUIRE(cli("preset fig-posterior-equal --out-dir " + s.at("p1")) == 0);
  REQUIRE(cli("preset fig-posterior-equal --out-dir " + s.at("p2") + " --workers 2") == 0);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(s.at("p1"))) {
    ++files;
    CHECK(slurp(entry.path()) == slurp(fs::path(s.at("p2")) / entry.path().filename()));
  }
  CHECK(files >= 1);
}
