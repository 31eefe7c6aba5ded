#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "omht/exponents.hpp"
#include "omht/mmd.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kSummaryHeader =
    "detector,param_name,param_value,mean_tau,tau_std,err_misclass,err_false_reject,"
    "err_false_alarm,err_sum,ci_half_width,wall_ms,horizon_stops,trials,seed";
constexpr const char* kEstimatorHeader = "series,param_name,param_value,seed,value";
constexpr std::size_t kWallColumn = 10;

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("omht_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    out << body;
}

struct CliResult {
    int status = -1;
    std::string out;
    std::string err;
};

CliResult run_raw(const std::string& command) {
    static int calls = 0;
    const fs::path out = work_dir() / ("stdout_" + std::to_string(calls));
    const fs::path err = work_dir() / ("stderr_" + std::to_string(calls));
    ++calls;
    const std::string cmd = command + " > " + out.string() + " 2> " + err.string();
    const int rc = std::system(cmd.c_str());
    CliResult res;
    res.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    res.out = slurp(out);
    res.err = slurp(err);
    return res;
}

CliResult run_cli(const std::string& args) { return run_raw(std::string(OMHT_CLI_PATH) + " " + args); }

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    return kv;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            fields.push_back(cell);
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

double num(const std::string& s) { return std::stod(s); }

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

fs::path write_samples(const std::string& name, const std::vector<double>& values) {
    std::string body;
    for (double v : values) {
        body += shortest(v);
        body += '\n';
    }
    const fs::path p = work_dir() / name;
    spill(p, body);
    return p;
}

}  // namespace

TEST_CASE("population value command prints a bare number") {
    const CliResult def = run_cli("mmd pop");
    REQUIRE(def.status == 0);
    CHECK(std::abs(num(def.out) - oracle::pop_shift_15) < 1e-12);

    const CliResult unit = run_cli("mmd pop --fn 0,1 --fa 1,1 --sigma 1");
    REQUIRE(unit.status == 0);
    CHECK(std::abs(num(unit.out) - oracle::pop_shift_one) < 1e-12);

    const CliResult same = run_cli("mmd pop --fa 0,1");
    REQUIRE(same.status == 0);
    CHECK(num(same.out) == 0.0);

    CHECK(run_cli("mmd pop --fa 1").status == 2);
    const CliResult degenerate = run_cli("mmd pop --fa 1,0");
    CHECK(degenerate.status == 2);
    CHECK(degenerate.err.find("error:") != std::string::npos);
}

TEST_CASE("estimate command reproduces the library statistic exactly") {
    std::mt19937_64 eng(2024);
    const std::vector<double> x = oracle::draw(eng, 40, 0.0, 1.0);
    std::vector<double> y = oracle::draw(eng, 35, 1.5, 1.0);
    const fs::path fx = write_samples("x.txt", x);

    // a blank line mid-file is skipped by the reader
    std::string body;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (i == 7) {
            body += '\n';
        }
        body += shortest(y[i]);
        body += '\n';
    }
    const fs::path fy = work_dir() / "y.txt";
    spill(fy, body);

    const CliResult est = run_cli("mmd est --file1 " + fx.string() + " --file2 " + fy.string());
    REQUIRE(est.status == 0);
    const omht::KernelSpec kernel = omht::KernelSpec::gaussian(1.0);
    CHECK(num(est.out) == omht::mmd2_unbiased(kernel, x, y));

    const fs::path fc = write_samples("c.txt", std::vector<double>(10, 1.25));
    const CliResult zero = run_cli("mmd est --file1 " + fc.string() + " --file2 " + fc.string());
    REQUIRE(zero.status == 0);
    CHECK(num(zero.out) == 0.0);

    const fs::path lone = write_samples("one.txt", {3.0});
    const CliResult short_file = run_cli("mmd est --file1 " + lone.string() + " --file2 " + fx.string());
    CHECK(short_file.status == 2);
    CHECK(short_file.err.find("insufficient samples") != std::string::npos);

    spill(work_dir() / "bad.txt", "1.0\nnot a number\n2.0\n");
    const CliResult garbage =
        run_cli("mmd est --file1 " + (work_dir() / "bad.txt").string() + " --file2 " + fx.string());
    CHECK(garbage.status == 2);
    CHECK(garbage.err.find("invalid sample line") != std::string::npos);

    CHECK(run_cli("mmd est --file1 /nonexistent.txt --file2 " + fx.string()).status == 2);
}

TEST_CASE("exponent command evaluates threshold expressions") {
    using namespace omht;
    ProblemParams pp;
    pp.m = 10;
    pp.t_max = 4;
    pp.s = 1;
    pp.k0 = 1.0;
    pp.mmd2 = 0.36;

    const CliResult fixed = run_cli("exponents --test fixed --mmd2 0.36 --lambda '0.5*mmd2'");
    REQUIRE(fixed.status == 0);
    const auto kv = parse_kv(fixed.out);
    const ExponentReport want = bounds_fixed_single(pp, 0.18);
    CHECK(num(kv.at("mmd2")) == 0.36);
    CHECK(num(kv.at("misclass")) == want.misclass);
    CHECK(num(kv.at("false_reject")) == want.false_reject);
    CHECK(num(kv.at("false_alarm")) == want.false_alarm);
    CHECK(num(kv.at("bayesian")) == want.bayesian());
    CHECK(kv.at("misclass_valid") == "1");
    CHECK(kv.at("false_reject_valid") == "1");
    CHECK(kv.at("false_alarm_valid") == "1");

    const CliResult zero = run_cli("exponents --test fixed --mmd2 0.36 --lambda 0");
    REQUIRE(zero.status == 0);
    const auto zkv = parse_kv(zero.out);
    CHECK(num(zkv.at("misclass")) == 0.0);
    CHECK(num(zkv.at("false_alarm")) == 0.0);
    CHECK(num(zkv.at("false_reject")) > 0.0);

    const CliResult known =
        run_cli("exponents --test known_s --mmd2 0.3610872381370284 --s 2 --lambda 0.1");
    REQUIRE(known.status == 0);
    CHECK(num(parse_kv(known.out).at("misclass")) == doctest::Approx(2.734375e-4).epsilon(1e-12));

    const CliResult seq = run_cli("exponents --test sequential --mmd2 0.36 --lambda1 mmd2 --lambda2 '0.1*mmd2'");
    REQUIRE(seq.status == 0);
    const auto skv = parse_kv(seq.out);
    CHECK(skv.at("misclass_valid") == "0");  // the upper bar sits exactly at the separation
    CHECK(skv.at("false_alarm_valid") == "1");

    const CliResult tables =
        run_cli("exponents --table1 --table2 --mmd2 0.3610872381370284 --s 2 --eps 0.1 --k 4");
    REQUIRE(tables.status == 0);
    const auto tkv = parse_kv(tables.out);
    CHECK(num(tkv.at("eps")) == 0.1);
    CHECK(num(tkv.at("table1_fixed")) == doctest::Approx(9.054443996210211e-4).epsilon(1e-12));
    CHECK(num(tkv.at("table2_fixed")) == doctest::Approx(2.2638672526547755e-4).epsilon(1e-12));
    CHECK(num(tkv.at("table2_sequential")) == doctest::Approx(1.9398713810040043e-4).epsilon(1e-12));
    CHECK(num(tkv.at("table2_two_phase")) == doctest::Approx(1.9398713810040043e-4).epsilon(1e-12));
    CHECK(tkv.count("table1_sequential") == 1);
    CHECK(tkv.count("table1_two_phase") == 1);

    CHECK(run_cli("exponents --test nonsense").status == 2);
    CHECK(run_cli("exponents --test fixed --lambda '0.5*foo'").status == 2);
    CHECK(run_cli("exponents --mmd2 -1").status == 2);
    CHECK(run_cli("exponents --m 10 --s 3 --t 2").status == 2);
}

TEST_CASE("simulation output is deterministic apart from wall time") {
    const fs::path a = work_dir() / "a.csv";
    const fs::path b = work_dir() / "b.csv";
    const CliResult ra = run_cli("simulate --recipe fig4 --trials 4 --seed 3 --threads 2 --out " + a.string());
    const CliResult rb = run_cli("simulate --recipe fig4 --trials 4 --seed 3 --threads 1 --out " + b.string());
    REQUIRE(ra.status == 0);
    REQUIRE(rb.status == 0);
    CHECK(ra.err.find("recipe=fig4") != std::string::npos);
    CHECK(ra.err.find("lambda=default") != std::string::npos);

    const auto rows_a = parse_csv(slurp(a));
    const auto rows_b = parse_csv(slurp(b));
    REQUIRE(rows_a.size() == 5);  // header plus one row per detector
    REQUIRE(rows_a.size() == rows_b.size());

    std::string header;
    for (std::size_t i = 0; i < rows_a[0].size(); ++i) {
        header += (i ? "," : "") + rows_a[0][i];
    }
    CHECK(header == kSummaryHeader);

    std::vector<std::string> detectors;
    for (std::size_t r = 1; r < rows_a.size(); ++r) {
        REQUIRE(rows_a[r].size() == 14);
        detectors.push_back(rows_a[r][0]);
        for (std::size_t c = 0; c < rows_a[r].size(); ++c) {
            if (c == kWallColumn) {
                continue;  // the one run-dependent column
            }
            CHECK(rows_a[r][c] == rows_b[r][c]);
        }
        CHECK(rows_a[r][12] == "4");  // trials
    }
    CHECK(detectors == std::vector<std::string>{"baseline", "fixed_multi", "two_phase_multi", "sequential_multi"});

    // disjoint seed blocks across grid points
    CHECK(rows_a[1][13] == "3");
    CHECK(rows_a[2][13] == "7");
    CHECK(rows_a[3][13] == "11");
    CHECK(rows_a[4][13] == "15");

    const nlohmann::json meta = nlohmann::json::parse(slurp(a.string() + ".meta.json"));
    CHECK(meta.at("recipe") == "fig4");
    CHECK(meta.at("schema") == "summary");
    CHECK(meta.at("columns") == kSummaryHeader);
    CHECK(meta.at("trials") == 4);
    CHECK(meta.at("base_seed") == 3);
    CHECK(meta.at("rows") == 4);
    CHECK(meta.at("failures") == 0);

    const fs::path j = work_dir() / "a.json";
    const CliResult rj =
        run_cli("simulate --recipe fig4 --trials 4 --seed 3 --threads 2 --format json --out " + j.string());
    REQUIRE(rj.status == 0);
    const nlohmann::json arr = nlohmann::json::parse(slurp(j));
    REQUIRE(arr.is_array());
    REQUIRE(arr.size() == 4);
    for (std::size_t r = 0; r < 4; ++r) {
        CHECK(arr[r].at("detector") == rows_a[r + 1][0]);
        CHECK(arr[r].at("err_sum") == num(rows_a[r + 1][8]));
        CHECK(arr[r].at("seed") == std::stoull(rows_a[r + 1][13]));
    }
}

TEST_CASE("simulation config file is honored and flags win") {
    const fs::path cfg = work_dir() / "sim.cfg";
    spill(cfg, "trials=3\nseed=9\n");
    const fs::path c = work_dir() / "c.csv";
    const CliResult rc =
        run_cli("simulate --recipe fig4 --config " + cfg.string() + " --out " + c.string());
    REQUIRE(rc.status == 0);
    const nlohmann::json meta = nlohmann::json::parse(slurp(c.string() + ".meta.json"));
    CHECK(meta.at("trials") == 3);
    CHECK(meta.at("base_seed") == 9);

    const CliResult rd = run_cli("simulate --recipe fig4 --config " + cfg.string() + " --trials 4 --out " +
                                 c.string());
    REQUIRE(rd.status == 0);
    const nlohmann::json meta2 = nlohmann::json::parse(slurp(c.string() + ".meta.json"));
    CHECK(meta2.at("trials") == 4);
    CHECK(meta2.at("base_seed") == 9);

    // explicit trials survive paper-scale; only the grid would change
    const CliResult rp = run_cli("simulate --recipe fig4 --paper-scale --trials 2 --seed 5 --out " + c.string());
    REQUIRE(rp.status == 0);
    const nlohmann::json meta3 = nlohmann::json::parse(slurp(c.string() + ".meta.json"));
    CHECK(meta3.at("trials") == 2);
    CHECK(meta3.at("paper_scale") == true);
}

TEST_CASE("simulation rejects malformed settings with exit code 2") {
    const CliResult bad_order =
        run_cli("simulate --recipe fig4 --trials 1 --seed 2 --lambda1 '0.1*mmd2' --lambda2 '0.5*mmd2'");
    CHECK(bad_order.status == 2);
    CHECK(bad_order.err.find("lambda1") != std::string::npos);

    CHECK(run_cli("simulate --recipe fig4 --trials 1 --lambda nope").status == 2);
    CHECK(run_cli("simulate --recipe fig99 --trials 1").status == 2);
    CHECK(run_cli("simulate --trials 1").status == 2);  // --recipe is required
    CHECK(run_cli("simulate --recipe fig4 --trials 1 --format yaml").status == 2);

    const CliResult bad_env =
        run_raw("OMHT_THREADS=abc " + std::string(OMHT_CLI_PATH) + " simulate --recipe fig4 --trials 1");
    CHECK(bad_env.status == 2);
}

TEST_CASE("stopping-time recipe emits one estimator row per trial") {
    const fs::path e1 = work_dir() / "e1.csv";
    const fs::path e2 = work_dir() / "e2.csv";
    const CliResult r1 = run_cli("simulate --recipe fig5 --trials 6 --seed 100 --threads 2 --out " + e1.string());
    const CliResult r2 = run_raw("OMHT_THREADS=1 " + std::string(OMHT_CLI_PATH) +
                                 " simulate --recipe fig5 --trials 6 --seed 100 --out " + e2.string());
    REQUIRE(r1.status == 0);
    REQUIRE(r2.status == 0);
    CHECK(slurp(e1) == slurp(e2));  // no wall column in the estimator schema

    const auto rows = parse_csv(slurp(e1));
    REQUIRE(rows.size() == 7);
    std::string header;
    for (std::size_t i = 0; i < rows[0].size(); ++i) {
        header += (i ? "," : "") + rows[0][i];
    }
    CHECK(header == kEstimatorHeader);
    for (std::size_t t = 0; t < 6; ++t) {
        const auto& row = rows[t + 1];
        REQUIRE(row.size() == 5);
        CHECK(row[0] == "tau");
        CHECK(row[1] == "trial");
        CHECK(num(row[2]) == static_cast<double>(t));
        CHECK(row[3] == std::to_string(100 + t));
        CHECK(num(row[4]) >= 19.0);  // stopping time is at least N - 1
    }

    const nlohmann::json meta = nlohmann::json::parse(slurp(e1.string() + ".meta.json"));
    CHECK(meta.at("schema") == "estimator");
    CHECK(meta.at("columns") == kEstimatorHeader);
    CHECK(meta.at("rows") == 6);

    // stdout mode: the table body lands on stdout, the resolved line on stderr
    const CliResult direct = run_cli("simulate --recipe fig5 --trials 2 --seed 100");
    REQUIRE(direct.status == 0);
    CHECK(direct.out.find(kEstimatorHeader) == 0);
    CHECK(direct.err.find("recipe=fig5") != std::string::npos);
}

TEST_CASE("estimator recipes produce the documented tables") {
    const fs::path f1 = work_dir() / "fig1.json";
    const CliResult r1 = run_cli("simulate --recipe fig1 --seed 7 --format json --out " + f1.string());
    REQUIRE(r1.status == 0);
    const nlohmann::json arr = nlohmann::json::parse(slurp(f1));
    REQUIRE(arr.is_array());
    CHECK(arr.size() == 82);  // two shifts, each one population row plus 10 seeds * 4 checkpoints
    std::size_t population_rows = 0;
    for (const auto& row : arr) {
        if (row.at("series") == "population") {
            ++population_rows;
            CHECK(row.at("param_name") == "shift");
        } else {
            CHECK(row.at("param_name") == "n");
            const double n = row.at("param_value").get<double>();
            CHECK((n == 100.0 || n == 500.0 || n == 2000.0 || n == 6000.0));
        }
    }
    CHECK(population_rows == 2);

    const fs::path f2 = work_dir() / "fig2.csv";
    const CliResult r2 = run_cli("simulate --recipe fig2 --seed 21 --out " + f2.string());
    REQUIRE(r2.status == 0);
    const auto rows = parse_csv(slurp(f2));
    REQUIRE(rows.size() == 31);  // header + 5 population rows + 5 seeds * 5 deltas
    std::size_t estimates = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r][0] != "estimate") {
            continue;
        }
        ++estimates;
        if (num(rows[r][2]) == 0.0) {
            CHECK(std::abs(num(rows[r][4])) < 0.01);  // null separation at n = 6000
        }
    }
    CHECK(estimates == 25);
}
