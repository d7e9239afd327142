#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "kdaido/harness.hpp"

using namespace kdaido;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() /
                     ("kdaido_harness_" + std::to_string(static_cast<long>(::getpid())));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    REQUIRE(os.good());
    os << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

int run_cli(const std::string& args, const fs::path& out, const fs::path& err) {
    const std::string cmd =
        std::string(KDAIDO_CLI_PATH) + " " + args + " > " + out.string() + " 2> " + err.string();
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

experiment_spec small_galerkin_spec(double K) {
    experiment_spec spec;
    spec.alpha1 = 0.3;
    spec.k_values = {K};
    spec.j_max = 12;
    spec.m_nodes = 200;
    spec.t_end = 30.0;
    spec.burn_in = 20.0;
    spec.eps = 1e-3;
    return spec;
}

}  // namespace

TEST_CASE("toml subset parses onto the json schema") {
    const std::string text =
        "# experiment\n"
        "jobs = 2\n"
        "[density]\n"
        "kind = \"lorentzian\"\n"
        "gamma = 1.0\n"
        "[coupling]\n"
        "alpha1 = 0.3\n"
        "h = 0.0\n"
        "[k_grid]\n"
        "min = 1.5\n"
        "max = 3.0\n"
        "count = 4\n"
        "[simulator]\n"
        "kind = \"galerkin\"\n"
        "j_max = 12\n"
        "[run]\n"
        "eps = 0.001\n"
        "[output]\n"
        "svg = true\n";
    const nlohmann::json j = parse_toml_subset(text);
    CHECK(j["jobs"] == 2);
    CHECK(j["density"]["kind"] == "lorentzian");
    CHECK(j["coupling"]["alpha1"] == 0.3);
    CHECK(j["k_grid"]["count"] == 4);
    CHECK(j["simulator"]["j_max"] == 12);
    CHECK(j["output"]["svg"] == true);

    CHECK_THROWS_AS((void)parse_toml_subset("[density\nkind = \"x\"\n"), config_error);
    CHECK_THROWS_AS((void)parse_toml_subset("alpha1 0.3\n"), config_error);
    CHECK_THROWS_AS((void)parse_toml_subset("key = {{{\n"), config_error);
    CHECK_THROWS_AS((void)parse_toml_subset("key =\n"), config_error);
}

TEST_CASE("json and toml configs load to identical specs") {
    const fs::path dir = test_dir();
    write_text(dir / "cfg.json", R"({
      "density": {"kind": "gaussian", "sigma": 1.0},
      "coupling": {"alpha1": 0.3, "alpha2": 0.1, "h": 0.2},
      "k_grid": {"min": 1.5, "max": 3.0, "count": 4},
      "simulator": {"kind": "finite-n", "n": 500},
      "run": {"dt": 0.02, "t_end": 40.0, "burn_in": 20.0, "eps": 0.01, "seed": 7},
      "tolerances": {"r_rel": 0.2},
      "output": {"dir": "", "svg": false},
      "jobs": 3
    })");
    write_text(dir / "cfg.toml",
               "jobs = 3\n"  // top-level keys precede any table
               "[density]\nkind = \"gaussian\"\nsigma = 1.0\n"
               "[coupling]\nalpha1 = 0.3\nalpha2 = 0.1\nh = 0.2\n"
               "[k_grid]\nmin = 1.5\nmax = 3.0\ncount = 4\n"
               "[simulator]\nkind = \"finite-n\"\nn = 500\n"
               "[run]\ndt = 0.02\nt_end = 40.0\nburn_in = 20.0\neps = 0.01\nseed = 7\n"
               "[tolerances]\nr_rel = 0.2\n"
               "[output]\ndir = \"\"\nsvg = false\n");
    const experiment_spec a = load_spec((dir / "cfg.json").string());
    const experiment_spec b = load_spec((dir / "cfg.toml").string());
    CHECK(a.hash() == b.hash());
    CHECK(a.k_values.size() == 4);
    CHECK(a.k_values[1] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(a.simulator == simulator_kind::finite_n);
    CHECK(a.n == 500);
    CHECK(a.tol.r_rel == 0.2);
    CHECK(a.tol.velocity_rel == 0.10);  // untouched default
    CHECK(a.jobs == 3);
    CHECK(b.seed == 7);
}

TEST_CASE("config schema is strict and validated") {
    CHECK_THROWS_AS((void)spec_from_json({{"densty", nlohmann::json::object()}}), config_error);
    CHECK_THROWS_AS((void)spec_from_json({{"coupling", {{"alpha3", 1.0}}}}), config_error);
    CHECK_THROWS_AS((void)spec_from_json({{"K", 2.0}, {"k_grid", {{"min", 1.0}, {"max", 2.0}, {"count", 2}}}}),
                    config_error);
    CHECK_THROWS_AS((void)spec_from_json({{"k_grid", {{"min", 1.0}, {"max", 2.0}, {"count", 0}}}}),
                    config_error);
    CHECK_THROWS_AS((void)spec_from_json({{"density", {{"kind", "poisson"}}}}), config_error);
    CHECK_THROWS_AS((void)spec_from_json({{"coupling", {{"alpha1", "x"}}}}), config_error);

    experiment_spec spec;  // default K grid is empty
    CHECK_THROWS_AS(spec.validate(), config_error);
    spec.k_values = {2.0, 1.5};
    CHECK_THROWS_AS(spec.validate(), config_error);
    spec.k_values = {1.5, 2.0};
    spec.jobs = 0;
    CHECK_THROWS_AS(spec.validate(), config_error);
    spec.jobs = 2;
    spec.burn_in = spec.t_end;
    CHECK_THROWS_AS(spec.validate(), config_error);
    spec.burn_in = 100.0;
    CHECK_NOTHROW(spec.validate());

    // hashes distinguish run-relevant fields
    experiment_spec other = spec;
    CHECK(other.hash() == spec.hash());
    other.eps = 2e-3;
    CHECK(other.hash() != spec.hash());
}

TEST_CASE("simulate command output is byte-identical across runs") {
    experiment_spec spec = small_galerkin_spec(2.4);
    spec.j_max = 8;
    spec.m_nodes = 100;
    spec.t_end = 20.0;
    spec.burn_in = 10.0;
    const fs::path d1 = test_dir() / "det1", d2 = test_dir() / "det2";
    spec.out_dir = d1.string();
    std::ostringstream s1, s2;
    CHECK(cmd_simulate(spec, s1) == 0);
    spec.out_dir = d2.string();
    CHECK(cmd_simulate(spec, s2) == 0);
    const std::string csv1 = read_text(d1 / "trace.csv");
    CHECK(csv1 == read_text(d2 / "trace.csv"));
    CHECK(csv1.substr(0, 38) == "t,re_eta1,im_eta1,re_eta2,im_eta2\n0,0.");
    CHECK(read_text(d1 / "trace.json") == read_text(d2 / "trace.json"));
}

TEST_CASE("verification: subcritical decay passes, zero tolerances fail") {
    experiment_spec spec = small_galerkin_spec(1.6);
    const verification_report rep = run_verification(spec);
    REQUIRE(rep.rows.size() == 1);
    const verification_row& row = rep.rows.front();
    CHECK(row.within_tolerance);
    CHECK(row.status == "ok");
    CHECK(row.r_measured < 20.0 * spec.eps);
    CHECK(row.outside_validity_window);  // |1.6 - 2.0935| > 0.2 K_c
    CHECK(row.decay_predicted == doctest::Approx(0.8 * std::cos(0.3) - 1.0).epsilon(1e-9));
    CHECK(std::abs(row.decay_measured - row.decay_predicted) <
          0.10 * std::abs(row.decay_predicted));
    CHECK(rep.overall_pass);

    spec.tol = {0.0, 0.0, 0.0};
    std::ostringstream out;
    CHECK(cmd_verify(spec, out) == 4);
    CHECK(out.str().find("VERIFY FAIL") != std::string::npos);
}

TEST_CASE("verification: supercritical velocity drift is flagged, coherence is not") {
    experiment_spec spec = small_galerkin_spec(2.4);
    spec.t_end = 80.0;
    spec.burn_in = 60.0;
    const verification_report rep = run_verification(spec);
    REQUIRE(rep.rows.size() == 1);
    const verification_row& row = rep.rows.front();
    // 2.4 = 1.146 K_c: amplitude still inside the 15% band, velocity drift
    // sin(a1) (K - K_c) is far past the 10% band
    CHECK(row.r0_predicted > 0.3);
    CHECK(std::abs(row.r_measured - row.r0_predicted) < 0.15 * row.r0_predicted);
    CHECK(!row.within_tolerance);
    CHECK(row.status.find("velocity outside tolerance") != std::string::npos);
    CHECK(row.status.find("coherence") == std::string::npos);
    CHECK(!rep.overall_pass);

    // every emitted prediction is recomputable from the coefficient block
    const double dk = 2.4 - rep.coeffs.k_c;
    const double r0 = std::sqrt(-rep.coeffs.p1.real() * dk / rep.coeffs.p3.real());
    const double scale = std::abs(1.0 / (cplx(0.0, 2.0) * rep.coeffs.f1));
    CHECK(row.r0_predicted == doctest::Approx(r0 * scale).epsilon(1e-12));
    CHECK(row.velocity_predicted == doctest::Approx(rep.coeffs.y_c).epsilon(1e-12));
}

TEST_CASE("verification: transcritical report-only and basin cases") {
    experiment_spec spec = small_galerkin_spec(2.1);
    spec.alpha1 = 0.0;
    spec.h = 0.5;

    SUBCASE("past K_c with no stable branch: reported only") {
        const verification_report rep = run_verification(spec);
        CHECK(rep.rows.front().within_tolerance);
        CHECK(rep.rows.front().status.find("no stable leading-order state") != std::string::npos);
        CHECK(rep.overall_pass);
        CHECK(rep.coeffs.p2.has_value());
        CHECK(rep.coeffs.p2->real() == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(verdict_text(rep.coeffs) == "subcritical, branch below K_c, unstable");
    }
    SUBCASE("below K_c inside the basin: smallness and decay asserted") {
        spec.k_values = {1.94};
        const verification_report rep = run_verification(spec);
        const verification_row& row = rep.rows.front();
        CHECK(row.within_tolerance);
        CHECK(row.r0_predicted == doctest::Approx(0.015).epsilon(1e-9));  // unstable branch
        CHECK(row.r_measured < 20.0 * spec.eps);
        CHECK(row.decay_measured == doctest::Approx(-0.03).epsilon(0.10));
    }
    SUBCASE("below K_c outside the basin: reported only") {
        spec.k_values = {1.94};
        spec.eps = 0.2;
        const verification_report rep = run_verification(spec);
        const verification_row& row = rep.rows.front();
        CHECK(row.within_tolerance);
        CHECK(row.status.find("outside the unstable-branch basin") != std::string::npos);
        CHECK(row.r_measured > 0.2);  // escaped upward, reported as measured
        CHECK(rep.overall_pass);
    }
}

TEST_CASE("sweep: ordered rows, smallness below threshold, sqrt branch exponent") {
    // finite-N: saturated states this far past K_c carry a locked plateau
    // whose mode tail would trip the Galerkin closure guard
    experiment_spec spec;
    spec.alpha1 = 0.3;
    spec.k_values = {1.9, 2.2, 2.3, 2.4, 2.5};
    spec.simulator = simulator_kind::finite_n;
    spec.n = 2000;
    spec.dt = 0.02;
    spec.t_end = 150.0;
    spec.burn_in = 100.0;
    spec.eps = 1e-3;
    spec.jobs = 4;
    const bifurcation_coefficients coeffs =
        coefficients(spec.model, spec.coupling(spec.k_values.front()));
    const std::vector<sweep_row> rows = run_sweep(spec, coeffs);
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].K == spec.k_values[i]);
        CHECK(rows[i].status == "ok");
    }
    CHECK(rows[0].r_measured < 20.0 * spec.eps);
    CHECK(rows[0].r0_predicted == 0.0);
    for (std::size_t i = 2; i < rows.size(); ++i) CHECK(rows[i].r_measured > rows[i - 1].r_measured);

    // log-log fit of the measured branch over the supercritical points
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double x = std::log(rows[i].K - coeffs.k_c), y = std::log(rows[i].r_measured);
        sx += x; sy += y; sxx += x * x; sxy += x * y; ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(0.5).epsilon(0.2));  // 0.5 +- 0.1

    const std::string csv = sweep_csv(rows);
    CHECK(csv.substr(0, csv.find('\n')) ==
          "K,r_measured,r_std,velocity_measured,r0_predicted,velocity_predicted,status");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("sweep: per-K failures are recorded and the run continues") {
    experiment_spec spec;
    spec.alpha1 = 0.0;
    spec.k_values = {1.0, 6.0};
    spec.j_max = 4;
    spec.m_nodes = 60;
    spec.t_end = 30.0;
    spec.burn_in = 20.0;
    spec.eps = 1e-2;
    const bifurcation_coefficients coeffs = coefficients(spec.model, spec.coupling(1.0));
    const std::vector<sweep_row> rows = run_sweep(spec, coeffs);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].status == "ok");
    CHECK(rows[1].status != "ok");  // deep supercritical J=4 run trips a guard
    CHECK(std::isnan(rows[1].r_measured));
    CHECK(sweep_csv(rows).find("nan") != std::string::npos);
}

TEST_CASE("cli: exit codes and oracle values end to end") {
    const fs::path dir = test_dir();
    const fs::path out = dir / "cli.out", err = dir / "cli.err";

    SUBCASE("transition prints the lagged critical point") {
        CHECK(run_cli("transition --density lorentzian --gamma 1 --alpha1 0.3", out, err) == 0);
        const std::string text = read_text(out);
        double kc = 0, yc = 0;
        REQUIRE(std::sscanf(text.c_str(), "K_c  = %lf\ny_c  = %lf", &kc, &yc) == 2);
        CHECK(kc == doctest::Approx(2.0 / std::cos(0.3)).epsilon(1e-10));
        CHECK(yc == doctest::Approx(std::tan(0.3)).epsilon(1e-10));
    }
    SUBCASE("flags override config values") {
        write_text(dir / "base.toml", "[density]\nkind = \"lorentzian\"\ngamma = 1.0\n"
                                      "[coupling]\nalpha1 = 0.3\n");
        CHECK(run_cli("transition --config " + (dir / "base.toml").string() +
                          " --gamma 2 --alpha1 0",
                      out, err) == 0);
        double kc = 0;
        REQUIRE(std::sscanf(read_text(out).c_str(), "K_c  = %lf", &kc) == 1);
        CHECK(kc == doctest::Approx(4.0).epsilon(1e-10));  // 2 gamma / cos(0)
    }
    SUBCASE("ambiguous maximizer exits 2") {
        write_text(dir / "bimodal.toml",
                   "[density]\nkind = \"mixture\"\n"
                   "components = [[0.5, -2.0, 0.3], [0.5, 2.0, 0.3]]\n");
        CHECK(run_cli("transition --config " + (dir / "bimodal.toml").string(), out, err) == 2);
        CHECK(read_text(err).find("error:") != std::string::npos);
    }
    SUBCASE("assumption violation exits 3") {
        CHECK(run_cli("coeffs --density gaussian --alpha1 1.6", out, err) == 3);
    }
    SUBCASE("zero tolerances exit 4") {
        write_text(dir / "tol0.toml", "[tolerances]\nr_rel = 0.0\nvelocity_rel = 0.0\n"
                                      "decay_rel = 0.0\n");
        CHECK(run_cli("verify --config " + (dir / "tol0.toml").string() +
                          " --alpha1 0.3 --K 1.6 --j-max 12 --m-nodes 200"
                          " --t-end 30 --burn-in 20 --eps 0.001",
                      out, err) == 4);
        CHECK(read_text(out).find("VERIFY FAIL") != std::string::npos);
    }
    SUBCASE("usage errors exit 1") {
        CHECK(run_cli("transition --badflag", out, err) == 1);
        CHECK(run_cli("", out, err) == 1);
        CHECK(run_cli("sweep --alpha1 0.3", out, err) == 1);  // empty K grid
        CHECK(run_cli("simulate --alpha1 0.3 --K-min 1 --K-max 2 --K-count 3 --t-end 1",
                      out, err) == 1);  // simulate needs a single K
        CHECK(run_cli("eigen --K 2 --K-min 1 --K-max 2 --K-count 2", out, err) == 1);
        CHECK(run_cli("transition --config " + (dir / "nosuch.toml").string(), out, err) == 1);
    }
    SUBCASE("help exits 0") {
        CHECK(run_cli("--help", out, err) == 0);
        CHECK(run_cli("verify --help", out, err) == 0);
    }
    SUBCASE("eigen csv marks the generalized branch") {
        CHECK(run_cli("eigen --alpha1 0.3 --K 0.5", out, err) == 0);
        const std::string text = read_text(out);
        CHECK(text.find("K,re_lambda,im_lambda,branch") == 0);
        CHECK(text.find("generalized") != std::string::npos);
        double k = 0, re = 0;
        REQUIRE(std::sscanf(text.c_str() + text.find('\n') + 1, "%lf,%lf", &k, &re) == 2);
        CHECK(re == doctest::Approx(0.25 * std::cos(0.3) - 1.0).epsilon(1e-8));
    }
}
