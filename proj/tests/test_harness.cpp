#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "deconv/harness.hpp"
#include "deconv/report_io.hpp"
#include "deconv/rng.hpp"

using namespace deconv;

namespace {

ConfigMap base_map(const std::string& extra = "") {
    return ConfigMap::from_string(
        "statistic = T1\n"
        "target = normal:0,1\n"
        "noise = normal:1\n"
        "kernel = indicator\n"
        "h = 0.4\n"
        "n = 200\n"
        "replications = 40\n"
        "seed = 7\n" +
        extra);
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("flat config text") {
    ConfigMap m = ConfigMap::from_string(
        "# comment\n"
        "\n"
        "alpha = 1.5   # trailing comment\n"
        "name= first\n"
        "name =second\n"
        "count = 1e6\n"
        "seed = 0xff\n"
        "flag = yes\n");
    CHECK(m.get_double("alpha") == 1.5);
    CHECK(m.get_string("name") == "second");  // later assignment wins
    CHECK(m.get_int("count") == 1000000);
    CHECK(m.get_uint64("seed", 0) == 255);
    CHECK(m.get_bool("flag", false));
    CHECK(m.get_double("missing", -2.0) == -2.0);
    CHECK_FALSE(m.maybe_double("missing").has_value());
    CHECK_THROWS_AS(m.get_double("name"), std::invalid_argument);
    CHECK_THROWS_AS(m.get_string("missing"), std::invalid_argument);

    CHECK_THROWS_WITH_AS(ConfigMap::from_string("a = 1\nbroken line\n"),
                         doctest::Contains("line 2"), std::invalid_argument);

    // canonical text is sorted by key, so the hash ignores input order
    ConfigMap m1 = ConfigMap::from_string("b = 2\na = 1\n");
    ConfigMap m2 = ConfigMap::from_string("a = 1\nb = 2\n");
    CHECK(m1.canonical_text() == m2.canonical_text());
    CHECK(m1.hash() == m2.hash());
    CHECK(m1.canonical_text() == "a = 1\nb = 2\n");

    std::uint64_t before = m1.hash();
    m1.apply_override("a=3");
    CHECK(m1.get_int("a") == 3);
    CHECK(m1.hash() != before);
    CHECK_THROWS_AS(m1.apply_override("nonsense"), std::invalid_argument);
}

TEST_CASE("experiment config from flat keys") {
    ExperimentConfig cfg = ExperimentConfig::from_map(base_map());
    CHECK(cfg.kind() == StatisticKind::density);
    CHECK(cfg.statistic_name() == "T1");
    CHECK(cfg.n == 200);
    CHECK(cfg.replications == 40);
    CHECK(cfg.seed == 7);
    CHECK(cfg.h == 0.4);
    REQUIRE(cfg.x.has_value());
    CHECK(*cfg.x == 0.0);  // pointwise statistics default to the origin

    CHECK_THROWS_WITH_AS(ExperimentConfig::from_map(ConfigMap::from_string(
                             "statistic = T1\nh = 0.4\nbogus = 1\n")),
                         doctest::Contains("unknown config key"), std::invalid_argument);
    CHECK_THROWS_AS(ExperimentConfig::from_map(ConfigMap::from_string("h = 0.4\n")),
                    std::invalid_argument);
    CHECK_THROWS_AS(ExperimentConfig::from_map(ConfigMap::from_string(
                        "statistic = T2a\nh = 0.4\nschedule = A1\nwidth = 3.14\n")),
                    std::invalid_argument);

    // interval statistics split a width symmetrically about zero
    ExperimentConfig ivl = ExperimentConfig::from_map(ConfigMap::from_string(
        "statistic = T2b\nh = 0.25\nwidth = 3\n"));
    REQUIRE(ivl.a.has_value());
    REQUIRE(ivl.b.has_value());
    CHECK(*ivl.a == -1.5);
    CHECK(*ivl.b == 1.5);

    // schedule resolution: A2 on the pi-lattice at index 520 gives u = 3
    ExperimentConfig sched = ExperimentConfig::from_map(ConfigMap::from_string(
        "statistic = T2b\nschedule = A2\nwidth = 3.141592653589793\n"
        "schedule_index = 520\n"));
    CHECK(sched.h == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(sched.schedule_note.find("A2") != std::string::npos);
    CHECK(sched.schedule_note.find("520") != std::string::npos);

    // the theorem key is an alias for statistic
    ExperimentConfig ali = ExperimentConfig::from_map(
        ConfigMap::from_string("theorem = T7\nnoise = cauchy:1\nh = 0.25\n"));
    CHECK(ali.statistic_name() == "T7");
    CHECK(ali.kind() == StatisticKind::cauchy_closed);
}

TEST_CASE("replication loop is deterministic across thread counts") {
    MonteCarloReport one = run_experiment(ExperimentConfig::from_map(base_map()));
    MonteCarloReport three =
        run_experiment(ExperimentConfig::from_map(base_map("threads = 3\n")));

    REQUIRE(one.standardized.size() == three.standardized.size());
    for (size_t i = 0; i < one.standardized.size(); ++i) {
        CHECK(one.standardized[i] == three.standardized[i]);  // bitwise
    }
    CHECK(one.empirical_mean == three.empirical_mean);
    CHECK(one.empirical_variance == three.empirical_variance);
    CHECK(one.ks_statistic == three.ks_statistic);

    // replication m draws only from streams derived from (seed, m)
    REQUIRE(one.rep_seeds.size() == 40);
    for (size_t m = 0; m < one.rep_seeds.size(); ++m) {
        CHECK(one.rep_seeds[m] == rng::derive_key(7, m));
    }
    CHECK(one.n == 200);
    CHECK(one.h == 0.4);
    CHECK(one.statistic == "T1");
    CHECK(one.config_hash == base_map().hash());
    CHECK(one.n_failed == 0);
    CHECK(one.wall_seconds > 0.0);
}

TEST_CASE("cosine statistic has an exact half variance at small h") {
    ExperimentConfig cfg = ExperimentConfig::from_map(ConfigMap::from_string(
        "statistic = U\nh = 0.05\nn = 50\nreplications = 400\nseed = 5\n"));
    CHECK(cfg.kind() == StatisticKind::cosine);
    MonteCarloReport rep = run_experiment(cfg);
    // X = Y + Z is N(0,2); cos(X/h) has mean e^{-400} and second moment 1/2
    CHECK(rep.predicted_variance == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rep.limit_variance == 0.5);
    CHECK(rep.predicted_mean == 0.0);

    // centered at the exact mean, so the sample mean sits at zero scale-wise
    double se = std::sqrt(rep.empirical_variance / (double)rep.standardized.size());
    CHECK(std::abs(rep.empirical_mean) <= 4.0 * se);
    CHECK(rep.ks_p_value > 1e-3);
}

TEST_CASE("profile table resolution does not move the results") {
    MonteCarloReport coarse =
        run_experiment(ExperimentConfig::from_map(base_map("profile_step = 0.02\n")));
    MonteCarloReport fine =
        run_experiment(ExperimentConfig::from_map(base_map("profile_step = 0.002\n")));
    CHECK(coarse.empirical_mean ==
          doctest::Approx(fine.empirical_mean).epsilon(1e-4));
    CHECK(coarse.empirical_variance ==
          doctest::Approx(fine.empirical_variance).epsilon(1e-4));

    CHECK_THROWS_AS(ExperimentConfig::from_map(base_map("profile_step = 0.5\n")),
                    std::invalid_argument);
}

TEST_CASE("heavy-tailed draws fall back to direct integration") {
    // stable(1.5) samples reach far outside the profile range now and then
    ExperimentConfig cfg = ExperimentConfig::from_map(ConfigMap::from_string(
        "statistic = T4\nnoise = stable:1.5,1\nh = 0.3\nn = 150\n"
        "replications = 20\nseed = 3\n"));
    MonteCarloReport rep = run_experiment(cfg);
    CHECK(rep.n_failed == 0);
    CHECK(rep.profile_fallbacks >= 1);
    CHECK(rep.standardized.size() == 20);
}

TEST_CASE("report serialization round trips exactly") {
    MonteCarloReport rep = run_experiment(ExperimentConfig::from_map(base_map()));
    rep.note = "round trip check";

    MonteCarloReport back = report_from_json(report_to_json(rep));
    CHECK(back.statistic == rep.statistic);
    CHECK(back.config_hash == rep.config_hash);
    CHECK(back.config_entries == rep.config_entries);
    CHECK(back.n == rep.n);
    CHECK(back.replications == rep.replications);
    CHECK(back.h == rep.h);
    CHECK(back.seed == rep.seed);
    CHECK(back.predicted_mean == rep.predicted_mean);
    CHECK(back.predicted_variance == rep.predicted_variance);
    CHECK(back.limit_variance == rep.limit_variance);
    CHECK(back.empirical_mean == rep.empirical_mean);
    CHECK(back.empirical_variance == rep.empirical_variance);
    CHECK(back.ks_statistic == rep.ks_statistic);
    CHECK(back.ks_p_value == rep.ks_p_value);
    CHECK(back.n_failed == rep.n_failed);
    CHECK(back.profile_fallbacks == rep.profile_fallbacks);
    CHECK(back.note == rep.note);
    CHECK(back.a_used.has_value() == rep.a_used.has_value());
    REQUIRE(back.rep_seeds.size() == rep.rep_seeds.size());
    CHECK(back.rep_seeds == rep.rep_seeds);
    REQUIRE(back.standardized.size() == rep.standardized.size());
    for (size_t i = 0; i < rep.standardized.size(); ++i) {
        CHECK(back.standardized[i] == rep.standardized[i]);  // bitwise through json
    }

    const char* path = "/tmp/deconv_test_report.json";
    write_report_json(rep, path);
    MonteCarloReport fromfile = read_report_json(path);
    CHECK(fromfile.config_hash == rep.config_hash);
    CHECK(fromfile.standardized == rep.standardized);
    std::remove(path);
}

TEST_CASE("csv report layout") {
    MonteCarloReport rep = run_experiment(ExperimentConfig::from_map(base_map()));
    const char* path = "/tmp/deconv_test_report.csv";
    write_report_csv(rep, path);

    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line, all;
    size_t commented = 0, rows = 0;
    bool saw_columns = false;
    while (std::getline(in, line)) {
        all += line;
        all += '\n';
        if (!line.empty() && line[0] == '#') {
            ++commented;
        } else if (!saw_columns) {
            saw_columns = true;  // first uncommented line names the columns
        } else {
            ++rows;
        }
    }
    CHECK(commented >= 8);
    CHECK(saw_columns);
    CHECK(rows == rep.standardized.size());

    std::ostringstream hex;
    hex << std::hex << rep.config_hash;
    CHECK(all.find(hex.str()) != std::string::npos);
    std::remove(path);
}

TEST_CASE("bandwidth sweep") {
    ExperimentConfig base = ExperimentConfig::from_map(base_map());
    CHECK_THROWS_AS(rate_sweep(base, {0.5, 0.4}), std::invalid_argument);

    SweepTable t = rate_sweep(base, {0.5, 0.45, 0.4});
    CHECK(t.statistic == "T1");
    REQUIRE(t.rows.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        const SweepRow& r = t.rows[i];
        CHECK(r.h == std::vector<double>{0.5, 0.45, 0.4}[i]);
        CHECK(r.predicted_variance > 0.0);
        CHECK(r.limit_variance > 0.0);
        CHECK(r.ratio_to_limit ==
              doctest::Approx(r.empirical_variance / r.limit_variance).epsilon(1e-12));
    }

    std::string js = sweep_to_json(t);
    CHECK(js.find("\"rows\"") != std::string::npos);
    CHECK(js.find("ratio_to_limit") != std::string::npos);
}

}  // TEST_SUITE
