#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "biot/experiment.hpp"

using namespace biot;

namespace {

RunConfig small() {
    RunConfig c;
    c.cells = {4};
    c.n_steps = 2;
    c.iters = 3;
    c.majorant.lag_m = 1;
    c.majorant.cycles = 1;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("biot_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, ParseCells) {
    EXPECT_EQ(parse_cells("1/64"), 64);
    EXPECT_EQ(parse_cells(" 1 / 8 "), 8);
    EXPECT_EQ(parse_cells("0.015625"), 64);
    EXPECT_EQ(parse_cells("0.25"), 4);
    EXPECT_THROW(parse_cells("0.3"), std::invalid_argument);
    EXPECT_THROW(parse_cells("2/8"), std::invalid_argument);
    EXPECT_THROW(parse_cells("1/0"), std::invalid_argument);
    EXPECT_THROW(parse_cells(""), std::invalid_argument);
}

TEST(Config, TextRoundTrip) {
    RunConfig c = small();
    c.cells = {8, 16, 32};
    c.case_name = CaseName::ex2;
    c.majorant.flux_family = Family::RT0;
    c.majorant.modes = {false, true, true};
    c.majorant.iterative.stated_denominator = true;
    c.eta_tol = 1e-7;
    c.out = "somewhere";
    const std::string text = config_text(c);
    RunConfig back;
    apply_config(back, parse_config_text(text, "cfg"), "cfg");
    EXPECT_EQ(config_text(back), text);
    EXPECT_EQ(back.cells, c.cells);
    EXPECT_EQ(back.majorant.modes, c.majorant.modes);
    EXPECT_EQ(back.eta_tol, 1e-7);
}

TEST(Config, ErrorsNameTheLine) {
    const std::string text = "[problem]\ncase = ex1\n\n# comment\n[solver]\niters = many\n";
    RunConfig c;
    auto entries = parse_config_text(text, "run.ini");
    EXPECT_EQ(error_of([&] { apply_config(c, entries, "run.ini"); }).rfind("run.ini:6: iters:", 0), 0u);

    EXPECT_EQ(error_of([] { parse_config_text("[solver]\nbogus = 1\n", "a"); }).rfind("a:2:", 0), 0u);
    EXPECT_EQ(error_of([] { parse_config_text("\n\n[nowhere]\n", "a"); }).rfind("a:3:", 0), 0u);
    EXPECT_EQ(error_of([] { parse_config_text("[problem]\niters = 3\n", "a"); }).rfind("a:2:", 0), 0u);
    EXPECT_EQ(error_of([] { parse_config_text("case = ex1\ncase = ex2\n", "a"); }).rfind("a:2:", 0), 0u);
    EXPECT_EQ(error_of([] { parse_config_text("[problem\n", "a"); }).rfind("a:1:", 0), 0u);
    EXPECT_EQ(error_of([] { parse_config_text("just words\n", "a"); }).rfind("a:1:", 0), 0u);
    // keys without a section header are accepted
    EXPECT_EQ(parse_config_text("iters = 4 ; trailing\n", "a").at(0).value, "4");
}

TEST(Config, Validation) {
    RunConfig c = small();
    c.out = "x";
    EXPECT_NO_THROW(validate(c));
    auto bad = [&](auto edit) {
        RunConfig d = c;
        edit(d);
        EXPECT_THROW(validate(d), ConfigError);
    };
    bad([](RunConfig& d) { d.cells.clear(); });
    bad([](RunConfig& d) { d.majorant.modes = {false, false, false}; });
    bad([](RunConfig& d) { d.majorant.lag_m = 3; });
    bad([](RunConfig& d) { d.iters = 1; d.majorant.modes = {true, false, false}; });
    bad([](RunConfig& d) { d.tuning = TuningMode::user; });
    bad([](RunConfig& d) { d.out.clear(); });
    EXPECT_THROW(set_config_value(c, "iter-modes", "consecutive,sideways"), std::invalid_argument);
    EXPECT_THROW(set_config_value(c, "nope", "1"), ConfigError);
}

TEST(Experiment, EmptySweepWritesNothing) {
    auto dir = scratch("empty");
    RunConfig c = small();
    c.out = dir.string();
    set_config_value(c, "h", "");
    std::ostringstream log;
    EXPECT_THROW(run_experiment(c, log), ConfigError);
    EXPECT_FALSE(std::filesystem::exists(dir));
}

TEST(Experiment, DeterministicAndParseable) {
    auto a = scratch("det_a"), b = scratch("det_b");
    RunConfig c = small();
    c.cells = {2, 4};
    c.vtk = true;
    std::ostringstream log;
    c.out = a.string();
    auto pa = run_experiment(c, log);
    c.out = b.string();
    run_experiment(c, log);
    for (const char* f : {"results.csv", "iterations.csv", "table3.csv", "h4/indicators_2.csv", "h4/step_2.vtk"}) {
        ASSERT_TRUE(std::filesystem::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }

    CsvTable t3 = parse_csv(slurp(a / "table3.csv"));
    ASSERT_EQ(t3.header.size(), 8u);
    ASSERT_EQ(t3.rows.size(), 2u);
    EXPECT_EQ(t3.rows[1][0], "1/4");
    const Accumulated& acc = pa[1].acc;
    // five significant digits survive the round trip
    EXPECT_NEAR(t3.value(1, "e_p"), acc.rel_e_p(), 5e-5 * acc.rel_e_p());
    EXPECT_NEAR(t3.value(1, "ieff_M"), efficiency(acc.M, acc.combined), 5e-5 * efficiency(acc.M, acc.combined));

    CsvTable res = parse_csv(slurp(a / "results.csv"));
    for (std::size_t r = 0; r < res.rows.size(); ++r) {
        for (auto [bound, err] : {std::pair{"Mh_p", "e_p"}, {"Mh_u", "e_u"}, {"M_p", "e_p"}, {"M_u", "e_u"},
                                  {"M", "e_combined"}, {"Mh_p_l2", "p_l2"}, {"Mh_u_div", "div_l2"}})
            EXPECT_GE(res.value(r, bound), res.value(r, err)) << bound;
    }

    CsvTable it = parse_csv(slurp(a / "iterations.csv"));
    EXPECT_EQ(it.rows.size(), 2u * 2u * 3u);
    CsvTable ind = parse_csv(slurp(a / "h4/indicators_2.csv"));
    EXPECT_EQ(ind.rows.size(), 4u * 4u * 4u);
    EXPECT_FALSE(std::filesystem::exists(a / "h4/indicators_1.csv"));

    // the manifest is itself a valid config
    RunConfig back;
    apply_config(back, parse_config_text(slurp(a / "manifest.ini"), "manifest"), "manifest");
    EXPECT_EQ(back.cells, c.cells);
    EXPECT_NE(slurp(a / "manifest.ini").find("q = 0.2307692307"), std::string::npos);
}

TEST(Experiment, FormatIsFiveSignificantDigits) {
    RunConfig c = small();
    PointResult p = run_point(c, 2);
    const std::string csv = table3_csv({p});
    CsvTable t = parse_csv(csv);
    for (std::size_t k = 1; k < t.header.size(); ++k) {
        const std::string& v = t.rows[0][k];
        ASSERT_EQ(v.size(), 10u) << v;
        EXPECT_EQ(v[1], '.');
        EXPECT_EQ(v[6], 'e');
    }
}
