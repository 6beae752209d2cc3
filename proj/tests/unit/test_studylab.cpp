#include "rdlab/studylab.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rdlab;

namespace {

StudyConfig parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

StudyConfig small()
{
    return parse("problem=sinsin\n"
                 "levels=4,8,16\n"
                 "sigmas=0,2*sigma*\n"
                 "estimators=consistent,aubin,fem1,repin_frolov\n"
                 "c_dagger=0.35\n"
                 "threads=2\n");
}

std::string csv(const SweepResult& r)
{
    std::ostringstream s;
    emit_csv(r, s);
    return s.str();
}

} // namespace

TEST(StudyLab, SigmaEntries)
{
    EXPECT_EQ(SigmaEntry::parse("0").resolve(0.1), 0.0);
    EXPECT_EQ(SigmaEntry::parse(" 1e4 ").resolve(0.1), 1e4);
    EXPECT_NEAR(SigmaEntry::parse("h^-2").resolve(0.1), 100.0, 1e-12);
    EXPECT_NEAR(SigmaEntry::parse("h^-1").resolve(0.25), 4.0, 1e-15);
    EXPECT_NEAR(SigmaEntry::parse("3*h^-1").resolve(0.25), 12.0, 1e-15);
    EXPECT_EQ(SigmaEntry::parse("2*sigma*").resolve(0.1, 7.0), 14.0);
    EXPECT_EQ(SigmaEntry::parse("sigma*").resolve(0.1, 7.0), 7.0);
    EXPECT_EQ(SigmaEntry::parse("h^-2").label, "h^-2");
    EXPECT_THROW((void)SigmaEntry::parse("sigma*").resolve(0.1), std::invalid_argument);
    EXPECT_THROW((void)SigmaEntry::parse("h^-0"), std::invalid_argument);
    EXPECT_THROW((void)SigmaEntry::parse("-1"), std::invalid_argument);
    EXPECT_THROW((void)SigmaEntry::parse("abc"), std::invalid_argument);
    EXPECT_THROW((void)SigmaEntry::parse(""), std::invalid_argument);
}

TEST(StudyLab, ParseConfig)
{
    const StudyConfig c = parse("# comment\n"
                                "problem = polybubble\n"
                                "levels=8,16,32,64   # trailing\n"
                                "sigmas=0, 1, h^-2\n"
                                "estimators=fem1,fem2\n"
                                "flux=l2project\n"
                                "constants=calibrate\n"
                                "calibration_problems=sinsin,polybubble\n"
                                "A=4,1\n"
                                "eps=opt\n"
                                "sigma_star=sz\n"
                                "out=result.csv\n");
    EXPECT_EQ(c.problem, "polybubble");
    EXPECT_EQ(c.levels, (std::vector<std::size_t>{8, 16, 32, 64}));
    ASSERT_EQ(c.sigmas.size(), 3u);
    EXPECT_EQ(c.sigmas[2].kind, SigmaEntry::Kind::HPower);
    EXPECT_EQ(c.estimators, (std::vector<std::string>{"fem1", "fem2"}));
    EXPECT_EQ(c.flux, FluxRecovery::L2Project);
    EXPECT_TRUE(c.calibrate);
    EXPECT_EQ(c.calibration_problems.size(), 2u);
    EXPECT_EQ(c.A, Mat2::diag(4.0, 1.0));
    EXPECT_TRUE(c.optimize_eps);
    EXPECT_EQ(c.sigma_star_source, SigmaStarSource::ScottZhang);
    EXPECT_EQ(c.out, "result.csv");

    EXPECT_THROW((void)parse("bogus=1\n"), std::invalid_argument);
    EXPECT_THROW((void)parse("levels\n"), std::invalid_argument);
    EXPECT_THROW((void)parse("estimators=magic\n"), std::invalid_argument);
    EXPECT_THROW((void)parse("problem=nope\n"), std::invalid_argument);
    EXPECT_THROW((void)parse("levels=\n"), std::invalid_argument);
    EXPECT_THROW((void)parse("levels=8,x\n"), std::invalid_argument);
    EXPECT_THROW((void)parse("flux=best\n"), std::invalid_argument);
    EXPECT_THROW((void)parse("A=1,2,3,1\n"), std::invalid_argument);
    EXPECT_THROW((void)parse("c_dagger=-1\n"), std::invalid_argument);
}

TEST(StudyLab, ObservedRates)
{
    const auto r = observed_rates({8, 16, 32, 48}, {4.0, 1.0, 0.5, 0.25});
    EXPECT_FALSE(r[0]);
    EXPECT_DOUBLE_EQ(*r[1], 2.0);
    EXPECT_DOUBLE_EQ(*r[2], 1.0);
    EXPECT_FALSE(r[3]);
    const auto d = observed_rates({8, 16}, {1.0, 2.0});
    EXPECT_DOUBLE_EQ(*d[1], -1.0);
}

TEST(StudyLab, SweepStructure)
{
    const StudyConfig c = small();
    const SweepResult r = run_sweep(c);
    ASSERT_EQ(r.cells.size(), 6u);
    ASSERT_EQ(r.rows.size(), 24u);
    std::size_t i = 0;
    for (std::size_t n : c.levels) {
        for (const std::string label : {"0", "2*sigma*"}) {
            for (const std::string& e : c.estimators) {
                const SweepRow& row = r.rows[i++];
                EXPECT_EQ(row.level, n);
                EXPECT_EQ(row.sigma_label, label);
                EXPECT_EQ(row.estimator, e);
            }
        }
    }
    for (const SweepRow& row : r.rows) {
        SCOPED_TRACE(row.estimator + " " + row.sigma_label);
        const bool zero = row.sigma == 0.0;
        if ((row.estimator == "aubin" && zero) || (row.estimator == "repin_frolov" && !zero) ||
            (row.estimator == "fem1" && !zero)) {
            EXPECT_FALSE(row.ok());
            continue;
        }
        ASSERT_TRUE(row.ok()) << row.error;
        EXPECT_NEAR(row.total, row.prefactor * (row.diffusion + row.residual_mult * row.residual_sq) + row.oscillation,
                    1e-12 * row.total);
        ASSERT_TRUE(row.effectivity);
        EXPECT_GE(*row.effectivity, 1.0);
        EXPECT_EQ(row.rate.has_value(), row.level != 4);
    }
    // sigma = 2 sigma*: the consistent majorant is the Aubin majorant
    for (std::size_t k = 0; k < r.rows.size(); k += 4) {
        if (r.rows[k].sigma_label == "2*sigma*") {
            EXPECT_EQ(r.rows[k].total, r.rows[k + 1].total);
            EXPECT_NEAR(r.rows[k].sigma, 2.0 / std::pow(0.35 * r.rows[k].h, 2), 1e-9);
        }
    }
}

TEST(StudyLab, Deterministic)
{
    StudyConfig c = small();
    const std::string a = csv(run_sweep(c));
    c.threads = 1;
    const std::string b = csv(run_sweep(c));
    c.threads = 5;
    const std::string d = csv(run_sweep(c));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, d);
}

TEST(StudyLab, MissingConstantsGiveErrorRows)
{
    StudyConfig c = parse("levels=4,8\nsigmas=0\nestimators=fem1,fem2,consistent,churilova\n");
    const SweepResult r = run_sweep(c);
    for (const SweepRow& row : r.rows) {
        if (row.estimator == "churilova") {
            EXPECT_TRUE(row.ok());
        } else {
            EXPECT_FALSE(row.ok());
            EXPECT_NE(row.error.find("needs"), std::string::npos);
        }
    }
}

TEST(StudyLab, ZeroProblem)
{
    const SweepResult r = run_sweep(parse("problem=zero\nlevels=4\nsigmas=0,5\nestimators=consistent,fem1\nc_dagger=0.3\n"));
    for (const SweepCell& cell : r.cells) {
        ASSERT_TRUE(cell.errors);
        EXPECT_EQ(cell.errors->energy, 0.0);
    }
    for (const SweepRow& row : r.rows) {
        ASSERT_TRUE(row.ok());
        EXPECT_EQ(row.total, 0.0);
        EXPECT_FALSE(row.effectivity);
    }
}

TEST(StudyLab, CsvRoundTrip)
{
    const SweepResult r = run_sweep(small());
    const std::string text = csv(r);
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "level,h,sigma,estimator,total,diffusion,residual_mult,residual_sq,oscillation,true_energy_sq,"
              "effectivity,rate");
    std::istringstream in(text);
    const std::vector<SweepRow> back = read_csv(in);
    ASSERT_EQ(back.size(), r.rows.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        const SweepRow& a = r.rows[i];
        const SweepRow& b = back[i];
        EXPECT_EQ(a.level, b.level);
        EXPECT_EQ(a.h, b.h);
        EXPECT_EQ(a.sigma, b.sigma);
        EXPECT_EQ(a.estimator, b.estimator);
        EXPECT_EQ(a.ok(), b.ok());
        if (a.ok()) {
            EXPECT_EQ(a.total, b.total);
            EXPECT_EQ(a.diffusion, b.diffusion);
            EXPECT_EQ(a.residual_mult, b.residual_mult);
            EXPECT_EQ(a.residual_sq, b.residual_sq);
            EXPECT_EQ(a.oscillation, b.oscillation);
        }
        EXPECT_EQ(a.true_energy_sq, b.true_energy_sq);
        EXPECT_EQ(a.effectivity, b.effectivity);
        EXPECT_EQ(a.rate, b.rate);
    }

    EXPECT_THROW(emit_csv(r, std::filesystem::path("/nonexistent-dir/x.csv")), std::runtime_error);
    EXPECT_THROW(emit_csv(SweepResult{}, std::cout), std::invalid_argument);
    std::istringstream bad("a,b\n");
    EXPECT_THROW((void)read_csv(bad), std::invalid_argument);
}

TEST(StudyLab, Summary)
{
    const SweepResult r = run_sweep(parse("levels=8,16,32\nsigmas=0\nestimators=fem1\nc_dagger=0.35\n"));
    std::ostringstream s;
    emit_summary(r, s);
    const std::string text = s.str();
    EXPECT_NE(text.find("a priori: |e|_0 2, |e|_1 1, |||e||| 1"), std::string::npos);
    const auto& cell = r.cells.back();
    const auto& prev = r.cells[r.cells.size() - 2];
    EXPECT_NEAR(std::log2(prev.errors->a_norm / cell.errors->a_norm), 1.0, 0.05);
    EXPECT_NE(text.find("fem1"), std::string::npos);
}

TEST(StudyLab, CalibrationAndConstantsFile)
{
    const StudyConfig c = parse("levels=4,8\nsigmas=0,1\ncalibration_problems=sinsin,polybubble\n");
    const CalibrationOutcome a = run_calibration(c);
    const CalibrationOutcome b = run_calibration(c);
    ASSERT_EQ(a.reports.size(), 4u);
    EXPECT_EQ(*a.constants.c_dagger, *b.constants.c_dagger);
    EXPECT_EQ(*a.constants.c_tilde, *b.constants.c_tilde);
    EXPECT_EQ(*a.constants.c_dagger, a.reports[0].value());
    EXPECT_EQ(*a.constants.c_sz, a.reports[1].value());
    EXPECT_NEAR(*a.constants.c_tilde, a.reports[2].value() + 2 * a.reports[3].value() * a.reports[1].value(), 1e-14);
    for (const CalibrationReport& rep : a.reports) {
        double sup = 0.0;
        for (const CalibrationRow& row : rep.rows) {
            sup = std::max(sup, row.ratio);
            EXPECT_EQ(row.supremum, sup);
        }
    }

    const auto dir = std::filesystem::temp_directory_path() / "rdlab_studylab_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "constants.txt");
        write_constants(a.constants, out);
        std::ofstream cfg(dir / "study.cfg");
        cfg << "levels=4\nestimators=fem1,fem2\nconstants_file=constants.txt\n";
    }
    const StudyConfig loaded = load_config(dir / "study.cfg");
    EXPECT_EQ(*loaded.c_dagger, *a.constants.c_dagger);
    EXPECT_EQ(*loaded.c_sz, *a.constants.c_sz);
    EXPECT_EQ(*loaded.c_tilde, *a.constants.c_tilde);
    EXPECT_FALSE(loaded.calibrate);
    std::filesystem::remove_all(dir);
}

TEST(StudyLab, InverseCheck)
{
    StudyConfig c = parse("levels=4,8,16\nsigmas=0\nc_dagger=0.35\nc_sz=0.13\nc_tilde=3.7\n");
    EXPECT_THROW((void)run_inverse_check(c), std::invalid_argument);
    c.flux = FluxRecovery::L2Project;
    const InverseCheckResult r = run_inverse_check(c);
    ASSERT_EQ(r.rows.size(), 6u);
    for (const InverseRow& row : r.rows) {
        ASSERT_TRUE(row.error.empty()) << row.error;
        EXPECT_GT(row.ratio, 1.0);
        EXPECT_NEAR(row.ratio, row.majorant / (row.true_energy_sq + row.oscillation_sq), 1e-14 * row.ratio);
    }
    EXPECT_EQ(r.rows[0].k, 1);
    EXPECT_EQ(r.rows[1].k, 2);
    EXPECT_LE(r.spread(1), 3.0);
    EXPECT_LE(r.spread(2), 3.0);
    std::ostringstream s;
    emit_inverse_csv(r, s);
    EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "level,h,sigma,k,majorant,true_energy_sq,oscillation_sq,ratio");
}
