#include <gtest/gtest.h>

#include "ulmsens/config.hpp"

using namespace ulmsens;

TEST(RunConfig, DefaultsDescribeTheReferenceSetup) {
    const RunConfig cfg = parse_run_config_text("{}");
    EXPECT_EQ(cfg.imaging.geometry().width, 512u);
    EXPECT_EQ(cfg.imaging.geometry().height, 512u);
    EXPECT_EQ(cfg.synth.n_frames, 500u);
    EXPECT_EQ(cfg.kde.bandwidth_wavelengths, 2.0);
    EXPECT_EQ(cfg.kde.quantile, 0.75);
    EXPECT_EQ(cfg.ssim.window_radius, 5);
    EXPECT_EQ(cfg.sweep.repetitions, 3);
    EXPECT_EQ(cfg.sweep.fp_rates, (std::vector<double>{0.0, 0.05, 0.10, 0.15, 0.20}));
    EXPECT_EQ(cfg.psnr_cap_db, 100.0);
    EXPECT_FALSE(cfg.log_compress);
    EXPECT_TRUE(cfg.fixed_scale);
    EXPECT_NEAR(cfg.kde_bandwidth_m(), 2.0 * 1540.0 / 2.841e6, 1e-15);
}

TEST(RunConfig, SectionsOverrideDefaults) {
    const RunConfig cfg = parse_run_config_text(R"({
        "imaging": {"center_frequency_hz": 1540, "fov_m": {"x_min": 0, "x_max": 4, "z_min": 0, "z_max": 3}},
        "synth": {"seed": 9, "n_frames": 20, "trunk_rate": 30, "leaf_rate": 3},
        "kde": {"quantile": 0.5},
        "ssim": {"window_radius": 3},
        "sweep": {"fp_rates": [0, 0.1], "repetitions": 1, "log_compress": true},
        "output": {"fixed_scale": false}
    })");
    EXPECT_EQ(cfg.imaging.geometry().width, 40u);
    EXPECT_EQ(cfg.imaging.geometry().height, 30u);
    EXPECT_EQ(cfg.synth.seed, 9u);
    EXPECT_EQ(cfg.synth.rates.trunk_rate, 30.0);
    EXPECT_EQ(cfg.kde.quantile, 0.5);
    EXPECT_EQ(cfg.ssim.window_radius, 3);
    EXPECT_EQ(cfg.sweep.fp_rates.size(), 2u);
    EXPECT_EQ(cfg.sweep.fn_rates.size(), 5u);
    EXPECT_TRUE(cfg.log_compress);
    EXPECT_FALSE(cfg.fixed_scale);
}

TEST(RunConfig, UnknownKeysAreRejected) {
    EXPECT_THROW(parse_run_config_text(R"({"bogus": 1})"), ValidationError);
    try {
        parse_run_config_text(R"({"kde": {"bandwith_wavelengths": 2}})");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("kde.bandwith_wavelengths"), std::string::npos);
    }
}

TEST(RunConfig, TypeAndSyntaxErrorsAreParseErrors) {
    EXPECT_THROW(parse_run_config_text("{"), ParseError);
    EXPECT_THROW(parse_run_config_text(R"({"synth": {"seed": "one"}})"), ParseError);
    EXPECT_THROW(parse_run_config_text(R"({"synth": {"n_frames": -3}})"), ParseError);
    EXPECT_THROW(parse_run_config_text(R"({"output": {"fixed_scale": 1}})"), ParseError);
}

TEST(RunConfig, ValidationRunsBeforeWork) {
    EXPECT_THROW(parse_run_config_text(R"({"kde": {"quantile": 1.5}})"), ValidationError);
    EXPECT_THROW(parse_run_config_text(R"({"sweep": {"fp_rates": [0.2, 0.1]}})"), ValidationError);
    EXPECT_THROW(parse_run_config_text(R"({"sweep": {"psnr_cap_db": 0}})"), ValidationError);
    EXPECT_THROW(parse_run_config_text(R"({"ssim": {"k1": 0}})"), ValidationError);
    EXPECT_THROW(parse_run_config_text(R"({"synth": {"n_trunk": 0}})"), ValidationError);
    EXPECT_THROW(parse_run_config_text(R"({"synth": {"trunk_rate": 10, "leaf_rate": 5}})"),
                 ValidationError);
    EXPECT_THROW(parse_run_config_text(R"({"imaging": {"center_frequency_hz": -1}})"),
                 ValidationError);
}

TEST(RunConfig, EchoRoundTrips) {
    const RunConfig cfg = parse_run_config_text(R"({"synth": {"seed": 12345678901234}, "kde": {"quantile": 0.6}})");
    const auto echo = to_json(cfg);
    for (const char* section : {"imaging", "synth", "kde", "ssim", "sweep", "output"}) {
        EXPECT_TRUE(echo.contains(section)) << section;
    }
    const RunConfig again = parse_run_config(echo);
    EXPECT_EQ(to_json(again).dump(), echo.dump());
    EXPECT_EQ(again.synth.seed, 12345678901234u);
}

TEST(RunConfig, MissingFileIsIoError) {
    EXPECT_THROW(load_run_config("/nonexistent/ulmsens.json"), IoError);
}
