#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cdkf/bench.hpp"
#include "cdkf/config.hpp"
#include "cdkf/errors.hpp"
#include "cdkf/io.hpp"
#include "support.hpp"

using namespace cdkf;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST(Config, EmptyObjectGivesPlaceholderGlucoseModel) {
  const auto cfg = test::default_config();
  EXPECT_EQ(cfg.model, ModelKind::glucose);
  EXPECT_EQ(cfg.Ts, 5.0);
  EXPECT_EQ(cfg.ukf.euler_dt, 1.0);
  EXPECT_EQ(cfg.ukf.alpha, 0.01);
  EXPECT_EQ(cfg.params.K_u, placeholder::K_u);
  EXPECT_EQ(cfg.y_ss, 100.0);

  const auto m = discrete_model(cfg);
  EXPECT_EQ(m.n_states(), 4u);
  EXPECT_EQ(m.Q, Matrix{{placeholder::Q}});
  EXPECT_EQ(m.R, Matrix{{placeholder::R}});

  const Matrix sigma = diffusion_matrix(cfg);
  EXPECT_EQ(sigma, Matrix::Diagonal({placeholder::sigma_u, 0.0, std::sqrt(placeholder::Q * 5.0), 0.0}));
}

TEST(Config, OverridesAndForms) {
  const auto cfg = parse_config(R"({"K_u": -800, "tau_u": 60, "Ts": 1, "Q": 0.5, "R": [9],
                                    "sigma": [0.1, 0.2, 0.3, 0.4], "euler_dt": 0.25,
                                    "x0": [0, 0, 0, 1], "P0": [1, 2, 3, 4], "t0": 30})");
  EXPECT_EQ(cfg.params.K_u, -800.0);
  EXPECT_EQ(cfg.Ts, 1.0);
  EXPECT_EQ(cfg.ukf.Ts, 1.0);
  EXPECT_EQ(cfg.ukf.euler_dt, 0.25);
  EXPECT_EQ(diffusion_matrix(cfg), Matrix::Diagonal({0.1, 0.2, 0.3, 0.4}));
  const auto b = build_bundle(cfg);
  EXPECT_EQ(b.x0, Matrix::Column({0, 0, 0, 1}));
  EXPECT_EQ(b.P0, Matrix::Diagonal({1, 2, 3, 4}));
  EXPECT_EQ(b.R, Matrix{{9.0}});
  EXPECT_EQ(b.t0, 30.0);

  // scalar sigma scales the disturbance column
  const auto s = parse_config(R"({"sigma": 2})");
  const auto sys = continuous_model(s);
  EXPECT_EQ(diffusion_matrix(s), mat_scale(sys.E_c, 2.0));
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config(R"({"Kd": 1})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(parse_config("[1, 2]"), ConfigError);
  EXPECT_THROW(parse_config(R"({"tau_u": 0})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"Ts": -5})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"A": 0.5})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"model": "pk"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"Q": "big"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"model": "discrete", "A": 0.5, "simulator": "sde"})"), ConfigError);
  EXPECT_THROW(build_bundle(parse_config(R"({"x0": [1, 2]})")), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, ScalarDiscreteDemo) {
  const auto cfg = parse_config(R"({"model": "discrete", "A": 0.5, "C": 1, "Q": 1, "R": 1})");
  const auto b = build_bundle(cfg);
  EXPECT_NEAR(b.gain.P_pred(0, 0), (0.25 + std::sqrt(4.0625)) / 2.0, 1e-9);
  EXPECT_NEAR(b.gain.K_inf(0, 0), 0.5311, 1e-4);
  EXPECT_EQ(b.sde, nullptr);
}

TEST(Config, DiffusionProcessNoiseMatchesVanLoan) {
  const auto cfg = parse_config(R"({"kf_process_noise": "diffusion"})");
  const auto m = discrete_model(cfg);
  const Matrix Qx = kf_process_noise(cfg, m);
  EXPECT_LE(test::rel_diff(Qx, discretize_diffusion(continuous_model(cfg).A_c, diffusion_matrix(cfg), cfg.Ts)),
            1e-15);
  EXPECT_EQ(kf_process_noise(test::default_config(), m), m.state_noise());
}

TEST(Config, LoadFromFile) {
  const auto dir = test::tmp_dir("config");
  test::write_file(dir / "c.json", R"({"R": 2.5})");
  EXPECT_EQ(load_config(dir / "c.json").R, Matrix{{2.5}});
}

TEST(CgmCsv, ParsesAndFlagsMissing) {
  std::istringstream in("time_min,glucose_mgdl\n0,100\n5,\n10,nan\n15,120.5\n");
  const auto r = read_cgm_csv(in);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(r[0].glucose_mgdl, 100.0);
  EXPECT_FALSE(r[1].glucose_mgdl);
  EXPECT_FALSE(r[2].glucose_mgdl);
  EXPECT_EQ(r[3].time_min, 15.0);
  EXPECT_EQ(r[3].glucose_mgdl, 120.5);
}

TEST(CgmCsv, RoundTrip) {
  const std::vector<CgmRecord> recs{{0.0, 101.25}, {5.0, std::nullopt}, {10.0, 99.0 + 1.0 / 3.0}};
  std::stringstream ss;
  write_cgm_csv(recs, ss);
  const auto back = read_cgm_csv(ss);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].time_min, recs[i].time_min);
    EXPECT_EQ(back[i].glucose_mgdl, recs[i].glucose_mgdl);
  }
}

TEST(CgmCsv, Errors) {
  std::istringstream bad_header("t,g\n0,100\n");
  EXPECT_THROW(read_cgm_csv(bad_header), InputError);
  std::istringstream backwards("time_min,glucose_mgdl\n5,100\n0,100\n");
  EXPECT_THROW(read_cgm_csv(backwards), InputError);
  std::istringstream garbage("time_min,glucose_mgdl\n0,abc\n");
  try {
    (void)read_cgm_csv(garbage);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_cgm_csv(std::filesystem::path("/nonexistent.csv")), InputError);
}

TEST(EventsCsv, ParsesKinds) {
  std::istringstream in("time_min,kind,value\n0,basal_IU_per_min,0.01\n10,bolus_IU,2\n20,meal_g,50\n");
  const auto ev = read_events_csv(in);
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_EQ(ev[0].kind, EventKind::basal_IU_per_min);
  EXPECT_EQ(ev[1].kind, EventKind::bolus_IU);
  EXPECT_EQ(ev[2].value, 50.0);
  EXPECT_EQ(to_string(EventKind::meal_g), "meal_g");
}

TEST(EventsCsv, Errors) {
  std::istringstream unknown("time_min,kind,value\n0,snack,10\n");
  EXPECT_THROW(read_events_csv(unknown), InputError);
  std::istringstream negative("time_min,kind,value\n0,meal_g,-10\n");
  EXPECT_THROW(read_events_csv(negative), InputError);
  std::istringstream short_row("time_min,kind,value\n0,meal_g\n");
  EXPECT_THROW(read_events_csv(short_row), InputError);
  std::istringstream empty("time_min,kind,value\n");
  EXPECT_TRUE(read_events_csv(empty).empty());
}

TEST(ScheduleFromEvents, RatesOverOneSample) {
  const std::vector<EventRecord> ev{{0.0, EventKind::basal_IU_per_min, 0.01},
                                    {10.0, EventKind::bolus_IU, 2.0},
                                    {20.0, EventKind::meal_g, 50.0},
                                    {22.0, EventKind::meal_g, 10.0},
                                    {40.0, EventKind::basal_IU_per_min, 0.0}};
  const auto s = schedule_from_events(ev, 5.0);
  ASSERT_EQ(s.n_inputs(), 1u);
  ASSERT_EQ(s.n_disturbances(), 1u);
  auto u = [&](double t) { return s.inputs_at(t)[0]; };
  auto d = [&](double t) { return s.disturbances_at(t)[0]; };
  EXPECT_DOUBLE_EQ(u(0.0), 0.01);
  EXPECT_DOUBLE_EQ(u(9.9), 0.01);
  EXPECT_DOUBLE_EQ(u(10.0), 0.01 + 0.4);
  EXPECT_DOUBLE_EQ(u(14.9), 0.01 + 0.4);
  EXPECT_DOUBLE_EQ(u(15.0), 0.01);
  EXPECT_DOUBLE_EQ(u(45.0), 0.0);
  EXPECT_DOUBLE_EQ(d(19.0), 0.0);
  EXPECT_DOUBLE_EQ(d(20.0), 10.0);
  EXPECT_DOUBLE_EQ(d(23.0), 12.0);
  EXPECT_DOUBLE_EQ(d(25.0), 2.0);
  EXPECT_DOUBLE_EQ(d(27.0), 0.0);

  const auto none = schedule_from_events({}, 5.0);
  EXPECT_EQ(none.inputs_at(100.0), Matrix{{0.0}});
  EXPECT_EQ(none.disturbances_at(100.0), Matrix{{0.0}});
}

TEST(ToMeasurements, GridAlignment) {
  const std::vector<CgmRecord> ok{{0.0, 100.0}, {5.0000004, std::nullopt}, {15.0, 90.0}};
  const auto m = to_measurements(ok, 0.0, 5.0);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[1].t, 5.0);
  EXPECT_FALSE(m[1].y);
  EXPECT_EQ(*m[2].y, Matrix{{90.0}});

  const std::vector<CgmRecord> off{{0.0, 100.0}, {5.0, 100.0}, {11.0, 100.0}, {12.0, 100.0}};
  try {
    (void)to_measurements(off, 0.0, 5.0);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("cgm row 3"), std::string::npos) << what;
    EXPECT_NE(what.find("t = 11"), std::string::npos) << what;
  }
}

TEST(FilterCsv, ColumnsAndMissingCells) {
  const auto bundle = build_bundle(test::default_config());
  const std::vector<Measurement> meas{{0.0, Matrix{{101.0}}}, {5.0, std::nullopt}, {10.0, Matrix{{99.5}}}};
  const auto steps = run_filter(FilterKind::kf, bundle, meas, InputSchedule::zero(1, 1));
  std::ostringstream os;
  write_filter_csv(steps, os);
  const auto rows = lines(os.str());
  ASSERT_EQ(rows.size(), 4u);
  const auto header = split(rows[0]);
  ASSERT_EQ(header.size(), 16u);
  EXPECT_EQ(header[0], "k");
  EXPECT_EQ(header[4], "x_hat_filt_0");
  EXPECT_EQ(header[8], "P_diag_0");
  EXPECT_EQ(header[15], "missing_flag");

  const auto first = split(rows[1]);
  ASSERT_EQ(first.size(), 16u);
  EXPECT_NEAR(std::stod(first[2]), 101.0, 1e-12);
  EXPECT_EQ(first[15], "0");
  const auto gap = split(rows[2]);
  EXPECT_EQ(gap[2], "nan");
  EXPECT_EQ(gap[12], "nan");
  EXPECT_EQ(gap[15], "1");
  EXPECT_EQ(split(rows[3])[1], "10");

  const auto sum = summarize_innovations(steps);
  EXPECT_EQ(sum.steps, 3u);
  EXPECT_EQ(sum.updates, 2u);
}

TEST(TimingCsv, RoundTrip) {
  TimingReport r;
  r.entries.push_back({"mat_mul", "n=4", 100, 12.5, 12.0, 0.1 / 3.0, 11.0});
  r.entries.push_back({"ukf_predict", "n=4", 10000, 23800.25, 23700.0, 250.0, 23000.0});
  std::stringstream ss;
  write_timing_csv(r, ss);
  EXPECT_EQ(lines(ss.str()).front(), kTimingCsvHeader);
  const auto back = read_timing_csv(ss);
  ASSERT_EQ(back.entries.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.entries[i].op, r.entries[i].op);
    EXPECT_EQ(back.entries[i].size, r.entries[i].size);
    EXPECT_EQ(back.entries[i].reps, r.entries[i].reps);
    EXPECT_EQ(back.entries[i].mean_ns, r.entries[i].mean_ns);
    EXPECT_EQ(back.entries[i].std_ns, r.entries[i].std_ns);
    EXPECT_EQ(back.entries[i].min_ns, r.entries[i].min_ns);
  }
  std::istringstream bad("op,size\nx,y\n");
  EXPECT_THROW(read_timing_csv(bad), InputError);
  std::istringstream cell(std::string(kTimingCsvHeader) + "\nmat_mul,n=2,100,abc,1,1,1\n");
  EXPECT_THROW(read_timing_csv(cell), InputError);
}
