#include <gtest/gtest.h>

#include "nfcast/config.hpp"

using namespace nfcast;

TEST(Config, DefaultsValidate) {
  const RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.targets, dataset::target_series());
  EXPECT_EQ(c.split, 0.7);
  EXPECT_EQ(c.horizon, 13u);
  EXPECT_EQ(c.sweep_neurons, (std::vector<std::size_t>{10, 14, 18}));
  EXPECT_EQ(c.series.size(), 7u);
}

TEST(Config, ParsesKeyValueText) {
  RunConfig c;
  c.load_text(
      "# experiment\n"
      "model = mlp\n"
      "neurons=14   # trailing comment\n"
      "\n"
      "features = autoregressive\n"
      "lags = 3\n"
      "targets = agri_production\n"
      "sweep_mf_kinds = tri, gbell\n"
      "items.agri_production = Wheat; Rice\n"
      "learning_rate = 0.1\n");
  EXPECT_EQ(c.model, ModelKind::Mlp);
  EXPECT_EQ(c.neurons, 14u);
  EXPECT_EQ(c.features.kind, dataset::FeatureMode::Kind::Autoregressive);
  EXPECT_EQ(c.features.lags, 3u);
  EXPECT_EQ(c.targets, std::vector<std::string>{"agri_production"});
  EXPECT_EQ(c.sweep_mf_kinds, (std::vector<MfKind>{MfKind::Triangular, MfKind::GBell}));
  EXPECT_EQ(c.series.at("agri_production").items, (std::vector<std::string>{"Wheat", "Rice"}));
  EXPECT_EQ(c.learning_rate, 0.1);
  EXPECT_FALSE(c.epochs.has_value());
  EXPECT_EQ(c.mlp_config(14, 3).learning_rate, 0.1);
  EXPECT_EQ(c.anfis_config(3, MfKind::GBell, 3).epochs, 200u);
}

TEST(Config, LaterSettingsOverrideEarlierOnes) {
  RunConfig c;
  c.load_text("seed = 1\nseed = 2\n");
  c.set("seed", "9");
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, ErrorsNameTheLine) {
  RunConfig c;
  const auto message = [&](const std::string& text) {
    try {
      c.load_text(text, "run.conf");
    } catch (const InvalidArgument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("seed = 1\nbogus = 3\n").find("run.conf:2"), std::string::npos);
  EXPECT_NE(message("seed = 1\nbogus = 3\n").find("bogus"), std::string::npos);
  EXPECT_NE(message("just words\n").find("run.conf:1"), std::string::npos);
  EXPECT_NE(message("split = lots\n").find("split"), std::string::npos);
  EXPECT_NE(message("neurons = -3\n").find("neurons"), std::string::npos);
  EXPECT_NE(message("mf_kind = gaussian\n").find("gaussian"), std::string::npos);
}

TEST(Config, ValidateCatchesBadCombinations) {
  RunConfig c;
  c.split = 1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = RunConfig{};
  c.mfs_per_input = 5;  // 5^5 rules over the exogenous inputs
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = RunConfig{};
  c.targets = {"wheat_exports"};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = RunConfig{};
  c.set("learning_rate", "0");
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Config, EveryKeyIsSettable) {
  RunConfig c;
  for (const auto& key : c.keys()) {
    EXPECT_NO_THROW({
      RunConfig probe;
      try {
        probe.set(key, "1");
      } catch (const InvalidArgument& e) {
        // Value errors are fine; only unknown keys are not.
        if (std::string(e.what()).find("unknown config key") != std::string::npos) throw;
      }
    }) << key;
  }
}
