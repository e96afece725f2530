#include <gtest/gtest.h>

#include <sstream>

#include "mmgne/serialize.hpp"
#include "support.hpp"

using namespace mmgne;

TEST(Serialize, ComplexRoundTripIsExact) {
  Rng rng(1);
  const CVector v = rng.complex_normal_vector(7);
  EXPECT_TRUE(complex_vector_from_json(Json::parse(complex_vector_to_json(v).dump())) == v);
  CMatrix m(3, 2);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) m(r, c) = rng.complex_normal();
  EXPECT_TRUE(complex_matrix_from_json(Json::parse(complex_matrix_to_json(m).dump())) == m);
  const RVector x = RVector::LinSpaced(5, 0.1, 0.9);
  EXPECT_TRUE(real_vector_from_json(Json::parse(real_vector_to_json(x).dump())) == x);
}

TEST(Serialize, ChannelRoundTrip) {
  const Topology t = generate_topology(3, 50.0, 2);
  ChannelModelParams cp;
  cp.rng_seed = 5;
  const auto ch = generate_channel(t, cp);
  const auto back = channel_from_json(Json::parse(channel_to_json(ch).dump()));
  ASSERT_EQ(back.n_links, 3);
  for (std::size_t k = 0; k < ch.h.size(); ++k) ASSERT_TRUE(back.h[k] == ch.h[k]);
  EXPECT_TRUE(back.noise_variance == ch.noise_variance);
  EXPECT_EQ(channel_to_json(ch).at("schema"), kChannelSchema);

  const auto cov = sample_from_covariance(t, covariance_from_params(t, cp), 1.0, 4);
  const auto cov_back = channel_from_json(channel_to_json(cov));
  ASSERT_TRUE(cov_back.has_covariance());
  EXPECT_TRUE(cov_back.cov(1, 2) == cov.cov(1, 2));
}

TEST(Serialize, RejectsWrongSchemaAndShape) {
  Json j = channel_to_json(mmgne::testing::random_channel(2, 2, 2, 1));
  j["schema"] = "mmgne.channel/999";
  EXPECT_THROW(channel_from_json(j), InvalidArgument);
  j = channel_to_json(mmgne::testing::random_channel(2, 2, 2, 1));
  j["h"][0][1] = Json::array();
  EXPECT_THROW(channel_from_json(j), InvalidArgument);
}

TEST(Serialize, BeamformersRoundTrip) {
  const auto bf = mmgne::testing::unit_beams(3, 4, 2, 6);
  const auto back = beamformers_from_json(Json::parse(beamformers_to_json(bf).dump()));
  ASSERT_EQ(back.size(), 3);
  for (int n = 0; n < 3; ++n) {
    EXPECT_TRUE(back.w[n] == bf.w[n]);
    EXPECT_TRUE(back.u[n] == bf.u[n]);
  }
}

TEST(Serialize, RunTraceRoundTrip) {
  InstanceConfig ic;
  ic.topology.n_links = 3;
  ic.seed = 12;
  const auto trace = two_stage(build_instance(ic), TxScheme::matched_filter, {});
  const Json j = run_trace_to_json(trace);
  EXPECT_EQ(j.at("schema"), kRunTraceSchema);
  const auto back = run_trace_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.verdict, trace.verdict);
  EXPECT_EQ(back.outer_rounds, trace.outer_rounds);
  EXPECT_TRUE(back.final_p == trace.final_p);
  EXPECT_EQ(back.rounds.size(), trace.rounds.size());
  EXPECT_EQ(run_trace_to_json(back).dump(), j.dump());
}

TEST(Serialize, RoundPowersCsv) {
  std::ostringstream os;
  write_round_powers_csv(os, {RVector::Constant(2, 0.5), (RVector(2) << 0.75, 1.0).finished()});
  EXPECT_EQ(os.str(), "round,player,power\n0,0,0.5\n0,1,0.5\n1,0,0.75\n1,1,1\n");
}
