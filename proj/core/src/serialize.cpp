#include "mmgne/serialize.hpp"

#include <cstdio>
#include <string>

namespace mmgne {

namespace {

void expect_schema(const Json& j, const char* schema) {
  require(j.is_object(), std::string("expected a JSON object with schema ") + schema);
  const auto it = j.find("schema");
  require(it != j.end() && it->is_string() && it->get<std::string>() == schema,
          std::string("expected schema ") + schema);
}

const Json& field(const Json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw InvalidArgument(std::string("missing field '") + name + "'");
  return *it;
}

}  // namespace

Json complex_vector_to_json(const CVector& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back({v(k).real(), v(k).imag()});
  return out;
}

CVector complex_vector_from_json(const Json& j) {
  require(j.is_array(), "complex vector must be an array of [re, im] pairs");
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    const Json& z = j[k];
    require(z.is_array() && z.size() == 2, "complex entries must be [re, im] pairs");
    v(static_cast<Eigen::Index>(k)) = Complex(z[0].get<double>(), z[1].get<double>());
  }
  return v;
}

Json complex_matrix_to_json(const CMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(complex_vector_to_json(m.row(r).transpose()));
  return out;
}

CMatrix complex_matrix_from_json(const Json& j) {
  require(j.is_array() && !j.empty(), "complex matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const CVector first = complex_vector_from_json(j[0]);
  CMatrix m(rows, first.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const CVector row = complex_vector_from_json(j[static_cast<std::size_t>(r)]);
    require(row.size() == first.size(), "complex matrix rows differ in length");
    m.row(r) = row.transpose();
  }
  return m;
}

Json real_vector_to_json(const RVector& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

RVector real_vector_from_json(const Json& j) {
  require(j.is_array(), "real vector must be an array");
  RVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  return v;
}

Json channel_to_json(const ChannelRealization& ch) {
  Json out;
  out["schema"] = kChannelSchema;
  out["n_links"] = ch.n_links;
  out["k_tx"] = ch.k_tx;
  out["l_rx"] = ch.l_rx;
  out["noise_variance"] = real_vector_to_json(ch.noise_variance);
  Json h = Json::array();
  for (int i = 0; i < ch.n_links; ++i) {
    Json row = Json::array();
    for (int n = 0; n < ch.n_links; ++n) row.push_back(complex_matrix_to_json(ch.at(i, n)));
    h.push_back(std::move(row));
  }
  out["h"] = std::move(h);
  if (ch.has_covariance()) {
    Json cov = Json::array();
    for (int i = 0; i < ch.n_links; ++i) {
      Json row = Json::array();
      for (int n = 0; n < ch.n_links; ++n) row.push_back(complex_matrix_to_json(ch.cov(i, n)));
      cov.push_back(std::move(row));
    }
    out["covariance"] = std::move(cov);
  }
  return out;
}

ChannelRealization channel_from_json(const Json& j) {
  expect_schema(j, kChannelSchema);
  ChannelRealization ch;
  ch.n_links = field(j, "n_links").get<int>();
  ch.k_tx = field(j, "k_tx").get<int>();
  ch.l_rx = field(j, "l_rx").get<int>();
  ch.noise_variance = real_vector_from_json(field(j, "noise_variance"));
  const Json& h = field(j, "h");
  require(h.is_array() && static_cast<int>(h.size()) == ch.n_links, "channel: h must be N x N");
  for (int i = 0; i < ch.n_links; ++i) {
    require(static_cast<int>(h[static_cast<std::size_t>(i)].size()) == ch.n_links, "channel: h must be N x N");
    for (int n = 0; n < ch.n_links; ++n) {
      ch.h.push_back(complex_matrix_from_json(h[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)]));
    }
  }
  if (const auto it = j.find("covariance"); it != j.end()) {
    for (int i = 0; i < ch.n_links; ++i) {
      for (int n = 0; n < ch.n_links; ++n) {
        ch.covariance.push_back(
            complex_matrix_from_json((*it)[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)]));
      }
    }
  }
  ch.validate();
  return ch;
}

Json beamformers_to_json(const BeamformerSet& bf) {
  Json out;
  out["schema"] = kBeamformerSchema;
  Json w = Json::array();
  Json u = Json::array();
  for (const auto& v : bf.w) w.push_back(complex_vector_to_json(v));
  for (const auto& v : bf.u) u.push_back(complex_vector_to_json(v));
  out["w"] = std::move(w);
  out["u"] = std::move(u);
  return out;
}

BeamformerSet beamformers_from_json(const Json& j) {
  expect_schema(j, kBeamformerSchema);
  BeamformerSet bf;
  for (const auto& v : field(j, "w")) bf.w.push_back(complex_vector_from_json(v));
  for (const auto& v : field(j, "u")) bf.u.push_back(complex_vector_from_json(v));
  require(bf.w.size() == bf.u.size(), "beamformers: w and u differ in count");
  return bf;
}

Json gne_result_to_json(const GneResult& r) {
  Json out;
  out["schema"] = kGneResultSchema;
  out["verdict"] = to_string(r.verdict);
  out["iterations"] = r.iterations;
  out["messages"] = r.messages;
  out["delta"] = r.delta;
  out["infeasible_player"] = r.infeasible_player;
  out["p_star"] = {{"p", real_vector_to_json(r.p_star.p)},
                   {"p_min", real_vector_to_json(r.p_star.p_min)},
                   {"p_max", real_vector_to_json(r.p_star.p_max)}};
  Json rows = Json::array();
  for (const auto& p : r.per_round_powers) rows.push_back(real_vector_to_json(p));
  out["per_round_powers"] = std::move(rows);
  return out;
}

Json run_trace_to_json(const RunTrace& trace) {
  Json out;
  out["schema"] = kRunTraceSchema;
  out["scheme"] = to_string(trace.scheme);
  out["verdict"] = to_string(trace.verdict);
  out["outer_rounds"] = trace.outer_rounds;
  out["epsilon"] = trace.epsilon;
  out["delta"] = trace.delta;
  out["infeasible_player"] = trace.infeasible_player;
  out["totals"] = {{"messages", trace.total_messages()},
                   {"csi_reports", trace.total_csi_reports()},
                   {"power_iterations", trace.total_power_iterations()}};
  out["final"] = {{"p", real_vector_to_json(trace.final_p)},
                  {"beams", beamformers_to_json(trace.final_beams)}};
  Json rounds = Json::array();
  for (const auto& r : trace.rounds) {
    rounds.push_back({{"p", real_vector_to_json(r.p)},
                      {"beam_digest", r.beam_digest},
                      {"sinr", real_vector_to_json(r.sinr)},
                      {"sum_supply_power", r.sum_supply_power},
                      {"sum_spectral_efficiency", r.sum_spectral_efficiency},
                      {"inner_iterations", r.inner_iterations},
                      {"messages", r.messages},
                      {"csi_reports", r.csi_reports},
                      {"tx_fallbacks", r.tx_fallbacks},
                      {"beam_delta", r.beam_delta}});
  }
  out["rounds"] = std::move(rounds);
  return out;
}

RunTrace run_trace_from_json(const Json& j) {
  expect_schema(j, kRunTraceSchema);
  RunTrace t;
  t.scheme = parse_tx_scheme(field(j, "scheme").get<std::string>());
  t.verdict = parse_verdict(field(j, "verdict").get<std::string>());
  t.outer_rounds = field(j, "outer_rounds").get<int>();
  t.epsilon = field(j, "epsilon").get<double>();
  t.delta = field(j, "delta").get<double>();
  t.infeasible_player = field(j, "infeasible_player").get<int>();
  const Json& fin = field(j, "final");
  t.final_p = real_vector_from_json(field(fin, "p"));
  t.final_beams = beamformers_from_json(field(fin, "beams"));
  for (const auto& r : field(j, "rounds")) {
    OuterRound o;
    o.p = real_vector_from_json(field(r, "p"));
    o.beam_digest = field(r, "beam_digest").get<std::string>();
    o.sinr = real_vector_from_json(field(r, "sinr"));
    o.sum_supply_power = field(r, "sum_supply_power").get<double>();
    o.sum_spectral_efficiency = field(r, "sum_spectral_efficiency").get<double>();
    o.inner_iterations = field(r, "inner_iterations").get<int>();
    o.messages = field(r, "messages").get<long>();
    o.csi_reports = field(r, "csi_reports").get<long>();
    o.tx_fallbacks = field(r, "tx_fallbacks").get<int>();
    o.beam_delta = field(r, "beam_delta").get<double>();
    t.rounds.push_back(std::move(o));
  }
  return t;
}

void write_round_powers_csv(std::ostream& os, const std::vector<RVector>& per_round_powers) {
  os << "round,player,power\n";
  char buf[64];
  for (std::size_t t = 0; t < per_round_powers.size(); ++t) {
    const RVector& p = per_round_powers[t];
    for (Eigen::Index n = 0; n < p.size(); ++n) {
      std::snprintf(buf, sizeof(buf), "%.17g", p(n));
      os << t << ',' << n << ',' << buf << '\n';
    }
  }
}

}  // namespace mmgne
