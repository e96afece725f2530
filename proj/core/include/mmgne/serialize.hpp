#pragma once

#include <ostream>

#include <json.hpp>

#include "mmgne/channel.hpp"
#include "mmgne/game.hpp"
#include "mmgne/harness.hpp"
#include "mmgne/netmodel.hpp"

namespace mmgne {

using Json = nlohmann::json;

// Complex numbers are [re, im] pairs; vectors are arrays of pairs; matrices
// are arrays of rows. Every document carries a "schema" tag with a version.
inline constexpr const char* kChannelSchema = "mmgne.channel/1";
inline constexpr const char* kBeamformerSchema = "mmgne.beamformers/1";
inline constexpr const char* kGneResultSchema = "mmgne.gne_result/1";
inline constexpr const char* kRunTraceSchema = "mmgne.run_trace/1";

Json complex_vector_to_json(const CVector& v);
CVector complex_vector_from_json(const Json& j);
Json complex_matrix_to_json(const CMatrix& m);
CMatrix complex_matrix_from_json(const Json& j);
Json real_vector_to_json(const RVector& v);
RVector real_vector_from_json(const Json& j);

Json channel_to_json(const ChannelRealization& ch);
ChannelRealization channel_from_json(const Json& j);

Json beamformers_to_json(const BeamformerSet& bf);
BeamformerSet beamformers_from_json(const Json& j);

Json gne_result_to_json(const GneResult& r);

Json run_trace_to_json(const RunTrace& trace);
RunTrace run_trace_from_json(const Json& j);

/// CSV with columns round,player,power.
void write_round_powers_csv(std::ostream& os, const std::vector<RVector>& per_round_powers);

}  // namespace mmgne
