// Copyright 2026 The metricdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METRICDP_REPORT_IO_HPP_
#define METRICDP_REPORT_IO_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "metricdp/audit.hpp"
#include "metricdp/tuner.hpp"

namespace metricdp {

/// Provenance stamped into every output: '#' comment lines in CSV, fields in
/// JSON. config_hash is the FNV-1a hash of the canonical config text.
struct OutputHeader {
  std::string config_hash;
  std::uint64_t seed = 0;
};

std::uint64_t fnv1a_hash(const std::string& text);
std::string hash_hex(std::uint64_t hash);

/// Long-format CSV: input_word,output_word,probability,count. '.' decimal,
/// no locale dependence.
void write_transition_csv(std::ostream& out, const TransitionModel& f,
                          const EmbeddingStore& store,
                          const OutputHeader& header);

std::string audit_report_json(const AuditReport& report,
                              const OutputHeader& header);

void write_curve_csv(std::ostream& out, const TradeoffCurve& curve,
                     const OutputHeader& header);

void write_search_log_csv(std::ostream& out, const TuneResult& result,
                          const OutputHeader& header);

std::string tune_result_json(const TuneResult& result,
                             const OutputHeader& header);

void write_dp_report_csv(std::ostream& out, const DpCheckReport& report,
                         const EmbeddingStore& store,
                         const OutputHeader& header);

}  // namespace metricdp

#endif  // METRICDP_REPORT_IO_HPP_
