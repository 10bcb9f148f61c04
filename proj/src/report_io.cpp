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

#include "metricdp/report_io.hpp"

#include <cstdio>
#include <ostream>

#include "json.hpp"

namespace metricdp {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_comment_header(std::ostream& out, const OutputHeader& header) {
  out << "# config_hash=" << header.config_hash << "\n";
  out << "# seed=" << header.seed << "\n";
}

nlohmann::json report_json_body(const AuditReport& report) {
  return nlohmann::json{{"epsilon", report.epsilon},
                        {"variant", report.variant.describe()},
                        {"mechanism", report.mechanism_label},
                        {"e_m", report.e_m},
                        {"e_m_half_width", report.e_m_half_width},
                        {"l_m", report.l_m},
                        {"l_m_half_width", report.l_m_half_width},
                        {"uncovered_mass", report.uncovered_mass},
                        {"samples_per_word", report.samples_per_word},
                        {"repetitions", report.repetitions},
                        {"audit_seed", report.seed}};
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

void write_transition_csv(std::ostream& out, const TransitionModel& f,
                          const EmbeddingStore& store,
                          const OutputHeader& header) {
  write_comment_header(out, header);
  out << "# samples_per_row=" << f.samples_per_row << "\n";
  out << "input_word,output_word,probability,count\n";
  for (std::size_t r = 0; r < f.row_ids.size(); ++r) {
    const std::string& input = store.word(f.row_ids[r]);
    for (const TransitionModel::Cell& cell : f.rows[r]) {
      out << input << "," << store.word(cell.col) << "," << fmt(cell.p) << ","
          << cell.count << "\n";
    }
  }
}

std::string audit_report_json(const AuditReport& report,
                              const OutputHeader& header) {
  nlohmann::json j = report_json_body(report);
  j["config_hash"] = header.config_hash;
  j["seed"] = header.seed;
  return j.dump(2) + "\n";
}

void write_curve_csv(std::ostream& out, const TradeoffCurve& curve,
                     const OutputHeader& header) {
  write_comment_header(out, header);
  out << "epsilon,variant,e_m,e_m_half_width,l_m,l_m_half_width,"
         "uncovered_mass,samples_per_word,repetitions,seed\n";
  for (const AuditReport& p : curve.points) {
    out << fmt(p.epsilon) << ",\"" << p.variant.describe() << "\","
        << fmt(p.e_m) << "," << fmt(p.e_m_half_width) << "," << fmt(p.l_m)
        << "," << fmt(p.l_m_half_width) << "," << fmt(p.uncovered_mass) << ","
        << p.samples_per_word << "," << p.repetitions << "," << p.seed << "\n";
  }
}

void write_search_log_csv(std::ostream& out, const TuneResult& result,
                          const OutputHeader& header) {
  write_comment_header(out, header);
  out << "phase,epsilon,t,e_m,l_m,feasible\n";
  for (const SearchEntry& e : result.log) {
    out << (e.phase == SearchEntry::Phase::kDoubling ? "doubling" : "grid")
        << "," << fmt(e.epsilon) << "," << fmt(e.t) << "," << fmt(e.e_m) << ","
        << fmt(e.l_m) << "," << (e.feasible ? 1 : 0) << "\n";
  }
}

std::string tune_result_json(const TuneResult& result,
                             const OutputHeader& header) {
  nlohmann::json log = nlohmann::json::array();
  for (const SearchEntry& e : result.log) {
    log.push_back(nlohmann::json{
        {"phase",
         e.phase == SearchEntry::Phase::kDoubling ? "doubling" : "grid"},
        {"epsilon", e.epsilon},
        {"t", e.t},
        {"e_m", e.e_m},
        {"l_m", e.l_m},
        {"feasible", e.feasible}});
  }
  nlohmann::json j{{"config_hash", header.config_hash},
                   {"seed", header.seed},
                   {"epsilon_opt", result.epsilon_opt},
                   {"t_opt", result.t_opt},
                   {"best", report_json_body(result.best)},
                   {"log", log}};
  return j.dump(2) + "\n";
}

void write_dp_report_csv(std::ostream& out, const DpCheckReport& report,
                         const EmbeddingStore& store,
                         const OutputHeader& header) {
  write_comment_header(out, header);
  out << "# untestable=" << report.untestable << "\n";
  out << "# violations=" << report.violations << "\n";
  out << "w,w_prime,output,count_w,count_w_prime,log_ratio,"
         "log_ratio_lower_bound,bound,testable,violation\n";
  for (const DpCheckCell& c : report.cells) {
    out << store.word(c.w) << "," << store.word(c.w_prime) << ","
        << store.word(c.output) << "," << c.count_w << "," << c.count_w_prime
        << "," << fmt(c.log_ratio_estimate) << ","
        << fmt(c.log_ratio_lower_bound) << "," << fmt(c.bound) << ","
        << (c.testable ? 1 : 0) << "," << (c.violation ? 1 : 0) << "\n";
  }
}

}  // namespace metricdp
