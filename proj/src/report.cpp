#include <cstdio>
#include <sstream>

#include "charblock/leakaudit/grid.hpp"

namespace charblock {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

const char* color_word(Verdict v) {
  switch (v) {
    case Verdict::leak: return "red";
    case Verdict::no_leak: return "white";
    case Verdict::inconclusive: return "gray";
  }
  return "?";
}

}  // namespace

std::string render_tsv(const GridAudit& grid) {
  std::ostringstream out;
  out << "config\tdelta\tvariant\tpos\taccuracy\tsuccesses\tn\tp_value\tverdict\n";
  for (const auto& cell : grid.cells) {
    for (const auto& stat : cell.report.positions) {
      out << cell.cell.label << '\t' << cell.report.delta << '\t'
          << to_string(cell.report.variant) << '\t' << stat.pos << '\t'
          << fmt("%.4f", stat.accuracy) << '\t' << stat.successes << '\t' << stat.n
          << '\t' << fmt("%.6e", stat.p_value) << '\t' << to_string(stat.verdict)
          << '\n';
    }
  }
  return out.str();
}

std::string render_markdown(const GridAudit& grid) {
  std::ostringstream out;
  if (grid.cells.empty()) return "";
  const int seq_len = grid.cells[0].report.positions.empty()
                          ? 0
                          : static_cast<int>(grid.cells[0].report.positions.size());
  out << "| config | delta |";
  for (int p = 1; p <= seq_len; ++p) out << ' ' << p << " |";
  out << "\n|---|---|";
  for (int p = 0; p < seq_len; ++p) out << "---|";
  out << '\n';
  for (const auto& cell : grid.cells) {
    out << "| " << cell.cell.label << " | " << cell.report.delta << " |";
    for (const auto& stat : cell.report.positions) {
      out << ' ' << fmt("%.4f", stat.accuracy) << ' ' << color_word(stat.verdict) << " |";
    }
    out << '\n';
    if (!cell.agreed()) {
      for (const auto& issue : cell.disagreements) {
        out << "| ^ disagreement | | " << issue << " |\n";
      }
    }
  }
  return out.str();
}

std::string render_oracle_tsv(const GridCell& cell, const ReachabilitySet& reach) {
  std::ostringstream out;
  out << "config\tdelta\tvariant\tpos\treachable\tcontributing_inputs\n";
  for (int t = 0; t < reach.seq_len; ++t) {
    out << cell.label << '\t' << reach.delta << '\t' << to_string(cell.config.variant)
        << '\t' << t + 1 << '\t' << (reach.reachable[t] ? 1 : 0) << '\t';
    for (size_t i = 0; i < reach.contributing[t].size(); ++i) {
      if (i) out << ',';
      out << reach.contributing[t][i];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace charblock
