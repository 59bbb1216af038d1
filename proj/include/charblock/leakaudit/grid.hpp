#pragma once

// Table-1-style audit: for each (delta, variant, positions) cell, run the
// static reachability oracle and the trained probe, then cross-check them.
// Cells are independent and run concurrently.

#include <atomic>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "charblock/io/atomic_file.hpp"
#include "charblock/leakaudit/oracle.hpp"
#include "charblock/leakaudit/probe.hpp"

namespace charblock {

struct GridCell {
  std::string label;
  DownsamplerConfig config;
  ProbeSpec spec;
};

struct CellAudit {
  GridCell cell;
  ReachabilitySet reach;
  LeakReport report;
  std::vector<std::string> disagreements;

  bool agreed() const { return disagreements.empty(); }
};

struct GridAudit {
  std::vector<CellAudit> cells;

  bool agreement() const {
    for (const auto& c : cells) {
      if (!c.agreed()) return false;
    }
    return true;
  }
};

inline GridCell make_grid_cell(int delta, Variant variant, PosKind pos,
                               const ProbeSpec& base_spec, int model_dim) {
  GridCell cell;
  cell.config = decoder_config(delta, variant, pos, model_dim);
  cell.spec = base_spec;
  cell.spec.delta = delta;
  cell.spec.pad_multiplier = context_pad_multiplier(variant);
  cell.label = to_string(variant) + "/" + to_string(cell.config.pos_embedding) + "/d" +
               std::to_string(delta);
  // Per-cell seed derived from the base seed and the label so results do not
  // depend on execution order.
  cell.spec.seed = base_spec.seed ^ std::stoull(content_hash(cell.label), nullptr, 16);
  return cell;
}

// The paper's grid: non-causal GBST under both positional schemes plus every
// causal patch, for each delta.
inline std::vector<GridCell> default_grid(const std::vector<int>& deltas,
                                          const ProbeSpec& base_spec, int model_dim) {
  std::vector<GridCell> cells;
  for (const int delta : deltas) {
    cells.push_back(make_grid_cell(delta, Variant::non_causal, PosKind::sinusoidal,
                                   base_spec, model_dim));
    cells.push_back(make_grid_cell(delta, Variant::non_causal, PosKind::conv, base_spec,
                                   model_dim));
    for (const Variant v : {Variant::padding, Variant::removal, Variant::masking,
                            Variant::lee}) {
      cells.push_back(make_grid_cell(delta, v, PosKind::sinusoidal, base_spec, model_dim));
    }
  }
  return cells;
}

inline std::vector<std::string> cross_check(const ReachabilitySet& reach,
                                            const LeakReport& report) {
  std::vector<std::string> issues;
  for (const auto& stat : report.positions) {
    const bool reachable = reach.reachable[stat.pos - 1];
    if (!reachable && stat.verdict == Verdict::leak) {
      issues.push_back("probe reports leak at oracle-unreachable position " +
                       std::to_string(stat.pos));
    }
    if (reachable && stat.verdict == Verdict::no_leak) {
      issues.push_back("oracle-reachable position " + std::to_string(stat.pos) +
                       " is at chance");
    }
  }
  return issues;
}

inline CellAudit audit_cell(const GridCell& cell, const ProbeHyper& hyper) {
  CellAudit audit;
  audit.cell = cell;
  audit.reach = reachability_oracle(cell.config, cell.spec);
  ProbeModel probe = train_probe(cell.config, cell.spec, hyper);
  audit.report = eval_probe(probe, hyper.eval_batches);
  audit.report.label = cell.label;
  audit.disagreements = cross_check(audit.reach, audit.report);
  return audit;
}

inline GridAudit audit_grid(const std::vector<GridCell>& cells, const ProbeHyper& hyper,
                            int threads = 0) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  GridAudit grid;
  grid.cells.resize(cells.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      grid.cells[i] = audit_cell(cells[i], hyper);
    }
  };
  std::vector<std::thread> pool;
  const int n_workers = std::min<int>(threads, static_cast<int>(cells.size()));
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return grid;
}

// Report rendering (see External Interfaces): a TSV with one row per
// (cell, position) and a Markdown table mirroring the paper layout.
std::string render_tsv(const GridAudit& grid);
std::string render_markdown(const GridAudit& grid);
std::string render_oracle_tsv(const GridCell& cell, const ReachabilitySet& reach);

}  // namespace charblock
