#pragma once

#include <string>
#include <vector>

namespace charblock {

struct EvalResult {
  std::string metric;
  double value = 0.0;
  long support = 0;                 // sentence count
  std::vector<double> precisions;   // BLEU only, per n-gram order
  double brevity_penalty = 1.0;     // BLEU only
  long correct = 0;                 // accuracy metrics: exact counts
  long total = 0;
  std::string notes;
};

// Corpus BLEU on whitespace tokens: geometric mean of clipped n-gram
// precisions (uniform weights) times the brevity penalty. An order with zero
// clipped matches is floored at 1/(2 * hyp n-gram count); orders with no
// hypothesis n-grams at all are dropped from the mean. Value in [0, 100].
EvalResult corpus_bleu(const std::vector<std::string>& hyps,
                       const std::vector<std::string>& refs, int max_n = 4);

// Micro-averaged positional character match; positions beyond the shorter
// side count as wrong (denominator is max length).
EvalResult char_accuracy(const std::vector<std::string>& hyps,
                         const std::vector<std::string>& refs);

// Exact-match fraction.
EvalResult sequence_accuracy(const std::vector<std::string>& hyps,
                             const std::vector<std::string>& refs);

}  // namespace charblock
