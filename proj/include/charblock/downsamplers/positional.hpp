#pragma once

#include <cmath>

#include "charblock/numcore/tape.hpp"

namespace charblock {

// Standard transformer sinusoidal table: row p, channel 2i holds
// sin(p / 10000^(2i/d)), channel 2i+1 the matching cos.
template <typename Scalar>
Mat<Scalar> sinusoidal_table(int len, int dim) {
  check(len >= 0 && dim >= 1, "sinusoidal_table: bad shape");
  Mat<Scalar> table(len, dim);
  for (int p = 0; p < len; ++p) {
    for (int c = 0; c < dim; ++c) {
      const int i = c / 2;
      const double angle = p * std::exp(-std::log(10000.0) * (2.0 * i) / dim);
      table(p, c) = static_cast<Scalar>(c % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return table;
}

// E + sinusoidal positions, applied per sequence of length seq_len.
template <typename Scalar>
Var<Scalar> add_sinusoidal(Var<Scalar> E, int seq_len) {
  auto& t = *E.tape;
  detail::check_seq(E.rows(), seq_len, "add_sinusoidal");
  const int B = E.rows() / seq_len;
  Mat<Scalar> table = sinusoidal_table<Scalar>(seq_len, E.cols()).replicate(B, 1);
  return add(E, t.constant(std::move(table)));
}

}  // namespace charblock
