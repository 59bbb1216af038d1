#include "charblock/downsamplers/config.hpp"

#include "charblock/bytedata.hpp"

namespace charblock {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::non_causal: return "non_causal";
    case Variant::padding: return "padding";
    case Variant::removal: return "removal";
    case Variant::masking: return "masking";
    case Variant::lee: return "lee";
  }
  return "?";
}

std::string to_string(PosKind p) {
  return p == PosKind::conv ? "conv" : "sinusoidal";
}

Variant variant_from_string(const std::string& s) {
  if (s == "non_causal") return Variant::non_causal;
  if (s == "padding") return Variant::padding;
  if (s == "removal") return Variant::removal;
  if (s == "masking") return Variant::masking;
  if (s == "lee") return Variant::lee;
  throw std::invalid_argument("unknown variant: " + s);
}

PosKind pos_kind_from_string(const std::string& s) {
  if (s == "conv") return PosKind::conv;
  if (s == "sinusoidal" || s == "sin") return PosKind::sinusoidal;
  throw std::invalid_argument("unknown pos embedding: " + s);
}

std::vector<int> causal_context(const std::vector<int>& tokens, int pad_len) {
  check(pad_len >= 0, "causal_context: negative padding");
  std::vector<int> ctx(tokens.size(), kBosId);
  const int keep = static_cast<int>(tokens.size()) - pad_len;
  for (int i = 0; i < keep; ++i) ctx[pad_len + i] = tokens[i];
  return ctx;
}

std::vector<int> causal_context(const std::vector<int>& tokens, int delta, Variant variant) {
  check(delta >= 1, "causal_context: delta must be >= 1");
  return causal_context(tokens, context_pad_multiplier(variant) * delta);
}

}  // namespace charblock
