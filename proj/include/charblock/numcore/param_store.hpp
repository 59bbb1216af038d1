#pragma once

#include <map>
#include <string>
#include <utility>

#include "charblock/numcore/tape.hpp"

namespace charblock {

// Named parameter arrays plus Adam moment slots. Names are unique, shapes
// fixed after creation, moments zero-initialized.
template <typename Scalar>
struct ParamStore {
  struct Slot {
    Mat<Scalar> value;
    Mat<Scalar> m;
    Mat<Scalar> v;
  };

  std::map<std::string, Slot> slots;

  Mat<Scalar>& add(const std::string& name, Mat<Scalar> init) {
    check(!slots.count(name), "ParamStore: duplicate parameter " + name);
    Slot s;
    s.m = Mat<Scalar>::Zero(init.rows(), init.cols());
    s.v = Mat<Scalar>::Zero(init.rows(), init.cols());
    s.value = std::move(init);
    return slots.emplace(name, std::move(s)).first->second.value;
  }

  bool contains(const std::string& name) const { return slots.count(name) > 0; }

  Mat<Scalar>& at(const std::string& name) {
    auto it = slots.find(name);
    check(it != slots.end(), "ParamStore: unknown parameter " + name);
    return it->second.value;
  }
  const Mat<Scalar>& at(const std::string& name) const {
    auto it = slots.find(name);
    check(it != slots.end(), "ParamStore: unknown parameter " + name);
    return it->second.value;
  }

  long num_values() const {
    long n = 0;
    for (const auto& [k, s] : slots) n += s.value.size();
    return n;
  }

  template <typename Other>
  ParamStore<Other> cast() const {
    ParamStore<Other> out;
    for (const auto& [k, s] : slots) {
      auto& slot = out.slots[k];
      slot.value = s.value.template cast<Other>();
      slot.m = s.m.template cast<Other>();
      slot.v = s.v.template cast<Other>();
    }
    return out;
  }
};

// Lazily materializes store entries as tape leaves; one leaf per name per
// tape. After backward(), collect_grads() returns the accumulated gradients.
template <typename Scalar>
class TapeParams {
 public:
  TapeParams(Tape<Scalar>& tape, ParamStore<Scalar>& store, bool trainable = true)
      : tape_(tape), store_(store), trainable_(trainable) {}

  Var<Scalar> operator[](const std::string& name) {
    auto it = leaves_.find(name);
    if (it != leaves_.end()) return Var<Scalar>{&tape_, it->second};
    Var<Scalar> v = tape_.leaf(store_.at(name), trainable_);
    leaves_.emplace(name, v.id);
    return v;
  }

  std::map<std::string, Mat<Scalar>> collect_grads() const {
    std::map<std::string, Mat<Scalar>> grads;
    for (const auto& [name, id] : leaves_) {
      const Mat<Scalar>& g = tape_.grad(id);
      if (g.size() != 0) grads[name] = g;
    }
    return grads;
  }

  Tape<Scalar>& tape() { return tape_; }
  ParamStore<Scalar>& store() { return store_; }

 private:
  Tape<Scalar>& tape_;
  ParamStore<Scalar>& store_;
  bool trainable_;
  std::map<std::string, int> leaves_;
};

}  // namespace charblock
